#![no_main]

use libfuzzer_sys::fuzz_target;
use pregroup_harmony::TensorLexicon;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = TensorLexicon::parse(text);
    }
});
