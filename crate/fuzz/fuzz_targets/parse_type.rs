#![no_main]

use libfuzzer_sys::fuzz_target;
use pregroup_harmony::{max_reduction, parse_type};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(t) = parse_type(text) else { return };
    // printing and reparsing is lossless
    assert_eq!(parse_type(&t.to_string()).unwrap(), t);
    if t.len() <= 64 {
        let r = max_reduction(&t);
        assert_eq!(r.residual().len() + 2 * r.link_count(), t.len());
    }
});
