#![no_main]

use libfuzzer_sys::fuzz_target;
use pregroup_harmony::parse_tree;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(tree) = parse_tree(text) else { return };
    assert_eq!(parse_tree(&tree.to_string()).unwrap(), tree);
});
