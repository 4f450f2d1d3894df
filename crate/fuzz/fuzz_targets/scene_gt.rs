#![no_main]

use libfuzzer_sys::fuzz_target;
use sarr::bop::{format_scene_gt, parse_scene_gt};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(records) = parse_scene_gt(text, 0) else {
        return;
    };
    // Anything accepted must survive a write/read cycle unchanged.
    let written = format_scene_gt(&records);
    let again = parse_scene_gt(&written, 0).expect("formatted output parses");
    assert_eq!(format_scene_gt(&again), written);
});
