#![no_main]

use libfuzzer_sys::fuzz_target;
use sarr::bop::parse_scene_gt_info;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(map) = parse_scene_gt_info(text) {
            for v in map.values().flatten() {
                assert!((0.0..=1.0).contains(v));
            }
        }
    }
});
