#![no_main]

use libfuzzer_sys::fuzz_target;
use sarr::bop::{format_results_csv, parse_results_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(records) = parse_results_csv(text) else {
        return;
    };
    // Missing optional columns are filled in on the first write; after that the
    // text is a fixed point.
    let written = format_results_csv(&records);
    let again = parse_results_csv(&written).expect("formatted output parses");
    assert_eq!(format_results_csv(&again), written);
});
