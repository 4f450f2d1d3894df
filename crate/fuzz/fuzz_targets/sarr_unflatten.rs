#![no_main]

use libfuzzer_sys::fuzz_target;
use sarr::codec::{sarr_forward, sarr_inverse, sarr_unflatten};
use sarr::symmetry::all_classes;

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else {
        return;
    };
    let classes: Vec<_> = all_classes().collect();
    let class = classes[selector as usize % classes.len()];
    let flat: Vec<f64> = rest
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let Ok(value) = sarr_unflatten(&flat, class) else {
        return;
    };
    for (i, degree) in class.kappa.axes().into_iter().enumerate() {
        assert!(value.sin(i).abs() <= 1.0 && value.cos(i).abs() <= 1.0);
        if degree.is_infinite() {
            assert_eq!((value.sin(i), value.cos(i)), (0.0, 1.0));
        }
    }
    let decoded = sarr_inverse(&value);
    let angles = decoded.euler.as_array();
    assert!(angles.iter().all(|a| a.is_finite()));
    let _ = sarr_forward(&decoded.euler);
});
