#![no_main]

use bellswap::formats::{parse_r_records, write_r_matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(records) = parse_r_records(text) else { return };
    if let Ok(r) = records.r_matrix() {
        let again = parse_r_records(&write_r_matrix(&r)).expect("written R parses");
        let bits = |v: [f64; 6]| v.map(f64::to_bits);
        assert_eq!(bits(records.values), bits(again.values));
    }
    if let Ok(problem) = records.problem() {
        let _ = bellswap::ml_reconstruct(&problem);
    }
});
