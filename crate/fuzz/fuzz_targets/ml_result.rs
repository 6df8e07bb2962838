#![no_main]

use bellswap::formats::parse_ml_result;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let _ = parse_ml_result(text);
});
