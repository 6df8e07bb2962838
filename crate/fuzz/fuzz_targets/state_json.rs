#![no_main]

use bellswap::formats::{parse_state_json, write_state_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(rho) = parse_state_json(text) {
        let again = parse_state_json(&write_state_json(&rho)).expect("written state parses");
        assert_eq!(rho, again);
    }
});
