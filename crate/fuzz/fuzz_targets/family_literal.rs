#![no_main]

use bellswap::formats::{looks_like_family_literal, parse_family_literal};
use bellswap::make_family;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(family) = parse_family_literal(text) {
        assert!(looks_like_family_literal(text.trim()));
        make_family(family).expect("in-range family member is a state");
    }
});
