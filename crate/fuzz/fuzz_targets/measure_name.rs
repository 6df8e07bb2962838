#![no_main]

use bellswap::{FamilyKind, RandomStateMeasure};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let _ = text.parse::<RandomStateMeasure>();
    let _ = text.parse::<FamilyKind>();
});
