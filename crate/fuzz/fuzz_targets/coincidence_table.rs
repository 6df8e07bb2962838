#![no_main]

use bellswap::formats::{parse_coincidence_table, write_coincidence_table};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(table) = parse_coincidence_table(text) else { return };
    let again = parse_coincidence_table(&write_coincidence_table(&table)).expect("written table parses");
    assert_eq!(table, again);
    for r in [table.r, 0.0] {
        let _ = bellswap::estimate_r(&table, r);
    }
});
