#![no_main]

//! A dump that parses must write back to text that parses to the same field.

use conelab::dump::{parse_field, write_field};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(f) = parse_field(text, "fuzz") else { return };
    let again = parse_field(&write_field(&f), "fuzz").expect("written dump parses");
    assert_eq!(again.grid().spec(), f.grid().spec());
    for (a, b) in again.values().iter().zip(f.values()) {
        assert!(a == b || (a.is_nan() && b.is_nan()));
    }
});
