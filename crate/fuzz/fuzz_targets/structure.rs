#![no_main]

use libfuzzer_sys::fuzz_target;
use structural_logic::parse::{parse_decorated, parse_structure};
use structural_logic::print::{print_decorated, print_structure};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(s) = parse_structure(text) {
            assert_eq!(parse_structure(&print_structure(&s)).expect("reparse"), s);
        }
        if let Ok(d) = parse_decorated(text) {
            assert_eq!(parse_decorated(&print_decorated(&d)).expect("reparse"), d);
        }
    }
});
