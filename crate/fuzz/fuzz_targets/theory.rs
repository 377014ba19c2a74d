#![no_main]

use libfuzzer_sys::fuzz_target;
use structural_logic::parse::parse_theory;
use structural_logic::print::print_theory;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(t) = parse_theory(text) {
            assert_eq!(parse_theory(&print_theory(&t, &[])).expect("reparse"), t);
        }
    }
});
