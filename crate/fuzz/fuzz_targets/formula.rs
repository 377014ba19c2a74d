#![no_main]

use libfuzzer_sys::fuzz_target;
use structural_logic::parse::parse_formula;
use structural_logic::print::print_formula;
use structural_logic::syntax::targets_normalized;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(f) = parse_formula(text) {
            assert!(targets_normalized(&f));
            assert_eq!(parse_formula(&print_formula(&f)).expect("printed formulas reparse"), f);
        }
    }
});
