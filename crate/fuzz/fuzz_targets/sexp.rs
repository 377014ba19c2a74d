#![no_main]

use libfuzzer_sys::fuzz_target;
use structural_logic::sexp::parse_all;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(items) = parse_all(text) {
            for s in items {
                let printed = s.to_string();
                let again = parse_all(&printed).expect("printed s-expressions reparse");
                assert_eq!(again.len(), 1);
                assert_eq!(again[0].to_string(), printed);
            }
        }
    }
});
