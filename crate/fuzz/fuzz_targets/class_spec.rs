#![no_main]

use libfuzzer_sys::fuzz_target;
use structural_logic::class::parse_class_spec;
use structural_logic::Error;

// Referenced theory files resolve to a fixed small theory.
const THEORY: &str = "(theory (name \"t\") (vocab (rel E 2)) (sentence (forall z0 (not (rel E z0 z0)))))";

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let mut load = |name: &str| {
            if name.len() < 64 {
                Ok(THEORY.to_string())
            } else {
                Err(Error::Io {
                    path: name.to_string(),
                    msg: "not found".into(),
                })
            }
        };
        let _ = parse_class_spec(text, &mut load);
    }
});
