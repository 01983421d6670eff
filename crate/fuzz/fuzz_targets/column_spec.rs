#![no_main]

use libfuzzer_sys::fuzz_target;
use wsd_cli::parse_column_spec;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = std::str::from_utf8(data) {
        if let Ok(refs) = parse_column_spec(spec) {
            assert!(!refs.is_empty());
        }
    }
});
