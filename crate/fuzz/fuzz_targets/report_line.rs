#![no_main]

use libfuzzer_sys::fuzz_target;
use wsd_cli::ReportRecord;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(record) = ReportRecord::parse_line(line) {
        let once = record.to_line();
        let again = ReportRecord::parse_line(&once).unwrap().to_line();
        assert_eq!(once, again);
    }
});
