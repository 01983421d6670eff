#![no_main]

use libfuzzer_sys::fuzz_target;
use wsd_cli::{ingest_bytes, Layout};

fuzz_target!(|data: &[u8]| {
    // The first byte picks the delimiter and header handling.
    let Some((&mode, body)) = data.split_first() else {
        return;
    };
    let mut layout = Layout::new("1", None).unwrap();
    layout.delimiter = [b',', b';', b'\t', b' '][(mode & 3) as usize];
    layout.has_header = mode & 4 == 0;
    if let Ok(set) = ingest_bytes(body, &layout) {
        assert_eq!(set.ids.len(), set.clouds.len());
        assert!(set.clouds.iter().all(|c| !c.is_empty()));
    }
});
