#![no_main]

use libfuzzer_sys::fuzz_target;
use simthresh::threshold::{synonym_statistics, SynsetFile};

fuzz_target!(|data: &[u8]| {
    if let Ok(file) = SynsetFile::parse(data) {
        let _ = synonym_statistics(&file);
    }
});
