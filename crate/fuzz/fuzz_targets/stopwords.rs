#![no_main]

use libfuzzer_sys::fuzz_target;
use simthresh::textproc::{read_stopwords, Pipeline};

fuzz_target!(|data: &[u8]| {
    if let Ok(words) = read_stopwords(data) {
        let _ = Pipeline::new(words, true).process(&String::from_utf8_lossy(data));
    }
});
