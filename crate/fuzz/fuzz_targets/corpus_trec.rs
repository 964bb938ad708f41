#![no_main]

use libfuzzer_sys::fuzz_target;
use simthresh::retrieval::TrecDocuments;

fuzz_target!(|data: &[u8]| {
    for doc in TrecDocuments::new(data) {
        if doc.is_err() {
            break;
        }
    }
});
