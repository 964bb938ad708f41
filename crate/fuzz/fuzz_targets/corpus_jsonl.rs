#![no_main]

use libfuzzer_sys::fuzz_target;
use simthresh::retrieval::JsonlDocuments;

fuzz_target!(|data: &[u8]| {
    for doc in JsonlDocuments::new(data) {
        if doc.is_err() {
            break;
        }
    }
});
