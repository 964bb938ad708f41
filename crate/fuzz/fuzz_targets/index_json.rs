#![no_main]

use libfuzzer_sys::fuzz_target;
use simthresh::retrieval::Index;

fuzz_target!(|data: &[u8]| {
    let _ = Index::read_json(data);
});
