#![no_main]

use libfuzzer_sys::fuzz_target;
use simthresh::retrieval::read_topics;

fuzz_target!(|data: &[u8]| {
    let _ = read_topics(data);
});
