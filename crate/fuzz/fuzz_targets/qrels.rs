#![no_main]

use libfuzzer_sys::fuzz_target;
use simthresh::eval::Qrels;

fuzz_target!(|data: &[u8]| {
    let _ = Qrels::parse(data);
});
