#![no_main]

use libfuzzer_sys::fuzz_target;
use simthresh::eval::Run;

fuzz_target!(|data: &[u8]| {
    let _ = Run::parse(data);
});
