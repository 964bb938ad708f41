#![no_main]

use libfuzzer_sys::fuzz_target;
use simthresh::{embedding::read_word2vec, VectorFormat};

fuzz_target!(|data: &[u8]| {
    let _ = read_word2vec(data, VectorFormat::Word2VecText, "fuzz");
});
