//! Replays the checked-in fuzz seeds through each parser: `seed_valid*`
//! files must parse, every other seed must be rejected with an error.

use std::fs;
use std::path::Path;

use simthresh::config::Config;
use simthresh::embedding::read_word2vec;
use simthresh::eval::{Qrels, Run};
use simthresh::retrieval::{read_topics, Index, JsonlDocuments, TrecDocuments};
use simthresh::textproc::read_stopwords;
use simthresh::threshold::SynsetFile;
use simthresh::VectorFormat;

fn parses(target: &str, data: &[u8]) -> bool {
    match target {
        "word2vec_text" => read_word2vec(data, VectorFormat::Word2VecText, "seed").is_ok(),
        "word2vec_binary" => read_word2vec(data, VectorFormat::Word2VecBinary, "seed").is_ok(),
        "synsets" => SynsetFile::parse(data).is_ok(),
        "stopwords" => read_stopwords(data).is_ok(),
        "corpus_jsonl" => JsonlDocuments::new(data).all(|d| d.is_ok()),
        "corpus_trec" => TrecDocuments::new(data).all(|d| d.is_ok()),
        "topics" => read_topics(data).is_ok(),
        "qrels" => Qrels::parse(data).is_ok(),
        "trec_run" => Run::parse(data).is_ok(),
        "config" => Config::parse(data).is_ok(),
        "index_json" => Index::read_json(data).is_ok(),
        other => panic!("no parser for fuzz target {other}"),
    }
}

#[test]
fn seeds_replay_without_panics() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let mut seen = 0;
    for target in fs::read_dir(&root).unwrap() {
        let target = target.unwrap();
        let name = target.file_name().into_string().unwrap();
        for seed in fs::read_dir(target.path()).unwrap() {
            let seed = seed.unwrap();
            let data = fs::read(seed.path()).unwrap();
            let valid = seed.file_name().to_string_lossy().starts_with("seed_valid");
            assert_eq!(
                parses(&name, &data),
                valid,
                "{name}/{}",
                seed.file_name().to_string_lossy()
            );
            seen += 1;
        }
    }
    assert!(seen >= 22);
}
