//! Replays the fuzz seed corpora through the parsers.

use std::fs;
use std::path::PathBuf;

use ppmx::container::Container;
use ppmx::huffman::HuffmanCodebook;
use ppmx::ppm_codec::decode;

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    assert!(!paths.is_empty(), "no seeds in {}", dir.display());
    paths.iter().map(|p| fs::read(p).unwrap()).collect()
}

#[test]
fn container_seeds_reserialize_exactly() {
    let mut parsed = 0;
    for data in seeds("container_read") {
        if let Ok(c) = Container::read(&data) {
            assert_eq!(c.write(), data);
            parsed += 1;
        }
    }
    assert!(parsed > 0);
}

#[test]
fn decompress_seeds_never_panic() {
    let mut decoded = 0;
    for data in seeds("decompress") {
        let Ok(c) = Container::read(&data) else {
            continue;
        };
        if c.original_length > 1 << 20 {
            continue;
        }
        if let Ok(out) = decode(&c) {
            assert_eq!(out.len() as u64, c.original_length);
            decoded += 1;
        }
    }
    assert!(decoded > 0);
}

#[test]
fn code_table_seeds_roundtrip() {
    for data in seeds("code_table") {
        if let Ok(cb) = HuffmanCodebook::deserialize_lengths(&data) {
            assert_eq!(cb.serialize_lengths(), data);
        }
    }
}
