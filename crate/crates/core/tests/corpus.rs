use std::fs;
use std::path::PathBuf;

use critchain::cache::VectorCacheFile;
use critchain::config::RunConfig;
use critchain::reference::ReferenceTable;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            let bytes = fs::read(&path).unwrap();
            (path, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn cache_seeds_decode_and_round_trip() {
    for (path, bytes) in seeds("cache_decode") {
        let file =
            VectorCacheFile::decode(&bytes).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(file.encode(), bytes, "{}", path.display());
        let mut flipped = bytes.clone();
        let last = flipped.len() - 1;
        flipped[last] ^= 1;
        assert!(VectorCacheFile::decode(&flipped).is_err());
        assert!(VectorCacheFile::decode(&bytes[..bytes.len() / 2]).is_err());
    }
}

#[test]
fn config_seeds_parse_and_round_trip() {
    for (path, bytes) in seeds("run_config_parse") {
        let text = String::from_utf8(bytes).unwrap();
        let config: RunConfig = text
            .parse()
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(config.canonical(), text);
        assert_eq!(config.canonical().parse::<RunConfig>().unwrap(), config);
    }
}

#[test]
fn reference_seeds_parse() {
    for (path, bytes) in seeds("reference_parse") {
        let text = String::from_utf8(bytes).unwrap();
        let table =
            ReferenceTable::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(!table.is_empty());
        for row in table.rows() {
            assert_eq!(table.get(&row.key), Some(row.value));
        }
    }
}
