#![no_main]

use critchain::cache::VectorCacheFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(file) = VectorCacheFile::decode(data) {
        let bytes = file.encode();
        let again = VectorCacheFile::decode(&bytes).expect("re-encoded cache file must decode");
        assert_eq!(again.encode(), bytes);
    }
});
