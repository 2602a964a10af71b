#![no_main]

use critchain::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = text.parse::<RunConfig>() {
        let canonical = config.canonical();
        let again: RunConfig = canonical.parse().expect("canonical form must parse");
        assert_eq!(again.canonical(), canonical);
    }
});
