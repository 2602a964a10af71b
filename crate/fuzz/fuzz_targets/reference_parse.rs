#![no_main]

use critchain::reference::ReferenceTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = ReferenceTable::parse(text) {
        for row in table.rows() {
            assert!(table.get(&row.key).is_some());
        }
    }
});
