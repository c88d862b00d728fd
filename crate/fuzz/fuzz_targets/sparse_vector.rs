#![no_main]

use libfuzzer_sys::fuzz_target;
use shiftlab::{Mode, VecEntries};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for mode in [Mode::Unilateral, Mode::Bilateral] {
        if let Ok(e) = serde_json::from_str::<VecEntries>(text) {
            let _ = e.into_vec(mode);
        }
    }
});
