#![no_main]

use libfuzzer_sys::fuzz_target;
use shiftlab::WeightSeq;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(w) = WeightSeq::from_json(text) {
        // an accepted descriptor evaluates without panicking
        for k in -8..8 {
            let _ = w.weight_at(k);
        }
        let _ = w.shift_norm_bound(16);
    }
});
