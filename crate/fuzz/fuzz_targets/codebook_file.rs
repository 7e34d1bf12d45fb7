#![no_main]

use libfuzzer_sys::fuzz_target;
use pilotgain::codebooks::{read_codebook, write_codebook};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = read_codebook(text) {
        // Anything accepted must survive a write/read round trip.
        let again = read_codebook(&write_codebook(&p)).expect("round trip");
        assert_eq!(again, p);
    }
});
