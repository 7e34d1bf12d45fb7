#![no_main]

use libfuzzer_sys::fuzz_target;
use pilotgain::channel::parse_gains;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_gains(text) {
        assert!(g.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
});
