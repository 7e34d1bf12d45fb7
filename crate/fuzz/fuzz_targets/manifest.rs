#![no_main]

use libfuzzer_sys::fuzz_target;
use pilotgain_cli::manifest::Manifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = Manifest::parse(text) {
        let again = Manifest::parse(&m.to_json()).expect("round trip");
        assert_eq!(again.to_json(), m.to_json());
    }
});
