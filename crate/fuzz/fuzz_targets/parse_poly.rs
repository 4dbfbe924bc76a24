#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = weierdiv::io::parse_poly(text) {
            let again = weierdiv::io::parse_poly(&weierdiv::io::poly_to_json(&p)).expect("round-trip");
            assert_eq!(p, again);
        }
    }
});
