#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(seq) = weierdiv::io::parse_sequence(text) {
            let _ = seq.check_regularity();
        }
    }
});
