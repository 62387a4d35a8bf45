#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok((a, b)) = powtrig::parse_interval(s) {
        let again = powtrig::parse_interval(&format!("{a},{b}")).expect("rationals reparse");
        assert_eq!(again, (a, b));
    }
});
