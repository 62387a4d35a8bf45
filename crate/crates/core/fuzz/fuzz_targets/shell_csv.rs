#![no_main]

use libfuzzer_sys::fuzz_target;
use powtrig::report::{decode_shell_csv, encode_shell_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = decode_shell_csv(s) {
        let text = encode_shell_csv(&rows).expect("decoded rows encode");
        assert_eq!(decode_shell_csv(&text).expect("encoded rows decode"), rows);
    }
});
