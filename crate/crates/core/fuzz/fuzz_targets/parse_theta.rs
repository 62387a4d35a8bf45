#![no_main]

use libfuzzer_sys::fuzz_target;
use powtrig::AngleForm;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(theta) = AngleForm::parse(s) {
        // the display form parses back to the same angle
        let again = AngleForm::parse(&theta.to_string()).expect("display output reparses");
        assert_eq!(again.exact_rational(), theta.exact_rational());
        let a = theta.approx(64);
        assert!(a.lo() <= a.hi());
    }
});
