use std::fs;
use std::path::PathBuf;

use powtrig::report::{decode_shell_csv, encode_shell_csv};
use powtrig::{parse_interval, AngleForm};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter_map(|p| fs::read(&p).ok().and_then(|b| String::from_utf8(b).ok()).map(|s| (p, s)))
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn theta_seeds() {
    let mut parsed = 0;
    for (path, s) in seeds("parse_theta") {
        if let Ok(theta) = AngleForm::parse(&s) {
            parsed += 1;
            let again = AngleForm::parse(&theta.to_string()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(again.exact_rational(), theta.exact_rational());
            let a = theta.approx(64);
            assert!(a.lo() <= a.hi());
        }
    }
    assert!(parsed >= 10);
}

#[test]
fn interval_seeds() {
    for (_, s) in seeds("parse_interval") {
        if let Ok((a, b)) = parse_interval(&s) {
            assert_eq!(parse_interval(&format!("{a},{b}")).unwrap(), (a, b));
        }
    }
}

#[test]
fn shell_csv_seeds() {
    let mut decoded = 0;
    for (_, s) in seeds("shell_csv") {
        if let Ok(rows) = decode_shell_csv(&s) {
            decoded += 1;
            let text = encode_shell_csv(&rows).unwrap();
            assert_eq!(decode_shell_csv(&text).unwrap(), rows);
        }
    }
    assert!(decoded >= 2);
}
