use std::process::{Command, Output};

use serde_json::Value;

fn powtrig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powtrig"))
        .args(args)
        .env_remove("POWTRIG_DIGITS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_quarter() {
    let out = powtrig(&["classify", "--kind", "sin", "--theta", "1/4"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], "powtrig.classify.v1");
    assert_eq!(v["report"]["class"], "diverges_to_plus_infinity");
    assert_eq!(v["report"]["a0"], 2);
    assert_eq!(v["config"]["theta"], "1/4");
    assert!(v["tool"]["version"].is_string());
}

#[test]
fn zero_denominator_exits_one() {
    let out = powtrig(&["classify", "--theta", "2/0"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "ZeroDenominator");
    assert!(out.stdout.is_empty());
}

#[test]
fn strict_refuses_unreduced() {
    let out = powtrig(&["classify", "--theta", "2/8", "--strict"]);
    assert_eq!(out.status.code(), Some(1));
    let ok = powtrig(&["classify", "--theta", "2/8"]);
    assert_eq!(json(&ok)["report"]["q"], 4);
}

#[test]
fn leibniz_sum() {
    let out = powtrig(&["sum", "--kind", "sin", "--theta", "1/2", "--alpha", "1", "--N", "100000"]);
    assert!(out.status.success());
    let v = json(&out);
    let mid = v["report"]["value"]["mid_f64"].as_f64().unwrap();
    // S_N - π/4 = Σ_{n>N} (-1)^{(n-1)/2}/n over odd n, |·| ≤ 1/(N+1)
    assert!((mid - std::f64::consts::FRAC_PI_4).abs() < 1.0 / 100_001.0);
    assert!(v["report"]["value"]["rad"].is_string());
    assert!(v["precision"]["budget"]["working_digits"].as_u64().unwrap() >= 22);
}

#[test]
fn accelerated_matches_direct() {
    let a = json(&powtrig(&["sum", "--kind", "cos", "--theta", "1/3", "--N", "3000", "--accelerated"]));
    let d = json(&powtrig(&["sum", "--kind", "cos", "--theta", "1/3", "--N", "3000"]));
    let (x, y) = (a["report"]["value"]["mid_f64"].as_f64().unwrap(), d["report"]["value"]["mid_f64"].as_f64().unwrap());
    assert!((x - y).abs() < 1e-12);
}

#[test]
fn digits_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_powtrig"))
        .args(["sum", "--kind", "sin", "--theta", "const:golden", "--N", "100"])
        .env("POWTRIG_DIGITS", "30")
        .output()
        .unwrap();
    let v = json(&out);
    assert_eq!(v["config"]["precision"]["digits"], 30);
    assert_eq!(v["precision"]["budget"]["working_digits"], 30 + 2 + 10);
}

#[test]
fn rate_certificate_holds() {
    let v = json(&powtrig(&["rate-cert", "--theta", "1/4", "--kind", "sin", "--alpha", "1", "--L", "1000"]));
    assert_eq!(v["report"]["holds"], true);
    assert_eq!(v["report"]["A_q"], 2);
    let bad = powtrig(&["rate-cert", "--theta", "1/3", "--kind", "sin", "--L", "10"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn shells_csv_and_json() {
    let dir = std::env::temp_dir().join(format!("powtrig-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fit.json");
    let out = powtrig(&[
        "shells", "--theta", "const:golden", "--kind", "cos", "--smax", "8", "--nmax", "20000", "--json-out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("s,epsilon,count,min_gap,shell_sum_mid,shell_sum_rad,truncated"));
    assert_eq!(text.lines().count(), 10);
    let back = powtrig::report::decode_shell_csv(&text).unwrap();
    assert_eq!(powtrig::report::encode_shell_csv(&back).unwrap(), text);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["report"]["gap_fit"]["exponent"].is_f64());
    std::fs::remove_dir_all(&dir).ok();

    let rational = powtrig(&["shells", "--theta", "1/3", "--nmax", "100"]);
    assert_eq!(rational.status.code(), Some(1));
}

#[test]
fn liouville_exponents_are_strings() {
    let v = json(&powtrig(&["liouville", "--interval", "0,1", "--depth", "3"]));
    let nu = v["report"]["schedule"]["nu"].as_array().unwrap();
    assert_eq!(nu[0], "2");
    assert_eq!(nu[1], "119");
    assert_eq!(v["report"]["certificates"].as_array().unwrap().len(), 2);
    let empty = powtrig(&["liouville", "--interval", "1,1"]);
    assert_eq!(empty.status.code(), Some(1));
}

#[test]
fn cf_golden() {
    let v = json(&powtrig(&["cf", "--theta", "const:golden", "--K", "20"]));
    assert_eq!(v["report"]["convergents"].as_array().unwrap().len(), 21);
    assert!(v["report"]["mu"]["mu_hat"].is_f64());
}

#[test]
fn measure_is_seeded() {
    let args = ["measure", "--alpha", "0.6", "--N", "200", "--samples", "30", "--seed", "42"];
    let a = powtrig(&args);
    let b = powtrig(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["report"]["seed"], 42);
}

#[test]
fn gelfond_ratio() {
    let v = json(&powtrig(&["gelfond", "--z", "0.999", "--alpha", "0.5"]));
    let r = v["report"]["ratio"]["mid_f64"].as_f64().unwrap();
    assert!(r > 0.97 && r < 1.0);
    assert_eq!(powtrig(&["gelfond", "--z", "1.5", "--alpha", "0.5"]).status.code(), Some(1));
}
