use std::path::PathBuf;
use std::process::Command;

fn model(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(format!("{name}.json")).display().to_string()
}

fn bwc(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bwc")).args(args).env_remove("BWC_SEED").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn exit_codes_follow_the_printed_verdict() {
    let cases = [
        ("fig1", "a", "S(p1)&AS(p2)"),
        ("fig2", "c", "S(p1)&AS(p2)"),
        ("fig3", "a", "S(p1)&AS(p2)"),
        ("fig3", "a", "S(p1)&P>99/100(p2)"),
        ("coin", "s0", "S(p1)&P>1/2(p2)"),
        ("coin", "s0", "S(p1)&P>=0(p2)"),
        ("diamond_odd", "s0", "S(p1)&P>=1/2(reach t)"),
        ("diamond_even", "s0", "S(p1)&P>=1/2(reach t)"),
        ("loop_odd", "s0", "S(p1)&P>=1/2(reach t)"),
        ("loop_even", "s0", "S(p1)&P>=1/2(reach t)"),
    ];
    for (name, from, prop) in cases {
        let (code, out, _) = bwc(&["solve", &model(name), "--from", from, "--prop", prop]);
        let verdict = out.lines().next().unwrap();
        assert_eq!(code, if verdict == "YES" { 0 } else { 1 }, "{name} {prop}: {out}");
        let (jcode, json, _) = bwc(&["--json", "solve", &model(name), "--from", from, "--prop", prop]);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["verdict"], verdict);
        assert_eq!(jcode, code);
    }
}

#[test]
fn golden_verdicts() {
    assert_eq!(bwc(&["solve", &model("fig1"), "--from", "a", "--prop", "S(p1)&AS(p2)"]).0, 0);
    assert_eq!(bwc(&["solve", &model("fig3"), "--from", "a", "--prop", "S(p1)&P>99/100(p2)"]).0, 0);
    assert_eq!(bwc(&["solve", &model("fig3"), "--from", "a", "--prop", "S(p1)&AS(p2)"]).0, 1);
}

#[test]
fn malformed_input_exits_two() {
    let (code, _, err) = bwc(&["solve", &model("fig1"), "--from", "a", "--prop", "S(p1)&P>0.5(p2)"]);
    assert_eq!(code, 2);
    assert!(err.contains("not a rational"), "{err}");
    assert_eq!(bwc(&["solve", &model("fig1"), "--from", "zz", "--prop", "S(p1)&AS(p2)"]).0, 2);
    assert_eq!(bwc(&["solve", "/nonexistent.json", "--prop", "S(p1)&AS(p2)"]).0, 2);
    assert_eq!(bwc(&["solve", &model("fig1"), "--prop", "S(p1)&AS(reach nowhere)"]).0, 2);
}

#[test]
fn synth_verify_and_simulate() {
    let dir = std::env::temp_dir().join(format!("bwc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("fig1.json").display().to_string();
    assert_eq!(bwc(&["synth", &model("fig1"), "--from", "a", "--prop", "S(p1)&AS(p2)", "-o", &out]).0, 0);
    let (code, text, _) = bwc(&["verify", &model("fig1"), &out, "--from", "a", "--prop", "S(p1)&AS(p2)"]);
    assert_eq!(code, 0, "{text}");
    // a strategy built for one model is refused on another
    assert_eq!(bwc(&["verify", &model("fig2"), &out, "--from", "a", "--prop", "S(p1)&AS(p2)"]).0, 2);

    let sim = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_bwc"));
        cmd.args(["--json", "simulate", &model("fig1"), &out, "--from", "a", "--runs", "50", "--steps", "300"]);
        match seed {
            Some(s) => cmd.env("BWC_SEED", s),
            None => cmd.env_remove("BWC_SEED"),
        };
        let o = cmd.output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()
    };
    let a = sim(Some("17"));
    assert_eq!(a["seed"], 17);
    assert_eq!(a["violations"], 0);
    assert_eq!(a, sim(Some("17")));
    assert_eq!(sim(None)["seed"], 0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn components_and_oracle_reports() {
    let (code, out, _) = bwc(&["--json", "components", &model("fig3")]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["ugec_union"], serde_json::json!([]));
    assert_eq!(v["vgec_union"], serde_json::json!(["a", "b", "c"]));
    for name in ["fig1", "fig2", "fig3", "coin"] {
        let (code, out, _) = bwc(&["oracle", &model(name)]);
        assert_eq!(code, 0, "{name}: {out}");
    }
}
