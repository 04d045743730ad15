use std::path::PathBuf;
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blowdown")).args(args).output().unwrap()
}

fn tmp(name: &str, text: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("blowdown-cli-{}-{name}.toml", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn exit_codes() {
    let ok = scenario("k2_4_pi2");
    let out = run(&["verify", ok.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let strict = run(&["verify", "--strict", ok.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(1));

    let wrong = tmp(
        "wrong",
        "schema = 1\n[surface]\npreset = \"enriques_kondo\"\n[surgery]\ncontext = \"complex\"\nexpect = { e = 11 }\n",
    );
    assert_eq!(run(&["verify", wrong.to_str().unwrap()]).status.code(), Some(1));

    let bad = tmp("bad", "schema = 1\n[surface]\npreset = \"enriques_kondo\"\n[pairings]\nS1.A1 = -1\nS1.Q = 1\n");
    let out = run(&["verify", ok.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line ") && err.contains("pairings"), "{err}");
    // the good file is still reported
    assert!(String::from_utf8_lossy(&out.stdout).contains("k2_4_pi2"));

    let missing = run(&["verify", "/nonexistent/x.toml"]);
    assert_eq!(missing.status.code(), Some(2));
    for p in [wrong, bad] {
        let _ = std::fs::remove_file(p);
    }
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    for name in ["k2_4_pi2", "k2_5_sympl", "cover_k3", "cover_b2plus3"] {
        let p = scenario(name);
        let a = run(&["verify", "--format", "json", p.to_str().unwrap()]);
        let b = run(&["verify", "--format", "json", p.to_str().unwrap()]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{name}");
        let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
        assert_eq!(v["status"], "pass");
    }
}

#[test]
fn reports_follow_argument_order() {
    let names = ["cover_b2plus3", "k2_4_pi2", "cover_k3", "k2_5_sympl"];
    let paths: Vec<String> = names.iter().map(|n| scenario(n).to_string_lossy().into_owned()).collect();
    let mut args = vec!["verify"];
    args.extend(paths.iter().map(String::as_str));
    let out = String::from_utf8(run(&args).stdout).unwrap();
    let pos: Vec<usize> = names.iter().map(|n| out.find(&format!("scenario {n}:")).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{pos:?}");
}

#[test]
fn helper_commands() {
    let out = run(&["expand", "361", "246"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[2,2,9,2,2,2,2,4]");
    let out = run(&["recognize", "5,8,6,2,3,2,2,2,2,2,3,2,2,2"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("151"));
    let out = run(&["recognize", "2,2"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("not a Wahl chain"));
    let out = run(&["chains", "--max-length", "3"]);
    let rows = String::from_utf8_lossy(&out.stdout).lines().count();
    assert_eq!(rows, 1 + 2 + 4);
    let k3 = scenario("cover_k3");
    let out = run(&["gram", "--cover", k3.to_str().unwrap(), "F_a,E1_a,E1_b"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("det = "), "{text}");
    assert_eq!(run(&["expand", "3", "5"]).status.code(), Some(2));
}

#[test]
fn batch_json_is_the_single_runs_in_order() {
    let names = ["k2_5_sympl", "cover_k3", "k2_4_pi2", "cover_b2plus3"];
    let paths: Vec<String> = names.iter().map(|n| scenario(n).to_string_lossy().into_owned()).collect();
    let mut args = vec!["verify", "--format", "json"];
    args.extend(paths.iter().map(String::as_str));
    let batch = run(&args).stdout;
    let singles: Vec<u8> = paths.iter().flat_map(|p| run(&["verify", "--format", "json", p]).stdout).collect();
    assert_eq!(batch, singles);
}

#[test]
fn search_finishes_a_truncated_program() {
    let text = std::fs::read_to_string(scenario("k2_5_sympl")).unwrap();
    // keep the first ten blow-ups and drop the pi1 section
    let mut kept = String::new();
    let mut blowups = 0;
    let mut skipping = false;
    for line in text.lines() {
        if line.starts_with('[') {
            if line == "[[blowups]]" {
                blowups += 1;
            }
            skipping = (line == "[[blowups]]" && blowups > 10) || line == "[pi1]";
        }
        if !skipping {
            kept.push_str(line);
            kept.push('\n');
        }
    }
    let p = tmp("trunc", &kept);
    let out = run(&["search", p.to_str().unwrap(), "--steps", "2", "--witness", "--limit", "50"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0));
    assert!(text.contains("# witness "), "{text}");
    assert!(text.contains("at = [\"F\", \"S2\"]"), "{text}");
    let none = run(&["search", p.to_str().unwrap(), "--steps", "1", "--witness"]);
    assert!(String::from_utf8_lossy(&none.stdout).contains("no program"));
    let _ = std::fs::remove_file(p);
}
