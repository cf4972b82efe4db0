use std::process::{Command, Output};

use serde_json::Value;

fn trisquare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trisquare"))
        .args(args)
        .output()
        .expect("spawn trisquare")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn decide_nonunit() {
    let o = trisquare(&["decide", "nonunit3", "92"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "none");

    let o = trisquare(&["--format", "json", "decide", "nonunit3", "93"]);
    assert_eq!(o.status.code(), Some(0));
    let v = &json_lines(&o)[0];
    let w: Vec<i64> = serde_json::from_value(v["witness"].clone()).unwrap();
    assert_eq!(w.iter().map(|x| x * x).sum::<i64>(), 93);
    assert!(w.iter().all(|x| x * x != 1));

    let o = trisquare(&["--format", "json", "decide", "nonunit3", "92"]);
    assert_eq!(json_lines(&o)[0]["in_s3"], Value::Bool(false));
    let o = trisquare(&["--format", "json", "decide", "nonunit3", "235"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json_lines(&o)[0]["in_s3"], Value::Bool(true));
}

#[test]
fn decide_squares_and_polygonal() {
    assert_eq!(
        trisquare(&["decide", "squares3", "7"]).status.code(),
        Some(1)
    );
    assert_eq!(
        trisquare(&["decide", "squares3", "6"]).status.code(),
        Some(0)
    );

    let o = trisquare(&[
        "--format",
        "json",
        "decide",
        "polygonal",
        "36",
        "--m",
        "3",
        "--k",
        "2",
        "--nonzero",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_lines(&o)[0]["terms"], serde_json::json!([21, 15]));

    let o = trisquare(&["polygonal", "decompose", "29", "--m", "3", "--nonzero"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_checks() {
    let o = trisquare(&["--format", "json", "verify", "thm-octause", "--max", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let v = &json_lines(&o)[0];
    assert_eq!(v["found"].as_array().unwrap().len(), 20);
    assert_eq!(v["pass"], Value::Bool(true));

    let o = trisquare(&["--format", "json", "verify", "thm-3.2-g", "--max", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        json_lines(&o)[0]["found"],
        serde_json::json!([3, 133, 163, 478, 883])
    );

    let o = trisquare(&["--format", "json", "verify", "prop-2.3", "--p", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        json_lines(&o)[0]["found"],
        serde_json::json!([{"p": 5, "pairs": 25, "matching": 25}])
    );
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(trisquare(&["verify", "thm-9.9"]).status.code(), Some(2));
    assert_eq!(
        trisquare(&["verify", "thm-2.4", "--max", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        trisquare(&["sieve", "nonunit", "10..1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        trisquare(&["decide", "polygonal", "5", "--m", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        trisquare(&["lattice", "count", "--gram", "1,2,3", "4"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn io_errors_exit_3() {
    let o = trisquare(&[
        "sieve",
        "nonunit",
        "1..100",
        "--from-checkpoint",
        "/nonexistent/cp.json",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sieve_octagonal_four() {
    let o = trisquare(&[
        "--format",
        "json",
        "sieve",
        "polygonal",
        "--m",
        "8",
        "--k",
        "4",
        "1..100",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let lines = json_lines(&o);
    let summary = &lines.last().unwrap()["summary"];
    assert_eq!(
        summary["exceptions"],
        serde_json::json!([1, 2, 3, 5, 6, 7, 9, 10, 13, 14, 17, 21])
    );
    assert_eq!(summary["grh_conditional"], Value::Bool(false));
}

#[test]
fn sieve_streams_chunks_in_order() {
    let o = trisquare(&[
        "--format", "json", "sieve", "nonunit", "1..1000", "--chunk", "100",
    ]);
    let lines = json_lines(&o);
    assert_eq!(lines.len(), 11);
    for (i, l) in lines[..10].iter().enumerate() {
        assert_eq!(l["chunk"], i);
        assert!(l.get("elapsed_ms").is_none());
    }
    let summary = &lines[10]["summary"];
    assert_eq!(summary["exceptions"].as_array().unwrap().len(), 20);
    assert_eq!(summary["grh_conditional"], Value::Bool(true));
}

#[test]
fn checkpoint_resume_matches_fresh_run() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("cp.json");
    let cp = cp.to_str().unwrap();
    let args = [
        "--format", "json", "sieve", "form-f", "1..6000", "--chunk", "500",
    ];

    let fresh = trisquare(&args);
    let with_cp = trisquare(&[&args[..], &["--checkpoint", cp]].concat());
    assert_eq!(fresh.stdout, with_cp.stdout);
    assert!(std::path::Path::new(cp).exists());

    // A completed checkpoint resumes to the same summary with no new chunks.
    let resumed = trisquare(&[&args[..], &["--from-checkpoint", cp]].concat());
    assert_eq!(resumed.status.code(), Some(0));
    let lines = json_lines(&resumed);
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0], *json_lines(&fresh).last().unwrap());

    // A checkpoint for a different target is rejected.
    let o = trisquare(&[
        "sieve",
        "form-g",
        "1..6000",
        "--chunk",
        "500",
        "--from-checkpoint",
        cp,
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_independent_of_threads() {
    for args in [
        &["--format", "json", "sieve", "form-g", "1..20000"][..],
        &["--format", "csv", "report", "genus", "--max", "300"][..],
        &[
            "--format",
            "json",
            "verify",
            "thm-penta-octa",
            "--max",
            "2000",
        ][..],
    ] {
        let one = trisquare(&[&["--threads", "1"][..], args].concat());
        let four = trisquare(&[&["--threads", "4"][..], args].concat());
        assert_eq!(one.status.code(), Some(0), "{args:?}");
        assert_eq!(one.stdout, four.stdout, "{args:?}");
    }
}

#[test]
fn genus_report_rows() {
    let o = trisquare(&["--format", "csv", "report", "genus", "--max", "6"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,r_f,r_g,genus_avg_exact,genus_avg_analytic,phi")
    );
    assert_eq!(lines.nth(1), Some("2,0,2,6/5,6/5,1"));
    assert_eq!(lines.next(), Some("3,2,0,4/5,4/5,-1"));
}

#[test]
fn lattice_commands() {
    let i3 = "1,0,0,0,1,0,0,0,1";
    let o = trisquare(&[
        "--format", "json", "lattice", "theta", "--gram", i3, "--max", "5",
    ]);
    assert_eq!(
        json_lines(&o)[0]["coefficients"],
        serde_json::json!([1, 6, 12, 8, 6, 24])
    );

    let o = trisquare(&["lattice", "count", "--gram", i3, "7"]);
    assert_eq!(o.status.code(), Some(1));

    let o = trisquare(&[
        "--format",
        "json",
        "lattice",
        "isometries",
        "--source",
        "9,10,10,10,25,0,10,0,25",
        "--target",
        i3,
    ]);
    let v = &json_lines(&o)[0];
    assert_eq!(v["count"], 144);
    assert_eq!(v["orbits"].as_array().unwrap().len(), 3);
}
