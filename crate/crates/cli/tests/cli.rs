use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polar-flex")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn oplist_of_the_small_example() {
    let o = run(&["oplist", "--n", "8", "--k", "4", "--construction", "bec:0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "F 2\nREP 2\nG 2\nSPC 2\n");

    let o = run(&["oplist", "--n", "8", "--k", "4", "--extended", "--construction", "bec:0.5"]);
    assert_eq!(stdout(&o), "TYPEV 3\n");
    let o = run(&["oplist", "--n", "8", "--k", "5", "--extended", "--construction", "bec:0.5"]);
    assert_eq!(stdout(&o), "TYPEIV 3\n");
}

#[test]
fn hwest_reference_numbers() {
    let o = run(&["hwest", "--n", "1024", "--npe", "64", "--rates", "5,all"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("high stage depth        14"), "{text}");
    assert!(text.contains("low stage depth         126"), "{text}");
    assert!(text.contains("Mem_ext proposed        10240"), "{text}");
}

#[test]
fn sim_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = run(&[
        "sim", "--n", "64", "--k", "16,32", "--decoder", "fast-lpscl", "--lmax", "4", "--ltop", "2,2", "--p", "4",
        "--ebn0", "1.0:0.5:2.0", "--max-frames", "50", "--seed", "7", "--workers", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "decoder,N,K,ebn0_db,frames,frame_errors,bit_errors,fer,ber,mean_steps,seed");
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[1].starts_with("fast-lpscl,64,16,1.0,50,"));
}

#[test]
fn sim_json_to_stdout() {
    let o = run(&["sim", "--n", "16", "--k", "8", "--decoder", "sc", "--max-frames", "10", "--format", "json", "--noiseless"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["points"][0]["frame_errors"], 0);
    assert_eq!(v["points"][0]["mean_steps"], 30.0);
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        &["sim", "--n", "100"][..],
        &["sim", "--n", "64", "--k", "65"],
        &["sim", "--decoder", "viterbi"],
        &["sim", "--n", "64", "--k", "32", "--decoder", "lpscl", "--ltop", "2"],
        &["sim", "--n", "64", "--decoder", "fast-lpscl", "--extended"],
        &["sim", "--ebn0", "3:1:1"],
        &["oplist", "--n", "8", "--k", "4", "--construction", "gauss:1"],
        &["hwest", "--n", "1024", "--npe", "1000"],
        &["sim", "--no-such-flag"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn verify_passes_on_bec_vectors() {
    let o = run(&["verify", "--construction", "bec:0.5", "--nmax", "64", "--frames", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verification passed"));
}

#[test]
fn verify_reports_inconsistent_vectors() {
    // natural order: rank i for index i makes index 0 the most reliable
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    let ranks: Vec<String> = (0..16).map(|i| i.to_string()).collect();
    std::fs::write(&path, ranks.join("\n")).unwrap();
    let arg = format!("csv:{}", path.display());
    let o = run(&["verify", "--construction", &arg, "--nmax", "16", "--frames", "2"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}
