use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ma-noma")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ma-noma-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn sweep_output_is_reproducible() {
    let args = ["sweep-t0", "--trials", "1", "--seed", "7"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let one = run(&["sweep-t0", "--trials", "3", "--seed", "7", "--workers", "1"]);
    let many = run(&["sweep-t0", "--trials", "3", "--seed", "7", "--workers", "3"]);
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn sweep_p2_schema() {
    let out = run(&["sweep-p2", "--trials", "2", "--grid", "0.7,0.8,0.9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sweep_value,scheme,mean_t1,stderr_t1,mean_t2,feasible_rate,trials"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(r.len(), 7);
        assert!(["ma_noma", "fpa_noma"].contains(&r[1]));
        assert_eq!(r[6], "2");
        for field in [r[0], r[2], r[3], r[4], r[5]] {
            field.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve", "--seed", "3"]).status.code(), Some(0));
    assert_eq!(run(&["solve", "--seed", "3", "--t0", "50"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--trials", "many"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["sweep-p2", "--trials", "1", "--schemes", "ma_oma"]).status.code(), Some(2));
    assert_eq!(run(&["selftest", "--trials", "3"]).status.code(), Some(0));
}

#[test]
fn config_file_then_flags() {
    let dir = scratch("config");
    let path = dir.join("run.cfg");
    std::fs::write(&path, "# short run\ntrials = 2\ngrid = 1, 2\nschemes = fpa_noma\n").unwrap();
    let p = path.to_str().unwrap();
    let out = run(&["sweep-t0", "--config", p]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.contains(",fpa_noma,") && l.ends_with(",2")));

    let flagged = String::from_utf8(run(&["sweep-t0", "--config", p, "--trials", "1"]).stdout).unwrap();
    assert!(flagged.lines().skip(1).all(|l| l.ends_with(",1")));

    std::fs::write(&path, "trials = 2\nbogus_key = 3\n").unwrap();
    let bad = run(&["sweep-t0", "--config", p]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("bogus_key"));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn out_dir_and_plot() {
    let dir = scratch("plot");
    let d = dir.to_str().unwrap();
    let out = run(&["sweep-n", "--trials", "1", "--grid", "50,100", "--out", d, "--plot"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("sweep_n.csv")).unwrap();
    assert!(csv.starts_with("sweep_value,scheme,"));
    let svg = std::fs::read_to_string(dir.join("sweep_n.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    let _ = std::fs::remove_dir_all(dir);
}
