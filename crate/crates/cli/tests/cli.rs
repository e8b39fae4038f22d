use std::process::{Command, Output};

fn ldg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldg"))
        .args(args)
        .output()
        .expect("run ldg")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn polynomial_problem_is_reproduced() {
    let o = ldg(&["--problem", "poly", "--mesh", "bs", "--k", "2", "--n", "4", "--eps", "1e-2", "--dt", "0.25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("mesh,k,N,eps,theta,dt,l2_error,l2_rate,energy_error,energy_rate"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..6], ["bs", "2", "4", "1.00000e-2", "5.00000e-1", "2.50000e-1"]);
    let l2: f64 = row[6].parse().unwrap();
    assert!(l2 < 1e-9, "{l2}");
    assert!(lines.next().is_none());
}

#[test]
fn sweep_is_deterministic_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    let md = dir.path().join("a.md");
    let args = ["--mesh", "s", "--k", "1", "--n-sweep", "4:8", "--eps", "1e-8"];
    let mut first = args.to_vec();
    first.extend(["--out", csv.to_str().unwrap(), "--md", md.to_str().unwrap()]);
    let o = ldg(&first);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(written.lines().count(), 3);
    let table = std::fs::read_to_string(&md).unwrap();
    assert!(table.contains('|'));

    let again = ldg(&args);
    assert!(again.status.success());
    assert_eq!(stdout(&again), written);
}

#[test]
fn one_dimensional_dg_in_time() {
    let o = ldg(&["--problem", "paper1d", "--time-scheme", "dgr", "--r", "1", "--mesh", "btype", "--k", "1", "--n", "16", "--eps", "1e-6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["--n", "5", "--mesh", "s"][..],
        &["--eps", "-1", "--n", "4"],
        &["--theta", "0.2", "--n", "4"],
        &["--dt", "fast"],
        &["--n", "4", "--n-sweep", "4:8"],
        &["--table", "9"],
        &["--dim", "3"],
    ] {
        let o = ldg(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("out.csv");
    let o = ldg(&["--mesh", "s", "--n", "4", "--out", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}
