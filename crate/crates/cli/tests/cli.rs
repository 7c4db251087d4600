use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cjsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cjsim")).args(args).current_dir(dir).output().unwrap()
}

const SMALL: &str = "version = 1\nn_subcarriers = 8\nrealizations = 2\nsweep_values = [20.0, 30.0]\n\
                     grid_points = 21\nschemes = [\"joint-heuristic\", \"fixed-heuristic\", \"no-cj\"]\n";

#[test]
fn sweep_is_deterministic_and_paired() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let a = cjsim(&["sweep", "--config", "c.toml", "--out", "a", "--seed", "9"], dir.path());
    let b = cjsim(&["sweep", "--config", "c.toml", "--out", "b", "--seed", "9", "--jobs", "1"], dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    let ra = fs::read(dir.path().join("a/results.csv")).unwrap();
    assert_eq!(ra, fs::read(dir.path().join("b/results.csv")).unwrap());

    let text = String::from_utf8(ra).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,receiver,sweep_value,realization,secrecy_rate,alpha2,iterations,wall_time_s,channel_hash"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 2 * 3);
    // one hash per (sweep value, realization), shared by the three schemes
    for group in rows.chunks(3) {
        assert!(group.iter().all(|r| r[8] == group[0][8] && r[2] == group[0][2] && r[3] == group[0][3]));
    }
    assert!(dir.path().join("a/summary.csv").exists());
}

#[test]
fn plotdata_series_per_scheme() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), SMALL.replace("realizations = 2", "realizations = 1")).unwrap();
    let s = cjsim(&["sweep", "--config", "c.toml", "--out", "o", "--schemes", "no-cj,joint-heuristic"], dir.path());
    assert_eq!(s.status.code(), Some(0));
    let p = cjsim(&["plotdata", "--input", "o/results.csv", "--out", "p"], dir.path());
    assert_eq!(p.status.code(), Some(0));
    let mut names: Vec<String> =
        fs::read_dir(dir.path().join("p")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, vec!["plot_secrecy_rate_joint-heuristic.dat", "plot_secrecy_rate_no-cj.dat"]);
    let dat = fs::read_to_string(dir.path().join("p/plot_secrecy_rate_no-cj.dat")).unwrap();
    let data: Vec<Vec<&str>> =
        dat.lines().filter(|l| !l.starts_with('#')).map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(data.len(), 2);
    for cols in data {
        assert_eq!(cols.len(), 4);
        assert_eq!(cols[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(cols[3], "1");
    }
    let empty = cjsim(&["plotdata", "--input", "o/results.csv", "--out", "p", "--schemes", "fixed-mm"], dir.path());
    assert_eq!(empty.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "version = 1\nunknown_key = 3\n").unwrap();
    fs::write(dir.path().join("nover.toml"), "realizations = 3\n").unwrap();
    fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    fs::write(dir.path().join("blocker"), "").unwrap();
    for args in [
        vec!["sweep", "--config", "bad.toml"],
        vec!["sweep", "--config", "nover.toml"],
        vec!["sweep", "--config", "missing.toml"],
        vec!["sweep", "--config", "c.toml", "--receiver", "type3"],
        vec!["sweep", "--config", "c.toml", "--schemes", "joint-mm,bogus"],
        vec!["sweep", "--config", "c.toml", "--jobs", "0"],
        vec!["sweep", "--config", "c.toml", "--out", "blocker/sub"],
        vec!["sweep", "--seed", "not-a-number"],
    ] {
        let o = cjsim(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(!dir.path().join("blocker/sub").exists());
}

#[test]
fn trace_is_non_decreasing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "version = 1\nn_subcarriers = 8\nreceiver = \"type2\"\n").unwrap();
    let o = cjsim(&["trace", "--config", "c.toml", "--out", "t"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("t/trace.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "receiver,p_s_dbm,iteration,objective");
    let rows: Vec<(String, f64)> = lines
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[1].to_string(), c[3].parse().unwrap())
        })
        .collect();
    for p in ["25.0", "35.0"] {
        let v: Vec<f64> = rows.iter().filter(|r| r.0 == p).map(|r| r.1).collect();
        assert!(!v.is_empty() && v.len() <= 51);
        assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }
}

#[test]
fn oracle_check_passes_on_small_run() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "version = 1\noracle_instances = 2\noracle_steps = 80\noracle_tol = 1e-2\n")
        .unwrap();
    let o = cjsim(&["oracle-check", "--config", "c.toml", "--out", "r"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("r/oracle.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn failing_oracle_check_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "version = 1\noracle_instances = 1\noracle_steps = 20\noracle_tol = 0.0\n")
        .unwrap();
    let o = cjsim(&["oracle-check", "--config", "c.toml", "--out", "r", "--receiver", "type2"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
