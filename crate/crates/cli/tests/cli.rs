use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fcs-tempo-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Runs the binary with a config body; returns the process output and the CSV text.
fn run(name: &str, args: &[&str], config: &str) -> (Output, String) {
    let dir = scratch_dir(name);
    let cfg = dir.join("job.cfg");
    let out = dir.join("out.csv");
    std::fs::write(&cfg, config).unwrap();
    let _ = std::fs::remove_file(&out);
    let output = Command::new(env!("CARGO_BIN_EXE_fcs-tempo"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    let csv = std::fs::read_to_string(&out).unwrap_or_default();
    (output, csv)
}

struct Csv {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        let mut meta = Vec::new();
        let mut lines = text.lines().peekable();
        while let Some(l) = lines.peek().filter(|l| l.starts_with('#')) {
            let (k, v) = l[2..].split_once(" = ").unwrap();
            meta.push((k.to_string(), v.to_string()));
            lines.next();
        }
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Self { meta, header, rows }
    }

    fn meta(&self, key: &str) -> &str {
        &self.meta.iter().find(|(k, _)| k == key).unwrap().1
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }

    fn text_col(&self, name: &str) -> Vec<String> {
        let i = self.header.iter().position(|h| h == name).unwrap();
        self.rows.iter().map(|r| r[i].clone()).collect()
    }
}

const SMALL: &str = "alpha = 0.1\ntemperature = 5\ndelta = 0.1\nn_steps = 10\ndepth = 5\np = 60\n";

#[test]
fn heat_writes_metadata_and_series() {
    let (out, text) = run("heat", &["heat"], SMALL);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = Csv::parse(&text);
    assert_eq!(csv.meta("command"), "heat");
    assert!(csv.meta("engine").starts_with("fcs-tempo "));
    assert_eq!(csv.meta("alpha"), "0.1");
    assert_eq!(csv.meta("u"), "auto");
    assert_eq!(csv.meta("u_eps"), "0.01");
    assert_eq!(&csv.header[..3], ["t", "chi_re", "chi_im"]);
    let t = csv.col("t");
    assert_eq!(t.len(), 11);
    assert_eq!(t[0], 0.0);
    assert!((t[10] - 1.0).abs() < 1e-12);
    assert_eq!(csv.col("chi_re")[0], 1.0);
    let q = csv.col("mean_q");
    assert!(q[10] > 0.0 && q[10].is_finite());
}

#[test]
fn positional_and_flag_commands_agree() {
    let (a, ta) = run("flag-a", &["oracle-ibm"], SMALL);
    let (b, tb) = run("flag-b", &["--command", "oracle-ibm"], SMALL);
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    assert_eq!(ta, tb);
    let (c, _) = run("flag-c", &["heat", "--command", "sweep"], SMALL);
    assert_eq!(c.status.code(), Some(2));
}

#[test]
fn oracle_ibm_matches_closed_form() {
    let (out, text) = run("oracle", &["oracle-ibm"], SMALL);
    assert_eq!(out.status.code(), Some(0));
    let csv = Csv::parse(&text);
    for (t, q) in csv.col("t").iter().zip(csv.col("mean_q")) {
        let want = 0.1 * 125.0 * t * t / (1.0 + 25.0 * t * t);
        assert!((q - want).abs() < 1e-12, "{t}: {q} vs {want}");
    }
    let asymptote: f64 = csv.meta("asymptotic_mean_q").parse().unwrap();
    assert!((asymptote - 0.5).abs() < 1e-12);
}

#[test]
fn unknown_keys_exit_2_and_are_listed() {
    let (out, _) = run("unknown", &["heat"], "alpha = 0.1\nbogus = 1\nwrong = 2\n");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus") && err.contains("wrong"), "{err}");
}

#[test]
fn bad_invocations_exit_2() {
    let (out, _) = run("nocmd", &[], SMALL);
    assert_eq!(out.status.code(), Some(2));
    let (out, _) = run("badcmd", &["explode"], SMALL);
    assert_eq!(out.status.code(), Some(2));
    let (out, _) = run("list", &["heat"], "alpha = 0.1, 0.2\n");
    assert_eq!(out.status.code(), Some(2));
    let missing = Command::new(env!("CARGO_BIN_EXE_fcs-tempo"))
        .args(["heat", "--config", "/nonexistent/job.cfg"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn compare_with_dense_engine() {
    let cfg = "alpha = 0.5\ntemperature = 1\ndelta = 0.1\nn_steps = 10\ndepth = 5\np = inf\nu = 0.2\noracle = quapi\n";
    let (out, text) = run("compare", &["compare"], cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = Csv::parse(&text);
    let worst: f64 = csv.meta("max_rel_err").parse().unwrap();
    assert!(worst < 1e-10, "{worst:e}");
    assert!(csv.col("rel_err").iter().all(|e| *e < 1e-10));
}

#[test]
fn sweep_records_failed_rows() {
    let cfg = format!("{SMALL}alpha = 0.1, 0.3\np = 60, -1\n").replace("alpha = 0.1\n", "").replace("p = 60\n", "");
    let (out, text) = run("sweep-fail", &["sweep"], &cfg);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = Csv::parse(&text);
    assert_eq!(csv.rows.len(), 4);
    let status = csv.text_col("status");
    assert_eq!(status.iter().filter(|s| *s == "error").count(), 2);
    assert_eq!(csv.text_col("p"), ["60", "-1", "60", "-1"]);
    assert_eq!(csv.meta("failed_rows"), "2");
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let cfg = format!("{SMALL}temperature = 1, 5\ninitial = up, left\n").replace("temperature = 5\n", "");
    let (a, ta) = run("det-1", &["sweep", "--workers", "1"], &cfg);
    let (b, tb) = run("det-3", &["sweep", "--workers", "3"], &cfg);
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    assert_eq!(ta, tb);
    assert_eq!(Csv::parse(&ta).rows.len(), 4);
}

#[test]
fn converge_over_depth_reports_errors() {
    let cfg = "alpha = 0.1\ntemperature = 5\nomega0 = 1\nomega_tunnel = 0\ndelta = 0.05\nn_steps = 20\ndepth = 2, 20\nvary = depth\n";
    let (out, text) = run("converge", &["converge"], cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = Csv::parse(&text);
    let err = csv.col("rel_err_mean");
    assert_eq!(err.len(), 2);
    assert!(err[1] < err[0], "{err:?}");
    assert!(err[1] < 0.01);
    let (bad, _) = run("converge-bad", &["converge"], "depth = 2, 4\nalpha = 0.1, 0.2\n");
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn dynamics_has_markov_columns() {
    let (out, text) = run("dyn", &["dynamics"], &format!("{SMALL}initial = right\n"));
    assert_eq!(out.status.code(), Some(0));
    let csv = Csv::parse(&text);
    let sx = csv.col("sx");
    let markov = csv.col("markov_sx");
    assert!((sx[0] - 0.5).abs() < 1e-12);
    assert!((markov[0] - 0.5).abs() < 1e-12);
    assert!(csv.col("trace_re").iter().all(|x| (x - 1.0).abs() < 1e-10));
}

#[test]
fn variational_sweep_over_alpha() {
    let (out, text) = run("var", &["variational"], "alpha = 0.05, 0.1\ntemperature = 1\n");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = Csv::parse(&text);
    let om = csv.col("omega_renorm");
    assert_eq!(om.len(), 2);
    assert!(om[0] > om[1] && om[0] < 1.0);
    let (bad, _) = run("var-bad", &["variational"], "depth = 2, 4\n");
    assert_eq!(bad.status.code(), Some(2));
}
