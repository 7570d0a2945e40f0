use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(format!("{name}.toml"))
}

fn run(args: &[&str]) -> Output {
    run_with_threads(args, None)
}

fn run_with_threads(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spectral-corners"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n.to_string());
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.trim().parse().expect("number")).collect())
        .collect()
}

fn header_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .flat_map(|l| l.split_whitespace())
        .find_map(|tok| tok.strip_prefix(key)?.strip_prefix('='))
}

#[test]
fn square_spectrum_matches_lattice_count_and_records_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--domain", s(&corpus("square")), "--cutoff", "2e5", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let r2 = 2e5 / (PI * PI);
    let lattice = (1..).take_while(|&m: &u64| (m * m) as f64 <= r2).map(|m| (r2 - (m * m) as f64).sqrt() as usize).sum::<usize>();
    assert_eq!(data_rows(&text).len(), lattice);
    assert_eq!(lattice, 15782);
    let digest = format!("{:x}", Sha256::digest(fs::read(corpus("square")).unwrap()));
    assert_eq!(header_value(&text, "domain.sha256"), Some(digest.as_str()));
    assert_eq!(header_value(&text, "version"), Some(env!("CARGO_PKG_VERSION")));
    assert_eq!(header_value(&text, "source"), Some("analytic"));
}

#[test]
fn classify_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("square");
    let o = run(&["spectrum", "--domain", s(&corpus("square")), "--cutoff", "2e5", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let o = run(&["classify", "--spectrum", s(&out.join("spectrum.csv")), "--out", s(&out)]);
    assert_eq!(code(&o), 10, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("has_corners"));
    let report = fs::read_to_string(out.join("report.toml")).unwrap();
    assert!(report.contains("decision = \"has_corners\""), "{report}");
    assert!(report.contains("\"spectrum.sha256\""));

    let o = run(&["classify", "--domain", s(&corpus("disk")), "--out", s(&dir.path().join("disk"))]);
    assert!([0, 20].contains(&code(&o)), "disk exit {} {}", code(&o), stdout(&o));

    // A file that claims completeness to 2e4 but holds only ten eigenvalues.
    let text = fs::read_to_string(out.join("spectrum.csv")).unwrap().replace("cutoff=2.0000000000000000e5", "cutoff=2.0000000000000000e4");
    let short: String = text.lines().take(12).map(|l| format!("{l}\n")).collect();
    let path = dir.path().join("short.csv");
    fs::write(&path, short).unwrap();
    let o = run(&["classify", "--spectrum", s(&path), "--out", s(dir.path())]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("cutoff of at least"), "{}", stderr(&o));
}

#[test]
fn invalid_inputs_map_to_documented_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bowtie = dir.path().join("bowtie.toml");
    let mut text = String::from("schema = 1\nlabel = \"bowtie\"\n\n[[loops]]\n");
    let pts = [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)];
    for i in 0..4 {
        let (a, b) = (pts[i], pts[(i + 1) % 4]);
        text += &format!("\n[[loops.segments]]\nkind = \"line\"\nfrom = [{:?}, {:?}]\nto = [{:?}, {:?}]\n", a.0, a.1, b.0, b.1);
    }
    fs::write(&bowtie, text).unwrap();
    let o = run(&["spectrum", "--domain", s(&bowtie), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("loop 0"), "{}", stderr(&o));

    let garbage = dir.path().join("garbage.toml");
    fs::write(&garbage, "schema = 1\nloops = 3\n").unwrap();
    assert_eq!(code(&run(&["spectrum", "--domain", s(&garbage)])), 2);

    let missing = dir.path().join("nope.toml");
    assert_eq!(code(&run(&["spectrum", "--domain", s(&missing)])), 4);
    assert_eq!(code(&run(&["classify", "--spectrum", s(&missing)])), 4);
    assert_eq!(code(&run(&["plotdata", "--out", s(dir.path())])), 4);
    assert_eq!(code(&run(&["plotdata", "--spectrum", s(dir.path()), "--out", s(dir.path())])), 4);

    assert_eq!(code(&run(&["classify", "--domain", s(&corpus("disk")), "--chi", "2"])), 64);
    assert_eq!(code(&run(&["spectrum", "--domain", s(&corpus("disk")), "--h", "-1"])), 64);
    assert_eq!(code(&run(&["spectrum"])), 64);
    assert_eq!(code(&run(&["transmogrify"])), 64);
    assert_eq!(code(&run(&["verify", "--filter", "no-such-row"])), 64);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn plotdata_tables() {
    let dir = tempfile::tempdir().unwrap();
    let spec_dir = dir.path().join("square");
    assert_eq!(code(&run(&["spectrum", "--domain", s(&corpus("square")), "--cutoff", "2e5", "--out", s(&spec_dir)])), 0);
    let out = dir.path().join("deep/new/dir");
    let o = run(&["plotdata", "--spectrum", s(&spec_dir), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let text = fs::read_to_string(out.join("fit_residuals.csv")).unwrap();
    assert!(text.lines().any(|l| l == "t,h,model,residual,remainder"));
    let max_rel: f64 = header_value(&text, "max_rel_residual").unwrap().parse().unwrap();
    let a_half: f64 = header_value(&text, "a_half").unwrap().parse().unwrap();
    let a0: f64 = header_value(&text, "a0").unwrap().parse().unwrap();
    assert!((a0 - 0.25).abs() < 0.01);
    let rows = data_rows(&text);
    assert!(rows.len() >= 20);
    for r in &rows {
        let (t, h, model, residual, remainder) = (r[0], r[1], r[2], r[3], r[4]);
        assert!((residual - (h - model)).abs() <= 1e-14 * h);
        assert!(residual.abs() <= max_rel * h * (1.0 + 1e-12), "t = {t}: residual {residual}");
        // The three-term remainder is what the fitted sqrt(t) term accounts for.
        assert!((remainder - residual - a_half * t.sqrt()).abs() <= 1e-13 * h, "t = {t}");
    }
    assert!(max_rel < 1e-4);

    let poly = fs::read_to_string(out.join("polygon_a0.csv")).unwrap();
    let rows = data_rows(&poly);
    assert_eq!(rows.len(), 62);
    let four = rows.iter().find(|r| r[0] == 4.0).unwrap();
    assert!((four[1] - 0.25).abs() < 1e-15);
    for r in &rows {
        let n = r[0];
        let oracle = n / 24.0 * ((n - 2.0) / n + n / (n - 2.0)) - n / 12.0 + 1.0 / 6.0;
        assert!((r[1] - oracle).abs() < 1e-14 && r[1] > 1.0 / 6.0, "n = {n}");
    }
    assert_eq!(header_value(&poly, "tool"), Some("spectral-corners"));
}

#[test]
fn fem_outputs_are_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in [1, 3, 1].into_iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = run_with_threads(
            &["spectrum", "--domain", s(&corpus("l-shape")), "--h", "0.05", "--count", "60", "--out", s(&out)],
            Some(threads),
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let square = dir.path().join(format!("square{i}"));
        run_with_threads(&["classify", "--domain", s(&corpus("square")), "--out", s(&square)], Some(threads));
        outputs.push((
            fs::read(out.join("spectrum.csv")).unwrap(),
            fs::read(out.join("mesh.txt")).unwrap(),
            fs::read(square.join("report.toml")).unwrap(),
            fs::read(square.join("trace.csv")).unwrap(),
        ));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert_eq!(header_value(&text, "source"), Some("fem"));
    assert_eq!(header_value(&text, "setting.seed"), Some("24301"));
}

#[test]
fn verify_filter_runs_only_the_selected_group() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--filter", "geometry", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert!(rows.len() >= 10);
    assert!(rows.iter().all(|l| l.split_whitespace().nth(1).unwrap().starts_with("geometry/")));
    assert!(fs::read_to_string(dir.path().join("verify.txt")).unwrap().contains("setting.filter=geometry"));
}

// Everything except the FEM-backed rows, which the acceptance target covers.
const FAST_ROWS: &str = "geometry,analytic,fit,properties,classifier/square,classifier/rectangle-2x1,\
classifier/equilateral-triangle,classifier/quarter-disk,classifier/half-disk,classifier/disk";

fn failures(dir: &Path) -> Vec<String> {
    fs::read_to_string(dir.join("failures.txt")).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

#[test]
fn injected_a0_shift_fails_exactly_the_classifier_rows() {
    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean");
    let o = run(&["verify", "--filter", FAST_ROWS, "--out", s(&clean)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(failures(&clean).is_empty());

    let shifted = dir.path().join("shifted");
    let o = run(&["verify", "--filter", FAST_ROWS, "--inject-a0-shift", "-0.2", "--out", s(&shifted)]);
    assert_eq!(code(&o), 1);
    let cornered = ["square", "rectangle-2x1", "equilateral-triangle", "quarter-disk", "half-disk"];
    assert_eq!(failures(&shifted), cornered.map(|n| format!("classifier/{n}")));
    assert!(stdout(&o).lines().last().unwrap().starts_with("failures: classifier/square,"));

    let raised = dir.path().join("raised");
    let o = run(&["verify", "--filter", FAST_ROWS, "--inject-a0-shift", "0.2", "--out", s(&raised)]);
    assert_eq!(code(&o), 1);
    assert_eq!(failures(&raised), ["classifier/disk"]);
}

#[test]
fn lshape_fem_spectrum_at_the_documented_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--domain", s(&corpus("l-shape")), "--h", "0.01", "--count", "400", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let values: Vec<f64> = data_rows(&text).iter().map(|r| r[1]).collect();
    let complete: usize = header_value(&text, "complete_modes").unwrap().parse().unwrap();
    let cutoff: f64 = header_value(&text, "cutoff").unwrap().parse().unwrap();
    assert_eq!(values.len(), 400);
    assert!((300..=400).contains(&complete), "{complete}");
    assert!(values[complete - 1] <= cutoff && cutoff <= values[values.len() - 1]);
    // First L-shape eigenvalue, 9.6397238440219.
    assert!((values[0] / 9.639_723_844_021_9 - 1.0).abs() < 1e-4, "{}", values[0]);
    assert!(fs::metadata(dir.path().join("mesh.txt")).unwrap().len() > 0);
}
