//! End-to-end acceptance suite: runs every experiment through the library
//! entry point with the shipped configurations and prints one PASS/FAIL
//! line per criterion. Exits nonzero if any criterion fails.

use reldiff_cli::output::Comparison;
use reldiff_cli::{run, CliError, Outcome, RunConfig};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

struct Line {
    id: &'static str,
    what: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run_config(name: &str, out: &Path, edit: impl FnOnce(&mut RunConfig)) -> Result<Outcome, CliError> {
    let mut cfg = RunConfig::from_path(&config_path(name))?;
    cfg.output.directory = out.to_path_buf();
    edit(&mut cfg);
    let report = run(&cfg)?;
    if !out.join("summary.json").is_file() {
        return Err(CliError::Internal(format!("{} has no summary.json", out.display())));
    }
    Ok(report.outcome)
}

fn stat(outcome: &Outcome, key: &str) -> String {
    match outcome.statistics.get(key) {
        Some(v) => v.to_string(),
        None => "missing".into(),
    }
}

/// Pass iff at least one check matches `select` and all matching checks pass.
fn judge(outcome: &Result<Outcome, CliError>, select: impl Fn(&str) -> bool, extra: &[&str]) -> (bool, String) {
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => return (false, format!("error: {e}")),
    };
    let chosen: Vec<_> = outcome.checks.iter().filter(|c| select(&c.name)).collect();
    let mut parts: Vec<String> = chosen
        .iter()
        .map(|c| {
            let op = match c.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
            };
            format!("{}={:.4e} ({op} {:e})", c.name, c.value, c.threshold)
        })
        .collect();
    parts.extend(extra.iter().map(|k| format!("{k}={}", stat(outcome, k))));
    (!chosen.is_empty() && chosen.iter().all(|c| c.pass), parts.join(", "))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64())
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map(|entries| {
            entries
                .filter_map(|e| e.ok())
                .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
                .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    files
}

fn determinism(root: &Path) -> (bool, String) {
    let run_with = |threads: usize, sub: &str| -> Result<Vec<(String, Vec<u8>)>, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        let dir = root.join(sub);
        pool.install(|| {
            run_config("equilibrium.json", &dir, |c| {
                c.numerics.particles = 2000;
                c.numerics.steps = Some(2000);
            })
        })
        .map_err(|e| e.to_string())?;
        Ok(csv_files(&dir))
    };
    match (run_with(1, "threads1"), run_with(8, "threads8")) {
        (Ok(a), Ok(b)) => {
            let names: Vec<&str> = a.iter().map(|f| f.0.as_str()).collect();
            let bytes: usize = a.iter().map(|f| f.1.len()).sum();
            let same = !a.is_empty() && a == b;
            (same, format!("files {names:?}, {bytes} bytes, identical at 1 and 8 threads: {same}"))
        }
        (Err(e), _) | (_, Err(e)) => (false, format!("error: {e}")),
    }
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let root = tmp.path();
    let mut lines: Vec<Line> = Vec::new();
    let mut record = |id, what, (pass, detail): (bool, String), seconds| {
        let l = Line { id, what, pass, detail, seconds };
        println!("{:<4} {} {} [{:.1}s]: {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.what, l.seconds, l.detail);
        lines.push(l);
    };

    let (oracle, t) = timed(|| run_config("oracle_check.json", &root.join("oracle"), |_| {}));
    record("A5", "eigenfunction residuals", judge(&oracle, |n| n.starts_with("eigen"), &[]), t);
    record(
        "A6",
        "kernel identities",
        judge(
            &oracle,
            |n| n.starts_with("kernel_") || n.starts_with("chapman") || n.starts_with("long_time"),
            &["long_time_ratio", "long_time_ratio_expected"],
        ),
        0.0,
    );
    record("A7", "measure discrimination", judge(&oracle, |n| n.starts_with("measure"), &["k2_constant_measure"]), 0.0);

    let (photon, t) = timed(|| run_config("photon_check.json", &root.join("photon"), |_| {}));
    record("A8", "photon radial operator", judge(&photon, |_| true, &["consistent_operator"]), t);

    let (pde, t) = timed(|| run_config("pde_kernel.json", &root.join("pde_kernel"), |_| {}));
    record("A4", "PDE vs closed-form kernel", judge(&pde, |_| true, &["steady_residual_orders"]), t);

    let (boost, t) = timed(|| run_config("boost.json", &root.join("boost"), |_| {}));
    record(
        "A9",
        "Lorentz invariance of the equilibrium",
        judge(&boost, |_| true, &["mean_u0_sample", "mean_u0_quadrature"]),
        t,
    );

    let (det, t) = timed(|| determinism(root));
    record("A11", "determinism across thread counts", det, t);

    let (transition, t) = timed(|| run_config("transition.json", &root.join("transition"), |_| {}));
    record(
        "A10",
        "generator slope from rest",
        judge(&transition, |n| n.starts_with("generator"), &["generator_slope", "generator_slope_std_error"]),
        0.0,
    );
    record("A2", "force-free kernel marginal", judge(&transition, |n| n.starts_with("ks_alpha"), &[]), t);
    record(
        "A3a",
        "Heun vs Euler-Ito ensembles",
        judge(
            &transition,
            |n| n.starts_with("ks_two_sample"),
            &["ks_two_sample[d_tau=0.5]_p_value", "ks_two_sample[d_tau=2]_p_value"],
        ),
        0.0,
    );

    let (friction, t) = timed(|| run_config("pde_friction.json", &root.join("pde_friction"), |_| {}));
    record("A3b", "Monte Carlo vs PDE under friction", judge(&friction, |n| n.starts_with("mc_"), &[]), t);

    let (eq, t) = timed(|| run_config("equilibrium.json", &root.join("equilibrium"), |_| {}));
    record(
        "A1",
        "Juttner equilibrium",
        judge(&eq, |_| true, &["ks_alpha_p_value", "kT_over_mc2", "mean_u0", "mean_u0_juttner"]),
        t,
    );

    let failed: Vec<&str> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!("acceptance: {} of {} criteria pass", lines.len() - failed.len(), lines.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
