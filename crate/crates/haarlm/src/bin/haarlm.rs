use clap::{Args, Parser, Subcommand};
use haarlm::experiments::diagonal::run_diagonal;
use haarlm::experiments::full::run_full_ratio;
use haarlm::experiments::lemmas::{sweep_lemmas, LemmaRanges};
use haarlm::experiments::offdiag::offdiagonal_sweep;
use haarlm::experiments::{fit_slope, write_csv, ExperimentConfig, RunMode, P1};
use haarlm::kernels::{KernelSet, KernelSpec};
use haarlm::norms::SpaceParams;
use haarlm::{Error, Result};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "haarlm", version, about = "Haar projection and local-means norm experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON file with an experiment configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    s: Option<f64>,
    /// `6..14`, `8,10,12` or a single value.
    #[arg(long = "N", global = true)]
    n: Option<String>,
    #[arg(long = "R", global = true)]
    r: Option<i64>,
    /// direct, periodic or both.
    #[arg(long, global = true)]
    mode: Option<RunMode>,
    #[arg(long, global = true)]
    window: Option<i64>,
    #[arg(long, global = true)]
    kmax: Option<i64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory for CSV and JSON files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build or verify the kernel file.
    Kernels {
        #[command(subcommand)]
        action: KernelCmd,
    },
    /// Diagonal blocks, slope fit and lower bound.
    Diagonal,
    /// Off-diagonal sums against the diagonal.
    Offdiagonal,
    /// Lemma regime sweeps.
    Lemmas,
    /// Full norms of the test function and its projection.
    Full,
    /// Fit `log2 value` against `N` from a two-column CSV.
    Slope { file: PathBuf },
}

#[derive(Subcommand)]
enum KernelCmd {
    Build { file: PathBuf },
    Check { file: PathBuf },
}

fn parse_list(s: &str) -> Result<Vec<i64>> {
    let bad = || Error::Parse(format!("bad N list {s}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn config(c: &Common, default_n: &[i64], default_r: i64) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?).map_err(|e| Error::Parse(e.to_string()))?,
        None => ExperimentConfig::new(P1, default_n.to_vec(), default_r),
    };
    let pr = cfg.params;
    cfg.params = SpaceParams::new(c.p.unwrap_or(pr.p), c.q.unwrap_or(pr.q), c.s.unwrap_or(pr.s));
    if let Some(n) = &c.n {
        cfg.n_list = parse_list(n)?;
    }
    if let Some(r) = c.r {
        cfg.r = r;
    }
    if let Some(m) = &c.mode {
        cfg.mode = m.clone();
    }
    if c.window.is_some() {
        cfg.window = c.window;
    }
    if c.kmax.is_some() {
        cfg.k_max = c.kmax;
    }
    if let Some(t) = c.tol {
        cfg.tol = t;
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let d = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&d)?;
    Ok(d)
}

fn summary(dir: &Path, name: &str, v: serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join(format!("{name}_summary.json")), &text)?;
    println!("{text}");
    Ok(())
}

fn fail_if(failed: Vec<String>) -> Result<()> {
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::AssertFail(failed.join("; ")))
    }
}

fn run(cli: Cli) -> Result<()> {
    let ks = KernelSet::default_set();
    let c = &cli.common;
    match cli.cmd {
        Cmd::Kernels { action: KernelCmd::Build { file } } => {
            let set = KernelSet::build(&KernelSpec::default(), 1.0)?;
            std::fs::write(&file, set.to_text())?;
            println!("wrote {} (c0 = {}, J = [{}, {}])", file.display(), set.c0, set.j.left, set.j.right);
        }
        Cmd::Kernels { action: KernelCmd::Check { file } } => {
            let set = KernelSet::from_text(&std::fs::read_to_string(&file)?)?;
            let mut fails = set.check();
            for (name, a, b) in [("eta", &set.eta, &ks.eta), ("psi0", &set.psi0, &ks.psi0), ("psi", &set.psi, &ks.psi), ("Psi", &set.big_psi, &ks.big_psi)] {
                if a != b {
                    fails.push(format!("{name} differs from a fresh build"));
                }
            }
            fail_if(fails)?;
            println!("{}: ok", file.display());
        }
        Cmd::Diagonal => {
            let cfg = config(c, &(6..=14).collect::<Vec<_>>(), 8)?;
            let dir = out_dir(&cfg)?;
            let rep = run_diagonal(&cfg, ks)?;
            let rows: Vec<Vec<String>> =
                rep.points.iter().flat_map(|p| p.per_k.iter().map(move |(k, v)| vec![p.n.to_string(), k.to_string(), v.to_string()])).collect();
            write_csv(&dir.join("diagonal.csv"), &["N", "k", "value"], &rows)?;
            let slope_ok = (rep.fit.slope - rep.target_slope).abs() <= 0.05;
            summary(
                &dir,
                "diagonal",
                json!({
                    "slope": rep.fit.slope, "target_slope": rep.target_slope, "residual": rep.fit.residual,
                    "c1": rep.c1, "D": rep.points.iter().map(|p| (p.n, p.d, p.lower_bound)).collect::<Vec<_>>(),
                    "checks": {"slope_within_0.05": slope_ok, "lower_bound": true}
                }),
            )?;
            fail_if(if slope_ok { vec![] } else { vec![format!("slope {} vs {}", rep.fit.slope, rep.target_slope)] })?;
        }
        Cmd::Offdiagonal => {
            let cfg = config(c, &[8, 10, 12], 8)?;
            let dir = out_dir(&cfg)?;
            let (reps, n0) = offdiagonal_sweep(&cfg, ks)?;
            for r in &reps {
                let rows: Vec<Vec<String>> = r
                    .pairs
                    .iter()
                    .map(|p| vec![p.m.to_string(), p.n.to_string(), p.value.to_string(), p.bound.to_string(), p.ratio.to_string()])
                    .collect();
                write_csv(&dir.join(format!("offdiagonal_N{}.csv", r.n)), &["m", "n", "value", "bound", "ratio"], &rows)?;
            }
            let pass: Vec<bool> = reps.iter().map(|r| r.ratio <= 0.5).collect();
            summary(
                &dir,
                "offdiagonal",
                json!({
                    "N0": n0,
                    "reports": reps.iter().map(|r| json!({
                        "N": r.n, "U": r.u, "D": r.d, "ratio": r.ratio, "window_ratio": r.window_ratio,
                        "window_sum": r.window_sum, "tail_bound": r.tail_bound, "C2_candidate": r.constant,
                        "dominant": r.dominant, "epsilon": r.epsilon
                    })).collect::<Vec<_>>(),
                    "checks": {"U_at_most_half_D": pass}
                }),
            )?;
            fail_if(reps.iter().filter(|r| r.ratio > 0.5).map(|r| format!("U/D = {:.3} at N = {}", r.ratio, r.n)).collect())?;
        }
        Cmd::Lemmas => {
            let cfg = config(c, &[3, 4, 5], 8)?;
            let dir = out_dir(&cfg)?;
            let mut ranges = LemmaRanges::new(cfg.n_list.clone(), cfg.params.q);
            ranges.spec = cfg.spec;
            let rep = sweep_lemmas(&ranges, ks)?;
            let rows: Vec<Vec<String>> = rep
                .rows
                .iter()
                .map(|r| vec![r.lemma.clone(), r.regime.clone(), r.j.to_string(), r.k.to_string(), r.l.to_string(), r.n.to_string(), r.ratio.to_string()])
                .collect();
            write_csv(&dir.join("lemmas.csv"), &["lemma", "regime", "j", "k", "l", "N", "ratio"], &rows)?;
            let v = rep.violations();
            summary(
                &dir,
                "lemmas",
                json!({
                    "summaries": rep.summaries, "zero_cases": rep.zero_cases, "zero_cases_exact": rep.zero_cases_exact,
                    "max_stability": rep.max_stability, "checks": {"stable_and_exact": v.is_empty()}, "violations": v
                }),
            )?;
            fail_if(v)?;
        }
        Cmd::Full => {
            let mut cfg = config(c, &[2, 3, 4, 5], 2)?;
            if c.mode.is_none() {
                cfg.mode = RunMode::Direct;
            }
            let dir = out_dir(&cfg)?;
            let rep = run_full_ratio(&cfg, ks)?;
            let rows: Vec<Vec<String>> = rep
                .points
                .iter()
                .map(|p| vec![p.n.to_string(), p.f_norm.value.to_string(), p.pf_norm.value.to_string(), p.ratio.to_string()])
                .collect();
            write_csv(&dir.join("full.csv"), &["N", "f_norm", "pf_norm", "ratio"], &rows)?;
            let slope_ok = rep.fit.slope >= cfg.params.target_slope() - 0.3;
            summary(
                &dir,
                "full",
                json!({
                    "slope": rep.fit.slope, "strictly_increasing": rep.strictly_increasing, "f_spread": rep.f_spread,
                    "checks": {"slope": slope_ok, "increasing": rep.strictly_increasing, "f_within_factor_2": rep.f_spread <= 2.0}
                }),
            )?;
            let mut fails = Vec::new();
            if !slope_ok || !rep.strictly_increasing {
                fails.push(format!("ratio slope {} increasing {}", rep.fit.slope, rep.strictly_increasing));
            }
            if rep.f_spread > 2.0 {
                fails.push(format!("||f_N|| spread {}", rep.f_spread));
            }
            fail_if(fails)?;
        }
        Cmd::Slope { file } => {
            let mut rd = csv::Reader::from_path(&file).map_err(|e| Error::Io(e.to_string()))?;
            let mut pts = Vec::new();
            for rec in rd.records() {
                let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
                let num = |i: usize| rec.get(i).and_then(|t| t.trim().parse::<f64>().ok()).ok_or_else(|| Error::Parse(format!("bad row {rec:?}")));
                pts.push((num(0)?, num(1)?));
            }
            let fit = fit_slope(&pts)?;
            println!("{}", serde_json::to_string_pretty(&fit).map_err(|e| Error::Io(e.to_string()))?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::AssertFail(_)) => {
            eprintln!("FAIL: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
