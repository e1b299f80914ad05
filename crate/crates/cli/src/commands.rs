use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::ValueEnum;
use drsdiag::admm::diagnose_admm;
use drsdiag::pathology::{diagnose, DiagnoseConfig};
use drsdiag::verify::{run_all, VerifyOptions};
use drsdiag::zoo::{catalog, entry, Problem, ProblemFile};
use drsdiag::{Error, Vector};
use rayon::prelude::*;

use crate::{ProblemArgs, RunArgs, SweepArgs, EXIT_CAPABILITY, EXIT_INPUT, EXIT_VERIFY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Probe {
    /// Record dist(x^{k+1}, dom f) and dist(x^{k+1/2}, dom g).
    DomainDistances,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Capability(_)) { EXIT_CAPABILITY } else { EXIT_INPUT };
        Failure { code, message: e.to_string() }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn load(args: &ProblemArgs) -> Outcome<ProblemFile<f64>> {
    if let Some(id) = &args.zoo {
        return Ok(entry::<f64>(id)?.to_file());
    }
    let path = args.file.as_ref().ok_or_else(|| Failure::input("no problem given"))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    Ok(ProblemFile::from_json(&text)?)
}

fn config(
    args: &ProblemArgs,
    file: &ProblemFile<f64>,
    gamma: f64,
    stride: Option<u64>,
) -> Outcome<DiagnoseConfig<f64>> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Failure::input(format!("gamma must be positive, got {gamma}")));
    }
    let mut cfg = DiagnoseConfig::new(gamma, args.max_iter as usize);
    cfg.z0 = args.z0.as_ref().map(|z| Vector::from_f64(z)).or_else(|| file.z0.clone());
    cfg.probes.fp_tol = args.fp_tol;
    cfg.probes.stride = stride.map(|s| s as usize);
    cfg.probes.domain_distances = args.probes.contains(&Probe::DomainDistances);
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

/// What one diagnosis produced, whichever algorithm ran.
struct Outcomes {
    json: String,
    csv: String,
    label: String,
    iterations: usize,
    converged: bool,
    observed_limit: Option<f64>,
    running_min: Option<f64>,
    v_norm: Option<f64>,
    residual_tail: Option<f64>,
}

fn diagnose_file(file: &ProblemFile<f64>, cfg: &DiagnoseConfig<f64>) -> Outcome<Outcomes> {
    let gt = file.ground_truth.as_ref();
    match &file.problem {
        Problem::Drs { f, g } => {
            let (f, g) = (f.compile()?, g.compile()?);
            let mut d = diagnose(&f, &g, cfg, gt)?;
            d.report.id = file.id.clone();
            let r = &d.report;
            Ok(Outcomes {
                json: r.to_json(),
                csv: d.trace.to_csv(),
                label: r.label.to_string(),
                iterations: r.iterations,
                converged: r.converged,
                observed_limit: r.observed_limit,
                running_min: r.objective.as_ref().map(|o| o.running_min),
                v_norm: r.idv.as_ref().map(|v| v.v().norm()),
                residual_tail: None,
            })
        }
        Problem::Admm(spec) => {
            if cfg.z0.is_some() {
                eprintln!("drsdiag: --z0 ignored for ADMM problems (they start from nu = 0, y in dom g)");
            }
            let prob = spec.compile()?;
            let mut d = diagnose_admm(&prob, cfg, gt)?;
            d.report.id = file.id.clone();
            let r = &d.report;
            let reduced = r.reduced.as_ref();
            Ok(Outcomes {
                json: r.to_json(),
                csv: d.trace.to_csv(),
                label: r.case.to_string().to_uppercase(),
                iterations: r.iterations,
                converged: r.converged,
                observed_limit: r.objective.as_ref().map(|o| o.tail_mean),
                running_min: r.objective.as_ref().map(|o| o.running_min),
                v_norm: reduced.and_then(|x| x.idv.as_ref()).map(|v| v.v().norm()),
                residual_tail: Some(r.residual_tail),
            })
        }
    }
}

pub fn run(args: &RunArgs) -> Outcome {
    let file = load(&args.problem)?;
    let cfg = config(&args.problem, &file, args.gamma, args.stride)?;
    let out = diagnose_file(&file, &cfg)?;
    if let Some(path) = &args.out_trace {
        write(path, &out.csv)?;
    }
    match &args.out_report {
        Some(path) => {
            write(path, &out.json)?;
            println!(
                "label {} after {} iterations (converged: {}, observed limit: {})",
                out.label,
                out.iterations,
                out.converged,
                opt(out.observed_limit)
            );
        }
        None => println!("{}", out.json),
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn sweep(args: &SweepArgs) -> Outcome {
    let file = load(&args.problem)?;
    let rows: Vec<String> = args
        .gammas
        .par_iter()
        .map(|&gamma| {
            let cell = config(&args.problem, &file, gamma, None).and_then(|cfg| diagnose_file(&file, &cfg));
            match cell {
                Ok(o) => format!(
                    "{gamma},{},{},{},{},{},{},{},",
                    o.label,
                    o.iterations,
                    o.converged,
                    opt(o.observed_limit),
                    opt(o.running_min),
                    opt(o.v_norm),
                    opt(o.residual_tail)
                ),
                Err(e) => format!("{gamma},,,,,,,,\"{}\"", e.message.replace('"', "'")),
            }
        })
        .collect();
    let mut csv =
        String::from("gamma,label,iterations,converged,observed_limit,running_min,v_norm,residual_tail,error\n");
    for r in rows {
        let _ = writeln!(csv, "{r}");
    }
    match &args.out {
        Some(path) => write(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

pub fn zoo_list() -> Outcome {
    println!("{:<22} {:<5} {:<20} {:<8} source", "id", "case", "p*", "d*");
    for e in catalog::<f64>() {
        let gt = &e.ground_truth;
        println!(
            "{:<22} {:<5} {:<20} {:<8} {}",
            e.id,
            gt.case.to_string(),
            gt.p_star.to_string(),
            gt.d_star.to_string(),
            e.source
        );
    }
    Ok(())
}

pub fn zoo_export(id: &str) -> Outcome {
    println!("{}", entry::<f64>(id)?.to_file().to_json());
    Ok(())
}

pub fn zoo_verify(only: Option<String>, tol_scale: f64, verbose: bool) -> Outcome {
    if let Some(id) = &only {
        entry::<f64>(id)?;
    }
    if tol_scale.is_nan() || tol_scale <= 0.0 {
        return Err(Failure::input(format!("tol-scale must be positive, got {tol_scale}")));
    }
    let results = run_all(&VerifyOptions { tol_scale, only });
    for r in &results {
        println!("{}", r.summary_line());
        println!("    entries: {}", r.entries.join(", "));
        for c in r.checks.iter().filter(|c| verbose || !c.passed) {
            println!("    {c}");
        }
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        return Err(Failure { code: EXIT_VERIFY, message: format!("{failed} acceptance criteria failed") });
    }
    Ok(())
}
