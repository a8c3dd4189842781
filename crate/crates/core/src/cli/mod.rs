//! Scenario runner behind the `ordfix` binary.
//!
//! `ordfix <mode> --config PATH --out DIR [--seed N]` reads a JSON
//! [`ScenarioConfig`] and writes machine-readable results into `DIR`:
//!
//! | mode       | files                                                     |
//! |------------|-----------------------------------------------------------|
//! | `check`    | `report.json`                                             |
//! | `solve`    | `trace.jsonl`, `coincidence.json`                         |
//! | `oracle`   | `oracle.json`                                             |
//! | `integral` | `solution.csv`, `solution.json`, `trace.jsonl`, `hypotheses.json` |
//!
//! Exit status is 0 on success, 1 when a hypothesis fails or the iteration
//! does not produce a point (the report is still written) and 2 for
//! configuration or I/O errors.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

pub use config::{
    BetaProbeConfig, BetaSpec, CheckConfig, IntegralConfig, IterationConfig, MapSpec, Mode, OracleConfig, OrderSpec,
    ScenarioConfig, SpaceSpec,
};

use crate::error::{Error, Result};
use crate::finite_oracle::{oracle_sweep, SweepConfig, SweepReport};
use crate::integral_app::{
    check_kernel_hypotheses, run_integral, GridFunction, KernelCheckOptions, KernelHypothesisReport,
};
use crate::order_metric::{beta_admissibility_probe, AdmissibilityReport, GeraghtyBeta};
use crate::solver::{
    cauchy_diagnostics, extract_coincidence, iterate_sequence, monitor_distance_monotone, monitor_order_chain,
    multistart_uniqueness, write_trace_jsonl, CauchyDiagnostics, Extraction, IterationStatus, MultistartReport,
    StepViolation,
};
use crate::triple::{
    check_contraction, check_range_inclusion, check_section, check_weakly_increasing, compatibility_probe,
    CheckOutcome, Coverage, HypothesisReport, Side, Verdict,
};

#[derive(Debug, Parser)]
#[command(
    name = "ordfix",
    version,
    about = "Coincidence point experiments on ordered metric spaces"
)]
pub struct Args {
    #[arg(value_enum)]
    pub mode: Mode,
    /// Scenario config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    ConfigError = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Status and the files a scenario wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub status: ExitStatus,
    pub files: Vec<PathBuf>,
}

/// Runs the scenario described by `args`; configuration and I/O errors map
/// to exit status 2.
pub fn run(args: &Args) -> ExitStatus {
    let result =
        ScenarioConfig::load(&args.config).and_then(|config| run_scenario(args.mode, &config, &args.out, args.seed));
    match result {
        Ok(outcome) => outcome.status,
        Err(e) => {
            eprintln!("ordfix: {e}");
            ExitStatus::ConfigError
        }
    }
}

/// Runs one scenario. Errors are configuration or I/O problems; hypothesis
/// and convergence failures are reported through [`ScenarioOutcome::status`].
pub fn run_scenario(mode: Mode, config: &ScenarioConfig, out_dir: &Path, seed: Option<u64>) -> Result<ScenarioOutcome> {
    config.validate(mode)?;
    std::fs::create_dir_all(out_dir)?;
    let seed = seed.or(config.seed);
    let mut writer = OutputWriter::new(out_dir);
    let ok = match mode {
        Mode::Check => run_check(config, &mut writer)?,
        Mode::Solve => run_solve(config, &mut writer)?,
        Mode::Oracle => run_oracle(config, seed, &mut writer)?,
        Mode::Integral => run_integral_mode(config, seed, &mut writer)?,
    };
    Ok(ScenarioOutcome {
        status: if ok { ExitStatus::Success } else { ExitStatus::Failure },
        files: writer.files,
    })
}

struct OutputWriter<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> OutputWriter<'a> {
    fn new(dir: &'a Path) -> Self {
        Self { dir, files: Vec::new() }
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let file = File::create(&path)?;
        self.files.push(path);
        Ok(BufWriter::new(file))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut out = self.create(name)?;
        serde_json::to_writer_pretty(&mut out, value)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct CheckReport {
    mode: &'static str,
    passed: bool,
    failed_hypotheses: Vec<&'static str>,
    hypotheses: HypothesisReport<f64>,
    /// A sample point where the section of `H` does not invert it.
    section_counterexample: Option<f64>,
    beta_probe: AdmissibilityReport,
    checked: CheckCounts,
}

#[derive(Serialize)]
struct CheckCounts {
    range_inclusion: usize,
    weakly_increasing: usize,
    contraction: usize,
    contraction_skipped: usize,
    compatibility: usize,
}

fn absorb<W>(outcome: CheckOutcome<W>, label: &str, notes: &mut Vec<String>) -> (Verdict<W>, usize) {
    notes.extend(outcome.notes.into_iter().map(|n| format!("{label}: {n}")));
    (outcome.verdict, outcome.checked)
}

fn run_check(config: &ScenarioConfig, out: &mut OutputWriter<'_>) -> Result<bool> {
    let triple = config.real_triple()?;
    let check = config.check.as_ref().expect("validated");
    let iteration = config.iteration.as_ref().expect("validated");
    let points = check.points();
    let pairs: Vec<(f64, f64)> = points
        .iter()
        .flat_map(|&x| points.iter().map(move |&y| (x, y)))
        .collect();
    let mut notes = Vec::new();

    let section_counterexample = check_section(&triple, &points)?;
    let (range_inclusion, range_checked) = absorb(
        check_range_inclusion(&triple, &points, Coverage::Sampled)?,
        "range_inclusion",
        &mut notes,
    );
    let (weakly_increasing, weak_checked) = absorb(
        check_weakly_increasing(&triple, &points, Coverage::Sampled, &points, check.preimage_budget)?,
        "weakly_increasing",
        &mut notes,
    );
    let contraction_outcome = check_contraction(&triple, &pairs, Coverage::Sampled)?;
    let contraction_skipped = contraction_outcome.skipped;
    let (contraction, contraction_checked) = absorb(contraction_outcome, "contraction", &mut notes);

    let mut compatibility = Verdict::SampledOk;
    let mut compat_checked = 0;
    match iterate_sequence(&triple, iteration.x0, iteration.max_iter, iteration.tol) {
        Ok(trace) if trace.x_seq.len() >= 3 => {
            for (side, map) in [(Side::F, &triple.f), (Side::G, &triple.g)] {
                let (v, c) = absorb(
                    compatibility_probe(
                        map.as_ref(),
                        triple.h.as_ref(),
                        triple.space.as_ref(),
                        &trace.x_seq,
                        check.compat_tolerance,
                        side,
                    )?,
                    "compatibility",
                    &mut notes,
                );
                compatibility = compatibility.merge(v);
                compat_checked += c;
            }
        }
        Ok(_) => notes.push("compatibility: iteration stopped before 3 points; probe skipped".into()),
        Err(e) => notes.push(format!("compatibility: no probe sequence ({e})")),
    }
    notes.push("directedness is not decidable on a continuum and is not checked".into());

    let probe = check.beta_probe.clone().unwrap_or(BetaProbeConfig {
        delta: 1e-6,
        t_max: (check.hi - check.lo).max(1.0),
        samples: 1000,
    });
    let beta_probe = beta_admissibility_probe(&triple.beta, probe.delta, probe.t_max, probe.samples)
        .map_err(|e| Error::Config(e.to_string()))?;

    let hypotheses = HypothesisReport {
        range_inclusion,
        weakly_increasing,
        contraction,
        compatibility,
        directedness: None,
        notes,
    };
    let mut failed_hypotheses = hypotheses.failures();
    if section_counterexample.is_some() {
        failed_hypotheses.push("section");
    }
    if !beta_probe.admissible {
        failed_hypotheses.push("beta_admissibility");
    }
    let passed = failed_hypotheses.is_empty();
    out.json(
        "report.json",
        &CheckReport {
            mode: "check",
            passed,
            failed_hypotheses,
            hypotheses,
            section_counterexample,
            beta_probe,
            checked: CheckCounts {
                range_inclusion: range_checked,
                weakly_increasing: weak_checked,
                contraction: contraction_checked,
                contraction_skipped,
                compatibility: compat_checked,
            },
        },
    )?;
    Ok(passed)
}

#[derive(Serialize)]
struct SolveReport {
    mode: &'static str,
    passed: bool,
    status: Option<IterationStatus>,
    steps: usize,
    error: Option<String>,
    violation: Option<StepViolation>,
    order_chain_ok: Option<bool>,
    distance_monotone: Option<bool>,
    cauchy: Option<CauchyDiagnostics>,
    extraction: Option<Extraction<f64>>,
    multistart: Option<MultistartReport<f64>>,
}

fn run_solve(config: &ScenarioConfig, out: &mut OutputWriter<'_>) -> Result<bool> {
    let triple = config.real_triple()?;
    let it = config.iteration.as_ref().expect("validated");
    let mut report = SolveReport {
        mode: "solve",
        passed: false,
        status: None,
        steps: 0,
        error: None,
        violation: None,
        order_chain_ok: None,
        distance_monotone: None,
        cauchy: None,
        extraction: None,
        multistart: None,
    };
    let mut trace_file = out.create("trace.jsonl")?;
    match iterate_sequence(&triple, it.x0, it.max_iter, it.tol) {
        Ok(trace) => {
            write_trace_jsonl(&trace, &mut trace_file)?;
            report.status = Some(trace.status);
            report.steps = trace.steps();
            report.violation = trace.violation;
            report.order_chain_ok = Some(monitor_order_chain(&trace, triple.order.as_ref()));
            report.distance_monotone = monitor_distance_monotone(&trace).ok();
            report.cauchy = cauchy_diagnostics(&trace, triple.space.as_ref(), trace.y_seq.len() / 2).ok();
            let extraction = extract_coincidence(&triple, &trace, it.tol)?;
            report.passed = extraction.point().is_some();
            report.extraction = Some(extraction);
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    trace_file.flush()?;
    if !it.starts.is_empty() {
        let mut starts = vec![it.x0];
        starts.extend(&it.starts);
        let multi = multistart_uniqueness(&triple, &starts, it.max_iter, it.tol)?;
        report.passed &= multi.all_agree;
        report.multistart = Some(multi);
    }
    out.json("coincidence.json", &report)?;
    Ok(report.passed)
}

fn run_oracle(config: &ScenarioConfig, seed: Option<u64>, out: &mut OutputWriter<'_>) -> Result<bool> {
    let o = config.oracle.as_ref().expect("validated");
    let (n_min, n_max) = o.size_range()?;
    let beta = match &config.beta {
        Some(b) => b.build()?,
        None => GeraghtyBeta::constant(0.9)?,
    };
    let sweep = SweepConfig {
        seed_start: seed.unwrap_or(o.seed_start),
        seed_count: o.seed_count,
        n_min,
        n_max,
        density: o.density,
        beta,
        max_iter: o.max_iter,
    };
    let report: SweepReport = oracle_sweep(&sweep)?;
    let passed = report.passed();
    out.json(
        "oracle.json",
        &OracleOutput {
            mode: "oracle",
            passed,
            sweep: &report,
        },
    )?;
    Ok(passed)
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    mode: &'static str,
    passed: bool,
    sweep: &'a SweepReport,
}

#[derive(Serialize)]
struct IntegralReport<'a> {
    mode: &'static str,
    passed: bool,
    status: IterationStatus,
    steps: usize,
    violation: Option<StepViolation>,
    residual_f: Option<f64>,
    residual_g: Option<f64>,
    /// The last iterate; the solution when `passed`.
    solution: &'a GridFunction,
}

#[derive(Serialize)]
struct HypothesesOutput<'a> {
    mode: &'static str,
    passed: bool,
    failed_hypotheses: Vec<&'static str>,
    report: &'a KernelHypothesisReport,
}

fn run_integral_mode(config: &ScenarioConfig, seed: Option<u64>, out: &mut OutputWriter<'_>) -> Result<bool> {
    let ic = config.integral.as_ref().expect("validated");
    let problem = ic.problem()?;
    let h = problem.forcing_on_grid()?;
    let u0 = match &ic.u0 {
        Some(form) => {
            let f = form
                .build(problem.horizon, problem.grid_n)
                .map_err(|e| Error::Config(e.to_string()))?;
            problem.sample(|t| f(t))?
        }
        None => h.clone(),
    };
    let mut probes = vec![u0.clone()];
    if h != u0 {
        probes.push(h);
    }
    let options = KernelCheckOptions {
        seed: seed.unwrap_or(0),
        samples: ic.hypothesis_samples,
        value_range: None,
    };
    let hypotheses = check_kernel_hypotheses(&problem, &probes, &options)?;
    let failed_hypotheses = hypotheses.failures();
    out.json(
        "hypotheses.json",
        &HypothesesOutput {
            mode: "integral",
            passed: failed_hypotheses.is_empty(),
            failed_hypotheses: failed_hypotheses.clone(),
            report: &hypotheses,
        },
    )?;

    let run = run_integral(&problem, Some(u0), ic.max_iter, ic.tol)?;
    let mut trace_file = out.create("trace.jsonl")?;
    write_trace_jsonl(&run.trace, &mut trace_file)?;
    trace_file.flush()?;

    let (solution, residual_f, residual_g) = match &run.extraction {
        Extraction::Found(p) => (&p.u, Some(p.residual_fh), Some(p.residual_gh)),
        Extraction::NotFound {
            residual_fh,
            residual_gh,
            ..
        } => (run.trace.last_x(), *residual_fh, *residual_gh),
    };
    let mut csv = out.create("solution.csv")?;
    solution.write_csv(&mut csv)?;
    csv.flush()?;
    let found = run.extraction.point().is_some();
    out.json(
        "solution.json",
        &IntegralReport {
            mode: "integral",
            passed: found,
            status: run.trace.status,
            steps: run.trace.steps(),
            violation: run.trace.violation,
            residual_f,
            residual_g,
            solution,
        },
    )?;
    Ok(found && failed_hypotheses.is_empty())
}
