//! Subcommand bodies. Every output file is written after all computation
//! for it has finished, in a fixed order, so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use dlrisk_core::bounds::{bound_report, countermonotone_sums, fmt_ext};
use dlrisk_core::coupling::{dl_plan_truncated, sample_coupling, SampleOptions};
use dlrisk_core::dist::{check_st, isotonic_pair_projection};
use dlrisk_core::io::{read_empirical_file, sample_sidecar, with_file, write_curve, write_sample};
use dlrisk_core::{
    BoundOptions, BoundReport, CouplingKind, Dist, Error, Levels, Measure, OrderCheckReport, OrderedPair,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::CliError;

pub struct LevelSpec {
    pub from: f64,
    pub to: f64,
    pub step: f64,
    pub measure: Measure,
    pub q: Option<f64>,
}

pub struct RunConfig {
    pub grid_n: usize,
    pub truncation_m: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub project: bool,
}

impl RunConfig {
    fn options(&self) -> Result<BoundOptions, CliError> {
        if self.grid_n < 100 {
            return Err(CliError::Precondition(format!("--grid-n {} is below 100", self.grid_n)));
        }
        let opts = BoundOptions { grid_n: self.grid_n, truncation_m: self.truncation_m, ..BoundOptions::default() };
        opts.validate()?;
        Ok(opts)
    }

    fn prepare_out(&self) -> Result<(), CliError> {
        fs::create_dir_all(self.out.join("reports"))?;
        Ok(())
    }
}

/// `from, from + step, ..., <= to`, rounded to 12 decimals so that grid
/// points print cleanly.
pub fn level_grid(from: f64, to: f64, step: f64, unit: Option<()>) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && from <= to && from.is_finite() && to.is_finite()) {
        return Err(CliError::Precondition(format!("bad grid: from {from} to {to} step {step}")));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| ((from + step * i as f64) * 1e12).round() / 1e12).collect();
    if unit.is_some() && grid.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(CliError::Precondition(format!("level grid [{from}, {to}] leaves (0, 1)")));
    }
    Ok(grid)
}

#[derive(Debug, Serialize)]
pub struct Projection {
    pub violation_before: f64,
    pub witness: f64,
    pub projected: bool,
    pub violation_after: f64,
}

/// Builds the ordered pair, repairing a violation by isotonic projection
/// when `project` is set. `tol` overrides the default order tolerance.
fn order_pair(
    f: Dist,
    g: Dist,
    project: bool,
    tol: Option<f64>,
    weights: (f64, f64),
) -> Result<(OrderedPair, Projection), CliError> {
    let attempt = match tol {
        Some(t) => OrderedPair::with_tolerance(f.clone(), g.clone(), t),
        None => OrderedPair::new(f.clone(), g.clone()),
    };
    match attempt {
        Ok(pair) => {
            let r = pair.order_report();
            let proj = Projection {
                violation_before: r.max_violation,
                witness: r.witness,
                projected: false,
                violation_after: r.max_violation,
            };
            Ok((pair, proj))
        }
        Err(Error::OrderViolation(report)) if project => {
            let (fp, gp) = isotonic_pair_projection(&f, &g, weights.0, weights.1)?;
            let after = check_st(&fp, &gp, report.grid_size, 0.0);
            eprintln!(
                "dlrisk: order violation {:.3e} at t = {} repaired by isotonic projection",
                report.max_violation, report.witness
            );
            let pair = OrderedPair::with_tolerance(fp, gp, 0.0)?;
            let proj = Projection {
                violation_before: report.max_violation,
                witness: report.witness,
                projected: true,
                violation_after: after.max_violation,
            };
            Ok((pair, proj))
        }
        Err(Error::OrderViolation(report)) => Err(order_failure(&report)),
        Err(e) => Err(e.into()),
    }
}

fn order_failure(report: &OrderCheckReport) -> CliError {
    let json = serde_json::to_string_pretty(report).unwrap_or_default();
    eprintln!("{json}");
    CliError::Precondition(format!(
        "F <=_st G fails (max violation {:.3e} at t = {}); rerun with --project to repair",
        report.max_violation, report.witness
    ))
}

fn write_json(path: &Path, json: &str) -> Result<(), CliError> {
    fs::write(path, format!("{json}\n"))?;
    Ok(())
}

fn write_reports(dir: &Path, reports: &[BoundReport]) -> Result<(), CliError> {
    for r in reports {
        let name = match (r.p, r.t) {
            (Some(p), _) => format!("{}_p{p:.4}.json", r.measure),
            (None, Some(t)) => format!("{}_t{t:.4}.json", r.measure),
            (None, None) => format!("{}.json", r.measure),
        };
        write_json(&dir.join("reports").join(name), &r.to_json()?)?;
    }
    Ok(())
}

/// `VaR_p` of equally weighted sorted values.
fn sorted_var(sorted: &[f64], p: f64) -> f64 {
    let k = ((p * sorted.len() as f64 - 1e-9).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

fn compute_bounds(pair: &OrderedPair, levels: &LevelSpec, cfg: &RunConfig) -> Result<(), CliError> {
    let opts = cfg.options()?;
    let ps = match levels.measure {
        Measure::EssInf | Measure::EssSup => vec![],
        Measure::Prob => return Err(CliError::Precondition("use the probbounds subcommand for --measure prob".into())),
        _ => level_grid(levels.from, levels.to, levels.step, Some(()))?,
    };
    if levels.measure == Measure::Rvar {
        let q = levels.q.ok_or_else(|| CliError::Precondition("--measure rvar needs --q".into()))?;
        if let Some(&p) = ps.iter().find(|&&p| p >= q) {
            return Err(CliError::Precondition(format!("level {p} is not below --q {q}")));
        }
    }
    let reports: Vec<BoundReport> = if ps.is_empty() {
        vec![bound_report(pair, levels.measure, Levels::default(), &opts)?]
    } else {
        ps.par_iter()
            .map(|&p| bound_report(pair, levels.measure, Levels { p: Some(p), q: levels.q, t: None }, &opts))
            .collect::<Result<_, _>>()?
    };
    cfg.prepare_out()?;
    with_file(&cfg.out.join("curve.csv"), |w| write_curve(&reports, w))?;
    write_reports(&cfg.out, &reports)?;

    if !ps.is_empty() {
        let (f, g) = (pair.f(), pair.g());
        let plan = dl_plan_truncated(f, g, opts.grid_n, 0.0, opts.truncation_m)?;
        let ct = countermonotone_sums(f, g, opts.grid_n);
        with_file(&cfg.out.join("sums.csv"), |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["p", "var_dl", "var_ct"])?;
            for &p in &ps {
                out.write_record([fmt_ext(p), fmt_ext(plan.sum_quantile(p)), fmt_ext(sorted_var(&ct, p))])?;
            }
            out.flush()?;
            Ok(())
        })?;
    }
    let violations = reports.iter().filter(|r| !r.nesting_holds(1e-9)).count();
    if violations > 0 {
        eprintln!("dlrisk: warning: {violations} level(s) break L <= Lo <= Uo <= U beyond numerical tolerance");
    }
    println!("wrote {} level(s) of {} bounds to {}", reports.len(), levels.measure, cfg.out.display());
    Ok(())
}

pub fn bounds(f: Dist, g: Dist, levels: &LevelSpec, cfg: &RunConfig) -> Result<(), CliError> {
    cfg.options()?;
    let (pair, _) = order_pair(f, g, cfg.project, None, (1.0, 1.0))?;
    compute_bounds(&pair, levels, cfg)
}

pub fn probbounds(f: Dist, g: Dist, ts: &[f64], cfg: &RunConfig) -> Result<(), CliError> {
    let opts = cfg.options()?;
    let (pair, _) = order_pair(f, g, cfg.project, None, (1.0, 1.0))?;
    let reports: Vec<BoundReport> = ts
        .par_iter()
        .map(|&t| bound_report(&pair, Measure::Prob, Levels { t: Some(t), ..Levels::default() }, &opts))
        .collect::<Result<_, _>>()?;
    let plan = dl_plan_truncated(pair.f(), pair.g(), opts.grid_n, 0.0, opts.truncation_m)?;
    let ct = countermonotone_sums(pair.f(), pair.g(), opts.grid_n);
    cfg.prepare_out()?;
    with_file(&cfg.out.join("probbounds.csv"), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "m", "mo", "Mo", "M", "prob_dl", "prob_ct"])?;
        for (&t, r) in ts.iter().zip(&reports) {
            let prob_ct = ct.partition_point(|&s| s <= t) as f64 / ct.len() as f64;
            out.write_record([
                fmt_ext(t),
                fmt_ext(r.unconstrained_worst),
                fmt_ext(r.constrained_worst),
                fmt_ext(r.constrained_best),
                fmt_ext(r.unconstrained_best),
                fmt_ext(plan.dl_sum_cdf(t)),
                fmt_ext(prob_ct),
            ])?;
        }
        out.flush()?;
        Ok(())
    })?;
    write_reports(&cfg.out, &reports)?;
    println!("wrote probability bounds at {} threshold(s) to {}", ts.len(), cfg.out.display());
    Ok(())
}

pub fn sample(
    f: Dist,
    g: Dist,
    kind: CouplingKind,
    size: usize,
    jitter: bool,
    cfg: &RunConfig,
) -> Result<(), CliError> {
    let opts = cfg.options()?;
    let (f, g) = if kind == CouplingKind::Dl {
        let (pair, _) = order_pair(f, g, cfg.project, None, (1.0, 1.0))?;
        (pair.f().clone(), pair.g().clone())
    } else {
        (f, g)
    };
    let sopts = SampleOptions { plan_n: opts.grid_n, truncation_m: opts.truncation_m, jitter };
    let batch = sample_coupling(&f, &g, kind, size, cfg.seed, &sopts)?;
    fs::create_dir_all(&cfg.out)?;
    with_file(&cfg.out.join("sample.csv"), |w| write_sample(&batch, w))?;
    write_json(&cfg.out.join("sample.json"), &sample_sidecar(&batch)?)?;
    println!("wrote {size} {kind} draws to {}", cfg.out.display());
    Ok(())
}

pub struct Bootstrap {
    pub obs_f: PathBuf,
    pub obs_g: PathBuf,
    pub group_f: usize,
    pub group_g: usize,
    pub replicates: usize,
    pub threshold: Option<f64>,
}

#[derive(Serialize)]
struct Preprocessing<'a> {
    obs_f: &'a Path,
    obs_g: &'a Path,
    group_f: usize,
    group_g: usize,
    replicates: usize,
    seed: u64,
    threshold: f64,
    #[serde(flatten)]
    projection: Projection,
}

/// Totals of `group` draws with replacement, `replicates` times.
fn bootstrap_totals(obs: &Dist, group: usize, replicates: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, CliError> {
    use rand::Rng;
    let mut totals = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let mut s = 0.0;
        for _ in 0..group {
            let u: f64 = rng.sample(rand::distr::Open01);
            s += obs.quantile_left(u)?;
        }
        totals.push(s);
    }
    Ok(totals)
}

pub fn casestudy(boot: &Bootstrap, levels: &LevelSpec, cfg: &RunConfig) -> Result<(), CliError> {
    cfg.options()?;
    if boot.replicates < 2 || boot.group_f == 0 || boot.group_g == 0 {
        return Err(CliError::Precondition("need at least 2 replicates and positive group sizes".into()));
    }
    let obs_f = read_empirical_file(&boot.obs_f)?;
    let obs_g = read_empirical_file(&boot.obs_g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tf = bootstrap_totals(&obs_f, boot.group_f, boot.replicates, &mut rng)?;
    let tg = bootstrap_totals(&obs_g, boot.group_g, boot.replicates, &mut rng)?;
    let (f, g) = (Dist::empirical(&tf, None)?, Dist::empirical(&tg, None)?);
    let threshold = boot.threshold.unwrap_or(2.0 / (boot.replicates as f64).sqrt());

    // With --project any violation is repaired, so the result passes at
    // tolerance 0; without it, violations up to the threshold are accepted.
    let tol = if cfg.project { 0.0 } else { threshold };
    let r = boot.replicates as f64;
    let (pair, projection) = order_pair(f, g, cfg.project, Some(tol), (r, r))?;
    cfg.prepare_out()?;
    let log = Preprocessing {
        obs_f: &boot.obs_f,
        obs_g: &boot.obs_g,
        group_f: boot.group_f,
        group_g: boot.group_g,
        replicates: boot.replicates,
        seed: cfg.seed,
        threshold,
        projection,
    };
    write_json(&cfg.out.join("preprocessing.json"), &serde_json::to_string_pretty(&log).map_err(Error::from)?)?;
    compute_bounds(&pair, levels, cfg)
}
