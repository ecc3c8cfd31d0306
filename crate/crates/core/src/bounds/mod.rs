//! Best- and worst-case values of risk measures of `X + Y`.
//!
//! Constrained values range over couplings with `X <= Y`; unconstrained ones
//! over all couplings. Tail measures reduce to the essential infimum or
//! supremum of a tail pair: the worst VaR at `p` is the worst essential
//! infimum of `(F^[p,1], G^[p,1])`, the best VaR the best essential supremum
//! of `(F^[0,p], G^[0,p])`.
//!
//! Continuous marginals use the transport-map formulas; marginals with atoms
//! go through the discrete plan.

mod report;

use crate::coupling::plan::cell_means;
use crate::coupling::{dl_plan_cell_means, dl_plan_truncated, DlPlan, OrderedPair};
use crate::dist::{Dist, DEFAULT_GRID_N, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::numeric::{bisect_boundary_to, scan_refine_max, scan_refine_min};

pub use report::{du_reduction, ext_real, fmt_ext, Attainer, Attaining, BoundReport, DuReduction, Measure};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    /// Points per grid for plan and countermonotone-pairing routes.
    pub grid_n: usize,
    /// Level at which infinite supports are truncated in grid routes.
    pub truncation_m: f64,
    /// Coarse scan size of the outer optimization over `x`.
    pub scan_points: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions { grid_n: DEFAULT_GRID_N, truncation_m: DEFAULT_TRUNCATION, scan_points: 1024 }
    }
}

impl BoundOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 2 {
            return Err(Error::domain("grid_n must be at least 2"));
        }
        if !(self.truncation_m > 0.5 && self.truncation_m < 1.0) {
            return Err(Error::domain(format!("truncation level {} outside (0.5, 1)", self.truncation_m)));
        }
        Ok(())
    }
}

/// Requested levels; which ones are used depends on the measure.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Levels {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub t: Option<f64>,
}

fn check_open_level(p: f64, what: &str) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} level {p} outside (0, 1)")))
    }
}

fn continuous(pair: &OrderedPair) -> bool {
    pair.f().is_continuous() && pair.g().is_continuous()
}

fn plan(pair: &OrderedPair, p: f64, opts: &BoundOptions) -> Result<DlPlan> {
    dl_plan_truncated(pair.f(), pair.g(), opts.grid_n, p, opts.truncation_m)
}

fn mean_plan(pair: &OrderedPair, p: f64, opts: &BoundOptions) -> Result<DlPlan> {
    dl_plan_cell_means(pair.f(), pair.g(), opts.grid_n, p, opts.truncation_m)
}

/// Sorted sums of cell means of `F` and reversed cell means of `G`: the
/// countermonotone arrangement of the mean-preserving discretizations.
fn countermonotone_cell_sums(f: &Dist, g: &Dist, opts: &BoundOptions) -> Vec<f64> {
    let (lo, hi) = (1.0 - opts.truncation_m, opts.truncation_m);
    let xs = cell_means(f, opts.grid_n, lo, hi);
    let ys = cell_means(g, opts.grid_n, lo, hi);
    let mut s: Vec<f64> = xs.iter().zip(ys.iter().rev()).map(|(x, y)| x + y).collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Sorted sums `F^{-1}(u_j) + G^{-1}(1 - u_j)` at midpoint levels
/// `u_j = (j + 1/2)/n`, i.e. the countermonotone arrangement on a grid.
pub fn countermonotone_sums(f: &Dist, g: &Dist, n: usize) -> Vec<f64> {
    let mut s: Vec<f64> = (0..n)
        .map(|j| {
            let u = (j as f64 + 0.5) / n as f64;
            f.ql(u) + g.ql(1.0 - u)
        })
        .collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Mean of sorted equally weighted values over the level range `[a, b]`.
fn sorted_level_mean(sorted: &[f64], a: f64, b: f64) -> f64 {
    let n = sorted.len() as f64;
    let mut acc = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        let lo = (k as f64 / n).max(a);
        let hi = ((k + 1) as f64 / n).min(b);
        if hi > lo {
            acc += v * (hi - lo);
        }
    }
    acc / (b - a)
}

// ---------------------------------------------------------------------------
// Essential infimum / supremum

/// `min{ inf_{x in [F^{-1}(0), G^{-1}(0)]} T(x) + x, 2 G^{-1}(0) }`, the
/// essential infimum of the DL-coupled sum.
fn analytic_worst_ess_inf(pair: &OrderedPair, points: usize) -> f64 {
    let (f, g) = (pair.f(), pair.g());
    let a = f.support_lo();
    let b = g.support_lo();
    let cap = 2.0 * b;
    if !(a < b) {
        return cap;
    }
    let obj = |x: f64| pair.transport_upper(x) + x;
    let mut best = cap;
    if a.is_finite() {
        best = best.min(scan_refine_min(obj, a, b, points).1);
    }
    // The same infimum parametrized by the level of F, which also covers
    // unbounded intervals and concentrates nodes where F has mass.
    let top = f.cdf(b);
    if top > 0.0 {
        best = best.min(scan_refine_min(|u| obj(f.ql(u)), 0.0, top, points).1);
    }
    best
}

/// Worst-case essential infimum of `X + Y` over couplings with `X <= Y`.
pub fn worst_ess_inf_constrained(pair: &OrderedPair, opts: &BoundOptions) -> Result<f64> {
    if continuous(pair) {
        Ok(analytic_worst_ess_inf(pair, opts.scan_points))
    } else {
        Ok(plan(pair, 0.0, opts)?.min_sum())
    }
}

/// Best-case essential supremum of `X + Y` over couplings with `X <= Y`,
/// obtained as `-worst_ess_inf(-Y, -X)`.
pub fn best_ess_sup_constrained(pair: &OrderedPair, opts: &BoundOptions) -> Result<f64> {
    Ok(-worst_ess_inf_constrained(pair.reflected(), opts)?)
}

/// `F^{-1}(0) + G^{-1}(0)`: best essential infimum, attained comonotonically.
pub fn comonotone_ess_inf(f: &Dist, g: &Dist) -> f64 {
    f.support_lo() + g.support_lo()
}

/// `F^{-1}(1) + G^{-1}(1)`: worst essential supremum, attained comonotonically.
pub fn comonotone_ess_sup(f: &Dist, g: &Dist) -> f64 {
    f.support_hi() + g.support_hi()
}

/// `inf_{x in [0,1]} F^{-1}(x) + G^{-1}(1-x)`.
pub fn worst_ess_inf_unconstrained(f: &Dist, g: &Dist, opts: &BoundOptions) -> f64 {
    if f.is_continuous() && g.is_continuous() {
        scan_refine_min(|x| f.ql(x) + g.ql(1.0 - x), 0.0, 1.0, opts.scan_points).1
    } else {
        countermonotone_sums(f, g, opts.grid_n)[0]
    }
}

/// `sup_{x in [0,1]} F^{-1}(x) + G^{-1}(1-x)`.
pub fn best_ess_sup_unconstrained(f: &Dist, g: &Dist, opts: &BoundOptions) -> f64 {
    if f.is_continuous() && g.is_continuous() {
        scan_refine_max(|x| f.ql(x) + g.ql(1.0 - x), 0.0, 1.0, opts.scan_points).1
    } else {
        *countermonotone_sums(f, g, opts.grid_n).last().unwrap()
    }
}

// ---------------------------------------------------------------------------
// VaR

/// Worst-case `VaR_p` under `X <= Y`: worst essential infimum of the upper tails.
pub fn worst_var_constrained(pair: &OrderedPair, p: f64, opts: &BoundOptions) -> Result<f64> {
    check_open_level(p, "VaR")?;
    worst_ess_inf_constrained(&pair.upper_tails(p)?, opts)
}

/// Best-case `VaR_p` under `X <= Y`: best essential supremum of the lower tails.
pub fn best_var_constrained(pair: &OrderedPair, p: f64, opts: &BoundOptions) -> Result<f64> {
    check_open_level(p, "VaR")?;
    best_ess_sup_constrained(&pair.lower_tails(p)?, opts)
}

/// `inf_{x in [0, 1-p]} F^{-1}(p+x) + G^{-1}(1-x)`.
pub fn worst_var_unconstrained(f: &Dist, g: &Dist, p: f64, opts: &BoundOptions) -> Result<f64> {
    check_open_level(p, "VaR")?;
    if f.is_continuous() && g.is_continuous() {
        Ok(scan_refine_min(|x| f.ql(p + x) + g.ql(1.0 - x), 0.0, 1.0 - p, opts.scan_points).1)
    } else {
        Ok(countermonotone_sums(&f.upper_tail(p)?, &g.upper_tail(p)?, opts.grid_n)[0])
    }
}

/// `sup_{x in [0, p]} F^{-1}(x) + G^{-1}(p-x)`.
pub fn best_var_unconstrained(f: &Dist, g: &Dist, p: f64, opts: &BoundOptions) -> Result<f64> {
    check_open_level(p, "VaR")?;
    if f.is_continuous() && g.is_continuous() {
        Ok(scan_refine_max(|x| f.ql(x) + g.ql(p - x), 0.0, p, opts.scan_points).1)
    } else {
        Ok(*countermonotone_sums(&f.lower_tail(p)?, &g.lower_tail(p)?, opts.grid_n).last().unwrap())
    }
}

// ---------------------------------------------------------------------------
// ES and RVaR

/// `ES_p(F) + ES_p(G)`, the worst case with or without the order constraint.
pub fn worst_es_constrained(f: &Dist, g: &Dist, p: f64) -> Result<f64> {
    Ok(f.es(p)? + g.es(p)?)
}

/// An infinite upper tail in one marginal that the other cannot offset.
fn sum_tail_diverges(f: &Dist, g: &Dist, p: f64) -> Result<bool> {
    let f_inf = !f.es(p)?.is_finite();
    let g_inf = !g.es(p)?.is_finite();
    Ok((f_inf && g.support_lo().is_finite()) || (g_inf && f.support_lo().is_finite()))
}

/// Best-case `ES_p` under `X <= Y`: ES of the DL-coupled sum.
pub fn best_es_constrained(pair: &OrderedPair, p: f64, opts: &BoundOptions) -> Result<f64> {
    check_open_level(p, "ES")?;
    if sum_tail_diverges(pair.f(), pair.g(), p)? || !pair.f().es(p)?.is_finite() {
        return Ok(f64::INFINITY);
    }
    mean_plan(pair, 0.0, opts)?.upper_mean(1.0 - p)
}

/// Best-case `ES_p` without constraint: ES of the countermonotone sum.
pub fn best_es_unconstrained(f: &Dist, g: &Dist, p: f64, opts: &BoundOptions) -> Result<f64> {
    check_open_level(p, "ES")?;
    if sum_tail_diverges(f, g, p)? {
        return Ok(f64::INFINITY);
    }
    let s = countermonotone_cell_sums(f, g, opts);
    Ok(sorted_level_mean(&s, p, 1.0))
}

fn check_rvar_levels(p: f64, q: f64) -> Result<()> {
    if 0.0 <= p && p < q && q < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("RVaR levels need 0 <= p < q < 1, got ({p}, {q})")))
    }
}

/// Worst-case `RVaR_{p,q}` under `X <= Y`: the mean of the lowest fraction
/// `a = (q-p)/(1-p)` of DL-coupled upper-tail sums.
pub fn worst_rvar_constrained(pair: &OrderedPair, p: f64, q: f64, opts: &BoundOptions) -> Result<f64> {
    check_rvar_levels(p, q)?;
    let a = (q - p) / (1.0 - p);
    mean_plan(pair, p, opts)?.lower_mean(a)
}

/// Best-case `RVaR_{p,q}` under `X <= Y`: `ES_{p/q}` of the DL-coupled sum
/// of the lower tails at `q`.
pub fn best_rvar_constrained(pair: &OrderedPair, p: f64, q: f64, opts: &BoundOptions) -> Result<f64> {
    check_rvar_levels(p, q)?;
    if p == 0.0 {
        return Err(Error::domain("best-case RVaR needs p > 0"));
    }
    let lower = pair.lower_tails(q)?;
    mean_plan(&lower, 0.0, opts)?.upper_mean(1.0 - p / q)
}

/// Unconstrained worst `RVaR_{p,q}`: countermonotone upper tails.
pub fn worst_rvar_unconstrained(f: &Dist, g: &Dist, p: f64, q: f64, opts: &BoundOptions) -> Result<f64> {
    check_rvar_levels(p, q)?;
    let s = countermonotone_cell_sums(&f.upper_tail(p)?, &g.upper_tail(p)?, opts);
    Ok(sorted_level_mean(&s, 0.0, (q - p) / (1.0 - p)))
}

/// Unconstrained best `RVaR_{p,q}`: countermonotone lower tails at `q`.
pub fn best_rvar_unconstrained(f: &Dist, g: &Dist, p: f64, q: f64, opts: &BoundOptions) -> Result<f64> {
    check_rvar_levels(p, q)?;
    if p == 0.0 {
        return Err(Error::domain("best-case RVaR needs p > 0"));
    }
    let s = countermonotone_cell_sums(&f.lower_tail(q)?, &g.lower_tail(q)?, opts);
    Ok(sorted_level_mean(&s, p / q, 1.0))
}

// ---------------------------------------------------------------------------
// Probability bounds

const PROB_EDGE: f64 = 1e-9;
/// Bracket width at which the level inversion stops.
const PROB_TOL: f64 = 1e-8;

/// `sup{p in (0,1) : holds(p)}` for a predicate true on an initial segment.
fn invert_levels<P: FnMut(f64) -> Result<bool>>(mut holds: P) -> Result<f64> {
    if !holds(PROB_EDGE)? {
        return Ok(0.0);
    }
    if holds(1.0 - PROB_EDGE)? {
        return Ok(1.0);
    }
    let mut err = None;
    let p = bisect_boundary_to(
        |p| match holds(p) {
            Ok(v) => !v,
            Err(e) => {
                err.get_or_insert(e);
                true
            }
        },
        PROB_EDGE,
        1.0 - PROB_EDGE,
        PROB_TOL,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(p),
    }
}

/// `M^o(t) = sup P(X + Y <= t)` under `X <= Y`, by inverting the best VaR.
pub fn prob_upper(pair: &OrderedPair, t: f64, opts: &BoundOptions) -> Result<f64> {
    invert_levels(|p| Ok(best_var_constrained(pair, p, opts)? <= t))
}

/// `m^o(t) = inf P(X + Y < t)` under `X <= Y`, by inverting the worst VaR.
pub fn prob_lower(pair: &OrderedPair, t: f64, opts: &BoundOptions) -> Result<f64> {
    invert_levels(|p| Ok(worst_var_constrained(pair, p, opts)? < t))
}

/// `M(t)`: unconstrained upper probability bound.
pub fn prob_upper_unconstrained(f: &Dist, g: &Dist, t: f64, opts: &BoundOptions) -> Result<f64> {
    invert_levels(|p| Ok(best_var_unconstrained(f, g, p, opts)? <= t))
}

/// `m(t)`: unconstrained lower probability bound.
pub fn prob_lower_unconstrained(f: &Dist, g: &Dist, t: f64, opts: &BoundOptions) -> Result<f64> {
    invert_levels(|p| Ok(worst_var_unconstrained(f, g, p, opts)? < t))
}

// ---------------------------------------------------------------------------
// Reports

fn attaining(cw: Attainer, cb: Attainer, uw: Attainer, ub: Attainer) -> Attaining {
    Attaining { constrained_worst: cw, constrained_best: cb, unconstrained_worst: uw, unconstrained_best: ub }
}

fn need(v: Option<f64>, what: &str, measure: Measure) -> Result<f64> {
    v.ok_or_else(|| Error::domain(format!("measure {measure} needs level {what}")))
}

/// Evaluates all four bounds of `measure` at `levels`.
pub fn bound_report(pair: &OrderedPair, measure: Measure, levels: Levels, opts: &BoundOptions) -> Result<BoundReport> {
    use Attainer::*;
    opts.validate()?;
    let (f, g) = (pair.f(), pair.g());
    let (cw, cb, uw, ub, att) = match measure {
        Measure::EssInf => {
            let lo = comonotone_ess_inf(f, g);
            let cw = worst_ess_inf_constrained(pair, opts)?;
            let uw = worst_ess_inf_unconstrained(f, g, opts);
            (cw, lo, uw, lo, attaining(DlUpperTail, Comonotone, CountermonotoneTail, Comonotone))
        }
        Measure::EssSup => {
            let hi = comonotone_ess_sup(f, g);
            let cb = best_ess_sup_constrained(pair, opts)?;
            let ub = best_ess_sup_unconstrained(f, g, opts);
            (hi, cb, hi, ub, attaining(Comonotone, DlLowerTail, Comonotone, CountermonotoneTail))
        }
        Measure::Var => {
            let p = need(levels.p, "p", measure)?;
            (
                worst_var_constrained(pair, p, opts)?,
                best_var_constrained(pair, p, opts)?,
                worst_var_unconstrained(f, g, p, opts)?,
                best_var_unconstrained(f, g, p, opts)?,
                attaining(DlUpperTail, DlLowerTail, CountermonotoneTail, CountermonotoneTail),
            )
        }
        Measure::Es => {
            let p = need(levels.p, "p", measure)?;
            let w = worst_es_constrained(f, g, p)?;
            (
                w,
                best_es_constrained(pair, p, opts)?,
                w,
                best_es_unconstrained(f, g, p, opts)?,
                attaining(Comonotone, DlLowerTail, Comonotone, CountermonotoneTail),
            )
        }
        Measure::Rvar => {
            let p = need(levels.p, "p", measure)?;
            let q = need(levels.q, "q", measure)?;
            (
                worst_rvar_constrained(pair, p, q, opts)?,
                best_rvar_constrained(pair, p, q, opts)?,
                worst_rvar_unconstrained(f, g, p, q, opts)?,
                best_rvar_unconstrained(f, g, p, q, opts)?,
                attaining(DlUpperTail, DlLowerTail, CountermonotoneTail, CountermonotoneTail),
            )
        }
        Measure::Prob => {
            let t = need(levels.t, "t", measure)?;
            (
                prob_lower(pair, t, opts)?,
                prob_upper(pair, t, opts)?,
                prob_lower_unconstrained(f, g, t, opts)?,
                prob_upper_unconstrained(f, g, t, opts)?,
                attaining(DlUpperTail, DlLowerTail, CountermonotoneTail, CountermonotoneTail),
            )
        }
    };
    let du = match measure {
        Measure::Var | Measure::Rvar => du_reduction(ub, uw, cb, cw).ok(),
        _ => None,
    };
    Ok(BoundReport {
        measure,
        p: levels.p,
        q: levels.q,
        t: levels.t,
        constrained_worst: cw,
        constrained_best: cb,
        unconstrained_worst: uw,
        unconstrained_best: ub,
        r_l: du.map(|d| d.r_l),
        r_u: du.map(|d| d.r_u),
        r: du.map(|d| d.r),
        attaining: att,
        grid_n: opts.grid_n,
        truncation_m: opts.truncation_m,
    })
}
