//! Independent checks: the two-column rearrangement, stop-loss curves, grid
//! convergence and conditional-tail order checks.

use crate::coupling::SampleBatch;
use crate::dist::{check_ss, default_tolerance, Dist, OrderCheckReport};
use crate::error::{Error, Result};

/// Unconstrained worst `VaR_p` by rearrangement of two tail columns.
///
/// With two columns the rearrangement fixed point is the anti-monotone
/// order, so a single sort suffices: the result is the smallest row sum.
pub fn ra_unconstrained_var(f: &Dist, g: &Dist, p: f64, n: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("level {p} outside (0, 1)")));
    }
    if n < 2 {
        return Err(Error::domain("rearrangement needs n >= 2"));
    }
    let level = |j: usize| p + (1.0 - p) * (j as f64 + 0.5) / n as f64;
    let mut a: Vec<f64> = (0..n).map(|j| f.ql(level(j))).collect();
    let mut b: Vec<f64> = (0..n).map(|j| g.ql(level(j))).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(|x, y| y.total_cmp(x));
    Ok(a.iter().zip(&b).map(|(x, y)| x + y).fold(f64::INFINITY, f64::min))
}

/// Empirical stop-loss transform `d -> E[(S - d)_+]` of a batch of sums.
#[derive(Debug, Clone, PartialEq)]
pub struct StopLossCurve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub mean: f64,
    /// Standard error of `mean`.
    pub mean_stderr: f64,
}

pub fn stop_loss_curve(batch: &SampleBatch, thresholds: &[f64]) -> Result<StopLossCurve> {
    if batch.pairs.is_empty() {
        return Err(Error::domain("stop-loss curve needs a nonempty batch"));
    }
    let sums: Vec<f64> = batch.sums().collect();
    let n = sums.len() as f64;
    let moments = |vals: &mut dyn Iterator<Item = f64>| {
        let (mut s1, mut s2) = (0.0, 0.0);
        for v in vals {
            s1 += v;
            s2 += v * v;
        }
        let m = s1 / n;
        let var = if n > 1.0 { ((s2 - n * m * m) / (n - 1.0)).max(0.0) } else { 0.0 };
        (m, (var / n).sqrt())
    };
    let (mean, mean_stderr) = moments(&mut sums.iter().copied());
    let mut values = Vec::with_capacity(thresholds.len());
    let mut stderr = Vec::with_capacity(thresholds.len());
    for &d in thresholds {
        let (m, se) = moments(&mut sums.iter().map(|s| (s - d).max(0.0)));
        values.push(m);
        stderr.push(se);
    }
    Ok(StopLossCurve { thresholds: thresholds.to_vec(), values, stderr, mean, mean_stderr })
}

/// `sup_levels |f(n, l) - f(2n, l)|`.
pub fn grid_convergence<F: FnMut(usize, f64) -> Result<f64>>(mut f: F, n: usize, levels: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &l in levels {
        let d = (f(n, l)? - f(2 * n, l)?).abs();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Checks `H_{X|A} <=_ss F^[p,1]` for the event `A` selected by `mask`.
///
/// The mask must select exactly `ceil((1 - p) * size)` samples.
pub fn conditional_tail_ss_check(samples: &[f64], mask: &[bool], p: f64) -> Result<OrderCheckReport> {
    if samples.len() != mask.len() {
        return Err(Error::domain(format!("{} samples but {} mask entries", samples.len(), mask.len())));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("level {p} outside (0, 1)")));
    }
    let expected = ((1.0 - p) * samples.len() as f64 - 1e-9).ceil() as usize;
    let chosen: Vec<f64> = samples.iter().zip(mask).filter(|(_, &m)| m).map(|(&v, _)| v).collect();
    if chosen.len() != expected {
        return Err(Error::domain(format!("mask selects {} samples, expected {expected}", chosen.len())));
    }
    let conditional = Dist::empirical(&chosen, None)?;
    let tail = Dist::empirical(samples, None)?.upper_tail(p)?;
    let grid = chosen.len().max(2);
    let tol = default_tolerance(&conditional, &tail, grid);
    Ok(check_ss(&conditional, &tail, grid, tol))
}
