//! Discrete DL plans on equally weighted quantile grids.

use serde::Serialize;

use crate::dist::{Dist, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairTag {
    /// `x == y`: mass shared by both marginals.
    Common,
    /// `x < y`: mass moved by the transport map.
    Singular,
}

impl PairTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PairTag::Common => "common",
            PairTag::Singular => "singular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanPair {
    pub x: f64,
    pub y: f64,
    pub tag: PairTag,
    /// Position of `x` in the ascending source grid.
    pub x_index: usize,
    /// Position of `y` in the ascending target grid.
    pub y_index: usize,
}

/// `n` equally weighted pairs coupling the quantile grids of two tails.
#[derive(Debug, Clone, PartialEq)]
pub struct DlPlan {
    n: usize,
    level: f64,
    /// Pairs in processing order (decreasing `x`).
    pairs: Vec<PlanPair>,
    sums: Vec<f64>,
}

/// Right quantiles at levels `j/n`, clamped to `[lo, hi]`: cell
/// `[j/n, (j+1)/n)` is represented by its value just above the left end, so
/// `n` equal atoms are reproduced exactly.
fn grid_values(d: &Dist, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|j| d.qr((j as f64 / n as f64).clamp(lo, hi))).collect()
}

/// Level limits of a tail window after truncating infinite supports of the
/// base law at levels `1 - m` and `m`.
fn level_limits(base: &Dist, tail: &Dist, p: f64, m: f64) -> (f64, f64) {
    let lo = if tail.support_lo().is_finite() || 1.0 - m <= p { 0.0 } else { (1.0 - m - p) / (1.0 - p) };
    let hi = if base.support_hi().is_finite() || m <= p { 1.0 } else { (m - p) / (1.0 - p) };
    (lo, hi)
}

/// Conditional means `n int_{j/n}^{(j+1)/n} Q(u) du` of the `n` level cells,
/// falling back to the clamped right quantile where a cell mean diverges.
pub(crate) fn cell_means(d: &Dist, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let nf = n as f64;
    (0..n)
        .map(|j| {
            let m = d.level_integral(j as f64 / nf, (j + 1) as f64 / nf).map(|v| v * nf).unwrap_or(f64::NAN);
            if m.is_finite() {
                m
            } else {
                d.qr((j as f64 / nf).clamp(lo, hi))
            }
        })
        .collect()
}

/// Discrete DL plan between `F^[p,1]` and `G^[p,1]` with default truncation.
pub fn dl_plan_discrete(f: &Dist, g: &Dist, n: usize, p: f64) -> Result<DlPlan> {
    dl_plan_truncated(f, g, n, p, DEFAULT_TRUNCATION)
}

/// Discrete DL plan at levels `p + (1-p) j / n`, `j = 0..n`. Levels of laws
/// with infinite support are clamped to `[1 - m, m]`.
///
/// Sources are processed from the largest down; each takes the smallest
/// unused target at or above it, ties going to the lowest index.
pub fn dl_plan_truncated(f: &Dist, g: &Dist, n: usize, p: f64, m: f64) -> Result<DlPlan> {
    build(f, g, n, p, m, grid_values)
}

/// Same greedy coupling, but each level cell is represented by its
/// conditional mean rather than its left quantile. The discretized marginals
/// keep their means exactly, which suits mean-type functionals (ES, RVaR).
pub fn dl_plan_cell_means(f: &Dist, g: &Dist, n: usize, p: f64, m: f64) -> Result<DlPlan> {
    build(f, g, n, p, m, cell_means)
}

fn build(
    f: &Dist,
    g: &Dist,
    n: usize,
    p: f64,
    m: f64,
    values: fn(&Dist, usize, f64, f64) -> Vec<f64>,
) -> Result<DlPlan> {
    if n == 0 {
        return Err(Error::domain("plan needs n >= 1"));
    }
    if !(m > 0.5 && m < 1.0) {
        return Err(Error::domain(format!("truncation level {m} outside (0.5, 1)")));
    }
    let ft = f.upper_tail(p)?;
    let gt = g.upper_tail(p)?;
    let (flo, fhi) = level_limits(f, &ft, p, m);
    let (glo, ghi) = level_limits(g, &gt, p, m);
    let xs = values(&ft, n, flo, fhi);
    let ys = values(&gt, n, glo, ghi);

    // next[i]: smallest unused target index >= i (n when none).
    let mut next: Vec<usize> = (0..=n).collect();
    fn find(next: &mut [usize], i: usize) -> usize {
        let mut root = i;
        while next[root] != root {
            root = next[root];
        }
        let mut cur = i;
        while next[cur] != root {
            let up = next[cur];
            next[cur] = root;
            cur = up;
        }
        root
    }

    let mut pairs = Vec::with_capacity(n);
    for (step, xi) in (0..n).rev().enumerate() {
        let x = xs[xi];
        let first = ys.partition_point(|&y| y < x);
        let yi = find(&mut next, first);
        if yi == n {
            return Err(Error::Infeasible { step: step + 1, x });
        }
        next[yi] = yi + 1;
        let y = ys[yi];
        let tag = if x == y { PairTag::Common } else { PairTag::Singular };
        pairs.push(PlanPair { x, y, tag, x_index: xi, y_index: yi });
    }
    let mut sums: Vec<f64> = pairs.iter().map(|q| q.x + q.y).collect();
    sums.sort_by(f64::total_cmp);
    Ok(DlPlan { n, level: p, pairs, sums })
}

impl DlPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Tail level the plan was built at.
    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn pairs(&self) -> &[PlanPair] {
        &self.pairs
    }

    /// Pair sums in ascending order.
    pub fn sorted_sums(&self) -> &[f64] {
        &self.sums
    }

    /// `(1/n) #{k : x_k + y_k <= t}`.
    pub fn dl_sum_cdf(&self, t: f64) -> f64 {
        self.sums.partition_point(|&s| s <= t) as f64 / self.n as f64
    }

    pub fn min_sum(&self) -> f64 {
        self.sums[0]
    }

    pub fn max_sum(&self) -> f64 {
        self.sums[self.n - 1]
    }

    /// Left quantile of the pair sums at level `u`.
    pub fn sum_quantile(&self, u: f64) -> f64 {
        let k = ((u * self.n as f64 - 1e-9).ceil() as usize).clamp(1, self.n);
        self.sums[k - 1]
    }

    pub fn mean_sum(&self) -> f64 {
        self.sums.iter().sum::<f64>() / self.n as f64
    }

    /// `int_a^b Q_S(u) du` for the step quantile function of the sums.
    fn sum_integral(&self, a: f64, b: f64) -> f64 {
        let n = self.n as f64;
        let first = ((a * n).floor() as usize).min(self.n);
        let last = ((b * n).ceil() as usize).min(self.n);
        let mut acc = 0.0;
        for k in first..last {
            let lo = (k as f64 / n).max(a);
            let hi = ((k + 1) as f64 / n).min(b);
            if hi > lo {
                acc += self.sums[k] * (hi - lo);
            }
        }
        acc
    }

    /// Average of the sum quantiles over levels `[0, a]`.
    pub fn lower_mean(&self, a: f64) -> Result<f64> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::domain(format!("lower fraction {a} outside (0, 1]")));
        }
        Ok(self.sum_integral(0.0, a) / a)
    }

    /// Average of the sum quantiles over levels `[1 - b, 1]`.
    pub fn upper_mean(&self, b: f64) -> Result<f64> {
        if !(b > 0.0 && b <= 1.0) {
            return Err(Error::domain(format!("upper fraction {b} outside (0, 1]")));
        }
        Ok(self.sum_integral(1.0 - b, 1.0) / b)
    }

    /// Empirical law of the pair sums.
    pub fn sum_dist(&self) -> Dist {
        Dist::empirical(&self.sums, None).expect("plan sums are finite")
    }
}
