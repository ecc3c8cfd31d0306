//! The directional lower (DL) coupling of an ordered pair `F <=_st G`.
//!
//! With `H = F - G >= 0`, the coupling keeps the common part of the two laws
//! on the diagonal and moves the rest of `F` upward along the transport map
//! `T(x) = inf{z >= x : H(z) < H(x)}`. Its joint CDF is
//!
//! ```text
//! D(x, y) = G(y)                              if y <= x
//!         = F(x) - inf_{z in [x, y]} H(z)     if y >  x
//! ```

pub(crate) mod plan;
mod sample;

use std::sync::OnceLock;

use crate::dist::{check_st, default_tolerance, Dist, OrderCheckReport};
use crate::error::{Error, Result};
use crate::numeric::{bisect_boundary, golden_min, MinTree};

pub use plan::{dl_plan_cell_means, dl_plan_discrete, dl_plan_truncated, DlPlan, PairTag, PlanPair};
pub use sample::{sample_coupling, sample_plan, CouplingKind, SampleBatch, SampleOptions};

/// Levels per marginal in the order pre-test and the transport scan grid.
pub const ORDER_GRID: usize = 4096;

/// A strict decrease of `H` must exceed this margin to count.
const STRICT_MARGIN: f64 = 1e-12;

/// A pair of marginals known to satisfy `F <=_st G`.
#[derive(Debug, Clone)]
pub struct OrderedPair {
    f: Dist,
    g: Dist,
    order: OrderCheckReport,
    scan: OnceLock<ScanGrid>,
    reflected: OnceLock<Box<OrderedPair>>,
}

#[derive(Debug, Clone)]
struct ScanGrid {
    z: Vec<f64>,
    tree: MinTree,
}

impl OrderedPair {
    /// Runs the stochastic order test with the default tolerance.
    pub fn new(f: Dist, g: Dist) -> Result<Self> {
        let tol = default_tolerance(&f, &g, ORDER_GRID);
        Self::with_tolerance(f, g, tol)
    }

    pub fn with_tolerance(f: Dist, g: Dist, tol: f64) -> Result<Self> {
        let order = check_st(&f, &g, ORDER_GRID, tol);
        if !order.holds {
            return Err(Error::OrderViolation(order));
        }
        Ok(Self::from_parts(f, g, order))
    }

    /// Pairs derived from an ordered pair (tails, reflections) are ordered too.
    pub(crate) fn derived(f: Dist, g: Dist) -> Self {
        let order =
            OrderCheckReport { holds: true, max_violation: 0.0, witness: f64::NAN, grid_size: 0, tolerance: 0.0 };
        Self::from_parts(f, g, order)
    }

    fn from_parts(f: Dist, g: Dist, order: OrderCheckReport) -> Self {
        OrderedPair { f, g, order, scan: OnceLock::new(), reflected: OnceLock::new() }
    }

    pub fn f(&self) -> &Dist {
        &self.f
    }

    pub fn g(&self) -> &Dist {
        &self.g
    }

    pub fn order_report(&self) -> &OrderCheckReport {
        &self.order
    }

    /// Upper tails `(F^[p,1], G^[p,1])`.
    pub fn upper_tails(&self, p: f64) -> Result<OrderedPair> {
        Ok(Self::derived(self.f.upper_tail(p)?, self.g.upper_tail(p)?))
    }

    /// Lower tails `(F^[0,p], G^[0,p])`.
    pub fn lower_tails(&self, p: f64) -> Result<OrderedPair> {
        Ok(Self::derived(self.f.lower_tail(p)?, self.g.lower_tail(p)?))
    }

    /// The pair `(law of -Y, law of -X)`.
    pub fn reflected(&self) -> &OrderedPair {
        self.reflected.get_or_init(|| Box::new(Self::derived(self.g.negate(), self.f.negate())))
    }

    fn h(&self, z: f64) -> f64 {
        self.f.cdf(z) - self.g.cdf(z)
    }

    fn scan(&self) -> &ScanGrid {
        self.scan.get_or_init(|| {
            let n = ORDER_GRID;
            let mut levels: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
            for k in 1..=15 {
                let e = 10f64.powi(-k);
                levels.push(e);
                levels.push(1.0 - e);
            }
            let mut z = Vec::with_capacity(2 * levels.len());
            for d in [&self.f, &self.g] {
                z.extend(levels.iter().map(|&u| d.ql(u)));
                z.extend(d.knots());
                z.push(d.support_lo());
                z.push(d.support_hi());
            }
            z.retain(|v| v.is_finite());
            z.sort_by(f64::total_cmp);
            z.dedup();
            let h: Vec<f64> = z.iter().map(|&t| self.h(t)).collect();
            let tree = MinTree::new(&h);
            ScanGrid { z, tree }
        })
    }

    /// `T(x) = inf{z >= x : H(z) < H(x)}`; `+inf` when no such `z` exists.
    pub fn transport_upper(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x == f64::INFINITY {
            return f64::INFINITY;
        }
        let h0 = self.h(x);
        let threshold = h0 - STRICT_MARGIN;
        let below = |z: f64| self.h(z) < threshold;
        let scan = self.scan();
        let start = scan.z.partition_point(|&z| z < x);
        match scan.tree.first_below(start, threshold) {
            None => f64::INFINITY,
            Some(i) => {
                let lo = if i == start { x } else { scan.z[i - 1].max(x) };
                let hi = scan.z[i];
                if below(lo) {
                    lo
                } else {
                    bisect_boundary(below, lo, hi)
                }
            }
        }
    }

    /// `T^(x) = sup{t <= x : H(t) < H(x)}`, via `-T_{-Y,-X}(-x)`.
    pub fn transport_lower(&self, x: f64) -> f64 {
        -self.reflected().transport_upper(-x)
    }

    /// Joint CDF `D(x, y) = P(X <= x, Y <= y)` of the DL coupling.
    pub fn dl_cdf(&self, x: f64, y: f64) -> f64 {
        if y <= x {
            return self.g.cdf(y);
        }
        let fx = self.f.cdf(x);
        if fx <= 0.0 {
            return 0.0;
        }
        let inf_h = self.inf_h(x, y);
        (fx - inf_h).clamp(0.0, 1.0)
    }

    /// `inf_{z in [x, y]} H(z)` by range minimum plus golden refinement.
    fn inf_h(&self, x: f64, y: f64) -> f64 {
        let mut best = self.h(x).min(self.h(y));
        let scan = self.scan();
        let l = scan.z.partition_point(|&z| z < x);
        let r = scan.z.partition_point(|&z| z <= y);
        let (lo, hi) = match scan.tree.range_min(l, r) {
            Some((v, i)) => {
                best = best.min(v);
                let lo = if i > l { scan.z[i - 1] } else { x };
                let hi = if i + 1 < r { scan.z[i + 1] } else { y };
                (lo, hi)
            }
            None => (x, y),
        };
        if lo.is_finite() && hi.is_finite() && hi > lo {
            let (_, v) = golden_min(|z| self.h(z), lo, hi, 100);
            best = best.min(v);
        }
        best
    }
}

/// `T^{F,G}(x)` after checking `F <=_st G`.
pub fn transport_upper(f: &Dist, g: &Dist, x: f64) -> Result<f64> {
    Ok(OrderedPair::new(f.clone(), g.clone())?.transport_upper(x))
}

/// `T^^{F,G}(x)` after checking `F <=_st G`.
pub fn transport_lower(f: &Dist, g: &Dist, x: f64) -> Result<f64> {
    Ok(OrderedPair::new(f.clone(), g.clone())?.transport_lower(x))
}

/// `D_*^{F,G}(x, y)` after checking `F <=_st G`.
pub fn dl_cdf(f: &Dist, g: &Dist, x: f64, y: f64) -> Result<f64> {
    Ok(OrderedPair::new(f.clone(), g.clone())?.dl_cdf(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pareto_pair() -> OrderedPair {
        OrderedPair::new(Dist::pareto(1.0, 1.0).unwrap(), Dist::pareto(2.0, 1.0).unwrap()).unwrap()
    }

    fn uniform_pair(b: f64) -> OrderedPair {
        OrderedPair::new(Dist::uniform(0.0, 1.0).unwrap(), Dist::uniform(0.0, b).unwrap()).unwrap()
    }

    /// Direct scan of `{z >= x : H(z) < H(x)}` on a fine grid.
    fn grid_inf(pair: &OrderedPair, x: f64, hi: f64, steps: usize) -> f64 {
        let h0 = pair.h(x);
        (0..=steps)
            .map(|i| x + (hi - x) * i as f64 / steps as f64)
            .find(|&z| pair.h(z) < h0 - 1e-12)
            .unwrap_or(f64::INFINITY)
    }

    fn grid_sup(pair: &OrderedPair, x: f64, lo: f64, steps: usize) -> f64 {
        let h0 = pair.h(x);
        (0..=steps)
            .map(|i| x - (x - lo) * i as f64 / steps as f64)
            .find(|&t| pair.h(t) < h0 - 1e-12)
            .unwrap_or(f64::NEG_INFINITY)
    }

    #[test]
    fn transport_examples() {
        let p = pareto_pair();
        assert_abs_diff_eq!(p.transport_upper(1.5), 3.0, epsilon = 1e-9);
        assert_eq!(p.transport_upper(1.0), f64::INFINITY);
        for x in [1.1, 1.25, 1.9] {
            assert_abs_diff_eq!(p.transport_upper(x), x / (x - 1.0), epsilon = 1e-9 * x / (x - 1.0));
        }
        assert_abs_diff_eq!(uniform_pair(1.5).transport_upper(0.5), 1.25, epsilon = 1e-9);
    }

    #[test]
    fn transport_rejects_unordered_pair() {
        let r = transport_upper(&Dist::uniform(0.0, 2.0).unwrap(), &Dist::uniform(0.0, 1.0).unwrap(), 0.5);
        assert!(matches!(r, Err(Error::OrderViolation(_))));
    }

    #[test]
    fn transport_lower_matches_grid_sup() {
        let f = Dist::uniform(0.0, 1.0).unwrap();
        assert_eq!(transport_lower(&f, &f, 0.3).unwrap(), f64::NEG_INFINITY);
        let p = pareto_pair();
        for x in [2.5, 3.0, 5.0, 10.0] {
            let oracle = grid_sup(&p, x, 1.0, 200_000);
            assert_abs_diff_eq!(p.transport_lower(x), oracle, epsilon = 1e-4 * x);
        }
        let u = uniform_pair(1.5);
        for x in [1.05, 1.2, 1.4] {
            let oracle = grid_sup(&u, x, 0.0, 200_000);
            assert_abs_diff_eq!(u.transport_lower(x), oracle, epsilon = 1e-5);
        }
        for x in [1.2, 1.7, 4.0] {
            assert_abs_diff_eq!(p.transport_upper(x), grid_inf(&p, x, 40.0, 400_000), epsilon = 1e-4);
        }
    }

    #[test]
    fn dl_cdf_examples() {
        let p = pareto_pair();
        assert_abs_diff_eq!(p.dl_cdf(2.0, 4.0), 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(p.dl_cdf(5.0, 3.0), p.g().cdf(3.0), epsilon = 0.0);
        let f = Dist::normal(0.0, 1.0).unwrap();
        let same = OrderedPair::new(f.clone(), f.clone()).unwrap();
        for (x, y) in [(-1.0, 0.5), (0.3, 2.0), (1.0, -1.0)] {
            assert_abs_diff_eq!(same.dl_cdf(x, y), f.cdf(f64::min(x, y)), epsilon = 1e-12);
        }
    }
}
