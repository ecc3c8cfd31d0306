//! Seeded samplers for comonotone, countermonotone and DL pairs.

use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::plan::{dl_plan_truncated, DlPlan};
use super::OrderedPair;
use crate::dist::{Dist, DEFAULT_GRID_N, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    Comonotone,
    Countermonotone,
    Dl,
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingKind::Comonotone => "comonotone",
            CouplingKind::Countermonotone => "countermonotone",
            CouplingKind::Dl => "dl",
        })
    }
}

impl FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "comonotone" | "comonotonic" => Ok(CouplingKind::Comonotone),
            "countermonotone" | "countermonotonic" => Ok(CouplingKind::Countermonotone),
            "dl" => Ok(CouplingKind::Dl),
            other => Err(Error::domain(format!("unknown coupling kind '{other}'"))),
        }
    }
}

/// Paired draws under one coupling, with the seed that generated them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub kind: CouplingKind,
    pub pairs: Vec<(f64, f64)>,
    pub seed: u64,
    pub size: usize,
}

impl SampleBatch {
    pub fn sums(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|(x, y)| x + y)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SampleOptions {
    /// Grid size of the DL plan that DL draws are resampled from.
    pub plan_n: usize,
    pub truncation_m: f64,
    /// Spread DL draws uniformly within their quantile cells.
    pub jitter: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { plan_n: DEFAULT_GRID_N, truncation_m: DEFAULT_TRUNCATION, jitter: false }
    }
}

/// Draws `size` pairs with marginals `F` and `G` under `kind`.
pub fn sample_coupling(
    f: &Dist,
    g: &Dist,
    kind: CouplingKind,
    size: usize,
    seed: u64,
    opts: &SampleOptions,
) -> Result<SampleBatch> {
    if size == 0 {
        return Err(Error::domain("sample size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = match kind {
        CouplingKind::Comonotone => (0..size)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                (f.ql(u), g.ql(u))
            })
            .collect(),
        CouplingKind::Countermonotone => (0..size)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                (f.ql(u), g.ql(1.0 - u))
            })
            .collect(),
        CouplingKind::Dl => {
            OrderedPair::new(f.clone(), g.clone())?;
            let plan = dl_plan_truncated(f, g, opts.plan_n, 0.0, opts.truncation_m)?;
            let marginals = if opts.jitter { Some((f, g)) } else { None };
            draw_from_plan(&plan, marginals, size, &mut rng)
        }
    };
    Ok(SampleBatch { kind, pairs, seed, size })
}

/// Resamples the pairs of an existing plan (no jitter).
pub fn sample_plan(plan: &DlPlan, size: usize, seed: u64) -> Result<SampleBatch> {
    if size == 0 {
        return Err(Error::domain("sample size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = draw_from_plan(plan, None, size, &mut rng);
    Ok(SampleBatch { kind: CouplingKind::Dl, pairs, seed, size })
}

/// With marginals given, a draw from pair `k` is moved to the same relative
/// position `v` inside the source and target cells, keeping `x <= y`.
fn draw_from_plan(
    plan: &DlPlan,
    marginals: Option<(&Dist, &Dist)>,
    size: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, f64)> {
    let n = plan.n();
    let pairs = plan.pairs();
    (0..size)
        .map(|_| {
            let q = pairs[rng.random_range(0..n)];
            match marginals {
                None => (q.x, q.y),
                Some((f, g)) => {
                    let v: f64 = rng.sample(Open01);
                    let x = f.ql((q.x_index as f64 + v) / n as f64);
                    let y = g.ql((q.y_index as f64 + v) / n as f64);
                    (x, y.max(x))
                }
            }
        })
        .collect()
}
