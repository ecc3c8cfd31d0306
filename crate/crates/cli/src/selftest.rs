//! Analytic oracle checks on the Pareto and uniform examples.

use dlrisk_core::bounds::{
    best_var_constrained, comonotone_ess_inf, prob_lower, prob_upper, worst_ess_inf_constrained,
    worst_ess_inf_unconstrained, worst_rvar_constrained, worst_var_constrained,
};
use dlrisk_core::oracle::ra_unconstrained_var;
use dlrisk_core::{BoundOptions, Dist, OrderedPair};

use crate::CliError;

struct Row {
    name: &'static str,
    observed: f64,
    expected: f64,
    tol: f64,
}

fn rows() -> dlrisk_core::Result<Vec<Row>> {
    let o = BoundOptions::default();
    let pair = OrderedPair::new(Dist::pareto(1.0, 1.0)?, Dist::pareto(2.0, 1.0)?)?;
    let (f, g) = (pair.f(), pair.g());
    let uni = OrderedPair::new(Dist::uniform(0.0, 1.0)?, Dist::uniform(0.0, 1.5)?)?;
    let r = |name, observed, expected, tol| Row { name, observed, expected, tol };
    Ok(vec![
        r("worst ess-inf under X<=Y (= 4)", worst_ess_inf_constrained(&pair, &o)?, 4.0, 1e-9),
        r("worst ess-inf, unconstrained (= 3+2sqrt2)", worst_ess_inf_unconstrained(f, g, &o), 3.0 + 8f64.sqrt(), 1e-4),
        r("comonotone ess-inf (= 3)", comonotone_ess_inf(f, g), 3.0, 0.0),
        r("worst VaR_0.9 (= 4/(1-p))", worst_var_constrained(&pair, 0.9, &o)?, 40.0, 4e-2),
        r("best VaR_0.9 (= 1+2/(1-p))", best_var_constrained(&pair, 0.9, &o)?, 21.0, 2.1e-2),
        r("M^o(8) (= 1-2/(t-1))", prob_upper(&pair, 8.0, &o)?, 5.0 / 7.0, 1e-4),
        r("m^o(8) (= 1-4/t)", prob_lower(&pair, 8.0, &o)?, 0.5, 1e-4),
        r(
            "RA unconstrained worst VaR_0.5 (= 6+4sqrt2)",
            ra_unconstrained_var(f, g, 0.5, 1_000_000)?,
            6.0 + 32f64.sqrt(),
            1e-3,
        ),
        r("uniform worst RVaR, a=0.5 (= 0.75)", worst_rvar_constrained(&uni, 0.0, 0.5, &o)?, 0.75, 2e-3),
        r("uniform worst RVaR, a=0.9 (= 1.17222)", worst_rvar_constrained(&uni, 0.0, 0.9, &o)?, 1.17222, 2e-3),
    ])
}

pub fn run(tol_scale: f64) -> Result<(), CliError> {
    let rows = rows()?;
    println!("{:<46} {:>14} {:>14} {:>10} {:>10}  status", "check", "observed", "expected", "error", "tolerance");
    let mut failed = 0;
    for r in &rows {
        let err = (r.observed - r.expected).abs();
        let tol = r.tol * tol_scale;
        let ok = err <= tol;
        failed += !ok as usize;
        println!(
            "{:<46} {:>14.8} {:>14.8} {:>10.2e} {:>10.2e}  {}",
            r.name,
            r.observed,
            r.expected,
            err,
            tol,
            if ok { "pass" } else { "FAIL" }
        );
    }
    if failed == 0 {
        println!("all {} checks passed", rows.len());
        Ok(())
    } else {
        Err(CliError::Selftest(failed))
    }
}
