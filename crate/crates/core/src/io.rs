//! CSV and JSON import/export.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::bounds::{fmt_ext, BoundReport, Measure};
use crate::coupling::{DlPlan, SampleBatch};
use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::oracle::StopLossCurve;

/// Reads observations from CSV with header `value[,weight]`.
pub fn read_empirical<R: Read>(reader: R) -> Result<Dist> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let vi = col("value").ok_or_else(|| Error::domain("CSV needs a 'value' column"))?;
    let wi = col("weight");
    let mut values = Vec::new();
    let mut weights = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse::<f64>().map_err(|_| Error::domain(format!("row {}: cannot parse '{raw}' as a number", line + 2)))
        };
        values.push(parse(vi)?);
        if let Some(wi) = wi {
            weights.push(parse(wi)?);
        }
    }
    Dist::empirical(&values, wi.map(|_| weights.as_slice()))
}

pub fn read_empirical_file(path: &Path) -> Result<Dist> {
    read_empirical(File::open(path)?)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

/// Quantile table as CSV `u,x`. Non-grid laws are tabulated at `n + 1`
/// equally spaced levels with truncation `m`.
pub fn write_grid<W: Write>(d: &Dist, n: usize, m: f64, w: W) -> Result<()> {
    let owned;
    let g = match d.grid_table() {
        Some(_) => d,
        None => {
            owned = d.to_grid(n, m)?;
            &owned
        }
    };
    let (levels, xs) = g.grid_table().expect("grid kind");
    let mut out = writer(w);
    out.write_record(["u", "x"])?;
    for (u, x) in levels.iter().zip(xs) {
        out.write_record([u.to_string(), x.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Plan as CSV `k,x,y,tag`, `k` counting from 1 in processing order.
pub fn write_plan<W: Write>(plan: &DlPlan, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["k", "x", "y", "tag"])?;
    for (k, q) in plan.pairs().iter().enumerate() {
        out.write_record([(k + 1).to_string(), q.x.to_string(), q.y.to_string(), q.tag.as_str().to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Curve of reports as CSV `p,L,Lo,Uo,U,R`: `L`, `U` unconstrained and
/// `Lo`, `Uo` constrained, smallest to largest. For `prob` the level column
/// holds `t`. Undefined entries are left empty.
pub fn write_curve<W: Write>(reports: &[BoundReport], w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["p", "L", "Lo", "Uo", "U", "R"])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), fmt_ext);
    for r in reports {
        let (level, l, lo, uo, u) = if r.measure == Measure::Prob {
            (r.t, r.unconstrained_worst, r.constrained_worst, r.constrained_best, r.unconstrained_best)
        } else {
            (r.p, r.unconstrained_best, r.constrained_best, r.constrained_worst, r.unconstrained_worst)
        };
        out.write_record([opt(level), fmt_ext(l), fmt_ext(lo), fmt_ext(uo), fmt_ext(u), opt(r.r)])?;
    }
    out.flush()?;
    Ok(())
}

/// Batch as CSV `x,y`.
pub fn write_sample<W: Write>(batch: &SampleBatch, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["x", "y"])?;
    for (x, y) in &batch.pairs {
        out.write_record([fmt_ext(*x), fmt_ext(*y)])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Sidecar {
    kind: String,
    seed: u64,
    size: usize,
}

/// JSON sidecar `{kind, seed, size}` of a batch.
pub fn sample_sidecar(batch: &SampleBatch) -> Result<String> {
    let s = Sidecar { kind: batch.kind.to_string(), seed: batch.seed, size: batch.size };
    Ok(serde_json::to_string_pretty(&s)?)
}

/// Stop-loss curve as CSV `d,value,stderr`.
pub fn write_stop_loss<W: Write>(curve: &StopLossCurve, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["d", "value", "stderr"])?;
    for ((d, v), s) in curve.thresholds.iter().zip(&curve.values).zip(&curve.stderr) {
        out.write_record([d.to_string(), v.to_string(), s.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn with_file<F: FnOnce(&mut BufWriter<File>) -> Result<()>>(path: &Path, f: F) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
