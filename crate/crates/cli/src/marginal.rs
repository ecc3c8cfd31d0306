//! Marginal specs: `pareto:scale,shape`, `uniform:lo,hi`, `normal:mean,sd`
//! or `csv:path`.

use std::path::Path;

use dlrisk_core::io::read_empirical_file;
use dlrisk_core::Dist;

use crate::CliError;

pub fn parse(spec: &str) -> Result<Dist, CliError> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Precondition(format!("marginal '{spec}' is not of the form kind:args")))?;
    if kind.eq_ignore_ascii_case("csv") {
        return Ok(read_empirical_file(Path::new(rest))?);
    }
    let args: Vec<f64> = rest
        .split(',')
        .map(|a| a.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Precondition(format!("marginal '{spec}': parameters must be numbers")))?;
    let [a, b] = args[..] else {
        return Err(CliError::Precondition(format!("marginal '{spec}' needs two parameters")));
    };
    let d = match kind.to_ascii_lowercase().as_str() {
        "pareto" => Dist::pareto(a, b),
        "uniform" => Dist::uniform(a, b),
        "normal" => Dist::normal(a, b),
        _ => return Err(CliError::Precondition(format!("unknown marginal kind '{kind}'"))),
    };
    Ok(d?)
}
