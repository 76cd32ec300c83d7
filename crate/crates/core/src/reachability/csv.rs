//! Exact distribution export: `step,state,prob_numerator,prob_denominator`.

use std::io::{Read, Write};

use num_bigint::BigInt;
use num_rational::BigRational;

use super::StateDistribution;
use crate::error::{Error, Result};
use crate::ray::CanonicalRay;

pub const DISTRIBUTION_CSV_SCHEMA: &str = "# qsic-distribution v1";

fn csv_err(e: ::csv::Error) -> Error {
    let location = e
        .position()
        .map(|p| format!("line {}", p.line()))
        .unwrap_or_else(|| "distribution csv".into());
    Error::parse(location, e.to_string())
}

pub fn write_distribution_csv<W: Write>(
    mut out: W,
    step: usize,
    d: &StateDistribution<BigRational>,
) -> Result<()> {
    writeln!(out, "{DISTRIBUTION_CSV_SCHEMA}")?;
    let mut w = ::csv::Writer::from_writer(out);
    w.write_record(["step", "state", "prob_numerator", "prob_denominator"])
        .map_err(csv_err)?;
    for (ray, p) in d.iter() {
        w.write_record([
            step.to_string(),
            ray.to_string(),
            p.numer().to_string(),
            p.denom().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a distribution file. All rows must carry the same step; the weights
/// are renormalized to an exact distribution.
pub fn read_distribution_csv<R: Read>(input: R) -> Result<(usize, StateDistribution<BigRational>)> {
    let mut r = ::csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let mut step = None;
    let mut weights = Vec::new();
    for (k, row) in r.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let at = || format!("data row {}", k + 1);
        if row.len() != 4 {
            return Err(Error::parse(
                at(),
                format!("expected 4 columns, found {}", row.len()),
            ));
        }
        let s: usize = row[0]
            .parse()
            .map_err(|_| Error::parse(at(), "invalid step"))?;
        if *step.get_or_insert(s) != s {
            return Err(Error::parse(at(), "rows carry different steps"));
        }
        let ray: CanonicalRay = row[1].parse()?;
        let num: BigInt = row[2]
            .parse()
            .map_err(|_| Error::parse(at(), "invalid numerator"))?;
        let den: BigInt = row[3]
            .parse()
            .map_err(|_| Error::parse(at(), "invalid denominator"))?;
        if den <= BigInt::from(0) || num < BigInt::from(0) {
            return Err(Error::parse(
                at(),
                "probability must be a nonnegative fraction",
            ));
        }
        weights.push((ray, BigRational::new(num, den)));
    }
    let dim = weights
        .first()
        .map(|(r, _)| r.dim())
        .ok_or_else(|| Error::parse("distribution csv", "no data rows"))?;
    Ok((
        step.unwrap_or(0),
        StateDistribution::from_weights(dim, weights)?,
    ))
}
