//! Published reference data shipped with the crate as CSV.
//!
//! `data/pso_settings.csv` holds the swarm settings per photon number together
//! with the reported success fraction λ; `data/golden_policies.csv` holds the
//! best learned policy per photon number and its Holevo variance.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::policy::Policy;
use crate::{Error, Result};

pub const PSO_SETTINGS_CSV: &str = include_str!("../data/pso_settings.csv");
pub const GOLDEN_POLICIES_CSV: &str = include_str!("../data/golden_policies.csv");

/// Largest number of feedback increments a golden-policy row can carry.
pub const GOLDEN_FEEDBACK_COLUMNS: usize = 13;

/// One row of the published swarm settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsoSettingsRow {
    pub n: usize,
    pub xi: usize,
    pub steps: usize,
    pub phi1: f64,
    pub phi2: f64,
    pub omega: f64,
    pub nu_max: f64,
    pub r: usize,
    /// Fraction of runs that reached the published variance.
    pub lambda: f64,
}

pub fn pso_settings() -> Result<Vec<PsoSettingsRow>> {
    read_pso_settings(PSO_SETTINGS_CSV.as_bytes())
}

pub fn read_pso_settings<R: Read>(reader: R) -> Result<Vec<PsoSettingsRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn pso_settings_row(n: usize) -> Result<PsoSettingsRow> {
    let rows = pso_settings()?;
    let (lo, hi) = coverage(rows.iter().map(|r| r.n));
    rows.into_iter()
        .find(|r| r.n == n)
        .ok_or_else(|| Error::domain(format!("Table S1 covers N={lo}..{hi}, got N={n}")))
}

/// A published policy and the variance reported for it.
#[derive(Clone, Debug, PartialEq)]
pub struct GoldenPolicy {
    pub n: usize,
    pub policy: Policy,
    pub variance: f64,
}

pub fn golden_policies() -> Result<Vec<GoldenPolicy>> {
    read_golden_policies(GOLDEN_POLICIES_CSV.as_bytes())
}

pub fn load_golden_policies(path: &Path) -> Result<Vec<GoldenPolicy>> {
    read_golden_policies(std::fs::File::open(path)?)
}

/// Parses the `n,d_phi_1..d_phi_13,d_varphi,v_phi` layout; unused feedback
/// columns are left empty.
pub fn read_golden_policies<R: Read>(reader: R) -> Result<Vec<GoldenPolicy>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("golden policy file lacks column {name:?}")))
    };
    let n_col = column("n")?;
    let feedback_cols = (1..=GOLDEN_FEEDBACK_COLUMNS)
        .map(|i| column(&format!("d_phi_{i}")))
        .collect::<Result<Vec<_>>>()?;
    let estimate_col = column("d_varphi")?;
    let variance_col = column("v_phi")?;

    let number = |field: &str, what: &str| {
        field.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad {what} value {field:?}")))
    };

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let n: usize = record[n_col]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad photon number {:?}", &record[n_col])))?;
        if n == 0 || n > GOLDEN_FEEDBACK_COLUMNS + 1 {
            return Err(Error::Parse(format!("golden row for unsupported N={n}")));
        }
        let mut increments = Vec::with_capacity(n);
        for (i, &col) in feedback_cols.iter().enumerate() {
            let field = record[col].trim();
            if i < n - 1 {
                increments.push(number(field, "feedback increment")?);
            } else if !field.is_empty() {
                return Err(Error::Parse(format!("row N={n} has a value in column d_phi_{}", i + 1)));
            }
        }
        increments.push(number(&record[estimate_col], "estimate increment")?);
        out.push(GoldenPolicy {
            n,
            policy: Policy::new(increments)?,
            variance: number(&record[variance_col], "variance")?,
        });
    }
    Ok(out)
}

pub fn golden_policy(n: usize) -> Result<GoldenPolicy> {
    find_golden(&golden_policies()?, n)
}

pub fn find_golden(rows: &[GoldenPolicy], n: usize) -> Result<GoldenPolicy> {
    rows.iter()
        .find(|g| g.n == n)
        .cloned()
        .ok_or_else(|| Error::domain(format!("no golden policy for N={n}")))
}

fn coverage(ns: impl Iterator<Item = usize>) -> (usize, usize) {
    ns.fold((usize::MAX, 0), |(lo, hi), n| (lo.min(n), hi.max(n)))
}
