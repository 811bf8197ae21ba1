//! Scaling experiments: the diagonal lower bound, the off-diagonal ledger,
//! lemma sweeps and full-norm ratios.

pub mod bounds;
pub mod diagonal;
pub mod full;
pub mod lemmas;
pub mod offdiag;
pub mod testfn;

use crate::dyadic::{build_frequency_config, default_candidates, FrequencyConfig};
use crate::error::{Error, Result};
use crate::norms::SpaceParams;
use crate::quad::QuadratureSpec;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// `(p, q, s) = (4, 1.2, -0.5)`.
pub const P1: SpaceParams = SpaceParams { p: 4.0, q: 1.2, s: -0.5 };
/// `(p, q, s) = (3, 1.5, -0.55)`.
pub const P2: SpaceParams = SpaceParams { p: 3.0, q: 1.5, s: -0.55 };

/// Largest `max A + N` allowed in direct mode.
pub const DIRECT_GUARD: i64 = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Direct,
    Periodic,
    Both,
}

impl std::str::FromStr for RunMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(RunMode::Direct),
            "periodic" => Ok(RunMode::Periodic),
            "both" => Ok(RunMode::Both),
            _ => Err(Error::Parse(format!("unknown mode {s}"))),
        }
    }
}

/// How the exponent set is chosen for each `N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Candidates {
    /// `{R, 2R, 3R, ...}`, as short as the cardinality floor allows.
    Arithmetic,
    /// A fixed candidate list, filtered greedily.
    Explicit(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: SpaceParams,
    pub n_list: Vec<i64>,
    pub r: i64,
    pub candidates: Candidates,
    pub mode: RunMode,
    /// Exact window for `|m|, |n|`; `None` means `R + 4`.
    pub window: Option<i64>,
    pub spec: QuadratureSpec,
    pub k_max: Option<i64>,
    pub tol: f64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(params: SpaceParams, n_list: Vec<i64>, r: i64) -> Self {
        ExperimentConfig {
            params,
            n_list,
            r,
            candidates: Candidates::Arithmetic,
            mode: RunMode::Periodic,
            window: None,
            spec: QuadratureSpec::default(),
            k_max: None,
            tol: 1e-2,
            out: None,
        }
    }

    pub fn window(&self) -> i64 {
        self.window.unwrap_or(self.r + 4)
    }

    pub fn frequency_config(&self, n: i64) -> Result<FrequencyConfig> {
        let cands = match &self.candidates {
            Candidates::Arithmetic => default_candidates(n, self.r),
            Candidates::Explicit(v) => v.clone(),
        };
        build_frequency_config(&cands, n, self.r)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.check()?;
        self.spec.validate()?;
        if self.r < 1 {
            return Err(Error::Domain(format!("R must be positive, got {}", self.r)));
        }
        if self.window() < self.r {
            return Err(Error::Domain(format!("window {} is below R = {}", self.window(), self.r)));
        }
        if self.n_list.iter().any(|&n| n < 1) {
            return Err(Error::Domain("N must be at least 1".into()));
        }
        Ok(())
    }

    /// Direct-mode cost guard.
    pub fn check_direct(&self, cfg: &FrequencyConfig) -> Result<()> {
        let c = cfg.max_exponent() + cfg.n;
        if c > DIRECT_GUARD {
            return Err(Error::Cost(format!("direct mode needs max A + N <= {DIRECT_GUARD}, got {c}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `log2` units.
    pub residual: f64,
    pub points: usize,
}

/// Least squares of `log2 value` against `N`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, v)| !(v > 0.0) || !v.is_finite() || !x.is_finite()) {
        return Err(Error::Fit("values must be positive and finite".into()));
    }
    let n = points.len() as f64;
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = points.iter().zip(&ys).map(|(p, y)| (p.0 - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points.iter().zip(&ys).map(|(p, y)| (y - intercept - slope * p.0).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual: (rss / n).sqrt(), points: points.len() })
}

/// Writes `rows` as CSV with `header`.
pub fn write_csv(path: &std::path::Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_geometric_slope() {
        let pts: Vec<(f64, f64)> = (2..9).map(|n| (n as f64, (0.7 * n as f64).exp2())).collect();
        let f = fit_slope(&pts).unwrap();
        assert!((f.slope - 0.7).abs() < 1e-12 && f.residual < 1e-12);
    }

    #[test]
    fn constant_data_has_zero_slope() {
        let f = fit_slope(&[(1.0, 3.0), (2.0, 3.0), (5.0, 3.0)]).unwrap();
        assert!(f.slope.abs() < 1e-14);
    }

    #[test]
    fn alternating_perturbation() {
        let pts: Vec<(f64, f64)> =
            (6..=14).map(|n| (n as f64, (n as f64 / 3.0).exp2() * (1.0 + 0.05 * if n % 2 == 0 { 1.0 } else { -1.0 }))).collect();
        let f = fit_slope(&pts).unwrap();
        assert!((f.slope - 1.0 / 3.0).abs() < 0.02, "{}", f.slope);
    }

    #[test]
    fn refuses_short_input() {
        assert!(matches!(fit_slope(&[(1.0, 1.0), (2.0, 2.0)]), Err(Error::Fit(_))));
        assert!(matches!(fit_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(Error::Fit(_))));
    }
}
