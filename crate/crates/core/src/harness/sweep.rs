//! ε-convergence sweeps, tilted-incidence aperture scans and rate fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::config::ScenarioConfig;
use super::run::{run_scenario, RunSummary};
use super::HarnessError;
use crate::farfield::{amplitude_db, sup_norm_in_aperture};
use crate::geometry::ApertureSpec;

/// Least-squares slope of log(norm) against log(ε).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence band on the slope (Student t, n − 2 dof).
    pub band: [f64; 2],
    pub points: usize,
}

pub fn fit_rate(eps: &[f64], norms: &[f64]) -> Result<RateFit, HarnessError> {
    if eps.len() != norms.len() || eps.len() < 3 {
        return Err(HarnessError::Fit(format!("need at least 3 matched points, got {} and {}", eps.len(), norms.len())));
    }
    if eps.iter().chain(norms).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(HarnessError::Fit("ε and norms must be positive and finite".into()));
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(HarnessError::Fit("ε values must not all coincide".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = n - 2.0;
    let half = if dof > 0.0 {
        let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| HarnessError::Fit(e.to_string()))?.inverse_cdf(0.975);
        t * (sse / dof / sxx).sqrt()
    } else {
        0.0
    };
    Ok(RateFit { slope, intercept, band: [slope - half, slope + half], points: x.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Excluded {
    pub eps: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Strictly decreasing.
    pub eps: Vec<f64>,
    pub sup_norms: Vec<f64>,
    #[serde(deserialize_with = "super::db_serde::many")]
    pub sup_norms_db: Vec<f64>,
    pub fit: Option<RateFit>,
    pub runs: Vec<RunSummary>,
    pub excluded: Vec<Excluded>,
    pub warnings: Vec<String>,
}

/// Runs `template` at every ε, up to `parallel` at a time. Entries that fail
/// to plan or solve are excluded with their reason; results are ordered by
/// decreasing ε whatever the completion order.
pub fn convergence_sweep(template: &ScenarioConfig, eps_list: &[f64], parallel: usize) -> Result<ConvergenceReport, HarnessError> {
    if eps_list.len() < 3 {
        return Err(HarnessError::Config(format!("a sweep needs at least 3 values of ε, got {}", eps_list.len())));
    }
    let mut eps = eps_list.to_vec();
    if eps.iter().any(|e| !(*e > 0.0)) {
        return Err(HarnessError::Config("ε values must be positive".into()));
    }
    eps.sort_by(|a, b| b.total_cmp(a));
    if eps.windows(2).any(|w| w[0] == w[1]) {
        return Err(HarnessError::Config("ε values must be distinct".into()));
    }
    template.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(parallel.max(1)).build().map_err(|e| HarnessError::Config(e.to_string()))?;
    let results: Vec<_> = pool.install(|| eps.par_iter().map(|&e| run_scenario(&template.with_eps(e)).map(|o| o.summary)).collect());
    let mut report = ConvergenceReport {
        eps: Vec::new(),
        sup_norms: Vec::new(),
        sup_norms_db: Vec::new(),
        fit: None,
        runs: Vec::new(),
        excluded: Vec::new(),
        warnings: Vec::new(),
    };
    for (e, r) in eps.iter().zip(results) {
        match r {
            Ok(s) => {
                report.eps.push(*e);
                report.sup_norms.push(s.sup_norm);
                report.sup_norms_db.push(s.sup_norm_db);
                report.warnings.extend(s.warnings.iter().map(|w| format!("ε = {e}: {w}")));
                report.runs.push(s);
            }
            Err(err) => {
                report.warnings.push(format!("ε = {e} excluded: {err}"));
                report.excluded.push(Excluded { eps: *e, reason: err.to_string() });
            }
        }
    }
    if report.eps.len() >= 3 {
        report.fit = Some(fit_rate(&report.eps, &report.sup_norms)?);
    } else {
        report.warnings.push(format!("only {} resolvable values of ε; no rate fitted", report.eps.len()));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedNorm {
    pub tau_deg: f64,
    #[serde(deserialize_with = "super::db_serde::one")]
    pub sup_norm_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApertureRow {
    pub tilt_deg: f64,
    pub sup_norm: f64,
    #[serde(deserialize_with = "super::db_serde::one")]
    pub sup_norm_db: f64,
    /// Sup norm over observation directions within τ of the cloak axis.
    pub restricted: Vec<RestrictedNorm>,
    /// sup norm / sin(tilt), for 0° < tilt ≤ 15°.
    pub ratio_to_sin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApertureReport {
    pub rows: Vec<ApertureRow>,
    /// max/min − 1 over the small-tilt ratios, when at least two exist.
    pub linearity_spread: Option<f64>,
    pub run: RunSummary,
}

/// Incidence tilted from the x-axis (the cloak axis) by each angle, all in one
/// factorization.
pub fn aperture_scan(cfg: &ScenarioConfig, tilts_deg: &[f64], taus_deg: &[f64]) -> Result<ApertureReport, HarnessError> {
    if tilts_deg.is_empty() || tilts_deg.iter().any(|t| !(0.0..=90.0).contains(t)) {
        return Err(HarnessError::Config("tilt angles must lie in [0°, 90°]".into()));
    }
    if taus_deg.iter().any(|t| !(0.0..=90.0).contains(t)) {
        return Err(HarnessError::Config("aperture angles must lie in [0°, 90°]".into()));
    }
    let mut c = cfg.clone();
    c.wave.incident_deg = tilts_deg.to_vec();
    let out = run_scenario(&c)?;
    let apertures: Vec<ApertureSpec> = taus_deg.iter().map(|t| ApertureSpec::new(vec![0.0, 1.0], t.to_radians().sin().min(1.0))).collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(tilts_deg.len());
    for ((&tilt, p), inc) in tilts_deg.iter().zip(&out.patterns).zip(&out.summary.incidents) {
        let restricted = taus_deg
            .iter()
            .zip(&apertures)
            .map(|(&tau, ap)| RestrictedNorm { tau_deg: tau, sup_norm_db: sup_norm_in_aperture(p, ap).map_or(f64::NEG_INFINITY, |v| v.1) })
            .collect();
        let ratio_to_sin = (tilt > 0.0 && tilt <= 15.0).then(|| inc.sup_norm / tilt.to_radians().sin());
        rows.push(ApertureRow { tilt_deg: tilt, sup_norm: inc.sup_norm, sup_norm_db: amplitude_db(inc.sup_norm), restricted, ratio_to_sin });
    }
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio_to_sin).collect();
    let linearity_spread = (ratios.len() >= 2).then(|| {
        let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
        let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
        hi / lo - 1.0
    });
    Ok(ApertureReport { rows, linearity_spread, run: out.summary })
}
