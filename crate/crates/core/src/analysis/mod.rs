//! LSP estimators on path sets and the fitting pipeline that recovers
//! model coefficients, decorrelation distances and cross-correlations from
//! sample records.

mod fit;
mod records;
mod spatial;

use crate::error::{Error, Result};
use crate::smallscale::PathSet;

pub use fit::{fit_lsp_model, LspFit};
pub use records::{average_intervals, LspValues, SampleRecord};
pub use spatial::{
    decorrelation_from_residuals, estimate_cross_corr, estimate_decorrelation, standardized_residuals,
    CrossCorrEstimate, Decorrelation, DecorrelationFlag,
};

/// Half-width of the direct-path window around the LOS arrival time.
pub const KF_WINDOW_S: f64 = 5e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleKind {
    Azimuth,
    Elevation,
}

/// Wraps an azimuth into (-180, 180] degrees.
pub fn wrap_azimuth(deg: f64) -> f64 {
    let w = (deg + 180.0).rem_euclid(360.0) - 180.0;
    if w <= -180.0 {
        w + 360.0
    } else {
        w
    }
}

fn normalized_weights(powers: &[f64]) -> Result<(f64, impl Iterator<Item = f64> + '_)> {
    let total: f64 = powers.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidArgument(format!("powers must have a positive finite sum, got {total}")));
    }
    Ok((total, powers.iter().map(move |p| p / total)))
}

fn weighted_central_std(values: impl Iterator<Item = f64> + Clone, weights: &[f64]) -> Result<f64> {
    let (_, w) = normalized_weights(weights)?;
    let w: Vec<f64> = w.collect();
    let mean: f64 = values.clone().zip(&w).map(|(v, p)| v * p).sum();
    let second: f64 = values.zip(&w).map(|(v, p)| p * (v - mean).powi(2)).sum();
    Ok(second.max(0.0).sqrt())
}

/// RMS delay spread in seconds: square root of the second central moment of
/// the power-delay profile.
pub fn rms_ds(paths: &PathSet) -> Result<f64> {
    if paths.is_empty() {
        return Err(Error::Empty("path set"));
    }
    if paths.powers.len() != paths.delays.len() {
        return Err(Error::InvalidArgument("delays and powers differ in length".into()));
    }
    weighted_central_std(paths.delays.iter().copied(), &paths.powers)
}

/// Ricean K-factor in dB. Direct power is everything arriving within
/// [`KF_WINDOW_S`] of `los_delay_s` (absolute time, using the path set's
/// delay offset). Returns `-inf` with no direct power and `+inf` with no
/// scattered power.
pub fn kf_est(paths: &PathSet, los_delay_s: f64) -> Result<f64> {
    if paths.is_empty() {
        return Err(Error::Empty("path set"));
    }
    let (mut direct, mut scattered) = (0.0, 0.0);
    for (tau, p) in paths.delays.iter().zip(&paths.powers) {
        if (tau + paths.delay_offset - los_delay_s).abs() <= KF_WINDOW_S * (1.0 + 1e-12) {
            direct += p;
        } else {
            scattered += p;
        }
    }
    if direct == 0.0 && scattered == 0.0 {
        return Err(Error::InvalidArgument("path set carries no power".into()));
    }
    Ok(10.0 * (direct / scattered).log10())
}

/// Power-weighted RMS angular spread in degrees. Azimuths are measured
/// relative to the power-weighted mean direction, so the result does not
/// depend on a global rotation or on where the +-180 degree seam falls.
pub fn rms_angular_spread(angles_deg: &[f64], powers: &[f64], kind: AngleKind) -> Result<f64> {
    if angles_deg.is_empty() {
        return Err(Error::Empty("angles"));
    }
    if angles_deg.len() != powers.len() {
        return Err(Error::InvalidArgument(format!(
            "{} angles but {} powers",
            angles_deg.len(),
            powers.len()
        )));
    }
    match kind {
        AngleKind::Elevation => weighted_central_std(angles_deg.iter().copied(), powers),
        AngleKind::Azimuth => {
            let (_, w) = normalized_weights(powers)?;
            let (mut s, mut c) = (0.0, 0.0);
            for (a, p) in angles_deg.iter().zip(w) {
                let r = a.to_radians();
                s += p * r.sin();
                c += p * r.cos();
            }
            let center = if s == 0.0 && c == 0.0 { 0.0 } else { s.atan2(c).to_degrees() };
            let offsets = angles_deg.iter().map(move |a| wrap_azimuth(a - center));
            weighted_central_std(offsets, powers)
        }
    }
}

/// Power-weighted mean of per-path XPR in dB over the scattered paths. The
/// direct path is excluded.
pub fn xpr_est(paths: &PathSet) -> Result<f64> {
    let skip = usize::from(paths.los_flag);
    let (mut num, mut den) = (0.0, 0.0);
    for i in skip..paths.len() {
        let c = paths.coupling(i);
        let ratio_db = 10.0 * (c.co_power() / c.cross_power()).log10();
        let p = paths.powers[i];
        if p > 0.0 {
            num += p * ratio_db;
            den += p;
        }
    }
    if den == 0.0 {
        return Err(Error::InvalidArgument("no scattered paths to estimate XPR from".into()));
    }
    Ok(num / den)
}
