use super::SampleRecord;
use crate::error::{Error, Result};
use crate::fields::Point;
use crate::params::{Lsp, LspDescriptor};

pub const MIN_TRACK_RECORDS: usize = 50;
pub const MIN_CORR_RECORDS: usize = 100;
/// A track shorter than this many decorrelation distances gives a wide
/// confidence interval on the estimate.
const MIN_TRACK_LAMBDAS: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecorrelationFlag {
    /// Residuals decorrelate within one sample spacing.
    BelowSpacing,
    /// No decay observed; the estimate ran to its upper bound.
    Divergent,
    /// Track too short relative to the estimate.
    WideConfidence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decorrelation {
    pub lambda_m: f64,
    /// Median distance between consecutive records.
    pub spacing_m: f64,
    pub track_length_m: f64,
    /// Number of ACF lags used in the fit.
    pub lags_used: usize,
    pub flags: Vec<DecorrelationFlag>,
}

/// Model residuals `(value - mean) / std` of `lsp`, or `None` where the
/// record has no finite value. Falls back to unscaled residuals when the
/// model spread is zero.
pub fn standardized_residuals(records: &[SampleRecord], lsp: Lsp, model: &LspDescriptor) -> Vec<Option<f64>> {
    records
        .iter()
        .map(|r| {
            let v = r.values.get(lsp).filter(|v| v.is_finite())?;
            let s = model.std(&r.covariates);
            let d = v - model.mean(&r.covariates);
            Some(if s > 0.0 { d / s } else { d })
        })
        .collect()
}

/// Decorrelation distance of `lsp` along an ordered track, detrended with
/// `model`.
pub fn estimate_decorrelation(records: &[SampleRecord], lsp: Lsp, model: &LspDescriptor) -> Result<Decorrelation> {
    let (pos, res): (Vec<Point>, Vec<f64>) = records
        .iter()
        .zip(standardized_residuals(records, lsp, model))
        .filter_map(|(r, v)| v.map(|v| (r.position, v)))
        .unzip();
    decorrelation_from_residuals(&pos, &res)
}

/// Fits `exp(-d / lambda)` to the empirical autocorrelation of `residuals`
/// over lags up to the first zero crossing.
pub fn decorrelation_from_residuals(positions: &[Point], residuals: &[f64]) -> Result<Decorrelation> {
    let n = residuals.len();
    if positions.len() != n {
        return Err(Error::InvalidArgument("positions and residuals differ in length".into()));
    }
    if n < MIN_TRACK_RECORDS {
        return Err(Error::InsufficientData { what: "track records", needed: MIN_TRACK_RECORDS, got: n });
    }
    let mut steps: Vec<f64> = positions.windows(2).map(|w| w[0].distance(w[1])).collect();
    let track_length_m: f64 = steps.iter().sum();
    steps.sort_by(f64::total_cmp);
    let spacing_m = steps[steps.len() / 2];
    if !(spacing_m > 0.0) {
        return Err(Error::InvalidArgument("track records do not advance along the track".into()));
    }

    // Residuals are already centered by the model; a per-track mean is not
    // removed again, which would bias the ACF low on short tracks.
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let spread = residuals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let upper = 1e3 * track_length_m.max(spacing_m);
    if spread <= 1e-24 * (1.0 + mean * mean) {
        return Ok(Decorrelation {
            lambda_m: f64::INFINITY,
            spacing_m,
            track_length_m,
            lags_used: 0,
            flags: vec![DecorrelationFlag::Divergent],
        });
    }
    let r = residuals;
    let var = r.iter().map(|v| v * v).sum::<f64>() / n as f64;

    let mut acf = Vec::new();
    for lag in 1..n / 2 {
        let c = r[..n - lag].iter().zip(&r[lag..]).map(|(a, b)| a * b).sum::<f64>() / (n as f64 * var);
        if c <= 0.0 && !acf.is_empty() {
            break;
        }
        acf.push((lag as f64 * spacing_m, c));
        if c <= 0.0 {
            break;
        }
    }
    let cost = |lambda: f64| acf.iter().map(|(d, c)| (c - (-d / lambda).exp()).powi(2)).sum::<f64>();
    let lower = 1e-3 * spacing_m;
    let lambda_m = golden_section(|t| cost(t.exp()), lower.ln(), upper.ln(), 1e-10).exp();

    let mut flags = Vec::new();
    if lambda_m < spacing_m {
        flags.push(DecorrelationFlag::BelowSpacing);
    }
    if lambda_m >= 0.99 * upper {
        flags.push(DecorrelationFlag::Divergent);
    }
    if track_length_m < MIN_TRACK_LAMBDAS * lambda_m {
        flags.push(DecorrelationFlag::WideConfidence);
    }
    Ok(Decorrelation {
        lambda_m,
        spacing_m,
        track_length_m,
        lags_used: acf.len(),
        flags,
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Pearson correlation matrix over the correlated LSPs.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCorrEstimate {
    /// `None` for rows and columns of LSPs without data.
    pub matrix: [[Option<f64>; 8]; 8],
    /// Records used per pair.
    pub counts: [[usize; 8]; 8],
}

impl CrossCorrEstimate {
    pub fn get(&self, a: Lsp, b: Lsp) -> Option<f64> {
        self.matrix[a.corr_index()?][b.corr_index()?]
    }
}

/// Correlation of residual columns given in [`Lsp::CORRELATED`] order; one
/// row per record, `None` marking a missing value. Pairs use the records
/// where both values are present.
pub fn estimate_cross_corr(rows: &[[Option<f64>; 8]]) -> Result<CrossCorrEstimate> {
    if rows.len() < MIN_CORR_RECORDS {
        return Err(Error::InsufficientData { what: "records", needed: MIN_CORR_RECORDS, got: rows.len() });
    }
    let mut matrix = [[None; 8]; 8];
    let mut counts = [[0; 8]; 8];
    for i in 0..8 {
        for j in 0..=i {
            let pairs: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| Some((r[i]?, r[j]?)))
                .filter(|(a, b)| a.is_finite() && b.is_finite())
                .collect();
            counts[i][j] = pairs.len();
            counts[j][i] = pairs.len();
            if pairs.len() < 2 {
                continue;
            }
            let v = if i == j { Some(1.0) } else { pearson(&pairs) };
            matrix[i][j] = v;
            matrix[j][i] = v;
        }
    }
    Ok(CrossCorrEstimate { matrix, counts })
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in pairs {
        sab += (a - ma) * (b - mb);
        saa += (a - ma) * (a - ma);
        sbb += (b - mb) * (b - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    if pairs.iter().all(|(a, b)| a == b) {
        return Some(1.0);
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn line(n: usize) -> Vec<Point> {
        (0..n).map(|i| Point::new(i as f64, 0.0)).collect()
    }

    #[test]
    fn white_residuals_fall_below_spacing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r: Vec<f64> = (0..400).map(|_| rng.sample(StandardNormal)).collect();
        let d = decorrelation_from_residuals(&line(400), &r).unwrap();
        assert!(d.lambda_m < 1.0, "{}", d.lambda_m);
        assert!(d.flags.contains(&DecorrelationFlag::BelowSpacing));
    }

    #[test]
    fn constant_residuals_diverge() {
        let d = decorrelation_from_residuals(&line(100), &[0.3; 100]).unwrap();
        assert!(d.lambda_m.is_infinite());
        assert_eq!(d.flags, vec![DecorrelationFlag::Divergent]);
    }

    #[test]
    fn ar1_sequence_recovers_lambda() {
        // Discrete exponential ACF: rho^k with rho = exp(-1 / lambda).
        let lambda = 8.0;
        let rho = (-1.0f64 / lambda).exp();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = 0.0;
        let r: Vec<f64> = (0..20_000)
            .map(|_| {
                let e: f64 = rng.sample(StandardNormal);
                x = rho * x + (1.0 - rho * rho).sqrt() * e;
                x
            })
            .collect();
        let d = decorrelation_from_residuals(&line(r.len()), &r).unwrap();
        assert!((d.lambda_m - lambda).abs() < 1.0, "{}", d.lambda_m);
        assert!(d.flags.is_empty());
    }

    #[test]
    fn short_track_is_rejected() {
        assert!(decorrelation_from_residuals(&line(10), &[0.0; 10]).is_err());
    }

    #[test]
    fn cross_corr_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<[Option<f64>; 8]> = (0..5000)
            .map(|_| {
                let mut r = [None; 8];
                for v in r.iter_mut().take(6) {
                    *v = Some(rng.sample(StandardNormal));
                }
                r[6] = r[0];
                r
            })
            .collect();
        let est = estimate_cross_corr(&rows).unwrap();
        assert_eq!(est.matrix[6][0], Some(1.0));
        assert_eq!(est.matrix[0][0], Some(1.0));
        assert_eq!(est.matrix[7][0], None);
        assert_eq!(est.matrix[7][7], None);
        for i in 0..6 {
            for j in 0..i {
                assert!(est.matrix[i][j].unwrap().abs() < 0.1);
                assert_eq!(est.matrix[i][j], est.matrix[j][i]);
            }
        }
    }
}
