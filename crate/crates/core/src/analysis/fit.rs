use nalgebra::{DMatrix, DVector};

use super::SampleRecord;
use crate::error::{Error, Result};
use crate::params::{Coefficient, FixedMask, Lsp, LspDescriptor};

pub const MIN_RECORDS: usize = 10;

/// Fitted descriptor with per-coefficient standard errors. Fixed
/// coefficients carry a standard error of 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LspFit {
    pub descriptor: LspDescriptor,
    pub std_errors: LspDescriptor,
    pub n_records: usize,
}

struct Column {
    coef: Coefficient,
    covariate: &'static str,
    x: Vec<f64>,
}

struct Ols {
    beta: Vec<f64>,
    se: Vec<f64>,
    residuals: Vec<f64>,
}

/// Ordinary least squares with a rank check that names the first column
/// not identifiable from the ones before it.
fn ols(columns: &[Column], y: &[f64]) -> Result<Ols> {
    let n = y.len();
    let p = columns.len();
    if p == 0 {
        return Ok(Ols { beta: vec![], se: vec![], residuals: y.to_vec() });
    }
    for c in columns {
        let first = c.x[0];
        if c.coef != Coefficient::Mu && c.coef != Coefficient::Sigma && c.x.iter().all(|v| *v == first) {
            return Err(Error::RankDeficient { covariate: c.covariate });
        }
    }
    // Incremental Gram-Schmidt catches collinear but non-constant columns.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(p);
    for c in columns {
        let mut v = c.x.clone();
        for q in &basis {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let scale = c.x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm > 1e-9 * scale.max(1.0)) {
            return Err(Error::RankDeficient { covariate: c.covariate });
        }
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    let x = DMatrix::from_fn(n, p, |i, j| columns[j].x[i]);
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let inv = xtx
        .try_inverse()
        .ok_or(Error::RankDeficient { covariate: columns[p - 1].covariate })?;
    let beta = &inv * x.transpose() * &yv;
    let resid = &yv - &x * &beta;
    let dof = n.saturating_sub(p).max(1) as f64;
    let s2 = resid.norm_squared() / dof;
    Ok(Ols {
        beta: beta.iter().copied().collect(),
        se: (0..p).map(|j| (s2 * inv[(j, j)]).max(0.0).sqrt()).collect(),
        residuals: resid.iter().copied().collect(),
    })
}

/// Fits the mean and spread coefficients of `lsp` to `records`.
///
/// Stage 1 regresses the values on `[1, log10 f, log10 d, log10 h]` for
/// the mean terms. Stage 2 regresses `|residual| * sqrt(pi/2)` on
/// `[1, log10 f, log10 d]` for the spread terms, which turns the mean
/// absolute deviation of a normal into its standard deviation. Coefficients
/// flagged in `fixed` keep their value from `fixed_values`; the
/// decorrelation distance is always copied from `fixed_values`.
pub fn fit_lsp_model(
    records: &[SampleRecord],
    lsp: Lsp,
    fixed: FixedMask,
    fixed_values: &LspDescriptor,
) -> Result<LspFit> {
    let rows: Vec<(&SampleRecord, f64)> = records
        .iter()
        .filter_map(|r| r.values.get(lsp).filter(|v| v.is_finite()).map(|v| (r, v)))
        .collect();
    if rows.len() < MIN_RECORDS {
        return Err(Error::InsufficientData {
            what: "records with a finite value",
            needed: MIN_RECORDS,
            got: rows.len(),
        });
    }
    let lf: Vec<f64> = rows.iter().map(|(r, _)| r.covariates.f_ghz().log10()).collect();
    let ld: Vec<f64> = rows.iter().map(|(r, _)| r.covariates.d_2d().log10()).collect();
    let lh: Vec<f64> = rows.iter().map(|(r, _)| r.covariates.h_tx().log10()).collect();
    let ones = vec![1.0; rows.len()];

    let mut desc = *fixed_values;
    let mut se = LspDescriptor::default();

    let mean_terms = [
        (Coefficient::Mu, "intercept", &ones),
        (Coefficient::Gamma, "frequency", &lf),
        (Coefficient::Epsilon, "distance", &ld),
        (Coefficient::Zeta, "tx_height", &lh),
    ];
    let (y1, cols1) = partial(&mean_terms, rows.iter().map(|(_, v)| *v).collect(), fixed, fixed_values);
    let stage1 = ols(&cols1, &y1)?;
    for (c, (b, s)) in cols1.iter().zip(stage1.beta.iter().zip(&stage1.se)) {
        desc.set(c.coef, *b);
        se.set(c.coef, *s);
    }
    // Residuals relative to the full mean, fixed terms included.
    let n = rows.len();
    let active1 = cols1.len();
    let correction = (n as f64 / (n - active1).max(1) as f64).sqrt();
    let abs_dev: Vec<f64> = stage1
        .residuals
        .iter()
        .map(|r| r.abs() * (std::f64::consts::PI / 2.0).sqrt() * correction)
        .collect();

    let spread_terms = [
        (Coefficient::Sigma, "intercept", &ones),
        (Coefficient::Delta, "frequency", &lf),
        (Coefficient::Kappa, "distance", &ld),
    ];
    let (y2, cols2) = partial(&spread_terms, abs_dev, fixed, fixed_values);
    let stage2 = ols(&cols2, &y2)?;
    for (c, (b, s)) in cols2.iter().zip(stage2.beta.iter().zip(&stage2.se)) {
        desc.set(c.coef, *b);
        se.set(c.coef, *s);
    }
    Ok(LspFit {
        descriptor: desc,
        std_errors: se,
        n_records: n,
    })
}

/// Splits terms into free regression columns and a response with the fixed
/// terms already subtracted.
fn partial(
    terms: &[(Coefficient, &'static str, &Vec<f64>)],
    mut y: Vec<f64>,
    fixed: FixedMask,
    fixed_values: &LspDescriptor,
) -> (Vec<f64>, Vec<Column>) {
    let mut cols = Vec::new();
    for (coef, name, x) in terms {
        if fixed.contains(*coef) {
            let c = fixed_values.get(*coef);
            y.iter_mut().zip(x.iter()).for_each(|(yi, xi)| *yi -= c * xi);
        } else {
            cols.push(Column { coef: *coef, covariate: name, x: (*x).clone() });
        }
    }
    (y, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::LspValues;
    use crate::fields::Point;
    use crate::params::{Condition, Covariates};

    fn record(f: f64, d: f64, h: f64, v: f64) -> SampleRecord {
        let mut values = LspValues::default();
        values.set(Lsp::Ds, Some(v));
        SampleRecord {
            position: Point::new(d, 0.0),
            covariates: Covariates::new(f, d, h).unwrap(),
            condition: Condition::Los,
            values,
        }
    }

    fn truth() -> LspDescriptor {
        LspDescriptor { mu: -8.3, gamma: 1.26, epsilon: 0.1, zeta: 0.49, ..Default::default() }
    }

    fn grid(desc: &LspDescriptor) -> Vec<SampleRecord> {
        let mut out = Vec::new();
        for f in [2.37, 5.4] {
            for h in [2.0, 5.0, 8.0] {
                for d in [5.0, 10.0, 30.0, 70.0, 150.0] {
                    let cov = Covariates::new(f, d, h).unwrap();
                    out.push(record(f, d, h, desc.mean(&cov)));
                }
            }
        }
        out
    }

    #[test]
    fn noiseless_data_is_recovered_exactly() {
        let t = truth();
        let fit = fit_lsp_model(&grid(&t), Lsp::Ds, FixedMask::NONE, &LspDescriptor::default()).unwrap();
        for c in [Coefficient::Mu, Coefficient::Gamma, Coefficient::Epsilon, Coefficient::Zeta] {
            assert!((fit.descriptor.get(c) - t.get(c)).abs() < 1e-9, "{c:?}");
        }
        assert!(fit.descriptor.sigma.abs() < 1e-9);
    }

    #[test]
    fn fixed_coefficients_are_held() {
        let t = truth();
        let fixed_values = LspDescriptor { gamma: 1.26, lambda_m: 50.0, ..Default::default() };
        let mask = FixedMask::NONE.with(Coefficient::Gamma);
        let fit = fit_lsp_model(&grid(&t), Lsp::Ds, mask, &fixed_values).unwrap();
        assert_eq!(fit.descriptor.gamma, 1.26);
        assert_eq!(fit.std_errors.gamma, 0.0);
        assert_eq!(fit.descriptor.lambda_m, 50.0);
        assert!((fit.descriptor.mu - t.mu).abs() < 1e-9);
    }

    #[test]
    fn single_frequency_is_rank_deficient() {
        let recs: Vec<_> = grid(&truth())
            .into_iter()
            .filter(|r| r.covariates.f_ghz() == 5.4)
            .collect();
        let err = fit_lsp_model(&recs, Lsp::Ds, FixedMask::NONE, &LspDescriptor::default()).unwrap_err();
        assert_eq!(err, Error::RankDeficient { covariate: "frequency" });
        let ok = fit_lsp_model(
            &recs,
            Lsp::Ds,
            FixedMask::of(&[Coefficient::Gamma, Coefficient::Delta]),
            &LspDescriptor::default(),
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn collinear_covariates_are_rank_deficient() {
        // Height tied to distance: not separable.
        let recs: Vec<_> = (0..20)
            .map(|i| {
                let d = 5.0 + i as f64;
                let f = if i % 2 == 0 { 2.37 } else { 5.4 };
                record(f, d, d, -7.0)
            })
            .collect();
        let err = fit_lsp_model(&recs, Lsp::Ds, FixedMask::NONE, &LspDescriptor::default()).unwrap_err();
        assert_eq!(err, Error::RankDeficient { covariate: "tx_height" });
    }

    #[test]
    fn too_few_records() {
        let recs: Vec<_> = grid(&truth()).into_iter().take(5).collect();
        assert!(matches!(
            fit_lsp_model(&recs, Lsp::Ds, FixedMask::NONE, &LspDescriptor::default()),
            Err(Error::InsufficientData { .. })
        ));
    }
}
