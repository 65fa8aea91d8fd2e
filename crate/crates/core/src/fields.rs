//! Spatially consistent, cross-correlated LSP fields.
//!
//! Each stochastic LSP gets its own standard-normal random field over the
//! floor plane with exponential autocorrelation `exp(-d / lambda)`. Fields
//! are sums of sinusoids whose wave vectors are drawn from the matching 2D
//! spectral density, so any position evaluates exactly. The eight
//! independent field values at a point are then coupled through a square
//! root of the scenario's cross-correlation matrix.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::params::{Covariates, CorrMatrix, Lsp, ScenarioTable};

/// Radial strata of the spectral sampling.
const RADIAL_STRATA: usize = 128;
/// Evenly spaced propagation directions per radial stratum.
const DIRECTIONS: usize = 8;
pub const SINUSOIDS_PER_FIELD: usize = RADIAL_STRATA * DIRECTIONS;

/// Eigenvalue floor applied when repairing an indefinite correlation matrix.
pub const EIGENVALUE_FLOOR: f64 = 1e-6;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// A point on the floor plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Azimuth of `other` seen from `self`, degrees in (-180, 180].
    pub fn azimuth_to(self, other: Point) -> f64 {
        (other.y - self.y).atan2(other.x - self.x).to_degrees()
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }
}

/// Result of [`nearest_correlation`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRepair {
    pub matrix: DMatrix<f64>,
    /// Smallest eigenvalue of the input.
    pub min_eigenvalue: f64,
    /// Largest absolute entry change introduced by the repair.
    pub max_change: f64,
    pub repaired: bool,
}

fn validate_correlation(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "correlation matrix must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    for i in 0..m.nrows() {
        if (m[(i, i)] - 1.0).abs() > SYMMETRY_TOL {
            return Err(Error::Invalid {
                key: format!("[{i},{i}]"),
                reason: format!("diagonal must be 1, got {}", m[(i, i)]),
            });
        }
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if !(v.abs() <= 1.0) {
                return Err(Error::Invalid {
                    key: format!("[{i},{j}]"),
                    reason: format!("entry must lie in [-1, 1], got {v}"),
                });
            }
            if (v - m[(j, i)]).abs() > SYMMETRY_TOL {
                return Err(Error::Invalid {
                    key: format!("[{i},{j}]"),
                    reason: "matrix is not symmetric".into(),
                });
            }
        }
    }
    Ok(())
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Projects a correlation matrix onto the positive-semidefinite cone by
/// clipping eigenvalues at [`EIGENVALUE_FLOOR`] and rescaling to a unit
/// diagonal. PSD input is returned unchanged.
pub fn nearest_correlation(m: &DMatrix<f64>) -> Result<CorrelationRepair> {
    validate_correlation(m)?;
    let eig = SymmetricEigen::new(m.clone());
    let min_eig = eig.eigenvalues.min();
    if min_eig >= -PSD_TOL {
        return Ok(CorrelationRepair {
            matrix: m.clone(),
            min_eigenvalue: min_eig,
            max_change: 0.0,
            repaired: false,
        });
    }
    let clipped = eig.eigenvalues.map(|l| l.max(EIGENVALUE_FLOOR));
    let v = &eig.eigenvectors;
    let mut r = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    let n = r.nrows();
    let scale: Vec<f64> = (0..n).map(|i| r[(i, i)].sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] /= scale[i] * scale[j];
        }
    }
    // Exact symmetry and unit diagonal after the floating-point rescale.
    for i in 0..n {
        r[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (r[(i, j)] + r[(j, i)]);
            r[(i, j)] = avg;
            r[(j, i)] = avg;
        }
    }
    let max_change = (&r - m).abs().max();
    Ok(CorrelationRepair {
        matrix: r,
        min_eigenvalue: min_eig,
        max_change,
        repaired: true,
    })
}

/// Lower-triangular factor `M` with `M * M^T = corr`.
///
/// Cholesky with semidefinite pivots: a vanishing pivot zeroes its column,
/// so boundary matrices such as `[[1, -1], [-1, 1]]` factor exactly.
pub fn sqrt_factor(corr: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    validate_correlation(corr)?;
    let n = corr.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let d = corr[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if d < -PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min_eigenvalue(corr),
            });
        }
        if d <= PSD_TOL {
            for i in (j + 1)..n {
                let rest = corr[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
                if rest.abs() > 1e-8 {
                    return Err(Error::NotPsd {
                        min_eigenvalue: min_eigenvalue(corr),
                    });
                }
            }
            continue;
        }
        let pivot = d.sqrt();
        l[(j, j)] = pivot;
        for i in (j + 1)..n {
            let rest = corr[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = rest / pivot;
        }
    }
    Ok(l)
}

pub(crate) fn corr_to_dmatrix(m: &CorrMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(8, 8, |i, j| m[i][j])
}

/// One standard-normal spatial field.
#[derive(Debug, Clone)]
enum SpatialField {
    SumOfSinusoids {
        wave: Vec<[f64; 2]>,
        phase: Vec<f64>,
        amplitude: f64,
    },
    /// Zero decorrelation distance: independent at every distinct point.
    White { key: u64 },
}

impl SpatialField {
    fn new(lambda_m: f64, rng: &mut ChaCha8Rng) -> Self {
        if lambda_m <= 0.0 {
            return SpatialField::White { key: rng.gen() };
        }
        let mut wave = Vec::with_capacity(SINUSOIDS_PER_FIELD);
        let mut phase = Vec::with_capacity(SINUSOIDS_PER_FIELD);
        for stratum in 0..RADIAL_STRATA {
            // Radial CDF of the 2D exponential-ACF spectrum:
            // F(k) = 1 - 1 / sqrt(1 + (k lambda)^2).
            let u = (stratum as f64 + rng.gen::<f64>()) / RADIAL_STRATA as f64;
            let k = ((1.0 - u).powi(-2) - 1.0).sqrt() / lambda_m;
            let base: f64 = rng.gen::<f64>() * PI;
            for a in 0..DIRECTIONS {
                let theta = base + PI * a as f64 / DIRECTIONS as f64;
                wave.push([k * theta.cos(), k * theta.sin()]);
                phase.push(rng.gen::<f64>() * 2.0 * PI);
            }
        }
        SpatialField::SumOfSinusoids {
            wave,
            phase,
            amplitude: (2.0 / SINUSOIDS_PER_FIELD as f64).sqrt(),
        }
    }

    fn sample(&self, p: Point) -> f64 {
        match self {
            SpatialField::SumOfSinusoids {
                wave,
                phase,
                amplitude,
            } => {
                let sum: f64 = wave
                    .iter()
                    .zip(phase)
                    .map(|(k, ph)| (k[0] * p.x + k[1] * p.y + ph).cos())
                    .sum();
                amplitude * sum
            }
            SpatialField::White { key } => {
                let h = splitmix(splitmix(key ^ p.x.to_bits()) ^ p.y.to_bits());
                ChaCha8Rng::seed_from_u64(h).sample(StandardNormal)
            }
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-LSP spatial fields plus the cross-correlation coupling of one
/// scenario table. Immutable after construction.
#[derive(Debug, Clone)]
pub struct CorrelatedFieldSet {
    seed: u64,
    fields: Vec<SpatialField>,
    mix: [[f64; 8]; 8],
    repair: CorrelationRepair,
}

impl CorrelatedFieldSet {
    pub fn new(table: &ScenarioTable, seed: u64) -> Result<Self> {
        let repair = nearest_correlation(&corr_to_dmatrix(&table.cross_corr))?;
        let factor = sqrt_factor(&repair.matrix)?;
        let mut mix = [[0.0; 8]; 8];
        for (i, row) in mix.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = factor[(i, j)];
            }
        }
        let fields = Lsp::CORRELATED
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64 + 1);
                let lambda = table.get(l).map_or(0.0, |d| d.lambda_m);
                SpatialField::new(lambda, &mut rng)
            })
            .collect();
        Ok(CorrelatedFieldSet {
            seed,
            fields,
            mix,
            repair,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mix(&self) -> &[[f64; 8]; 8] {
        &self.mix
    }

    /// The PSD correlation matrix the fields are coupled with.
    pub fn repair(&self) -> &CorrelationRepair {
        &self.repair
    }

    /// Uncoupled standard-normal value of one LSP's field.
    pub fn sample_standard_field(&self, lsp: Lsp, p: Point) -> Result<f64> {
        let idx = lsp
            .corr_index()
            .ok_or_else(|| Error::InvalidArgument(format!("{lsp} has no random field")))?;
        Ok(self.fields[idx].sample(p))
    }

    /// All eight uncoupled field values at `p`, in [`Lsp::CORRELATED`] order.
    pub fn standard_values(&self, p: Point) -> [f64; 8] {
        std::array::from_fn(|i| self.fields[i].sample(p))
    }

    /// Field values at `p` after cross-correlation coupling.
    pub fn mixed_values(&self, p: Point) -> [f64; 8] {
        self.couple(&self.standard_values(p))
    }

    /// Applies the cross-correlation factor to independent normals.
    pub fn couple(&self, z: &[f64; 8]) -> [f64; 8] {
        std::array::from_fn(|i| (0..=i).map(|j| self.mix[i][j] * z[j]).sum())
    }

    /// LSP realization for a link whose RX sits at `rx`. The fields are
    /// anchored to the RX position; `tx` only sets the 2D distance.
    pub fn lsp_at(
        &self,
        table: &ScenarioTable,
        rx: Point,
        tx: Point,
        f_ghz: f64,
        h_tx: f64,
    ) -> Result<LspRealization> {
        LspRealization::from_draws(table, &self.mixed_values(rx), rx, tx, f_ghz, h_tx)
    }
}

/// Values of all LSPs for one link, in native units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LspRealization {
    pub rx: Point,
    pub tx: Point,
    pub covariates: Covariates,
    /// Deterministic path loss; total loss is `pl_db + sf_db`.
    pub pl_db: f64,
    pub sf_db: f64,
    /// `None` when the scenario has no K-factor (Rayleigh fading).
    pub kf_db: Option<f64>,
    pub ds_log10s: f64,
    pub asd_log10deg: f64,
    pub asa_log10deg: f64,
    pub esd_log10deg: f64,
    pub esa_log10deg: f64,
    pub xpr_db: f64,
}

impl LspRealization {
    /// Maps coupled standard-normal draws (in [`Lsp::CORRELATED`] order)
    /// through the scenario's LSP model.
    pub fn from_draws(
        table: &ScenarioTable,
        draws: &[f64; 8],
        rx: Point,
        tx: Point,
        f_ghz: f64,
        h_tx: f64,
    ) -> Result<Self> {
        let d_2d = rx.distance(tx);
        if !(d_2d > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "RX and TX coincide in the floor plane ({rx:?}); the 2D distance must be positive"
            )));
        }
        let cov = Covariates::new(f_ghz, d_2d, h_tx)?;
        let value = |l: Lsp| -> Option<f64> {
            let x = draws[l.corr_index().expect("stochastic LSP")];
            table.get(l).map(|d| d.realize(&cov, x))
        };
        Ok(LspRealization {
            rx,
            tx,
            covariates: cov,
            pl_db: table.path_loss(f_ghz, d_2d)?,
            sf_db: value(Lsp::Sf).expect("SF present"),
            kf_db: value(Lsp::Kf),
            ds_log10s: value(Lsp::Ds).expect("DS present"),
            asd_log10deg: value(Lsp::Asd).expect("ASD present"),
            asa_log10deg: value(Lsp::Asa).expect("ASA present"),
            esd_log10deg: value(Lsp::Esd).expect("ESD present"),
            esa_log10deg: value(Lsp::Esa).expect("ESA present"),
            xpr_db: value(Lsp::Xpr).expect("XPR present"),
        })
    }

    pub fn value(&self, lsp: Lsp) -> Option<f64> {
        Some(match lsp {
            Lsp::Pl => self.pl_db,
            Lsp::Sf => self.sf_db,
            Lsp::Kf => return self.kf_db,
            Lsp::Ds => self.ds_log10s,
            Lsp::Asa => self.asa_log10deg,
            Lsp::Asd => self.asd_log10deg,
            Lsp::Esa => self.esa_log10deg,
            Lsp::Esd => self.esd_log10deg,
            Lsp::Xpr => self.xpr_db,
        })
    }
}
