//! Multipath synthesis from one LSP realization, and rendering of the
//! resulting path set as a tapped delay line or a frequency response.

mod angles;
mod polarization;
mod response;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::analysis::rms_ds;
use crate::error::{Error, Result};
use crate::fields::LspRealization;
use crate::params::{Lsp, ScenarioTable};

pub use angles::{draw_angles, AngleDraw, Direction, Spreads, AZIMUTH_CAP_DEG, ELEVATION_CAP_DEG};
pub use polarization::{apply_polarization, Coupling};
pub use response::{freq_response, taps_for_window, to_cir, Cir, FrequencyResponse};

pub const DEFAULT_PATHS: usize = 25;
/// Standard deviation of the per-path lognormal ripple on scattered powers.
pub const POWER_RIPPLE_DB: f64 = 3.0;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Default receiver height, meters.
pub const DEFAULT_RX_HEIGHT_M: f64 = 2.0;

/// One multipath realization.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    /// Excess delays in seconds, ascending, first entry 0.
    pub delays: Vec<f64>,
    /// Linear power fractions summing to 1.
    pub powers: Vec<f64>,
    pub aod: Vec<f64>,
    pub aoa: Vec<f64>,
    pub eod: Vec<f64>,
    pub eoa: Vec<f64>,
    /// Per-path cross-polarization ratio in dB; infinite means no depolarization.
    pub xpr_db: Vec<f64>,
    /// Initial phases of the VV, VH, HV and HH coupling entries, radians.
    pub phases: Vec<[f64; 4]>,
    /// Path 0 is a deterministic direct (or LOS-like specular) component.
    pub los_flag: bool,
    /// Absolute delay of path 0, seconds. Excess delay plus this offset
    /// gives the absolute arrival time.
    pub delay_offset: f64,
}

impl PathSet {
    /// Path set with every path arriving from `dir` and no depolarization.
    pub fn new(delays: Vec<f64>, powers: Vec<f64>, dir: Direction, los_flag: bool) -> Result<Self> {
        let n = delays.len();
        let ps = PathSet {
            aod: vec![dir.aod; n],
            aoa: vec![dir.aoa; n],
            eod: vec![dir.eod; n],
            eoa: vec![dir.eoa; n],
            xpr_db: vec![f64::INFINITY; n],
            phases: vec![[0.0; 4]; n],
            delays,
            powers,
            los_flag,
            delay_offset: 0.0,
        };
        ps.validate()?;
        Ok(ps)
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.delays.len();
        if n == 0 {
            return Err(Error::Empty("path set"));
        }
        let lens = [
            self.powers.len(),
            self.aod.len(),
            self.aoa.len(),
            self.eod.len(),
            self.eoa.len(),
            self.xpr_db.len(),
            self.phases.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::InvalidArgument(format!(
                "path set columns have mismatched lengths: {n} delays vs {lens:?}"
            )));
        }
        if self.delays[0] != 0.0 {
            return Err(Error::InvalidArgument(format!("first delay must be 0, got {}", self.delays[0])));
        }
        if self.delays.windows(2).any(|w| !(w[1] >= w[0])) || !self.delays[n - 1].is_finite() {
            return Err(Error::InvalidArgument("delays must be finite and ascending".into()));
        }
        if self.powers.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("powers must be finite and non-negative".into()));
        }
        let total = self.total_power();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("powers must sum to 1, got {total}")));
        }
        let az_ok = |a: &f64| *a > -180.0 && *a <= 180.0;
        let el_ok = |e: &f64| (-90.0..=90.0).contains(e);
        if !self.aod.iter().chain(&self.aoa).all(az_ok) {
            return Err(Error::InvalidArgument("azimuths must lie in (-180, 180]".into()));
        }
        if !self.eod.iter().chain(&self.eoa).all(el_ok) {
            return Err(Error::InvalidArgument("elevations must lie in [-90, 90]".into()));
        }
        if self.xpr_db.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidArgument("XPR must not be NaN".into()));
        }
        Ok(())
    }

    /// Polarization coupling of path `i`.
    pub fn coupling(&self, i: usize) -> Coupling {
        if i == 0 && self.los_flag {
            Coupling::identity()
        } else {
            Coupling::new(self.xpr_db[i], self.phases[i])
        }
    }
}

fn check_delay_args(ds: f64, r_tau: f64) -> Result<()> {
    if !(ds > 0.0) || !ds.is_finite() {
        return Err(Error::Domain { name: "delay spread", value: ds });
    }
    if !(r_tau > 1.0) || !r_tau.is_finite() {
        return Err(Error::InvalidArgument(format!("delay factor must exceed 1, got {r_tau}")));
    }
    Ok(())
}

/// Exponential path delays from explicit uniforms in (0, 1]: sorted and
/// shifted so the first delay is 0.
pub fn delays_from_uniforms(uniforms: &[f64], ds: f64, r_tau: f64) -> Result<Vec<f64>> {
    check_delay_args(ds, r_tau)?;
    if uniforms.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 paths, got {}",
            uniforms.len()
        )));
    }
    if let Some(u) = uniforms.iter().find(|u| !(**u > 0.0 && **u <= 1.0)) {
        return Err(Error::InvalidArgument(format!("uniform draw {u} outside (0, 1]")));
    }
    let mut tau: Vec<f64> = uniforms.iter().map(|u| -r_tau * ds * u.ln()).collect();
    tau.sort_by(f64::total_cmp);
    let first = tau[0];
    tau.iter_mut().for_each(|t| *t -= first);
    Ok(tau)
}

pub fn draw_delays<R: Rng + ?Sized>(n_paths: usize, ds: f64, r_tau: f64, rng: &mut R) -> Result<Vec<f64>> {
    let u: Vec<f64> = (0..n_paths).map(|_| 1.0 - rng.gen::<f64>()).collect();
    delays_from_uniforms(&u, ds, r_tau)
}

/// Path powers for `delays`. Scattered paths decay exponentially with
/// lognormal ripple; with a K-factor, path 0 is scaled so its power over
/// the summed scattered power equals K.
pub fn draw_powers<R: Rng + ?Sized>(
    delays: &[f64],
    ds: f64,
    r_tau: f64,
    kf_db: Option<f64>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_delay_args(ds, r_tau)?;
    if delays.is_empty() {
        return Err(Error::Empty("delays"));
    }
    if let Some(k) = kf_db {
        if !k.is_finite() {
            return Err(Error::InvalidArgument(format!("K-factor must be finite, got {k}")));
        }
        if delays.len() < 2 {
            return Err(Error::InvalidArgument("a K-factor needs at least one scattered path".into()));
        }
    }
    let ripple = Normal::new(0.0, POWER_RIPPLE_DB).expect("positive std");
    let decay = (r_tau - 1.0) / (r_tau * ds);
    let mut p: Vec<f64> = delays
        .iter()
        .map(|t| (-t * decay).exp() * 10f64.powf(-ripple.sample(rng) / 10.0))
        .collect();
    if let Some(k) = kf_db {
        let scattered: f64 = p[1..].iter().sum();
        p[0] = 10f64.powf(k / 10.0) * scattered;
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

/// Link geometry needed beyond the LSP realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub n_paths: usize,
    pub rx_height_m: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            n_paths: DEFAULT_PATHS,
            rx_height_m: DEFAULT_RX_HEIGHT_M,
        }
    }
}

/// Output of [`generate_paths`].
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub paths: PathSet,
    /// Per dimension (AOD, AOA, EOD, EOA): the spread target was clamped or
    /// could not be reached.
    pub angle_limited: [bool; 4],
}

/// Geometric direction of the direct path between TX and RX.
pub fn los_direction(lsp: &LspRealization, rx_height_m: f64) -> Direction {
    let d = lsp.covariates.d_2d();
    let dh = rx_height_m - lsp.covariates.h_tx();
    let eod = dh.atan2(d).to_degrees();
    Direction {
        aod: lsp.tx.azimuth_to(lsp.rx),
        aoa: lsp.rx.azimuth_to(lsp.tx),
        eod,
        eoa: -eod,
    }
}

/// Full path synthesis for one link.
///
/// Delays are rescaled after the powers are set so the realized RMS delay
/// spread matches the target exactly; a strong direct path otherwise
/// compresses it.
pub fn generate_paths<R: Rng + ?Sized>(
    lsp: &LspRealization,
    table: &ScenarioTable,
    config: PathConfig,
    rng: &mut R,
) -> Result<Generated> {
    if !(config.rx_height_m > 0.0) {
        return Err(Error::Domain { name: "RX height", value: config.rx_height_m });
    }
    let ds = 10f64.powf(lsp.ds_log10s);
    let mut delays = draw_delays(config.n_paths, ds, table.r_tau, rng)?;
    let powers = draw_powers(&delays, ds, table.r_tau, lsp.kf_db, rng)?;
    let los_flag = lsp.kf_db.is_some();

    let probe = PathSet::new(delays.clone(), powers.clone(), Direction::default(), los_flag)?;
    let realized = rms_ds(&probe)?;
    if realized > 0.0 {
        let scale = ds / realized;
        delays.iter_mut().for_each(|t| *t *= scale);
    }

    let dir = los_direction(lsp, config.rx_height_m);
    let targets = Spreads {
        asd: 10f64.powf(lsp.asd_log10deg),
        asa: 10f64.powf(lsp.asa_log10deg),
        esd: 10f64.powf(lsp.esd_log10deg),
        esa: 10f64.powf(lsp.esa_log10deg),
    };
    let angles = draw_angles(&powers, targets, dir, los_flag, rng)?;

    let mut paths = PathSet::new(delays, powers, dir, los_flag)?;
    paths.aod = angles.aod;
    paths.aoa = angles.aoa;
    paths.eod = angles.eod;
    paths.eoa = angles.eoa;
    let d_3d = lsp.covariates.d_2d().hypot(config.rx_height_m - lsp.covariates.h_tx());
    paths.delay_offset = d_3d / SPEED_OF_LIGHT;

    let xpr_std = table.lsp(Lsp::Xpr).std(&lsp.covariates);
    apply_polarization(&mut paths, lsp.xpr_db, xpr_std, rng)?;
    paths.validate()?;
    Ok(Generated {
        paths,
        angle_limited: angles.limited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_uniforms_give_zero_delays() {
        let d = delays_from_uniforms(&[1.0; 5], 50e-9, 2.7).unwrap();
        assert_eq!(d, vec![0.0; 5]);
    }

    #[test]
    fn delays_are_sorted_and_start_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = draw_delays(25, 40e-9, 2.7, &mut rng).unwrap();
        assert_eq!(d[0], 0.0);
        assert!(d.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn delay_spread_of_raw_draws_is_r_tau_times_ds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = draw_delays(100_000, 80e-9, 3.0, &mut rng).unwrap();
        let n = d.len() as f64;
        let m = d.iter().sum::<f64>() / n;
        let sd = (d.iter().map(|t| (t - m).powi(2)).sum::<f64>() / n).sqrt();
        assert!((sd / 240e-9 - 1.0).abs() < 0.02, "{sd}");
    }

    #[test]
    fn invalid_delay_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(draw_delays(1, 1e-8, 2.0, &mut rng).is_err());
        assert!(draw_delays(5, 0.0, 2.0, &mut rng).is_err());
        assert!(draw_delays(5, 1e-8, 1.0, &mut rng).is_err());
        assert!(delays_from_uniforms(&[0.0, 0.5], 1e-8, 2.0).is_err());
    }

    #[test]
    fn zero_db_k_factor_gives_half_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = draw_delays(25, 30e-9, 2.7, &mut rng).unwrap();
        let p = draw_powers(&d, 30e-9, 2.7, Some(0.0), &mut rng).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let k = draw_powers(&d, 30e-9, 2.7, Some(10.0), &mut rng).unwrap();
        assert!((k[0] / k[1..].iter().sum::<f64>() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn absent_k_factor_leaves_path_zero_unforced() {
        // Without ripple the absent-KF profile is a pure exponential, so
        // path 0 carries exactly its decay weight. With ripple it is one
        // draw among many; check it is not pinned to any share.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = draw_delays(25, 30e-9, 2.7, &mut rng).unwrap();
        let shares: Vec<f64> = (0..20)
            .map(|_| draw_powers(&d, 30e-9, 2.7, None, &mut rng).unwrap()[0])
            .collect();
        let spread = shares.iter().cloned().fold(f64::MIN, f64::max)
            - shares.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 0.01);
        assert!(shares.iter().all(|s| *s < 0.9));
    }
}
