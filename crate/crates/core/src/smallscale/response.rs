use std::f64::consts::PI;

use num_complex::Complex64;

use super::PathSet;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tapped delay line at tap spacing `1 / bandwidth_hz`, one complex gain
/// per polarization entry (VV, VH, HV, HH) and tap.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    pub bandwidth_hz: f64,
    pub taps: Vec<[Complex64; 4]>,
    /// Taps needed to hold the longest path delay.
    pub support_taps: usize,
    /// Energy in taps past `support_taps`: sidelobes and wrapped precursors
    /// of the band-limited kernel.
    pub energy_beyond_support: f64,
}

impl Cir {
    pub fn energy(&self) -> f64 {
        self.taps.iter().flatten().map(|g| g.norm_sqr()).sum()
    }

    pub fn tap_energy(&self, k: usize) -> f64 {
        self.taps[k].iter().map(|g| g.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub freqs_hz: Vec<f64>,
    pub gains: Vec<[Complex64; 4]>,
}

impl FrequencyResponse {
    /// Mean of `|H|^2` over bins, summed over polarization entries.
    pub fn mean_power(&self) -> f64 {
        let total: f64 = self.gains.iter().flatten().map(|g| g.norm_sqr()).sum();
        total / self.gains.len() as f64
    }
}

/// Minimum number of taps spanning `window_s` at `bandwidth_hz`.
pub fn taps_for_window(window_s: f64, bandwidth_hz: f64) -> usize {
    (window_s * bandwidth_hz - 1e-9).ceil().max(0.0) as usize
}

/// First bin index of the `n`-point symmetric bin set.
fn first_bin(n: usize) -> i64 {
    -((n / 2) as i64)
}

fn path_gains(paths: &PathSet) -> Vec<[Complex64; 4]> {
    (0..paths.len())
        .map(|i| {
            let amp = paths.powers[i].sqrt();
            paths.coupling(i).0.map(|c| c * amp)
        })
        .collect()
}

/// Periodic band-limited interpolation kernel: the inverse DFT of a flat
/// spectrum over the symmetric bin set, evaluated at fractional offset `x`.
fn dirichlet(x: f64, n: usize) -> Complex64 {
    let nf = n as f64;
    let phase = Complex64::from_polar(1.0, PI * x * (2 * first_bin(n) + n as i64 - 1) as f64 / nf);
    let den = (PI * x / nf).sin();
    if den.abs() < 1e-9 {
        let sum: Complex64 = (0..n as i64)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * (first_bin(n) + m) as f64 * x / nf))
            .sum();
        return sum / nf;
    }
    phase * ((PI * x).sin() / (nf * den))
}

/// Renders the path set as `n_taps` taps. Each path is placed with the
/// periodic band-limited kernel, so a path on the tap grid lands in one tap
/// and the tap energy of a single path is exactly its power.
pub fn to_cir(paths: &PathSet, bandwidth_hz: f64, n_taps: usize) -> Result<Cir> {
    paths.validate()?;
    if !(bandwidth_hz > 0.0) || !bandwidth_hz.is_finite() {
        return Err(Error::Domain { name: "bandwidth", value: bandwidth_hz });
    }
    let max_delay = *paths.delays.last().expect("validated non-empty");
    let support = (max_delay * bandwidth_hz + 1e-9).floor() as usize + 1;
    if n_taps < support {
        return Err(Error::CirTooShort { n_taps, required: support });
    }
    let gains = path_gains(paths);
    let mut taps = vec![[ZERO; 4]; n_taps];
    for (tau, g) in paths.delays.iter().zip(&gains) {
        let pos = tau * bandwidth_hz;
        for (k, tap) in taps.iter_mut().enumerate() {
            let w = dirichlet(k as f64 - pos, n_taps);
            for (t, gi) in tap.iter_mut().zip(g) {
                *t += gi * w;
            }
        }
    }
    let energy_beyond_support = taps[support..]
        .iter()
        .flatten()
        .map(|g| g.norm_sqr())
        .sum();
    Ok(Cir {
        bandwidth_hz,
        taps,
        support_taps: support,
        energy_beyond_support,
    })
}

/// Frequency response on `n_bins` bins spaced `bandwidth_hz / n_bins`
/// around `f_center_hz`. Gains are equivalent baseband: the phase of each
/// path depends on the offset from the center only, matching [`to_cir`]
/// bin for bin when `n_bins` equals the tap count.
pub fn freq_response(paths: &PathSet, f_center_hz: f64, n_bins: usize, bandwidth_hz: f64) -> Result<FrequencyResponse> {
    paths.validate()?;
    if n_bins == 0 {
        return Err(Error::InvalidArgument("need at least one frequency bin".into()));
    }
    if !(bandwidth_hz > 0.0) || !bandwidth_hz.is_finite() {
        return Err(Error::Domain { name: "bandwidth", value: bandwidth_hz });
    }
    let gains = path_gains(paths);
    let spacing = bandwidth_hz / n_bins as f64;
    let offsets: Vec<f64> = (0..n_bins as i64)
        .map(|m| (first_bin(n_bins) + m) as f64 * spacing)
        .collect();
    let response = offsets
        .iter()
        .map(|f| {
            let mut h = [ZERO; 4];
            for (tau, g) in paths.delays.iter().zip(&gains) {
                let rot = Complex64::from_polar(1.0, -2.0 * PI * f * tau);
                for (hi, gi) in h.iter_mut().zip(g) {
                    *hi += gi * rot;
                }
            }
            h
        })
        .collect();
    Ok(FrequencyResponse {
        freqs_hz: offsets.iter().map(|f| f_center_hz + f).collect(),
        gains: response,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smallscale::{apply_polarization, Direction};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(delay: f64) -> PathSet {
        let mut p = PathSet::new(vec![0.0], vec![1.0], Direction::default(), false).unwrap();
        p.delays[0] = delay;
        p
    }

    #[test]
    fn window_tap_count() {
        assert_eq!(taps_for_window(4.2e-6, 200e6), 840);
        assert_eq!(taps_for_window(1e-6, 100e6), 100);
    }

    #[test]
    fn on_grid_path_fills_one_tap() {
        for n in [16, 17] {
            let cir = to_cir(&single(0.0), 100e6, n).unwrap();
            assert!((cir.tap_energy(0) - 1.0).abs() < 1e-12);
            assert!((cir.energy() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fractional_delay_conserves_energy() {
        // Two paths so the second sits 1.5 taps late.
        let bw = 100e6;
        let mut p = PathSet::new(vec![0.0, 1.5 / bw], vec![0.0, 1.0], Direction::default(), false).unwrap();
        p.xpr_db = vec![f64::INFINITY; 2];
        for n in [64, 65] {
            let cir = to_cir(&p, bw, n).unwrap();
            assert!((cir.energy() - 1.0).abs() < 1e-3, "{}", cir.energy());
            assert!(cir.tap_energy(1) > 0.3 && cir.tap_energy(2) > 0.3);
        }
    }

    #[test]
    fn too_few_taps_is_an_error() {
        let p = PathSet::new(vec![0.0, 1e-6], vec![0.5, 0.5], Direction::default(), false).unwrap();
        assert_eq!(
            to_cir(&p, 100e6, 50),
            Err(Error::CirTooShort { n_taps: 50, required: 101 })
        );
    }

    #[test]
    fn unit_path_has_flat_response() {
        let h = freq_response(&single(0.0), 5.4e9, 32, 100e6).unwrap();
        for g in &h.gains {
            let p: f64 = g.iter().map(|c| c.norm_sqr()).sum();
            assert!((p - 1.0).abs() < 1e-12);
        }
        assert!((h.freqs_hz[16] - 5.4e9).abs() < 1e-3);
    }

    #[test]
    fn two_ray_null() {
        let dt = 10e-9;
        let p = PathSet::new(vec![0.0, dt], vec![0.5, 0.5], Direction::default(), false).unwrap();
        // Bins every 1 MHz; the null sits at 1 / (2 dt) = 50 MHz.
        let h = freq_response(&p, 0.0, 200, 200e6).unwrap();
        let idx = h.freqs_hz.iter().position(|f| (f - 50e6).abs() < 1.0).unwrap();
        assert!(h.gains[idx][0].norm() < 1e-12);
        assert!(h.gains[100][0].norm() > 0.5);
    }

    #[test]
    fn parseval_between_cir_and_response() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let delays = vec![0.0, 3.3e-9, 17.1e-9, 40.0e-9, 41.7e-9];
        let powers = vec![0.4, 0.2, 0.2, 0.1, 0.1];
        let mut p = PathSet::new(delays, powers, Direction::default(), true).unwrap();
        apply_polarization(&mut p, 9.0, 3.0, &mut rng).unwrap();
        for n in [128, 129] {
            let cir = to_cir(&p, 200e6, n).unwrap();
            let h = freq_response(&p, 5.4e9, n, 200e6).unwrap();
            let rel = (cir.energy() - h.mean_power()).abs() / cir.energy();
            assert!(rel < 1e-9, "{rel}");
        }
    }
}
