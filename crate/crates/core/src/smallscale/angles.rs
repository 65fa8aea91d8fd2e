use rand::Rng;
use rand_distr::StandardNormal;

use crate::analysis::{rms_angular_spread, wrap_azimuth, AngleKind};
use crate::error::{Error, Result};

/// Largest realizable azimuth spread target, degrees.
pub const AZIMUTH_CAP_DEG: f64 = 104.0;
/// Largest realizable elevation spread target, degrees.
pub const ELEVATION_CAP_DEG: f64 = 52.0;

const REL_TOL: f64 = 1e-6;

/// Departure and arrival direction, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Direction {
    pub aod: f64,
    pub aoa: f64,
    pub eod: f64,
    pub eoa: f64,
}

/// Target RMS angular spreads, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spreads {
    pub asd: f64,
    pub asa: f64,
    pub esd: f64,
    pub esa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleDraw {
    pub aod: Vec<f64>,
    pub aoa: Vec<f64>,
    pub eod: Vec<f64>,
    pub eoa: Vec<f64>,
    /// Per dimension (AOD, AOA, EOD, EOA): target clamped to its cap or not
    /// reachable with these powers.
    pub limited: [bool; 4],
}

/// Per-path angles around `center` whose power-weighted RMS spread equals
/// each target. Offsets are Gaussian, scaled affinely, then wrapped
/// (azimuth) or clipped (elevation); if that moves the spread, the scale is
/// refined by bisection. With `anchor_first`, path 0 sits exactly on
/// `center`.
pub fn draw_angles<R: Rng + ?Sized>(
    powers: &[f64],
    targets: Spreads,
    center: Direction,
    anchor_first: bool,
    rng: &mut R,
) -> Result<AngleDraw> {
    if powers.is_empty() {
        return Err(Error::Empty("powers"));
    }
    let dims = [
        (targets.asd, center.aod, AngleKind::Azimuth),
        (targets.asa, center.aoa, AngleKind::Azimuth),
        (targets.esd, center.eod, AngleKind::Elevation),
        (targets.esa, center.eoa, AngleKind::Elevation),
    ];
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(4);
    let mut limited = [false; 4];
    for (slot, (target, c, kind)) in dims.into_iter().enumerate() {
        if !(target >= 0.0) || !target.is_finite() {
            return Err(Error::Domain { name: "angular spread target", value: target });
        }
        let z: Vec<f64> = (0..powers.len())
            .map(|i| if i == 0 && anchor_first { 0.0 } else { rng.sample(StandardNormal) })
            .collect();
        let (angles, lim) = scale_to_target(powers, &z, c, target, kind)?;
        out.push(angles);
        limited[slot] = lim;
    }
    let eoa = out.pop().unwrap();
    let eod = out.pop().unwrap();
    let aoa = out.pop().unwrap();
    let aod = out.pop().unwrap();
    Ok(AngleDraw { aod, aoa, eod, eoa, limited })
}

fn render(z: &[f64], center: f64, scale: f64, kind: AngleKind) -> Vec<f64> {
    z.iter()
        .map(|v| {
            let a = center + scale * v;
            match kind {
                AngleKind::Azimuth => wrap_azimuth(a),
                AngleKind::Elevation => a.clamp(-90.0, 90.0),
            }
        })
        .collect()
}

fn scale_to_target(
    powers: &[f64],
    z: &[f64],
    center: f64,
    target: f64,
    kind: AngleKind,
) -> Result<(Vec<f64>, bool)> {
    let cap = match kind {
        AngleKind::Azimuth => AZIMUTH_CAP_DEG,
        AngleKind::Elevation => ELEVATION_CAP_DEG,
    };
    let mut limited = target > cap;
    let target = target.min(cap);
    let flat = render(z, center, 0.0, kind);
    if target == 0.0 {
        return Ok((flat, limited));
    }
    // Linear (unwrapped) weighted spread of the unit offsets.
    let unit = weighted_std(z, powers);
    if unit == 0.0 {
        return Ok((flat, true));
    }
    let spread = |s: f64| rms_angular_spread(&render(z, center, s, kind), powers, kind);
    let s0 = target / unit;
    let g0 = spread(s0)?;
    if (g0 / target - 1.0).abs() <= REL_TOL {
        return Ok((render(z, center, s0, kind), limited));
    }

    let (mut lo, mut hi) = (0.0, s0);
    let mut best = (s0, g0);
    if g0 < target {
        let mut found = false;
        for _ in 0..40 {
            lo = hi;
            hi *= 2.0;
            let g = spread(hi)?;
            if g > best.1 {
                best = (hi, g);
            }
            if g >= target {
                found = true;
                break;
            }
        }
        if !found {
            return Ok((render(z, center, best.0, kind), true));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = spread(mid)?;
        if (g / target - 1.0).abs() <= REL_TOL * 0.1 {
            return Ok((render(z, center, mid, kind), limited));
        }
        if g < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Non-monotone region: the target is straddled by a jump in the
    // wrapped estimator and cannot be hit exactly.
    limited = true;
    Ok((render(z, center, 0.5 * (lo + hi), kind), limited))
}

fn weighted_std(x: &[f64], w: &[f64]) -> f64 {
    let tw: f64 = w.iter().sum();
    let m = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / tw;
    let v = x.iter().zip(w).map(|(a, b)| b * (a - m).powi(2)).sum::<f64>() / tw;
    v.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn equal_powers(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn single_path_sits_on_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dir = Direction { aod: 10.0, aoa: -170.0, eod: 5.0, eoa: -5.0 };
        let spreads = Spreads { asd: 20.0, asa: 30.0, esd: 5.0, esa: 8.0 };
        let a = draw_angles(&[1.0], spreads, dir, false, &mut rng).unwrap();
        assert_eq!(a.aod, vec![10.0]);
        assert_eq!(a.aoa, vec![-170.0]);
        assert_eq!(a.eod, vec![5.0]);
        assert_eq!(a.eoa, vec![-5.0]);
    }

    #[test]
    fn targets_are_hit_for_typical_spreads() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p: Vec<f64> = (0..25).map(|i| (-(i as f64) / 8.0).exp()).collect();
        let total: f64 = p.iter().sum();
        let p: Vec<f64> = p.iter().map(|x| x / total).collect();
        let asa = 10f64.powf(1.69);
        let spreads = Spreads { asd: 45.0, asa, esd: 40.0, esa: 43.0 };
        let dir = Direction { aod: 175.0, aoa: -5.0, eod: -6.0, eoa: 6.0 };
        for _ in 0..50 {
            let a = draw_angles(&p, spreads, dir, true, &mut rng).unwrap();
            let got = rms_angular_spread(&a.aoa, &p, AngleKind::Azimuth).unwrap();
            assert!((got - asa).abs() < 0.5, "{got}");
            assert!((got / asa - 1.0).abs() <= 1e-6 || a.limited[1]);
            let esd = rms_angular_spread(&a.eod, &p, AngleKind::Elevation).unwrap();
            assert!((esd / 40.0 - 1.0).abs() <= 1e-6 || a.limited[2]);
            assert_eq!(a.aod[0], 175.0);
            assert!(a.aod.iter().all(|x| *x > -180.0 && *x <= 180.0));
            assert!(a.eod.iter().all(|x| (-90.0..=90.0).contains(x)));
        }
    }

    #[test]
    fn oversized_targets_are_clamped_and_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spreads = Spreads { asd: 150.0, asa: 10.0, esd: 80.0, esa: 10.0 };
        let a = draw_angles(&equal_powers(25), spreads, Direction::default(), false, &mut rng).unwrap();
        assert_eq!(a.limited, [true, false, true, false]);
        let asd = rms_angular_spread(&a.aod, &equal_powers(25), AngleKind::Azimuth).unwrap();
        assert!(asd <= AZIMUTH_CAP_DEG + 1e-6);
    }
}
