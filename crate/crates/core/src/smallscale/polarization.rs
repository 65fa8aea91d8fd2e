use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::PathSet;
use crate::error::{Error, Result};

/// 2x2 polarization coupling of one path, entries ordered VV, VH, HV, HH
/// (receive, transmit). Normalized to unit Frobenius norm so the four
/// entries together carry the path power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling(pub [Complex64; 4]);

impl Coupling {
    /// No depolarization and no phase rotation.
    pub fn identity() -> Self {
        let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Coupling([c, z, z, c])
    }

    /// Coupling with co-/cross-polar power ratio `10^(xpr_db/10)`.
    pub fn new(xpr_db: f64, phases: [f64; 4]) -> Self {
        let (co, cross) = if xpr_db == f64::INFINITY {
            (FRAC_1_SQRT_2, 0.0)
        } else {
            let k = 10f64.powf(xpr_db / 10.0);
            ((k / (2.0 * (1.0 + k))).sqrt(), (1.0 / (2.0 * (1.0 + k))).sqrt())
        };
        let amp = [co, cross, cross, co];
        Coupling(std::array::from_fn(|i| Complex64::from_polar(amp[i], phases[i])))
    }

    pub fn co_power(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[3].norm_sqr()
    }

    pub fn cross_power(&self) -> f64 {
        self.0[1].norm_sqr() + self.0[2].norm_sqr()
    }
}

/// Draws per-path XPR values from `N(xpr_db, xpr_std)` and uniform coupling
/// phases. A direct path (path 0 with `los_flag`) stays undepolarized.
pub fn apply_polarization<R: Rng + ?Sized>(
    paths: &mut PathSet,
    xpr_db: f64,
    xpr_std: f64,
    rng: &mut R,
) -> Result<()> {
    paths.validate()?;
    if xpr_db.is_nan() || !(xpr_std >= 0.0) || !xpr_std.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "XPR mean must not be NaN and its std must be finite and >= 0, got {xpr_db} / {xpr_std}"
        )));
    }
    for i in 0..paths.len() {
        if i == 0 && paths.los_flag {
            paths.xpr_db[0] = f64::INFINITY;
            paths.phases[0] = [0.0; 4];
            continue;
        }
        let x: f64 = rng.sample(StandardNormal);
        paths.xpr_db[i] = xpr_db + xpr_std * x;
        paths.phases[i] = std::array::from_fn(|_| rng.gen::<f64>() * TAU);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smallscale::Direction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn paths(los: bool) -> PathSet {
        PathSet::new(vec![0.0, 1e-8, 2e-8], vec![0.5, 0.3, 0.2], Direction::default(), los).unwrap()
    }

    #[test]
    fn infinite_xpr_is_pure_co_polar() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = paths(false);
        apply_polarization(&mut p, f64::INFINITY, 3.0, &mut rng).unwrap();
        for i in 0..p.len() {
            let c = p.coupling(i);
            assert_eq!(c.cross_power(), 0.0);
            assert!((c.co_power() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_db_xpr_balances_co_and_cross() {
        let c = Coupling::new(0.0, [0.3, 1.0, 2.0, 4.0]);
        assert!((c.co_power() - c.cross_power()).abs() < 1e-12);
        assert!((c.co_power() + c.cross_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_ratio_matches_xpr() {
        let c = Coupling::new(15.45, [0.0; 4]);
        assert!((10.0 * (c.co_power() / c.cross_power()).log10() - 15.45).abs() < 1e-9);
    }

    #[test]
    fn direct_path_keeps_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut p = paths(true);
        apply_polarization(&mut p, 10.0, 2.0, &mut rng).unwrap();
        assert_eq!(p.coupling(0), Coupling::identity());
        assert!(p.xpr_db[1].is_finite());
        assert_ne!(p.phases[1], [0.0; 4]);
    }
}
