//! Self-check suite run by `ichan validate`.
//!
//! Every check reads its scenario tables through a [`TableSource`], so a
//! test can hand in a corrupted table and watch the named check fail.

use std::fmt;

use ichan_core::analysis::{
    estimate_cross_corr, fit_lsp_model, kf_est, rms_angular_spread, rms_ds, wrap_azimuth, AngleKind, LspValues,
    SampleRecord,
};
use ichan_core::fields::{CorrelatedFieldSet, LspRealization};
use ichan_core::params::{
    builtin_scenario, eval_mean, Coefficient, Condition, Covariates, Lsp, ScenarioFile, ScenarioId,
    ScenarioTable,
};
use ichan_core::smallscale::{generate_paths, Direction, PathConfig, PathSet};
use ichan_core::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::commands::{fit, generate_cir, generate_lsp, CirOptions};
use crate::track::{TrackSpec, TxPlacement};

pub type TableSource<'a> = dyn Fn(ScenarioId, Condition) -> ScenarioTable + 'a;

pub fn builtin_tables(id: ScenarioId, condition: Condition) -> ScenarioTable {
    builtin_scenario(id, condition)
}

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub measured: String,
    pub tolerance: String,
    pub passed: bool,
    /// Per-item breakdown, printed indented below the verdict line.
    pub details: Vec<String>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{verdict}] {:>2} {}: measured {}; tolerance {}",
            self.id, self.name, self.measured, self.tolerance
        )?;
        for d in &self.details {
            write!(f, "\n       {d}")?;
        }
        Ok(())
    }
}

/// Collects `(label, deviation, tolerance)` checks into one result.
struct Checks {
    items: Vec<(String, f64, f64)>,
}

impl Checks {
    fn new() -> Self {
        Checks { items: Vec::new() }
    }

    fn add(&mut self, label: impl Into<String>, got: f64, want: f64, tol: f64) {
        self.items.push((format!("{} = {got:.4} (want {want:.4})", label.into()), got - want, tol));
    }

    fn finish(self, id: u8, name: &'static str, tolerance: impl Into<String>) -> CriterionResult {
        let passed = self.items.iter().all(|(_, dev, tol)| dev.abs() <= *tol);
        let worst = self
            .items
            .iter()
            .max_by(|a, b| score(a).total_cmp(&score(b)))
            .map_or_else(|| "no checks".to_string(), |(l, d, _)| format!("worst {l}, off by {:.4}", d.abs()));
        let details = self
            .items
            .iter()
            .map(|(l, d, t)| {
                let mark = if d.abs() <= *t { "ok  " } else { "MISS" };
                format!("{mark} {l}")
            })
            .collect();
        CriterionResult { id, name, measured: worst, tolerance: tolerance.into(), passed, details }
    }
}

/// Deviation in units of tolerance; NaN ranks worst.
fn score((_, dev, tol): &(String, f64, f64)) -> f64 {
    match dev.abs() {
        d if d.is_nan() => f64::INFINITY,
        0.0 => 0.0,
        d => d / tol,
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Widely separated points, far beyond every decorrelation distance.
fn anchors(n: usize) -> Vec<Point> {
    let side = (n as f64).sqrt().ceil() as usize;
    (0..n)
        .map(|i| Point::new((i % side) as f64 * 1000.0, (i / side) as f64 * 1000.0))
        .collect()
}

const CONDITIONS: [Condition; 2] = [Condition::Los, Condition::Nlos];

fn path_loss_anchors(tables: &TableSource) -> CriterionResult {
    let mut c = Checks::new();
    let anchors = [
        (ScenarioId::IndustrialCombined, Condition::Los, 78.0),
        (ScenarioId::IndustrialCombined, Condition::Nlos, 83.9),
        (ScenarioId::Office38901, Condition::Los, 72.6),
        (ScenarioId::Office38901, Condition::Nlos, 95.9),
    ];
    for (id, cond, want) in anchors {
        let got = tables(id, cond).path_loss(3.5, 50.0).unwrap_or(f64::NAN);
        c.add(format!("{id} {cond} PL(3.5 GHz, 50 m)"), got, want, 0.15);
    }
    c.finish(1, "path-loss anchors", "±0.15 dB")
}

fn k_factor_anchors(tables: &TableSource) -> CriterionResult {
    let mut c = Checks::new();
    let anchors = [(ScenarioId::Setup1, -3.3), (ScenarioId::Setup2, 2.3), (ScenarioId::Setup3, 1.7)];
    for (id, want) in anchors {
        let t = tables(id, Condition::Los);
        let got = t
            .get(Lsp::Kf)
            .and_then(|d| eval_mean(d, 5.4, 10.0, 2.0).ok())
            .unwrap_or(f64::NAN);
        c.add(format!("{id} LOS KF mean at h = 2 m"), got, want, 0.05);
    }
    c.finish(2, "K-factor anchors", "±0.05 dB")
}

fn frequency_gap(tables: &TableSource) -> CriterionResult {
    let mut desc = *tables(ScenarioId::Setup1, Condition::Los).lsp(Lsp::Pl);
    desc.gamma = 20.0;
    let gap = eval_mean(&desc, 5.4, 50.0, 2.0).unwrap() - eval_mean(&desc, 2.37, 50.0, 2.0).unwrap();
    let mut c = Checks::new();
    c.add("PL(2.37 GHz) - PL(5.4 GHz) loss gap", gap, 7.15, 0.01);
    c.finish(3, "frequency gap", "±0.01 dB")
}

fn d2d_consistency(tables: &TableSource) -> CriterionResult {
    let mut c = Checks::new();
    for cond in CONDITIONS {
        let t = tables(ScenarioId::IndustrialCombined, cond);
        for f in [2.37, 5.4] {
            let asd = eval_mean(t.lsp(Lsp::Asd), f, 1.0, 2.0).unwrap();
            c.add(format!("{cond} {f} GHz ASD(h = 2 m) vs ASA mu"), asd, t.lsp(Lsp::Asa).mu, 0.01);
            let esd = eval_mean(t.lsp(Lsp::Esd), f, 1.0, 2.0).unwrap();
            let esa = eval_mean(t.lsp(Lsp::Esa), f, 1.0, 2.0).unwrap();
            c.add(format!("{cond} {f} GHz ESD(h = 2 m, d = 1 m) vs ESA"), esd, esa, 0.01);
        }
    }
    c.finish(4, "D2D consistency", "±0.01 log10(deg)")
}

fn spatial_consistency(tables: &TableSource) -> CriterionResult {
    const N: usize = 20_000;
    let target = (-1.0f64).exp();
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a);
    let points = anchors(N);
    for cond in CONDITIONS {
        let t = tables(ScenarioId::IndustrialCombined, cond);
        let fields = match CorrelatedFieldSet::new(&t, 2024) {
            Ok(f) => f,
            Err(e) => {
                c.add(format!("{cond} field construction failed: {e}"), f64::NAN, target, 0.05);
                continue;
            }
        };
        for lsp in Lsp::CORRELATED {
            let Some(desc) = t.get(lsp) else { continue };
            let lambda = desc.lambda_m;
            if lambda <= 0.0 {
                continue;
            }
            let (mut a, mut b) = (Vec::with_capacity(N), Vec::with_capacity(N));
            for p in &points {
                let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                let q = Point::new(p.x + lambda * theta.cos(), p.y + lambda * theta.sin());
                a.push(fields.sample_standard_field(lsp, *p).unwrap());
                b.push(fields.sample_standard_field(lsp, q).unwrap());
            }
            c.add(format!("{cond} {lsp} ACF at {lambda} m"), pearson(&a, &b), target, 0.05);
        }
    }
    c.finish(5, "spatial consistency", "e^-1 ±0.05")
}

fn cross_correlation(tables: &TableSource) -> CriterionResult {
    const N: usize = 5_000;
    let mut c = Checks::new();
    for (cond, ds_kf) in [(Condition::Los, -0.7), (Condition::Nlos, -0.6)] {
        let t = tables(ScenarioId::IndustrialCombined, cond);
        let fields = match CorrelatedFieldSet::new(&t, 6) {
            Ok(f) => f,
            Err(e) => {
                c.add(format!("{cond} field construction failed: {e}"), f64::NAN, 0.0, 0.1);
                continue;
            }
        };
        let rows: Vec<[Option<f64>; 8]> = anchors(N)
            .into_iter()
            .map(|p| fields.mixed_values(p).map(Some))
            .collect();
        let est = estimate_cross_corr(&rows).expect("enough rows");
        let target = &fields.repair().matrix;
        let mut worst = (0.0f64, 0, 0);
        for i in 0..8 {
            for j in 0..i {
                let dev = (est.matrix[i][j].unwrap_or(f64::NAN) - target[(i, j)]).abs();
                if !(dev <= worst.0) {
                    worst = (dev, i, j);
                }
            }
        }
        let (i, j) = (worst.1, worst.2);
        c.add(
            format!("{cond} worst pair {}-{}", Lsp::CORRELATED[i], Lsp::CORRELATED[j]),
            est.matrix[i][j].unwrap_or(f64::NAN),
            target[(i, j)],
            0.1,
        );
        c.add(format!("{cond} DS-KF"), est.get(Lsp::Ds, Lsp::Kf).unwrap_or(f64::NAN), ds_kf, 0.1);
    }
    c.finish(6, "cross-correlation fidelity", "±0.1")
}

/// Independent realizations over the measurement campaign's covariate
/// ranges, drawn straight from the model.
fn round_trip_records(table: &ScenarioTable, n: usize, rng: &mut ChaCha8Rng) -> Vec<SampleRecord> {
    (0..n)
        .map(|i| {
            let f = [2.37, 5.4][i % 2];
            let h = [2.0, 5.0, 8.0][(i / 2) % 3];
            let d = 5.0 + 145.0 * rng.gen::<f64>();
            let cov = Covariates::new(f, d, h).expect("positive covariates");
            let mut values = LspValues::default();
            for lsp in Lsp::ALL {
                let v = table.get(lsp).map(|desc| desc.realize(&cov, rng.sample(StandardNormal)));
                values.set(lsp, v);
            }
            SampleRecord { position: Point::new(d, 0.0), covariates: cov, condition: table.condition, values }
        })
        .collect()
}

fn round_trip(tables: &TableSource) -> CriterionResult {
    const N: usize = 5_000;
    let limits = [
        (Coefficient::Mu, 0.05),
        (Coefficient::Gamma, 0.1),
        (Coefficient::Epsilon, 0.1),
        (Coefficient::Zeta, 0.1),
        (Coefficient::Sigma, 0.02),
    ];
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for cond in CONDITIONS {
        let t = tables(ScenarioId::IndustrialCombined, cond);
        let records = round_trip_records(&t, N, &mut rng);
        for lsp in Lsp::ALL {
            let Some(truth) = t.get(lsp) else { continue };
            let mask = t.fixed(lsp);
            match fit_lsp_model(&records, lsp, mask, truth) {
                Ok(fit) => {
                    for (coef, tol) in limits {
                        if !mask.contains(coef) {
                            let label = format!("{cond} {lsp} {}", coef.as_str());
                            c.add(label, fit.descriptor.get(coef), truth.get(coef), tol);
                        }
                    }
                }
                Err(e) => c.add(format!("{cond} {lsp} fit failed: {e}"), f64::NAN, 0.0, 0.0),
            }
        }
    }
    c.finish(7, "round-trip fitting", "mu ±0.05, gamma/epsilon/zeta ±0.1, sigma ±0.02")
}

fn small_scale(tables: &TableSource) -> CriterionResult {
    const N: usize = 10_000;
    let mut c = Checks::new();
    for cond in CONDITIONS {
        let t = tables(ScenarioId::IndustrialCombined, cond);
        let lsp = match LspRealization::from_draws(&t, &[0.0; 8], Point::new(50.0, 0.0), Point::default(), 5.4, 2.0)
        {
            Ok(l) => l,
            Err(e) => {
                c.add(format!("{cond} realization failed: {e}"), f64::NAN, 0.0, 0.0);
                continue;
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8 + cond as u64);
        let (mut ds, mut kf, mut share, mut worst_norm) = (0.0, 0.0, 0.0, 0.0f64);
        let mut spreads = [0.0; 4];
        for _ in 0..N {
            let p = match generate_paths(&lsp, &t, PathConfig::default(), &mut rng) {
                Ok(g) => g.paths,
                Err(e) => {
                    c.add(format!("{cond} path generation failed: {e}"), f64::NAN, 0.0, 0.0);
                    break;
                }
            };
            worst_norm = worst_norm.max((p.total_power() - 1.0).abs());
            ds += rms_ds(&p).unwrap();
            let k = kf_est(&p, p.delay_offset).unwrap();
            kf += k;
            let lin = 10f64.powf(k / 10.0);
            share += lin / (1.0 + lin);
            let angles = [
                (&p.aod, AngleKind::Azimuth),
                (&p.aoa, AngleKind::Azimuth),
                (&p.eod, AngleKind::Elevation),
                (&p.eoa, AngleKind::Elevation),
            ];
            for (acc, (a, kind)) in spreads.iter_mut().zip(angles) {
                *acc += rms_angular_spread(a, &p.powers, kind).unwrap();
            }
        }
        let n = N as f64;
        let target_ds = 10f64.powf(lsp.ds_log10s);
        c.add(format!("{cond} mean DS / target"), ds / n / target_ds, 1.0, 0.1);
        if let Some(target_kf) = lsp.kf_db {
            c.add(format!("{cond} mean KF estimate [dB]"), kf / n, target_kf, 1.0);
        }
        let targets = [lsp.asd_log10deg, lsp.asa_log10deg, lsp.esd_log10deg, lsp.esa_log10deg];
        for (name, (got, want)) in ["ASD", "ASA", "ESD", "ESA"].iter().zip(spreads.iter().zip(targets)) {
            c.add(format!("{cond} mean {name} / target"), got / n / 10f64.powf(want), 1.0, 0.1);
        }
        c.add(format!("{cond} max |total power - 1|"), worst_norm, 0.0, 1e-9);
        if cond == Condition::Nlos {
            // Band [0.15, 0.5] expressed as centre and half-width.
            c.add("NLOS LOS-like power share", share / n, 0.325, 0.175);
        }
    }
    c.finish(8, "small-scale consistency", "DS and spreads ±10%, KF ±1 dB, power 1e-9, NLOS share [0.15, 0.5]")
}

fn estimator_suite() -> CriterionResult {
    let mut c = Checks::new();
    let tau = 25e-9;
    let two = PathSet::new(vec![0.0, 2.0 * tau], vec![0.5, 0.5], Direction::default(), true).unwrap();
    c.add("two-path DS [ns]", rms_ds(&two).unwrap() * 1e9, tau * 1e9, 0.0);
    let w = [0.5, 0.5];
    c.add(
        "spread of -30/+30 deg",
        rms_angular_spread(&[-30.0, 30.0], &w, AngleKind::Azimuth).unwrap(),
        30.0,
        1e-12,
    );
    c.add(
        "spread of 179/-179 deg",
        rms_angular_spread(&[179.0, -179.0], &w, AngleKind::Azimuth).unwrap(),
        1.0,
        1e-9,
    );
    c.add("KF of equal direct and scattered power [dB]", kf_est(&two, 0.0).unwrap(), 0.0, 0.0);
    c.add("wrap of -180 deg", wrap_azimuth(-180.0), 180.0, 0.0);
    c.finish(9, "estimator unit suite", "exact (rounding only)")
}

/// Runs every command twice in memory and compares the outputs byte for
/// byte.
fn determinism(tables: &TableSource) -> CriterionResult {
    let t = tables(ScenarioId::IndustrialCombined, Condition::Los);
    let spec = |f_ghz: f64| TrackSpec {
        waypoints: vec![Point::new(5.0, 0.0), Point::new(65.0, 0.0), Point::new(65.0, 40.0)],
        sample_spacing_m: 1.0,
        tx: TxPlacement::Fixed(Point::new(0.0, 20.0)),
        tx_height_m: 5.0,
        f_ghz,
        condition: Condition::Los,
        seed: 2024,
    };
    let config = ScenarioFile {
        name: "industrial_combined".into(),
        tables: vec![t.clone(), tables(ScenarioId::IndustrialCombined, Condition::Nlos)],
    };
    let run = || -> crate::Result<[String; 3]> {
        let low = generate_lsp(&t, &spec(2.37))?;
        let high = generate_lsp(&t, &spec(5.4))?;
        let mut short = spec(5.4);
        short.waypoints.truncate(2);
        short.sample_spacing_m = 20.0;
        let opts = CirOptions { bandwidth_hz: 200e6, n_paths: 25, rx_height_m: 2.0 };
        let cir = generate_cir(&t, &short, opts)?;
        let out = fit(&[("low.csv".into(), low.clone()), ("high.csv".into(), high.clone())], &config, None)?;
        Ok([low + &high, cir, out.fragment + &out.report])
    };
    let mut c = Checks::new();
    match (run(), run()) {
        (Ok(a), Ok(b)) => {
            for (name, (x, y)) in ["generate-lsp", "generate-cir", "fit"].iter().zip(a.iter().zip(&b)) {
                let differing = x.lines().zip(y.lines()).filter(|(p, q)| p != q).count()
                    + x.lines().count().abs_diff(y.lines().count());
                c.add(format!("{name} differing lines"), differing as f64, 0.0, 0.0);
            }
        }
        (Err(e), _) | (_, Err(e)) => c.add(format!("command failed: {e}"), f64::NAN, 0.0, 0.0),
    }
    c.finish(10, "determinism", "byte-identical")
}

pub fn run_criterion(id: u8, tables: &TableSource) -> Option<CriterionResult> {
    Some(match id {
        1 => path_loss_anchors(tables),
        2 => k_factor_anchors(tables),
        3 => frequency_gap(tables),
        4 => d2d_consistency(tables),
        5 => spatial_consistency(tables),
        6 => cross_correlation(tables),
        7 => round_trip(tables),
        8 => small_scale(tables),
        9 => estimator_suite(),
        10 => determinism(tables),
        _ => return None,
    })
}

pub fn run_all(tables: &TableSource) -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|id| run_criterion(*id, tables)).collect()
}

pub fn report(results: &[CriterionResult]) -> String {
    let mut out = format!("ichan validate (version {})\n", env!("CARGO_PKG_VERSION"));
    for r in results {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    out.push_str(&format!("{} passed, {failed} failed\n", results.len() - failed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupted_table_fails_the_named_check() {
        let corrupt = |id: ScenarioId, c: Condition| {
            let mut t = builtin_tables(id, c);
            if id == ScenarioId::IndustrialCombined && c == Condition::Los {
                t.get_mut(Lsp::Pl).unwrap().mu += 1.0;
            }
            t
        };
        let r = run_criterion(1, &corrupt).unwrap();
        assert!(!r.passed);
        assert!(r.to_string().starts_with("[FAIL]  1 path-loss anchors"));
        assert!(r.details.iter().any(|d| d.starts_with("MISS industrial_combined LOS")));
        assert!(run_criterion(1, &builtin_tables).unwrap().passed);
    }

    #[test]
    fn quick_checks_pass_on_builtin_tables() {
        for id in [1, 2, 3, 4, 9] {
            let r = run_criterion(id, &builtin_tables).unwrap();
            assert!(r.passed, "{r}");
        }
        assert!(run_criterion(11, &builtin_tables).is_none());
    }

    #[test]
    fn round_trip_records_cover_the_campaign_ranges() {
        let t = builtin_tables(ScenarioId::IndustrialCombined, Condition::Nlos);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let recs = round_trip_records(&t, 60, &mut rng);
        assert!(recs.iter().all(|r| (5.0..=150.0).contains(&r.covariates.d_2d())));
        assert!(recs.iter().any(|r| r.covariates.h_tx() == 8.0));
        assert_eq!(recs[0].values.get(Lsp::Kf).is_some(), t.has_kf());
    }
}
