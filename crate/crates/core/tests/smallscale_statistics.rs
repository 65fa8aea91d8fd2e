use ichan_core::analysis::{kf_est, rms_angular_spread, rms_ds, xpr_est, AngleKind};
use ichan_core::fields::LspRealization;
use ichan_core::params::{builtin_scenario, Condition, Covariates, Lsp, ScenarioId, ScenarioTable};
use ichan_core::smallscale::{
    apply_polarization, draw_angles, draw_delays, draw_powers, freq_response, generate_paths, taps_for_window,
    to_cir, Direction, PathConfig, PathSet, Spreads,
};
use ichan_core::Point;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 10_000;

fn link(cond: Condition) -> (ScenarioTable, LspRealization) {
    let t = builtin_scenario(ScenarioId::IndustrialCombined, cond);
    let r = LspRealization::from_draws(&t, &[0.0; 8], Point::new(50.0, 0.0), Point::default(), 5.4, 2.0).unwrap();
    (t, r)
}

#[derive(Default)]
struct Means {
    ds: f64,
    kf: f64,
    share: f64,
    spreads: [f64; 4],
}

fn run(cond: Condition, seed: u64) -> (LspRealization, Means) {
    let (t, lsp) = link(cond);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Means::default();
    for _ in 0..N {
        let p = generate_paths(&lsp, &t, PathConfig::default(), &mut rng).unwrap().paths;
        assert!((p.total_power() - 1.0).abs() <= 1e-9);
        assert_eq!(p.delays[0], 0.0);
        assert!(p.delays.windows(2).all(|w| w[1] >= w[0]));
        m.ds += rms_ds(&p).unwrap();
        let k = kf_est(&p, p.delay_offset).unwrap();
        m.kf += k;
        let lin = 10f64.powf(k / 10.0);
        m.share += lin / (1.0 + lin);
        let angles = [(&p.aod, AngleKind::Azimuth), (&p.aoa, AngleKind::Azimuth), (&p.eod, AngleKind::Elevation), (&p.eoa, AngleKind::Elevation)];
        for (acc, (a, kind)) in m.spreads.iter_mut().zip(angles) {
            *acc += rms_angular_spread(a, &p.powers, kind).unwrap();
        }
    }
    let n = N as f64;
    m.ds /= n;
    m.kf /= n;
    m.share /= n;
    m.spreads.iter_mut().for_each(|s| *s /= n);
    (lsp, m)
}

#[test]
fn generated_paths_reproduce_their_targets() {
    for cond in [Condition::Los, Condition::Nlos] {
        let (lsp, m) = run(cond, 11);
        let ds = 10f64.powf(lsp.ds_log10s);
        assert!((m.ds / ds - 1.0).abs() <= 0.1, "{cond} DS {} vs {ds}", m.ds);
        let kf = lsp.kf_db.unwrap();
        assert!((m.kf - kf).abs() <= 1.0, "{cond} KF {} vs {kf}", m.kf);
        let targets = [lsp.asd_log10deg, lsp.asa_log10deg, lsp.esd_log10deg, lsp.esa_log10deg].map(|v| 10f64.powf(v));
        for (got, want) in m.spreads.iter().zip(targets) {
            assert!((got / want - 1.0).abs() <= 0.1, "{cond} spread {got} vs {want}");
        }
    }
}

#[test]
fn nlos_los_like_path_share() {
    let (_, m) = run(Condition::Nlos, 12);
    assert!((0.15..=0.5).contains(&m.share), "share {}", m.share);
}

#[test]
fn xpr_recovered_from_many_paths() {
    let (t, lsp) = link(Condition::Nlos);
    assert_eq!(t.lsp(Lsp::Xpr).mu, 14.4);
    let cov = Covariates::new(5.4, 50.0, 1.0).unwrap();
    let xpr = t.lsp(Lsp::Xpr).mean(&cov);
    let std = t.lsp(Lsp::Xpr).std(&lsp.covariates);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let ds = 10f64.powf(lsp.ds_log10s);
    let d = draw_delays(10_000, ds, t.r_tau, &mut rng).unwrap();
    let p = draw_powers(&d, ds, t.r_tau, None, &mut rng).unwrap();
    let mut paths = PathSet::new(d, p, Direction::default(), false).unwrap();
    apply_polarization(&mut paths, xpr, std, &mut rng).unwrap();
    let est = xpr_est(&paths).unwrap();
    assert!((est - 14.4).abs() <= 0.2, "{est}");
}

#[test]
fn combined_los_asa_target_is_hit() {
    let target = 10f64.powf(1.69);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let d = draw_delays(25, 50e-9, 2.7, &mut rng).unwrap();
    let p = draw_powers(&d, 50e-9, 2.7, Some(0.0), &mut rng).unwrap();
    let spreads = Spreads { asd: 20.0, asa: target, esd: 5.0, esa: 5.0 };
    let a = draw_angles(&p, spreads, Direction::default(), true, &mut rng).unwrap();
    let got = rms_angular_spread(&a.aoa, &p, AngleKind::Azimuth).unwrap();
    assert!((got - 49.0).abs() <= 0.5, "{got}");
}

#[test]
fn cir_of_generated_paths() {
    let (t, lsp) = link(Condition::Los);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let bw = 200e6;
    let n_taps = taps_for_window(4.2e-6, bw);
    assert_eq!(n_taps, 840);
    for _ in 0..20 {
        let p = generate_paths(&lsp, &t, PathConfig::default(), &mut rng).unwrap().paths;
        let cir = to_cir(&p, bw, n_taps).unwrap();
        let h = freq_response(&p, 5.4e9, n_taps, bw).unwrap();
        assert!((cir.energy() - h.mean_power()).abs() / cir.energy() <= 1e-6);
    }
}
