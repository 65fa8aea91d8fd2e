use std::fmt::Write as _;
use std::path::Path;

use ichan_core::analysis::{
    average_intervals, estimate_cross_corr, estimate_decorrelation, fit_lsp_model, standardized_residuals,
    DecorrelationFlag, SampleRecord,
};
use ichan_core::fields::CorrelatedFieldSet;
use ichan_core::params::{
    builtin_scenario, save_scenario, Coefficient, Condition, FixedMask, Lsp, LspDescriptor, ScenarioFile, ScenarioId, ScenarioTable,
};
use ichan_core::smallscale::{generate_paths, taps_for_window, to_cir, PathConfig};
use ichan_core::Error as ModelError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::records::{read_records, write_records, Provenance};
use crate::track::TrackSpec;

/// Delay window every CIR covers at minimum, seconds.
pub const CIR_WINDOW_S: f64 = 4.2e-6;

/// Built-in scenario names, or a path to a scenario file.
pub fn resolve_scenario_file(name: &str) -> Result<ScenarioFile> {
    if let Ok(id) = name.parse::<ScenarioId>() {
        return Ok(ScenarioFile {
            name: id.to_string(),
            tables: vec![builtin_scenario(id, Condition::Los), builtin_scenario(id, Condition::Nlos)],
        });
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "`{name}` is neither a built-in scenario (setup1, setup2, setup3, industrial_combined, office_38901) nor an existing scenario file"
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    ScenarioFile::parse(&text).map_err(|e| CliError::Usage(format!("{name}: {e}")))
}

pub fn resolve_scenario(name: &str, condition: Condition) -> Result<ScenarioTable> {
    let file = resolve_scenario_file(name)?;
    file.get(condition).cloned().map_err(|e| CliError::Usage(e.to_string()))
}

pub fn scenario_hash(table: &ScenarioTable) -> String {
    format!("{:x}", Sha256::digest(save_scenario(table).as_bytes()))
}

fn provenance(command: &'static str, table: &ScenarioTable, seed: u64) -> Provenance {
    Provenance {
        command,
        scenario: format!("{} {}", table.name, table.condition),
        scenario_sha256: scenario_hash(table),
        seed,
    }
}

fn check_condition(table: &ScenarioTable, spec: &TrackSpec) -> Result<()> {
    if table.condition != spec.condition {
        return Err(CliError::Usage(format!(
            "scenario table is {} but the run asks for {}",
            table.condition, spec.condition
        )));
    }
    Ok(())
}

fn spec_error(i: usize, e: ModelError) -> CliError {
    CliError::Usage(format!("sample {i}: {e}"))
}

/// LSP realizations along the track as CSV.
pub fn generate_lsp(table: &ScenarioTable, spec: &TrackSpec) -> Result<String> {
    check_condition(table, spec)?;
    let fields = CorrelatedFieldSet::new(table, spec.seed)?;
    let records = spec
        .samples()?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let r = fields
                .lsp_at(table, s.rx, s.tx, spec.f_ghz, spec.tx_height_m)
                .map_err(|e| spec_error(i, e))?;
            Ok(SampleRecord::from_realization(&r, spec.condition))
        })
        .collect::<Result<Vec<_>>>()?;
    write_records(&provenance("generate-lsp", table, spec.seed), &records)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirOptions {
    pub bandwidth_hz: f64,
    pub n_paths: usize,
    pub rx_height_m: f64,
}

/// Path sets and tapped delay lines along the track, one block per sample.
///
/// Taps of each block are scaled to unit energy; `energy_scale` records
/// the applied amplitude factor.
pub fn generate_cir(table: &ScenarioTable, spec: &TrackSpec, opts: CirOptions) -> Result<String> {
    check_condition(table, spec)?;
    if !(opts.bandwidth_hz > 0.0) || !opts.bandwidth_hz.is_finite() {
        return Err(CliError::Usage(format!("--bandwidth-hz must be positive, got {}", opts.bandwidth_hz)));
    }
    if opts.n_paths < 2 {
        return Err(CliError::Usage(format!("--paths must be at least 2, got {}", opts.n_paths)));
    }
    if !(opts.rx_height_m > 0.0) {
        return Err(CliError::Usage(format!("--rx-height must be positive, got {}", opts.rx_height_m)));
    }
    let fields = CorrelatedFieldSet::new(table, spec.seed)?;
    let samples = spec.samples()?;
    let window_taps = taps_for_window(CIR_WINDOW_S, opts.bandwidth_hz);

    let mut out = provenance("generate-cir", table, spec.seed).header();
    writeln!(out, "# units: delay s, power linear, angles deg, xpr dB, phase rad, tap gain complex re im").unwrap();
    writeln!(out, "# polarization order: VV VH HV HH (receive, transmit)").unwrap();
    writeln!(out, "bandwidth_hz = {}", opts.bandwidth_hz).unwrap();
    writeln!(out, "paths = {}", opts.n_paths).unwrap();
    writeln!(out, "rx_height_m = {}", opts.rx_height_m).unwrap();
    writeln!(out, "snapshots = {}", samples.len()).unwrap();

    let config = PathConfig { n_paths: opts.n_paths, rx_height_m: opts.rx_height_m };
    for (i, s) in samples.iter().enumerate() {
        let lsp = fields
            .lsp_at(table, s.rx, s.tx, spec.f_ghz, spec.tx_height_m)
            .map_err(|e| spec_error(i, e))?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream((1 << 32) + i as u64);
        let generated = generate_paths(&lsp, table, config, &mut rng)?;
        let p = &generated.paths;
        let support = (p.delays.last().copied().unwrap_or(0.0) * opts.bandwidth_hz).floor() as usize + 1;
        let cir = to_cir(p, opts.bandwidth_hz, window_taps.max(support))?;
        let scale = 1.0 / cir.energy().sqrt();

        writeln!(out, "\n[snapshot {i}]").unwrap();
        writeln!(out, "rx = {} {}", s.rx.x, s.rx.y).unwrap();
        writeln!(out, "tx = {} {}", s.tx.x, s.tx.y).unwrap();
        writeln!(out, "d_2d = {}", lsp.covariates.d_2d()).unwrap();
        writeln!(out, "pl_db = {}", lsp.pl_db).unwrap();
        writeln!(out, "sf_db = {}", lsp.sf_db).unwrap();
        writeln!(out, "delay_offset_s = {}", p.delay_offset).unwrap();
        writeln!(out, "los_flag = {}", p.los_flag).unwrap();
        let limited: Vec<&str> = ["aod", "aoa", "eod", "eoa"]
            .iter()
            .zip(generated.angle_limited)
            .filter_map(|(n, l)| l.then_some(*n))
            .collect();
        if !limited.is_empty() {
            writeln!(out, "angle_spread_limited = {}", limited.join(" ")).unwrap();
        }
        writeln!(out, "# path delay power aod aoa eod eoa xpr phase_vv phase_vh phase_hv phase_hh").unwrap();
        for k in 0..p.len() {
            let ph = p.phases[k];
            writeln!(
                out,
                "path {k} {} {} {} {} {} {} {} {} {} {} {}",
                p.delays[k], p.powers[k], p.aod[k], p.aoa[k], p.eod[k], p.eoa[k], p.xpr_db[k], ph[0], ph[1], ph[2], ph[3]
            )
            .unwrap();
        }
        writeln!(out, "n_taps = {}", cir.taps.len()).unwrap();
        writeln!(out, "energy_scale = {scale}").unwrap();
        writeln!(out, "# tap vv_re vv_im vh_re vh_im hv_re hv_im hh_re hh_im").unwrap();
        for (k, tap) in cir.taps.iter().enumerate() {
            write!(out, "tap {k}").unwrap();
            for g in tap {
                write!(out, " {} {}", g.re * scale, g.im * scale).unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Output of [`fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    /// Scenario file text with the fitted tables.
    pub fragment: String,
    pub report: String,
    /// Rank deficiencies and other per-LSP failures; the fragment keeps the
    /// configured values for those LSPs.
    pub problems: Vec<String>,
}

/// Splits records into tracks wherever consecutive positions jump by more
/// than five times the median step.
pub fn split_tracks(records: Vec<SampleRecord>) -> Vec<Vec<SampleRecord>> {
    if records.len() < 3 {
        return vec![records];
    }
    let mut steps: Vec<f64> = records.windows(2).map(|w| w[0].position.distance(w[1].position)).collect();
    let all = steps.clone();
    steps.sort_by(f64::total_cmp);
    let limit = 5.0 * steps[steps.len() / 2];
    let mut tracks = vec![vec![records[0]]];
    for (r, step) in records[1..].iter().zip(all) {
        if step > limit {
            tracks.push(Vec::new());
        }
        tracks.last_mut().unwrap().push(*r);
    }
    tracks
}

/// Fits every LSP present in the inputs, per propagation condition.
///
/// `config` supplies which coefficients are held fixed (and their values)
/// and the delay factor, which the records cannot determine.
pub fn fit(inputs: &[(String, String)], config: &ScenarioFile, average_m: Option<f64>) -> Result<FitOutcome> {
    if inputs.is_empty() {
        return Err(CliError::Usage("fit needs at least one --input".into()));
    }
    let mut tracks: Vec<(String, Vec<SampleRecord>)> = Vec::new();
    for (name, text) in inputs {
        let records = read_records(text).map_err(|e| match e {
            CliError::Schema { row, column, message } => CliError::Schema {
                row,
                column: format!("{name}: {column}"),
                message,
            },
            other => CliError::Failed(format!("{name}: {other}")),
        })?;
        for cond in [Condition::Los, Condition::Nlos] {
            let subset: Vec<SampleRecord> = records.iter().filter(|r| r.condition == cond).copied().collect();
            if subset.is_empty() {
                continue;
            }
            for (k, t) in split_tracks(subset).into_iter().enumerate() {
                let t = match average_m {
                    Some(m) => average_intervals(&t, m)?,
                    None => t,
                };
                tracks.push((format!("{name}#{cond}{k}"), t));
            }
        }
    }

    let mut report = String::new();
    let mut problems = Vec::new();
    let mut tables = Vec::new();
    writeln!(report, "ichan fit report (version {})", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(report, "fixed-coefficient config: {}", config.name).unwrap();
    if let Some(m) = average_m {
        writeln!(report, "averaging interval: {m} m").unwrap();
    }
    for cond in [Condition::Los, Condition::Nlos] {
        let cond_tracks: Vec<&(String, Vec<SampleRecord>)> =
            tracks.iter().filter(|(_, t)| t.first().map(|r| r.condition) == Some(cond)).collect();
        if cond_tracks.is_empty() {
            continue;
        }
        let base = config
            .get(cond)
            .map_err(|e| CliError::Usage(format!("fixed-coefficient config: {e}")))?;
        let all: Vec<SampleRecord> = cond_tracks.iter().flat_map(|(_, t)| t.iter().copied()).collect();
        let table = fit_condition(cond, &cond_tracks, &all, base, &mut report, &mut problems);
        tables.push(table);
    }
    let fragment = ScenarioFile { name: format!("{}_fit", config.name), tables }.to_text();
    Ok(FitOutcome { fragment, report, problems })
}

fn fit_condition(
    cond: Condition,
    tracks: &[&(String, Vec<SampleRecord>)],
    all: &[SampleRecord],
    base: &ScenarioTable,
    report: &mut String,
    problems: &mut Vec<String>,
) -> ScenarioTable {
    let mut table = base.clone();
    writeln!(report, "\n[{cond}] {} records in {} tracks", all.len(), tracks.len()).unwrap();
    for lsp in Lsp::ALL {
        let n = all.iter().filter(|r| r.values.get(lsp).is_some_and(f64::is_finite)).count();
        if n == 0 {
            if lsp == Lsp::Kf {
                table.set_lsp(Lsp::Kf, None);
                writeln!(report, "{lsp}: no data, absent").unwrap();
            } else {
                writeln!(report, "{lsp}: no data, kept configured values").unwrap();
            }
            continue;
        }
        // An LSP the config lacks is fitted with every coefficient free.
        let (start, base_mask) = match base.get(lsp) {
            Some(d) => (*d, base.fixed(lsp)),
            None => (LspDescriptor::default(), FixedMask::NONE),
        };
        let mask = base_mask.with(Coefficient::Lambda);
        match fit_lsp_model(all, lsp, mask, &start) {
            Ok(fit) => {
                let d = fit.descriptor;
                let e = fit.std_errors;
                writeln!(
                    report,
                    "{lsp}: n={n} mu={:.4}±{:.4} gamma={:.4}±{:.4} epsilon={:.4}±{:.4} zeta={:.4}±{:.4} sigma={:.4}±{:.4} delta={:.4}±{:.4} kappa={:.4}±{:.4}",
                    d.mu, e.mu, d.gamma, e.gamma, d.epsilon, e.epsilon, d.zeta, e.zeta, d.sigma, e.sigma, d.delta, e.delta, d.kappa, e.kappa
                )
                .unwrap();
                table.set_fixed(lsp, base_mask);
                table.set_lsp(lsp, Some(d));
            }
            Err(err) => {
                writeln!(report, "{lsp}: FAILED: {err}").unwrap();
                problems.push(format!("{cond} {lsp}: {err}"));
                continue;
            }
        }
        if lsp == Lsp::Pl {
            continue;
        }
        let model = *table.lsp(lsp);
        let mut lambdas = Vec::new();
        for (name, t) in tracks {
            match estimate_decorrelation(t, lsp, &model) {
                Ok(dc) => {
                    let flags: Vec<&str> = dc
                        .flags
                        .iter()
                        .map(|f| match f {
                            DecorrelationFlag::BelowSpacing => "below-spacing",
                            DecorrelationFlag::Divergent => "divergent",
                            DecorrelationFlag::WideConfidence => "wide-confidence",
                        })
                        .collect();
                    writeln!(report, "  {lsp} lambda {name}: {:.3} m [{}]", dc.lambda_m, flags.join(",")).unwrap();
                    if !dc.flags.contains(&DecorrelationFlag::Divergent) {
                        lambdas.push(dc.lambda_m);
                    }
                }
                Err(err) => writeln!(report, "  {lsp} lambda {name}: skipped ({err})").unwrap(),
            }
        }
        if !lambdas.is_empty() {
            lambdas.sort_by(f64::total_cmp);
            let median = lambdas[lambdas.len() / 2];
            table.get_mut(lsp).expect("fitted").lambda_m = median;
            let fixed = table.fixed(lsp).without(Coefficient::Lambda);
            table.set_fixed(lsp, fixed);
        }
    }

    let columns: Vec<Vec<Option<f64>>> = Lsp::CORRELATED
        .iter()
        .map(|l| match table.get(*l) {
            Some(model) => standardized_residuals(all, *l, model),
            None => vec![None; all.len()],
        })
        .collect();
    let rows: Vec<[Option<f64>; 8]> = (0..all.len()).map(|i| std::array::from_fn(|j| columns[j][i])).collect();
    match estimate_cross_corr(&rows) {
        Ok(est) => {
            writeln!(report, "cross-correlation (order DS KF SF ASD ASA ESD ESA XPR):").unwrap();
            for (i, row) in est.matrix.iter().enumerate() {
                let cells: Vec<String> = row
                    .iter()
                    .map(|v| v.map_or_else(|| "   n/a".to_string(), |x| format!("{x:6.3}")))
                    .collect();
                writeln!(report, "  {:<3} {}", Lsp::CORRELATED[i], cells.join(" ")).unwrap();
                for (j, v) in row.iter().enumerate() {
                    table.cross_corr[i][j] = if i == j { 1.0 } else { v.unwrap_or(0.0) };
                }
            }
        }
        Err(err) => writeln!(report, "cross-correlation: kept configured matrix ({err})").unwrap(),
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::TxPlacement;
    use ichan_core::Point;

    fn spec(cond: Condition) -> TrackSpec {
        TrackSpec {
            waypoints: vec![Point::new(10.0, 0.0), Point::new(70.0, 0.0)],
            sample_spacing_m: 1.0,
            tx: TxPlacement::Fixed(Point::new(0.0, 30.0)),
            tx_height_m: 2.0,
            f_ghz: 5.4,
            condition: cond,
            seed: 42,
        }
    }

    #[test]
    fn lsp_csv_has_one_row_per_sample() {
        let t = resolve_scenario("industrial_combined", Condition::Los).unwrap();
        let csv = generate_lsp(&t, &spec(Condition::Los)).unwrap();
        let rows = csv.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(rows, 62);
        assert_eq!(csv, generate_lsp(&t, &spec(Condition::Los)).unwrap());
    }

    #[test]
    fn condition_mismatch_is_a_usage_error() {
        let t = resolve_scenario("industrial_combined", Condition::Los).unwrap();
        assert!(matches!(generate_lsp(&t, &spec(Condition::Nlos)), Err(CliError::Usage(_))));
    }

    #[test]
    fn unknown_scenario_is_a_usage_error() {
        assert!(matches!(resolve_scenario("warehouse", Condition::Los), Err(CliError::Usage(_))));
    }

    #[test]
    fn coincident_tx_and_rx_is_reported() {
        let t = resolve_scenario("industrial_combined", Condition::Los).unwrap();
        let mut s = spec(Condition::Los);
        s.tx = TxPlacement::Fixed(Point::new(10.0, 0.0));
        match generate_lsp(&t, &s) {
            Err(CliError::Usage(m)) => assert!(m.starts_with("sample 0")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tracks_split_at_jumps() {
        let t = resolve_scenario("industrial_combined", Condition::Los).unwrap();
        let fs = CorrelatedFieldSet::new(&t, 1).unwrap();
        let recs: Vec<SampleRecord> = (0..20)
            .map(|i| {
                let x = if i < 10 { i as f64 } else { 100.0 + i as f64 };
                let r = fs.lsp_at(&t, Point::new(x, 1.0), Point::new(0.0, -5.0), 5.4, 2.0).unwrap();
                SampleRecord::from_realization(&r, Condition::Los)
            })
            .collect();
        let tracks = split_tracks(recs);
        assert_eq!(tracks.iter().map(Vec::len).collect::<Vec<_>>(), vec![10, 10]);
    }

    #[test]
    fn single_frequency_fit_flags_rank_deficiency() {
        let t = resolve_scenario("industrial_combined", Condition::Los).unwrap();
        let csv = generate_lsp(&t, &spec(Condition::Los)).unwrap();
        let config = resolve_scenario_file("industrial_combined").unwrap();
        let out = fit(&[("a.csv".into(), csv)], &config, None).unwrap();
        assert!(out.problems.iter().any(|p| p.contains("frequency")), "{:?}", out.problems);
        assert!(out.report.contains("FAILED"));
        assert!(ScenarioFile::parse(&out.fragment).is_ok());
    }

    #[test]
    fn cir_blocks_have_unit_energy() {
        let t = resolve_scenario("industrial_combined", Condition::Nlos).unwrap();
        let mut s = spec(Condition::Nlos);
        s.waypoints.truncate(1);
        let opts = CirOptions { bandwidth_hz: 200e6, n_paths: 25, rx_height_m: 2.0 };
        let text = generate_cir(&t, &s, opts).unwrap();
        assert_eq!(text.matches("[snapshot ").count(), 1);
        let n_taps: usize = text
            .lines()
            .find_map(|l| l.strip_prefix("n_taps = "))
            .unwrap()
            .parse()
            .unwrap();
        assert!(n_taps >= 840);
        let energy: f64 = text
            .lines()
            .filter_map(|l| l.strip_prefix("tap "))
            .map(|l| l.split(' ').skip(1).map(|v| v.parse::<f64>().unwrap().powi(2)).sum::<f64>())
            .sum();
        assert!((energy - 1.0).abs() <= 1e-3, "{energy}");
    }
}
