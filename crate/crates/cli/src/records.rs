//! CSV sample-record schema shared by `generate-lsp` and `fit`.

use std::collections::HashMap;

use ichan_core::analysis::{LspValues, SampleRecord};
use ichan_core::params::{Condition, Covariates, Lsp};
use ichan_core::Point;

use crate::error::{CliError, Result};

pub const COLUMNS: [&str; 15] = [
    "position_x",
    "position_y",
    "f_ghz",
    "d_2d",
    "h_tx",
    "condition",
    "pl_db",
    "sf_db",
    "kf_db",
    "ds_log10s",
    "asd_log10deg",
    "asa_log10deg",
    "esd_log10deg",
    "esa_log10deg",
    "xpr_db",
];

/// LSP column names in [`COLUMNS`] order, starting at `pl_db`.
const LSP_COLUMNS: [(Lsp, &str); 9] = [
    (Lsp::Pl, "pl_db"),
    (Lsp::Sf, "sf_db"),
    (Lsp::Kf, "kf_db"),
    (Lsp::Ds, "ds_log10s"),
    (Lsp::Asd, "asd_log10deg"),
    (Lsp::Asa, "asa_log10deg"),
    (Lsp::Esd, "esd_log10deg"),
    (Lsp::Esa, "esa_log10deg"),
    (Lsp::Xpr, "xpr_db"),
];

/// Header lines written before the CSV header, each starting with `#`.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: &'static str,
    pub scenario: String,
    pub scenario_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn header(&self) -> String {
        format!(
            "# ichan {}\n# version = {}\n# scenario = {}\n# scenario_sha256 = {}\n# seed = {}\n",
            self.command,
            env!("CARGO_PKG_VERSION"),
            self.scenario,
            self.scenario_sha256,
            self.seed
        )
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_records(provenance: &Provenance, records: &[SampleRecord]) -> Result<String> {
    let mut out = provenance.header().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(COLUMNS)?;
        for r in records {
            let mut row = vec![
                r.position.x.to_string(),
                r.position.y.to_string(),
                r.covariates.f_ghz().to_string(),
                r.covariates.d_2d().to_string(),
                r.covariates.h_tx().to_string(),
                r.condition.to_string(),
            ];
            row.extend(LSP_COLUMNS.iter().map(|(l, _)| cell(r.values.get(*l))));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| CliError::Failed(format!("writing CSV: {e}")))?;
    }
    Ok(String::from_utf8(out).expect("CSV output is UTF-8"))
}

/// Parses records in the generate-lsp schema. Lines starting with `#` are
/// ignored; every schema column must be present. Empty LSP cells mean the
/// LSP is absent for that row.
pub fn read_records(text: &str) -> Result<Vec<SampleRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    for c in COLUMNS {
        if !index.contains_key(c) {
            return Err(CliError::Schema {
                row: 1,
                column: c.to_string(),
                message: "missing column".into(),
            });
        }
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let text = |c: &str| row.get(index[c]).unwrap_or("");
        let num = |c: &str| -> Result<f64> {
            text(c).parse::<f64>().map_err(|_| CliError::Schema {
                row: line,
                column: c.to_string(),
                message: format!("expected a number, got `{}`", text(c)),
            })
        };
        let condition: Condition = text("condition").parse().map_err(|_| CliError::Schema {
            row: line,
            column: "condition".into(),
            message: format!("expected LOS or NLOS, got `{}`", text("condition")),
        })?;
        let covariates = Covariates::new(num("f_ghz")?, num("d_2d")?, num("h_tx")?).map_err(|e| CliError::Schema {
            row: line,
            column: "f_ghz/d_2d/h_tx".into(),
            message: e.to_string(),
        })?;
        let mut values = LspValues::default();
        for (l, c) in LSP_COLUMNS {
            if !text(c).is_empty() {
                values.set(l, Some(num(c)?));
            }
        }
        records.push(SampleRecord {
            position: Point::new(num("position_x")?, num("position_y")?),
            covariates,
            condition,
            values,
        });
    }
    if records.is_empty() {
        return Err(CliError::Failed("input CSV has no records".into()));
    }
    Ok(records)
}
