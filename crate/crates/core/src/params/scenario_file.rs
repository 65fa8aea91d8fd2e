//! Line-oriented scenario file format.
//!
//! ```text
//! # comment
//! name = industrial_combined
//! [LOS]
//! r_tau = 2.7
//! DS_mu = -8.3
//! DS_gamma = 1.26
//! DS_epsilon = 0 fixed
//! xcorr DS KF = -0.7
//! [NLOS]
//! ...
//! ```
//!
//! Coefficients missing from a present LSP load as zero and fixed. An LSP
//! block may be omitted only for KF, which then loads as absent. Pairs not
//! listed under `xcorr` are uncorrelated.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::{
    identity_corr, Coefficient, Condition, FixedMask, Lsp, LspDescriptor, ScenarioTable,
};
use crate::error::{Error, Result};

/// A named scenario with one table per propagation condition it defines.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub name: String,
    pub tables: Vec<ScenarioTable>,
}

impl ScenarioFile {
    pub fn get(&self, condition: Condition) -> Result<&ScenarioTable> {
        self.tables
            .iter()
            .find(|t| t.condition == condition)
            .ok_or_else(|| Error::MissingCondition {
                name: self.name.clone(),
                condition: condition.to_string(),
            })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::default().run(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "name = {}", self.name).unwrap();
        for t in &self.tables {
            out.push('\n');
            write_section(&mut out, t);
        }
        out
    }
}

/// Parses a scenario file that defines exactly one condition.
pub fn load_scenario(text: &str) -> Result<ScenarioTable> {
    let mut file = ScenarioFile::parse(text)?;
    match file.tables.len() {
        1 => Ok(file.tables.pop().unwrap()),
        n => Err(Error::InvalidArgument(format!(
            "expected exactly one [LOS] or [NLOS] section, found {n}"
        ))),
    }
}

pub fn save_scenario(table: &ScenarioTable) -> String {
    ScenarioFile {
        name: table.name.clone(),
        tables: vec![table.clone()],
    }
    .to_text()
}

fn write_section(out: &mut String, t: &ScenarioTable) {
    writeln!(out, "[{}]", t.condition).unwrap();
    writeln!(out, "r_tau = {}", t.r_tau).unwrap();
    for l in Lsp::ALL {
        let Some(desc) = t.get(l) else { continue };
        let fixed = t.fixed(l);
        for coef in Coefficient::ALL {
            let suffix = if fixed.contains(coef) { " fixed" } else { "" };
            writeln!(out, "{l}_{} = {}{suffix}", coef.as_str(), desc.get(coef)).unwrap();
        }
    }
    for i in 0..8 {
        for j in (i + 1)..8 {
            writeln!(
                out,
                "xcorr {} {} = {}",
                Lsp::CORRELATED[i],
                Lsp::CORRELATED[j],
                t.cross_corr[i][j]
            )
            .unwrap();
        }
    }
}

struct Section {
    condition: Condition,
    header_line: usize,
    r_tau: Option<f64>,
    lsp: [Option<LspDescriptor>; 9],
    fixed: [FixedMask; 9],
    corr: super::CorrMatrix,
    seen: HashSet<String>,
}

impl Section {
    fn new(condition: Condition, header_line: usize) -> Self {
        Section {
            condition,
            header_line,
            r_tau: None,
            lsp: [None; 9],
            fixed: [FixedMask::ALL; 9],
            corr: identity_corr(),
            seen: HashSet::new(),
        }
    }
}

#[derive(Default)]
struct Parser {
    name: Option<String>,
    sections: Vec<Section>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_number(line: usize, key: &str, text: &str) -> Result<f64> {
    text.parse::<f64>()
        .map_err(|_| parse_err(line, format!("`{key}`: expected a number, got `{text}`")))
}

impl Parser {
    fn run(mut self, text: &str) -> Result<ScenarioFile> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                self.open_section(line_no, header)?;
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, format!("expected `key = value`, got `{line}`")))?;
            self.assign(line_no, key.trim(), value.trim())?;
        }
        self.finish()
    }

    fn open_section(&mut self, line_no: usize, header: &str) -> Result<()> {
        let label = header
            .strip_suffix(']')
            .ok_or_else(|| parse_err(line_no, "unterminated section header"))?;
        let condition: Condition = label
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("unknown section `[{label}]`")))?;
        if self.sections.iter().any(|s| s.condition == condition) {
            return Err(parse_err(line_no, format!("duplicate section [{condition}]")));
        }
        self.sections.push(Section::new(condition, line_no));
        Ok(())
    }

    fn assign(&mut self, line_no: usize, key: &str, value: &str) -> Result<()> {
        let Some(section) = self.sections.last_mut() else {
            if key == "name" {
                if self.name.is_some() {
                    return Err(parse_err(line_no, "duplicate key `name`"));
                }
                if value.is_empty() {
                    return Err(parse_err(line_no, "`name` must not be empty"));
                }
                self.name = Some(value.to_string());
                return Ok(());
            }
            return Err(parse_err(
                line_no,
                format!("`{key}` must appear inside a [LOS] or [NLOS] section"),
            ));
        };

        let canonical = key.split_whitespace().collect::<Vec<_>>().join(" ");
        if !section.seen.insert(canonical.clone()) {
            return Err(parse_err(line_no, format!("duplicate key `{canonical}`")));
        }

        let (number, fixed) = match value.strip_suffix("fixed") {
            Some(rest) => (rest.trim(), true),
            None => (value, false),
        };
        let v = parse_number(line_no, &canonical, number)?;

        if let Some(pair) = canonical.strip_prefix("xcorr ") {
            if fixed {
                return Err(parse_err(line_no, "correlations cannot be marked fixed"));
            }
            let (i, j) = parse_pair(line_no, pair)?;
            let mirrored = format!("xcorr {} {}", Lsp::CORRELATED[j], Lsp::CORRELATED[i]);
            if !section.seen.insert(mirrored) {
                return Err(parse_err(line_no, format!("duplicate key `{canonical}`")));
            }
            section.corr[i][j] = v;
            section.corr[j][i] = v;
            return Ok(());
        }

        if canonical == "r_tau" {
            if fixed {
                return Err(parse_err(line_no, "`r_tau` cannot be marked fixed"));
            }
            section.r_tau = Some(v);
            return Ok(());
        }

        let (lsp, coef) = canonical
            .split_once('_')
            .and_then(|(l, c)| Some((l.parse::<Lsp>().ok()?, c.parse::<Coefficient>().ok()?)))
            .filter(|(l, _)| canonical.starts_with(l.as_str()))
            .ok_or_else(|| parse_err(line_no, format!("unknown key `{canonical}`")))?;
        let desc = section.lsp[lsp.index()].get_or_insert_with(LspDescriptor::default);
        desc.set(coef, v);
        let mask = &mut section.fixed[lsp.index()];
        *mask = if fixed { mask.with(coef) } else { mask.without(coef) };
        Ok(())
    }

    fn finish(self) -> Result<ScenarioFile> {
        let name = self.name.ok_or_else(|| parse_err(1, "missing `name`"))?;
        if self.sections.is_empty() {
            return Err(parse_err(1, "no [LOS] or [NLOS] section"));
        }
        let tables = self
            .sections
            .into_iter()
            .map(|s| {
                let r_tau = s.r_tau.ok_or_else(|| {
                    parse_err(s.header_line, format!("section [{}] is missing `r_tau`", s.condition))
                })?;
                ScenarioTable::new(name.clone(), s.condition, s.lsp, s.fixed, r_tau, s.corr)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScenarioFile { name, tables })
    }
}

fn parse_pair(line_no: usize, pair: &str) -> Result<(usize, usize)> {
    let mut it = pair.split_whitespace();
    let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
        return Err(parse_err(line_no, format!("expected `xcorr A B`, got `xcorr {pair}`")));
    };
    let idx = |name: &str| {
        name.parse::<Lsp>()
            .ok()
            .and_then(Lsp::corr_index)
            .ok_or_else(|| parse_err(line_no, format!("`{name}` has no cross-correlation")))
    };
    let (i, j) = (idx(a)?, idx(b)?);
    if i == j {
        return Err(parse_err(line_no, "self-correlation is always 1 and cannot be set"));
    }
    Ok((i, j))
}
