//! Built-in scenario tables.
//!
//! Three industrial measurement setups, their combined fit, and the 3GPP
//! 38.901 indoor office reference. Constants that were held fixed during
//! fitting load flagged fixed; rows a table does not carry load as zero and
//! fixed as well.

use std::fmt;
use std::str::FromStr;

use super::{Coefficient, Condition, CorrMatrix, FixedMask, Lsp, LspDescriptor, ScenarioTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    Setup1,
    Setup2,
    Setup3,
    IndustrialCombined,
    Office38901,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] = [
        ScenarioId::Setup1,
        ScenarioId::Setup2,
        ScenarioId::Setup3,
        ScenarioId::IndustrialCombined,
        ScenarioId::Office38901,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::Setup1 => "setup1",
            ScenarioId::Setup2 => "setup2",
            ScenarioId::Setup3 => "setup3",
            ScenarioId::IndustrialCombined => "industrial_combined",
            ScenarioId::Office38901 => "office_38901",
        }
    }

    fn column(self, condition: Condition) -> usize {
        let base = match self {
            ScenarioId::Setup1 => 0,
            ScenarioId::Setup2 => 2,
            ScenarioId::Setup3 => 4,
            ScenarioId::IndustrialCombined => 6,
            ScenarioId::Office38901 => 8,
        };
        base + usize::from(condition == Condition::Nlos)
    }

    fn corr_group(self) -> &'static [[f64; 8]; 8] {
        match self {
            ScenarioId::Setup1 => &CORR_SETUP1,
            ScenarioId::Setup2 => &CORR_SETUP2,
            ScenarioId::Setup3 => &CORR_SETUP3,
            ScenarioId::IndustrialCombined => &CORR_COMBINED,
            ScenarioId::Office38901 => &CORR_OFFICE,
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    /// Fitted value.
    V(f64),
    /// Fixed constant.
    G(f64),
    /// Not available.
    Na,
}

use Cell::{Na, G, V};

use Coefficient::{Delta, Epsilon, Gamma, Kappa, Lambda, Mu, Sigma, Zeta};

// Columns: setup1 LOS/NLOS, setup2 LOS/NLOS, setup3 LOS/NLOS,
// industrial_combined LOS/NLOS, office_38901 LOS/NLOS.
#[rustfmt::skip]
const ROWS: &[(Lsp, Coefficient, [Cell; 10])] = &[
    (Lsp::Pl,  Mu,      [V(36.1), V(34.4), V(34.3), V(39.2), V(37.2), V(30.1), V(36.3), V(29.1), V(32.4), V(17.3)]),
    (Lsp::Sf,  Sigma,   [V(1.6), V(1.6), V(1.5), V(3.1), V(1.7), V(1.7), V(1.8), V(1.15), V(3.0), V(8.0)]),
    (Lsp::Sf,  Lambda,  [V(20.6), V(8.0), V(3.5), V(34.2), V(14.8), V(32.1), V(15.0), V(30.0), V(10.0), V(6.0)]),
    (Lsp::Pl,  Gamma,   [G(20.0), G(20.0), G(20.0), G(20.0), G(20.0), G(20.0), V(19.5), V(25.4), V(20.0), V(24.9)]),
    (Lsp::Pl,  Epsilon, [V(18.5), V(21.7), V(19.3), V(21.7), V(17.6), V(24.7), V(18.3), V(24.1), V(17.3), V(38.3)]),
    (Lsp::Sf,  Delta,   [G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), V(-0.3), V(3.15), G(0.0), G(0.0)]),

    (Lsp::Ds,  Mu,      [V(-7.22), V(-7.12), V(-7.47), V(-7.19), V(-7.78), V(-7.72), V(-8.3), V(-8.19), V(-7.69), V(-7.17)]),
    (Lsp::Ds,  Sigma,   [V(0.08), V(0.08), V(0.14), V(0.09), V(0.11), V(0.12), V(0.09), V(0.11), V(0.18), V(0.055)]),
    (Lsp::Ds,  Lambda,  [V(42.1), V(36.4), V(24.2), V(10.5), V(99.7), V(127.2), V(50.0), V(52.0), V(8.0), V(5.0)]),
    (Lsp::Ds,  Gamma,   [G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), V(1.26), V(1.37), V(-0.01), V(-0.28)]),
    (Lsp::Ds,  Zeta,    [V(0.36), V(0.31), V(0.56), V(0.17), V(0.4), V(0.38), V(0.49), V(0.3), G(0.0), G(0.0)]),
    (Lsp::Ds,  Delta,   [G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), V(0.07), G(0.0), G(0.0), V(0.1)]),

    (Lsp::Kf,  Mu,      [V(-1.6), V(-4.0), V(4.8), V(-4.4), V(2.8), V(-1.0), V(7.8), V(4.2), V(7.0), Na]),
    (Lsp::Kf,  Sigma,   [V(2.7), V(2.5), V(2.9), V(2.4), V(2.6), V(1.9), V(1.8), V(1.1), V(4.0), Na]),
    (Lsp::Kf,  Lambda,  [V(17.5), V(11.4), V(13.5), V(6.1), V(30.3), V(17.0), V(32.0), V(14.0), V(4.0), Na]),
    (Lsp::Kf,  Gamma,   [G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), V(-7.3), V(-11.7), G(0.0), Na]),
    (Lsp::Kf,  Zeta,    [V(-5.7), V(-6.3), V(-8.2), V(-1.0), V(-3.6), V(-1.9), V(-7.7), V(-3.3), G(0.0), Na]),
    (Lsp::Kf,  Delta,   [G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), V(2.6), V(2.2), G(0.0), Na]),

    (Lsp::Asa, Mu,      [V(1.67), V(1.61), V(1.71), V(1.61), V(1.67), V(1.56), V(1.69), V(1.62), V(1.781), V(1.863)]),
    (Lsp::Asa, Sigma,   [V(0.15), V(0.18), V(0.12), V(0.2), V(0.19), V(0.26), V(0.15), V(0.22), V(0.119), V(0.059)]),
    (Lsp::Asa, Lambda,  [V(6.1), V(6.8), V(12.1), V(9.5), V(6.3), V(9.8), V(10.0), V(13.0), V(5.0), V(3.0)]),
    (Lsp::Asa, Gamma,   [G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), V(-0.19), V(-0.11)]),
    (Lsp::Asa, Delta,   [G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), V(0.12), V(0.12)]),

    (Lsp::Asd, Mu,      [V(1.54), V(1.64), V(-0.06), V(0.14), V(0.56), V(0.75), V(1.66), V(1.68), V(1.60), V(1.62)]),
    (Lsp::Asd, Sigma,   [V(0.1), V(0.1), V(0.31), V(0.29), V(0.32), V(0.24), V(0.12), V(0.1), V(0.18), V(0.25)]),
    (Lsp::Asd, Lambda,  [V(12.8), V(16.4), V(18.1), V(18.2), V(23.8), V(17.9), V(10.0), V(13.0), V(7.0), V(3.0)]),
    (Lsp::Asd, Zeta,    [V(0.05), V(-0.24), V(1.02), V(1.43), V(0.22), V(0.29), V(0.1), V(-0.2), G(0.0), G(0.0)]),

    (Lsp::Esa, Mu,      [V(1.61), V(1.72), V(1.69), V(1.19), V(1.71), V(1.82), V(1.64), V(1.64), V(1.44), V(1.387)]),
    (Lsp::Esa, Sigma,   [V(0.07), V(-0.11), V(-0.1), V(0.25), V(0.09), V(-0.12), V(0.01), V(0.06), V(0.264), V(0.746)]),
    (Lsp::Esa, Lambda,  [V(13.3), V(11.4), V(6.4), V(12.9), V(10.3), V(21.1), V(10.0), V(20.0), V(4.0), V(4.0)]),
    (Lsp::Esa, Gamma,   [G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), V(-0.26), V(-0.15)]),
    (Lsp::Esa, Epsilon, [V(-0.5), V(-0.54), V(-0.53), V(-0.34), V(-0.54), V(-0.65), V(-0.5), V(-0.5), G(0.0), G(0.0)]),
    (Lsp::Esa, Delta,   [G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), V(-0.04), V(-0.09)]),
    (Lsp::Esa, Kappa,   [V(0.04), V(0.15), V(0.14), V(0.0), V(0.05), V(0.21), V(0.09), V(0.1), G(0.0), G(0.0)]),

    (Lsp::Esd, Mu,      [V(1.17), V(1.03), V(1.4), V(0.9), V(1.03), V(1.43), V(1.55), V(1.6), V(2.228), V(1.08)]),
    (Lsp::Esd, Sigma,   [V(0.07), V(0.1), V(0.08), V(0.3), V(0.08), V(0.06), V(0.01), V(0.17), V(0.30), V(0.36)]),
    (Lsp::Esd, Lambda,  [V(9.2), V(12.5), V(10.4), V(12.4), V(6.4), V(11.6), V(10.0), V(20.0), V(4.0), V(4.0)]),
    (Lsp::Esd, Gamma,   [G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), V(-1.43), G(0.0)]),
    (Lsp::Esd, Epsilon, [G(0.0), V(0.16), V(-0.53), V(-0.38), V(-0.2), V(-0.5), V(-0.5), V(-0.5), G(0.0), G(0.0)]),
    (Lsp::Esd, Zeta,    [V(0.13), G(0.0), V(0.3), V(0.54), V(0.26), V(0.25), V(0.3), V(0.14), G(0.0), G(0.0)]),
    (Lsp::Esd, Delta,   [G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), G(0.0), V(0.13), G(0.0)]),
    (Lsp::Esd, Kappa,   [G(0.0), V(-0.03), V(0.05), V(-0.08), V(0.08), V(0.08), V(0.09), V(0.1), G(0.0), G(0.0)]),

    (Lsp::Xpr, Mu,      [V(13.0), V(12.8), V(18.0), V(15.2), V(16.1), V(15.0), V(16.8), V(14.4), V(11.0), V(10.0)]),
    (Lsp::Xpr, Sigma,   [V(1.6), V(1.3), V(2.6), V(1.8), V(3.2), V(2.1), V(3.1), V(2.4), V(4.0), V(4.0)]),
    (Lsp::Xpr, Lambda,  [V(16.5), V(7.1), V(23.4), V(6.9), V(14.9), V(16.3), V(30.0), V(27.0), Na, Na]),
    (Lsp::Xpr, Zeta,    [V(-1.9), V(-2.5), V(-3.6), V(0.6), V(-3.5), V(-3.7), V(-4.5), V(-2.2), G(0.0), G(0.0)]),
];

const R_TAU: [f64; 10] = [2.93, 3.03, 2.56, 2.89, 2.55, 2.74, 2.7, 3.0, 3.6, 3.0];

const NA: f64 = f64::NAN;

// Inter-parameter correlations as printed: LOS above the diagonal, NLOS
// below it. Order DS, KF, SF, ASD, ASA, ESD, ESA, XPR.
#[rustfmt::skip]
const CORR_SETUP1: [[f64; 8]; 8] = [
    [1.0,   -0.57, -0.3,  -0.14, 0.0,   0.0,  0.32,  -0.18],
    [-0.72, 1.0,   0.44,  -0.08, 0.0,   0.07, -0.4,  0.22],
    [0.3,   0.39,  1.0,   0.28,  0.12,  0.21, 0.05,  0.2],
    [0.07,  -0.08, 0.11,  1.0,   -0.12, 0.08, 0.34,  0.28],
    [-0.35, 0.19,  0.14,  0.0,   1.0,   0.15, -0.13, 0.07],
    [0.0,   -0.12, -0.21, 0.0,   -0.07, 1.0,  0.06,  0.23],
    [0.0,   0.04,  0.14,  -0.19, 0.19,  -0.1, 1.0,   -0.05],
    [-0.36, 0.26,  0.0,   -0.08, 0.04,  0.04, 0.0,   1.0],
];

#[rustfmt::skip]
const CORR_SETUP2: [[f64; 8]; 8] = [
    [1.0,   -0.75, -0.25, 0.17,  -0.16, 0.3,   0.16,  -0.5],
    [-0.46, 1.0,   0.38,  -0.4,  0.08,  -0.31, -0.16, 0.49],
    [0.03,  0.31,  1.0,   -0.05, -0.22, -0.13, -0.18, 0.02],
    [-0.41, 0.15,  0.0,   1.0,   -0.02, 0.35,  0.15,  -0.47],
    [0.11,  -0.04, 0.44,  -0.18, 1.0,   0.16,  0.33,  0.26],
    [0.0,   0.0,   0.29,  0.04,  0.27,  1.0,   0.52,  -0.24],
    [0.03,  0.08,  0.37,  -0.18, 0.31,  0.17,  1.0,   -0.1],
    [0.12,  0.02,  0.14,  -0.16, 0.23,  0.06,  0.06,  1.0],
];

#[rustfmt::skip]
const CORR_SETUP3: [[f64; 8]; 8] = [
    [1.0,   -0.72, -0.03, 0.44,  0.19,  0.4,   0.47,  -0.33],
    [-0.69, 1.0,   0.22,  -0.55, -0.1,  -0.26, -0.3,  0.37],
    [0.39,  -0.14, 1.0,   -0.1,  0.03,  0.05,  0.1,   -0.12],
    [0.3,   -0.22, 0.0,   1.0,   0.0,   0.3,   0.26,  -0.41],
    [0.3,   -0.03, 0.31,  0.06,  1.0,   0.12,  0.43,  -0.1],
    [0.45,  -0.34, 0.19,  0.35,  0.0,   1.0,   0.31,  -0.04],
    [0.5,   -0.26, 0.22,  0.05,  0.44,  0.19,  1.0,   -0.22],
    [-0.43, 0.27,  -0.07, -0.27, -0.07, -0.32, -0.3,  1.0],
];

#[rustfmt::skip]
const CORR_COMBINED: [[f64; 8]; 8] = [
    [1.0,  -0.7, -0.3, 0.4,  0.0, 0.4,  0.3,  -0.4],
    [-0.6, 1.0,  0.4,  -0.5, 0.0, -0.3, -0.3, 0.5],
    [0.4,  0.0,  1.0,  0.0,  0.0, 0.0,  0.0,  0.0],
    [0.2,  0.0,  0.2,  1.0,  0.0, 0.4,  0.2,  -0.5],
    [0.0,  0.0,  0.2,  0.0,  1.0, 0.1,  0.3,  0.0],
    [0.3,  -0.3, 0.3,  0.4,  0.0, 1.0,  0.3,  -0.2],
    [0.3,  0.0,  0.3,  0.0,  0.3, 0.3,  1.0,  -0.2],
    [-0.4, 0.3,  0.0,  -0.2, 0.0, 0.0,  -0.3, 1.0],
];

#[rustfmt::skip]
const CORR_OFFICE: [[f64; 8]; 8] = [
    [1.0,   -0.5, -0.8, 0.6,  0.8,   0.1,  0.2,  NA],
    [NA,    1.0,  0.5,  0.0,  0.0,   0.0,  0.1,  NA],
    [-0.5,  NA,   1.0,  -0.4, -0.5,  0.2,  0.3,  NA],
    [0.4,   NA,   0.0,  1.0,  0.4,   0.5,  0.0,  NA],
    [0.0,   NA,   -0.4, 0.0,  1.0,   0.0,  0.5,  NA],
    [-0.27, NA,   0.0,  0.35, -0.08, 1.0,  0.0,  NA],
    [-0.06, NA,   0.0,  0.23, 0.43,  0.42, 1.0,  NA],
    [NA,    NA,   NA,   NA,   NA,    NA,   NA,   1.0],
];

fn split_corr(printed: &[[f64; 8]; 8], condition: Condition) -> CorrMatrix {
    let mut m = [[0.0; 8]; 8];
    for i in 0..8 {
        m[i][i] = 1.0;
        for j in (i + 1)..8 {
            let v = match condition {
                Condition::Los => printed[i][j],
                Condition::Nlos => printed[j][i],
            };
            // Unavailable correlations load as uncorrelated.
            let v = if v.is_nan() { 0.0 } else { v };
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Loads one of the built-in scenario tables.
pub fn builtin_scenario(id: ScenarioId, condition: Condition) -> ScenarioTable {
    let col = id.column(condition);
    let mut lsp: [Option<LspDescriptor>; 9] = [Some(LspDescriptor::default()); 9];
    let mut fixed = [FixedMask::ALL; 9];

    for &(l, coef, cells) in ROWS {
        let desc = &mut lsp[l.index()];
        match cells[col] {
            V(v) => {
                if let Some(d) = desc.as_mut() {
                    d.set(coef, v);
                    fixed[l.index()] = fixed[l.index()].without(coef);
                }
            }
            G(v) => {
                if let Some(d) = desc.as_mut() {
                    d.set(coef, v);
                }
            }
            Na if coef == Mu => *desc = None,
            Na => {}
        }
    }
    // The decorrelation distance is always an estimated quantity unless the
    // table does not provide one.
    for l in Lsp::ALL {
        if let Some(d) = &lsp[l.index()] {
            if d.lambda_m > 0.0 {
                fixed[l.index()] = fixed[l.index()].without(Lambda);
            }
        }
    }

    ScenarioTable::new(
        id.as_str(),
        condition,
        lsp,
        fixed,
        R_TAU[col],
        split_corr(id.corr_group(), condition),
    )
    .expect("built-in tables are valid")
}

/// Looks up a built-in table by its string id.
pub fn builtin_by_name(name: &str, condition: Condition) -> Result<ScenarioTable> {
    Ok(builtin_scenario(name.parse()?, condition))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn combined(c: Condition) -> ScenarioTable {
        builtin_scenario(ScenarioId::IndustrialCombined, c)
    }

    #[test]
    fn transcribed_anchor_values() {
        assert_eq!(combined(Condition::Los).lsp(Lsp::Ds).mu, -8.3);
        assert_eq!(combined(Condition::Nlos).lsp(Lsp::Pl).epsilon, 24.1);
        assert_eq!(combined(Condition::Los).corr(Lsp::Ds, Lsp::Kf), Some(-0.7));
        assert_eq!(combined(Condition::Nlos).corr(Lsp::Kf, Lsp::Ds), Some(-0.6));
        assert_eq!(combined(Condition::Los).r_tau, 2.7);
    }

    #[test]
    fn grayed_entries_are_fixed_constants() {
        let t = builtin_scenario(ScenarioId::Setup1, Condition::Los);
        assert_eq!(t.lsp(Lsp::Pl).gamma, 20.0);
        assert!(t.fixed(Lsp::Pl).contains(Gamma));
        assert!(!t.fixed(Lsp::Pl).contains(Epsilon));
        // Rows a table does not carry are zero and fixed.
        assert_eq!(t.lsp(Lsp::Ds).epsilon, 0.0);
        assert!(t.fixed(Lsp::Ds).contains(Epsilon));
        assert!(t.fixed(Lsp::Sf).contains(Mu));
        assert!(!t.fixed(Lsp::Sf).contains(Sigma));
    }

    #[test]
    fn office_na_entries_load_as_absent() {
        let nlos = builtin_scenario(ScenarioId::Office38901, Condition::Nlos);
        assert!(!nlos.has_kf());
        assert_eq!(nlos.lsp(Lsp::Xpr).lambda_m, 0.0);
        assert!(nlos.fixed(Lsp::Xpr).contains(Lambda));
        let los = builtin_scenario(ScenarioId::Office38901, Condition::Los);
        assert!(los.has_kf());
        assert_eq!(los.corr(Lsp::Ds, Lsp::Xpr), Some(0.0));
    }

    #[test]
    fn all_builtin_tables_are_valid() {
        for id in ScenarioId::ALL {
            for c in [Condition::Los, Condition::Nlos] {
                let t = builtin_scenario(id, c);
                t.validate().unwrap();
                assert_eq!(t.name, id.as_str());
                assert_eq!(t.condition, c);
            }
        }
    }

    #[test]
    fn unknown_scenario_is_an_error() {
        assert_eq!(
            builtin_by_name("warehouse", Condition::Los),
            Err(Error::UnknownScenario("warehouse".into()))
        );
    }
}
