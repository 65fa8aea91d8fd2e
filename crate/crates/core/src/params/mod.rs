//! Large-scale parameter tables and the log-linear LSP model.
//!
//! Every large-scale parameter (LSP) is described by eight coefficients:
//! a reference mean `mu` and standard deviation `sigma` at 1 GHz, 1 m
//! distance and 1 m TX height, their log-linear dependencies on frequency,
//! distance and TX height, and a decorrelation distance. A realization is
//!
//! ```text
//! V = mu + gamma*log10(f) + epsilon*log10(d) + zeta*log10(h)
//!       + X * (sigma + delta*log10(f) + kappa*log10(d)),   X ~ N(0, 1)
//! ```
//!
//! Values stay in their native units here: dB for PL/SF/KF/XPR,
//! log10(s) for DS and log10(deg) for the angular spreads.

mod scenario_file;
mod tables;

pub use scenario_file::{load_scenario, save_scenario, ScenarioFile};
pub use tables::{builtin_by_name, builtin_scenario, ScenarioId};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Propagation condition. Always a user input, never inferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Los,
    Nlos,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Los => "LOS",
            Condition::Nlos => "NLOS",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LOS" => Ok(Condition::Los),
            "NLOS" => Ok(Condition::Nlos),
            _ => Err(Error::InvalidArgument(format!(
                "condition must be LOS or NLOS, got `{s}`"
            ))),
        }
    }
}

/// The nine large-scale parameters of a scenario table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lsp {
    Pl,
    Sf,
    Kf,
    Ds,
    Asa,
    Asd,
    Esa,
    Esd,
    Xpr,
}

impl Lsp {
    pub const ALL: [Lsp; 9] = [
        Lsp::Pl,
        Lsp::Sf,
        Lsp::Kf,
        Lsp::Ds,
        Lsp::Asa,
        Lsp::Asd,
        Lsp::Esa,
        Lsp::Esd,
        Lsp::Xpr,
    ];

    /// The eight stochastic LSPs in cross-correlation matrix order.
    pub const CORRELATED: [Lsp; 8] = [
        Lsp::Ds,
        Lsp::Kf,
        Lsp::Sf,
        Lsp::Asd,
        Lsp::Asa,
        Lsp::Esd,
        Lsp::Esa,
        Lsp::Xpr,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Row/column of this LSP in the cross-correlation matrix; `None` for PL.
    pub fn corr_index(self) -> Option<usize> {
        Lsp::CORRELATED.iter().position(|&l| l == self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Lsp::Pl => "PL",
            Lsp::Sf => "SF",
            Lsp::Kf => "KF",
            Lsp::Ds => "DS",
            Lsp::Asa => "ASA",
            Lsp::Asd => "ASD",
            Lsp::Esa => "ESA",
            Lsp::Esd => "ESD",
            Lsp::Xpr => "XPR",
        }
    }
}

impl fmt::Display for Lsp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Lsp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lsp::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown LSP `{s}`")))
    }
}

/// One of the eight coefficients of an [`LspDescriptor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coefficient {
    Mu,
    Sigma,
    Lambda,
    Gamma,
    Epsilon,
    Zeta,
    Delta,
    Kappa,
}

impl Coefficient {
    pub const ALL: [Coefficient; 8] = [
        Coefficient::Mu,
        Coefficient::Sigma,
        Coefficient::Lambda,
        Coefficient::Gamma,
        Coefficient::Epsilon,
        Coefficient::Zeta,
        Coefficient::Delta,
        Coefficient::Kappa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Coefficient::Mu => "mu",
            Coefficient::Sigma => "sigma",
            Coefficient::Lambda => "lambda",
            Coefficient::Gamma => "gamma",
            Coefficient::Epsilon => "epsilon",
            Coefficient::Zeta => "zeta",
            Coefficient::Delta => "delta",
            Coefficient::Kappa => "kappa",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl FromStr for Coefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Coefficient::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown coefficient `{s}`")))
    }
}

/// Set of coefficients held constant during fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FixedMask(u8);

impl FixedMask {
    pub const NONE: FixedMask = FixedMask(0);
    pub const ALL: FixedMask = FixedMask(u8::MAX);

    pub fn of(coefs: &[Coefficient]) -> Self {
        FixedMask(coefs.iter().fold(0, |acc, c| acc | c.bit()))
    }

    pub fn contains(self, coef: Coefficient) -> bool {
        self.0 & coef.bit() != 0
    }

    pub fn with(self, coef: Coefficient) -> Self {
        FixedMask(self.0 | coef.bit())
    }

    pub fn without(self, coef: Coefficient) -> Self {
        FixedMask(self.0 & !coef.bit())
    }
}

/// Validated covariates of the log-linear model.
///
/// `h_tx` is the transmitter (base station) height; the RX is assumed at
/// terminal height and does not enter the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covariates {
    f_ghz: f64,
    d_2d: f64,
    h_tx: f64,
}

impl Covariates {
    pub fn new(f_ghz: f64, d_2d: f64, h_tx: f64) -> Result<Self> {
        positive("f_ghz", f_ghz)?;
        positive("d_2d", d_2d)?;
        positive("h_tx", h_tx)?;
        Ok(Covariates { f_ghz, d_2d, h_tx })
    }

    pub fn f_ghz(&self) -> f64 {
        self.f_ghz
    }

    pub fn d_2d(&self) -> f64 {
        self.d_2d
    }

    pub fn h_tx(&self) -> f64 {
        self.h_tx
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain { name, value })
    }
}

/// Coefficients of one LSP.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LspDescriptor {
    pub mu: f64,
    pub sigma: f64,
    /// Decorrelation distance in meters. Zero only in reference tables that
    /// do not specify one.
    pub lambda_m: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub zeta: f64,
    pub delta: f64,
    pub kappa: f64,
}

impl LspDescriptor {
    pub fn get(&self, coef: Coefficient) -> f64 {
        match coef {
            Coefficient::Mu => self.mu,
            Coefficient::Sigma => self.sigma,
            Coefficient::Lambda => self.lambda_m,
            Coefficient::Gamma => self.gamma,
            Coefficient::Epsilon => self.epsilon,
            Coefficient::Zeta => self.zeta,
            Coefficient::Delta => self.delta,
            Coefficient::Kappa => self.kappa,
        }
    }

    pub fn set(&mut self, coef: Coefficient, value: f64) {
        let slot = match coef {
            Coefficient::Mu => &mut self.mu,
            Coefficient::Sigma => &mut self.sigma,
            Coefficient::Lambda => &mut self.lambda_m,
            Coefficient::Gamma => &mut self.gamma,
            Coefficient::Epsilon => &mut self.epsilon,
            Coefficient::Zeta => &mut self.zeta,
            Coefficient::Delta => &mut self.delta,
            Coefficient::Kappa => &mut self.kappa,
        };
        *slot = value;
    }

    pub fn validate(&self, lsp: Lsp) -> Result<()> {
        for coef in Coefficient::ALL {
            if !self.get(coef).is_finite() {
                return Err(Error::Invalid {
                    key: format!("{lsp}_{}", coef.as_str()),
                    reason: "must be finite".into(),
                });
            }
        }
        if self.lambda_m < 0.0 {
            return Err(Error::Invalid {
                key: format!("{lsp}_lambda"),
                reason: format!("decorrelation distance must be >= 0, got {}", self.lambda_m),
            });
        }
        Ok(())
    }

    /// Deterministic part of the model.
    pub fn mean(&self, cov: &Covariates) -> f64 {
        self.mu
            + self.gamma * cov.f_ghz.log10()
            + self.epsilon * cov.d_2d.log10()
            + self.zeta * cov.h_tx.log10()
    }

    /// Standard deviation at the given covariates, floored at zero.
    ///
    /// Several printed reference values are negative and only become
    /// positive through the distance term.
    pub fn std(&self, cov: &Covariates) -> f64 {
        (self.sigma + self.delta * cov.f_ghz.log10() + self.kappa * cov.d_2d.log10()).max(0.0)
    }

    /// Maps a standard-normal draw to a value of this LSP.
    pub fn realize(&self, cov: &Covariates, x: f64) -> f64 {
        self.mean(cov) + x * self.std(cov)
    }
}

/// Mean of `desc` at raw covariates, validating them first.
pub fn eval_mean(desc: &LspDescriptor, f_ghz: f64, d_2d: f64, h_tx: f64) -> Result<f64> {
    Ok(desc.mean(&Covariates::new(f_ghz, d_2d, h_tx)?))
}

/// Standard deviation of `desc`; TX height does not enter the spread.
pub fn eval_std(desc: &LspDescriptor, f_ghz: f64, d_2d: f64) -> Result<f64> {
    Ok(desc.std(&Covariates::new(f_ghz, d_2d, 1.0)?))
}

pub fn realize_lsp(desc: &LspDescriptor, f_ghz: f64, d_2d: f64, h_tx: f64, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("standard-normal draw must be finite, got {x}")));
    }
    Ok(desc.realize(&Covariates::new(f_ghz, d_2d, h_tx)?, x))
}

/// 8x8 correlation matrix over [`Lsp::CORRELATED`].
pub type CorrMatrix = [[f64; 8]; 8];

pub fn identity_corr() -> CorrMatrix {
    let mut m = [[0.0; 8]; 8];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

/// LSP tables for one scenario and propagation condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTable {
    pub name: String,
    pub condition: Condition,
    lsp: [Option<LspDescriptor>; 9],
    fixed: [FixedMask; 9],
    pub r_tau: f64,
    pub cross_corr: CorrMatrix,
}

impl ScenarioTable {
    /// Builds and validates a table. Every LSP except KF must be present.
    pub fn new(
        name: impl Into<String>,
        condition: Condition,
        lsp: [Option<LspDescriptor>; 9],
        fixed: [FixedMask; 9],
        r_tau: f64,
        cross_corr: CorrMatrix,
    ) -> Result<Self> {
        let table = ScenarioTable {
            name: name.into(),
            condition,
            lsp,
            fixed,
            r_tau,
            cross_corr,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        for l in Lsp::ALL {
            match &self.lsp[l.index()] {
                Some(desc) => desc.validate(l)?,
                None if l == Lsp::Kf => {}
                None => {
                    return Err(Error::Invalid {
                        key: l.to_string(),
                        reason: "only KF may be absent from a scenario table".into(),
                    })
                }
            }
        }
        if !(self.r_tau > 1.0 && self.r_tau.is_finite()) {
            return Err(Error::Invalid {
                key: "r_tau".into(),
                reason: format!("delay factor must be > 1, got {}", self.r_tau),
            });
        }
        validate_corr(&self.cross_corr)
    }

    /// Descriptor for `lsp`. Panics for an absent KF; use [`Self::get`] when
    /// absence is possible.
    pub fn lsp(&self, lsp: Lsp) -> &LspDescriptor {
        self.lsp[lsp.index()]
            .as_ref()
            .unwrap_or_else(|| panic!("{lsp} is absent from scenario {}", self.name))
    }

    pub fn get(&self, lsp: Lsp) -> Option<&LspDescriptor> {
        self.lsp[lsp.index()].as_ref()
    }

    pub fn get_mut(&mut self, lsp: Lsp) -> Option<&mut LspDescriptor> {
        self.lsp[lsp.index()].as_mut()
    }

    pub fn set_lsp(&mut self, lsp: Lsp, desc: Option<LspDescriptor>) {
        self.lsp[lsp.index()] = desc;
    }

    pub fn fixed(&self, lsp: Lsp) -> FixedMask {
        self.fixed[lsp.index()]
    }

    pub fn set_fixed(&mut self, lsp: Lsp, mask: FixedMask) {
        self.fixed[lsp.index()] = mask;
    }

    pub fn has_kf(&self) -> bool {
        self.get(Lsp::Kf).is_some()
    }

    /// Correlation between two stochastic LSPs; PL has none.
    pub fn corr(&self, a: Lsp, b: Lsp) -> Option<f64> {
        Some(self.cross_corr[a.corr_index()?][b.corr_index()?])
    }

    /// Deterministic path loss in dB. TX height does not enter.
    pub fn path_loss(&self, f_ghz: f64, d_2d: f64) -> Result<f64> {
        positive("f_ghz", f_ghz)?;
        positive("d_2d", d_2d)?;
        let pl = self.lsp(Lsp::Pl);
        Ok(pl.mu + pl.gamma * f_ghz.log10() + pl.epsilon * d_2d.log10())
    }
}

pub fn path_loss(table: &ScenarioTable, f_ghz: f64, d_2d: f64) -> Result<f64> {
    table.path_loss(f_ghz, d_2d)
}

fn corr_key(i: usize, j: usize) -> String {
    format!("xcorr {} {}", Lsp::CORRELATED[i], Lsp::CORRELATED[j])
}

#[allow(clippy::needless_range_loop)]
pub(crate) fn validate_corr(m: &CorrMatrix) -> Result<()> {
    for i in 0..8 {
        if m[i][i] != 1.0 {
            return Err(Error::Invalid {
                key: corr_key(i, i),
                reason: format!("diagonal must be 1, got {}", m[i][i]),
            });
        }
        for j in 0..8 {
            let v = m[i][j];
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::Invalid {
                    key: corr_key(i, j),
                    reason: format!("correlation must lie in [-1, 1], got {v}"),
                });
            }
            if v != m[j][i] {
                return Err(Error::Invalid {
                    key: corr_key(i, j),
                    reason: format!("matrix is not symmetric ({v} vs {})", m[j][i]),
                });
            }
        }
    }
    Ok(())
}
