use crate::error::{Error, Result};
use crate::fields::{LspRealization, Point};
use crate::params::{Condition, Covariates, Lsp};

/// Per-LSP values in native units, indexed by [`Lsp::index`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LspValues([Option<f64>; 9]);

impl LspValues {
    pub fn get(&self, lsp: Lsp) -> Option<f64> {
        self.0[lsp.index()]
    }

    pub fn set(&mut self, lsp: Lsp, value: Option<f64>) {
        self.0[lsp.index()] = value;
    }
}

impl From<&LspRealization> for LspValues {
    fn from(r: &LspRealization) -> Self {
        let mut v = LspValues::default();
        for l in Lsp::ALL {
            v.set(l, r.value(l));
        }
        v
    }
}

/// One observation: a snapshot, or the average of the snapshots inside one
/// averaging interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub position: Point,
    pub covariates: Covariates,
    pub condition: Condition,
    pub values: LspValues,
}

impl SampleRecord {
    pub fn from_realization(r: &LspRealization, condition: Condition) -> Self {
        SampleRecord {
            position: r.rx,
            covariates: r.covariates,
            condition,
            values: LspValues::from(r),
        }
    }
}

/// Reduces a track of snapshots to one record per `interval_m` of
/// arclength. LSPs are averaged in their native (log/dB) units; position
/// and covariates are the per-interval centroids. Intervals without
/// snapshots produce no record.
pub fn average_intervals(track: &[SampleRecord], interval_m: f64) -> Result<Vec<SampleRecord>> {
    if track.is_empty() {
        return Err(Error::Empty("track"));
    }
    if !(interval_m > 0.0) || !interval_m.is_finite() {
        return Err(Error::Domain { name: "averaging interval", value: interval_m });
    }
    let condition = track[0].condition;
    if let Some(other) = track.iter().find(|r| r.condition != condition) {
        return Err(Error::InvalidArgument(format!(
            "track mixes {condition} and {} snapshots; average each condition separately",
            other.condition
        )));
    }
    let mut arclength = Vec::with_capacity(track.len());
    let mut s = 0.0;
    for (i, r) in track.iter().enumerate() {
        if i > 0 {
            s += track[i - 1].position.distance(r.position);
        }
        arclength.push(s);
    }
    let n_bins = ((s / interval_m).ceil() as usize).max(1);
    let mut bins: Vec<Vec<&SampleRecord>> = vec![Vec::new(); n_bins];
    for (r, s) in track.iter().zip(&arclength) {
        let b = ((s / interval_m).floor() as usize).min(n_bins - 1);
        bins[b].push(r);
    }
    bins.into_iter()
        .filter(|b| !b.is_empty())
        .map(|b| average(&b, condition))
        .collect()
}

fn average(bin: &[&SampleRecord], condition: Condition) -> Result<SampleRecord> {
    let n = bin.len() as f64;
    let mean = |f: &dyn Fn(&SampleRecord) -> f64| bin.iter().map(|r| f(r)).sum::<f64>() / n;
    let position = Point::new(mean(&|r| r.position.x), mean(&|r| r.position.y));
    let covariates = Covariates::new(
        mean(&|r| r.covariates.f_ghz()),
        mean(&|r| r.covariates.d_2d()),
        mean(&|r| r.covariates.h_tx()),
    )?;
    let mut values = LspValues::default();
    for l in Lsp::ALL {
        let finite: Vec<f64> = bin
            .iter()
            .filter_map(|r| r.values.get(l))
            .filter(|v| v.is_finite())
            .collect();
        if !finite.is_empty() {
            values.set(l, Some(finite.iter().sum::<f64>() / finite.len() as f64));
        }
    }
    Ok(SampleRecord {
        position,
        covariates,
        condition,
        values,
    })
}
