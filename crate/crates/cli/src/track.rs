use ichan_core::params::Condition;
use ichan_core::Point;

use crate::error::{CliError, Result};

/// Where the transmitter sits during a run.
#[derive(Debug, Clone, PartialEq)]
pub enum TxPlacement {
    Fixed(Point),
    /// Moves along its own polyline in step with the receiver: at each
    /// sample the TX is at the same arclength fraction as the RX.
    Track(Vec<Point>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackSpec {
    pub waypoints: Vec<Point>,
    pub sample_spacing_m: f64,
    pub tx: TxPlacement,
    pub tx_height_m: f64,
    pub f_ghz: f64,
    pub condition: Condition,
    pub seed: u64,
}

/// One sample along the track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub rx: Point,
    pub tx: Point,
}

impl TrackSpec {
    pub fn validate(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(CliError::Usage("--track needs at least one waypoint".into()));
        }
        if !(self.sample_spacing_m > 0.0) || !self.sample_spacing_m.is_finite() {
            return Err(CliError::Usage(format!("--spacing must be positive, got {}", self.sample_spacing_m)));
        }
        if !(self.tx_height_m > 0.0) || !self.tx_height_m.is_finite() {
            return Err(CliError::Usage(format!("--tx-height must be positive, got {}", self.tx_height_m)));
        }
        if !(self.f_ghz > 0.0) || !self.f_ghz.is_finite() {
            return Err(CliError::Usage(format!("--freq-ghz must be positive, got {}", self.f_ghz)));
        }
        if let TxPlacement::Track(t) = &self.tx {
            if t.is_empty() {
                return Err(CliError::Usage("--tx-track needs at least one waypoint".into()));
            }
        }
        Ok(())
    }

    /// Samples every `sample_spacing_m` of arclength, starting at the first
    /// waypoint.
    pub fn samples(&self) -> Result<Vec<Sample>> {
        self.validate()?;
        let length = polyline_length(&self.waypoints);
        let n = (length / self.sample_spacing_m + 1e-9).floor() as usize + 1;
        Ok((0..n)
            .map(|i| {
                let s = i as f64 * self.sample_spacing_m;
                let rx = point_at(&self.waypoints, s);
                let tx = match &self.tx {
                    TxPlacement::Fixed(p) => *p,
                    TxPlacement::Track(t) => {
                        let frac = if length > 0.0 { s / length } else { 0.0 };
                        point_at(t, frac * polyline_length(t))
                    }
                };
                Sample { rx, tx }
            })
            .collect())
    }
}

fn polyline_length(pts: &[Point]) -> f64 {
    pts.windows(2).map(|w| w[0].distance(w[1])).sum()
}

fn point_at(pts: &[Point], mut s: f64) -> Point {
    for w in pts.windows(2) {
        let seg = w[0].distance(w[1]);
        if s <= seg && seg > 0.0 {
            return w[0].lerp(w[1], s / seg);
        }
        s -= seg;
    }
    *pts.last().expect("non-empty polyline")
}

/// Parses `x,y` pairs separated by `;`.
pub fn parse_points(text: &str) -> Result<Vec<Point>> {
    text.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(parse_point)
        .collect()
}

pub fn parse_point(text: &str) -> Result<Point> {
    let bad = || CliError::Usage(format!("expected a point as `x,y` in meters, got `{}`", text.trim()));
    let (x, y) = text.split_once(',').ok_or_else(bad)?;
    let x: f64 = x.trim().parse().map_err(|_| bad())?;
    let y: f64 = y.trim().parse().map_err(|_| bad())?;
    if !x.is_finite() || !y.is_finite() {
        return Err(bad());
    }
    Ok(Point::new(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(waypoints: &str, spacing: f64) -> TrackSpec {
        TrackSpec {
            waypoints: parse_points(waypoints).unwrap(),
            sample_spacing_m: spacing,
            tx: TxPlacement::Fixed(Point::new(0.0, -5.0)),
            tx_height_m: 2.0,
            f_ghz: 5.4,
            condition: Condition::Los,
            seed: 1,
        }
    }

    #[test]
    fn sixty_meter_track_has_sixty_one_samples() {
        let s = spec("0,0;60,0", 1.0).samples().unwrap();
        assert_eq!(s.len(), 61);
        assert_eq!(s[60].rx, Point::new(60.0, 0.0));
    }

    #[test]
    fn samples_follow_corners() {
        let s = spec("0,0;10,0;10,10", 2.5).samples().unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s[4].rx, Point::new(10.0, 0.0));
        assert_eq!(s[6].rx, Point::new(10.0, 5.0));
    }

    #[test]
    fn single_waypoint_is_one_sample() {
        assert_eq!(spec("3,4", 1.0).samples().unwrap().len(), 1);
    }

    #[test]
    fn tx_track_moves_in_step() {
        let mut t = spec("0,0;10,0", 5.0);
        t.tx = TxPlacement::Track(parse_points("0,20;20,20").unwrap());
        let s = t.samples().unwrap();
        assert_eq!(s[1].tx, Point::new(10.0, 20.0));
        assert_eq!(s[2].tx, Point::new(20.0, 20.0));
    }

    #[test]
    fn malformed_points_are_usage_errors() {
        assert!(matches!(parse_points("1;2"), Err(CliError::Usage(_))));
        assert!(matches!(parse_point("a,b"), Err(CliError::Usage(_))));
        assert!(matches!(spec("0,0", 0.0).samples(), Err(CliError::Usage(_))));
    }
}
