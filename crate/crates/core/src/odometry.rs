//! Wheel-speed / yaw-rate dead reckoning.
//!
//! Each sample holds its speed and yaw rate until the next sample. Over a
//! held interval the vehicle moves on a circular arc; the displacement is
//! the arc chord, taken along the heading at the interval midpoint.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest tolerated spacing between consecutive samples inside an
/// integration window.
pub const MAX_SAMPLE_GAP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdometrySample {
    /// Seconds.
    pub timestamp: f64,
    /// Metres per second along the vehicle heading.
    pub wheel_speed: f64,
    /// Radians per second, counter-clockwise seen from above.
    pub yaw_rate: f64,
}

/// Planar rigid motion (vehicle frame at the start of the window: x forward,
/// y left).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarDelta {
    pub dx: f64,
    pub dy: f64,
    pub dpsi: f64,
}

impl PlanarDelta {
    pub const ZERO: PlanarDelta = PlanarDelta {
        dx: 0.0,
        dy: 0.0,
        dpsi: 0.0,
    };

    /// `self` followed by `next`, where `next` is expressed in the frame
    /// reached by `self`.
    pub fn compose(&self, next: &PlanarDelta) -> PlanarDelta {
        let (s, c) = self.dpsi.sin_cos();
        PlanarDelta {
            dx: self.dx + c * next.dx - s * next.dy,
            dy: self.dy + s * next.dx + c * next.dy,
            dpsi: self.dpsi + next.dpsi,
        }
    }

    /// Moves with constant speed and yaw rate for `dt` seconds.
    pub fn advance(&self, speed: f64, yaw_rate: f64, dt: f64) -> PlanarDelta {
        let half = 0.5 * yaw_rate * dt;
        let chord = speed * dt * sinc(half);
        let heading = self.dpsi + half;
        PlanarDelta {
            dx: self.dx + chord * heading.cos(),
            dy: self.dy + chord * heading.sin(),
            dpsi: self.dpsi + yaw_rate * dt,
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// A validated odometry log with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct OdometryLog {
    samples: Vec<OdometrySample>,
}

impl OdometryLog {
    pub fn new(samples: Vec<OdometrySample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Odometry("log is empty".into()));
        }
        for s in &samples {
            if !(s.timestamp.is_finite() && s.wheel_speed.is_finite() && s.yaw_rate.is_finite()) {
                return Err(Error::Odometry(format!("non-finite sample at t = {}", s.timestamp)));
            }
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].timestamp <= w[0].timestamp) {
            return Err(Error::Odometry(format!(
                "timestamps not strictly increasing at t = {}",
                w[1].timestamp
            )));
        }
        Ok(OdometryLog { samples })
    }

    pub fn samples(&self) -> &[OdometrySample] {
        &self.samples
    }

    /// Integrates the log over `[t0, t1]`.
    pub fn dead_reckon(&self, t0: f64, t1: f64) -> Result<PlanarDelta> {
        let s = &self.samples;
        let (first, last) = (s[0].timestamp, s[s.len() - 1].timestamp);
        if !(t0 <= t1) {
            return Err(Error::Odometry(format!("empty window [{t0}, {t1}]")));
        }
        if t0 < first || t1 > last {
            return Err(Error::Odometry(format!(
                "window [{t0}, {t1}] not covered by samples [{first}, {last}]"
            )));
        }
        let mut i = s.partition_point(|x| x.timestamp <= t0) - 1;
        let mut pose = PlanarDelta::ZERO;
        let mut t = t0;
        while t < t1 {
            let next = s.get(i + 1).map(|n| n.timestamp);
            if let Some(n) = next {
                if n - s[i].timestamp > MAX_SAMPLE_GAP {
                    return Err(Error::Odometry(format!(
                        "gap of {} s between samples at {} and {n}",
                        n - s[i].timestamp,
                        s[i].timestamp
                    )));
                }
            }
            let end = next.map_or(t1, |n| n.min(t1));
            pose = pose.advance(s[i].wheel_speed, s[i].yaw_rate, end - t);
            t = end;
            i += 1;
        }
        Ok(pose)
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut samples = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| format!("line {}: {e}", n + 1))?;
            if fields.len() != 3 {
                return Err(format!("line {}: expected 3 fields, got {}", n + 1, fields.len()));
            }
            samples.push(OdometrySample {
                timestamp: fields[0],
                wheel_speed: fields[1],
                yaw_rate: fields[2],
            });
        }
        OdometryLog::new(samples).map_err(|e| e.to_string())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# timestamp wheel_speed yaw_rate\n");
        for s in &self.samples {
            out.push_str(&format!("{} {} {}\n", s.timestamp, s.wheel_speed, s.yaw_rate));
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|m| Error::format(path, m))
    }
}
