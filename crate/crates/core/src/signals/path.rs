use std::fmt::Write as _;

use super::SignalError;

/// Continuous piecewise-linear signal on `[0, T]` with value 0 at time 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSignal {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl PathSignal {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, SignalError> {
        if times.len() != values.len() {
            return Err(SignalError::InvalidSignal(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(SignalError::InvalidSignal(
                "need at least two breakpoints".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(SignalError::InvalidSignal(
                "first breakpoint must be 0".into(),
            ));
        }
        if values[0] != 0.0 {
            return Err(SignalError::InvalidSignal("signal must start at 0".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(SignalError::InvalidSignal("non-finite entry".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SignalError::InvalidSignal(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, values })
    }

    /// `t -> slope * t` on `[0, T]`.
    pub fn linear(slope: f64, horizon: f64) -> Result<Self, SignalError> {
        Self::new(vec![0.0, horizon], vec![0.0, slope * horizon])
    }

    pub fn zero(horizon: f64) -> Result<Self, SignalError> {
        Self::linear(0.0, horizon)
    }

    /// `periods` repetitions of `0 -> amplitude -> 0` on `[0, T]`.
    pub fn zigzag(amplitude: f64, periods: usize, horizon: f64) -> Result<Self, SignalError> {
        if periods == 0 {
            return Err(SignalError::InvalidSignal(
                "zigzag needs at least one period".into(),
            ));
        }
        let k = 2 * periods;
        let times = (0..=k).map(|i| horizon * i as f64 / k as f64).collect();
        let values = (0..=k)
            .map(|i| if i % 2 == 1 { amplitude } else { 0.0 })
            .collect();
        Self::new(times, values)
    }

    /// Piecewise-linear interpolation of `(times, values)` sampled on a uniform grid.
    pub fn from_uniform(horizon: f64, values: Vec<f64>) -> Result<Self, SignalError> {
        let k = values.len().saturating_sub(1).max(1);
        let times = (0..values.len())
            .map(|i| horizon * i as f64 / k as f64)
            .collect();
        Self::new(times, values)
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn segments(&self) -> usize {
        self.times.len() - 1
    }

    /// Index of the segment `[t_i, t_{i+1}]` containing `t` (clamped to the ends).
    pub fn segment_index(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&s| s <= t);
        k.saturating_sub(1).min(self.segments() - 1)
    }

    /// Slope on segment `i`.
    pub fn segment_slope(&self, i: usize) -> f64 {
        (self.values[i + 1] - self.values[i]) / (self.times[i + 1] - self.times[i])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment_index(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        if t == t0 {
            return self.values[i];
        }
        if t == t1 {
            return self.values[i + 1];
        }
        let w = (t - t0) / (t1 - t0);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    /// Derivative at `t`, or `None` at a breakpoint where it is undefined.
    pub fn slope(&self, t: f64) -> Option<f64> {
        if self.is_breakpoint(t) {
            let i = self.times.iter().position(|&s| s == t).unwrap();
            if i == 0 || i == self.segments() {
                return Some(self.segment_slope(i.min(self.segments() - 1)));
            }
            let (a, b) = (self.segment_slope(i - 1), self.segment_slope(i));
            return if a == b { Some(a) } else { None };
        }
        Some(self.segment_slope(self.segment_index(t)))
    }

    pub fn is_breakpoint(&self, t: f64) -> bool {
        self.times.binary_search_by(|s| s.total_cmp(&t)).is_ok()
    }

    /// Sorted union of both breakpoint sets, truncated to `[0, horizon]`.
    pub fn merged_breakpoints(&self, other: &PathSignal, horizon: f64) -> Vec<f64> {
        let mut ts: Vec<f64> = self
            .times
            .iter()
            .chain(other.times.iter())
            .copied()
            .filter(|&t| t <= horizon)
            .collect();
        ts.push(horizon);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// Largest absolute value on `[0, T]`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Total variation on `[0, T]`.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Two-column CSV `time,value` with round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(s, "{t:?},{v:?}").unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, SignalError> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',');
            let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (a.trim(), b.trim()),
                _ => {
                    return Err(SignalError::Parse {
                        line: idx + 1,
                        message: "expected two columns".into(),
                    })
                }
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(t), Ok(v)) => {
                    times.push(t);
                    values.push(v);
                }
                _ if idx == 0 => continue,
                _ => {
                    return Err(SignalError::Parse {
                        line: idx + 1,
                        message: format!("cannot parse '{line}'"),
                    })
                }
            }
        }
        Self::new(times, values)
    }
}
