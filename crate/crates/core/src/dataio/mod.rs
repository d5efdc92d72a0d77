//! Measured-trace records, their CSV schemas, and canonical JSON reports.
//!
//! Every record validates its invariants on construction, so code
//! downstream of a loader never sees a malformed trace.

mod csvio;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csvio::{load_csv, read_csv, save_csv, write_csv, Schema};
pub use report::{digest_bytes, export_report, format_g10, to_canonical_json, write_report, Report};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub wavelength_nm: Vec<f64>,
    pub counts: Vec<f64>,
    pub timestamp_s: Option<f64>,
    pub temperature_k: Option<f64>,
}

impl Spectrum {
    pub fn new(wavelength_nm: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        let s = Spectrum { wavelength_nm, counts, timestamp_s: None, temperature_k: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_time(mut self, timestamp_s: f64) -> Self {
        self.timestamp_s = Some(timestamp_s);
        self
    }

    pub fn with_temperature(mut self, temperature_k: f64) -> Self {
        self.temperature_k = Some(temperature_k);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.wavelength_nm.len() != self.counts.len() {
            return Err(Error::invalid(format!(
                "spectrum has {} wavelengths and {} counts",
                self.wavelength_nm.len(),
                self.counts.len()
            )));
        }
        check_ascending(&self.wavelength_nm, "wavelength_nm")?;
        check_counts(&self.counts)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Indices whose wavelength lies in `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.wavelength_nm.partition_point(|&w| w < lo);
        let b = self.wavelength_nm.partition_point(|&w| w <= hi);
        a..b.max(a)
    }
}

fn check_ascending(axis: &[f64], name: &str) -> Result<()> {
    for (i, v) in axis.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Data { row: i, message: format!("{name} is not finite") });
        }
    }
    for i in 1..axis.len() {
        if axis[i] <= axis[i - 1] {
            return Err(Error::Schema {
                row: i - 1,
                message: format!(
                    "{name} not strictly ascending ({} at row {} then {} at row {i})",
                    axis[i - 1],
                    i - 1,
                    axis[i]
                ),
            });
        }
    }
    Ok(())
}

fn check_counts(counts: &[f64]) -> Result<()> {
    for (i, &c) in counts.iter().enumerate() {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::Data { row: i, message: format!("count {c} is negative or not finite") });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepDirection {
    Up,
    Down,
}

impl SweepDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepDirection::Up => "up",
            SweepDirection::Down => "down",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "up" => Some(SweepDirection::Up),
            "down" => Some(SweepDirection::Down),
            _ => None,
        }
    }
}

/// Cavity-length scan: piezo voltage (or time) against transmitted signal,
/// possibly containing several up and down ramps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanTrace {
    pub axis: Vec<f64>,
    pub signal: Vec<f64>,
    pub direction: Vec<SweepDirection>,
}

impl ScanTrace {
    pub fn new(axis: Vec<f64>, signal: Vec<f64>, direction: Vec<SweepDirection>) -> Result<Self> {
        let t = ScanTrace { axis, signal, direction };
        t.validate()?;
        Ok(t)
    }

    /// Single ramp in one direction.
    pub fn single(axis: Vec<f64>, signal: Vec<f64>, direction: SweepDirection) -> Result<Self> {
        let n = axis.len();
        ScanTrace::new(axis, signal, vec![direction; n])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.axis.len();
        if self.signal.len() != n || self.direction.len() != n {
            return Err(Error::invalid(format!(
                "scan arrays differ in length: axis {n}, signal {}, direction {}",
                self.signal.len(),
                self.direction.len()
            )));
        }
        for i in 0..n {
            if !self.axis[i].is_finite() || !self.signal[i].is_finite() {
                return Err(Error::Data { row: i, message: "non-finite scan sample".into() });
            }
        }
        for r in self.ramps() {
            let dir = self.direction[r.start];
            for i in r.start + 1..r.end {
                let ok = match dir {
                    SweepDirection::Up => self.axis[i] > self.axis[i - 1],
                    SweepDirection::Down => self.axis[i] < self.axis[i - 1],
                };
                if !ok {
                    return Err(Error::Schema {
                        row: i - 1,
                        message: format!("axis not monotone within {} sweep", dir.as_str()),
                    });
                }
            }
        }
        Ok(())
    }

    /// Index ranges of consecutive samples sharing a sweep direction.
    pub fn ramps(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.direction.len() {
            if i == self.direction.len() || self.direction[i] != self.direction[start] {
                if i > start {
                    out.push(start..i);
                }
                start = i;
            }
        }
        out
    }
}

/// Photon arrival-time histogram (TCSPC decay or start-stop correlation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeHistogram {
    pub bin_centers_ns: Vec<f64>,
    pub counts: Vec<u64>,
    pub bin_width_ns: f64,
}

impl TimeHistogram {
    pub fn new(bin_centers_ns: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if bin_centers_ns.len() < 2 {
            return Err(Error::InsufficientData("histogram needs at least two bins".into()));
        }
        let bin_width_ns = bin_centers_ns[1] - bin_centers_ns[0];
        let h = TimeHistogram { bin_centers_ns, counts, bin_width_ns };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bin_centers_ns.len() != self.counts.len() {
            return Err(Error::invalid(format!(
                "histogram has {} bins and {} counts",
                self.bin_centers_ns.len(),
                self.counts.len()
            )));
        }
        check_ascending(&self.bin_centers_ns, "t_ns")?;
        let w = self.bin_width_ns;
        if !(w > 0.0) {
            return Err(Error::invalid("bin width must be positive"));
        }
        // Spacing is compared against the bin width with an absolute slack of
        // a few ulps of the bin centres, so large time offsets stay legal.
        for i in 1..self.bin_centers_ns.len() {
            let d = self.bin_centers_ns[i] - self.bin_centers_ns[i - 1];
            let slack = 1e-9 * w + 4.0 * f64::EPSILON * self.bin_centers_ns[i].abs();
            if (d - w).abs() > slack {
                return Err(Error::Schema { row: i, message: format!("bin spacing {d} differs from width {w}") });
            }
        }
        Ok(())
    }

    pub fn counts_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Time-ordered spectra on a shared wavelength grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMap {
    pub frames: Vec<Spectrum>,
    pub frame_period_s: f64,
}

impl SpectralMap {
    /// Frames without a timestamp are stamped `index · frame_period_s`.
    pub fn new(mut frames: Vec<Spectrum>, frame_period_s: f64) -> Result<Self> {
        for (i, f) in frames.iter_mut().enumerate() {
            if f.timestamp_s.is_none() {
                f.timestamp_s = Some(i as f64 * frame_period_s);
            }
        }
        let m = SpectralMap { frames, frame_period_s };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frame_period_s >= 0.0) {
            return Err(Error::invalid("frame period must be non-negative"));
        }
        let Some(first) = self.frames.first() else { return Ok(()) };
        for (i, f) in self.frames.iter().enumerate() {
            f.validate()?;
            if f.wavelength_nm != first.wavelength_nm {
                return Err(Error::Schema { row: i, message: format!("frame {i} uses a different wavelength grid") });
            }
        }
        Ok(())
    }
}

/// Generic abscissa/ordinate data with per-point uncertainties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XyData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl XyData {
    pub fn new(x: Vec<f64>, y: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let d = XyData { x, y, sigma };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if self.y.len() != n || self.sigma.len() != n {
            return Err(Error::invalid("xy arrays differ in length"));
        }
        for i in 0..n {
            if !self.x[i].is_finite() || !self.y[i].is_finite() {
                return Err(Error::Data { row: i, message: "non-finite value".into() });
            }
            if !(self.sigma[i] > 0.0) || !self.sigma[i].is_finite() {
                return Err(Error::Data { row: i, message: format!("sigma {} must be positive", self.sigma[i]) });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceSet {
    Spectrum(Spectrum),
    Scan(ScanTrace),
    Histogram(TimeHistogram),
    Xy(XyData),
    SpectralMap(SpectralMap),
}

impl TraceSet {
    pub fn schema(&self) -> Schema {
        match self {
            TraceSet::Spectrum(_) => Schema::Spectrum,
            TraceSet::Scan(_) => Schema::Scan,
            TraceSet::Histogram(_) => Schema::Histogram,
            TraceSet::Xy(_) => Schema::Xy,
            TraceSet::SpectralMap(_) => Schema::SpectralMap,
        }
    }
}
