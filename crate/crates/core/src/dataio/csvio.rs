use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ScanTrace, SpectralMap, Spectrum, SweepDirection, TimeHistogram, TraceSet, XyData};
use crate::error::{Error, Result};

/// Column layouts understood by the loader. Row indices in errors count data
/// rows from zero, excluding the header.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    Spectrum,
    Scan,
    Histogram,
    Xy,
    SpectralMap,
}

impl Schema {
    pub const ALL: [Schema; 5] = [Schema::Spectrum, Schema::Scan, Schema::Histogram, Schema::Xy, Schema::SpectralMap];

    pub fn name(self) -> &'static str {
        match self {
            Schema::Spectrum => "spectrum",
            Schema::Scan => "scan",
            Schema::Histogram => "histogram",
            Schema::Xy => "xy",
            Schema::SpectralMap => "spectral_map",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            Schema::Spectrum => &["wavelength_nm", "counts"],
            Schema::Scan => &["axis", "signal", "direction"],
            Schema::Histogram => &["t_ns", "counts"],
            Schema::Xy => &["x", "y", "sigma"],
            Schema::SpectralMap => &["time_s", "temperature_k", "wavelength_nm", "counts"],
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        let key = name.trim().replace('-', "_");
        Schema::ALL
            .into_iter()
            .find(|s| s.name() == key)
            .ok_or_else(|| Error::Unknown { kind: "schema", name: name.to_string() })
    }
}

impl std::fmt::Display for Schema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Schema {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Schema::parse(s)
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: Schema) -> Result<TraceSet> {
    let file = File::open(path)?;
    read_csv(BufReader::new(file), schema)
}

pub fn save_csv(path: impl AsRef<Path>, traces: &TraceSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv(&mut w, traces)?;
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map(|p| (p.line() as usize).saturating_sub(2)).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Schema { row, message: format!("{other:?}") },
    }
}

fn field_f64(rec: &csv::StringRecord, col: usize, name: &str, row: usize) -> Result<f64> {
    let raw = rec.get(col).unwrap_or("").trim();
    raw.parse::<f64>()
        .map_err(|_| Error::Data { row, message: format!("column {name}: cannot parse {raw:?} as a number") })
}

pub fn read_csv<R: Read>(reader: R, schema: Schema) -> Result<TraceSet> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let expected = schema.header();
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::Schema {
            row: 0,
            message: format!("{schema} header must be `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }

    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); expected.len()];
    let mut directions = Vec::new();
    let mut temperatures: Vec<Option<f64>> = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        if rec.len() != expected.len() {
            return Err(Error::Schema {
                row,
                message: format!("expected {} fields, found {}", expected.len(), rec.len()),
            });
        }
        for (c, name) in expected.iter().enumerate() {
            match (schema, *name) {
                (Schema::Scan, "direction") => {
                    let d = SweepDirection::parse(&rec[c]).ok_or_else(|| Error::Data {
                        row,
                        message: format!("direction must be `up` or `down`, found {:?}", &rec[c]),
                    })?;
                    directions.push(d);
                }
                (Schema::SpectralMap, "temperature_k") => {
                    let raw = rec[c].trim();
                    temperatures.push(if raw.is_empty() { None } else { Some(field_f64(&rec, c, name, row)?) });
                }
                _ => cols[c].push(field_f64(&rec, c, name, row)?),
            }
        }
    }

    match schema {
        Schema::Spectrum => {
            let counts = std::mem::take(&mut cols[1]);
            Ok(TraceSet::Spectrum(Spectrum::new(std::mem::take(&mut cols[0]), counts)?))
        }
        Schema::Scan => {
            let signal = std::mem::take(&mut cols[1]);
            Ok(TraceSet::Scan(ScanTrace::new(std::mem::take(&mut cols[0]), signal, directions)?))
        }
        Schema::Histogram => {
            let counts = cols[1]
                .iter()
                .enumerate()
                .map(|(row, &c)| {
                    if c >= 0.0 && c.fract() == 0.0 && c <= u64::MAX as f64 {
                        Ok(c as u64)
                    } else {
                        Err(Error::Data { row, message: format!("histogram count {c} is not a non-negative integer") })
                    }
                })
                .collect::<Result<Vec<u64>>>()?;
            Ok(TraceSet::Histogram(TimeHistogram::new(std::mem::take(&mut cols[0]), counts)?))
        }
        Schema::Xy => {
            let sigma = std::mem::take(&mut cols[2]);
            let y = std::mem::take(&mut cols[1]);
            Ok(TraceSet::Xy(XyData::new(std::mem::take(&mut cols[0]), y, sigma)?))
        }
        Schema::SpectralMap => {
            let times = &cols[0];
            let wl = &cols[2];
            let counts = &cols[3];
            Ok(TraceSet::SpectralMap(assemble_map(times, &temperatures, wl, counts)?))
        }
    }
}

fn assemble_map(times: &[f64], temps: &[Option<f64>], wl: &[f64], counts: &[f64]) -> Result<SpectralMap> {
    let mut frames = Vec::new();
    let mut start = 0;
    for i in 1..=times.len() {
        if i == times.len() || times[i] != times[start] {
            if times[start].is_nan() {
                return Err(Error::Data { row: start, message: "time_s is not a number".into() });
            }
            if i < times.len() && times[i] < times[start] {
                return Err(Error::Schema { row: i - 1, message: "time_s must be non-decreasing".into() });
            }
            let mut s = Spectrum::new(wl[start..i].to_vec(), counts[start..i].to_vec())
                .map_err(|e| offset_row(e, start))?
                .with_time(times[start]);
            s.temperature_k = temps[start];
            frames.push(s);
            start = i;
        }
    }
    let period = if frames.len() > 1 {
        frames[1].timestamp_s.unwrap_or(0.0) - frames[0].timestamp_s.unwrap_or(0.0)
    } else {
        0.0
    };
    SpectralMap::new(frames, period).map_err(|e| match e {
        Error::Schema { row, message } => Error::Schema { row, message: format!("frame-level: {message}") },
        other => other,
    })
}

fn offset_row(e: Error, start: usize) -> Error {
    match e {
        Error::Schema { row, message } => Error::Schema { row: row + start, message },
        Error::Data { row, message } => Error::Data { row: row + start, message },
        other => other,
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn write_csv<W: Write>(writer: W, traces: &TraceSet) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("{other:?}")),
    };
    w.write_record(traces.schema().header()).map_err(io)?;
    match traces {
        TraceSet::Spectrum(s) => {
            for (x, c) in s.wavelength_nm.iter().zip(&s.counts) {
                w.write_record([fmt(*x), fmt(*c)]).map_err(io)?;
            }
        }
        TraceSet::Scan(t) => {
            for i in 0..t.axis.len() {
                w.write_record([fmt(t.axis[i]), fmt(t.signal[i]), t.direction[i].as_str().to_string()]).map_err(io)?;
            }
        }
        TraceSet::Histogram(h) => {
            for (t, c) in h.bin_centers_ns.iter().zip(&h.counts) {
                w.write_record([fmt(*t), c.to_string()]).map_err(io)?;
            }
        }
        TraceSet::Xy(d) => {
            for i in 0..d.x.len() {
                w.write_record([fmt(d.x[i]), fmt(d.y[i]), fmt(d.sigma[i])]).map_err(io)?;
            }
        }
        TraceSet::SpectralMap(m) => {
            for (k, f) in m.frames.iter().enumerate() {
                let t = fmt(f.timestamp_s.unwrap_or(k as f64 * m.frame_period_s));
                let temp = f.temperature_k.map(fmt).unwrap_or_default();
                for (x, c) in f.wavelength_nm.iter().zip(&f.counts) {
                    w.write_record([t.clone(), temp.clone(), fmt(*x), fmt(*c)]).map_err(io)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, schema: Schema) -> Result<TraceSet> {
        read_csv(text.as_bytes(), schema)
    }

    #[test]
    fn wrong_header_is_rejected() {
        let err = parse("lambda,counts\n1,2\n", Schema::Spectrum).unwrap_err();
        assert!(matches!(err, Error::Schema { row: 0, .. }), "{err}");
    }

    #[test]
    fn descending_wavelengths_name_row_zero() {
        let err = parse("wavelength_nm,counts\n620,1\n619,2\n618,3\n", Schema::Spectrum).unwrap_err();
        assert!(matches!(err, Error::Schema { row: 0, .. }), "{err}");
    }

    #[test]
    fn unparsable_number_reports_row() {
        let err = parse("wavelength_nm,counts\n1,2\n2,abc\n", Schema::Spectrum).unwrap_err();
        assert!(matches!(err, Error::Data { row: 1, .. }), "{err}");
    }

    #[test]
    fn scan_direction_roundtrip() {
        let text = "axis,signal,direction\n0,1,up\n1,2,up\n1,3,down\n0,4,down\n";
        let t = parse(text, Schema::Scan).unwrap();
        let mut out = Vec::new();
        write_csv(&mut out, &t).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn histogram_rejects_fractional_counts() {
        let err = parse("t_ns,counts\n0,1\n1,2.5\n", Schema::Histogram).unwrap_err();
        assert!(matches!(err, Error::Data { row: 1, .. }), "{err}");
    }

    #[test]
    fn spectral_map_groups_frames_by_time() {
        let text = "time_s,temperature_k,wavelength_nm,counts\n0,10,1,5\n0,10,2,6\n2,,1,7\n2,,2,8\n";
        let TraceSet::SpectralMap(m) = parse(text, Schema::SpectralMap).unwrap() else { panic!() };
        assert_eq!(m.frames.len(), 2);
        assert_eq!(m.frame_period_s, 2.0);
        assert_eq!(m.frames[0].temperature_k, Some(10.0));
        assert_eq!(m.frames[1].temperature_k, None);
        let mut out = Vec::new();
        write_csv(&mut out, &TraceSet::SpectralMap(m)).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn schema_names_parse() {
        for s in Schema::ALL {
            assert_eq!(Schema::parse(s.name()).unwrap(), s);
        }
        assert_eq!(Schema::parse("spectral-map").unwrap(), Schema::SpectralMap);
        assert!(Schema::parse("bogus").is_err());
    }
}
