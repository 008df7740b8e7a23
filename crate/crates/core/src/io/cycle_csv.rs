//! Drive-cycle CSV ingestion and emission.
//!
//! Columns are matched by header name, so their order is free:
//! `time_s`, `current_a` (discharge positive), `voltage_v`, `temp_c`, and the
//! optional `soc_ref`. Row numbers in errors count the header as row 1.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{DriveCycle, Sample};
use crate::model::constants::{celsius_to_kelvin, kelvin_to_celsius};

pub const COL_TIME: &str = "time_s";
pub const COL_CURRENT: &str = "current_a";
pub const COL_VOLTAGE: &str = "voltage_v";
pub const COL_TEMP: &str = "temp_c";
pub const COL_SOC_REF: &str = "soc_ref";

/// Gaps longer than this multiple of the median spacing are rejected unless resampling.
pub const MAX_GAP_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CycleLoadOptions {
    /// Resample onto a uniform grid with this spacing, s.
    pub resample: Option<f64>,
    /// Accept files without a `voltage_v` column (current-only profiles).
    pub voltage_optional: bool,
}

struct Columns {
    time: usize,
    current: usize,
    temp: usize,
    voltage: Option<usize>,
    soc_ref: Option<usize>,
}

fn locate(headers: &csv::StringRecord, opts: &CycleLoadOptions) -> Result<Columns> {
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let require = |name: &str| {
        find(name).ok_or_else(|| Error::data(Some(1), Some(name), "required column is missing"))
    };
    let voltage = match find(COL_VOLTAGE) {
        Some(i) => Some(i),
        None if opts.voltage_optional => None,
        None => return Err(Error::data(Some(1), Some(COL_VOLTAGE), "required column is missing")),
    };
    Ok(Columns {
        time: require(COL_TIME)?,
        current: require(COL_CURRENT)?,
        temp: require(COL_TEMP)?,
        voltage,
        soc_ref: find(COL_SOC_REF),
    })
}

struct Raw {
    t: Vec<f64>,
    current: Vec<f64>,
    temp: Vec<f64>,
    voltage: Option<Vec<f64>>,
    soc_ref: Option<Vec<f64>>,
}

fn parse_cell(rec: &csv::StringRecord, idx: usize, row: usize, name: &str) -> Result<f64> {
    let text = rec.get(idx).unwrap_or("").trim();
    let v: f64 = text
        .parse()
        .map_err(|_| Error::data(Some(row), Some(name), format!("cannot parse `{text}` as a number")))?;
    if !v.is_finite() {
        return Err(Error::data(Some(row), Some(name), "non-finite value"));
    }
    Ok(v)
}

/// Reads a cycle from any CSV source.
pub fn read_cycle<R: Read>(reader: R, opts: &CycleLoadOptions) -> Result<DriveCycle> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let cols = locate(rdr.headers()?, opts)?;
    let mut raw = Raw {
        t: Vec::new(),
        current: Vec::new(),
        temp: Vec::new(),
        voltage: cols.voltage.map(|_| Vec::new()),
        soc_ref: cols.soc_ref.map(|_| Vec::new()),
    };
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::data(Some(row), None, e.to_string()))?;
        let t = parse_cell(&rec, cols.time, row, COL_TIME)?;
        if let Some(&prev) = raw.t.last() {
            if t == prev {
                return Err(Error::data(Some(row), Some(COL_TIME), format!("duplicated timestamp {t}")));
            }
            if t < prev {
                return Err(Error::data(Some(row), Some(COL_TIME), format!("time goes backwards ({t} < {prev})")));
            }
        }
        raw.t.push(t);
        raw.current.push(parse_cell(&rec, cols.current, row, COL_CURRENT)?);
        raw.temp.push(celsius_to_kelvin(parse_cell(&rec, cols.temp, row, COL_TEMP)?));
        if let (Some(idx), Some(v)) = (cols.voltage, raw.voltage.as_mut()) {
            v.push(parse_cell(&rec, idx, row, COL_VOLTAGE)?);
        }
        if let (Some(idx), Some(v)) = (cols.soc_ref, raw.soc_ref.as_mut()) {
            v.push(parse_cell(&rec, idx, row, COL_SOC_REF)?);
        }
    }
    if raw.t.len() < 2 {
        return Err(Error::data(None, None, "a cycle needs at least two data rows"));
    }
    let raw = match opts.resample {
        Some(dt) => resample(&raw, dt)?,
        None => {
            check_gaps(&raw.t)?;
            raw
        }
    };
    let samples = raw
        .t
        .iter()
        .zip(&raw.current)
        .zip(&raw.temp)
        .map(|((&t, &current), &temp)| Sample { t, current, temp })
        .collect();
    let mut cycle = DriveCycle::new(samples).map_err(shift_row)?;
    if let Some(v) = raw.voltage {
        cycle = cycle.with_voltage(v).map_err(shift_row)?;
    }
    if let Some(s) = raw.soc_ref {
        cycle = cycle.with_soc_ref(s).map_err(shift_row)?;
    }
    Ok(cycle)
}

// DriveCycle reports 0-based sample indices; the file counts from the header.
fn shift_row(e: Error) -> Error {
    match e {
        Error::Data { row, column, reason } => Error::Data {
            row: row.map(|r| r + 2),
            column,
            reason,
        },
        other => other,
    }
}

fn median_step(t: &[f64]) -> f64 {
    let mut d: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    d.sort_by(f64::total_cmp);
    let m = d.len() / 2;
    if d.len() % 2 == 1 {
        d[m]
    } else {
        0.5 * (d[m - 1] + d[m])
    }
}

fn check_gaps(t: &[f64]) -> Result<()> {
    let med = median_step(t);
    for (i, w) in t.windows(2).enumerate() {
        let step = w[1] - w[0];
        if step > MAX_GAP_FACTOR * med {
            return Err(Error::data(
                Some(i + 3),
                Some(COL_TIME),
                format!("gap of {step} s exceeds {MAX_GAP_FACTOR}× the median spacing {med} s; resample to accept it"),
            ));
        }
    }
    Ok(())
}

fn interp(t: &[f64], y: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut j = 0;
    grid.iter()
        .map(|&g| {
            while j + 2 < t.len() && t[j + 1] < g {
                j += 1;
            }
            let w = ((g - t[j]) / (t[j + 1] - t[j])).clamp(0.0, 1.0);
            y[j] + w * (y[j + 1] - y[j])
        })
        .collect()
}

fn resample(raw: &Raw, dt: f64) -> Result<Raw> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("resample", format!("{dt} must be a positive number of seconds")));
    }
    let t0 = raw.t[0];
    let span = raw.t[raw.t.len() - 1] - t0;
    // tolerate rounding so that an exact multiple keeps its final sample
    let n = (span / dt + 1e-9).floor() as usize + 1;
    if n < 2 {
        return Err(Error::param("resample", format!("{dt} s is longer than the record")));
    }
    let grid: Vec<f64> = (0..n).map(|k| t0 + k as f64 * dt).collect();
    Ok(Raw {
        current: interp(&raw.t, &raw.current, &grid),
        temp: interp(&raw.t, &raw.temp, &grid),
        voltage: raw.voltage.as_ref().map(|v| interp(&raw.t, v, &grid)),
        soc_ref: raw.soc_ref.as_ref().map(|v| interp(&raw.t, v, &grid)),
        t: grid,
    })
}

/// Loads a cycle file that must carry measured voltage.
pub fn load_cycle(path: impl AsRef<Path>, resample: Option<f64>) -> Result<DriveCycle> {
    load_cycle_with(
        path,
        &CycleLoadOptions {
            resample,
            voltage_optional: false,
        },
    )
}

pub fn load_cycle_with(path: impl AsRef<Path>, opts: &CycleLoadOptions) -> Result<DriveCycle> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_cycle(std::io::BufReader::new(file), opts)
}

/// Writes a cycle in the same schema `read_cycle` accepts. `voltage` and
/// `soc_ref` override whatever the cycle carries.
pub fn write_cycle<W: Write>(
    writer: W,
    cycle: &DriveCycle,
    voltage: Option<&[f64]>,
    soc_ref: Option<&[f64]>,
) -> Result<()> {
    let voltage = voltage.or(cycle.voltage());
    let soc_ref = soc_ref.or(cycle.soc_ref());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![COL_TIME, COL_CURRENT];
    if voltage.is_some() {
        header.push(COL_VOLTAGE);
    }
    header.push(COL_TEMP);
    if soc_ref.is_some() {
        header.push(COL_SOC_REF);
    }
    w.write_record(&header)?;
    for (k, s) in cycle.samples().iter().enumerate() {
        let mut rec = vec![s.t.to_string(), s.current.to_string()];
        if let Some(v) = voltage {
            rec.push(v[k].to_string());
        }
        rec.push(kelvin_to_celsius(s.temp).to_string());
        if let Some(v) = soc_ref {
            rec.push(v[k].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<cycle output>".into(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<DriveCycle> {
        read_cycle(text.as_bytes(), &CycleLoadOptions::default())
    }

    #[test]
    fn three_rows_with_unit_conversion() {
        let c = read("time_s,current_a,voltage_v,temp_c\n0,1.0,3.3,25\n1,1.5,3.29,25\n2,0.0,3.31,0\n").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.dt(), 1.0);
        assert_eq!(c.samples()[0].temp, 298.15);
        assert_eq!(c.samples()[2].temp, 273.15);
        assert_eq!(c.samples()[1].current, 1.5);
        assert_eq!(c.voltage().unwrap(), &[3.3, 3.29, 3.31]);
        assert!(c.soc_ref().is_none());
    }

    #[test]
    fn column_order_is_free() {
        let a = read("time_s,current_a,voltage_v,temp_c,soc_ref\n0,1,3.3,25,0.5\n1,2,3.2,26,0.49\n").unwrap();
        let b = read("soc_ref,temp_c,voltage_v,time_s,current_a\n0.5,25,3.3,0,1\n0.49,26,3.2,1,2\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duplicated_timestamp_names_row() {
        let err = read("time_s,current_a,voltage_v,temp_c\n0,1,3.3,25\n1,1,3.3,25\n1,1,3.3,25\n").unwrap_err();
        match err {
            Error::Data { row, column, reason } => {
                assert_eq!(row, Some(4));
                assert_eq!(column.as_deref(), Some("time_s"));
                assert!(reason.contains("duplicated"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn backwards_time_and_bad_cells() {
        assert!(matches!(
            read("time_s,current_a,voltage_v,temp_c\n0,1,3.3,25\n2,1,3.3,25\n1,1,3.3,25\n"),
            Err(Error::Data { row: Some(4), .. })
        ));
        match read("time_s,current_a,voltage_v,temp_c\n0,1,3.3,25\n1,abc,3.3,25\n") {
            Err(Error::Data { row: Some(3), column: Some(c), .. }) => assert_eq!(c, "current_a"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_column() {
        match read("time_s,current_a,temp_c\n0,1,25\n1,1,25\n") {
            Err(Error::Data { column: Some(c), .. }) => assert_eq!(c, "voltage_v"),
            other => panic!("{other:?}"),
        }
        let opts = CycleLoadOptions { voltage_optional: true, ..Default::default() };
        let c = read_cycle("time_s,current_a,temp_c\n0,1,25\n1,1,25\n".as_bytes(), &opts).unwrap();
        assert!(c.voltage().is_none());
    }

    #[test]
    fn gaps_rejected_unless_resampled() {
        let text = "time_s,current_a,voltage_v,temp_c\n0,0,3.0,25\n1,1,3.1,25\n2,2,3.2,25\n6,6,3.6,25\n";
        match read(text) {
            Err(Error::Data { row: Some(5), .. }) => {}
            other => panic!("{other:?}"),
        }
        let opts = CycleLoadOptions { resample: Some(1.0), ..Default::default() };
        let c = read_cycle(text.as_bytes(), &opts).unwrap();
        assert_eq!(c.len(), 7);
        let i: Vec<f64> = c.currents().collect();
        assert_eq!(i, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let v = c.voltage().unwrap();
        assert!((v[4] - 3.4).abs() < 1e-12);
    }

    #[test]
    fn jittered_spacing_needs_resampling() {
        let text = "time_s,current_a,voltage_v,temp_c\n0,0,3.0,25\n1.1,1,3.1,25\n2,2,3.2,25\n";
        assert!(read(text).is_err());
        let opts = CycleLoadOptions { resample: Some(0.5), ..Default::default() };
        assert_eq!(read_cycle(text.as_bytes(), &opts).unwrap().len(), 5);
    }

    #[test]
    fn write_read_roundtrip() {
        let c = read("time_s,current_a,voltage_v,temp_c,soc_ref\n0,1.25,3.3,25,0.5\n0.5,-2,3.2,50,0.49\n").unwrap();
        let mut buf = Vec::new();
        write_cycle(&mut buf, &c, None, None).unwrap();
        let back = read(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.currents().collect::<Vec<_>>(), c.currents().collect::<Vec<_>>());
        assert_eq!(back.voltage(), c.voltage());
        for (a, b) in back.samples().iter().zip(c.samples()) {
            assert!((a.temp - b.temp).abs() < 1e-9);
        }
    }
}
