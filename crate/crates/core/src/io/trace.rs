//! Per-step trace CSV.
//!
//! Shared columns come first: `time_s, current_a, temp_c, v_meas, soc_true`.
//! Each filter then contributes `soc, soc_err, soc_p, soc_n, v_spm, theta_hat,
//! v_model, innovation, soc_clamped, gated`, prefixed with `<label>_` when a
//! label is given. Numbers use the shortest round-trip representation, so
//! identical runs produce identical bytes.

use std::io::Write;

use crate::error::{Error, Result};
use crate::filters::StepOutput;
use crate::harness::{DriveCycle, SyntheticDataset};
use crate::model::constants::kelvin_to_celsius;

const FILTER_COLUMNS: [&str; 10] = [
    "soc",
    "soc_err",
    "soc_p",
    "soc_n",
    "v_spm",
    "theta_hat",
    "v_model",
    "innovation",
    "soc_clamped",
    "gated",
];

/// One filter's contribution to a trace.
#[derive(Debug, Clone, Copy)]
pub struct TraceColumns<'a> {
    pub label: Option<&'a str>,
    pub steps: &'a [StepOutput],
}

pub fn write_trace<W: Write>(
    writer: W,
    cycle: &DriveCycle,
    v_meas: &[f64],
    soc_true: Option<&[f64]>,
    filters: &[TraceColumns<'_>],
) -> Result<()> {
    let n = cycle.len();
    if v_meas.len() != n || soc_true.is_some_and(|s| s.len() != n) || filters.iter().any(|f| f.steps.len() != n) {
        return Err(Error::data(None, None, "trace series lengths differ from the cycle"));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = ["time_s", "current_a", "temp_c", "v_meas", "soc_true"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for f in filters {
        for c in FILTER_COLUMNS {
            header.push(match f.label {
                Some(l) => format!("{l}_{c}"),
                None => c.to_string(),
            });
        }
    }
    w.write_record(&header)?;

    let mut rec: Vec<String> = Vec::with_capacity(header.len());
    for (k, s) in cycle.samples().iter().enumerate() {
        rec.clear();
        rec.push(s.t.to_string());
        rec.push(s.current.to_string());
        rec.push(kelvin_to_celsius(s.temp).to_string());
        rec.push(v_meas[k].to_string());
        rec.push(soc_true.map(|v| v[k].to_string()).unwrap_or_default());
        for f in filters {
            let o = &f.steps[k];
            rec.push(o.soc_cell.to_string());
            rec.push(soc_true.map(|v| (o.soc_cell - v[k]).to_string()).unwrap_or_default());
            rec.push(o.soc_p.to_string());
            rec.push(o.soc_n.to_string());
            rec.push(o.v_spm.to_string());
            rec.push(o.theta_hat.to_string());
            rec.push(o.v_model.to_string());
            rec.push(o.innovation_x.to_string());
            rec.push(u8::from(o.soc_clamped).to_string());
            rec.push(u8::from(o.gated).to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<trace output>".into(),
        source,
    })?;
    Ok(())
}

/// Truth-side detail of a synthetic dataset: the noise-free voltage, the
/// injected bias and noise, the true SOC and the truth states.
pub fn write_truth<W: Write>(writer: W, ds: &SyntheticDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "time_s", "v_true", "bias_v", "noise_v", "v_meas", "soc_true", "q1_p", "q2_p", "q1_n", "q2_n",
    ])?;
    for (k, s) in ds.cycle.samples().iter().enumerate() {
        let x = &ds.states[k];
        w.write_record(
            [s.t, ds.v_true[k], ds.bias[k], ds.noise[k], ds.v_meas[k], ds.soc_true[k], x.q1_p, x.q2_p, x.q1_n, x.q2_n]
                .iter()
                .map(f64::to_string),
        )?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<truth output>".into(),
        source,
    })?;
    Ok(())
}
