//! TOML cell-parameter and filter-tuning files.
//!
//! Capacities may be given in ampere-hours (`*_ah`) or ampere-seconds
//! (`*_as`), temperatures in °C (`*_c`) or K (`*_k`); everything is stored
//! internally in A·s and K.

use std::path::Path;

use nalgebra::Matrix4;
use serde::Deserialize;

use crate::discretize::DEFAULT_REBUILD_DELTA_T;
use crate::error::{Error, Result};
use crate::filters::{soc_covariance, soc_process_noise, state_from_soc, FilterConfig, JacobianMode};
use crate::model::constants::{amp_hours_to_coulombs, celsius_to_kelvin, DEFAULT_CLAMP_EPS, DEFAULT_T_REF};
use crate::model::{ActivationEnergies, CellParameters, ElectrodeParams, Interpolation, OcpCurve, StateVector};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let msg = e.message().to_owned();
        // serde reports unknown or missing fields by name; surface it as the key
        let key = msg
            .split('`')
            .nth(1)
            .map(str::to_owned)
            .unwrap_or_else(|| "<toml>".to_owned());
        Error::InvalidParameter {
            key,
            reason: e.to_string().trim().to_owned(),
        }
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellFile {
    cell: CellSection,
    #[serde(default)]
    activation_energy: ActivationSection,
    positive: ElectrodeSection,
    negative: ElectrodeSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellSection {
    capacity_ah: Option<f64>,
    capacity_as: Option<f64>,
    r0_ohm: f64,
    t_ref_c: Option<f64>,
    t_ref_k: Option<f64>,
    clamp_eps: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActivationSection {
    #[serde(default)]
    alpha_n: f64,
    #[serde(default)]
    alpha_p: f64,
    #[serde(default)]
    d_n: f64,
    #[serde(default)]
    d_p: f64,
    #[serde(default)]
    r0: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElectrodeSection {
    alpha_s: f64,
    d_per_s: f64,
    c_min: f64,
    c_max: f64,
    capacity_ah: Option<f64>,
    capacity_as: Option<f64>,
    ocp: OcpSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OcpSection {
    #[serde(default)]
    interpolation: Interpolation,
    points: Vec<(f64, f64)>,
}

fn capacity(key: &str, ah: Option<f64>, coulombs: Option<f64>) -> Result<Option<f64>> {
    match (ah, coulombs) {
        (Some(_), Some(_)) => Err(Error::param(key, "give either `_ah` or `_as`, not both")),
        (Some(a), None) => Ok(Some(amp_hours_to_coulombs(a))),
        (None, c) => Ok(c),
    }
}

/// Parses and validates a cell-parameter file.
pub fn parse_cell_params(text: &str) -> Result<CellParameters> {
    let f: CellFile = parse_toml(text)?;
    let capacity_cell = capacity("cell.capacity_ah", f.cell.capacity_ah, f.cell.capacity_as)?
        .ok_or_else(|| Error::param("cell.capacity_ah", "cell capacity is required"))?;
    let t_ref = match (f.cell.t_ref_c, f.cell.t_ref_k) {
        (Some(_), Some(_)) => return Err(Error::param("cell.t_ref_c", "give either t_ref_c or t_ref_k")),
        (Some(c), None) => celsius_to_kelvin(c),
        (None, Some(k)) => k,
        (None, None) => DEFAULT_T_REF,
    };
    let electrode = |name: &str, s: ElectrodeSection| -> Result<ElectrodeParams> {
        let ocp = OcpCurve::new(&s.ocp.points, s.ocp.interpolation).map_err(|e| match e {
            Error::InvalidParameter { key, reason } => Error::param(format!("{name}.ocp.{key}"), reason),
            other => other,
        })?;
        let window = s.c_max - s.c_min;
        // default: the electrode's full stoichiometric window carries the cell capacity
        let cap = capacity(&format!("{name}.capacity_ah"), s.capacity_ah, s.capacity_as)?
            .unwrap_or(capacity_cell / window);
        Ok(ElectrodeParams {
            alpha_ref: s.alpha_s,
            capacity: cap,
            d_ref: s.d_per_s,
            c_min: s.c_min,
            c_max: s.c_max,
            ocp,
        })
    };
    let a = f.activation_energy;
    let params = CellParameters {
        positive: electrode("positive", f.positive)?,
        negative: electrode("negative", f.negative)?,
        r0_ref: f.cell.r0_ohm,
        activation: ActivationEnergies {
            alpha_n: a.alpha_n,
            alpha_p: a.alpha_p,
            d_n: a.d_n,
            d_p: a.d_p,
            r0: a.r0,
        },
        t_ref,
        capacity_cell,
        clamp_eps: f.cell.clamp_eps.unwrap_or(DEFAULT_CLAMP_EPS),
    };
    params.validate()?;
    Ok(params)
}

pub fn load_cell_params(path: impl AsRef<Path>) -> Result<CellParameters> {
    parse_cell_params(&read_text(path.as_ref())?)
}

/// A covariance given either as its diagonal or as a full matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum CovarianceSpec {
    Diagonal(Vec<f64>),
    Full(Vec<Vec<f64>>),
}

impl CovarianceSpec {
    fn to_matrix(&self, key: &str) -> Result<Matrix4<f64>> {
        match self {
            CovarianceSpec::Diagonal(d) if d.len() == 4 => Ok(Matrix4::from_diagonal(&nalgebra::Vector4::from_column_slice(d))),
            CovarianceSpec::Full(rows) if rows.len() == 4 && rows.iter().all(|r| r.len() == 4) => {
                Ok(Matrix4::from_fn(|i, j| rows[i][j]))
            }
            _ => Err(Error::param(key, "expected 4 diagonal entries or a 4×4 matrix")),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterFile {
    #[serde(default)]
    state: StateSection,
    #[serde(default)]
    bias: BiasSection,
    #[serde(default)]
    options: OptionsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateSection {
    process_noise: Option<CovarianceSpec>,
    /// Per-step SOC random-walk standard deviation; builds a correlated Q_x
    /// with a small diagonal floor.
    process_soc_std: Option<f64>,
    measurement_noise: Option<f64>,
    initial_soc: Option<f64>,
    x0: Option<[f64; 4]>,
    initial_covariance: Option<CovarianceSpec>,
    /// Builds a correlated P0 from an SOC standard deviation.
    initial_soc_std: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BiasSection {
    process_noise: Option<f64>,
    measurement_noise: Option<f64>,
    initial: Option<f64>,
    initial_variance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsSection {
    jacobian: Option<String>,
    gate_sigma: Option<f64>,
    rebuild_delta_t: Option<f64>,
}

/// Parses a filter-tuning file. Unset fields take the defaults of
/// [`FilterConfig::for_cell`]; `initial_soc` defaults to `default_soc`.
pub fn parse_filter_config(text: &str, params: &CellParameters, default_soc: f64) -> Result<FilterConfig> {
    let f: FilterFile = parse_toml(text)?;
    let soc = f.state.initial_soc.unwrap_or(default_soc);
    if !(0.0..=1.0).contains(&soc) {
        return Err(Error::param("state.initial_soc", format!("{soc} not in [0, 1]")));
    }
    let mut cfg = FilterConfig::for_cell(params, soc);

    if f.state.process_noise.is_some() && f.state.process_soc_std.is_some() {
        return Err(Error::param("state.process_noise", "conflicts with state.process_soc_std"));
    }
    if let Some(q) = &f.state.process_noise {
        cfg.q_x = q.to_matrix("state.process_noise")?;
    }
    if let Some(s) = f.state.process_soc_std {
        cfg.q_x = soc_process_noise(params, s);
    }
    if let Some(r) = f.state.measurement_noise {
        cfg.r_x = r;
    }
    if f.state.initial_soc.is_some() && f.state.x0.is_some() {
        return Err(Error::param("state.x0", "conflicts with state.initial_soc"));
    }
    if let Some(x) = f.state.x0 {
        cfg.x0 = StateVector { q1_p: x[0], q2_p: x[1], q1_n: x[2], q2_n: x[3] };
    } else {
        cfg.x0 = state_from_soc(soc, params);
    }
    if f.state.initial_covariance.is_some() && f.state.initial_soc_std.is_some() {
        return Err(Error::param("state.initial_covariance", "conflicts with state.initial_soc_std"));
    }
    if let Some(p) = &f.state.initial_covariance {
        cfg.p0_x = p.to_matrix("state.initial_covariance")?;
    }
    if let Some(s) = f.state.initial_soc_std {
        cfg.p0_x = soc_covariance(params, s);
    }

    let b = f.bias;
    cfg.q_theta = b.process_noise.unwrap_or(cfg.q_theta);
    cfg.r_theta = b.measurement_noise.unwrap_or(cfg.r_theta);
    cfg.theta0 = b.initial.unwrap_or(cfg.theta0);
    cfg.p0_theta = b.initial_variance.unwrap_or(cfg.p0_theta);

    let o = f.options;
    cfg.jacobian = match o.jacobian.as_deref() {
        None | Some("analytic") => JacobianMode::Analytic,
        Some("finite-difference") | Some("fd") => JacobianMode::FiniteDifference,
        Some(other) => {
            return Err(Error::param("options.jacobian", format!("unknown mode `{other}`")));
        }
    };
    // zero switches gating off
    match o.gate_sigma {
        Some(0.0) => cfg.gate_sigma = None,
        Some(g) => cfg.gate_sigma = Some(g),
        None => {}
    }
    cfg.rebuild_delta_t = o.rebuild_delta_t.unwrap_or(DEFAULT_REBUILD_DELTA_T);
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_filter_config(path: impl AsRef<Path>, params: &CellParameters, default_soc: f64) -> Result<FilterConfig> {
    parse_filter_config(&read_text(path.as_ref())?, params, default_soc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn bundled_cells_parse() {
        let p = parse_cell_params(fixtures::SYNTHETIC_LFP_CELL_TOML).unwrap();
        assert!((p.capacity_cell - 2.3 * 3600.0).abs() < 1e-9);
        assert!((p.t_ref - 298.15).abs() < 1e-12);
        let window = p.positive.c_max - p.positive.c_min;
        assert!((p.positive.capacity * window - p.capacity_cell).abs() < 1e-9);
        parse_cell_params(fixtures::SYNTHETIC_LFP_FLAT_CELL_TOML).unwrap();
    }

    #[test]
    fn invalid_value_names_key() {
        let text = fixtures::SYNTHETIC_LFP_CELL_TOML.replacen("c_min = 0.03", "c_min = 1.5", 1);
        match parse_cell_params(&text) {
            Err(Error::InvalidParameter { key, .. }) => assert_eq!(key, "positive.c_min"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_missing_keys_are_named() {
        let text = fixtures::SYNTHETIC_LFP_CELL_TOML.replacen("r0_ohm", "r0_milliohm", 1);
        match parse_cell_params(&text) {
            Err(Error::InvalidParameter { key, .. }) => assert_eq!(key, "r0_milliohm"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_ocp_table_is_reported_with_path() {
        let text = fixtures::SYNTHETIC_LFP_CELL_TOML.replacen("[0.0, 2.9]", "[0.5, 2.9]", 1);
        match parse_cell_params(&text) {
            Err(Error::InvalidParameter { key, .. }) => assert!(key.starts_with("positive.ocp.points"), "{key}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn filter_file_overrides() {
        let p = fixtures::synthetic_lfp_cell();
        let text = r#"
            [state]
            measurement_noise = 1e-5
            initial_soc = 0.7
            initial_covariance = [1e-4, 1e-4, 1e-4, 1e-4]
            [bias]
            process_noise = 0.0
            initial_variance = 0.0
            [options]
            jacobian = "finite-difference"
            gate_sigma = 6.0
        "#;
        let cfg = parse_filter_config(text, &p, 0.5).unwrap();
        assert_eq!(cfg.r_x, 1e-5);
        assert_eq!(cfg.x0, state_from_soc(0.7, &p));
        assert_eq!(cfg.p0_x, Matrix4::identity() * 1e-4);
        assert_eq!(cfg.q_theta, 0.0);
        assert_eq!(cfg.jacobian, JacobianMode::FiniteDifference);
        assert_eq!(cfg.gate_sigma, Some(6.0));
        let off = parse_filter_config("[options]\ngate_sigma = 0\n", &p, 0.5).unwrap();
        assert_eq!(off.gate_sigma, None);
    }

    #[test]
    fn full_matrix_covariance_and_empty_file() {
        let p = fixtures::synthetic_lfp_cell();
        let text = r#"
            [state]
            process_noise = [[1e-9, 0, 0, 0], [0, 1e-9, 0, 0], [0, 0, 1e-9, 0], [0, 0, 0, 1e-9]]
        "#;
        let cfg = parse_filter_config(text, &p, 0.5).unwrap();
        assert_eq!(cfg.q_x, Matrix4::identity() * 1e-9);
        assert_eq!(parse_filter_config("", &p, 0.4).unwrap(), FilterConfig::for_cell(&p, 0.4));
    }

    #[test]
    fn rejects_bad_filter_values() {
        let p = fixtures::synthetic_lfp_cell();
        assert!(parse_filter_config("[state]\nmeasurement_noise = -1.0", &p, 0.5).is_err());
        assert!(parse_filter_config("[state]\nprocess_noise = [1.0, 2.0]", &p, 0.5).is_err());
        assert!(parse_filter_config("[options]\njacobian = \"magic\"", &p, 0.5).is_err());
        assert!(parse_filter_config("[state]\ninitial_soc = 1.5", &p, 0.5).is_err());
    }
}
