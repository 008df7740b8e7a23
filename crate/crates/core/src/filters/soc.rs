//! Electrode and cell state of charge from the estimated state.

use crate::model::{CellParameters, StateVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocEstimate {
    pub soc_p: f64,
    pub soc_n: f64,
    pub soc_cell: f64,
    /// Set when either electrode SOC had to be clamped into [0, 1].
    pub clamped: bool,
}

/// Normalizes each average concentration (the q1 states, which the output map
/// passes through unchanged) by its stoichiometric window and averages the two.
pub fn soc_from_state(x: &StateVector, params: &CellParameters) -> SocEstimate {
    let raw_p = normalize(x.q1_p, params.positive.c_min, params.positive.c_max);
    let raw_n = normalize(x.q1_n, params.negative.c_min, params.negative.c_max);
    let soc_p = raw_p.clamp(0.0, 1.0);
    let soc_n = raw_n.clamp(0.0, 1.0);
    SocEstimate {
        soc_p,
        soc_n,
        soc_cell: 0.5 * (soc_p + soc_n),
        clamped: soc_p != raw_p || soc_n != raw_n,
    }
}

fn normalize(c: f64, c_min: f64, c_max: f64) -> f64 {
    (c - c_min) / (c_max - c_min)
}

/// Relaxed state (q2 = q1) whose electrodes both sit at `soc`.
pub fn state_from_soc(soc: f64, params: &CellParameters) -> StateVector {
    let c = |e: &crate::model::ElectrodeParams| e.c_min + soc * (e.c_max - e.c_min);
    StateVector::relaxed(c(&params.positive), c(&params.negative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn lower_limit_is_empty() {
        let p = fixtures::synthetic_lfp_cell();
        let x = StateVector::relaxed(p.positive.c_min, p.negative.c_min);
        let soc = soc_from_state(&x, &p);
        assert_eq!(soc.soc_p, 0.0);
        assert_eq!(soc.soc_n, 0.0);
        assert!(!soc.clamped);
    }

    #[test]
    fn cell_soc_is_mean() {
        let p = fixtures::synthetic_lfp_cell();
        let x = StateVector {
            q1_p: p.positive.c_min + 0.4 * (p.positive.c_max - p.positive.c_min),
            q1_n: p.negative.c_min + 0.6 * (p.negative.c_max - p.negative.c_min),
            ..Default::default()
        };
        let soc = soc_from_state(&x, &p);
        assert!((soc.soc_cell - 0.5).abs() < 1e-15);
    }

    #[test]
    fn overshoot_is_clamped_and_flagged() {
        let p = fixtures::synthetic_lfp_cell();
        let x = StateVector::relaxed(0.5, p.negative.c_max + 0.01);
        let soc = soc_from_state(&x, &p);
        assert_eq!(soc.soc_n, 1.0);
        assert!(soc.clamped);
    }

    #[test]
    fn inverse_round_trip() {
        let p = fixtures::synthetic_lfp_cell();
        for s in [0.0, 0.13, 0.5, 0.97, 1.0] {
            let soc = soc_from_state(&state_from_soc(s, &p), &p);
            assert!((soc.soc_cell - s).abs() < 1e-14);
            assert!((soc.soc_p - soc.soc_n).abs() < 1e-14);
        }
    }
}
