//! Overpotential and terminal voltage.

use crate::error::{Error, Result};
use crate::model::constants::thermal_voltage_2rt_f;
use crate::model::params::{CellParameters, Electrode, TemperatureAdjustedParams};
use crate::model::state_space::OutputVector;

/// Electrode overpotential in volts.
///
/// `css` must already be clamped into the open interval (0, 1); `current` is
/// the cell current with discharge positive.
pub fn overpotential(
    css: f64,
    current: f64,
    temp: f64,
    electrode: Electrode,
    capacity: f64,
    d: f64,
) -> Result<f64> {
    if !(css.is_finite() && current.is_finite() && temp.is_finite()) {
        return Err(Error::Domain(format!(
            "overpotential inputs must be finite (css={css}, I={current}, T={temp})"
        )));
    }
    if !(css > 0.0 && css < 1.0) {
        return Err(Error::Domain(format!("surface concentration {css} outside (0, 1)")));
    }
    Ok(overpotential_with_slope(css, current, temp, electrode, capacity, d).0)
}

/// Overpotential and its derivative with respect to the surface concentration.
pub(crate) fn overpotential_with_slope(
    css: f64,
    current: f64,
    temp: f64,
    electrode: Electrode,
    capacity: f64,
    d: f64,
) -> (f64, f64) {
    let prefactor = thermal_voltage_2rt_f(temp);
    let s = electrode.current_sign();
    let occupancy = css * (1.0 - css);
    let root = occupancy.sqrt();
    let g = s * current / (6.0 * capacity * d * root);
    let dg = -s * current * (1.0 - 2.0 * css) / (12.0 * capacity * d * occupancy * root);
    (prefactor * g.asinh(), prefactor * dg / (1.0 + g * g).sqrt())
}

/// Terminal voltage together with its sensitivities to the two surface concentrations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageEval {
    pub voltage: f64,
    pub dv_dcss_p: f64,
    pub dv_dcss_n: f64,
}

/// Terminal voltage at temperature `temp` (K), with the Arrhenius scaling applied.
pub fn terminal_voltage(
    psi: &OutputVector,
    current: f64,
    temp: f64,
    params: &CellParameters,
) -> Result<f64> {
    let tp = params.arrhenius_adjust(temp)?;
    Ok(evaluate_voltage(psi, current, &tp, params)?.voltage)
}

/// Terminal voltage with pre-computed temperature-adjusted parameters.
///
/// Surface concentrations are clamped into `[eps, 1 - eps]`; an electrode
/// whose concentration was clamped reports zero sensitivity.
pub fn evaluate_voltage(
    psi: &OutputVector,
    current: f64,
    tp: &TemperatureAdjustedParams,
    params: &CellParameters,
) -> Result<VoltageEval> {
    if !(psi.css_p.is_finite() && psi.css_n.is_finite() && current.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite voltage inputs (css_p={}, css_n={}, I={current})",
            psi.css_p, psi.css_n
        )));
    }
    let eps = params.clamp_eps;
    let clamped = psi.clamped(eps);
    let mut out = VoltageEval {
        voltage: -tp.r0 * current,
        dv_dcss_p: 0.0,
        dv_dcss_n: 0.0,
    };
    for electrode in [Electrode::Positive, Electrode::Negative] {
        let ep = params.electrode(electrode);
        let css = clamped.surface(electrode);
        let (ocp, docp) = ep.ocp.eval(css)?;
        let (eta, deta) =
            overpotential_with_slope(css, current, tp.temp, electrode, ep.capacity, tp.d(electrode));
        let free = css == psi.surface(electrode);
        let slope = if free { docp + deta } else { 0.0 };
        match electrode {
            Electrode::Positive => {
                out.voltage += ocp + eta;
                out.dv_dcss_p = slope;
            }
            Electrode::Negative => {
                out.voltage -= ocp + eta;
                out.dv_dcss_n = -slope;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::ocp::OcpCurve;
    use proptest::prelude::*;

    #[test]
    fn zero_current_has_zero_overpotential() {
        for e in [Electrode::Positive, Electrode::Negative] {
            assert_eq!(overpotential(0.3, 0.0, 298.15, e, 9000.0, 1e-4).unwrap(), 0.0);
        }
    }

    #[test]
    fn unit_argument_overpotential() {
        // I = 3 Q d at css = 0.5 makes the asinh argument exactly -1 for the positive electrode.
        // Reference: (2 * 8.314 * 298.15 / 96485) * asinh(-1), evaluated independently.
        let (q, d) = (9000.0, 2e-4);
        let eta = overpotential(0.5, 3.0 * q * d, 298.15, Electrode::Positive, q, d).unwrap();
        assert!((eta - -0.045_287_157_210_749).abs() < 1e-9, "{eta}");
    }

    #[test]
    fn nan_is_domain_error() {
        let r = overpotential(f64::NAN, 1.0, 298.15, Electrode::Negative, 1.0, 1.0);
        assert!(matches!(r, Err(Error::Domain(_))));
        assert!(overpotential(0.5, f64::NAN, 298.15, Electrode::Negative, 1.0, 1.0).is_err());
        assert!(overpotential(0.0, 1.0, 298.15, Electrode::Negative, 1.0, 1.0).is_err());
    }

    #[test]
    fn rest_voltage_is_ocv() {
        let p = fixtures::synthetic_lfp_cell();
        let psi = OutputVector { cbar_p: 0.5, css_p: 0.42, cbar_n: 0.5, css_n: 0.61 };
        let v = terminal_voltage(&psi, 0.0, 310.0, &p).unwrap();
        let ocv = p.positive.ocp.eval(0.42).unwrap().0 - p.negative.ocp.eval(0.61).unwrap().0;
        assert_eq!(v, ocv);
    }

    #[test]
    fn flat_curves_give_constant_ocv() {
        let mut p = fixtures::synthetic_lfp_cell();
        p.positive.ocp = OcpCurve::constant(3.4);
        p.negative.ocp = OcpCurve::constant(0.1);
        let psi = OutputVector { cbar_p: 0.2, css_p: 0.7, cbar_n: 0.1, css_n: 0.3 };
        let v = terminal_voltage(&psi, 0.0, 298.15, &p).unwrap();
        assert!((v - 3.3).abs() < 1e-15);
    }

    #[test]
    fn fast_kinetics_leave_only_ohmic_drop() {
        let mut p = fixtures::synthetic_lfp_cell();
        p.r0_ref = 0.05;
        p.positive.d_ref = 1e9;
        p.negative.d_ref = 1e9;
        let psi = OutputVector { cbar_p: 0.5, css_p: 0.5, cbar_n: 0.5, css_n: 0.5 };
        let ocv = terminal_voltage(&psi, 0.0, p.t_ref, &p).unwrap();
        let v = terminal_voltage(&psi, 1.0, p.t_ref, &p).unwrap();
        assert!((v - (ocv - 0.05)).abs() < 1e-9, "{}", v - ocv);
    }

    #[test]
    fn discharge_lowers_voltage() {
        let p = fixtures::synthetic_lfp_cell();
        let psi = OutputVector { cbar_p: 0.5, css_p: 0.5, cbar_n: 0.5, css_n: 0.5 };
        let rest = terminal_voltage(&psi, 0.0, p.t_ref, &p).unwrap();
        assert!(terminal_voltage(&psi, 2.0, p.t_ref, &p).unwrap() < rest);
        assert!(terminal_voltage(&psi, -2.0, p.t_ref, &p).unwrap() > rest);
    }

    #[test]
    fn clamp_keeps_voltage_finite() {
        let p = fixtures::synthetic_lfp_cell();
        let psi = OutputVector { cbar_p: 0.0, css_p: -0.2, cbar_n: 1.0, css_n: 1.3 };
        let eval = evaluate_voltage(&psi, 1.0, &p.arrhenius_adjust(p.t_ref).unwrap(), &p).unwrap();
        assert!(eval.voltage.is_finite());
        assert_eq!(eval.dv_dcss_p, 0.0);
        assert_eq!(eval.dv_dcss_n, 0.0);
    }

    proptest! {
        #[test]
        fn overpotential_is_odd_in_current(css in 0.001..0.999f64, i in -50.0..50.0f64, t in 250.0..340.0f64) {
            for e in [Electrode::Positive, Electrode::Negative] {
                let a = overpotential(css, i, t, e, 8000.0, 3e-4).unwrap();
                let b = overpotential(css, -i, t, e, 8000.0, 3e-4).unwrap();
                prop_assert!((a + b).abs() <= 1e-15 * a.abs().max(1.0));
            }
        }

        #[test]
        fn overpotential_symmetric_about_half(css in 0.001..0.999f64, i in -50.0..50.0f64) {
            let e = Electrode::Negative;
            let a = overpotential(css, i, 298.15, e, 8000.0, 3e-4).unwrap();
            let b = overpotential(1.0 - css, i, 298.15, e, 8000.0, 3e-4).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-6));
        }

        #[test]
        fn rest_voltage_is_ocv_for_all_states(cp in 0.0..1.0f64, cn in 0.0..1.0f64, t in 250.0..340.0f64) {
            let p = fixtures::synthetic_lfp_cell();
            let psi = OutputVector { cbar_p: cp, css_p: cp, cbar_n: cn, css_n: cn }.clamped(p.clamp_eps);
            let v = terminal_voltage(&psi, 0.0, t, &p).unwrap();
            let ocv = p.positive.ocp.eval(psi.css_p).unwrap().0 - p.negative.ocp.eval(psi.css_n).unwrap().0;
            prop_assert_eq!(v, ocv);
        }
    }
}
