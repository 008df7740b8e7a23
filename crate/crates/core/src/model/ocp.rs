//! Open-circuit potential tables.
//!
//! An [`OcpCurve`] maps a normalized surface concentration to an electrode
//! potential. Curves are interpolated either piecewise linearly or with a
//! monotone cubic Hermite spline (Fritsch–Carlson slopes), which keeps the
//! first derivative continuous so the filter Jacobian is well defined
//! everywhere. Outside the breakpoint span the curve is extended linearly
//! with the end slope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Linear,
    #[default]
    #[serde(alias = "cubic", alias = "pchip")]
    MonotoneCubic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcpCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Knot derivatives of the interpolant.
    slopes: Vec<f64>,
    interpolation: Interpolation,
}

impl OcpCurve {
    pub fn new(breakpoints: &[(f64, f64)], interpolation: Interpolation) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::param("points", "at least two breakpoints are required"));
        }
        for (i, &(x, y)) in breakpoints.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::param(format!("points[{i}]"), "non-finite value"));
            }
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::param(
                    format!("points[{i}]"),
                    format!("concentration {x} outside [0, 1]"),
                ));
            }
            if i > 0 && x <= breakpoints[i - 1].0 {
                return Err(Error::param(
                    format!("points[{i}]"),
                    "concentrations must be strictly increasing",
                ));
            }
        }
        let xs: Vec<f64> = breakpoints.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = breakpoints.iter().map(|p| p.1).collect();
        let slopes = match interpolation {
            Interpolation::Linear => Vec::new(),
            Interpolation::MonotoneCubic => pchip_slopes(&xs, &ys),
        };
        Ok(Self {
            xs,
            ys,
            slopes,
            interpolation,
        })
    }

    /// A curve that is constant at `potential`.
    pub fn constant(potential: f64) -> Self {
        Self::new(&[(0.0, potential), (1.0, potential)], Interpolation::Linear)
            .expect("constant curve is valid")
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Potential and its derivative with respect to concentration at `c`.
    pub fn eval(&self, c: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Domain(format!(
                "OCP evaluated at concentration {c} outside [0, 1]"
            )));
        }
        Ok(self.eval_unchecked(c))
    }

    pub(crate) fn eval_unchecked(&self, c: f64) -> (f64, f64) {
        let n = self.xs.len();
        if c <= self.xs[0] {
            let s = self.end_slope(0);
            return (self.ys[0] + s * (c - self.xs[0]), s);
        }
        if c >= self.xs[n - 1] {
            let s = self.end_slope(n - 1);
            return (self.ys[n - 1] + s * (c - self.xs[n - 1]), s);
        }
        // first knot strictly greater than c
        let hi = self.xs.partition_point(|&x| x <= c);
        let lo = hi - 1;
        let h = self.xs[hi] - self.xs[lo];
        let secant = (self.ys[hi] - self.ys[lo]) / h;
        match self.interpolation {
            Interpolation::Linear => (self.ys[lo] + secant * (c - self.xs[lo]), secant),
            Interpolation::MonotoneCubic => {
                let t = (c - self.xs[lo]) / h;
                let (y0, y1) = (self.ys[lo], self.ys[hi]);
                let (m0, m1) = (self.slopes[lo] * h, self.slopes[hi] * h);
                let t2 = t * t;
                let t3 = t2 * t;
                let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                    + (t3 - 2.0 * t2 + t) * m0
                    + (-2.0 * t3 + 3.0 * t2) * y1
                    + (t3 - t2) * m1;
                let dvalue_dt = (6.0 * t2 - 6.0 * t) * y0
                    + (3.0 * t2 - 4.0 * t + 1.0) * m0
                    + (-6.0 * t2 + 6.0 * t) * y1
                    + (3.0 * t2 - 2.0 * t) * m1;
                (value, dvalue_dt / h)
            }
        }
    }

    fn end_slope(&self, i: usize) -> f64 {
        match self.interpolation {
            Interpolation::MonotoneCubic => self.slopes[i],
            Interpolation::Linear => {
                let j = if i == 0 { 1 } else { i - 1 };
                (self.ys[i] - self.ys[j]) / (self.xs[i] - self.xs[j])
            }
        }
    }
}

/// Fritsch–Carlson knot slopes with the shape-preserving three-point end rule.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
