//! Profile curves: second-order ODEs `p'' = c^2 s(p) s'(p)` with
//! `s = sin` or `s = sinh`, integrated by classical RK4 from `u = 0` in both
//! directions.

use num_dual::Dual64;

use crate::dual::Scalar;

use crate::error::{Error, Result};

/// Largest first-integral drift accepted after integration.
pub const DRIFT_LIMIT: f64 = 1e-6;

/// `p'' = coef^2 s(p) s'(p)` with first integral `p'^2 - coef^2 s(p)^2 + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOde {
    pub hyperbolic: bool,
    pub coef: f64,
    pub offset: f64,
}

impl ProfileOde {
    pub fn accel<D: Scalar>(&self, p: D) -> D {
        let c2 = self.coef * self.coef;
        if self.hyperbolic {
            p.sinh() * p.cosh() * c2
        } else {
            p.sin() * p.cos() * c2
        }
    }

    /// `d/du p''` along a solution.
    pub fn jerk(&self, p: f64, dp: f64) -> f64 {
        self.accel(Dual64::new(p, 1.0)).eps * dp
    }

    pub fn first_integral(&self, p: f64, dp: f64) -> f64 {
        let s = if self.hyperbolic { p.sinh() } else { p.sin() };
        dp * dp - self.coef * self.coef * s * s + self.offset
    }

    fn rk4(&self, p: f64, dp: f64, h: f64) -> (f64, f64) {
        let f = |x: f64| self.accel(x);
        let (k1p, k1v) = (dp, f(p));
        let (k2p, k2v) = (dp + 0.5 * h * k1v, f(p + 0.5 * h * k1p));
        let (k3p, k3v) = (dp + 0.5 * h * k2v, f(p + 0.5 * h * k2p));
        let (k4p, k4v) = (dp + h * k3v, f(p + h * k3p));
        (
            p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
            dp + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        )
    }
}

/// Samples of `(p, p')` at `u = ±k·step` for `k = 0..`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSolution {
    pub ode: ProfileOde,
    pub step: f64,
    pub halfspan: f64,
    forward: Vec<(f64, f64)>,
    backward: Vec<(f64, f64)>,
    /// Largest `|first integral|` over all samples.
    pub max_drift: f64,
}

impl ProfileSolution {
    pub fn solve(ode: ProfileOde, p0: f64, dp0: f64, step: f64, halfspan: f64) -> Result<Self> {
        if !(step > 0.0) || !(halfspan > 0.0) || !halfspan.is_finite() {
            return Err(Error::Domain(format!("invalid profile step {step} / halfspan {halfspan}")));
        }
        let n = (halfspan / step).ceil() as usize + 1;
        let march = |h: f64| {
            let mut out = Vec::with_capacity(n + 1);
            let (mut p, mut dp) = (p0, dp0);
            out.push((p, dp));
            for _ in 0..n {
                (p, dp) = ode.rk4(p, dp, h);
                out.push((p, dp));
            }
            out
        };
        let forward = march(step);
        let backward = march(-step);
        let max_drift = forward
            .iter()
            .chain(&backward)
            .map(|&(p, dp)| ode.first_integral(p, dp).abs())
            .fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        if !(max_drift <= DRIFT_LIMIT) {
            return Err(Error::StepSize(format!(
                "profile first integral drifts by {max_drift:.3e} (limit {DRIFT_LIMIT:.0e}); reduce the step {step}"
            )));
        }
        Ok(Self { ode, step, halfspan, forward, backward, max_drift })
    }

    /// `(p(u), p'(u))` by one RK4 step from the nearest sample.
    pub fn eval(&self, u: f64) -> Result<(f64, f64)> {
        if !(u.abs() <= self.halfspan * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "u = {u} outside the integrated profile span |u| <= {}",
                self.halfspan
            )));
        }
        let side = if u >= 0.0 { &self.forward } else { &self.backward };
        let k = ((u.abs() / self.step).round() as usize).min(side.len() - 1);
        let uk = u.signum() * k as f64 * self.step;
        let (p, dp) = side[k];
        if u == uk {
            return Ok((p, dp));
        }
        Ok(self.ode.rk4(p, dp, u - uk))
    }

    /// `(p, p', p'', p''')` at `u`.
    pub fn eval_jet(&self, u: f64) -> Result<[f64; 4]> {
        let (p, dp) = self.eval(u)?;
        Ok([p, dp, self.ode.accel(p), self.ode.jerk(p, dp)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_helicoid_matches_closed_form() {
        let ode = ProfileOde { hyperbolic: true, coef: 1.0, offset: -1.0 };
        let sol = ProfileSolution::solve(ode, 0.0, 1.0, 1e-4, 1.3).unwrap();
        let mut worst: f64 = 0.0;
        for k in -120..=120 {
            let u = k as f64 * 0.01 + 0.00037;
            let exact = (u / 2.0 + std::f64::consts::FRAC_PI_4).tan().ln();
            worst = worst.max((sol.eval(u).unwrap().0 - exact).abs());
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn jerk_is_derivative_of_accel() {
        let ode = ProfileOde { hyperbolic: false, coef: 2.0, offset: 1.0 };
        let (p, dp) = (0.4, 0.7);
        let h = 1e-6;
        let fd = (ode.accel(p + h * dp) - ode.accel(p - h * dp)) / (2.0 * h);
        assert!((ode.jerk(p, dp) - fd).abs() < 1e-8);
    }

    #[test]
    fn out_of_span_is_a_domain_error() {
        let ode = ProfileOde { hyperbolic: false, coef: 1.0, offset: -1.0 };
        let sol = ProfileSolution::solve(ode, 0.0, 1.0, 1e-3, 0.5).unwrap();
        assert!(matches!(sol.eval(0.6), Err(Error::Domain(_))));
    }

    #[test]
    fn coarse_steps_raise_step_size_errors() {
        let ode = ProfileOde { hyperbolic: true, coef: 1.0, offset: -1.0 };
        assert!(matches!(
            ProfileSolution::solve(ode, 0.0, 1.0, 0.2, 1.45),
            Err(Error::StepSize(_))
        ));
    }
}
