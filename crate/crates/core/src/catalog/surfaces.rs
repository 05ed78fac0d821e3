//! Closed-form charts and fundamental data of the catalog surfaces.
//!
//! Every family is written once, generically over the scalar type, so the
//! same expressions give values (`f64`) and exact derivatives (hyper-dual
//! numbers). All charts are conformal: `g = λ (du^2 + dv^2)`.

use std::f64::consts::FRAC_PI_2;

use crate::ambient::Signature;
use crate::dual::{c, Scalar};

use super::profile::ProfileOde;

/// `(λ, S, T, ν)` at one point; `shape[k][i]` is the `∂_k` component of `S ∂_i`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Fields<D> {
    pub lambda: D,
    pub shape: [[D; 2]; 2],
    pub tangent: [D; 2],
    pub nu: D,
}

fn off_diagonal<D: Scalar>(x: D) -> [[D; 2]; 2] {
    [[c(0.0), x], [x, c(0.0)]]
}

fn diagonal<D: Scalar>(x: D) -> [[D; 2]; 2] {
    [[x, c(0.0)], [c(0.0), -x]]
}

fn zero2<D: Scalar>() -> [[D; 2]; 2] {
    [[c(0.0); 2]; 2]
}

/// Closed-form description of one surface. `p` and `dp` are the profile and
/// its derivative at `u`; families without a profile ignore them.
pub(crate) trait Formulas: Send + Sync + 'static {
    fn sig(&self) -> Signature;

    fn ode(&self) -> Option<ProfileOde> {
        None
    }

    /// Initial values `(p(0), p'(0))` of the profile.
    fn initial(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    /// Whether `(u, v)` lies in the chart's domain.
    fn in_domain(&self, _u: f64, _v: f64) -> bool {
        true
    }

    /// Which coordinate is the height: `0` for `u`, `1` for `v`, `None` when constant.
    fn height_coordinate(&self) -> Option<usize>;

    fn position<D: Scalar>(&self, u: D, v: D, p: D, dp: D) -> [D; 4];

    fn fields<D: Scalar>(&self, u: D, v: D, p: D, dp: D) -> Fields<D>;
}

/// Helicoid `ℋ_β` of `S^2 x R`.
pub(crate) struct SphereHelicoid {
    pub beta: f64,
}

impl Formulas for SphereHelicoid {
    fn sig(&self) -> Signature {
        Signature::sphere2()
    }

    fn ode(&self) -> Option<ProfileOde> {
        Some(ProfileOde { hyperbolic: false, coef: self.beta, offset: -1.0 })
    }

    fn initial(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn height_coordinate(&self) -> Option<usize> {
        Some(1)
    }

    fn position<D: Scalar>(&self, _u: D, v: D, p: D, _dp: D) -> [D; 4] {
        let bv = v * self.beta;
        [p.sin() * bv.cos(), p.sin() * bv.sin(), p.cos(), v]
    }

    fn fields<D: Scalar>(&self, _u: D, _v: D, p: D, dp: D) -> Fields<D> {
        let lambda = dp * dp;
        Fields {
            lambda,
            shape: off_diagonal(-(p.cos() * self.beta) / lambda),
            tangent: [c(0.0), lambda.recip()],
            nu: p.sin() * self.beta / dp,
        }
    }
}

/// Unduloid `𝒰_α` of `S^2 x R`, `|α| > 1`.
pub(crate) struct Unduloid {
    pub alpha: f64,
}

impl Formulas for Unduloid {
    fn sig(&self) -> Signature {
        Signature::sphere2()
    }

    fn ode(&self) -> Option<ProfileOde> {
        Some(ProfileOde { hyperbolic: false, coef: self.alpha, offset: 1.0 })
    }

    fn initial(&self) -> (f64, f64) {
        ((1.0 / self.alpha.abs()).asin(), 0.0)
    }

    fn height_coordinate(&self) -> Option<usize> {
        Some(0)
    }

    fn position<D: Scalar>(&self, u: D, v: D, p: D, _dp: D) -> [D; 4] {
        let av = v * self.alpha;
        [p.sin() * av.cos(), p.sin() * av.sin(), p.cos(), u]
    }

    fn fields<D: Scalar>(&self, _u: D, _v: D, p: D, dp: D) -> Fields<D> {
        let lambda = dp * dp + 1.0;
        Fields {
            lambda,
            shape: diagonal(-(p.cos() * self.alpha) / lambda),
            tangent: [lambda.recip(), c(0.0)],
            nu: dp / (p.sin() * self.alpha),
        }
    }
}

/// Helicoid `ℋ_β` of `H^2 x R`.
pub(crate) struct HyperbolicHelicoid {
    pub beta: f64,
}

impl Formulas for HyperbolicHelicoid {
    fn sig(&self) -> Signature {
        Signature::hyperbolic2()
    }

    fn ode(&self) -> Option<ProfileOde> {
        Some(ProfileOde { hyperbolic: true, coef: self.beta, offset: -1.0 })
    }

    fn initial(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn height_coordinate(&self) -> Option<usize> {
        Some(1)
    }

    fn position<D: Scalar>(&self, _u: D, v: D, p: D, _dp: D) -> [D; 4] {
        let bv = v * self.beta;
        [p.cosh(), p.sinh() * bv.cos(), p.sinh() * bv.sin(), v]
    }

    fn fields<D: Scalar>(&self, _u: D, _v: D, p: D, dp: D) -> Fields<D> {
        let lambda = dp * dp;
        Fields {
            lambda,
            shape: off_diagonal(-(p.cosh() * self.beta) / lambda),
            tangent: [c(0.0), lambda.recip()],
            nu: p.sinh() * self.beta / dp,
        }
    }
}

/// Catenoid `𝒞_α` of `H^2 x R`.
pub(crate) struct Catenoid {
    pub alpha: f64,
}

impl Formulas for Catenoid {
    fn sig(&self) -> Signature {
        Signature::hyperbolic2()
    }

    fn ode(&self) -> Option<ProfileOde> {
        Some(ProfileOde { hyperbolic: true, coef: self.alpha, offset: 1.0 })
    }

    fn initial(&self) -> (f64, f64) {
        ((1.0 / self.alpha.abs()).asinh(), 0.0)
    }

    fn height_coordinate(&self) -> Option<usize> {
        Some(0)
    }

    fn position<D: Scalar>(&self, u: D, v: D, p: D, _dp: D) -> [D; 4] {
        let av = v * self.alpha;
        [p.cosh(), p.sinh() * av.cos(), p.sinh() * av.sin(), u]
    }

    fn fields<D: Scalar>(&self, _u: D, _v: D, p: D, dp: D) -> Fields<D> {
        let lambda = dp * dp + 1.0;
        Fields {
            lambda,
            shape: diagonal(-(p.cosh() * self.alpha) / lambda),
            tangent: [lambda.recip(), c(0.0)],
            nu: dp / (p.sinh() * self.alpha),
        }
    }
}

/// The surface `𝒞_0` of `H^2 x R`, foliated by horocycles.
pub(crate) struct Horocycle;

impl Formulas for Horocycle {
    fn sig(&self) -> Signature {
        Signature::hyperbolic2()
    }

    fn in_domain(&self, u: f64, _v: f64) -> bool {
        u.abs() < FRAC_PI_2
    }

    fn height_coordinate(&self) -> Option<usize> {
        Some(0)
    }

    fn position<D: Scalar>(&self, u: D, v: D, _p: D, _dp: D) -> [D; 4] {
        let cu = u.cos();
        let v2 = v * v;
        [
            (v2 + 1.0) / (cu * 2.0) + cu * 0.5,
            v / cu,
            (v2 - 1.0) / (cu * 2.0) + cu * 0.5,
            u,
        ]
    }

    fn fields<D: Scalar>(&self, u: D, _v: D, _p: D, _dp: D) -> Fields<D> {
        let cu = u.cos();
        Fields {
            lambda: (cu * cu).recip(),
            shape: diagonal(-cu),
            tangent: [cu * cu, c(0.0)],
            nu: u.sin(),
        }
    }
}

/// Generalized catenoid `𝒢_γ` of `H^2 x R`, `0 < |γ| < 1`.
pub(crate) struct GeneralizedCatenoid {
    pub gamma: f64,
}

impl Formulas for GeneralizedCatenoid {
    fn sig(&self) -> Signature {
        Signature::hyperbolic2()
    }

    fn ode(&self) -> Option<ProfileOde> {
        let g = self.gamma;
        Some(ProfileOde { hyperbolic: true, coef: g, offset: 1.0 - g * g })
    }

    fn initial(&self) -> (f64, f64) {
        ((1.0 / self.gamma.abs()).acosh(), 0.0)
    }

    fn height_coordinate(&self) -> Option<usize> {
        Some(0)
    }

    fn position<D: Scalar>(&self, u: D, v: D, p: D, _dp: D) -> [D; 4] {
        let gv = v * self.gamma;
        [p.cosh() * gv.cosh(), p.sinh(), p.cosh() * gv.sinh(), u]
    }

    fn fields<D: Scalar>(&self, _u: D, _v: D, p: D, dp: D) -> Fields<D> {
        let lambda = dp * dp + 1.0;
        Fields {
            lambda,
            shape: diagonal(-(p.sinh() * self.gamma) / lambda),
            tangent: [lambda.recip(), c(0.0)],
            nu: dp / (p.cosh() * self.gamma),
        }
    }
}

/// Horizontal slice `M^2 x {t}` in stereographic coordinates scaled so that
/// `ds^2 = du^2 + dv^2` at the origin.
pub(crate) struct Slice {
    pub sig: Signature,
    pub height: f64,
}

impl Formulas for Slice {
    fn sig(&self) -> Signature {
        self.sig
    }

    fn in_domain(&self, u: f64, v: f64) -> bool {
        self.sig.kappa() > 0 || u * u + v * v < 4.0
    }

    fn height_coordinate(&self) -> Option<usize> {
        None
    }

    fn position<D: Scalar>(&self, u: D, v: D, _p: D, _dp: D) -> [D; 4] {
        let k = self.sig.kappa_f64();
        let r2 = (u * u + v * v) * 0.25;
        let den = r2 * k + 1.0;
        [(-(r2 * k) + 1.0) / den, u / den, v / den, c(self.height)]
    }

    fn fields<D: Scalar>(&self, u: D, v: D, _p: D, _dp: D) -> Fields<D> {
        let den = (u * u + v * v) * (0.25 * self.sig.kappa_f64()) + 1.0;
        Fields {
            lambda: (den * den).recip(),
            shape: zero2(),
            tangent: [c(0.0); 2],
            nu: c(1.0),
        }
    }
}

/// Vertical cylinder over a geodesic: great circle of `S^2` or geodesic of `H^2`.
pub(crate) struct VerticalCylinder {
    pub sig: Signature,
}

impl Formulas for VerticalCylinder {
    fn sig(&self) -> Signature {
        self.sig
    }

    fn height_coordinate(&self) -> Option<usize> {
        Some(1)
    }

    fn position<D: Scalar>(&self, u: D, v: D, _p: D, _dp: D) -> [D; 4] {
        if self.sig.kappa() > 0 {
            [u.cos(), u.sin(), c(0.0), v]
        } else {
            [u.cosh(), u.sinh(), c(0.0), v]
        }
    }

    fn fields<D: Scalar>(&self, _u: D, _v: D, _p: D, _dp: D) -> Fields<D> {
        Fields { lambda: c(1.0), shape: zero2(), tangent: [c(0.0), c(1.0)], nu: c(0.0) }
    }
}
