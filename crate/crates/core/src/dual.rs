//! Forward-mode differentiation helpers over `num-dual` numbers.

use num_dual::{DualNum, HyperDual64};

/// Scalars the closed-form formulas are generic over (`f64` and dual numbers).
pub trait Scalar: DualNum<Primitive = f64> + Copy {}

impl<T: DualNum<Primitive = f64> + Copy> Scalar for T {}

pub(crate) fn c<D: Scalar>(x: f64) -> D {
    D::from(x)
}

/// Direction pair of a hyper-dual evaluation: `eps1` moves `(u, v)` along
/// `first`, `eps2` along `second`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Seed {
    pub first: [f64; 2],
    pub second: [f64; 2],
}

/// `∂_u`, `∂_v` and `∂_uv` in one pass.
pub(crate) const SEED_UV: Seed = Seed { first: [1.0, 0.0], second: [0.0, 1.0] };
/// `∂_uu` in the mixed part.
pub(crate) const SEED_UU: Seed = Seed { first: [1.0, 0.0], second: [1.0, 0.0] };
/// `∂_vv` in the mixed part.
pub(crate) const SEED_VV: Seed = Seed { first: [0.0, 1.0], second: [0.0, 1.0] };

impl Seed {
    pub fn u(&self, u: f64) -> HyperDual64 {
        HyperDual64::new(u, self.first[0], self.second[0], 0.0)
    }

    pub fn v(&self, v: f64) -> HyperDual64 {
        HyperDual64::new(v, self.first[1], self.second[1], 0.0)
    }

    /// Lifts a function of `u` alone given its derivatives `[f, f', f'']`.
    pub fn lift_u(&self, f: [f64; 3]) -> HyperDual64 {
        let (a, b) = (self.first[0], self.second[0]);
        HyperDual64::new(f[0], a * f[1], b * f[1], a * b * f[2])
    }
}
