//! Linear algebra of the ambient space `E^{n+2}`.
//!
//! `E^{n+2}` is `R^{n+2}` (for `S^n x R`, kappa = +1) or the Lorentz space
//! `L^{n+2}` (for `H^n x R`, kappa = -1), with bilinear form
//! `G = diag(kappa, 1, ..., 1)`. Coordinate 0 is the timelike direction in
//! the Lorentz case and coordinate `n+1` is the vertical `R` factor.
//!
//! Frames are stored as `(n+2) x (n+2)` matrices whose column `beta` holds
//! the `E`-coordinates of the frame vector `e_beta`.

use std::fmt;
use std::ops::Mul;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Group-membership tolerance for frames built directly from geometric data.
pub const CONSTRUCTED_FRAME_TOL: f64 = 1e-10;
/// Group-membership tolerance for transported frames before re-projection.
pub const TRANSPORTED_FRAME_TOL: f64 = 1e-6;
/// Maximum distance (max-norm of `ᵗAGA - G`) accepted by [`reorthonormalize`].
pub const REPROJECTION_RADIUS: f64 = 0.1;

const MAX_AMBIENT_DIM: usize = 16;

/// Ambient choice: curvature sign of `M^n` and hypersurface dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    kappa: i8,
    n: usize,
}

impl Signature {
    pub fn new(kappa: i8, n: usize) -> Result<Self> {
        if kappa != 1 && kappa != -1 {
            return Err(Error::Structural(format!("kappa must be +1 or -1, got {kappa}")));
        }
        if n < 2 {
            return Err(Error::Structural(format!("dimension n must be >= 2, got {n}")));
        }
        if n + 2 > MAX_AMBIENT_DIM {
            return Err(Error::Unsupported(format!(
                "ambient dimension {} exceeds {MAX_AMBIENT_DIM}",
                n + 2
            )));
        }
        Ok(Self { kappa, n })
    }

    /// `S^2 x R`.
    pub fn sphere2() -> Self {
        Self { kappa: 1, n: 2 }
    }

    /// `H^2 x R`.
    pub fn hyperbolic2() -> Self {
        Self { kappa: -1, n: 2 }
    }

    pub fn kappa(&self) -> i8 {
        self.kappa
    }

    pub fn kappa_f64(&self) -> f64 {
        f64::from(self.kappa)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the ambient space, `n + 2`.
    pub fn dim(&self) -> usize {
        self.n + 2
    }

    /// Index of the vertical coordinate.
    pub fn vertical(&self) -> usize {
        self.n + 1
    }

    pub fn g_form(&self) -> GForm {
        GForm::new(self.kappa_f64(), self.dim())
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.kappa > 0 { "S" } else { "H" };
        write!(f, "{base}^{} x R", self.n)
    }
}

/// The diagonal bilinear form `G = diag(kappa, 1, ..., 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GForm {
    diag: Vec<f64>,
}

impl GForm {
    pub fn new(kappa: f64, dim: usize) -> Self {
        let mut diag = vec![1.0; dim];
        diag[0] = kappa;
        Self { diag }
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(&self.diag))
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.diag.iter().zip(a).zip(b).map(|((g, x), y)| g * x * y).sum()
    }

    /// Max-norm of `ᵗAGA - G`.
    pub fn group_defect(&self, a: &DMatrix<f64>) -> f64 {
        let g = self.matrix();
        (a.transpose() * &g * a - g).amax()
    }

    /// Inverse of a `G`-orthogonal matrix: `G ᵗA G`.
    pub fn group_inverse(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let g = self.matrix();
        &g * a.transpose() * &g
    }
}

/// A point or vector of `E^{n+2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVector(DVector<f64>);

impl AmbientVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(DVector::from_vec(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Self(DVector::from_row_slice(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// Canonical basis vector `E_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    /// Last coordinate (the `R` factor).
    pub fn height(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// `(x^0, ..., x^n, 0)`: the unit normal of `M^n x R` at this point.
    pub fn horizontal_normal(&self) -> AmbientVector {
        let mut v = self.0.clone();
        let last = v.len() - 1;
        v[last] = 0.0;
        Self(v)
    }

    pub fn check_dim(&self, sig: &Signature) -> Result<()> {
        if self.len() != sig.dim() {
            return Err(Error::Structural(format!(
                "vector of length {} in ambient of dimension {}",
                self.len(),
                sig.dim()
            )));
        }
        Ok(())
    }

    /// `kappa (x^0)^2 + sum_i (x^i)^2 - kappa` over the horizontal coordinates.
    pub fn model_defect(&self, sig: &Signature) -> f64 {
        let k = sig.kappa_f64();
        let x = self.as_slice();
        let q: f64 = k * x[0] * x[0] + x[1..=sig.n()].iter().map(|c| c * c).sum::<f64>();
        q - k
    }

    pub fn distance(&self, other: &AmbientVector) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

impl From<DVector<f64>> for AmbientVector {
    fn from(v: DVector<f64>) -> Self {
        Self(v)
    }
}

/// `G`-inner product `kappa u^0 v^0 + sum_{i>=1} u^i v^i`.
pub fn g_inner(u: &AmbientVector, v: &AmbientVector, sig: &Signature) -> Result<f64> {
    u.check_dim(sig)?;
    v.check_dim(sig)?;
    Ok(sig.g_form().inner(u.as_slice(), v.as_slice()))
}

/// Radially rescales the horizontal part of `p` onto `M^n`, keeping the height.
pub fn project_to_model(p: &AmbientVector, sig: &Signature) -> Result<AmbientVector> {
    p.check_dim(sig)?;
    let k = sig.kappa_f64();
    let x = p.as_slice();
    let q: f64 = k * x[0] * x[0] + x[1..=sig.n()].iter().map(|c| c * c).sum::<f64>();
    // q must have the sign of kappa for a positive rescaling to reach the model
    if !(q * k > 0.0) || !q.is_finite() {
        return Err(Error::Domain(format!(
            "horizontal part has G-norm {q:.3e}, cannot rescale onto {}",
            if k > 0.0 { "S^n" } else { "H^n" }
        )));
    }
    if k < 0.0 && x[0] <= 0.0 {
        return Err(Error::Domain(
            "x^0 <= 0: the x^0 > 0 sheet of H^n is unreachable by positive scaling".into(),
        ));
    }
    let scale = (q * k).sqrt().recip();
    let mut out = p.0.clone();
    for c in out.iter_mut().take(sig.n() + 1) {
        *c *= scale;
    }
    Ok(AmbientVector::from_inner(out))
}

impl AmbientVector {
    fn from_inner(v: DVector<f64>) -> Self {
        Self(v)
    }
}

/// An element of `SO⁺(E^{n+2})`: columns are `(N̄, e_1, ..., e_n, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix(DMatrix<f64>);

impl FrameMatrix {
    /// Validates group membership at [`CONSTRUCTED_FRAME_TOL`].
    pub fn new(m: DMatrix<f64>, sig: &Signature) -> Result<Self> {
        Self::with_tolerance(m, sig, CONSTRUCTED_FRAME_TOL)
    }

    pub fn with_tolerance(m: DMatrix<f64>, sig: &Signature, tol: f64) -> Result<Self> {
        let d = sig.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Structural(format!(
                "frame matrix is {}x{}, expected {d}x{d}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = sig.g_form().group_defect(&m);
        if !(defect <= tol) {
            return Err(Error::Validation(format!(
                "frame matrix off SO(E^{d}) by {defect:.3e} (tolerance {tol:.1e})"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > tol.max(1e-12) * 10.0 {
            return Err(Error::Validation(format!("frame determinant {det} != 1")));
        }
        if sig.kappa() < 0 && m[(0, 0)] <= 0.0 {
            return Err(Error::Validation(
                "frame entry A^0_0 <= 0: not in the identity component".into(),
            ));
        }
        Ok(Self(m))
    }

    pub fn identity(sig: &Signature) -> Self {
        Self(DMatrix::identity(sig.dim(), sig.dim()))
    }

    /// Wraps a matrix without checking; used for intermediate transport states.
    pub(crate) fn from_raw(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn column(&self, beta: usize) -> AmbientVector {
        AmbientVector::from(self.0.column(beta).into_owned())
    }

    /// Last row: coordinates of `∂/∂t` in the frame.
    pub fn last_row(&self) -> Vec<f64> {
        let r = self.0.nrows() - 1;
        self.0.row(r).iter().copied().collect()
    }

    pub fn group_defect(&self, sig: &Signature) -> f64 {
        sig.g_form().group_defect(&self.0)
    }

    pub fn inverse(&self, sig: &Signature) -> DMatrix<f64> {
        sig.g_form().group_inverse(&self.0)
    }
}

impl Mul for &FrameMatrix {
    type Output = FrameMatrix;

    fn mul(self, rhs: &FrameMatrix) -> FrameMatrix {
        FrameMatrix(&self.0 * &rhs.0)
    }
}

/// An element of `so(E^{n+2})`: `ᵗHG + GH = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoMatrix(DMatrix<f64>);

impl SoMatrix {
    /// Accepts `m` only if `ᵗHG + GH` vanishes exactly.
    pub fn new(m: DMatrix<f64>, sig: &Signature) -> Result<Self> {
        let d = sig.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Structural(format!(
                "so matrix is {}x{}, expected {d}x{d}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = so_defect(&m, sig);
        if defect != 0.0 {
            return Err(Error::Validation(format!(
                "matrix is not G-antisymmetric (defect {defect:.3e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn zeros(sig: &Signature) -> Self {
        Self(DMatrix::zeros(sig.dim(), sig.dim()))
    }

    pub(crate) fn from_raw(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

/// Max-norm of `ᵗHG + GH`.
pub fn so_defect(h: &DMatrix<f64>, sig: &Signature) -> f64 {
    let g = sig.g_form().matrix();
    (h.transpose() * &g + &g * h).amax()
}

/// `G`-Gram–Schmidt over the columns of `m`, in order, for an arbitrary
/// diagonal form. Each column keeps the causal character prescribed by `diag`.
pub(crate) fn g_gram_schmidt(m: &DMatrix<f64>, diag: &[f64]) -> Result<DMatrix<f64>> {
    let dim = diag.len();
    let ip = |a: &DVector<f64>, b: &DVector<f64>| -> f64 {
        diag.iter().enumerate().map(|(k, g)| g * a[k] * b[k]).sum()
    };
    let mut out = m.clone();
    for k in 0..dim {
        let mut c: DVector<f64> = out.column(k).into_owned();
        // two sweeps of modified Gram–Schmidt
        for _ in 0..2 {
            for p in 0..k {
                let q: DVector<f64> = out.column(p).into_owned();
                let coeff = ip(&c, &q) / diag[p];
                c -= q * coeff;
            }
        }
        let norm2 = ip(&c, &c);
        if !(norm2 * diag[k] > 1e-8) {
            return Err(Error::Numerical(format!(
                "degenerate Gram-Schmidt step at column {k} (G-norm {norm2:.3e})"
            )));
        }
        c /= (norm2 * diag[k]).sqrt();
        out.set_column(k, &c);
    }
    Ok(out)
}

/// Projects a near-group matrix back onto `SO⁺(E^{n+2})` by `G`-Gram–Schmidt
/// over columns `0, 1, ..., n+1`.
pub fn reorthonormalize(a: &FrameMatrix, sig: &Signature) -> Result<FrameMatrix> {
    let defect = a.group_defect(sig);
    if !(defect <= REPROJECTION_RADIUS) {
        return Err(Error::Numerical(format!(
            "matrix is {defect:.3e} away from the group (limit {REPROJECTION_RADIUS})"
        )));
    }
    let g = sig.g_form();
    let out = g_gram_schmidt(a.matrix(), g.diag())?;
    Ok(FrameMatrix(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentz() -> Signature {
        Signature::hyperbolic2()
    }

    #[test]
    fn signature_rejects_bad_values() {
        assert!(Signature::new(0, 2).is_err());
        assert!(Signature::new(1, 1).is_err());
        assert!(Signature::new(-1, 15).is_err());
        assert_eq!(Signature::new(-1, 3).unwrap().dim(), 5);
    }

    #[test]
    fn lorentz_inner_products() {
        let sig = lorentz();
        let e0 = AmbientVector::basis(4, 0);
        assert_eq!(g_inner(&e0, &e0, &sig).unwrap(), -1.0);
        assert_eq!(g_inner(&e0, &e0, &Signature::sphere2()).unwrap(), 1.0);
        let null = AmbientVector::from_slice(&[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(g_inner(&null, &null, &sig).unwrap(), 0.0);
        let short = AmbientVector::from_slice(&[1.0, 0.0, 0.0]);
        assert!(matches!(g_inner(&short, &e0, &sig), Err(Error::Structural(_))));
    }

    #[test]
    fn projection_examples() {
        let p = project_to_model(&AmbientVector::from_slice(&[2.0, 0.0, 0.0, 5.0]), &Signature::sphere2())
            .unwrap();
        assert_eq!(p.as_slice(), &[1.0, 0.0, 0.0, 5.0]);
        let p = project_to_model(&AmbientVector::from_slice(&[2.0, 0.0, 0.0, 3.0]), &lorentz()).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 0.0, 0.0, 3.0]);
        let err = project_to_model(&AmbientVector::from_slice(&[-2.0, 0.0, 0.0, 0.0]), &lorentz());
        assert!(matches!(err, Err(Error::Domain(_))));
        let err = project_to_model(&AmbientVector::from_slice(&[1.0, 1.0, 0.0, 0.0]), &lorentz());
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    fn boost_rotation(sig: &Signature, eps: f64) -> DMatrix<f64> {
        // exp(eps H) for a fixed H in so(E^4), by a truncated series
        let k = sig.kappa_f64();
        let mut h = DMatrix::<f64>::zeros(4, 4);
        let entries = [(0, 1, 0.7), (0, 2, -0.4), (1, 2, 0.9), (1, 3, 0.3), (2, 3, -1.1), (0, 3, 0.5)];
        for &(a, b, x) in &entries {
            h[(a, b)] = x;
            // ᵗHG + GH = 0  =>  H_ba = -G_aa H_ab / G_bb
            let ga = if a == 0 { k } else { 1.0 };
            h[(b, a)] = -ga * x;
        }
        assert_eq!(so_defect(&h, sig), 0.0);
        let he = h * eps;
        let mut term = DMatrix::<f64>::identity(4, 4);
        let mut sum = term.clone();
        for m in 1..25 {
            term = &term * &he / m as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn reorthonormalize_examples() {
        for sig in [Signature::sphere2(), lorentz()] {
            let id = FrameMatrix::identity(&sig);
            assert_eq!(reorthonormalize(&id, &sig).unwrap(), id);

            let mut a = boost_rotation(&sig, 1e-3);
            a[(1, 2)] += 1e-7;
            let out = reorthonormalize(&FrameMatrix::from_raw(a), &sig).unwrap();
            assert!(out.group_defect(&sig) <= 1e-14, "{}", out.group_defect(&sig));
            assert!((out.matrix().determinant() - 1.0).abs() < 1e-13);
        }
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let mut r = DMatrix::<f64>::identity(4, 4);
        r[(0, 0)] = c;
        r[(0, 1)] = -s;
        r[(1, 0)] = s;
        r[(1, 1)] = c;
        let sig = Signature::sphere2();
        let out = reorthonormalize(&FrameMatrix::from_raw(r.clone()), &sig).unwrap();
        assert!((out.matrix() - r).amax() < 1e-15);
    }

    #[test]
    fn reorthonormalize_rejects_far_matrices() {
        let sig = Signature::sphere2();
        let m = DMatrix::<f64>::identity(4, 4) * 2.0;
        assert!(matches!(reorthonormalize(&FrameMatrix::from_raw(m), &sig), Err(Error::Numerical(_))));
    }

    #[test]
    fn frame_validation() {
        let sig = lorentz();
        let mut m = DMatrix::<f64>::identity(4, 4);
        assert!(FrameMatrix::new(m.clone(), &sig).is_ok());
        // time-reversal composed with a spatial reflection: det = 1, A00 < 0
        m[(0, 0)] = -1.0;
        m[(1, 1)] = -1.0;
        assert!(FrameMatrix::new(m, &sig).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vec4() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-10.0f64..10.0, 4)
        }

        proptest! {
            #[test]
            fn g_inner_is_symmetric_bilinear(a in vec4(), b in vec4(), c in vec4(), s in -5.0f64..5.0, k in prop::bool::ANY) {
                let sig = if k { Signature::sphere2() } else { Signature::hyperbolic2() };
                let (va, vb, vc) = (AmbientVector::new(a.clone()), AmbientVector::new(b.clone()), AmbientVector::new(c.clone()));
                let ab = g_inner(&va, &vb, &sig).unwrap();
                prop_assert!((ab - g_inner(&vb, &va, &sig).unwrap()).abs() < 1e-12);
                let combo: Vec<f64> = a.iter().zip(&c).map(|(x, y)| s * x + y).collect();
                let lhs = g_inner(&AmbientVector::new(combo), &vb, &sig).unwrap();
                let rhs = s * ab + g_inner(&vc, &vb, &sig).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
                if k {
                    let sq: f64 = a.iter().map(|x| x * x).sum();
                    prop_assert!((g_inner(&va, &va, &sig).unwrap() - sq).abs() < 1e-12 * (1.0 + sq));
                }
            }

            #[test]
            fn products_stay_in_group(e1 in -2.0f64..2.0, e2 in -2.0f64..2.0, k in prop::bool::ANY) {
                let sig = if k { Signature::sphere2() } else { Signature::hyperbolic2() };
                let a = FrameMatrix::from_raw(boost_rotation(&sig, e1));
                let b = FrameMatrix::from_raw(boost_rotation(&sig, e2));
                let scale = a.matrix().amax() * b.matrix().amax();
                prop_assert!((&a * &b).group_defect(&sig) <= 1e-12 * scale * scale);
            }

            #[test]
            fn reorthonormalize_is_idempotent(e in -1.0f64..1.0, noise in -1e-4f64..1e-4, k in prop::bool::ANY) {
                let sig = if k { Signature::sphere2() } else { Signature::hyperbolic2() };
                let mut m = boost_rotation(&sig, e);
                m[(2, 1)] += noise;
                let once = reorthonormalize(&FrameMatrix::from_raw(m), &sig).unwrap();
                let twice = reorthonormalize(&once, &sig).unwrap();
                prop_assert!((once.matrix() - twice.matrix()).amax() <= 1e-14 * once.matrix().amax().max(1.0));
            }
        }
    }
}
