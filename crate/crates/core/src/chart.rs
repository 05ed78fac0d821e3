//! Parametrized surfaces `x(u, v)` in `M^2 x R`, their derivative jets and
//! adapted frames.

use nalgebra::{DMatrix, Matrix4, Vector4};

use crate::ambient::{g_gram_schmidt, AmbientVector, FrameMatrix, Signature};
use crate::error::{Error, Result};
use crate::grid::{Node, ParameterGrid};

/// Tolerance on the model constraint for chart samples.
pub const MODEL_TOL: f64 = 1e-8;

/// Position and partial derivatives of a chart at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartJet {
    pub point: Vector4<f64>,
    pub du: Vector4<f64>,
    pub dv: Vector4<f64>,
    pub duu: Vector4<f64>,
    pub duv: Vector4<f64>,
    pub dvv: Vector4<f64>,
}

/// A surface chart `(u, v) -> E^4` with image in `M^2 x R`.
pub trait Chart: Send + Sync {
    fn signature(&self) -> Signature;

    fn name(&self) -> String;

    /// Whether the induced metric is a multiple of `du^2 + dv^2`.
    fn is_conformal(&self) -> bool {
        false
    }

    fn eval(&self, u: f64, v: f64) -> Result<Vector4<f64>>;

    /// Closed-form first and second derivatives, when the chart has them.
    fn analytic_jet(&self, _u: f64, _v: f64) -> Option<Result<ChartJet>> {
        None
    }
}

/// A chart given by a closure; derivatives are taken numerically.
pub struct FnChart<F> {
    sig: Signature,
    name: String,
    conformal: bool,
    f: F,
}

impl<F> FnChart<F>
where
    F: Fn(f64, f64) -> Vector4<f64> + Send + Sync,
{
    pub fn new(sig: Signature, name: impl Into<String>, conformal: bool, f: F) -> Self {
        Self { sig, name: name.into(), conformal, f }
    }
}

impl<F> Chart for FnChart<F>
where
    F: Fn(f64, f64) -> Vector4<f64> + Send + Sync,
{
    fn signature(&self) -> Signature {
        self.sig
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn is_conformal(&self) -> bool {
        self.conformal
    }

    fn eval(&self, u: f64, v: f64) -> Result<Vector4<f64>> {
        Ok((self.f)(u, v))
    }
}

/// Image `L x + c` of a chart under an ambient isometry, with `L` acting on
/// `E^4` and `c` a vertical translation.
pub struct IsometricImage<'a> {
    inner: &'a dyn Chart,
    linear: Matrix4<f64>,
    shift: Vector4<f64>,
}

impl<'a> IsometricImage<'a> {
    /// Fails unless `L` is block-diagonal, `G`-orthogonal on `M^2`, `±1` on
    /// `R`, and `c` is vertical.
    pub fn new(inner: &'a dyn Chart, linear: Matrix4<f64>, shift: Vector4<f64>) -> Result<Self> {
        let sig = inner.signature();
        let horizontal = DMatrix::from_fn(3, 3, |i, j| linear[(i, j)]);
        let mixed = (0..3).map(|i| linear[(i, 3)].abs().max(linear[(3, i)].abs())).fold(0.0, f64::max);
        let diag = [sig.kappa_f64(), 1.0, 1.0];
        let gram = horizontal.transpose() * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&diag)) * &horizontal;
        let defect = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| (gram[(i, j)] - if i == j { diag[i] } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        let ok = defect < 1e-10
            && mixed == 0.0
            && (linear[(3, 3)].abs() - 1.0).abs() < 1e-15
            && shift.rows(0, 3).amax() == 0.0
            && (sig.kappa() > 0 || linear[(0, 0)] > 0.0);
        if !ok {
            return Err(Error::Validation("map is not an isometry of M^2 x R".into()));
        }
        Ok(Self { inner, linear, shift })
    }
}

impl Chart for IsometricImage<'_> {
    fn signature(&self) -> Signature {
        self.inner.signature()
    }

    fn name(&self) -> String {
        format!("isometric image of {}", self.inner.name())
    }

    fn is_conformal(&self) -> bool {
        self.inner.is_conformal()
    }

    fn eval(&self, u: f64, v: f64) -> Result<Vector4<f64>> {
        Ok(self.linear * self.inner.eval(u, v)? + self.shift)
    }

    fn analytic_jet(&self, u: f64, v: f64) -> Option<Result<ChartJet>> {
        let l = &self.linear;
        Some(self.inner.analytic_jet(u, v)?.map(|j| ChartJet {
            point: l * j.point + self.shift,
            du: l * j.du,
            dv: l * j.dv,
            duu: l * j.duu,
            duv: l * j.duv,
            dvv: l * j.dvv,
        }))
    }
}

/// Central-difference jet with steps `hu`, `hv`, sampling the chart off-grid
/// where needed.
pub fn numerical_jet(chart: &dyn Chart, u: f64, v: f64, hu: f64, hv: f64) -> Result<ChartJet> {
    let x = |a: f64, b: f64| chart.eval(a, b);
    let c = x(u, v)?;
    let (pu, mu) = (x(u + hu, v)?, x(u - hu, v)?);
    let (pv, mv) = (x(u, v + hv)?, x(u, v - hv)?);
    let (pp, pm) = (x(u + hu, v + hv)?, x(u + hu, v - hv)?);
    let (mp, mm) = (x(u - hu, v + hv)?, x(u - hu, v - hv)?);
    Ok(ChartJet {
        point: c,
        du: (pu - mu) / (2.0 * hu),
        dv: (pv - mv) / (2.0 * hv),
        duu: (pu - 2.0 * c + mu) / (hu * hu),
        dvv: (pv - 2.0 * c + mv) / (hv * hv),
        duv: (pp - pm - mp + mm) / (4.0 * hu * hv),
    })
}

/// Analytic jet if the chart supplies one, otherwise [`numerical_jet`].
pub fn chart_jet(chart: &dyn Chart, u: f64, v: f64, hu: f64, hv: f64) -> Result<ChartJet> {
    match chart.analytic_jet(u, v) {
        Some(jet) => jet,
        None => numerical_jet(chart, u, v, hu, hv),
    }
}

pub fn check_model(sig: &Signature, p: &Vector4<f64>, node: Node) -> Result<()> {
    let defect = AmbientVector::from_slice(p.as_slice()).model_defect(sig);
    if !(defect.abs() <= MODEL_TOL) {
        return Err(Error::Validation(format!(
            "chart leaves the model at node {node}: constraint residual {defect:.3e}"
        )));
    }
    if sig.kappa() < 0 && p[0] <= 0.0 {
        return Err(Error::Validation(format!("chart sample at node {node} has x^0 <= 0")));
    }
    Ok(())
}

/// Samples the chart at every grid node.
pub fn sample_chart(chart: &dyn Chart, grid: &ParameterGrid) -> Result<Vec<AmbientVector>> {
    let sig = chart.signature();
    grid.nodes()
        .map(|n| {
            let (u, v) = grid.coords(n);
            let p = chart.eval(u, v)?;
            check_model(&sig, &p, n)?;
            Ok(AmbientVector::from_slice(p.as_slice()))
        })
        .collect()
}

pub(crate) fn g_dot(sig: &Signature, a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    sig.kappa_f64() * a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Frame `(N̄, e1, e2, N)` adapted to the chart at one point, with `(e1, e2)`
/// obtained from `(x_u, x_v)` by Gram–Schmidt and `N` oriented so the frame
/// has determinant +1.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub frame: FrameMatrix,
    pub normal: Vector4<f64>,
}

pub fn adapted_frame(sig: &Signature, jet: &ChartJet, node: Node) -> Result<AdaptedFrame> {
    let k = sig.kappa_f64();
    let p = jet.point;
    let nbar = Vector4::new(p[0], p[1], p[2], 0.0);
    let (xu, xv) = (jet.du, jet.dv);

    // covector c with c.w = det[w, x_u, x_v, N̄]; N = G^{-1} c
    let mut normal = Vector4::zeros();
    for a in 0..4 {
        let m = Matrix4::from_columns(&[Vector4::ith(a, 1.0), xu, xv, nbar]);
        normal[a] = m.determinant();
    }
    normal[0] *= k;
    let n2 = g_dot(sig, &normal, &normal);
    if !(n2 > 1e-24) {
        return Err(Error::Domain(format!("chart is not immersive at node {node}")));
    }
    normal /= n2.sqrt();

    // Gram–Schmidt also against N̄, which absorbs finite-difference error in x_u, x_v
    let mut m = Matrix4::from_columns(&[nbar, xu, xv, normal]);
    if m.determinant() < 0.0 {
        normal = -normal;
        m.set_column(3, &normal);
    }
    let m = DMatrix::from_column_slice(4, 4, m.as_slice());
    let m = g_gram_schmidt(&m, sig.g_form().diag())
        .map_err(|e| Error::Domain(format!("degenerate tangent plane at node {node}: {e}")))?;
    let frame = FrameMatrix::with_tolerance(m, sig, 1e-8)
        .map_err(|e| Error::Domain(format!("adapted frame at node {node}: {e}")))?;
    Ok(AdaptedFrame { frame, normal })
}
