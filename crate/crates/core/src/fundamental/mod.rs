//! Fundamental data `(ds^2, S, T, nu)` of a surface in `M^2 x R` on a
//! parameter grid, and the compatibility-equation residuals.
//!
//! All tensors are stored in the coordinate frame `(∂_u, ∂_v)`. A shape
//! operator entry `S[(k, i)]` is the `∂_k` component of `S ∂_i`.

mod residuals;

use nalgebra::{Matrix2, Vector2};

pub use residuals::{
    check_compatibility, codazzi_residual, gauss_curvature, gauss_residual, structure_residuals,
    NodeJet, ResidualEntry, ResidualReport, StructureResiduals, RESIDUAL_NAMES,
};
pub(crate) use residuals::node_jet;

use crate::ambient::Signature;
use crate::chart::{adapted_frame, chart_jet, check_model, g_dot, Chart};
use crate::error::{Error, Result};
use crate::grid::{Node, ParameterGrid};

/// Exact first and second derivatives of the fields at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet {
    /// `[∂_u g, ∂_v g]`
    pub metric_gradient: [Matrix2<f64>; 2],
    /// `[∂_uu g, ∂_uv g, ∂_vv g]`
    pub metric_hessian: [Matrix2<f64>; 3],
    pub shape_gradient: [Matrix2<f64>; 2],
    pub tangent_gradient: [Vector2<f64>; 2],
    pub nu_gradient: [f64; 2],
}

/// Per-node fundamental data on a rectangular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalData {
    sig: Signature,
    grid: ParameterGrid,
    metric: Vec<Matrix2<f64>>,
    shape: Vec<Matrix2<f64>>,
    tangent: Vec<Vector2<f64>>,
    nu: Vec<f64>,
    metric_gradient: Option<Vec<[Matrix2<f64>; 2]>>,
    jet: Option<Vec<FieldJet>>,
}

impl FundamentalData {
    /// Builds data from per-node arrays. Only the shapes and the metric's
    /// positivity are checked here; the compatibility equations are the job of
    /// [`check_compatibility`].
    pub fn new(
        sig: Signature,
        grid: ParameterGrid,
        metric: Vec<Matrix2<f64>>,
        shape: Vec<Matrix2<f64>>,
        tangent: Vec<Vector2<f64>>,
        nu: Vec<f64>,
    ) -> Result<Self> {
        if sig.n() != 2 {
            return Err(Error::Unsupported(format!(
                "fundamental data is implemented for surfaces (n = 2), got n = {}",
                sig.n()
            )));
        }
        let len = grid.len();
        for (name, l) in [("g", metric.len()), ("S", shape.len()), ("T", tangent.len()), ("nu", nu.len())] {
            if l != len {
                return Err(Error::Structural(format!(
                    "field {name} has {l} nodes, grid has {len}"
                )));
            }
        }
        for (idx, g) in metric.iter().enumerate() {
            check_metric(g, grid.node(idx))?;
        }
        Ok(Self { sig, grid, metric, shape, tangent, nu, metric_gradient: None, jet: None })
    }

    /// Attaches exact metric derivatives (used for the Levi-Civita connection).
    pub fn with_metric_gradient(mut self, gradient: Vec<[Matrix2<f64>; 2]>) -> Result<Self> {
        if gradient.len() != self.grid.len() {
            return Err(Error::Structural("metric gradient length differs from grid".into()));
        }
        self.metric_gradient = Some(gradient);
        Ok(self)
    }

    /// Attaches exact derivatives of every field; residuals then avoid finite
    /// differences entirely.
    pub fn with_jet(mut self, jet: Vec<FieldJet>) -> Result<Self> {
        if jet.len() != self.grid.len() {
            return Err(Error::Structural("field jet length differs from grid".into()));
        }
        self.metric_gradient = Some(jet.iter().map(|j| j.metric_gradient).collect());
        self.jet = Some(jet);
        Ok(self)
    }

    /// Drops all attached derivatives, leaving finite differences.
    pub fn without_derivatives(mut self) -> Self {
        self.metric_gradient = None;
        self.jet = None;
        self
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn metric(&self) -> &[Matrix2<f64>] {
        &self.metric
    }

    pub fn shape(&self) -> &[Matrix2<f64>] {
        &self.shape
    }

    pub fn tangent(&self) -> &[Vector2<f64>] {
        &self.tangent
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn metric_gradient(&self) -> Option<&[[Matrix2<f64>; 2]]> {
        self.metric_gradient.as_deref()
    }

    pub fn jet(&self) -> Option<&[FieldJet]> {
        self.jet.as_deref()
    }

    /// True when every field carries exact derivatives.
    pub fn is_analytic(&self) -> bool {
        self.jet.is_some()
    }

    /// `1e-8` for analytic data, `10 h^2` otherwise.
    pub fn default_tolerance(&self) -> f64 {
        if self.is_analytic() {
            1e-8
        } else {
            10.0 * self.grid.h().powi(2)
        }
    }

    pub fn index(&self, node: Node) -> usize {
        self.grid.index(node)
    }

    /// `η_i = g(T, ∂_i)` at a node.
    pub fn eta(&self, node: Node) -> Vector2<f64> {
        let k = self.index(node);
        self.metric[k] * self.tangent[k]
    }

    /// Replaces the shape operator, the tangent field and `nu` by the given
    /// maps. The metric and its gradient are kept; the field jet is dropped,
    /// so derivatives of the new fields come from finite differences.
    pub fn map_fields(
        &self,
        shape: impl Fn(Node, &Matrix2<f64>) -> Matrix2<f64>,
        tangent: impl Fn(Node, &Vector2<f64>) -> Vector2<f64>,
        nu: impl Fn(Node, f64) -> f64,
    ) -> Self {
        let nodes: Vec<Node> = self.grid.nodes().collect();
        Self {
            sig: self.sig,
            grid: self.grid,
            metric: self.metric.clone(),
            shape: nodes.iter().zip(&self.shape).map(|(n, s)| shape(*n, s)).collect(),
            tangent: nodes.iter().zip(&self.tangent).map(|(n, t)| tangent(*n, t)).collect(),
            nu: nodes.iter().zip(&self.nu).map(|(n, x)| nu(*n, *x)).collect(),
            metric_gradient: self.metric_gradient.clone(),
            jet: None,
        }
    }

    pub(crate) fn replace_fields(
        &self,
        shape: Vec<Matrix2<f64>>,
        tangent: Vec<Vector2<f64>>,
        nu: Vec<f64>,
        jet: Option<Vec<FieldJet>>,
    ) -> Self {
        Self {
            sig: self.sig,
            grid: self.grid,
            metric: self.metric.clone(),
            shape,
            tangent,
            nu,
            metric_gradient: self.metric_gradient.clone(),
            jet,
        }
    }
}

fn check_metric(g: &Matrix2<f64>, node: Node) -> Result<()> {
    let det = g.determinant();
    let tr = g.trace();
    if !(g[(0, 0)] > 0.0) || !(det >= 1e-12 * tr * tr) || (g[(0, 1)] - g[(1, 0)]).abs() > 1e-12 * tr {
        return Err(Error::Domain(format!(
            "metric at node {node} is not symmetric positive definite (det {det:.3e}, trace {tr:.3e})"
        )));
    }
    Ok(())
}

/// Induced data of a chart on a grid. Chart derivatives are analytic when the
/// chart supplies them and central differences of step equal to the grid
/// spacing otherwise. The metric gradient is attached from the second
/// derivatives of the chart.
pub fn fundamental_from_chart(chart: &dyn Chart, grid: &ParameterGrid) -> Result<FundamentalData> {
    let sig = chart.signature();
    if sig.n() != 2 {
        return Err(Error::Unsupported("charts are two-dimensional".into()));
    }
    let (hu, hv) = (grid.hu(), grid.hv());
    let len = grid.len();
    let mut metric = Vec::with_capacity(len);
    let mut shape = Vec::with_capacity(len);
    let mut tangent = Vec::with_capacity(len);
    let mut nus = Vec::with_capacity(len);
    let mut gradient = Vec::with_capacity(len);
    for node in grid.nodes() {
        let (u, v) = grid.coords(node);
        let jet = chart_jet(chart, u, v, hu, hv)?;
        check_model(&sig, &jet.point, node)?;
        let d = |a, b| g_dot(&sig, a, b);
        let g = Matrix2::new(d(&jet.du, &jet.du), d(&jet.du, &jet.dv), d(&jet.dv, &jet.du), d(&jet.dv, &jet.dv));
        check_metric(&g, node)?;
        let normal = adapted_frame(&sig, &jet, node)?.normal;
        let b = Matrix2::new(
            d(&jet.duu, &normal),
            d(&jet.duv, &normal),
            d(&jet.duv, &normal),
            d(&jet.dvv, &normal),
        );
        let g_inv = g.try_inverse().ok_or_else(|| Error::Domain(format!("singular metric at node {node}")))?;
        let grad_u = Matrix2::new(
            2.0 * d(&jet.duu, &jet.du),
            d(&jet.duu, &jet.dv) + d(&jet.du, &jet.duv),
            d(&jet.duu, &jet.dv) + d(&jet.du, &jet.duv),
            2.0 * d(&jet.duv, &jet.dv),
        );
        let grad_v = Matrix2::new(
            2.0 * d(&jet.duv, &jet.du),
            d(&jet.duv, &jet.dv) + d(&jet.du, &jet.dvv),
            d(&jet.duv, &jet.dv) + d(&jet.du, &jet.dvv),
            2.0 * d(&jet.dvv, &jet.dv),
        );
        metric.push(g);
        shape.push(g_inv * b);
        tangent.push(g_inv * Vector2::new(jet.du[3], jet.dv[3]));
        nus.push(normal[3]);
        gradient.push([grad_u, grad_v]);
    }
    FundamentalData::new(sig, *grid, metric, shape, tangent, nus)?.with_metric_gradient(gradient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::FnChart;
    use nalgebra::Vector4;

    fn sphere_slice(kappa: i8) -> impl Chart {
        let sig = Signature::new(kappa, 2).unwrap();
        let k = f64::from(kappa);
        FnChart::new(sig, "slice", true, move |u: f64, v: f64| {
            let r2 = u * u + v * v;
            let den = 1.0 + k * r2;
            Vector4::new((1.0 - k * r2) / den, 2.0 * u / den, 2.0 * v / den, 0.0)
        })
    }

    #[test]
    fn slice_is_totally_geodesic() {
        for kappa in [1, -1] {
            let grid = ParameterGrid::centered(0.5, 0.05).unwrap();
            let data = fundamental_from_chart(&sphere_slice(kappa), &grid).unwrap();
            for k in 0..grid.len() {
                assert!(data.shape()[k].amax() < 1e-6);
                assert!(data.tangent()[k].amax() < 1e-12);
                assert!((data.nu()[k].abs() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cylinder_data() {
        let chart = FnChart::new(Signature::sphere2(), "cyl", true, |u: f64, v: f64| {
            Vector4::new(u.cos(), u.sin(), 0.0, v)
        });
        let grid = ParameterGrid::centered(0.5, 0.05).unwrap();
        let data = fundamental_from_chart(&chart, &grid).unwrap();
        for n in grid.nodes() {
            let k = grid.index(n);
            assert!(data.shape()[k].amax() < 1e-6);
            assert!(data.nu()[k].abs() < 1e-12);
            let t = data.tangent()[k];
            assert!(((data.metric()[k] * t).dot(&t) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_shapes_and_metrics() {
        let sig = Signature::sphere2();
        let grid = ParameterGrid::centered(0.5, 0.25).unwrap();
        let n = grid.len();
        let z = Matrix2::zeros();
        let ok = FundamentalData::new(sig, grid, vec![Matrix2::identity(); n], vec![z; n], vec![Vector2::zeros(); n], vec![1.0; n]);
        assert!(ok.is_ok());
        let short = FundamentalData::new(sig, grid, vec![Matrix2::identity(); n - 1], vec![z; n], vec![Vector2::zeros(); n], vec![1.0; n]);
        assert!(matches!(short, Err(Error::Structural(_))));
        let mut metric = vec![Matrix2::identity(); n];
        metric[7] = Matrix2::new(1.0, 1.0, 1.0, 1.0);
        let degenerate = FundamentalData::new(sig, grid, metric, vec![z; n], vec![Vector2::zeros(); n], vec![1.0; n]);
        match degenerate {
            Err(Error::Domain(msg)) => assert!(msg.contains(&grid.node(7).to_string())),
            other => panic!("expected domain error, got {other:?}"),
        }
        let n3 = Signature::new(1, 3).unwrap();
        assert!(matches!(
            FundamentalData::new(n3, grid, vec![Matrix2::identity(); n], vec![z; n], vec![Vector2::zeros(); n], vec![1.0; n]),
            Err(Error::Unsupported(_))
        ));
    }
}
