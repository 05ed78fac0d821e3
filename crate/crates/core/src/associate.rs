//! Associate family of minimal surfaces in `M^2 x R`: the rotation `J`, the
//! rotated data `(g, e^{θJ} S, e^{θJ} T, ν)` and the immersions `x_θ`.

use nalgebra::{DMatrix, Matrix2};
use num_dual::Dual64;

use crate::ambient::FrameMatrix;
use crate::chart::Chart;
use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::fundamental::{fundamental_from_chart, FieldJet, FundamentalData};
use crate::frames::{chart_base_frame, reconstruct_from_data, ReconstructedChart};
use crate::grid::{Node, ParameterGrid};

/// Rotation angle `θ` in radians. Not reduced modulo `2π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationAngle(pub f64);

impl RotationAngle {
    pub fn radians(&self) -> f64 {
        self.0
    }

    /// `e^{θJ} = cos θ I + sin θ J` for a given `J`.
    pub fn exp(&self, j: &Matrix2<f64>) -> Matrix2<f64> {
        Matrix2::identity() * self.0.cos() + j * self.0.sin()
    }
}

impl From<f64> for RotationAngle {
    fn from(theta: f64) -> Self {
        Self(theta)
    }
}

fn rotation_generic<D: Scalar>(g: [[D; 2]; 2]) -> [[D; 2]; 2] {
    let inv = (g[0][0] * g[1][1] - g[0][1] * g[1][0]).sqrt().recip();
    [[-g[0][1] * inv, -g[1][1] * inv], [g[0][0] * inv, g[0][1] * inv]]
}

/// `J = (1/√det g) [[-g12, -g22], [g11, g12]]`: rotation by `π/2` in the
/// coordinate frame, with `J ∂_u = ∂_v` for conformal metrics.
pub fn rotation_matrix(g: &Matrix2<f64>) -> Matrix2<f64> {
    let j = rotation_generic([[g[(0, 0)], g[(0, 1)]], [g[(1, 0)], g[(1, 1)]]]);
    Matrix2::new(j[0][0], j[0][1], j[1][0], j[1][1])
}

/// `∂J` along a direction where the metric moves by `dg`.
fn rotation_derivative(g: &Matrix2<f64>, dg: &Matrix2<f64>) -> Matrix2<f64> {
    let d = |i: usize, j: usize| Dual64::new(g[(i, j)], dg[(i, j)]);
    let j = rotation_generic([[d(0, 0), d(0, 1)], [d(1, 0), d(1, 1)]]);
    Matrix2::new(j[0][0].eps, j[0][1].eps, j[1][0].eps, j[1][1].eps)
}

/// `J` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct JField {
    values: Vec<Matrix2<f64>>,
}

impl JField {
    pub fn values(&self) -> &[Matrix2<f64>] {
        &self.values
    }

    /// Max-norm of `J^2 + I` over all nodes.
    pub fn square_defect(&self) -> f64 {
        self.values
            .iter()
            .map(|j| (j * j + Matrix2::identity()).amax())
            .fold(0.0, f64::max)
    }
}

pub fn rotation_field(data: &FundamentalData) -> Result<JField> {
    if data.signature().n() != 2 {
        return Err(Error::Unsupported("the rotation J is defined for surfaces only".into()));
    }
    Ok(JField { values: data.metric().iter().map(rotation_matrix).collect() })
}

/// `(g, e^{θJ} S, e^{θJ} T, ν)`, requiring `tr S` within the data's default
/// tolerance.
pub fn rotate_data(data: &FundamentalData, theta: RotationAngle) -> Result<FundamentalData> {
    rotate_data_with_tolerance(data, theta, data.default_tolerance())
}

pub fn rotate_data_with_tolerance(data: &FundamentalData, theta: RotationAngle, trace_tol: f64) -> Result<FundamentalData> {
    let j = rotation_field(data)?;
    let grid = data.grid();
    for node in grid.nodes() {
        let tr = data.shape()[grid.index(node)].trace();
        if !(tr.abs() <= trace_tol) {
            return Err(Error::Hypothesis(format!(
                "shape operator is not trace-free at node {node}: |tr S| = {:.3e} > {trace_tol:.1e}",
                tr.abs()
            )));
        }
    }
    let s = theta.0.sin();
    let rot: Vec<Matrix2<f64>> = j.values.iter().map(|j| theta.exp(j)).collect();
    let shape = data.shape().iter().zip(&rot).map(|(m, r)| r * m).collect();
    let tangent = data.tangent().iter().zip(&rot).map(|(t, r)| r * t).collect();
    let jet = data.jet().map(|jets| {
        jets.iter()
            .enumerate()
            .map(|(k, jt)| {
                let g = data.metric()[k];
                let (sk, tk) = (data.shape()[k], data.tangent()[k]);
                let mut out = *jt;
                for dir in 0..2 {
                    let dj = rotation_derivative(&g, &jt.metric_gradient[dir]) * s;
                    out.shape_gradient[dir] = rot[k] * jt.shape_gradient[dir] + dj * sk;
                    out.tangent_gradient[dir] = rot[k] * jt.tangent_gradient[dir] + dj * tk;
                }
                out
            })
            .collect::<Vec<FieldJet>>()
    });
    Ok(data.replace_fields(shape, tangent, data.nu().to_vec(), jet))
}

/// Base frame of `x_θ`: the adapted frame of `x` with its tangent columns
/// turned by `-θ`, so that its last row carries `e^{θJ} T`.
pub fn associate_base_frame(adapted: &FrameMatrix, theta: RotationAngle) -> FrameMatrix {
    let (c, s) = (theta.0.cos(), theta.0.sin());
    let mut d = DMatrix::identity(4, 4);
    d[(1, 1)] = c;
    d[(1, 2)] = s;
    d[(2, 1)] = -s;
    d[(2, 2)] = c;
    FrameMatrix::from_raw(adapted.matrix() * d)
}

/// `x_θ` sampled on `grid`, with `x_θ(base) = x(base)` and the same tangent
/// plane there.
pub fn associate_immersion(
    chart: &dyn Chart,
    theta: RotationAngle,
    base: Node,
    grid: &ParameterGrid,
) -> Result<ReconstructedChart> {
    grid.check_node(base)?;
    let data = fundamental_from_chart(chart, grid)?;
    let rotated = rotate_data(&data, theta)?;
    let a0 = associate_base_frame(&chart_base_frame(chart, grid, base)?, theta);
    let (u, v) = grid.coords(base);
    let t0 = chart.eval(u, v)?[3];
    reconstruct_from_data(&rotated, base, Some(a0), t0)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use proptest::prelude::*;

    use super::*;
    use crate::catalog::{fundamental_closed_form, CatalogSpec, SurfaceKind};
    use crate::fundamental::check_compatibility;

    fn helicoid_data() -> FundamentalData {
        let spec = CatalogSpec::new(SurfaceKind::S2Helicoid, 1.0);
        fundamental_closed_form(&spec, &ParameterGrid::centered(0.3, 0.05).unwrap()).unwrap()
    }

    #[test]
    fn conformal_metric_gives_quarter_turn() {
        let j = rotation_matrix(&(Matrix2::identity() * 2.5));
        assert!((j - Matrix2::new(0.0, -1.0, 1.0, 0.0)).amax() < 1e-15);
    }

    #[test]
    fn j_is_an_isometric_complex_structure() {
        let g = Matrix2::new(2.0, 0.3, 0.3, 0.7);
        let j = rotation_matrix(&g);
        assert!((j * j + Matrix2::identity()).amax() < 1e-12);
        assert!((j.transpose() * g * j - g).amax() < 1e-12);
        // (X, JX) is a positive orthonormal pair for unit X
        let x = nalgebra::Vector2::new(1.0 / g[(0, 0)].sqrt(), 0.0);
        let m = Matrix2::from_columns(&[x, j * x]);
        assert!((m.determinant() * g.determinant().sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_preserves_norm_of_tangent() {
        let data = helicoid_data();
        let jf = rotation_field(&data).unwrap();
        assert!(jf.square_defect() < 1e-12);
        for (k, j) in jf.values().iter().enumerate() {
            let (g, t) = (data.metric()[k], data.tangent()[k]);
            let jt = j * t;
            assert!(((jt.transpose() * g * jt)[0] - (t.transpose() * g * t)[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_angle_is_identity_and_pi_flips_s_and_t() {
        let data = helicoid_data();
        let same = rotate_data(&data, RotationAngle(0.0)).unwrap();
        assert_eq!(same.shape(), data.shape());
        assert_eq!(same.tangent(), data.tangent());
        let opp = rotate_data(&data, RotationAngle(PI)).unwrap();
        for k in 0..data.metric().len() {
            assert!((opp.shape()[k] + data.shape()[k]).amax() < 1e-12);
            assert!((opp.tangent()[k] + data.tangent()[k]).amax() < 1e-12);
            assert_eq!(opp.nu()[k], data.nu()[k]);
        }
    }

    #[test]
    fn unduloid_rotates_into_helicoid() {
        let grid = ParameterGrid::centered(0.3, 0.05).unwrap();
        let und = CatalogSpec::new(SurfaceKind::S2Unduloid, 2f64.sqrt());
        let hel = CatalogSpec::new(SurfaceKind::S2Helicoid, 1.0);
        let a = rotate_data(&fundamental_closed_form(&und, &grid).unwrap(), RotationAngle(FRAC_PI_2)).unwrap();
        let b = fundamental_closed_form(&hel, &grid).unwrap();
        for k in 0..grid.len() {
            assert!((a.shape()[k] - b.shape()[k]).amax() < 1e-8);
            assert!((a.tangent()[k] - b.tangent()[k]).amax() < 1e-8);
        }
    }

    #[test]
    fn rotated_data_stays_compatible() {
        let data = helicoid_data();
        for theta in [PI / 6.0, FRAC_PI_2, 2.0] {
            let rotated = rotate_data(&data, RotationAngle(theta)).unwrap();
            let report = check_compatibility(&rotated, 1e-8);
            assert!(report.pass, "theta {theta}\n{report}");
        }
    }

    #[test]
    fn non_minimal_data_is_rejected() {
        let data = helicoid_data().map_fields(|_, s| s + Matrix2::identity() * 0.1, |_, t| *t, |_, x| x);
        assert!(matches!(rotate_data(&data, RotationAngle(1.0)), Err(Error::Hypothesis(_))));
    }

    proptest! {
        #[test]
        fn rotations_form_a_group(a in -7.0f64..7.0, b in -7.0f64..7.0) {
            let data = helicoid_data();
            let twice = rotate_data(&rotate_data(&data, RotationAngle(a)).unwrap(), RotationAngle(b)).unwrap();
            let once = rotate_data(&data, RotationAngle(a + b)).unwrap();
            for k in 0..data.metric().len() {
                prop_assert!((twice.shape()[k] - once.shape()[k]).amax() < 1e-12);
                prop_assert!((twice.tangent()[k] - once.tangent()[k]).amax() < 1e-12);
                let (s, r) = (data.shape()[k], once.shape()[k]);
                prop_assert!((s.determinant() - r.determinant()).abs() < 1e-12);
                prop_assert!(r.trace().abs() < 1e-12);
            }
            let (jt, jo) = (twice.jet().unwrap(), once.jet().unwrap());
            for k in 0..jt.len() {
                for d in 0..2 {
                    prop_assert!((jt[k].shape_gradient[d] - jo[k].shape_gradient[d]).amax() < 1e-10);
                    prop_assert!((jt[k].tangent_gradient[d] - jo[k].tangent_gradient[d]).amax() < 1e-10);
                }
            }
        }
    }
}
