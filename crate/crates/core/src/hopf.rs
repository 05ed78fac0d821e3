//! Height function, its harmonic conjugate and the Hopf differentials of a
//! conformal minimal surface, with the transformation laws along the
//! associate family.

use nalgebra::Vector4;
use num_complex::Complex64;

use crate::associate::{associate_immersion, rotation_matrix, RotationAngle};
use crate::chart::{chart_jet, Chart, ChartJet};
use crate::error::{Error, Result};
use crate::fundamental::FundamentalData;
use crate::grid::{diff1, Node, ParameterGrid};

/// `-(a - i b)^2`, the `dz^2` coefficient of `Qφ` from `(∂_u h, ∂_v h)`.
pub fn qphi_from_gradient(h_u: f64, h_v: f64) -> Complex64 {
    let w = Complex64::new(h_u, -h_v);
    -(w * w)
}

/// Complex `dz^2` coefficients on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexScalarField {
    grid: ParameterGrid,
    values: Vec<Complex64>,
}

impl ComplexScalarField {
    pub fn new(grid: ParameterGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Structural(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Numerical(format!("non-finite value at node {}", grid.node(k))));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, node: Node) -> Complex64 {
        self.values[self.grid.index(node)]
    }

    /// Max over nodes of `|self - other|`.
    pub fn max_distance(&self, other: &ComplexScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max over nodes of `|self - z|`.
    pub fn max_distance_to(&self, z: Complex64) -> f64 {
        self.values.iter().map(|a| (a - z).norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, z: Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|a| a * z).collect() }
    }

    /// Max over interior nodes of `|∂_z̄ f| = |f_u + i f_v| / 2` by central
    /// differences.
    pub fn holomorphy_residual(&self) -> f64 {
        let g = &self.grid;
        g.interior_nodes()
            .map(|n| {
                let du = diff1(|i| self.values[g.index(Node::new(i, n.j))], n.i, g.nu, g.hu());
                let dv = diff1(|j| self.values[g.index(Node::new(n.i, j))], n.j, g.nv, g.hv());
                ((du + Complex64::i() * dv) * 0.5).norm()
            })
            .fold(0.0, f64::max)
    }
}

fn jets(chart: &dyn Chart, grid: &ParameterGrid) -> Result<Vec<ChartJet>> {
    grid.nodes()
        .map(|n| {
            let (u, v) = grid.coords(n);
            chart_jet(chart, u, v, grid.hu(), grid.hv())
        })
        .collect()
}

/// Trapezoidal integral of a closed 1-form `(a_u, a_v)` given at the nodes,
/// along the base row and then along each column.
fn integrate_form(grid: &ParameterGrid, base: Node, form: &[(f64, f64)]) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    let step = |out: &mut Vec<f64>, from: Node, to: Node| {
        let (a, b) = (form[grid.index(from)], form[grid.index(to)]);
        let inc = if from.j == to.j {
            0.5 * (grid.u(to.i) - grid.u(from.i)) * (a.0 + b.0)
        } else {
            0.5 * (grid.v(to.j) - grid.v(from.j)) * (a.1 + b.1)
        };
        out[grid.index(to)] = out[grid.index(from)] + inc;
    };
    for i in (0..base.i).rev() {
        step(&mut out, Node::new(i + 1, base.j), Node::new(i, base.j));
    }
    for i in base.i + 1..grid.nu {
        step(&mut out, Node::new(i - 1, base.j), Node::new(i, base.j));
    }
    for i in 0..grid.nu {
        for j in (0..base.j).rev() {
            step(&mut out, Node::new(i, j + 1), Node::new(i, j));
        }
        for j in base.j + 1..grid.nv {
            step(&mut out, Node::new(i, j - 1), Node::new(i, j));
        }
    }
    out
}

/// Height `h` and harmonic conjugate `h*` (zero at the base node).
#[derive(Debug, Clone, PartialEq)]
pub struct HeightPair {
    grid: ParameterGrid,
    base: Node,
    h: Vec<f64>,
    h_star: Vec<f64>,
    gradient: Vec<(f64, f64)>,
    /// Max `|Δh|` over interior nodes.
    pub harmonicity: f64,
}

impl HeightPair {
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn h_star(&self) -> &[f64] {
        &self.h_star
    }

    pub fn base(&self) -> Node {
        self.base
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    /// `(∂_u h, ∂_v h)` at every node.
    pub fn gradient(&self) -> &[(f64, f64)] {
        &self.gradient
    }

    /// Max over interior nodes of the discrete Cauchy–Riemann residuals
    /// `|∂_u h* + ∂_v h|` and `|∂_v h* - ∂_u h|`.
    pub fn cauchy_riemann_residual(&self) -> f64 {
        let g = &self.grid;
        g.interior_nodes()
            .map(|n| {
                let hs_u = diff1(|i| self.h_star[g.index(Node::new(i, n.j))], n.i, g.nu, g.hu());
                let hs_v = diff1(|j| self.h_star[g.index(Node::new(n.i, j))], n.j, g.nv, g.hv());
                let (h_u, h_v) = self.gradient[g.index(n)];
                (hs_u + h_v).abs().max((hs_v - h_u).abs())
            })
            .fold(0.0, f64::max)
    }

    /// `-(d(h + i h*))^2` with the differential of `h + i h*` taken along `u`
    /// by central differences.
    pub fn conjugate_route(&self) -> Result<ComplexScalarField> {
        let g = &self.grid;
        let values = g
            .nodes()
            .map(|n| {
                let f = |i: usize| {
                    let k = g.index(Node::new(i, n.j));
                    Complex64::new(self.h[k], self.h_star[k])
                };
                let d = diff1(f, n.i, g.nu, g.hu());
                -(d * d)
            })
            .collect();
        ComplexScalarField::new(*g, values)
    }
}

fn harmonicity_gate(chart: &dyn Chart, grid: &ParameterGrid) -> f64 {
    let (u, v) = grid.coords(grid.center());
    if chart.analytic_jet(u, v).is_some() {
        1e-8
    } else {
        10.0 * grid.h().powi(2)
    }
}

/// `h` from the last chart coordinate, `h*` by trapezoidal integration of
/// `(-h_v, h_u)` from `base`.
pub fn height_pair(chart: &dyn Chart, grid: &ParameterGrid, base: Node) -> Result<HeightPair> {
    grid.check_node(base)?;
    let js = jets(chart, grid)?;
    let h: Vec<f64> = js.iter().map(|j| j.point[3]).collect();
    let gradient: Vec<(f64, f64)> = js.iter().map(|j| (j.du[3], j.dv[3])).collect();
    let mut harmonicity: f64 = 0.0;
    let mut worst = base;
    for n in grid.interior_nodes() {
        let j = &js[grid.index(n)];
        let lap = (j.duu[3] + j.dvv[3]).abs();
        if lap > harmonicity || lap.is_nan() {
            harmonicity = lap;
            worst = n;
        }
    }
    let gate = harmonicity_gate(chart, grid);
    if !(harmonicity <= gate) {
        return Err(Error::Hypothesis(format!(
            "height is not harmonic: |Δh| = {harmonicity:.3e} at node {worst} (gate {gate:.1e})"
        )));
    }
    let form: Vec<(f64, f64)> = gradient.iter().map(|&(a, b)| (-b, a)).collect();
    let h_star = integrate_form(grid, base, &form);
    Ok(HeightPair { grid: *grid, base, h, h_star, gradient, harmonicity })
}

/// `Qφ` from the height, with the disagreement against the horizontal route
/// `‖φ_u‖² - ‖φ_v‖² - 2i⟨φ_u, φ_v⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfDifferential {
    pub field: ComplexScalarField,
    pub cross_route: f64,
}

fn horizontal_dot(kappa: f64, a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    kappa * a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn hopf_differential(chart: &dyn Chart, grid: &ParameterGrid) -> Result<HopfDifferential> {
    let kappa = chart.signature().kappa_f64();
    let js = jets(chart, grid)?;
    let mut cross: f64 = 0.0;
    let mut worst = grid.center();
    let mut values = Vec::with_capacity(grid.len());
    for (k, j) in js.iter().enumerate() {
        let q = qphi_from_gradient(j.du[3], j.dv[3]);
        let horizontal = Complex64::new(
            horizontal_dot(kappa, &j.du, &j.du) - horizontal_dot(kappa, &j.dv, &j.dv),
            -2.0 * horizontal_dot(kappa, &j.du, &j.dv),
        );
        let d = (q - horizontal).norm();
        if d > cross || d.is_nan() {
            cross = d;
            worst = grid.node(k);
        }
        values.push(q);
    }
    let gate = 10.0 * grid.h().powi(2);
    if !(cross <= gate) {
        return Err(Error::Consistency(format!(
            "height and horizontal routes to the Hopf differential differ by {cross:.3e} at node {worst} (gate {gate:.1e})"
        )));
    }
    Ok(HopfDifferential { field: ComplexScalarField::new(*grid, values)?, cross_route: cross })
}

/// Abresch–Rosenberg differential `Q(∂_u, ∂_u)` from the data of a minimal
/// surface.
pub fn abresch_rosenberg(data: &FundamentalData) -> Result<ComplexScalarField> {
    let kappa = data.signature().kappa_f64();
    let values = (0..data.grid().len())
        .map(|k| {
            let (g, t) = (data.metric()[k], data.tangent()[k]);
            let gt = g * t;
            let j = rotation_matrix(&g);
            // ⟨T, ∂_u⟩ and ⟨T, J ∂_u⟩
            let a = gt[0];
            let b = gt.dot(&j.column(0));
            Complex64::new(-0.5 * kappa * (a * a - b * b), kappa * a * b)
        })
        .collect();
    ComplexScalarField::new(*data.grid(), values)
}

/// Deviations of `x_θ` from the height and Hopf rotation laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationLawReport {
    pub theta: f64,
    /// Max `|h_θ - (cos θ h + sin θ h*)|`, both sides shifted to vanish at the base.
    pub height_law: f64,
    /// Max `|Qφ_θ - e^{-2iθ} Qφ|`.
    pub hopf_law: f64,
    /// Max `||Qφ_θ| - |Qφ||`.
    pub modulus: f64,
}

impl RotationLawReport {
    pub fn max_deviation(&self) -> f64 {
        self.height_law.max(self.hopf_law).max(self.modulus)
    }
}

pub fn rotation_law_check(
    chart: &dyn Chart,
    theta: RotationAngle,
    grid: &ParameterGrid,
    base: Node,
) -> Result<RotationLawReport> {
    let pair = height_pair(chart, grid, base)?;
    let qphi = hopf_differential(chart, grid)?.field;
    let rotated = associate_immersion(chart, theta, base, grid)?;
    let h_theta: Vec<f64> = rotated.points().iter().map(|p| p.height()).collect();
    let (c, s) = (theta.0.cos(), theta.0.sin());
    let kb = grid.index(base);
    let mut height_law: f64 = 0.0;
    for k in 0..grid.len() {
        let lhs = h_theta[k] - h_theta[kb];
        let rhs = c * (pair.h[k] - pair.h[kb]) + s * (pair.h_star[k] - pair.h_star[kb]);
        height_law = height_law.max((lhs - rhs).abs());
    }
    let q_theta = grid
        .nodes()
        .map(|n| {
            let h_u = diff1(|i| h_theta[grid.index(Node::new(i, n.j))], n.i, grid.nu, grid.hu());
            let h_v = diff1(|j| h_theta[grid.index(Node::new(n.i, j))], n.j, grid.nv, grid.hv());
            qphi_from_gradient(h_u, h_v)
        })
        .collect();
    let q_theta = ComplexScalarField::new(*grid, q_theta)?;
    let expected = qphi.scaled(Complex64::from_polar(1.0, -2.0 * theta.0));
    let modulus = q_theta
        .values()
        .iter()
        .zip(qphi.values())
        .map(|(a, b)| (a.norm() - b.norm()).abs())
        .fold(0.0, f64::max);
    Ok(RotationLawReport { theta: theta.0, height_law, hopf_law: q_theta.max_distance(&expected), modulus })
}
