//! Connection form, frame transport and reconstruction of the immersion.
//!
//! The frame `A` has columns `(N̄, e1, e2, N)` and satisfies `dA = A Ω`,
//! where `Ω` is assembled from the fundamental data. Transport runs along
//! the lattice: first along the base row in `u`, then along every column in
//! `v`.

use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4, Vector2, Vector3, Vector4};
use num_dual::Dual64;

use crate::ambient::{
    g_gram_schmidt, project_to_model, reorthonormalize, AmbientVector, FrameMatrix, Signature, SoMatrix,
};
use crate::chart::{adapted_frame, chart_jet, check_model, Chart};
use crate::dual::{c, Scalar};
use crate::error::{Error, Result};
use crate::fundamental::{fundamental_from_chart, node_jet, FieldJet, FundamentalData, NodeJet};
use crate::grid::{Node, ParameterGrid};

/// Tolerance on the last-row condition of the base frame.
pub const BASE_ROW_TOL: f64 = 1e-8;
/// Largest model-projection displacement accepted during reconstruction.
pub const PROJECTION_LIMIT: f64 = 1e-4;

type Mat4<D> = [[D; 4]; 4];

/// `(Ω(∂_u), Ω(∂_v))` and the orthonormal coframe `C[i][k] = ω^i(∂_k)` at one
/// node, generic over the scalar so that dual numbers give exact derivatives.
#[allow(clippy::type_complexity)]
fn omega_generic<D: Scalar>(
    kappa: f64,
    g: [[D; 2]; 2],
    dg: [[[D; 2]; 2]; 2],
    s: [[D; 2]; 2],
    t: [D; 2],
    nu: D,
) -> ([Mat4<D>; 2], [[D; 2]; 2]) {
    let (e, f, gg) = (g[0][0], g[0][1], g[1][1]);
    let (e_u, e_v) = (dg[0][0][0], dg[1][0][0]);
    let (f_u, g_u) = (dg[0][0][1], dg[0][1][1]);
    let sq_e = e.sqrt();
    let w = (e * gg - f * f).sqrt();
    let w_u = (e_u * gg + e * g_u - f * f_u * 2.0) / (w * 2.0);
    let e32 = e * sq_e * 2.0;
    let c1 = f_u / sq_e - f * e_u / e32 - e_v / (sq_e * 2.0);
    let c2 = w_u / sq_e - w * e_u / e32;
    // ω^1_2 = a du + b dv from the first structure equation
    let a = -c1 * sq_e / w;
    let b = (a * f / sq_e - c2) / sq_e;
    let cof = [[sq_e, f / sq_e], [c(0.0), w / sq_e]];
    let t_on = [cof[0][0] * t[0] + cof[0][1] * t[1], cof[1][0] * t[0] + cof[1][1] * t[1]];
    let eta = [g[0][0] * t[0] + g[0][1] * t[1], g[1][0] * t[0] + g[1][1] * t[1]];
    let w12 = [a, b];
    let mut out = [[[c::<D>(0.0); 4]; 4]; 2];
    for (k, h) in out.iter_mut().enumerate() {
        h[1][2] = w12[k];
        h[2][1] = -w12[k];
        for j in 1..3 {
            h[0][j] = (t_on[j - 1] * eta[k] - cof[j - 1][k]) * kappa;
            h[j][0] = -h[0][j] * kappa;
            h[3][j] = cof[j - 1][0] * s[0][k] + cof[j - 1][1] * s[1][k];
            h[j][3] = -h[3][j];
        }
        h[0][3] = nu * eta[k] * kappa;
        h[3][0] = -h[0][3] * kappa;
    }
    (out, cof)
}

fn m2<D: Scalar>(m: &Matrix2<f64>) -> [[D; 2]; 2] {
    [[D::from(m[(0, 0)]), D::from(m[(0, 1)])], [D::from(m[(1, 0)]), D::from(m[(1, 1)])]]
}

fn to_dmatrix(h: &Mat4<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| h[i][j])
}

fn jet_omega(kappa: f64, jet: &NodeJet) -> ([Mat4<f64>; 2], [[f64; 2]; 2]) {
    let dg = [m2::<f64>(&jet.dg[0]), m2::<f64>(&jet.dg[1])];
    omega_generic(kappa, m2(&jet.g), dg, m2(&jet.s), [jet.t[0], jet.t[1]], jet.nu)
}

/// Exact `∂_dir Ω(∂_u)` and `∂_dir Ω(∂_v)` from a node jet, by one dual pass.
fn jet_omega_derivative(kappa: f64, jet: &NodeJet, dir: usize) -> [DMatrix<f64>; 2] {
    let dual2 = |m: &Matrix2<f64>, d: &Matrix2<f64>| -> [[Dual64; 2]; 2] {
        let mut out = [[Dual64::from(0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = Dual64::new(m[(i, j)], d[(i, j)]);
            }
        }
        out
    };
    let g = dual2(&jet.g, &jet.dg[dir]);
    // ∂_dir ∂_m g is the Hessian entry (uu, uv, vv) indexed by dir + m
    let dg = [dual2(&jet.dg[0], &jet.ddg[dir]), dual2(&jet.dg[1], &jet.ddg[dir + 1])];
    let s = dual2(&jet.s, &jet.ds[dir]);
    let t = [Dual64::new(jet.t[0], jet.dt[dir][0]), Dual64::new(jet.t[1], jet.dt[dir][1])];
    let nu = Dual64::new(jet.nu, jet.dnu[dir]);
    let (om, _) = omega_generic(kappa, g, dg, s, t, nu);
    [
        DMatrix::from_fn(4, 4, |i, j| om[0][i][j].eps),
        DMatrix::from_fn(4, 4, |i, j| om[1][i][j].eps),
    ]
}

/// `Ω(∂_u)`, `Ω(∂_v)` at every node, with the orthonormal coframe.
#[derive(Debug, Clone)]
pub struct ConnectionField {
    sig: Signature,
    grid: ParameterGrid,
    omega_u: Vec<SoMatrix>,
    omega_v: Vec<SoMatrix>,
    coframe: Vec<Matrix2<f64>>,
    /// `(∂_u Ω(∂_v), ∂_v Ω(∂_u))` from node jets; `None` when `Ω` itself is
    /// differenced. Either way no field is differenced twice.
    curl_terms: Option<Vec<[DMatrix<f64>; 2]>>,
    analytic: bool,
}

impl ConnectionField {
    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn omega_u(&self) -> &[SoMatrix] {
        &self.omega_u
    }

    pub fn omega_v(&self) -> &[SoMatrix] {
        &self.omega_v
    }

    /// `C[(i, k)] = ω^i(∂_k)`.
    pub fn coframe(&self) -> &[Matrix2<f64>] {
        &self.coframe
    }

    /// Whether the curl terms are exact rather than finite-difference estimates.
    pub fn is_analytic(&self) -> bool {
        self.analytic
    }

    fn omega(&self, dir: usize, node: Node) -> &DMatrix<f64> {
        let k = self.grid.index(node);
        if dir == 0 {
            self.omega_u[k].matrix()
        } else {
            self.omega_v[k].matrix()
        }
    }

    /// Copy with the `ω^3_j` / `ω^j_3` block (the shape operator) zeroed.
    pub fn zero_shape_block(&self) -> Self {
        let zero = |m: &DMatrix<f64>| {
            let mut m = m.clone();
            for j in 1..3 {
                m[(3, j)] = 0.0;
                m[(j, 3)] = 0.0;
            }
            m
        };
        Self {
            sig: self.sig,
            grid: self.grid,
            omega_u: self.omega_u.iter().map(|h| SoMatrix::from_raw(zero(h.matrix()))).collect(),
            omega_v: self.omega_v.iter().map(|h| SoMatrix::from_raw(zero(h.matrix()))).collect(),
            coframe: self.coframe.clone(),
            curl_terms: self
                .curl_terms
                .as_ref()
                .map(|v| v.iter().map(|[a, b]| [zero(a), zero(b)]).collect()),
            analytic: self.analytic,
        }
    }

    /// Max over interior nodes of [`flatness_residual`] and where it occurs.
    pub fn max_flatness(&self) -> (f64, Node) {
        let r = flatness_residual(self);
        let mut worst = (0.0, self.grid.center());
        for n in self.grid.interior_nodes() {
            let x = r[self.grid.index(n)];
            if x > worst.0 || x.is_nan() {
                worst = (x, n);
            }
        }
        worst
    }
}

/// Assembles `Ω` at every node.
pub fn connection_from_data(data: &FundamentalData) -> Result<ConnectionField> {
    let sig = data.signature();
    let kappa = sig.kappa_f64();
    let grid = *data.grid();
    let mut omega_u = Vec::with_capacity(grid.len());
    let mut omega_v = Vec::with_capacity(grid.len());
    let mut coframe = Vec::with_capacity(grid.len());
    // An exact metric gradient without the rest of the jet: difference Ω.
    // Otherwise use jets, exact or from single differences of the fields.
    let mut curl = (data.is_analytic() || data.metric_gradient().is_none()).then(|| Vec::with_capacity(grid.len()));
    for node in grid.nodes() {
        let jet = node_jet(data, node);
        if !(jet.g.determinant() > 0.0 && jet.g[(0, 0)] > 0.0) {
            return Err(Error::Domain(format!("metric is not positive definite at node {node}")));
        }
        let (om, cof) = jet_omega(kappa, &jet);
        omega_u.push(SoMatrix::from_raw(to_dmatrix(&om[0])));
        omega_v.push(SoMatrix::from_raw(to_dmatrix(&om[1])));
        coframe.push(Matrix2::new(cof[0][0], cof[0][1], cof[1][0], cof[1][1]));
        if let Some(c) = curl.as_mut() {
            let [_, du_v] = jet_omega_derivative(kappa, &jet, 0);
            let [dv_u, _] = jet_omega_derivative(kappa, &jet, 1);
            c.push([du_v, dv_u]);
        }
    }
    Ok(ConnectionField { sig, grid, omega_u, omega_v, coframe, curl_terms: curl, analytic: data.is_analytic() })
}

/// Max-norm of `∂_u Ω_v - ∂_v Ω_u + Ω_u Ω_v - Ω_v Ω_u` at every node.
pub fn flatness_residual(conn: &ConnectionField) -> Vec<f64> {
    let grid = conn.grid;
    grid.nodes()
        .map(|n| {
            let k = grid.index(n);
            let (ou, ov) = (conn.omega_u[k].matrix(), conn.omega_v[k].matrix());
            let (du_v, dv_u) = match &conn.curl_terms {
                Some(c) => (c[k][0].clone(), c[k][1].clone()),
                None => (diff_omega(&conn.omega_v, &grid, n, 0), diff_omega(&conn.omega_u, &grid, n, 1)),
            };
            (du_v - dv_u + ou * ov - ov * ou).amax()
        })
        .collect()
}

fn diff_omega(values: &[SoMatrix], grid: &ParameterGrid, node: Node, dir: usize) -> DMatrix<f64> {
    let at = |n: Node| Matrix4::from_iterator(values[grid.index(n)].matrix().iter().copied());
    let m = if dir == 0 {
        crate::grid::diff1(|i| at(Node::new(i, node.j)), node.i, grid.nu, grid.hu())
    } else {
        crate::grid::diff1(|j| at(Node::new(node.i, j)), node.j, grid.nv, grid.hv())
    };
    DMatrix::from_column_slice(4, 4, m.as_slice())
}

/// Cubic interpolation at the midpoint between samples `lo` and `lo + 1` of
/// a line of `len` samples.
fn midpoint(f: impl Fn(usize) -> DMatrix<f64>, lo: usize, len: usize) -> DMatrix<f64> {
    if len == 3 {
        // quadratic through all three samples
        let (x0, x1, x2) = (f(0), f(1), f(2));
        return if lo == 0 {
            (x0 * 3.0 + x1 * 6.0 - x2) / 8.0
        } else {
            (x2 * 3.0 + x1 * 6.0 - x0) / 8.0
        };
    }
    if lo == 0 {
        (f(0) * 5.0 + f(1) * 15.0 - f(2) * 5.0 + f(3)) / 16.0
    } else if lo + 2 >= len {
        (f(lo + 1) * 5.0 + f(lo) * 15.0 - f(lo - 1) * 5.0 + f(lo - 2)) / 16.0
    } else {
        ((f(lo) + f(lo + 1)) * 9.0 - f(lo - 1) - f(lo + 2)) / 16.0
    }
}

fn rk4_step(a: &DMatrix<f64>, m0: &DMatrix<f64>, mm: &DMatrix<f64>, m1: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let k1 = a * m0;
    let k2 = (a + &k1 * (0.5 * h)) * mm;
    let k3 = (a + &k2 * (0.5 * h)) * mm;
    let k4 = (a + &k3 * h) * m1;
    a + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// One lattice edge from `from` to the adjacent node `to`.
fn transport_edge(conn: &ConnectionField, a: &FrameMatrix, from: Node, to: Node) -> Result<FrameMatrix> {
    let grid = &conn.grid;
    let (dir, h, lo, len) = if from.j == to.j && from.i.abs_diff(to.i) == 1 {
        let h = if to.i > from.i { grid.hu() } else { -grid.hu() };
        (0, h, from.i.min(to.i), grid.nu)
    } else if from.i == to.i && from.j.abs_diff(to.j) == 1 {
        let h = if to.j > from.j { grid.hv() } else { -grid.hv() };
        (1, h, from.j.min(to.j), grid.nv)
    } else {
        return Err(Error::Structural(format!("nodes {from} and {to} are not adjacent")));
    };
    let on_line = |k: usize| {
        let n = if dir == 0 { Node::new(k, from.j) } else { Node::new(from.i, k) };
        conn.omega(dir, n).clone()
    };
    let mm = midpoint(on_line, lo, len);
    let next = rk4_step(a.matrix(), conn.omega(dir, from), &mm, conn.omega(dir, to), h);
    reorthonormalize(&FrameMatrix::from_raw(next), &conn.sig)
}

/// Transports `start` along a path of adjacent nodes; returns the frame at
/// every node of the path (the first entry is `start`).
pub fn transport_path(conn: &ConnectionField, start: &FrameMatrix, path: &[Node]) -> Result<Vec<FrameMatrix>> {
    let mut out = Vec::with_capacity(path.len());
    let Some(first) = path.first() else {
        return Ok(out);
    };
    conn.grid.check_node(*first)?;
    out.push(start.clone());
    for w in path.windows(2) {
        conn.grid.check_node(w[1])?;
        let next = transport_edge(conn, out.last().expect("nonempty"), w[0], w[1])?;
        out.push(next);
    }
    Ok(out)
}

/// Straight lattice path between two nodes on a common row or column.
fn straight(from: Node, to: Node) -> Vec<Node> {
    if from.j == to.j {
        if to.i >= from.i {
            (from.i..=to.i).map(|i| Node::new(i, from.j)).collect()
        } else {
            (to.i..=from.i).rev().map(|i| Node::new(i, from.j)).collect()
        }
    } else if to.j >= from.j {
        (from.j..=to.j).map(|j| Node::new(from.i, j)).collect()
    } else {
        (to.j..=from.j).rev().map(|j| Node::new(from.i, j)).collect()
    }
}

/// Closed path around the rectangle with opposite corners `a` and `b`:
/// along `u` first, then `v`, then back.
pub fn rectangle_loop(a: Node, b: Node) -> Vec<Node> {
    let c1 = Node::new(b.i, a.j);
    let c2 = Node::new(a.i, b.j);
    let mut path = straight(a, c1);
    path.extend(straight(c1, b).into_iter().skip(1));
    path.extend(straight(b, c2).into_iter().skip(1));
    path.extend(straight(c2, a).into_iter().skip(1));
    path
}

/// Loop holonomy `‖A_loop - I‖_max` around the rectangle `[a, b]`, starting
/// from the identity frame.
pub fn rectangle_holonomy(conn: &ConnectionField, a: Node, b: Node) -> Result<f64> {
    let id = FrameMatrix::identity(&conn.sig);
    let frames = transport_path(conn, &id, &rectangle_loop(a, b))?;
    let last = frames.last().expect("loop is nonempty");
    Ok((last.matrix() - id.matrix()).amax())
}

/// Disagreement between transporting from `a` to `b` along `u` then `v`
/// and along `v` then `u`.
pub fn two_path_disagreement(conn: &ConnectionField, a: Node, b: Node) -> Result<f64> {
    let id = FrameMatrix::identity(&conn.sig);
    let c1 = Node::new(b.i, a.j);
    let c2 = Node::new(a.i, b.j);
    let mut p1 = straight(a, c1);
    p1.extend(straight(c1, b).into_iter().skip(1));
    let mut p2 = straight(a, c2);
    p2.extend(straight(c2, b).into_iter().skip(1));
    let f1 = transport_path(conn, &id, &p1)?;
    let f2 = transport_path(conn, &id, &p2)?;
    Ok((f1.last().expect("nonempty").matrix() - f2.last().expect("nonempty").matrix()).amax())
}

/// Transported frames on the whole grid.
#[derive(Debug, Clone)]
pub struct FrameField {
    sig: Signature,
    grid: ParameterGrid,
    frames: Vec<FrameMatrix>,
    base: Node,
    base_frame: FrameMatrix,
    row_drift: f64,
}

impl FrameField {
    pub fn frames(&self) -> &[FrameMatrix] {
        &self.frames
    }

    pub fn frame(&self, node: Node) -> &FrameMatrix {
        &self.frames[self.grid.index(node)]
    }

    pub fn base(&self) -> Node {
        self.base
    }

    pub fn base_frame(&self) -> &FrameMatrix {
        &self.base_frame
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// Max deviation of the last frame row from `(0, T^1, T^2, ν)`.
    pub fn row_drift(&self) -> f64 {
        self.row_drift
    }

    pub fn max_group_defect(&self) -> f64 {
        self.frames.iter().map(|a| a.group_defect(&self.sig)).fold(0.0, f64::max)
    }
}

/// `(0, T^1, T^2, ν)` in the orthonormal frame at a node.
pub fn expected_last_row(conn: &ConnectionField, data: &FundamentalData, node: Node) -> Vector4<f64> {
    let k = data.index(node);
    let t = conn.coframe[k] * data.tangent()[k];
    Vector4::new(0.0, t[0], t[1], data.nu()[k])
}

fn last_row(a: &FrameMatrix) -> Vector4<f64> {
    let r = a.last_row();
    Vector4::new(r[0], r[1], r[2], r[3])
}

/// Integrates `dA = A Ω` over the grid from `a0` at `base`, refusing to run
/// when the flatness residual exceeds `10 h^2`.
pub fn integrate_frame(
    conn: &ConnectionField,
    data: &FundamentalData,
    base: Node,
    a0: &FrameMatrix,
) -> Result<FrameField> {
    integrate_frame_with_gate(conn, data, base, a0, 10.0 * conn.grid.h().powi(2))
}

pub fn integrate_frame_with_gate(
    conn: &ConnectionField,
    data: &FundamentalData,
    base: Node,
    a0: &FrameMatrix,
    gate: f64,
) -> Result<FrameField> {
    let grid = conn.grid;
    grid.check_node(base)?;
    if data.grid() != &grid {
        return Err(Error::Structural("connection and data live on different grids".into()));
    }
    let sig = conn.sig;
    let defect = a0.group_defect(&sig);
    if !(defect <= 1e-8) || (sig.kappa() < 0 && a0.matrix()[(0, 0)] <= 0.0) {
        return Err(Error::Precondition(format!("base frame is not in SO+(E^4) (defect {defect:.3e})")));
    }
    let row_err = (last_row(a0) - expected_last_row(conn, data, base)).amax();
    if !(row_err <= BASE_ROW_TOL) {
        return Err(Error::Precondition(format!(
            "base frame last row differs from (0, T, nu) at node {base} by {row_err:.3e}"
        )));
    }
    let (flat, worst) = conn.max_flatness();
    if !(flat <= gate) {
        return Err(Error::Integrability { node: worst, residual: flat, gate });
    }

    let mut frames: Vec<Option<FrameMatrix>> = vec![None; grid.len()];
    frames[grid.index(base)] = Some(a0.clone());
    let row_ends = [Node::new(0, base.j), Node::new(grid.nu - 1, base.j)];
    for end in row_ends {
        let path = straight(base, end);
        for (n, a) in path.iter().zip(transport_path(conn, a0, &path)?) {
            frames[grid.index(*n)] = Some(a);
        }
    }
    for i in 0..grid.nu {
        let start = Node::new(i, base.j);
        let a = frames[grid.index(start)].clone().expect("row filled");
        for end in [Node::new(i, 0), Node::new(i, grid.nv - 1)] {
            let path = straight(start, end);
            for (n, f) in path.iter().zip(transport_path(conn, &a, &path)?) {
                frames[grid.index(*n)] = Some(f);
            }
        }
    }
    let frames: Vec<FrameMatrix> = frames.into_iter().map(|f| f.expect("all nodes reached")).collect();
    let row_drift = grid
        .nodes()
        .map(|n| (last_row(&frames[grid.index(n)]) - expected_last_row(conn, data, n)).amax())
        .fold(0.0, f64::max);
    Ok(FrameField { sig, grid, frames, base, base_frame: a0.clone(), row_drift })
}

/// Sampled immersion produced by the frame pipeline.
#[derive(Debug, Clone)]
pub struct ReconstructedChart {
    sig: Signature,
    grid: ParameterGrid,
    points: Vec<AmbientVector>,
    frames: Vec<FrameMatrix>,
    base: Node,
    t0: f64,
    projection_displacement: f64,
}

impl ReconstructedChart {
    pub fn points(&self) -> &[AmbientVector] {
        &self.points
    }

    pub fn point(&self, node: Node) -> &AmbientVector {
        &self.points[self.grid.index(node)]
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn base(&self) -> Node {
        self.base
    }

    /// Largest distance moved by the final projection onto the model.
    pub fn projection_displacement(&self) -> f64 {
        self.projection_displacement
    }

    pub fn frames(&self) -> &[FrameMatrix] {
        &self.frames
    }
}

/// Positions from the first frame column and the height from the trapezoidal
/// integral of `η` along the transport paths.
pub fn reconstruct_immersion(frames: &FrameField, data: &FundamentalData, t0: f64) -> Result<ReconstructedChart> {
    let grid = frames.grid;
    let sig = frames.sig;
    if data.grid() != &grid {
        return Err(Error::Structural("frames and data live on different grids".into()));
    }
    let base = frames.base;
    let mut height = vec![f64::NAN; grid.len()];
    height[grid.index(base)] = t0;
    let eta = |n: Node| data.eta(n);
    let walk = |path: &[Node], height: &mut Vec<f64>| {
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (dir, h) = if a.j == b.j {
                (0, grid.u(b.i) - grid.u(a.i))
            } else {
                (1, grid.v(b.j) - grid.v(a.j))
            };
            height[grid.index(b)] = height[grid.index(a)] + 0.5 * h * (eta(a)[dir] + eta(b)[dir]);
        }
    };
    for end in [Node::new(0, base.j), Node::new(grid.nu - 1, base.j)] {
        walk(&straight(base, end), &mut height);
    }
    for i in 0..grid.nu {
        let start = Node::new(i, base.j);
        for end in [Node::new(i, 0), Node::new(i, grid.nv - 1)] {
            walk(&straight(start, end), &mut height);
        }
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut displacement: f64 = 0.0;
    for n in grid.nodes() {
        let a = frames.frame(n).matrix();
        let raw = AmbientVector::new(vec![a[(0, 0)], a[(1, 0)], a[(2, 0)], height[grid.index(n)]]);
        let p = project_to_model(&raw, &sig).map_err(|e| Error::Integrity(format!("node {n}: {e}")))?;
        displacement = displacement.max(p.distance(&raw));
        points.push(p);
    }
    if !(displacement <= PROJECTION_LIMIT) {
        return Err(Error::Integrity(format!(
            "model projection moved a node by {displacement:.3e} (limit {PROJECTION_LIMIT:.0e})"
        )));
    }
    Ok(ReconstructedChart {
        sig,
        grid,
        points,
        frames: frames.frames.clone(),
        base,
        t0,
        projection_displacement: displacement,
    })
}

/// `diag(1, R)` with `R ∈ SO(3)` whose last row is `(T^1, T^2, ν)`: a frame
/// meeting the base condition when no chart is available.
pub fn canonical_base_frame(conn: &ConnectionField, data: &FundamentalData, base: Node) -> Result<FrameMatrix> {
    let row = expected_last_row(conn, data, base);
    let r3 = Vector3::new(row[1], row[2], row[3]);
    let norm = r3.norm();
    if !(norm > 0.5) {
        return Err(Error::Domain(format!("(T, nu) is far from unit length at node {base}")));
    }
    let r3 = r3 / norm;
    let axis = (0..3)
        .min_by(|&a, &b| r3[a].abs().total_cmp(&r3[b].abs()))
        .expect("three axes");
    let e = Vector3::ith(axis, 1.0);
    let r1 = (e - r3 * e.dot(&r3)).normalize();
    let r2 = r3.cross(&r1);
    let r = Matrix3::from_rows(&[r1.transpose(), r2.transpose(), r3.transpose()]);
    let mut a = DMatrix::identity(4, 4);
    a.view_mut((1, 1), (3, 3)).copy_from(&r);
    FrameMatrix::new(a, &conn.sig)
}

/// Adapted frame `(N̄, e1, e2, N)` of a chart at a grid node.
pub fn chart_base_frame(chart: &dyn Chart, grid: &ParameterGrid, base: Node) -> Result<FrameMatrix> {
    let (u, v) = grid.coords(base);
    let jet = chart_jet(chart, u, v, grid.hu(), grid.hv())?;
    Ok(adapted_frame(&chart.signature(), &jet, base)?.frame)
}

/// Full pipeline on abstract data: connection, transport, reconstruction.
pub fn reconstruct_from_data(
    data: &FundamentalData,
    base: Node,
    a0: Option<FrameMatrix>,
    t0: f64,
) -> Result<ReconstructedChart> {
    reconstruct_from_data_with_gate(data, base, a0, t0, 10.0 * data.grid().h().powi(2))
}

/// [`reconstruct_from_data`] with an explicit flatness gate.
pub fn reconstruct_from_data_with_gate(
    data: &FundamentalData,
    base: Node,
    a0: Option<FrameMatrix>,
    t0: f64,
    gate: f64,
) -> Result<ReconstructedChart> {
    let conn = connection_from_data(data)?;
    let a0 = match a0 {
        Some(a) => a,
        None => canonical_base_frame(&conn, data, base)?,
    };
    let frames = integrate_frame_with_gate(&conn, data, base, &a0, gate)?;
    reconstruct_immersion(&frames, data, t0)
}

/// Round trip of a chart through its fundamental data, anchored to the
/// chart's own frame and height at `base`.
pub fn reconstruct_chart(chart: &dyn Chart, grid: &ParameterGrid, base: Node) -> Result<ReconstructedChart> {
    let data = fundamental_from_chart(chart, grid)?;
    let a0 = chart_base_frame(chart, grid, base)?;
    let (u, v) = grid.coords(base);
    let t0 = chart.eval(u, v)?[3];
    reconstruct_from_data(&data, base, Some(a0), t0)
}

/// Samples with an adapted frame, comparable up to ambient isometry.
pub trait FramedSamples {
    fn signature(&self) -> Signature;
    fn grid(&self) -> &ParameterGrid;
    fn point(&self, node: Node) -> Vector4<f64>;
    fn frame(&self, node: Node) -> Result<FrameMatrix>;
}

impl FramedSamples for ReconstructedChart {
    fn signature(&self) -> Signature {
        self.sig
    }

    fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    fn point(&self, node: Node) -> Vector4<f64> {
        Vector4::from_column_slice(self.points[self.grid.index(node)].as_slice())
    }

    fn frame(&self, node: Node) -> Result<FrameMatrix> {
        Ok(self.frames[self.grid.index(node)].clone())
    }
}

/// A chart sampled on a grid.
pub struct SampledChart<'a> {
    chart: &'a dyn Chart,
    grid: ParameterGrid,
    points: Vec<Vector4<f64>>,
}

impl<'a> SampledChart<'a> {
    pub fn new(chart: &'a dyn Chart, grid: &ParameterGrid) -> Result<Self> {
        let sig = chart.signature();
        let points = grid
            .nodes()
            .map(|n| {
                let (u, v) = grid.coords(n);
                let p = chart.eval(u, v)?;
                check_model(&sig, &p, n)?;
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { chart, grid: *grid, points })
    }
}

impl FramedSamples for SampledChart<'_> {
    fn signature(&self) -> Signature {
        self.chart.signature()
    }

    fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    fn point(&self, node: Node) -> Vector4<f64> {
        self.points[self.grid.index(node)]
    }

    fn frame(&self, node: Node) -> Result<FrameMatrix> {
        chart_base_frame(self.chart, &self.grid, node)
    }
}

/// Aligns `b` to `a` at `base` by the isometry (horizontal `G`-orthogonal map,
/// vertical translation) matching their frames and heights, and returns the
/// max Euclidean distance between corresponding nodes.
pub fn compare_up_to_isometry(a: &dyn FramedSamples, b: &dyn FramedSamples, base: Node) -> Result<f64> {
    let sig = a.signature();
    if b.signature() != sig {
        return Err(Error::Structural("charts live in different ambient spaces".into()));
    }
    if a.grid() != b.grid() {
        return Err(Error::Structural("charts are sampled on different grids".into()));
    }
    let grid = *a.grid();
    grid.check_node(base)?;
    let fa = a.frame(base)?;
    let fb = b.frame(base)?;
    let m = fa.matrix() * fb.inverse(&sig);
    let block = m.view((0, 0), (3, 3)).into_owned();
    let diag = [sig.kappa_f64(), 1.0, 1.0];
    let q = g_gram_schmidt(&block, &diag).map_err(|e| Error::Domain(format!("degenerate frames at base: {e}")))?;
    let q = Matrix3::from_iterator(q.iter().copied());
    let shift = a.point(base)[3] - b.point(base)[3];
    let mut worst: f64 = 0.0;
    for n in grid.nodes() {
        let pb = b.point(n);
        let hb = q * Vector3::new(pb[0], pb[1], pb[2]);
        let moved = Vector4::new(hb[0], hb[1], hb[2], pb[3] + shift);
        let d = (moved - a.point(n)).norm();
        if d.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

/// The three sign patterns of fundamental data realized by ambient isometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignFlipCase {
    /// `(−S, T, −ν)`: reverses the orientation of `M^2` only.
    ReverseModel = 1,
    /// `(−S, −T, ν)`: reverses the orientation of `R` only.
    ReverseLine = 2,
    /// `(S, −T, −ν)`: reverses both.
    ReverseBoth = 3,
}

impl SignFlipCase {
    pub fn from_index(case: u8) -> Result<Self> {
        match case {
            1 => Ok(Self::ReverseModel),
            2 => Ok(Self::ReverseLine),
            3 => Ok(Self::ReverseBoth),
            _ => Err(Error::Validation(format!("sign flip case must be 1, 2 or 3, got {case}"))),
        }
    }

    /// Signs applied to `(S, T, ν)`.
    pub fn signs(&self) -> (f64, f64, f64) {
        match self {
            Self::ReverseModel => (-1.0, 1.0, -1.0),
            Self::ReverseLine => (-1.0, -1.0, 1.0),
            Self::ReverseBoth => (1.0, -1.0, -1.0),
        }
    }

    pub fn reverses_model(&self) -> bool {
        matches!(self, Self::ReverseModel | Self::ReverseBoth)
    }

    pub fn reverses_line(&self) -> bool {
        matches!(self, Self::ReverseLine | Self::ReverseBoth)
    }

    /// An ambient isometry `σ` realizing the case: `x^2 ↦ -x^2` reverses
    /// `M^2`, `t ↦ -t` reverses `R`.
    pub fn isometry(&self) -> Matrix4<f64> {
        let m = if self.reverses_model() { -1.0 } else { 1.0 };
        let l = if self.reverses_line() { -1.0 } else { 1.0 };
        Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, m, l))
    }
}

/// Sign-flipped data and the orientation reversals of the matching isometry.
#[derive(Debug, Clone)]
pub struct SignFlip {
    pub data: FundamentalData,
    pub case: SignFlipCase,
    pub reverses_model: bool,
    pub reverses_line: bool,
    pub isometry: Matrix4<f64>,
}

pub fn apply_sign_flip(data: &FundamentalData, case: u8) -> Result<SignFlip> {
    let case = SignFlipCase::from_index(case)?;
    let (ss, st, sn) = case.signs();
    let jet = data.jet().map(|jets| {
        jets.iter()
            .map(|j| FieldJet {
                metric_gradient: j.metric_gradient,
                metric_hessian: j.metric_hessian,
                shape_gradient: [j.shape_gradient[0] * ss, j.shape_gradient[1] * ss],
                tangent_gradient: [j.tangent_gradient[0] * st, j.tangent_gradient[1] * st],
                nu_gradient: [j.nu_gradient[0] * sn, j.nu_gradient[1] * sn],
            })
            .collect()
    });
    let flipped = data.replace_fields(
        data.shape().iter().map(|s| s * ss).collect(),
        data.tangent().iter().map(|t| t * st).collect::<Vec<Vector2<f64>>>(),
        data.nu().iter().map(|x| x * sn).collect(),
        jet,
    );
    Ok(SignFlip {
        data: flipped,
        case,
        reverses_model: case.reverses_model(),
        reverses_line: case.reverses_line(),
        isometry: case.isometry(),
    })
}


#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_3;

    use proptest::prelude::*;

    use super::*;
    use crate::ambient::so_defect;
    use crate::catalog::{surface, CatalogSpec, CatalogSurface, SurfaceKind};
    use crate::chart::IsometricImage;
    use crate::fundamental::check_compatibility;

    fn built(kind: SurfaceKind, x: f64) -> Box<dyn CatalogSurface> {
        surface(&CatalogSpec::new(kind, x)).unwrap()
    }

    fn slice(sig: Signature) -> (Box<dyn CatalogSurface>, ParameterGrid) {
        let kind = if sig.kappa() > 0 { SurfaceKind::S2Slice } else { SurfaceKind::H2Slice };
        let s = built(kind, 0.25);
        let grid = ParameterGrid::centered(0.4, 0.05).unwrap();
        (s, grid)
    }

    #[test]
    fn slice_connection_has_only_tangential_entries() {
        let (s, grid) = slice(Signature::sphere2());
        let data = s.fundamental_closed_form(&grid).unwrap();
        let conn = connection_from_data(&data).unwrap();
        for (k, n) in grid.nodes().enumerate() {
            let cof = conn.coframe()[k];
            for (dir, h) in [conn.omega_u()[k].matrix(), conn.omega_v()[k].matrix()].into_iter().enumerate() {
                for j in 0..4 {
                    assert_eq!(h[(3, j)], 0.0, "{n}");
                    assert_eq!(h[(j, 3)], 0.0, "{n}");
                }
                assert!((h[(0, 1)] + cof[(0, dir)]).abs() < 1e-15);
                assert!((h[(0, 2)] + cof[(1, dir)]).abs() < 1e-15);
            }
        }
        let r = flatness_residual(&conn);
        assert!(r.iter().all(|x| *x <= 1e-10), "{:e}", r.iter().cloned().fold(0.0, f64::max));
    }

    #[test]
    fn shape_block_matches_helicoid_shape_operator() {
        let s = built(SurfaceKind::S2Helicoid, 1.0);
        let grid = ParameterGrid::new(-0.1, 0.1, -0.2, 0.2, 3, 5).unwrap();
        let data = s.fundamental_closed_form(&grid).unwrap();
        let conn = connection_from_data(&data).unwrap();
        let node = Node::new(1, 2);
        let k = grid.index(node);
        let cs = conn.coframe()[k] * data.shape()[k];
        // at u = 0, S = -[[0, 1], [1, 0]]
        assert!((data.shape()[k] + Matrix2::new(0.0, 1.0, 1.0, 0.0)).amax() < 1e-12);
        for dir in 0..2 {
            let h = if dir == 0 { conn.omega_u()[k].matrix() } else { conn.omega_v()[k].matrix() };
            assert!((h[(3, 1)] - cs[(0, dir)]).abs() < 1e-14);
            assert!((h[(3, 2)] - cs[(1, dir)]).abs() < 1e-14);
        }
    }

    #[test]
    fn connection_matrices_are_exactly_in_the_algebra() {
        for kind in [SurfaceKind::H2Catenoid, SurfaceKind::S2Unduloid] {
            let s = built(kind, CatalogSpec::default_for(kind).parameter);
            let data = s.fundamental_closed_form(&s.default_grid(0.1).unwrap()).unwrap();
            let conn = connection_from_data(&data).unwrap();
            let sig = conn.signature();
            for h in conn.omega_u().iter().chain(conn.omega_v()) {
                assert_eq!(so_defect(h.matrix(), &sig), 0.0);
            }
        }
    }

    #[test]
    fn flatness_converges_at_second_order() {
        let s = built(SurfaceKind::H2Catenoid, 1.0);
        let coarse = s.default_grid(0.02).unwrap();
        let fine = s.default_grid(0.01).unwrap();
        let r = |g: &ParameterGrid| {
            let data = fundamental_from_chart(s.as_chart(), g).unwrap();
            connection_from_data(&data).unwrap().max_flatness().0
        };
        let (a, b) = (r(&coarse), r(&fine));
        assert!(b <= 1e-3, "{b:e}");
        assert!((3.5..=4.5).contains(&(a / b)), "{a:e} / {b:e}");
    }

    #[test]
    fn derivative_free_data_is_second_order_up_to_the_boundary() {
        let s = built(SurfaceKind::H2Catenoid, 1.0);
        let r = |h: f64| {
            let data = s.fundamental_closed_form(&s.default_grid(h).unwrap()).unwrap().without_derivatives();
            let conn = connection_from_data(&data).unwrap();
            assert!(!conn.is_analytic());
            conn.max_flatness().0
        };
        let (a, b) = (r(0.02), r(0.01));
        assert!((3.5..=4.5).contains(&(a / b)), "{a:e} / {b:e}");
    }

    #[test]
    fn zeroed_shape_block_is_not_flat() {
        let s = built(SurfaceKind::S2Helicoid, 1.0);
        let r = |h: f64| {
            let data = s.fundamental_closed_form(&s.default_grid(h).unwrap()).unwrap();
            connection_from_data(&data).unwrap().zero_shape_block().max_flatness().0
        };
        let (a, b) = (r(0.02), r(0.01));
        assert!(b > 0.1, "{b}");
        assert!((0.8..=1.2).contains(&(a / b)));
    }

    #[test]
    fn transport_on_a_slice_stays_in_the_group() {
        for sig in [Signature::sphere2(), Signature::hyperbolic2()] {
            let (s, grid) = slice(sig);
            let data = s.fundamental_closed_form(&grid).unwrap();
            let conn = connection_from_data(&data).unwrap();
            let base = grid.center();
            let a0 = chart_base_frame(s.as_chart(), &grid, base).unwrap();
            let frames = integrate_frame(&conn, &data, base, &a0).unwrap();
            assert!(frames.max_group_defect() <= 1e-12, "{:e}", frames.max_group_defect());
            let rec = reconstruct_immersion(&frames, &data, 0.25).unwrap();
            for p in rec.points() {
                assert_eq!(p.height(), 0.25);
                assert!(p.model_defect(&sig).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn slice_reconstruction_converges_at_fourth_order() {
        let (s, _) = slice(Signature::sphere2());
        let err = |h: f64| {
            let grid = ParameterGrid::centered(0.4, h).unwrap();
            let rec = reconstruct_chart(s.as_chart(), &grid, grid.center()).unwrap();
            let exact = SampledChart::new(s.as_chart(), &grid).unwrap();
            compare_up_to_isometry(&exact, &rec, grid.center()).unwrap()
        };
        let (a, b) = (err(0.05), err(0.025));
        assert!(a < 1e-5, "{a:e}");
        assert!(a / b > 12.0, "{a:e} / {b:e}");
    }

    #[test]
    fn helicoid_transport_preserves_last_row_and_closes_loops() {
        let s = built(SurfaceKind::S2Helicoid, 1.0);
        let grid = s.default_grid(0.01).unwrap();
        let data = fundamental_from_chart(s.as_chart(), &grid).unwrap();
        let conn = connection_from_data(&data).unwrap();
        let base = grid.center();
        let a0 = chart_base_frame(s.as_chart(), &grid, base).unwrap();
        let frames = integrate_frame(&conn, &data, base, &a0).unwrap();
        assert!(frames.row_drift() <= 1e-6, "{:e}", frames.row_drift());
        let far = Node::new(grid.nu - 1, grid.nv - 1);
        assert!(rectangle_holonomy(&conn, Node::new(0, 0), far).unwrap() <= 1e-6);
        assert!(rectangle_holonomy(&conn, Node::new(10, 30), Node::new(70, 45)).unwrap() <= 1e-6);
        assert!(two_path_disagreement(&conn, Node::new(0, 0), far).unwrap() <= 1e-6);

        let rec = reconstruct_immersion(&frames, &data, 0.0).unwrap();
        let exact = SampledChart::new(s.as_chart(), &grid).unwrap();
        let d = compare_up_to_isometry(&exact, &rec, base).unwrap();
        assert!(d <= 1e-6, "{d:e}");
    }

    #[test]
    fn catenoid_reconstruction_stays_on_the_hyperboloid() {
        let s = built(SurfaceKind::H2Catenoid, 1.0);
        let grid = s.default_grid(0.02).unwrap();
        let base = grid.center();
        let rec = reconstruct_chart(s.as_chart(), &grid, base).unwrap();
        let sig = Signature::hyperbolic2();
        for p in rec.points() {
            assert!(p.model_defect(&sig).abs() <= 1e-8);
            assert!(p.as_slice()[0] > 0.0);
        }
        assert!(rec.projection_displacement() < 1e-8);
    }

    #[test]
    fn comparison_undoes_ambient_isometries() {
        let s = built(SurfaceKind::H2Helicoid, 1.0);
        let grid = ParameterGrid::centered(0.3, 0.05).unwrap();
        let base = Node::new(2, 9);
        let a = SampledChart::new(s.as_chart(), &grid).unwrap();
        assert!(compare_up_to_isometry(&a, &a, base).unwrap() <= 1e-14);
        // hyperbolic boost in the (x0, x1) plane composed with a rotation of (x1, x2)
        let (ch, sh) = (0.4f64.cosh(), 0.4f64.sinh());
        let (c, s2) = (FRAC_PI_3.cos(), FRAC_PI_3.sin());
        let boost = Matrix4::new(ch, sh, 0.0, 0.0, sh, ch, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let rot = Matrix4::new(1.0, 0.0, 0.0, 0.0, 0.0, c, -s2, 0.0, 0.0, s2, c, 0.0, 0.0, 0.0, 0.0, 1.0);
        let moved = IsometricImage::new(s.as_chart(), rot * boost, Vector4::new(0.0, 0.0, 0.0, 1.7)).unwrap();
        let b = SampledChart::new(&moved, &grid).unwrap();
        assert!(compare_up_to_isometry(&a, &b, base).unwrap() <= 1e-12);
    }

    #[test]
    fn base_frame_must_carry_t_and_nu() {
        let s = built(SurfaceKind::S2Helicoid, 1.0);
        let grid = ParameterGrid::centered(0.2, 0.05).unwrap();
        let data = s.fundamental_closed_form(&grid).unwrap();
        let conn = connection_from_data(&data).unwrap();
        let id = FrameMatrix::identity(&conn.signature());
        let err = integrate_frame(&conn, &data, grid.center(), &id).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "{err}");
        let canon = canonical_base_frame(&conn, &data, grid.center()).unwrap();
        assert!(integrate_frame(&conn, &data, grid.center(), &canon).is_ok());
    }

    #[test]
    fn non_flat_connections_are_refused() {
        let s = built(SurfaceKind::S2Helicoid, 1.0);
        let grid = ParameterGrid::centered(0.2, 0.05).unwrap();
        let data = s.fundamental_closed_form(&grid).unwrap();
        let conn = connection_from_data(&data).unwrap().zero_shape_block();
        let a0 = chart_base_frame(s.as_chart(), &grid, grid.center()).unwrap();
        match integrate_frame(&conn, &data, grid.center(), &a0) {
            Err(Error::Integrability { residual, gate, .. }) => assert!(residual > gate),
            other => panic!("expected an integrability error, got {other:?}"),
        }
    }

    #[test]
    fn sign_flips_reconstruct_reflected_surfaces() {
        let s = built(SurfaceKind::S2Unduloid, 2f64.sqrt());
        let grid = ParameterGrid::centered(0.3, 0.02).unwrap();
        let base = grid.center();
        let data = fundamental_from_chart(s.as_chart(), &grid).unwrap();
        for case in 1..=3 {
            let flip = apply_sign_flip(&data, case).unwrap();
            assert!(check_compatibility(&flip.data, flip.data.default_tolerance()).pass);
            let image = IsometricImage::new(s.as_chart(), flip.isometry, Vector4::zeros()).unwrap();
            let expected = SampledChart::new(&image, &grid).unwrap();
            let a0 = chart_base_frame(&image, &grid, base).unwrap();
            let t0 = image.eval(0.0, 0.0).unwrap()[3];
            let rec = reconstruct_from_data(&flip.data, base, Some(a0), t0).unwrap();
            let d = compare_up_to_isometry(&expected, &rec, base).unwrap();
            assert!(d <= 1e-6, "case {case}: {d:e}");
        }
        let case2 = apply_sign_flip(&data, 2).unwrap();
        assert!(!case2.reverses_model && case2.reverses_line);
        assert!(matches!(apply_sign_flip(&data, 4), Err(Error::Validation(_))));
    }

    #[test]
    fn sign_flip_fixes_slices() {
        let (s, grid) = slice(Signature::hyperbolic2());
        let data = s.fundamental_closed_form(&grid).unwrap();
        let flipped = apply_sign_flip(&data, 3).unwrap().data;
        assert_eq!(flipped.shape(), data.shape());
        assert_eq!(flipped.tangent(), data.tangent());
        assert!(flipped.nu().iter().all(|x| *x == -1.0));
    }

    proptest! {
        #[test]
        fn sign_flips_are_involutions(case in 1u8..=3, beta in 0.3f64..2.0) {
            let s = built(SurfaceKind::S2Helicoid, beta);
            let grid = ParameterGrid::centered(0.2, 0.05).unwrap();
            let data = s.fundamental_closed_form(&grid).unwrap();
            let twice = apply_sign_flip(&apply_sign_flip(&data, case).unwrap().data, case).unwrap().data;
            prop_assert_eq!(twice.shape(), data.shape());
            prop_assert_eq!(twice.tangent(), data.tangent());
            prop_assert_eq!(twice.nu(), data.nu());
            let (a, b) = (twice.jet().unwrap(), data.jet().unwrap());
            for k in 0..a.len() {
                prop_assert_eq!(a[k].shape_gradient, b[k].shape_gradient);
                prop_assert_eq!(a[k].nu_gradient, b[k].nu_gradient);
            }
        }

        #[test]
        fn transported_frames_are_in_the_group(i in 0usize..9, j in 0usize..9) {
            let s = built(SurfaceKind::H2GenCatenoid, 0.6);
            let grid = ParameterGrid::centered(0.2, 0.05).unwrap();
            let data = s.fundamental_closed_form(&grid).unwrap();
            let conn = connection_from_data(&data).unwrap();
            let base = Node::new(i, j);
            let a0 = chart_base_frame(s.as_chart(), &grid, base).unwrap();
            let frames = integrate_frame(&conn, &data, base, &a0).unwrap();
            prop_assert!(frames.max_group_defect() <= 1e-12);
            prop_assert!(frames.frames().iter().all(|a| a.matrix()[(0, 0)] > 0.0));
        }
    }
}
