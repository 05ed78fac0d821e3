use std::fmt;

use nalgebra::{Matrix2, Matrix3, Vector2};

use super::FundamentalData;
use crate::grid::{diff1, diff_u, diff_uu, diff_uv, diff_v, diff_vv, Node};

/// Names of the scored equations, in report order.
pub const RESIDUAL_NAMES: [&str; 6] = ["gauss", "codazzi", "nabla_T", "d_nu", "unit_norm", "d_eta"];

/// Fields and their first (and metric second) derivatives at one node.
#[derive(Debug, Clone, Copy)]
pub struct NodeJet {
    pub g: Matrix2<f64>,
    pub dg: [Matrix2<f64>; 2],
    pub ddg: [Matrix2<f64>; 3],
    pub s: Matrix2<f64>,
    pub ds: [Matrix2<f64>; 2],
    pub t: Vector2<f64>,
    pub dt: [Vector2<f64>; 2],
    pub nu: f64,
    pub dnu: [f64; 2],
}

/// Exact derivatives when the data carries them, finite differences otherwise.
pub(crate) fn node_jet(data: &FundamentalData, node: Node) -> NodeJet {
    let grid = data.grid();
    let k = grid.index(node);
    let (g, s, t, nu) = (data.metric[k], data.shape[k], data.tangent[k], data.nu[k]);
    if let Some(jet) = data.jet() {
        let j = &jet[k];
        return NodeJet {
            g,
            dg: j.metric_gradient,
            ddg: j.metric_hessian,
            s,
            ds: j.shape_gradient,
            t,
            dt: j.tangent_gradient,
            nu,
            dnu: j.nu_gradient,
        };
    }
    let (dg, ddg) = match data.metric_gradient() {
        Some(grad) => {
            let along_u = |c: usize| {
                diff1(|i| grad[grid.index(Node::new(i, node.j))][c], node.i, grid.nu, grid.hu())
            };
            let along_v = |c: usize| {
                diff1(|j| grad[grid.index(Node::new(node.i, j))][c], node.j, grid.nv, grid.hv())
            };
            let uv = (along_v(0) + along_u(1)) * 0.5;
            (grad[k], [along_u(0), uv, along_v(1)])
        }
        None => {
            let m = &data.metric;
            (
                [diff_u(m, grid, node), diff_v(m, grid, node)],
                [diff_uu(m, grid, node), diff_uv(m, grid, node), diff_vv(m, grid, node)],
            )
        }
    };
    NodeJet {
        g,
        dg,
        ddg,
        s,
        ds: [diff_u(&data.shape, grid, node), diff_v(&data.shape, grid, node)],
        t,
        dt: [diff_u(&data.tangent, grid, node), diff_v(&data.tangent, grid, node)],
        nu,
        dnu: [diff_u(&data.nu, grid, node), diff_v(&data.nu, grid, node)],
    }
}

/// Christoffel symbols `Γ[k][i][j] = Γ^k_{ij}` of `g` from its gradient.
pub(crate) fn christoffel(g: &Matrix2<f64>, dg: &[Matrix2<f64>; 2]) -> [[[f64; 2]; 2]; 2] {
    let inv = g.try_inverse().unwrap_or_else(Matrix2::zeros);
    let mut out = [[[0.0; 2]; 2]; 2];
    for (k, row) in out.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                row[i][j] = (0..2)
                    .map(|m| 0.5 * inv[(k, m)] * (dg[i][(m, j)] + dg[j][(m, i)] - dg[m][(i, j)]))
                    .sum();
            }
        }
    }
    out
}

/// Gaussian curvature of `g` by the Brioschi formula.
pub fn gauss_curvature(jet: &NodeJet) -> f64 {
    let (e, f, g) = (jet.g[(0, 0)], jet.g[(0, 1)], jet.g[(1, 1)]);
    let [du, dv] = jet.dg;
    let (e_u, f_u, g_u) = (du[(0, 0)], du[(0, 1)], du[(1, 1)]);
    let (e_v, f_v, g_v) = (dv[(0, 0)], dv[(0, 1)], dv[(1, 1)]);
    let [uu, uv, vv] = jet.ddg;
    let (e_vv, f_uv, g_uu) = (vv[(0, 0)], uv[(0, 1)], uu[(1, 1)]);
    let m1 = Matrix3::new(
        -0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v,
        f_v - 0.5 * g_u, e, f,
        0.5 * g_v, f, g,
    );
    let m2 = Matrix3::new(
        0.0, 0.5 * e_v, 0.5 * g_u,
        0.5 * e_v, e, f,
        0.5 * g_u, f, g,
    );
    let w2 = e * g - f * f;
    (m1.determinant() - m2.determinant()) / (w2 * w2)
}

fn g_norm(g: &Matrix2<f64>, x: &Vector2<f64>) -> f64 {
    (g * x).dot(x).max(0.0).sqrt()
}

fn gauss_at(kappa: f64, jet: &NodeJet) -> f64 {
    let tt = (jet.g * jet.t).dot(&jet.t);
    gauss_curvature(jet) - jet.s.determinant() - kappa * (1.0 - tt)
}

fn codazzi_at(kappa: f64, jet: &NodeJet) -> f64 {
    let gamma = christoffel(&jet.g, &jet.dg);
    let eta = jet.g * jet.t;
    let mut r = Vector2::zeros();
    for k in 0..2 {
        let mut x = jet.ds[0][(k, 1)] - jet.ds[1][(k, 0)];
        for m in 0..2 {
            x += gamma[k][0][m] * jet.s[(m, 1)] - gamma[k][1][m] * jet.s[(m, 0)];
        }
        let delta_u = if k == 0 { 1.0 } else { 0.0 };
        let delta_v = 1.0 - delta_u;
        x -= kappa * jet.nu * (eta[1] * delta_u - eta[0] * delta_v);
        r[k] = x;
    }
    g_norm(&jet.g, &r)
}

fn structure_at(jet: &NodeJet) -> [f64; 4] {
    let gamma = christoffel(&jet.g, &jet.dg);
    let mut nabla_t: f64 = 0.0;
    let mut d_nu: f64 = 0.0;
    for i in 0..2 {
        let mut r = Vector2::zeros();
        for k in 0..2 {
            r[k] = jet.dt[i][k] + (0..2).map(|m| gamma[k][i][m] * jet.t[m]).sum::<f64>()
                - jet.nu * jet.s[(k, i)];
        }
        nabla_t = nabla_t.max(g_norm(&jet.g, &r));
        let s_col: Vector2<f64> = jet.s.column(i).into_owned();
        d_nu = d_nu.max((jet.dnu[i] + (jet.g * s_col).dot(&jet.t)).abs());
    }
    let unit = ((jet.g * jet.t).dot(&jet.t) + jet.nu * jet.nu - 1.0).abs();
    // ∂_k η_i = (∂_k g T + g ∂_k T)_i
    let d_eta_u = jet.dg[0] * jet.t + jet.g * jet.dt[0];
    let d_eta_v = jet.dg[1] * jet.t + jet.g * jet.dt[1];
    let d_eta = (d_eta_u[1] - d_eta_v[0]).abs();
    [nabla_t, d_nu, unit, d_eta]
}

/// `K - det S - kappa (1 - g(T, T))` at every node.
pub fn gauss_residual(data: &FundamentalData) -> Vec<f64> {
    let k = data.signature().kappa_f64();
    data.grid().nodes().map(|n| gauss_at(k, &node_jet(data, n))).collect()
}

/// `g`-norm of the Codazzi defect on `(∂_u, ∂_v)` at every node.
pub fn codazzi_residual(data: &FundamentalData) -> Vec<f64> {
    let k = data.signature().kappa_f64();
    data.grid().nodes().map(|n| codazzi_at(k, &node_jet(data, n))).collect()
}

/// Per-node residuals of `∇T = ν S`, `dν = -g(S·, T)`, `|T|^2 + ν^2 = 1`, `dη = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureResiduals {
    pub nabla_t: Vec<f64>,
    pub d_nu: Vec<f64>,
    pub unit_norm: Vec<f64>,
    pub d_eta: Vec<f64>,
}

pub fn structure_residuals(data: &FundamentalData) -> StructureResiduals {
    let mut out = StructureResiduals {
        nabla_t: Vec::with_capacity(data.grid().len()),
        d_nu: Vec::new(),
        unit_norm: Vec::new(),
        d_eta: Vec::new(),
    };
    for n in data.grid().nodes() {
        let [a, b, c, d] = structure_at(&node_jet(data, n));
        out.nabla_t.push(a);
        out.d_nu.push(b);
        out.unit_norm.push(c);
        out.d_eta.push(d);
    }
    out
}

/// Interior statistics of one residual.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEntry {
    pub name: &'static str,
    pub max: f64,
    pub rms: f64,
    pub worst: Option<Node>,
}

impl ResidualEntry {
    fn from_field(name: &'static str, data: &FundamentalData, values: &[f64]) -> Self {
        let grid = data.grid();
        let mut max: f64 = 0.0;
        let mut worst = None;
        let mut sum = 0.0;
        let mut count = 0usize;
        for n in grid.interior_nodes() {
            let x = values[grid.index(n)].abs();
            // NaN counts as the worst possible value
            if worst.is_none() || (x.is_nan() && !max.is_nan()) || x > max {
                max = x;
                worst = Some(n);
            }
            sum += x * x;
            count += 1;
        }
        let rms = if count > 0 { (sum / count as f64).sqrt() } else { 0.0 };
        Self { name, max, rms, worst }
    }
}

/// Summary of all compatibility residuals over interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn get(&self, name: &str) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn max(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |e| e.max)
    }

    /// Equations whose max residual exceeds the tolerance.
    pub fn failing(&self) -> Vec<&ResidualEntry> {
        self.entries.iter().filter(|e| !(e.max <= self.tolerance)).collect()
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "equation\tmax\trms\tworst_node\tstatus")?;
        for e in &self.entries {
            let node = e.worst.map_or("-".to_string(), |n| format!("{},{}", n.i, n.j));
            let status = if e.max <= self.tolerance { "ok" } else { "FAIL" };
            writeln!(f, "{}\t{:.3e}\t{:.3e}\t{}\t{}", e.name, e.max, e.rms, node, status)?;
        }
        write!(
            f,
            "tolerance\t{:.3e}\nresult\t{}",
            self.tolerance,
            if self.pass { "pass" } else { "fail" }
        )
    }
}

/// Evaluates every residual and compares its interior max against `tol`.
pub fn check_compatibility(data: &FundamentalData, tol: f64) -> ResidualReport {
    let st = structure_residuals(data);
    let fields: [(&'static str, Vec<f64>); 6] = [
        ("gauss", gauss_residual(data)),
        ("codazzi", codazzi_residual(data)),
        ("nabla_T", st.nabla_t),
        ("d_nu", st.d_nu),
        ("unit_norm", st.unit_norm),
        ("d_eta", st.d_eta),
    ];
    let entries: Vec<ResidualEntry> =
        fields.iter().map(|(name, v)| ResidualEntry::from_field(name, data, v)).collect();
    let pass = entries.iter().all(|e| e.max <= tol);
    ResidualReport { entries, tolerance: tol, pass }
}
