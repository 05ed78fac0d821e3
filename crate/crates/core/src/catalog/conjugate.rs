//! Conjugate pairs of minimal surfaces, checked through their closed forms.

use std::fmt;

use nalgebra::Matrix2;

use super::{surface, CatalogSpec, CatalogSurface, SurfaceKind};
use crate::associate::rotation_matrix;
use crate::error::{Error, Result};
use crate::grid::ParameterGrid;

const RELATION_TOL: f64 = 1e-12;

/// The four conjugate pairs with a helicoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// `𝒰_α` and `ℋ_β` in `S^2 x R`, `α^2 = 1 + β^2`.
    UnduloidHelicoid,
    /// `𝒞_α` and `ℋ_β` in `H^2 x R`, `β^2 = 1 + α^2`.
    CatenoidHelicoid,
    /// `𝒞_0` and `ℋ_1`.
    HorocycleHelicoid,
    /// `𝒢_γ` and `ℋ_β`, `β^2 + γ^2 = 1`.
    GenCatenoidHelicoid,
}

/// Max deviations over the grid for one conjugate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateReport {
    pub pair: PairKind,
    pub first: CatalogSpec,
    pub second: CatalogSpec,
    /// Shared quantity `y` computed from each profile.
    pub shared: f64,
    /// Residual of the first-order equation satisfied by `y`, both sides.
    pub shared_ode: f64,
    pub metric: f64,
    pub shape: f64,
    pub tangent: f64,
    pub nu: f64,
}

impl ConjugateReport {
    pub fn max_deviation(&self) -> f64 {
        [self.shared, self.shared_ode, self.metric, self.shape, self.tangent, self.nu]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn rows(&self) -> [(&'static str, f64); 6] {
        [
            ("shared_y", self.shared),
            ("shared_y_ode", self.shared_ode),
            ("metric", self.metric),
            ("shape_JS", self.shape),
            ("tangent_JT", self.tangent),
            ("nu", self.nu),
        ]
    }
}

impl fmt::Display for ConjugateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pair\t{}\t{}", self.first, self.second)?;
        writeln!(f, "check\tmax_deviation")?;
        for (name, x) in self.rows() {
            writeln!(f, "{name}\t{x:.3e}")?;
        }
        write!(f, "max\t{:.3e}", self.max_deviation())
    }
}

/// Identifies the pair and checks the parameter relation. Returns the pair
/// with the non-helicoid first.
pub fn classify_pair(a: &CatalogSpec, b: &CatalogSpec) -> Result<(PairKind, CatalogSpec, CatalogSpec)> {
    a.validate()?;
    b.validate()?;
    let (first, helicoid) = match (a.kind, b.kind) {
        (_, SurfaceKind::S2Helicoid | SurfaceKind::H2Helicoid) => (*a, *b),
        (SurfaceKind::S2Helicoid | SurfaceKind::H2Helicoid, _) => (*b, *a),
        _ => {
            return Err(Error::Precondition(format!(
                "({a}, {b}) is not a conjugate pair: one member must be a helicoid"
            )))
        }
    };
    let (x, beta) = (first.parameter, helicoid.parameter);
    let (pair, relation, same_sign) = match (first.kind, helicoid.kind) {
        (SurfaceKind::S2Unduloid, SurfaceKind::S2Helicoid) => {
            (PairKind::UnduloidHelicoid, x * x - (1.0 + beta * beta), x * beta > 0.0)
        }
        (SurfaceKind::H2Catenoid, SurfaceKind::H2Helicoid) => {
            (PairKind::CatenoidHelicoid, beta * beta - (1.0 + x * x), x * beta > 0.0)
        }
        (SurfaceKind::H2Horocycle, SurfaceKind::H2Helicoid) => (PairKind::HorocycleHelicoid, beta - 1.0, true),
        (SurfaceKind::H2GenCatenoid, SurfaceKind::H2Helicoid) => {
            (PairKind::GenCatenoidHelicoid, beta * beta + x * x - 1.0, x * beta > 0.0)
        }
        _ => {
            return Err(Error::Precondition(format!("({a}, {b}) is not one of the four conjugate pairs")))
        }
    };
    if !(relation.abs() <= RELATION_TOL) {
        return Err(Error::Precondition(format!(
            "parameters of ({first}, {helicoid}) violate the pair relation by {:.3e}",
            relation.abs()
        )));
    }
    if !same_sign {
        return Err(Error::Precondition(format!(
            "parameters of ({first}, {helicoid}) must have the same sign"
        )));
    }
    Ok((pair, first, helicoid))
}

/// `(y, y')` at `u` from one member of a pair.
fn shared_quantity(surface: &dyn CatalogSurface, u: f64) -> Result<(f64, f64)> {
    let spec = surface.spec();
    let x = spec.parameter;
    if spec.kind == SurfaceKind::H2Horocycle {
        let c = u.cos();
        return Ok((1.0 / c, u.sin() / (c * c)));
    }
    let profile = surface
        .profile()
        .ok_or_else(|| Error::Unsupported(format!("{spec} has no profile")))?;
    let (p, dp) = profile.eval(u)?;
    Ok(match spec.kind {
        SurfaceKind::S2Unduloid | SurfaceKind::S2Helicoid => (x * p.cos(), -x * p.sin() * dp),
        SurfaceKind::H2Catenoid | SurfaceKind::H2Helicoid => (x * p.cosh(), x * p.sinh() * dp),
        SurfaceKind::H2GenCatenoid => (x * p.sinh(), x * p.cosh() * dp),
        _ => return Err(Error::Unsupported(format!("{spec} is not part of a conjugate pair"))),
    })
}

/// Checks pointwise that the helicoid's closed-form data are the rotation by
/// `J` of its partner's, and that both profiles give the same `y`.
pub fn conjugate_pair_check(a: &CatalogSpec, b: &CatalogSpec, grid: &ParameterGrid) -> Result<ConjugateReport> {
    let (pair, first, second) = classify_pair(a, b)?;
    let sa = surface(&first)?;
    let sb = surface(&second)?;
    let da = sa.fundamental_closed_form(grid)?;
    let db = sb.fundamental_closed_form(grid)?;

    let (x, beta) = (first.parameter, second.parameter);
    let ode = |y: f64, dy: f64| -> f64 {
        let rhs = match pair {
            PairKind::GenCatenoidHelicoid => (y * y + x * x) * (y * y - beta * beta),
            PairKind::HorocycleHelicoid => y * y * (y * y - 1.0),
            _ => (y * y - x * x) * (y * y - beta * beta),
        };
        (dy * dy - rhs).abs()
    };
    let mut report = ConjugateReport {
        pair,
        first,
        second,
        shared: 0.0,
        shared_ode: 0.0,
        metric: 0.0,
        shape: 0.0,
        tangent: 0.0,
        nu: 0.0,
    };
    for i in 0..grid.nu {
        let u = grid.u(i);
        let (ya, dya) = shared_quantity(sa.as_ref(), u)?;
        let (yb, dyb) = shared_quantity(sb.as_ref(), u)?;
        report.shared = report.shared.max((ya - yb).abs());
        report.shared_ode = report.shared_ode.max(ode(ya, dya)).max(ode(yb, dyb));
    }
    for node in grid.nodes() {
        let k = grid.index(node);
        let j: Matrix2<f64> = rotation_matrix(&da.metric()[k]);
        report.metric = report.metric.max((da.metric()[k] - db.metric()[k]).amax());
        report.shape = report.shape.max((db.shape()[k] - j * da.shape()[k]).amax());
        report.tangent = report.tangent.max((db.tangent()[k] - j * da.tangent()[k]).amax());
        report.nu = report.nu.max((db.nu()[k] - da.nu()[k]).abs());
    }
    Ok(report)
}

/// The other member of the conjugate pair containing `spec`, if any.
pub fn conjugate_partner(spec: &CatalogSpec) -> Option<CatalogSpec> {
    let x = spec.parameter;
    let s = x.signum();
    let partner = match spec.kind {
        SurfaceKind::S2Unduloid => CatalogSpec::new(SurfaceKind::S2Helicoid, s * (x * x - 1.0).sqrt()),
        SurfaceKind::S2Helicoid => CatalogSpec::new(SurfaceKind::S2Unduloid, s * (1.0 + x * x).sqrt()),
        SurfaceKind::H2Catenoid => CatalogSpec::new(SurfaceKind::H2Helicoid, s * (1.0 + x * x).sqrt()),
        SurfaceKind::H2Horocycle => CatalogSpec::new(SurfaceKind::H2Helicoid, 1.0),
        SurfaceKind::H2GenCatenoid => CatalogSpec::new(SurfaceKind::H2Helicoid, s * (1.0 - x * x).sqrt()),
        SurfaceKind::H2Helicoid if x == 1.0 => CatalogSpec::default_for(SurfaceKind::H2Horocycle),
        SurfaceKind::H2Helicoid if x.abs() > 1.0 => CatalogSpec::new(SurfaceKind::H2Catenoid, s * (x * x - 1.0).sqrt()),
        SurfaceKind::H2Helicoid => CatalogSpec::new(SurfaceKind::H2GenCatenoid, s * (1.0 - x * x).sqrt()),
        _ => return None,
    };
    partner.validate().ok().map(|()| partner)
}
