//! Explicit minimal surfaces of `S^2 x R` and `H^2 x R`: charts, profile
//! curves, closed-form fundamental data and conjugacy checks.
//!
//! Surface families are registered by name in a [`Catalog`] and built at run
//! time from a [`CatalogSpec`] such as `s2-helicoid:1`.

mod conjugate;
mod profile;
mod quadrature;
mod surfaces;

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2, Vector4};
use num_dual::HyperDual64;

pub use conjugate::{classify_pair, conjugate_pair_check, conjugate_partner, ConjugateReport, PairKind};
pub use profile::{ProfileOde, ProfileSolution, DRIFT_LIMIT};
pub use quadrature::adaptive_simpson;

use surfaces::{
    Catenoid, Fields, Formulas, GeneralizedCatenoid, Horocycle, HyperbolicHelicoid, Slice,
    SphereHelicoid, Unduloid, VerticalCylinder,
};

use crate::ambient::Signature;
use crate::chart::{Chart, ChartJet};
use crate::dual::{Seed, SEED_UU, SEED_UV, SEED_VV};
use crate::error::{Error, Result};
use crate::fundamental::{FieldJet, FundamentalData};
use crate::grid::ParameterGrid;

/// Default RK4 step for profile curves.
pub const DEFAULT_PROFILE_STEP: f64 = 1e-4;
/// Default half-width of catalog grids.
pub const DEFAULT_HALF_WIDTH: f64 = 0.5;
const QUADRATURE_TOL: f64 = 1e-9;

/// The surface families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceKind {
    S2Helicoid,
    S2Unduloid,
    H2Helicoid,
    H2Catenoid,
    H2Horocycle,
    H2GenCatenoid,
    S2Slice,
    H2Slice,
    S2Cylinder,
    H2VerticalPlane,
}

impl SurfaceKind {
    pub const ALL: [SurfaceKind; 10] = [
        SurfaceKind::S2Helicoid,
        SurfaceKind::S2Unduloid,
        SurfaceKind::H2Helicoid,
        SurfaceKind::H2Catenoid,
        SurfaceKind::H2Horocycle,
        SurfaceKind::H2GenCatenoid,
        SurfaceKind::S2Slice,
        SurfaceKind::H2Slice,
        SurfaceKind::S2Cylinder,
        SurfaceKind::H2VerticalPlane,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SurfaceKind::S2Helicoid => "s2-helicoid",
            SurfaceKind::S2Unduloid => "s2-unduloid",
            SurfaceKind::H2Helicoid => "h2-helicoid",
            SurfaceKind::H2Catenoid => "h2-catenoid",
            SurfaceKind::H2Horocycle => "h2-horocycle",
            SurfaceKind::H2GenCatenoid => "h2-gencatenoid",
            SurfaceKind::S2Slice => "s2-slice",
            SurfaceKind::H2Slice => "h2-slice",
            SurfaceKind::S2Cylinder => "s2-cylinder",
            SurfaceKind::H2VerticalPlane => "h2-vertical-plane",
        }
    }

    pub fn signature(&self) -> Signature {
        match self {
            SurfaceKind::S2Helicoid | SurfaceKind::S2Unduloid | SurfaceKind::S2Slice | SurfaceKind::S2Cylinder => {
                Signature::sphere2()
            }
            _ => Signature::hyperbolic2(),
        }
    }

    /// Parameter symbol and default value; `None` for parameter-free families.
    pub fn parameter(&self) -> Option<(&'static str, f64)> {
        match self {
            SurfaceKind::S2Helicoid | SurfaceKind::H2Helicoid => Some(("beta", 1.0)),
            SurfaceKind::S2Unduloid => Some(("alpha", std::f64::consts::SQRT_2)),
            SurfaceKind::H2Catenoid => Some(("alpha", 1.0)),
            SurfaceKind::H2GenCatenoid => Some(("gamma", 0.6)),
            SurfaceKind::S2Slice | SurfaceKind::H2Slice => Some(("t", 0.0)),
            _ => None,
        }
    }

    /// The six minimal surfaces with nontrivial geometry.
    pub fn is_principal(&self) -> bool {
        matches!(
            self,
            SurfaceKind::S2Helicoid
                | SurfaceKind::S2Unduloid
                | SurfaceKind::H2Helicoid
                | SurfaceKind::H2Catenoid
                | SurfaceKind::H2Horocycle
                | SurfaceKind::H2GenCatenoid
        )
    }
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A family plus its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogSpec {
    pub kind: SurfaceKind,
    pub parameter: f64,
}

impl CatalogSpec {
    pub fn new(kind: SurfaceKind, parameter: f64) -> Self {
        Self { kind, parameter }
    }

    /// The family with its default parameter.
    pub fn default_for(kind: SurfaceKind) -> Self {
        Self { kind, parameter: kind.parameter().map_or(0.0, |p| p.1) }
    }

    pub fn signature(&self) -> Signature {
        self.kind.signature()
    }

    pub fn validate(&self) -> Result<()> {
        let x = self.parameter;
        if !x.is_finite() {
            return Err(Error::Validation(format!("{}: non-finite parameter", self.kind)));
        }
        let ok = match self.kind {
            SurfaceKind::S2Helicoid | SurfaceKind::H2Helicoid => x != 0.0,
            SurfaceKind::S2Unduloid => x.abs() > 1.0,
            SurfaceKind::H2Catenoid => x != 0.0,
            SurfaceKind::H2GenCatenoid => x != 0.0 && x.abs() < 1.0,
            _ => true,
        };
        if !ok {
            let range = match self.kind {
                SurfaceKind::S2Unduloid => "|alpha| > 1",
                SurfaceKind::H2GenCatenoid => "0 < |gamma| < 1",
                _ => "nonzero",
            };
            return Err(Error::Validation(format!(
                "{}: parameter {x} outside its range ({range})",
                self.kind
            )));
        }
        Ok(())
    }
}

impl fmt::Display for CatalogSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind.parameter() {
            Some(_) => write!(f, "{}:{}", self.kind, self.parameter),
            None => f.write_str(self.kind.name()),
        }
    }
}

impl FromStr for CatalogSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Catalog::standard().parse(s)
    }
}

/// Parses `x`, `sqrt(x)` or `-sqrt(x)`.
pub fn parse_parameter(text: &str) -> Result<f64> {
    let t = text.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) if rest.starts_with("sqrt") => (-1.0, rest),
        _ => (1.0, t),
    };
    if let Some(inner) = body.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        let x: f64 = inner
            .trim()
            .parse()
            .map_err(|_| Error::Validation(format!("bad parameter '{text}'")))?;
        return Ok(sign * x.sqrt());
    }
    t.parse().map_err(|_| Error::Validation(format!("bad parameter '{text}'")))
}

/// Half-width `u₀` of the maximal domain of the `H^2 x R` families with a
/// bounded profile, by adaptive quadrature after the substitution `x = cosh s`.
pub fn domain_halfwidth(spec: &CatalogSpec) -> Result<f64> {
    spec.validate()?;
    let p = spec.parameter;
    let integrand: Box<dyn Fn(f64) -> f64> = match spec.kind {
        SurfaceKind::H2Catenoid => Box::new(move |s: f64| 1.0 / (s.cosh().powi(2) + p * p).sqrt()),
        SurfaceKind::H2GenCatenoid => Box::new(move |s: f64| 1.0 / (s.cosh().powi(2) - p * p).sqrt()),
        SurfaceKind::H2Helicoid => Box::new(move |s: f64| 1.0 / (1.0 + p * p * s.sinh().powi(2)).sqrt()),
        _ => {
            return Err(Error::Unsupported(format!(
                "{} has no finite domain half-width",
                spec.kind
            )))
        }
    };
    // the integrand decays like e^{-s}; the tail past s = 40 is below 1e-16
    Ok(adaptive_simpson(&*integrand, 0.0, 40.0, QUADRATURE_TOL))
}

/// Profile integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileConfig {
    pub step: f64,
    /// Integrated half-span; a family default when `None`.
    pub halfspan: Option<f64>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { step: DEFAULT_PROFILE_STEP, halfspan: None }
    }
}

fn u_limit(spec: &CatalogSpec) -> Result<Option<f64>> {
    Ok(match spec.kind {
        SurfaceKind::H2Catenoid | SurfaceKind::H2GenCatenoid | SurfaceKind::H2Helicoid => {
            Some(domain_halfwidth(spec)?)
        }
        SurfaceKind::H2Horocycle => Some(std::f64::consts::FRAC_PI_2),
        _ => None,
    })
}

fn formulas_of(spec: &CatalogSpec) -> Box<dyn ErasedSurface> {
    let p = spec.parameter;
    match spec.kind {
        SurfaceKind::S2Helicoid => Box::new(SphereHelicoid { beta: p }) as Box<dyn ErasedSurface>,
        SurfaceKind::S2Unduloid => Box::new(Unduloid { alpha: p }),
        SurfaceKind::H2Helicoid => Box::new(HyperbolicHelicoid { beta: p }),
        SurfaceKind::H2Catenoid => Box::new(Catenoid { alpha: p }),
        SurfaceKind::H2Horocycle => Box::new(Horocycle),
        SurfaceKind::H2GenCatenoid => Box::new(GeneralizedCatenoid { gamma: p }),
        SurfaceKind::S2Slice => Box::new(Slice { sig: Signature::sphere2(), height: p }),
        SurfaceKind::H2Slice => Box::new(Slice { sig: Signature::hyperbolic2(), height: p }),
        SurfaceKind::S2Cylinder => Box::new(VerticalCylinder { sig: Signature::sphere2() }),
        SurfaceKind::H2VerticalPlane => Box::new(VerticalCylinder { sig: Signature::hyperbolic2() }),
    }
}

/// Integrates the profile of a family over `|u| <= halfspan`.
pub fn solve_profile(spec: &CatalogSpec, step: f64, halfspan: f64) -> Result<ProfileSolution> {
    spec.validate()?;
    let formulas = formulas_of(spec);
    let ode = formulas.ode().ok_or_else(|| {
        Error::Unsupported(format!("{} is given in closed form and has no profile ODE", spec.kind))
    })?;
    if let Some(u0) = u_limit(spec)? {
        if !(halfspan < u0) {
            return Err(Error::Domain(format!(
                "{spec}: half-span {halfspan} reaches the domain boundary u0 = {u0:.12}"
            )));
        }
    }
    let (p0, dp0) = formulas.initial();
    ProfileSolution::solve(ode, p0, dp0, step, halfspan)
}

/// Dyn-compatible view of [`Formulas`] at the evaluation types used here.
trait ErasedSurface: Send + Sync {
    fn sig(&self) -> Signature;
    fn ode(&self) -> Option<ProfileOde>;
    fn initial(&self) -> (f64, f64);
    fn in_domain(&self, u: f64, v: f64) -> bool;
    fn height_coordinate(&self) -> Option<usize>;
    fn position_f64(&self, u: f64, v: f64, p: f64, dp: f64) -> [f64; 4];
    fn position_hd(&self, u: HyperDual64, v: HyperDual64, p: HyperDual64, dp: HyperDual64) -> [HyperDual64; 4];
    fn fields_f64(&self, u: f64, v: f64, p: f64, dp: f64) -> Fields<f64>;
    fn fields_hd(&self, u: HyperDual64, v: HyperDual64, p: HyperDual64, dp: HyperDual64) -> Fields<HyperDual64>;
}

impl<F: Formulas> ErasedSurface for F {
    fn sig(&self) -> Signature {
        Formulas::sig(self)
    }
    fn ode(&self) -> Option<ProfileOde> {
        Formulas::ode(self)
    }
    fn initial(&self) -> (f64, f64) {
        Formulas::initial(self)
    }
    fn in_domain(&self, u: f64, v: f64) -> bool {
        Formulas::in_domain(self, u, v)
    }
    fn height_coordinate(&self) -> Option<usize> {
        Formulas::height_coordinate(self)
    }
    fn position_f64(&self, u: f64, v: f64, p: f64, dp: f64) -> [f64; 4] {
        self.position(u, v, p, dp)
    }
    fn position_hd(&self, u: HyperDual64, v: HyperDual64, p: HyperDual64, dp: HyperDual64) -> [HyperDual64; 4] {
        self.position(u, v, p, dp)
    }
    fn fields_f64(&self, u: f64, v: f64, p: f64, dp: f64) -> Fields<f64> {
        self.fields(u, v, p, dp)
    }
    fn fields_hd(&self, u: HyperDual64, v: HyperDual64, p: HyperDual64, dp: HyperDual64) -> Fields<HyperDual64> {
        self.fields(u, v, p, dp)
    }
}

/// A built catalog surface: chart plus closed-form fundamental data.
pub trait CatalogSurface: Chart {
    fn spec(&self) -> CatalogSpec;

    fn profile(&self) -> Option<&ProfileSolution>;

    /// Open bound on `|u|` of the maximal domain, when finite.
    fn u_limit(&self) -> Option<f64>;

    /// Which coordinate is the height (`0` = `u`, `1` = `v`), if not constant.
    fn height_coordinate(&self) -> Option<usize>;

    /// `[-a, a] x [-0.5, 0.5]` with `a = 0.5`, clamped to `0.9 u₀`.
    fn default_grid(&self, h: f64) -> Result<ParameterGrid>;

    fn fundamental_closed_form(&self, grid: &ParameterGrid) -> Result<FundamentalData>;

    fn as_chart(&self) -> &dyn Chart;

    /// Closed-form `(λ, S, T, ν)` at one point.
    fn fields_at(&self, u: f64, v: f64) -> Result<(f64, Matrix2<f64>, Vector2<f64>, f64)>;
}

struct Surface {
    spec: CatalogSpec,
    formulas: Box<dyn ErasedSurface>,
    profile: Option<ProfileSolution>,
    u_limit: Option<f64>,
}

impl Surface {
    fn build(spec: CatalogSpec, config: &ProfileConfig) -> Result<Self> {
        spec.validate()?;
        let formulas = formulas_of(&spec);
        let u_limit = u_limit(&spec)?;
        let profile = match formulas.ode() {
            Some(_) => {
                let halfspan = config.halfspan.unwrap_or(match u_limit {
                    Some(u0) => 0.95 * u0,
                    None => 2.0,
                });
                Some(solve_profile(&spec, config.step, halfspan)?)
            }
            None => None,
        };
        Ok(Self { spec, formulas, profile, u_limit })
    }

    fn check_point(&self, u: f64, v: f64) -> Result<()> {
        if !self.formulas.in_domain(u, v) || self.u_limit.is_some_and(|l| !(u.abs() < l)) {
            return Err(Error::Domain(format!("({u}, {v}) outside the domain of {}", self.spec)));
        }
        Ok(())
    }

    /// `[p, p', p'', p''']` at `u`, zero for closed-form families.
    fn profile_jet(&self, u: f64) -> Result<[f64; 4]> {
        match &self.profile {
            Some(p) => p.eval_jet(u),
            None => Ok([0.0; 4]),
        }
    }

    fn lifted(&self, u: f64, v: f64, seed: Seed) -> Result<[HyperDual64; 4]> {
        let j = self.profile_jet(u)?;
        Ok([seed.u(u), seed.v(v), seed.lift_u([j[0], j[1], j[2]]), seed.lift_u([j[1], j[2], j[3]])])
    }
}

impl Chart for Surface {
    fn signature(&self) -> Signature {
        self.formulas.sig()
    }

    fn name(&self) -> String {
        self.spec.to_string()
    }

    fn is_conformal(&self) -> bool {
        true
    }

    fn eval(&self, u: f64, v: f64) -> Result<Vector4<f64>> {
        self.check_point(u, v)?;
        let [p, dp, _, _] = self.profile_jet(u)?;
        Ok(Vector4::from(self.formulas.position_f64(u, v, p, dp)))
    }

    fn analytic_jet(&self, u: f64, v: f64) -> Option<Result<ChartJet>> {
        let run = || -> Result<ChartJet> {
            self.check_point(u, v)?;
            let eval = |seed: Seed| -> Result<[HyperDual64; 4]> {
                let [a, b, p, dp] = self.lifted(u, v, seed)?;
                Ok(self.formulas.position_hd(a, b, p, dp))
            };
            let uv = eval(SEED_UV)?;
            let uu = eval(SEED_UU)?;
            let vv = eval(SEED_VV)?;
            let pick = |x: &[HyperDual64; 4], f: fn(&HyperDual64) -> f64| {
                Vector4::new(f(&x[0]), f(&x[1]), f(&x[2]), f(&x[3]))
            };
            Ok(ChartJet {
                point: pick(&uv, |d| d.re),
                du: pick(&uv, |d| d.eps1),
                dv: pick(&uv, |d| d.eps2),
                duv: pick(&uv, |d| d.eps1eps2),
                duu: pick(&uu, |d| d.eps1eps2),
                dvv: pick(&vv, |d| d.eps1eps2),
            })
        };
        Some(run())
    }
}

fn field_part(f: &Fields<HyperDual64>, part: fn(&HyperDual64) -> f64) -> (f64, Matrix2<f64>, Vector2<f64>, f64) {
    (
        part(&f.lambda),
        Matrix2::new(part(&f.shape[0][0]), part(&f.shape[0][1]), part(&f.shape[1][0]), part(&f.shape[1][1])),
        Vector2::new(part(&f.tangent[0]), part(&f.tangent[1])),
        part(&f.nu),
    )
}

impl CatalogSurface for Surface {
    fn spec(&self) -> CatalogSpec {
        self.spec
    }

    fn profile(&self) -> Option<&ProfileSolution> {
        self.profile.as_ref()
    }

    fn u_limit(&self) -> Option<f64> {
        self.u_limit
    }

    fn height_coordinate(&self) -> Option<usize> {
        self.formulas.height_coordinate()
    }

    fn default_grid(&self, h: f64) -> Result<ParameterGrid> {
        let a = match self.u_limit {
            Some(u0) => DEFAULT_HALF_WIDTH.min(0.9 * u0),
            None => DEFAULT_HALF_WIDTH,
        };
        ParameterGrid::with_spacing(-a, a, -DEFAULT_HALF_WIDTH, DEFAULT_HALF_WIDTH, h)
    }

    fn fundamental_closed_form(&self, grid: &ParameterGrid) -> Result<FundamentalData> {
        let len = grid.len();
        let (mut metric, mut shape, mut tangent, mut nus, mut jets) = (
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
        );
        for node in grid.nodes() {
            let (u, v) = grid.coords(node);
            self.check_point(u, v)?;
            let eval = |seed: Seed| -> Result<Fields<HyperDual64>> {
                let [a, b, p, dp] = self.lifted(u, v, seed)?;
                Ok(self.formulas.fields_hd(a, b, p, dp))
            };
            let (uv, uu, vv) = (eval(SEED_UV)?, eval(SEED_UU)?, eval(SEED_VV)?);
            let (l, s, t, nu) = field_part(&uv, |d| d.re);
            let (lu, su, tu, nuu) = field_part(&uv, |d| d.eps1);
            let (lv, sv, tv, nuv) = field_part(&uv, |d| d.eps2);
            let l_uv = uv.lambda.eps1eps2;
            let l_uu = uu.lambda.eps1eps2;
            let l_vv = vv.lambda.eps1eps2;
            let id = Matrix2::identity();
            metric.push(id * l);
            shape.push(s);
            tangent.push(t);
            nus.push(nu);
            jets.push(FieldJet {
                metric_gradient: [id * lu, id * lv],
                metric_hessian: [id * l_uu, id * l_uv, id * l_vv],
                shape_gradient: [su, sv],
                tangent_gradient: [tu, tv],
                nu_gradient: [nuu, nuv],
            });
        }
        FundamentalData::new(self.formulas.sig(), *grid, metric, shape, tangent, nus)?.with_jet(jets)
    }

    fn as_chart(&self) -> &dyn Chart {
        self
    }

    fn fields_at(&self, u: f64, v: f64) -> Result<(f64, Matrix2<f64>, Vector2<f64>, f64)> {
        self.check_point(u, v)?;
        let [p, dp, _, _] = self.profile_jet(u)?;
        let f = self.formulas.fields_f64(u, v, p, dp);
        let sh = f.shape;
        Ok((
            f.lambda,
            Matrix2::new(sh[0][0], sh[0][1], sh[1][0], sh[1][1]),
            Vector2::new(f.tangent[0], f.tangent[1]),
            f.nu,
        ))
    }
}

/// A named, run-time selectable surface family.
pub trait SurfaceFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn kind(&self) -> SurfaceKind;

    fn description(&self) -> &'static str;

    /// Parameter symbol and default value.
    fn parameter(&self) -> Option<(&'static str, f64)>;

    fn validate(&self, parameter: f64) -> Result<()>;

    fn build(&self, parameter: f64, config: &ProfileConfig) -> Result<Box<dyn CatalogSurface>>;
}

struct BuiltinFamily {
    kind: SurfaceKind,
    description: &'static str,
}

impl SurfaceFamily for BuiltinFamily {
    fn name(&self) -> &'static str {
        self.kind.name()
    }

    fn kind(&self) -> SurfaceKind {
        self.kind
    }

    fn description(&self) -> &'static str {
        self.description
    }

    fn parameter(&self) -> Option<(&'static str, f64)> {
        self.kind.parameter()
    }

    fn validate(&self, parameter: f64) -> Result<()> {
        CatalogSpec::new(self.kind, parameter).validate()
    }

    fn build(&self, parameter: f64, config: &ProfileConfig) -> Result<Box<dyn CatalogSurface>> {
        Ok(Box::new(Surface::build(CatalogSpec::new(self.kind, parameter), config)?))
    }
}

/// Registry of surface families, looked up by name.
pub struct Catalog {
    families: Vec<Box<dyn SurfaceFamily>>,
}

impl Catalog {
    pub fn empty() -> Self {
        Self { families: Vec::new() }
    }

    /// All built-in families.
    pub fn standard() -> Self {
        let mut c = Self::empty();
        let entries = [
            (SurfaceKind::S2Helicoid, "helicoid in S^2 x R, profile phi'' = beta^2 sin(phi) cos(phi)"),
            (SurfaceKind::S2Unduloid, "unduloid in S^2 x R, |alpha| > 1"),
            (SurfaceKind::H2Helicoid, "helicoid in H^2 x R, profile phi'' = beta^2 sinh(phi) cosh(phi)"),
            (SurfaceKind::H2Catenoid, "catenoid in H^2 x R, alpha != 0"),
            (SurfaceKind::H2Horocycle, "minimal surface in H^2 x R foliated by horocycles"),
            (SurfaceKind::H2GenCatenoid, "generalized catenoid in H^2 x R, 0 < |gamma| < 1"),
            (SurfaceKind::S2Slice, "horizontal slice S^2 x {t}"),
            (SurfaceKind::H2Slice, "horizontal slice H^2 x {t}"),
            (SurfaceKind::S2Cylinder, "vertical cylinder over a great circle"),
            (SurfaceKind::H2VerticalPlane, "vertical plane over a geodesic of H^2"),
        ];
        for (kind, description) in entries {
            c.register(Box::new(BuiltinFamily { kind, description }));
        }
        c
    }

    /// Adds a family; a later registration under the same name replaces the earlier one.
    pub fn register(&mut self, family: Box<dyn SurfaceFamily>) {
        self.families.retain(|f| f.name() != family.name());
        self.families.push(family);
    }

    pub fn families(&self) -> impl Iterator<Item = &dyn SurfaceFamily> {
        self.families.iter().map(|f| f.as_ref())
    }

    pub fn get(&self, name: &str) -> Option<&dyn SurfaceFamily> {
        self.families.iter().find(|f| f.name() == name).map(|f| f.as_ref())
    }

    /// Parses `name` or `name:parameter`.
    pub fn parse(&self, text: &str) -> Result<CatalogSpec> {
        let (name, param) = match text.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p)),
            None => (text.trim(), None),
        };
        let family = self.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.families.iter().map(|f| f.name()).collect();
            Error::Validation(format!("unknown surface '{name}' (known: {})", known.join(", ")))
        })?;
        let parameter = match (param, family.parameter()) {
            (Some(p), Some(_)) => parse_parameter(p)?,
            (None, Some((_, default))) => default,
            (None, None) => 0.0,
            (Some(_), None) => {
                return Err(Error::Validation(format!("surface '{name}' takes no parameter")))
            }
        };
        family.validate(parameter)?;
        Ok(CatalogSpec::new(family.kind(), parameter))
    }

    pub fn build(&self, spec: &CatalogSpec, config: &ProfileConfig) -> Result<Box<dyn CatalogSurface>> {
        let family = self
            .get(spec.kind.name())
            .ok_or_else(|| Error::Validation(format!("surface '{}' is not registered", spec.kind)))?;
        family.build(spec.parameter, config)
    }
}

/// Builds a catalog surface with default profile settings.
pub fn surface(spec: &CatalogSpec) -> Result<Box<dyn CatalogSurface>> {
    Catalog::standard().build(spec, &ProfileConfig::default())
}

/// Closed-form fundamental data of `spec` on `grid`.
pub fn fundamental_closed_form(spec: &CatalogSpec, grid: &ParameterGrid) -> Result<FundamentalData> {
    surface(spec)?.fundamental_closed_form(grid)
}
