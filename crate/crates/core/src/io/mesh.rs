use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::ambient::{AmbientVector, Signature};
use crate::error::{Error, Result};
use crate::grid::ParameterGrid;

/// Map from the ambient model `M^2 x R ⊂ R^4` to 3-space for display.
pub trait MeshProjection {
    fn name(&self) -> &'static str;

    /// `None` when any model is accepted.
    fn kappa(&self) -> Option<i8> {
        None
    }

    fn project(&self, p: &[f64]) -> [f64; 3];
}

/// Keeps three of the four ambient coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct DropCoordinate {
    pub dropped: usize,
}

impl MeshProjection for DropCoordinate {
    fn name(&self) -> &'static str {
        "embed4d-drop-coordinate"
    }

    fn project(&self, p: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (slot, x) in out.iter_mut().zip(p.iter().enumerate().filter(|(i, _)| *i != self.dropped).map(|(_, x)| x)) {
            *slot = *x;
        }
        out
    }
}

/// Stereographic projection of `S^2` from `(-1, 0, 0)`, height kept.
#[derive(Debug, Clone, Copy, Default)]
pub struct Stereographic;

impl MeshProjection for Stereographic {
    fn name(&self) -> &'static str {
        "stereographic"
    }

    fn kappa(&self) -> Option<i8> {
        Some(1)
    }

    fn project(&self, p: &[f64]) -> [f64; 3] {
        let d = 1.0 + p[0];
        [p[1] / d, p[2] / d, p[3]]
    }
}

/// Poincaré disk model of `H^2`, height kept.
#[derive(Debug, Clone, Copy, Default)]
pub struct PoincareDisk;

impl MeshProjection for PoincareDisk {
    fn name(&self) -> &'static str {
        "poincare-disk"
    }

    fn kappa(&self) -> Option<i8> {
        Some(-1)
    }

    fn project(&self, p: &[f64]) -> [f64; 3] {
        let d = 1.0 + p[0];
        [p[1] / d, p[2] / d, p[3]]
    }
}

/// Projection models looked up by tag.
pub struct ProjectionRegistry {
    models: Vec<Box<dyn MeshProjection>>,
}

impl ProjectionRegistry {
    pub fn standard() -> Self {
        Self {
            models: vec![Box::new(DropCoordinate::default()), Box::new(Stereographic), Box::new(PoincareDisk)],
        }
    }

    /// Adds a model, replacing any with the same tag.
    pub fn register(&mut self, model: Box<dyn MeshProjection>) {
        self.models.retain(|m| m.name() != model.name());
        self.models.push(model);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.models.iter().map(|m| m.name())
    }

    pub fn get(&self, tag: &str) -> Result<&dyn MeshProjection> {
        self.models.iter().find(|m| m.name() == tag).map(|m| m.as_ref()).ok_or_else(|| {
            Error::Validation(format!(
                "unknown mesh model '{tag}' (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    /// Default display model for a signature.
    pub fn default_for(&self, sig: &Signature) -> &'static str {
        if sig.kappa() > 0 {
            "stereographic"
        } else {
            "poincare-disk"
        }
    }
}

/// Vertices in 3-space and quad faces (0-based, counter-clockwise in `(u, v)`).
#[derive(Debug, Clone, PartialEq)]
pub struct MeshDocument {
    pub model: String,
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 4]>,
}

impl MeshDocument {
    /// Projects samples stored in node order `i * nv + j`; faces follow the
    /// same row-major order.
    pub fn from_samples(
        points: &[AmbientVector],
        grid: &ParameterGrid,
        sig: &Signature,
        model: &dyn MeshProjection,
    ) -> Result<Self> {
        if let Some(k) = model.kappa() {
            if k != sig.kappa() {
                return Err(Error::Validation(format!(
                    "mesh model '{}' needs kappa = {k}, surface lives in {sig}",
                    model.name()
                )));
            }
        }
        if points.len() != grid.len() {
            return Err(Error::Structural(format!("{} samples for a grid of {} nodes", points.len(), grid.len())));
        }
        for p in points {
            p.check_dim(sig)?;
        }
        let vertices = points.iter().map(|p| model.project(p.as_slice())).collect();
        let nv = grid.nv;
        let mut faces = Vec::with_capacity((grid.nu - 1) * (nv - 1));
        for i in 0..grid.nu - 1 {
            for j in 0..nv - 1 {
                let a = i * nv + j;
                faces.push([a, a + nv, a + nv + 1, a + 1]);
            }
        }
        Ok(Self { model: model.name().into(), vertices, faces })
    }

    /// Wavefront OBJ text with 1-based indices.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# model: {}", self.model);
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1, f[3] + 1);
        }
        out
    }

    pub fn from_obj(text: &str) -> Result<Self> {
        let bad = |line: usize| Error::Validation(format!("malformed OBJ line {line}"));
        let mut doc = Self { model: String::new(), vertices: Vec::new(), faces: Vec::new() };
        for (n, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("#") => {
                    if let Some(tag) = line.strip_prefix("# model: ") {
                        doc.model = tag.trim().into();
                    }
                }
                Some("v") => {
                    let xs: Vec<f64> = parts.map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad(n + 1))?;
                    doc.vertices.push(xs.try_into().map_err(|_| bad(n + 1))?);
                }
                Some("f") => {
                    let ix: Vec<usize> = parts
                        .map(|s| s.split('/').next().unwrap_or("").parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad(n + 1))?;
                    let ix: [usize; 4] = ix.try_into().map_err(|_| bad(n + 1))?;
                    doc.faces.push(ix.map(|k| k - 1));
                }
                _ => {}
            }
        }
        Ok(doc)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_obj())?;
        Ok(())
    }
}

/// Projects samples with the model named `tag` and writes an OBJ file.
pub fn write_mesh(points: &[AmbientVector], grid: &ParameterGrid, sig: &Signature, tag: &str, path: &Path) -> Result<MeshDocument> {
    let registry = ProjectionRegistry::standard();
    let doc = MeshDocument::from_samples(points, grid, sig, registry.get(tag)?)?;
    doc.write(path)?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{surface, CatalogSpec, SurfaceKind};

    fn samples(kind: SurfaceKind, n: usize) -> (Vec<AmbientVector>, ParameterGrid, Signature) {
        let s = surface(&CatalogSpec::default_for(kind)).unwrap();
        let g = s.default_grid(0.1).unwrap();
        let grid = ParameterGrid::new(g.u_min, g.u_max, g.v_min, g.v_max, n, n).unwrap();
        let pts = grid
            .nodes()
            .map(|node| {
                let (u, v) = grid.coords(node);
                AmbientVector::from_slice(s.eval(u, v).unwrap().as_slice())
            })
            .collect();
        (pts, grid, s.signature())
    }

    #[test]
    fn horocycle_surface_lies_in_the_disk() {
        let (pts, grid, sig) = samples(SurfaceKind::H2Horocycle, 60);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c0.obj");
        let doc = write_mesh(&pts, &grid, &sig, "poincare-disk", &path).unwrap();
        assert_eq!(doc.vertices.len(), 3600);
        assert_eq!(doc.faces.len(), 59 * 59);
        assert!(doc.vertices.iter().all(|v| v[0] * v[0] + v[1] * v[1] < 1.0));
        let back = MeshDocument::from_obj(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back.model, "poincare-disk");
        assert_eq!(back.faces, doc.faces);
        assert_eq!(back.vertices, doc.vertices);
    }

    #[test]
    fn slice_mesh_is_flat() {
        let (pts, grid, sig) = samples(SurfaceKind::S2Slice, 12);
        let doc = MeshDocument::from_samples(&pts, &grid, &sig, &Stereographic).unwrap();
        let t0 = doc.vertices[0][2];
        assert!(doc.vertices.iter().all(|v| v[2] == t0));
        assert_eq!(doc.faces[0], [0, 12, 13, 1]);
    }

    #[test]
    fn models_check_the_curvature_sign() {
        let (pts, grid, sig) = samples(SurfaceKind::S2Helicoid, 5);
        assert!(matches!(MeshDocument::from_samples(&pts, &grid, &sig, &PoincareDisk), Err(Error::Validation(_))));
        let reg = ProjectionRegistry::standard();
        assert!(reg.get("embed4d-drop-coordinate").is_ok());
        assert!(matches!(reg.get("ply"), Err(Error::Validation(_))));
        let dropped = DropCoordinate { dropped: 2 }.project(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(dropped, [1.0, 2.0, 4.0]);
    }
}
