//! File formats: the JSON fundamental-data document and polygonal meshes.

mod document;
mod mesh;

pub use document::{DataDocument, FORMAT_NAME, FORMAT_VERSION};
pub use mesh::{
    write_mesh, DropCoordinate, MeshDocument, MeshProjection, PoincareDisk, ProjectionRegistry, Stereographic,
};
