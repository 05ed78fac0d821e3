use std::fs;
use std::path::Path;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::ambient::Signature;
use crate::error::{Error, Result};
use crate::fundamental::FundamentalData;
use crate::grid::ParameterGrid;

pub const FORMAT_NAME: &str = "mxr-fundamental-data";
pub const FORMAT_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SignatureRecord {
    kappa: i8,
    n: usize,
}

/// Fundamental data as a JSON document.
///
/// Node `(i, j)` has flat index `k = i * nv + j`. `g` and `S` hold four
/// entries per node in row-major order (`S[r][c]` is the `∂_r` component of
/// `S ∂_c`), `T` two and `nu` one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataDocument {
    pub format: String,
    pub version: String,
    signature: SignatureRecord,
    pub grid: ParameterGrid,
    pub g: Vec<f64>,
    #[serde(rename = "S")]
    pub s: Vec<f64>,
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    pub nu: Vec<f64>,
}

fn row_major(m: &Matrix2<f64>) -> [f64; 4] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

impl DataDocument {
    pub fn from_data(data: &FundamentalData) -> Self {
        let sig = data.signature();
        Self {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION.into(),
            signature: SignatureRecord { kappa: sig.kappa(), n: sig.n() },
            grid: *data.grid(),
            g: data.metric().iter().flat_map(row_major).collect(),
            s: data.shape().iter().flat_map(row_major).collect(),
            t: data.tangent().iter().flat_map(|t| [t[0], t[1]]).collect(),
            nu: data.nu().to_vec(),
        }
    }

    pub fn signature(&self) -> Result<Signature> {
        Signature::new(self.signature.kappa, self.signature.n)
    }

    /// Checks the header and array lengths, then builds the data (metric
    /// validity is checked by [`FundamentalData::new`]).
    pub fn to_data(&self) -> Result<FundamentalData> {
        if self.format != FORMAT_NAME {
            return Err(Error::Validation(format!("unknown document format '{}'", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported document version '{}' (expected {FORMAT_VERSION})",
                self.version
            )));
        }
        let sig = self.signature()?;
        let grid = ParameterGrid::new(
            self.grid.u_min,
            self.grid.u_max,
            self.grid.v_min,
            self.grid.v_max,
            self.grid.nu,
            self.grid.nv,
        )?;
        let n = grid.len();
        for (name, len, per) in [("g", self.g.len(), 4), ("S", self.s.len(), 4), ("T", self.t.len(), 2), ("nu", self.nu.len(), 1)] {
            if len != n * per {
                return Err(Error::Structural(format!(
                    "array '{name}' has {len} entries, expected {} ({n} nodes x {per})",
                    n * per
                )));
            }
        }
        let m2 = |a: &[f64]| Matrix2::new(a[0], a[1], a[2], a[3]);
        FundamentalData::new(
            sig,
            grid,
            self.g.chunks(4).map(m2).collect(),
            self.s.chunks(4).map(m2).collect(),
            self.t.chunks(2).map(|a| Vector2::new(a[0], a[1])).collect(),
            self.nu.clone(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("malformed data document: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::catalog::{fundamental_closed_form, CatalogSpec, SurfaceKind};

    #[test]
    fn catalog_data_round_trips_through_a_file() {
        let spec = CatalogSpec::default_for(SurfaceKind::H2GenCatenoid);
        let grid = ParameterGrid::centered(0.2, 0.05).unwrap();
        let data = fundamental_closed_form(&spec, &grid).unwrap();
        let doc = DataDocument::from_data(&data);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.json");
        doc.write(&path).unwrap();
        let back = DataDocument::read(&path).unwrap();
        assert_eq!(back, doc);
        let again = back.to_data().unwrap();
        assert_eq!(again.metric(), data.metric());
        assert_eq!(again.shape(), data.shape());
        assert_eq!(again.tangent(), data.tangent());
        assert_eq!(again.nu(), data.nu());
    }

    #[test]
    fn wrong_lengths_and_versions_are_rejected() {
        let spec = CatalogSpec::default_for(SurfaceKind::S2Slice);
        let grid = ParameterGrid::centered(0.2, 0.1).unwrap();
        let doc = DataDocument::from_data(&fundamental_closed_form(&spec, &grid).unwrap());
        let mut short = doc.clone();
        short.nu.pop();
        assert!(matches!(short.to_data(), Err(Error::Structural(m)) if m.contains("nu")));
        let mut old = doc.clone();
        old.version = "0.1".into();
        assert!(matches!(old.to_data(), Err(Error::Validation(_))));
        assert!(DataDocument::from_json("{").is_err());
    }

    proptest! {
        #[test]
        fn numeric_payloads_round_trip_bitwise(
            values in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 9),
        ) {
            let grid = ParameterGrid::new(0.0, 1.0, 0.0, 1.0, 3, 3).unwrap();
            let doc = DataDocument {
                format: FORMAT_NAME.into(),
                version: FORMAT_VERSION.into(),
                signature: SignatureRecord { kappa: -1, n: 2 },
                grid,
                g: values.iter().cycle().take(36).copied().collect(),
                s: values.iter().rev().cycle().take(36).copied().collect(),
                t: values.iter().cycle().take(18).copied().collect(),
                nu: values.clone(),
            };
            let back = DataDocument::from_json(&doc.to_json().unwrap()).unwrap();
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back.g), bits(&doc.g));
            prop_assert_eq!(bits(&back.s), bits(&doc.s));
            prop_assert_eq!(bits(&back.t), bits(&doc.t));
            prop_assert_eq!(bits(&back.nu), bits(&doc.nu));
        }
    }
}
