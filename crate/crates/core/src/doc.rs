//! JSON documents describing a space, a norm on it and some vectors.
//!
//! ```json
//! {
//!   "atoms": [1.0, 1.0, 2.0, 0.5],
//!   "norm": { "family": "amalgam", "r": 1, "s": "inf", "blocks": [[0, 2], [2, 4]] },
//!   "vectors": [[1.0, -2.0, 0.0, 3.0]]
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::{NormFamily, QuasiNorm};
use crate::space::{AtomicSpace, LatticeVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDocument {
    /// Atom masses.
    pub atoms: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormFamily>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub space: AtomicSpace,
    pub norm: Option<QuasiNorm>,
    pub vectors: Vec<LatticeVector>,
}

impl SpaceDocument {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Document(e.to_string()))
    }

    /// Validates everything against the atoms.
    pub fn load(&self) -> Result<Loaded> {
        let space = AtomicSpace::new(self.atoms.clone())?;
        let norm = self
            .norm
            .clone()
            .map(|f| QuasiNorm::new(f, space.clone()))
            .transpose()?;
        let vectors = self
            .vectors
            .iter()
            .map(|v| space.vector(v.clone()))
            .collect::<Result<_>>()?;
        Ok(Loaded {
            space,
            norm,
            vectors,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

pub fn load_str(json: &str) -> Result<Loaded> {
    SpaceDocument::parse(json)?.load()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::Index;

    #[test]
    fn amalgam_document() {
        let json = r#"{
            "atoms": [1.0, 1.0, 2.0, 0.5],
            "norm": { "family": "amalgam", "r": 1, "s": "inf", "blocks": [[0, 2], [2, 4]] },
            "vectors": [[1.0, -2.0, 0.0, 3.0]]
        }"#;
        let doc = load_str(json).unwrap();
        let norm = doc.norm.unwrap();
        // blocks: 1 + 2 = 3 and 0 + 1.5 = 1.5
        assert!((norm.eval(&doc.vectors[0]).unwrap() - 3.0).abs() < 1e-15);
        assert!(matches!(
            norm.family(),
            NormFamily::Amalgam {
                s: Index::Infinite,
                ..
            }
        ));
    }

    #[test]
    fn round_trip_and_lorentz() {
        let json = r#"{"atoms":[1,1],"norm":{"family":"lorentz_lambda","r":2,"weight":{"kind":"power","c":1,"a":0}}}"#;
        let doc = SpaceDocument::parse(json).unwrap();
        let again = SpaceDocument::parse(&doc.to_json()).unwrap();
        assert_eq!(doc, again);
        assert!(again.load().unwrap().vectors.is_empty());
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(load_str("{"), Err(Error::Document(_))));
        assert!(load_str(r#"{"atoms":[1,-1]}"#).is_err());
        assert!(load_str(r#"{"atoms":[1],"vectors":[[1,2]]}"#).is_err());
        assert!(load_str(
            r#"{"atoms":[1,1,1],"norm":{"family":"amalgam","r":1,"s":1,"blocks":[[0,2]]}}"#
        )
        .is_err());
        assert!(load_str(r#"{"atoms":[1],"extra":0}"#).is_err());
        assert!(load_str(r#"{"atoms":[1],"norm":{"family":"weighted_lp","p":0}}"#).is_err());
    }
}
