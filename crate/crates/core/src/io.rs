//! JSON shapes for groups and p-adic images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matgroup::MatGroup;
use crate::modmat::Mat2;

/// `{"modulus": n, "generators": [[a, b, c, d], ...]}`; the optional fields
/// are filled in on output only.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub modulus: u64,
    pub generators: Vec<[i64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<[i64; 4]>>,
}

impl GroupSpec {
    pub fn to_group(&self) -> Result<MatGroup> {
        MatGroup::from_literals(self.modulus, &self.generators)
    }

    pub fn from_group(g: &MatGroup, with_elements: bool) -> Result<Self> {
        let lit = |m: &Mat2| m.entries().map(|e| e as i64);
        Ok(Self {
            modulus: g.modulus() as u64,
            generators: g.generators().iter().map(lit).collect(),
            order: Some(g.order()?),
            elements: if with_elements {
                Some(g.elements()?.iter().map(lit).collect())
            } else {
                None
            },
        })
    }
}

/// `{"p": p, "depth": s, "group": {...}}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ImageSpec {
    pub p: u64,
    pub depth: u32,
    pub group: GroupSpec,
}

impl ImageSpec {
    pub fn to_image(&self) -> Result<crate::padic::PAdicImage> {
        crate::padic::PAdicImage::new(self.p, self.depth, self.group.to_group()?)
    }
}

pub fn parse_group(text: &str) -> Result<MatGroup> {
    let spec: GroupSpec =
        serde_json::from_str(text).map_err(|e| Error::MalformedRecord(e.to_string()))?;
    spec.to_group()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_round_trip() {
        let g = parse_group(r#"{"modulus": 3, "generators": [[0,-1,1,0],[1,1,0,1]]}"#).unwrap();
        assert_eq!(g.order().unwrap(), 24);
        let spec = GroupSpec::from_group(&g, false).unwrap();
        assert_eq!(spec.order, Some(24));
        let back = spec.to_group().unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(parse_group(r#"{"modulus": 3, "gens": []}"#).is_err());
    }
}
