use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, is_prime};
use crate::error::{Error, Result};
use crate::io::GroupSpec;
use crate::matgroup::MatGroup;

/// Reduction type of a curve at a prime ideal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ReductionType {
    Good { supersingular: Option<bool> },
    MultSplit,
    MultNonSplit,
    Additive { potentially_good: bool },
}

impl ReductionType {
    pub fn is_good(self) -> bool {
        matches!(self, ReductionType::Good { .. })
    }

    pub fn is_multiplicative(self) -> bool {
        matches!(self, ReductionType::MultSplit | ReductionType::MultNonSplit)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReductionType::Good { supersingular: None } => "good",
            ReductionType::Good { supersingular: Some(false) } => "good_ordinary",
            ReductionType::Good { supersingular: Some(true) } => "good_supersingular",
            ReductionType::MultSplit => "split_multiplicative",
            ReductionType::MultNonSplit => "nonsplit_multiplicative",
            ReductionType::Additive { potentially_good: true } => "additive_potentially_good",
            ReductionType::Additive { potentially_good: false } => {
                "additive_potentially_multiplicative"
            }
        }
    }
}

impl TryFrom<String> for ReductionType {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        Ok(match s.as_str() {
            "good" => ReductionType::Good { supersingular: None },
            "good_ordinary" => ReductionType::Good { supersingular: Some(false) },
            "good_supersingular" => ReductionType::Good { supersingular: Some(true) },
            "split_multiplicative" => ReductionType::MultSplit,
            "nonsplit_multiplicative" => ReductionType::MultNonSplit,
            "additive_potentially_good" => ReductionType::Additive { potentially_good: true },
            "additive_potentially_multiplicative" => {
                ReductionType::Additive { potentially_good: false }
            }
            other => return Err(format!("unknown reduction type {other:?}")),
        })
    }
}

impl From<ReductionType> for String {
    fn from(r: ReductionType) -> String {
        r.as_str().to_string()
    }
}

impl fmt::Display for ReductionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdealData {
    /// Ramification index of the ideal in `F / Q`.
    pub e: u64,
    pub reduction: ReductionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_ideal_of_j: Option<i64>,
}

/// Data at every prime ideal above one rational prime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalData {
    pub residue_characteristic: u64,
    pub ideals: Vec<IdealData>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmData {
    /// `F = K(j(E))` for the CM field `K`.
    #[serde(rename = "field_is_K_of_j")]
    pub field_is_k_of_j: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclotomicIntersection {
    pub p: u64,
    pub k: u32,
    /// `F ∩ Q(ζ_{p^k}) = Q`.
    pub trivial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclotomicDepth {
    pub p: u64,
    /// Largest `r` with `Q(ζ_{p^r}) ⊆ F`.
    pub r: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclotomicData {
    #[serde(default)]
    pub intersections: Vec<CyclotomicIntersection>,
    #[serde(default)]
    pub r: Vec<CyclotomicDepth>,
}

/// Everything the audit may know about a curve `E / F`. Every field is
/// optional; rules whose data is absent report `not applicable`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Primes ramified in `F / Q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_disc_primes: Option<Vec<u64>>,
    /// Rational primes below the primes of bad reduction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conductor_norm_primes: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local: Option<Vec<LocalData>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cm: Option<CmData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclotomic_trivial: Option<CyclotomicData>,
    /// The `n` with `ζ_n ∈ F`; together with their divisors this list is
    /// taken to be complete.
    #[serde(default, rename = "zeta_in_F", skip_serializing_if = "Option::is_none")]
    pub zeta_in_f: Option<Vec<u64>>,
    /// Image of the mod-`m` representation, keyed by `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<BTreeMap<u32, GroupSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entanglement_set: Option<Vec<u64>>,
    /// Whether `j(E)^{1/3} ∈ F`.
    #[serde(default, rename = "j_cube_root_in_F", skip_serializing_if = "Option::is_none")]
    pub j_cube_root_in_f: Option<bool>,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedRecord(msg.into())
}

fn check_primes(field: &str, v: &Option<Vec<u64>>) -> Result<()> {
    if let Some(v) = v {
        if let Some(q) = v.iter().find(|q| !is_prime(**q)) {
            return Err(malformed(format!("{field}: {q} is not prime")));
        }
    }
    Ok(())
}

impl CurveRecord {
    pub fn from_json(text: &str) -> Result<Self> {
        let rec: CurveRecord = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        rec.validate()?;
        Ok(rec)
    }

    /// Structural and internal-consistency checks.
    pub fn validate(&self) -> Result<()> {
        check_primes("field_disc_primes", &self.field_disc_primes)?;
        check_primes("conductor_norm_primes", &self.conductor_norm_primes)?;
        check_primes("entanglement_set", &self.entanglement_set)?;
        if let Some(local) = &self.local {
            let mut seen = Vec::new();
            for l in local {
                let p = l.residue_characteristic;
                if !is_prime(p) {
                    return Err(malformed(format!("local: {p} is not prime")));
                }
                if seen.contains(&p) {
                    return Err(malformed(format!("local: residue characteristic {p} repeated")));
                }
                seen.push(p);
                if l.ideals.is_empty() {
                    return Err(malformed(format!("local[{p}].ideals is empty")));
                }
                for id in &l.ideals {
                    if id.e == 0 {
                        return Err(malformed(format!("local[{p}]: ramification index 0")));
                    }
                    if id.e > 1 && self.ramified(p) == Some(false) {
                        return Err(malformed(format!(
                            "local[{p}]: e = {} but {p} is not in field_disc_primes",
                            id.e
                        )));
                    }
                    if !id.reduction.is_good() {
                        if let Some(c) = &self.conductor_norm_primes {
                            if !c.contains(&p) {
                                return Err(malformed(format!(
                                    "local[{p}]: bad reduction but {p} is not in conductor_norm_primes"
                                )));
                            }
                        }
                    }
                }
            }
        }
        if let Some(c) = &self.cyclotomic_trivial {
            for x in &c.intersections {
                if !is_prime(x.p) || x.k == 0 {
                    return Err(malformed(format!(
                        "cyclotomic_trivial: bad entry p = {}, k = {}",
                        x.p, x.k
                    )));
                }
                if !x.trivial && x.p.pow(x.k) > 2 && self.ramified(x.p) == Some(false) {
                    return Err(malformed(format!(
                        "cyclotomic_trivial: F meets Q(ζ_{}^{}) but {} is unramified in F",
                        x.p, x.k, x.p
                    )));
                }
            }
            for x in &c.r {
                if !is_prime(x.p) {
                    return Err(malformed(format!("cyclotomic_trivial.r: {} is not prime", x.p)));
                }
                let floor = if x.p == 2 { 1 } else { 0 };
                if x.r < floor {
                    return Err(malformed("cyclotomic_trivial.r: Q(ζ_2) = Q lies in every field"));
                }
                if x.r > floor && self.ramified(x.p) == Some(false) {
                    return Err(malformed(format!(
                        "cyclotomic_trivial.r: r = {} but {} is unramified in F",
                        x.r, x.p
                    )));
                }
            }
        }
        if let Some(z) = &self.zeta_in_f {
            for &n in z {
                if n == 0 {
                    return Err(malformed("zeta_in_F: 0 is not a valid order"));
                }
                for (p, a) in factorize(n) {
                    if p.pow(a) > 2 && self.ramified(p) == Some(false) {
                        return Err(malformed(format!(
                            "zeta_in_F: ζ_{n} ∈ F but {p} is unramified in F"
                        )));
                    }
                }
            }
        }
        if let Some(images) = &self.images {
            for (level, g) in images {
                if g.modulus != *level as u64 {
                    return Err(malformed(format!(
                        "images[{level}]: group is modulo {}",
                        g.modulus
                    )));
                }
                g.to_group()
                    .map_err(|e| malformed(format!("images[{level}]: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        self.label.as_deref().unwrap_or("E")
    }

    /// Whether `p` ramifies in `F`, if known.
    pub fn ramified(&self, p: u64) -> Option<bool> {
        self.field_disc_primes.as_ref().map(|d| d.contains(&p))
    }

    pub fn local_at(&self, p: u64) -> Option<&LocalData> {
        self.local
            .as_ref()?
            .iter()
            .find(|l| l.residue_characteristic == p)
    }

    /// Whether `F ∩ Q(ζ_{p^k}) = Q`, from explicit entries or, failing
    /// that, from `p` being unramified in `F`.
    pub fn cyclotomic_trivial_at(&self, p: u64, k: u32) -> Option<bool> {
        if p.pow(k) <= 2 {
            return Some(true);
        }
        if let Some(c) = &self.cyclotomic_trivial {
            for x in &c.intersections {
                if x.p == p && x.trivial && x.k >= k {
                    return Some(true);
                }
                if x.p == p && !x.trivial && x.k <= k {
                    return Some(false);
                }
            }
        }
        match self.ramified(p) {
            Some(false) => Some(true),
            _ => None,
        }
    }

    /// Largest `r` with `Q(ζ_{p^r}) ⊆ F`.
    pub fn cyclotomic_depth(&self, p: u64) -> Option<u32> {
        if let Some(c) = &self.cyclotomic_trivial {
            if let Some(x) = c.r.iter().find(|x| x.p == p) {
                return Some(x.r);
            }
        }
        match self.ramified(p) {
            Some(false) => Some(if p == 2 { 1 } else { 0 }),
            _ => None,
        }
    }

    /// Whether `ζ_n ∈ F`, if it can be decided from the record.
    pub fn zeta_in_field(&self, n: u64) -> Option<bool> {
        if n <= 2 {
            return Some(true);
        }
        if let Some(z) = &self.zeta_in_f {
            return Some(z.iter().any(|&x| x % n == 0));
        }
        if self.field_disc_primes.is_some()
            && factorize(n)
                .into_iter()
                .any(|(p, a)| p.pow(a) > 2 && self.ramified(p) == Some(false))
        {
            return Some(false);
        }
        None
    }

    pub fn image_at(&self, level: u64) -> Option<Result<MatGroup>> {
        let images = self.images.as_ref()?;
        let spec = images.get(&u32::try_from(level).ok()?)?;
        Some(spec.to_group())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_and_full() {
        let r = CurveRecord::from_json("{}").unwrap();
        assert_eq!(r, CurveRecord::default());
        let text = r#"{
            "label": "11.a2",
            "field_disc_primes": [],
            "conductor_norm_primes": [11],
            "local": [{"residue_characteristic": 11, "ideals": [{"e": 1, "reduction": "split_multiplicative", "v_ideal_of_j": -5}]}],
            "zeta_in_F": [2],
            "images": {"5": {"modulus": 5, "generators": [[1,1,0,1]]}}
        }"#;
        let r = CurveRecord::from_json(text).unwrap();
        assert_eq!(r.local_at(11).unwrap().ideals[0].v_ideal_of_j, Some(-5));
        assert_eq!(r.zeta_in_field(5), Some(false));
        assert_eq!(r.cyclotomic_trivial_at(5, 2), Some(true));
        assert_eq!(r.image_at(5).unwrap().unwrap().order().unwrap(), 5);
    }

    #[test]
    fn unknown_reduction_is_rejected() {
        let text = r#"{"local": [{"residue_characteristic": 7, "ideals": [{"e": 1, "reduction": "wobbly"}]}]}"#;
        let err = CurveRecord::from_json(text).unwrap_err();
        assert!(err.to_string().contains("wobbly"));
    }

    #[test]
    fn inconsistent_records_are_rejected() {
        let ramified = r#"{"field_disc_primes": [], "local": [{"residue_characteristic": 7, "ideals": [{"e": 2, "reduction": "good"}]}]}"#;
        assert!(CurveRecord::from_json(ramified).is_err());
        let zeta = r#"{"field_disc_primes": [], "zeta_in_F": [3]}"#;
        assert!(CurveRecord::from_json(zeta).is_err());
        let level = r#"{"images": {"4": {"modulus": 5, "generators": []}}}"#;
        assert!(CurveRecord::from_json(level).is_err());
    }

    #[test]
    fn reduction_round_trip() {
        for s in [
            "good",
            "good_ordinary",
            "good_supersingular",
            "split_multiplicative",
            "nonsplit_multiplicative",
            "additive_potentially_good",
            "additive_potentially_multiplicative",
        ] {
            let r = ReductionType::try_from(s.to_string()).unwrap();
            assert_eq!(String::from(r), s);
        }
    }
}
