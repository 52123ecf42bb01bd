//! The fixture corpus behind `verify-paper`.
//!
//! A fixture names a computation (`check`) and the JSON it must produce
//! (`expected`). Objects in `expected` are matched key by key, so a fixture
//! only pins the fields it cares about; everything else must be equal.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use coincide_core::io::{GroupSpec, ImageSpec};
use coincide_core::lifting::{self, SearchConfig};
use coincide_core::modmat::gl2_elements;
use coincide_core::rules::{audit, audit_pair, CurveRecord};
use coincide_core::xmodular;
use coincide_core::{gl2_order, sl2_order, Mat2, MatGroup};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ingest::parse_json;

const BUNDLED: &str = include_str!("../fixtures/corpus.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub id: String,
    pub description: String,
    pub citation: String,
    /// Where the expected value comes from: `stated` (printed in the source
    /// text), `trivial`, or `derived` (with `oracle` naming the method).
    pub basis: Basis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
    pub check: Check,
    pub expected: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Stated,
    Trivial,
    Derived,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// `{"formula", "enumerated"}`.
    Gl2Order { n: u64 },
    /// `{"order", "index_in_gl2"}`.
    GroupOrder { group: GroupSpec },
    /// `{"order", "index", "index_in_sl2"}` of the derived subgroup.
    Derived { group: GroupSpec },
    /// `{"invariants", "class_order"}` of `G / N`, `N` the derived subgroup
    /// unless given; `class_order` is that of `generator`, if given.
    Abelian {
        group: GroupSpec,
        #[serde(default)]
        sub: Option<GroupSpec>,
        #[serde(default)]
        generator: Option<[i64; 4]>,
    },
    /// `{"order", "normal"}` of `group` inside `ambient`.
    Normal { group: GroupSpec, ambient: GroupSpec },
    /// `{"order", "exponent"}` of the reduction kernel.
    Kernel { from: u64, to: u64 },
    /// `{"order", "reduced_order"}` of the image modulo `to`.
    Reduce { group: GroupSpec, to: u64 },
    /// `{"status", "witness_order"}`.
    ElementLift { modulus: u64, matrix: [i64; 4], to: u64 },
    /// `{"status", "witness_order"}`.
    GroupLift { group: GroupSpec, to: u64 },
    /// `{"splits", "order"}`.
    Complement { group: GroupSpec, base: u64 },
    /// The index profile.
    Profile { image: ImageSpec, kmax: u32 },
    /// `{"overall", "verdicts": {rule: verdict}}`.
    /// Records are kept as raw JSON: integer map keys do not survive the
    /// buffering done for tagged enums.
    Audit {
        m: u64,
        n: u64,
        record: Value,
        #[serde(default)]
        record2: Option<Value>,
    },
    /// `{"j"}`.
    JOfT { t: String },
    /// `{"preimages": {j: [t, ...]}}`.
    Preimages { height: u64, targets: Vec<String> },
}

pub fn bundled_corpus() -> Result<Vec<Fixture>> {
    parse_json(Path::new("<bundled corpus>"), BUNDLED).map_err(Into::into)
}

pub fn load_corpus(path: &Path) -> Result<Vec<Fixture>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_json(path, &text)?)
}

/// The optional table corpus shipped next to the crate, when present.
pub fn bundled_optional_dir() -> Option<PathBuf> {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/optional");
    p.join("table.json").is_file().then_some(p)
}

fn group(spec: &GroupSpec) -> Result<MatGroup> {
    Ok(spec.to_group()?)
}

fn exponent(g: &MatGroup) -> Result<u64> {
    Ok(g.element_orders()?
        .into_iter()
        .fold(1, num_lcm))
}

fn num_lcm(a: u64, b: u64) -> u64 {
    coincide_core::arith::lcm(a, b)
}

/// Evaluates a check to the JSON compared against `expected`.
pub fn evaluate(check: &Check, cfg: &SearchConfig) -> Result<Value> {
    Ok(match check {
        Check::Gl2Order { n } => {
            let count = gl2_elements(u32::try_from(*n)?).count();
            json!({"formula": gl2_order(*n) as u64, "enumerated": count})
        }
        Check::GroupOrder { group: s } => {
            let g = group(s)?;
            let order = g.order()?;
            json!({"order": order, "index_in_gl2": (gl2_order(s.modulus) / order as u128) as u64})
        }
        Check::Derived { group: s } => {
            let g = group(s)?;
            let d = g.derived_subgroup()?;
            let o = d.order()?;
            json!({
                "order": o,
                "index": d.index_in(&g)?,
                "index_in_sl2": (sl2_order(s.modulus) / o as u128) as u64,
            })
        }
        Check::Abelian { group: s, sub, generator } => {
            let g = group(s)?;
            let n = match sub {
                Some(t) => group(t)?,
                None => g.derived_subgroup()?,
            };
            let inv = g.abelian_invariants(&n)?;
            let class_order = match generator {
                Some(x) => {
                    let x = Mat2::new(s.modulus, *x)?;
                    if !g.contains(&x)? {
                        bail!("generator {x} is not in the group");
                    }
                    let n_elems = n.elements()?;
                    let mut y = x;
                    let mut k = 1u64;
                    while n_elems.binary_search(&y).is_err() {
                        y = y.mul(&x);
                        k += 1;
                    }
                    Value::from(k)
                }
                None => Value::Null,
            };
            json!({"invariants": inv.0, "class_order": class_order})
        }
        Check::Normal { group: s, ambient } => {
            let g = group(s)?;
            let a = group(ambient)?;
            json!({"order": g.order()?, "normal": g.is_subgroup_of(&a)? && g.is_normal_in(&a)?})
        }
        Check::Kernel { from, to } => {
            let k = lifting::reduction_kernel(*to, *from)?;
            json!({"order": k.order()?, "exponent": exponent(&k)?})
        }
        Check::Reduce { group: s, to } => {
            let g = group(s)?;
            json!({"order": g.order()?, "reduced_order": g.reduce(*to)?.order()?})
        }
        Check::ElementLift { modulus, matrix, to } => {
            let r = lifting::element_split_liftable(&Mat2::new(*modulus, *matrix)?, *to)?;
            let wo = r.witness().map(|w| w.order()).transpose()?;
            json!({"status": r.status_name(), "witness_order": wo})
        }
        Check::GroupLift { group: s, to } => {
            let r = lifting::group_split_liftable(&group(s)?, *to, cfg)?;
            let wo = r.witness().map(|w| w.order()).transpose()?;
            json!({"status": r.status_name(), "witness_order": wo})
        }
        Check::Complement { group: s, base } => {
            let c = lifting::sequence_splits(&group(s)?, *base, cfg)?;
            json!({"splits": c.is_some(), "order": c.map(|c| c.order()).transpose()?})
        }
        Check::Profile { image, kmax } => {
            let img = image.to_image()?;
            let prof = img.index_profile(*kmax)?;
            let mono = img.monotone_ratio_check(*kmax)?;
            let mut v = serde_json::to_value(&prof)?;
            v["monotone"] = json!(mono.passed);
            v
        }
        Check::Audit { m, n, record, record2 } => {
            let record: CurveRecord = serde_json::from_value(record.clone())?;
            let rep = match record2 {
                Some(r2) => audit_pair(*m, *n, &record, &serde_json::from_value(r2.clone())?)?,
                None => audit(*m, *n, &record)?,
            };
            let verdicts: BTreeMap<&str, &str> = rep
                .findings
                .iter()
                .map(|f| (f.rule.code(), f.verdict.name()))
                .collect();
            json!({
                "overall": if rep.obstructed() { "obstructed" } else { "not_obstructed" },
                "verdicts": verdicts,
            })
        }
        Check::JOfT { t } => {
            let j = xmodular::j_of_t(&xmodular::parse_rational(t)?)?;
            json!({"j": xmodular::format_rational(&j)})
        }
        Check::Preimages { height, targets } => {
            let ts = targets
                .iter()
                .map(|s| xmodular::parse_rational(s))
                .collect::<coincide_core::Result<Vec<_>>>()?;
            let hits = xmodular::search_preimages(&ts, *height);
            let map: BTreeMap<String, Vec<String>> = hits
                .iter()
                .map(|(j, v)| {
                    (
                        xmodular::format_rational(j),
                        v.iter().map(xmodular::format_rational).collect(),
                    )
                })
                .collect();
            json!({"preimages": map})
        }
    })
}

/// `expected` matches `actual` when every key of every expected object is
/// present and matches, and all non-object values are equal.
pub fn matches(expected: &Value, actual: &Value) -> bool {
    match (expected, actual) {
        (Value::Object(e), Value::Object(a)) => e
            .iter()
            .all(|(k, v)| a.get(k).is_some_and(|w| matches(v, w))),
        _ => expected == actual,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail(String),
    Skipped(String),
}

#[derive(Clone, Debug)]
pub struct FixtureResult {
    pub id: String,
    pub citation: String,
    pub status: Status,
    pub millis: u128,
}

pub fn run_fixture(f: &Fixture, cfg: &SearchConfig) -> FixtureResult {
    let start = Instant::now();
    let status = match evaluate(&f.check, cfg) {
        Ok(actual) if matches(&f.expected, &actual) => Status::Pass,
        Ok(actual) => Status::Fail(format!("expected {}, got {}", f.expected, actual)),
        Err(e) => Status::Fail(format!("error: {e:#}")),
    };
    FixtureResult {
        id: f.id.clone(),
        citation: f.citation.clone(),
        status,
        millis: start.elapsed().as_millis(),
    }
}

/// One row of the optional table corpus: a `p`-adic image supplied from an
/// external database and the ratio sequence `u_1, u_2, ...` it should give
/// (the sequence continues with 1 after the listed values).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub label: String,
    pub p: u64,
    pub u: Vec<u128>,
    /// Image file relative to the table directory.
    pub image: String,
    #[serde(default)]
    pub note: Option<String>,
}

fn run_row(dir: &Path, row: &TableRow) -> FixtureResult {
    let start = Instant::now();
    let id = format!("table-{}-p{}", row.label, row.p);
    let path = dir.join(&row.image);
    let status = if !path.is_file() {
        Status::Skipped(format!("image file {} not supplied", row.image))
    } else {
        match crate::ingest::ingest_image(&path) {
            Err(e) => Status::Fail(e.to_string()),
            Ok(img) => {
                let kmax = (row.u.len() as u32 + 2).max(img.depth() + 1);
                match img.index_profile(kmax) {
                    Err(e) => Status::Fail(format!("error: {e}")),
                    Ok(prof) => {
                        let mut want = row.u.clone();
                        want.resize(prof.u.len(), 1);
                        if prof.u == want {
                            Status::Pass
                        } else {
                            Status::Fail(format!("expected u = {want:?}, got {:?}", prof.u))
                        }
                    }
                }
            }
        }
    };
    FixtureResult {
        id,
        citation: "example table of index ratios".into(),
        status,
        millis: start.elapsed().as_millis(),
    }
}

pub fn load_table(dir: &Path) -> Result<Vec<TableRow>> {
    let path = dir.join("table.json");
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_json(&path, &text)?)
}

pub struct Summary {
    pub results: Vec<FixtureResult>,
}

impl Summary {
    pub fn count(&self, f: impl Fn(&Status) -> bool) -> usize {
        self.results.iter().filter(|r| f(&r.status)).count()
    }

    pub fn failed(&self) -> usize {
        self.count(|s| matches!(s, Status::Fail(_)))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .results
            .iter()
            .map(|r| {
                let (status, detail) = match &r.status {
                    Status::Pass => ("passed", None),
                    Status::Fail(d) => ("failed", Some(d)),
                    Status::Skipped(d) => ("skipped", Some(d)),
                };
                json!({"id": r.id, "citation": r.citation, "status": status, "detail": detail})
            })
            .collect();
        json!({
            "passed": self.count(|s| *s == Status::Pass),
            "failed": self.failed(),
            "skipped": self.count(|s| matches!(s, Status::Skipped(_))),
            "fixtures": rows,
        })
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let (tag, detail) = match &r.status {
                Status::Pass => ("PASSED", String::new()),
                Status::Fail(d) => ("FAILED", format!("  {d}")),
                Status::Skipped(d) => ("SKIPPED", format!("  {d}")),
            };
            out.push_str(&format!("{tag:<8} {:<44} {}{detail}\n", r.id, r.citation));
        }
        out.push_str(&format!(
            "\n{} passed, {} failed, {} skipped\n",
            self.count(|s| *s == Status::Pass),
            self.failed(),
            self.count(|s| matches!(s, Status::Skipped(_)))
        ));
        out
    }
}

/// Runs the corpus (and the optional table, if a directory is given) in
/// parallel; results are ordered by id.
pub fn run_all(corpus: &[Fixture], optional: Option<&Path>, cfg: &SearchConfig) -> Summary {
    let mut results: Vec<FixtureResult> = corpus.par_iter().map(|f| run_fixture(f, cfg)).collect();
    if let Some(dir) = optional {
        match load_table(dir) {
            Ok(rows) => results.extend(rows.par_iter().map(|r| run_row(dir, r)).collect::<Vec<_>>()),
            Err(e) => results.push(FixtureResult {
                id: "table".into(),
                citation: "example table of index ratios".into(),
                status: Status::Fail(format!("{e:#}")),
                millis: 0,
            }),
        }
    }
    results.sort_by(|a, b| a.id.cmp(&b.id));
    Summary { results }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_matching() {
        let actual = json!({"a": 1, "b": {"c": [1, 2], "d": "x"}});
        assert!(matches(&json!({"a": 1}), &actual));
        assert!(matches(&json!({"b": {"d": "x"}}), &actual));
        assert!(!matches(&json!({"b": {"c": [1]}}), &actual));
        assert!(!matches(&json!({"e": null}), &actual));
        assert!(!matches(&json!({"a": 2}), &actual));
    }

    #[test]
    fn bundled_corpus_parses_with_unique_ids() {
        let corpus = bundled_corpus().unwrap();
        let mut ids: Vec<&str> = corpus.iter().map(|f| f.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), corpus.len());
        assert!(corpus
            .iter()
            .filter(|f| f.basis == Basis::Derived)
            .all(|f| f.oracle.is_some()));
    }
}
