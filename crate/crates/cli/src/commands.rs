//! One function per subcommand. Each returns a JSON value and a text
//! rendering of the same report.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use coincide_core::io::GroupSpec;
use coincide_core::lifting::{self, LiftResult, SearchConfig};
use coincide_core::padic;
use coincide_core::rules::{audit, audit_pair};
use coincide_core::xmodular::{self, Rational};
use coincide_core::{gl2_order, sl2_order, Mat2, MatGroup};
use serde_json::{json, Value};

use crate::ingest::{ingest_group, ingest_image, ingest_json, ingest_record};
use crate::{fixtures, AuditArgs, Cli, Command, GroupCmd, LiftCmd, PadicCmd, XcurveCmd};

pub struct Output {
    pub value: Value,
    pub text: String,
    /// A negative answer (obstructed, not liftable, failed fixture).
    pub negative: bool,
}

impl Output {
    fn new(value: Value, text: impl Into<String>) -> Self {
        Self {
            value,
            text: text.into(),
            negative: false,
        }
    }

    fn negative(mut self, flag: bool) -> Self {
        self.negative = flag;
        self
    }
}

pub fn dispatch(cli: &Cli) -> Result<Output> {
    let cfg = SearchConfig {
        budget: cli.budget,
        seed: cli.seed,
    };
    match &cli.command {
        Command::Group(c) => group(c),
        Command::Lift(c) => lift(c, &cfg),
        Command::Padic(c) => padic_cmd(c),
        Command::Audit(a) => audit_cmd(a),
        Command::Xcurve(c) => xcurve(c),
        Command::VerifyPaper(v) => {
            let corpus = match &v.corpus {
                Some(p) => fixtures::load_corpus(p)?,
                None => fixtures::bundled_corpus()?,
            };
            let optional = v.optional.clone().or_else(fixtures::bundled_optional_dir);
            let summary = fixtures::run_all(&corpus, optional.as_deref(), &cfg);
            let failed = summary.failed() > 0;
            Ok(Output::new(summary.to_json(), summary.render_text()).negative(failed))
        }
    }
}

/// Parses `a,b,c,d` (a `;` may separate the rows).
pub fn parse_matrix(s: &str) -> Result<[i64; 4]> {
    let parts: Vec<&str> = s
        .trim_matches(|c| c == '(' || c == ')' || c == '[' || c == ']')
        .split([',', ';'])
        .map(str::trim)
        .collect();
    if parts.len() != 4 {
        bail!("matrix `{s}` must have four entries a,b,c,d");
    }
    let mut out = [0i64; 4];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .parse()
            .with_context(|| format!("matrix entry `{p}` is not an integer"))?;
    }
    Ok(out)
}

fn spec_json(g: &MatGroup, with_elements: bool) -> Result<Value> {
    Ok(serde_json::to_value(GroupSpec::from_group(g, with_elements)?)?)
}

fn gens_text(g: &MatGroup) -> String {
    if g.generators().is_empty() {
        return "trivial".into();
    }
    let v: Vec<String> = g.generators().iter().map(|m| m.to_string()).collect();
    v.join(", ")
}

fn group(c: &GroupCmd) -> Result<Output> {
    match c {
        GroupCmd::Info { g, elements } => {
            let grp = ingest_group(&g.input)?;
            let n = grp.modulus() as u64;
            let order = grp.order()?;
            let det = grp.det_image();
            let sl = grp.sl_intersection()?.order()?;
            let index = gl2_order(n) / order as u128;
            let value = json!({
                "group": spec_json(&grp, *elements)?,
                "index_in_gl2": index.to_string(),
                "det_image": det,
                "sl_order": sl,
            });
            let text = format!(
                "modulus {n}\ngenerators {}\norder {order}\nindex in GL2 {index}\ndet image {det:?}\n|G ∩ SL2| {sl}",
                gens_text(&grp)
            );
            Ok(Output::new(value, text))
        }
        GroupCmd::Derived(g) => {
            let grp = ingest_group(&g.input)?;
            let d = grp.derived_subgroup()?;
            let index = d.index_in(&grp)?;
            let value = json!({"derived": spec_json(&d, false)?, "index": index});
            let text = format!(
                "derived subgroup of order {} and index {index}\ngenerators {}",
                d.order()?,
                gens_text(&d)
            );
            Ok(Output::new(value, text))
        }
        GroupCmd::Abelian { g, sub } => {
            let grp = ingest_group(&g.input)?;
            let n = match sub {
                Some(p) => ingest_group(p)?,
                None => grp.derived_subgroup()?,
            };
            let inv = grp.abelian_invariants(&n)?;
            let value = json!({"invariants": inv.0, "order": inv.order(), "cyclic": inv.is_cyclic()});
            Ok(Output::new(value, format!("invariant factors {inv}")))
        }
        GroupCmd::Det(g) => {
            let grp = ingest_group(&g.input)?;
            let det = grp.det_image();
            let text = format!("det image ({} units) {det:?}", det.len());
            Ok(Output::new(json!({"det_image": det}), text))
        }
        GroupCmd::Sl(g) => {
            let grp = ingest_group(&g.input)?;
            let s = grp.sl_intersection()?;
            let n = grp.modulus() as u64;
            let index = sl2_order(n) / s.order()? as u128;
            let value = json!({"sl": spec_json(&s, false)?, "index_in_sl2": index.to_string()});
            let text = format!("G ∩ SL2 of order {} and index {index} in SL2", s.order()?);
            Ok(Output::new(value, text))
        }
        GroupCmd::Conjugate { g, matrix } => {
            let grp = ingest_group(&g.input)?;
            let n = grp.modulus() as u64;
            let x = Mat2::new(n, parse_matrix(matrix)?)?;
            let found = grp.contains_conjugate_of(&x)?;
            let value = json!({
                "matrix": x.entries(),
                "conjugator": found.map(|c| c.entries()),
            });
            let text = match found {
                Some(c) => format!("c {x} c^-1 lies in G for c = {c}"),
                None => format!("no conjugate of {x} lies in G"),
            };
            Ok(Output::new(value, text).negative(found.is_none()))
        }
        GroupCmd::Fiber { g, m, n } => {
            let grp = ingest_group(&g.input)?;
            let full = grp.is_fiber_product_trivial(*m, *n)?;
            let text = if full {
                format!("G is the full product of its images mod {m} and mod {n}")
            } else {
                format!("G is a proper fibre product over mod {m} and mod {n}")
            };
            Ok(Output::new(json!({"trivial_fiber_product": full}), text))
        }
        GroupCmd::Reduce { g, to } => {
            let grp = ingest_group(&g.input)?;
            let r = grp.reduce(*to)?;
            let injective = r.order()? == grp.order()?;
            let value = json!({"group": spec_json(&r, false)?, "injective": injective});
            let text = format!(
                "image mod {to} of order {} ({})",
                r.order()?,
                if injective { "isomorphic" } else { "not injective" }
            );
            Ok(Output::new(value, text))
        }
    }
}

fn lift_json<W>(r: &LiftResult<W>, witness: impl FnOnce(&W) -> Result<Value>) -> Result<Value> {
    Ok(json!({
        "status": r.status_name(),
        "witness": match r.witness() {
            Some(w) => witness(w)?,
            None => Value::Null,
        },
        "search_count": r.search_count,
    }))
}

fn lift(c: &LiftCmd, cfg: &SearchConfig) -> Result<Output> {
    match c {
        LiftCmd::Kernel { from, to } => {
            let k = lifting::reduction_kernel(*to, *from)?;
            let exponent = k.element_orders()?.into_iter().max().unwrap_or(1);
            let value = json!({"order": k.order()?, "exponent": exponent});
            let text = format!(
                "kernel of GL2({to}) -> GL2({from}): order {}, exponent {exponent}",
                k.order()?
            );
            Ok(Output::new(value, text))
        }
        LiftCmd::Element { matrix, modulus, to } => {
            let g = Mat2::new(*modulus, parse_matrix(matrix)?)?;
            let r = lifting::element_split_liftable(&g, *to)?;
            let value = lift_json(&r, |w| Ok(json!(w.entries())))?;
            let text = match r.witness() {
                Some(w) => format!("{g} lifts to {w} of order {}", w.order()?),
                None => format!("{g}: {} after {} candidates", r.status_name(), r.search_count),
            };
            let neg = r.status_name() == "not_liftable";
            Ok(Output::new(value, text).negative(neg))
        }
        LiftCmd::Split { group, to, within } => {
            let g = ingest_group(group)?;
            let r = match within {
                Some(w) => lifting::group_split_liftable_within(&g, *to, &ingest_group(w)?, cfg)?,
                None => lifting::group_split_liftable(&g, *to, cfg)?,
            };
            let value = lift_json(&r, |w| spec_json(w, false))?;
            let text = match r.witness() {
                Some(w) => format!(
                    "split liftable to level {to}: witness of order {} generated by {}",
                    w.order()?,
                    gens_text(w)
                ),
                None => format!("{} after {} candidates", r.status_name(), r.search_count),
            };
            let neg = r.status_name() == "not_liftable";
            Ok(Output::new(value, text).negative(neg))
        }
        LiftCmd::Complement { group, base } => {
            let h = ingest_group(group)?;
            let c = lifting::sequence_splits(&h, *base, cfg)?;
            let value = json!({
                "splits": c.is_some(),
                "complement": c.as_ref().map(|c| spec_json(c, false)).transpose()?,
            });
            let text = match &c {
                Some(c) => format!(
                    "H splits over its image mod {base}: complement of order {} generated by {}",
                    c.order()?,
                    gens_text(c)
                ),
                None => format!("H does not split over its image mod {base}"),
            };
            Ok(Output::new(value, text).negative(c.is_none()))
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

fn padic_cmd(c: &PadicCmd) -> Result<Output> {
    match c {
        PadicCmd::Profile(a) => {
            let img = ingest_image(&a.input)?;
            let prof = img.index_profile(a.kmax)?;
            let text = format!(
                "p = {}\ni   = ({})\nj   = ({})\nell = ({})\nu   = ({})\ncoincidences at k = [{}]",
                prof.p,
                join(&prof.i),
                join(&prof.j),
                join(&prof.ell),
                join(&prof.u),
                join(&prof.coincidences)
            );
            Ok(Output::new(serde_json::to_value(&prof)?, text))
        }
        PadicCmd::Coincidences(a) => {
            let img = ingest_image(&a.input)?;
            let ks = img.detect_vertical_coincidences(a.kmax)?;
            let p = img.p();
            let pairs: Vec<String> = ks
                .iter()
                .map(|&k| format!("({}, {})", p.pow(k), p.pow(k + 1)))
                .collect();
            let text = if ks.is_empty() {
                format!("no vertical coincidence up to level {}", a.kmax)
            } else {
                format!("vertical coincidences {}", pairs.join(", "))
            };
            Ok(Output::new(json!({"p": p, "levels": ks}), text))
        }
        PadicCmd::Monotone(a) => {
            let img = ingest_image(&a.input)?;
            let chk = img.monotone_ratio_check(a.kmax)?;
            let text = match chk.first_violation {
                None => "u_{k+1} divides u_k throughout".to_string(),
                Some(k) => format!("u_{} does not divide u_{k}", k + 1),
            };
            Ok(Output::new(serde_json::to_value(&chk)?, text).negative(!chk.passed))
        }
        PadicCmd::Bound { p, k } => {
            let b = padic::adelic_index_lower_bound(*p, *k)?;
            let text = format!("adelic index is at least {b}");
            Ok(Output::new(json!({"p": p, "k": k, "bound": b.to_string()}), text))
        }
    }
}

fn audit_cmd(a: &AuditArgs) -> Result<Output> {
    let rec = ingest_record(&a.record)?;
    let rep = match &a.record2 {
        Some(p) => audit_pair(a.m, a.n, &rec, &ingest_record(p)?)?,
        None => audit(a.m, a.n, &rec)?,
    };
    Ok(Output::new(rep.to_json(), rep.render_text()).negative(rep.obstructed()))
}

fn load_targets(path: &Path) -> Result<Vec<Rational>> {
    let raw: Vec<Value> = ingest_json(path)?;
    raw.iter()
        .map(|v| match v {
            Value::String(s) => Ok(xmodular::parse_rational(s)?),
            Value::Number(n) => Ok(xmodular::parse_rational(&n.to_string())?),
            _ => Err(anyhow!("{}: targets must be strings or integers", path.display())),
        })
        .collect()
}

fn xcurve(c: &XcurveCmd) -> Result<Output> {
    match c {
        XcurveCmd::Eval { t } => {
            let t = xmodular::parse_rational(t)?;
            let j = xmodular::j_of_t(&t)?;
            let (ts, js) = (xmodular::format_rational(&t), xmodular::format_rational(&j));
            Ok(Output::new(json!({"t": ts, "j": js}), format!("j({ts}) = {js}")))
        }
        XcurveCmd::Search { height, targets } => {
            let targets = match targets {
                Some(p) => load_targets(p)?,
                None => xmodular::default_cm_j_invariants(),
            };
            let hits = xmodular::search_preimages(&targets, *height);
            let map: serde_json::Map<String, Value> = hits
                .iter()
                .map(|(j, ts)| {
                    let ts: Vec<String> = ts.iter().map(xmodular::format_rational).collect();
                    (xmodular::format_rational(j), json!(ts))
                })
                .collect();
            let count: usize = hits.values().map(Vec::len).sum();
            let mut text = format!(
                "{count} parameters of height <= {height} map to the {} targets",
                targets.len()
            );
            for (j, ts) in &map {
                text.push_str(&format!("\nj = {j}: t in {ts}"));
            }
            Ok(Output::new(json!({"height": height, "preimages": map}), text))
        }
    }
}
