//! The obstruction audit.
//!
//! Each rule yields exactly one finding. A rule reports `obstructed` if any of
//! its checks fails, `not applicable` if none fails but a check it needed had
//! no data, and `constraint satisfied` otherwise (including when the query
//! does not have the shape the rule speaks about).

use crate::arith::{euler_phi, gcd, prime_divisors, prime_power, valuation};
use crate::error::{Error, Result};
use crate::matgroup::{sl2_order, MatGroup};
use crate::modmat::Mat2;

use super::large_image::contains_sl2;
use super::record::{CurveRecord, ReductionType};
use super::report::{Finding, ObstructionReport, RuleId, Verdict};

const MAX_LEVEL: u64 = 1 << 40;

#[derive(Default)]
struct Acc {
    obstructions: Vec<String>,
    missing: Vec<(&'static str, String)>,
    notes: Vec<String>,
}

impl Acc {
    fn obstruct(&mut self, s: String) {
        self.obstructions.push(s);
    }

    fn missing(&mut self, field: &'static str, s: String) {
        self.missing.push((field, s));
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    fn finish(self, rule: RuleId) -> Finding {
        if !self.obstructions.is_empty() {
            return Finding {
                rule,
                verdict: Verdict::Obstructed,
                detail: self.obstructions.join("; "),
            };
        }
        if !self.missing.is_empty() {
            let mut fields: Vec<&str> = self.missing.iter().map(|(f, _)| *f).collect();
            fields.dedup();
            let detail: Vec<String> = self.missing.into_iter().map(|(_, s)| s).collect();
            return Finding {
                rule,
                verdict: Verdict::NotApplicable(fields.join(", ")),
                detail: detail.join("; "),
            };
        }
        let detail = if self.notes.is_empty() {
            "hypotheses of the rule are not met by this query".to_string()
        } else {
            self.notes.join("; ")
        };
        Finding {
            rule,
            verdict: Verdict::ConstraintSatisfied,
            detail,
        }
    }
}

fn vp(n: u64, p: u64) -> u32 {
    valuation(n, p)
}

fn primes_of(m: u64, n: u64) -> Vec<u64> {
    let mut v = prime_divisors(m);
    for p in prime_divisors(n) {
        if !v.contains(&p) {
            v.push(p);
        }
    }
    v.sort_unstable();
    v
}

fn orientations(m: u64, n: u64) -> Vec<(u64, u64)> {
    if m == n {
        vec![(m, n)]
    } else {
        vec![(m, n), (n, m)]
    }
}

/// `(p, a, b)` when `{m, n} = {p^a, p^b}` with `1 <= a < b`.
fn vertical_shape(m: u64, n: u64) -> Option<(u64, u32, u32)> {
    let (lo, hi) = if m < n { (m, n) } else { (n, m) };
    let (p, a) = prime_power(lo)?;
    let (q, b) = prime_power(hi)?;
    (p == q && a < b).then_some((p, a, b))
}

fn check_query(m: u64, n: u64) -> Result<()> {
    if m == 0 || n == 0 || m > MAX_LEVEL || n > MAX_LEVEL {
        return Err(Error::MalformedRecord(format!(
            "levels must lie in 1..={MAX_LEVEL}, got m = {m}, n = {n}"
        )));
    }
    Ok(())
}

/// Audit of `F(E[m]) = F(E[n])`.
pub fn audit(m: u64, n: u64, rec: &CurveRecord) -> Result<ObstructionReport> {
    check_query(m, n)?;
    rec.validate()?;
    let mut findings = single_curve_findings(m, n, rec)?;
    if let Some(s) = &rec.entanglement_set {
        findings.push(entanglement(m, n, s, rec)?);
    }
    if let Some(flag) = rec.j_cube_root_in_f {
        findings.push(j_cube_root(flag, rec)?);
    }
    findings.sort_by_key(|f| f.rule);
    Ok(ObstructionReport {
        m,
        n,
        two_curve: false,
        findings,
    })
}

fn single_curve_findings(m: u64, n: u64, rec: &CurveRecord) -> Result<Vec<Finding>> {
    Ok(vec![
        r1(m, n, rec),
        r2(m, n, rec),
        r3(m, n, rec),
        r4(m, n, rec),
        r5(m, n, rec),
        r6(m, n, rec),
        r7(m, n, rec)?,
        r8(m, n, rec)?,
        r9(m, n, rec)?,
    ])
}

/// Audit of `F(E[m]) = F(E'[n])`, with `rec` describing `E` and `rec2`
/// describing `E'` over the same field.
pub fn audit_pair(
    m: u64,
    n: u64,
    rec: &CurveRecord,
    rec2: &CurveRecord,
) -> Result<ObstructionReport> {
    check_query(m, n)?;
    rec.validate()?;
    rec2.validate()?;
    let field = merged_field_view(rec, rec2)?;
    let mut findings = Vec::new();

    let mut acc = Acc::default();
    reduction_check(&mut acc, m, n, rec, &field, "E");
    reduction_check(&mut acc, n, m, rec2, &field, "E'");
    findings.push(acc.finish(RuleId::R1p));

    let mut acc = Acc::default();
    vertical_check(&mut acc, m, n, &field);
    if m != n {
        vertical_check(&mut acc, n, m, &field);
    }
    findings.push(acc.finish(RuleId::R2p));

    let mut acc = Acc::default();
    for p in primes_of(m, n) {
        if vp(m, p) == vp(n, p) {
            continue;
        }
        bad_prime_check(&mut acc, p, &field, &[rec, rec2]);
    }
    findings.push(acc.finish(RuleId::R3p));

    let mut acc = Acc::default();
    large_image_check(&mut acc, m, n, rec, &field, "E")?;
    large_image_check(&mut acc, n, m, rec2, &field, "E'")?;
    findings.push(acc.finish(RuleId::R4p));

    Ok(ObstructionReport {
        m,
        n,
        two_curve: true,
        findings,
    })
}

/// Field-level data shared by two records; conflicting values are rejected.
fn merged_field_view(a: &CurveRecord, b: &CurveRecord) -> Result<CurveRecord> {
    let sorted = |v: &Option<Vec<u64>>| {
        v.as_ref().map(|v| {
            let mut v = v.clone();
            v.sort_unstable();
            v.dedup();
            v
        })
    };
    for (name, x, y) in [
        ("field_disc_primes", sorted(&a.field_disc_primes), sorted(&b.field_disc_primes)),
        ("zeta_in_F", sorted(&a.zeta_in_f), sorted(&b.zeta_in_f)),
    ] {
        if let (Some(x), Some(y)) = (x, y) {
            if x != y {
                return Err(Error::MalformedRecord(format!(
                    "{name} differs between the two records"
                )));
            }
        }
    }
    let mut out = a.clone();
    if out.field_disc_primes.is_none() {
        out.field_disc_primes = b.field_disc_primes.clone();
    }
    if out.zeta_in_f.is_none() {
        out.zeta_in_f = b.zeta_in_f.clone();
    }
    if out.cyclotomic_trivial.is_none() {
        out.cyclotomic_trivial = b.cyclotomic_trivial.clone();
    }
    Ok(out)
}

fn bad_prime_check(acc: &mut Acc, p: u64, field: &CurveRecord, curves: &[&CurveRecord]) {
    if p == 2 {
        acc.note("p = 2 is always allowed".into());
        return;
    }
    if field.ramified(p) == Some(true) {
        acc.note(format!("{p} ramifies in F"));
        return;
    }
    if let Some(c) = curves
        .iter()
        .find(|c| c.conductor_norm_primes.as_ref().is_some_and(|v| v.contains(&p)))
    {
        acc.note(format!("{} has bad reduction above {p}", c.name()));
        return;
    }
    let mut complete = field.field_disc_primes.is_some();
    if !complete {
        acc.missing("field_disc_primes", format!("ramification of {p} in F unknown"));
    }
    for c in curves {
        if c.conductor_norm_primes.is_none() {
            complete = false;
            acc.missing(
                "conductor_norm_primes",
                format!("reduction of {} above {p} unknown", c.name()),
            );
        }
    }
    if complete {
        acc.obstruct(format!(
            "v_{p}(m) != v_{p}(n) but {p} is odd, unramified in F and of good reduction"
        ));
    }
}

fn r1(m: u64, n: u64, rec: &CurveRecord) -> Finding {
    let mut acc = Acc::default();
    for p in primes_of(m, n) {
        if vp(m, p) != vp(n, p) {
            bad_prime_check(&mut acc, p, rec, &[rec]);
        }
    }
    acc.finish(RuleId::R1)
}

fn bullet_possible(p: u64, k: u32) -> bool {
    k == 1 || (k == 2 && p <= 3) || (p == 2 && k <= 4)
}

fn bullet_allows(p: u64, k: u32, red: ReductionType) -> bool {
    match (p, k) {
        (_, 1) => !red.is_good(),
        (2, 2) => matches!(
            red,
            ReductionType::Additive { .. } | ReductionType::MultNonSplit
        ),
        (3, 2) | (2, 3) | (2, 4) => red == ReductionType::Additive { potentially_good: true },
        _ => false,
    }
}

fn bullet_text(p: u64, k: u32) -> &'static str {
    match (p, k) {
        (_, 1) => "bad reduction",
        (2, 2) => "additive or non-split multiplicative reduction",
        (3, 2) | (2, 3) | (2, 4) => "additive, potentially good reduction",
        _ => "an impossible reduction type",
    }
}

/// Reduction constraints at primes dividing `b` but not `a`, from
/// `F(ζ_{p^k}) ⊆ F(E[a])` with the reduction data of `red_rec`.
fn reduction_check(
    acc: &mut Acc,
    a: u64,
    b: u64,
    red_rec: &CurveRecord,
    field: &CurveRecord,
    who: &str,
) {
    for p in prime_divisors(b) {
        if a % p == 0 {
            continue;
        }
        let k = vp(b, p);
        if p.pow(k) == 2 {
            acc.note("v_2 = 1 forces no ramification since ζ_2 ∈ F".into());
            continue;
        }
        let phi = euler_phi(p.pow(k));
        let ramified = match field.ramified(p) {
            None => {
                acc.missing("field_disc_primes", format!("ramification of {p} in F unknown"));
                continue;
            }
            Some(r) => r,
        };
        if !ramified && !bullet_possible(p, k) {
            acc.obstruct(format!(
                "{p} unramified in F with v_{p} = {k}: no reduction type of {who} allows it"
            ));
            continue;
        }
        let Some(local) = red_rec.local_at(p) else {
            acc.missing("local", format!("no local data of {who} above {p}"));
            continue;
        };
        let mut checked = 0;
        for (i, id) in local.ideals.iter().enumerate() {
            if ramified && gcd(id.e, phi) != 1 {
                continue;
            }
            checked += 1;
            if !bullet_allows(p, k, id.reduction) {
                acc.obstruct(format!(
                    "v_{p} = {k}: {who} needs {} at ideal {i} above {p}, has {}",
                    bullet_text(p, k),
                    id.reduction
                ));
            }
        }
        if checked == 0 {
            acc.note(format!(
                "no ideal above {p} has ramification index prime to φ({p}^{k}) = {phi}"
            ));
        } else {
            acc.note(format!("reduction above {p} compatible with v_{p} = {k}"));
        }
    }
}

fn r2(m: u64, n: u64, rec: &CurveRecord) -> Finding {
    let mut acc = Acc::default();
    for (a, b) in orientations(m, n) {
        reduction_check(&mut acc, a, b, rec, rec, "E");
    }
    acc.finish(RuleId::R2)
}

fn r3(m: u64, n: u64, rec: &CurveRecord) -> Finding {
    let mut acc = Acc::default();
    for (a, b) in orientations(m, n) {
        if a < 2 {
            continue;
        }
        let top = *prime_divisors(a).last().expect("a >= 2");
        let a_is_2_power = prime_power(a).is_some_and(|(q, _)| q == 2);
        for p in prime_divisors(b) {
            if p <= top {
                continue;
            }
            let k = vp(b, p);
            let Some(r) = rec.cyclotomic_depth(p) else {
                acc.missing(
                    "cyclotomic_trivial",
                    format!("largest r with ζ_{p}^r ∈ F unknown"),
                );
                continue;
            };
            if k <= r {
                acc.note(format!("ζ_{p}^{k} ∈ F"));
                continue;
            }
            let generic = k == 1 && r == 0;
            let exceptional = a_is_2_power && p == 3 && ((r == 0 && k <= 2) || r + 1 == k);
            if generic || exceptional {
                acc.note(format!("v_{p} = {k} allowed with r = {r}"));
            } else {
                acc.obstruct(format!(
                    "{p} exceeds every prime of {a} but v_{p}({b}) = {k} with r = {r}"
                ));
            }
        }
    }
    acc.finish(RuleId::R3)
}

/// `F(ζ_{p^{k+1}}) ⊆ F(E[p^k])` with trivial cyclotomic intersection forces
/// `p = 2`; applies when `a = p^k` and `v_p(b) > k`.
fn vertical_check(acc: &mut Acc, a: u64, b: u64, field: &CurveRecord) {
    let Some((p, k)) = prime_power(a) else { return };
    if vp(b, p) <= k {
        return;
    }
    match field.cyclotomic_trivial_at(p, k) {
        None => acc.missing(
            "cyclotomic_trivial",
            format!("F ∩ Q(ζ_{p}^{k}) unknown"),
        ),
        Some(false) => acc.note(format!("F ∩ Q(ζ_{p}^{k}) is not Q")),
        Some(true) if p == 2 => acc.note("p = 2".into()),
        Some(true) => acc.obstruct(format!(
            "ζ_{p}^{} would lie in F(E[{a}]) with F ∩ Q(ζ_{p}^{k}) = Q and p odd",
            k + 1
        )),
    }
}

fn r4(m: u64, n: u64, rec: &CurveRecord) -> Finding {
    let mut acc = Acc::default();
    for (a, b) in orientations(m, n) {
        vertical_check(&mut acc, a, b, rec);
    }
    acc.finish(RuleId::R4)
}

fn r5(m: u64, n: u64, rec: &CurveRecord) -> Finding {
    let mut acc = Acc::default();
    if let Some((p, 1, k)) = vertical_shape(m, n) {
        match rec.local_at(p) {
            None => acc.missing("local", format!("no local data above {p}")),
            Some(local) => {
                let need = p.pow(k - 1);
                for (i, id) in local.ideals.iter().enumerate() {
                    match id.reduction {
                        ReductionType::Good { supersingular: Some(true) } if id.e % need != 0 => {
                            acc.obstruct(format!(
                                "supersingular at ideal {i} above {p} with {need} ∤ e = {}",
                                id.e
                            ))
                        }
                        ReductionType::Good { supersingular: None } => acc.missing(
                            "local",
                            format!("ordinary or supersingular at ideal {i} above {p} unknown"),
                        ),
                        _ => acc.note(format!("ideal {i} above {p} gives no obstruction")),
                    }
                }
            }
        }
    }
    acc.finish(RuleId::R5)
}

fn r6(m: u64, n: u64, rec: &CurveRecord) -> Finding {
    let mut acc = Acc::default();
    if let Some((p, a, b)) = vertical_shape(m, n) {
        match &rec.cm {
            None => acc.missing("cm", "CM data unknown".into()),
            Some(cm) if !cm.field_is_k_of_j => acc.note("F is not K(j(E))".into()),
            Some(_) if p == 2 && a == 1 && b == 2 => acc.note("(2, 4) is allowed".into()),
            Some(_) => acc.obstruct(format!(
                "CM with F = K(j(E)) allows no vertical coincidence ({p}^{a}, {p}^{b})"
            )),
        }
    }
    acc.finish(RuleId::R6)
}

/// Large-image constraints for an image at level `a` of the curve in `rec`
/// and a coincidence with level `b`.
fn large_image_check(
    acc: &mut Acc,
    a: u64,
    b: u64,
    rec: &CurveRecord,
    field: &CurveRecord,
    who: &str,
) -> Result<()> {
    let odd_case = a % 2 == 1 && a >= 3 && a % b != 0;
    let case72 = a % 72 == 0;
    if !odd_case && !case72 {
        return Ok(());
    }
    let Some(g) = rec.image_at(a) else {
        acc.missing("images", format!("image of {who} at level {a} unknown"));
        return Ok(());
    };
    let g = g?;
    if !contains_sl2(&g)? {
        acc.note(format!("image of {who} at level {a} does not contain SL2"));
        return Ok(());
    }
    if odd_case {
        match field.zeta_in_field(b) {
            None => acc.missing("zeta_in_F", format!("whether ζ_{b} ∈ F is unknown")),
            Some(true) => acc.note(format!("ζ_{b} ∈ F")),
            Some(false) => {
                let derived_full = g.derived_subgroup()?.order()? as u128 == sl2_order(a);
                if a % 3 != 0 || derived_full {
                    acc.obstruct(format!(
                        "image of {who} at odd level {a} contains SL2 and {}",
                        if a % 3 != 0 {
                            "3 ∤ level".to_string()
                        } else {
                            "its derived subgroup is all of SL2".to_string()
                        }
                    ));
                } else {
                    acc.note(format!(
                        "3 | {a} and the derived subgroup of the image is proper"
                    ));
                }
            }
        }
    }
    if case72 {
        for p in prime_divisors(b) {
            let e = vp(b, p);
            if e <= vp(a, p) {
                continue;
            }
            let q = p.pow(e);
            match field.zeta_in_field(q) {
                Some(true) => acc.note(format!("ζ_{q} ∈ F")),
                _ if a % p != 0 && field.ramified(p) == Some(false) => acc.obstruct(format!(
                    "ζ_{q} ∉ F(ζ_{a}): {p} is unramified in F(ζ_{a})"
                )),
                _ => acc.missing(
                    "zeta_in_F",
                    format!("whether ζ_{q} ∈ F(ζ_{a}) is undecided"),
                ),
            }
        }
    }
    Ok(())
}

fn r7(m: u64, n: u64, rec: &CurveRecord) -> Result<Finding> {
    let mut acc = Acc::default();
    for (a, b) in orientations(m, n) {
        large_image_check(&mut acc, a, b, rec, rec, "E")?;
    }
    Ok(acc.finish(RuleId::R7))
}

/// Image at level `q`, possibly reduced from a stored image at a multiple.
fn image_at_or_above(rec: &CurveRecord, q: u64) -> Result<Option<MatGroup>> {
    let Some(images) = &rec.images else { return Ok(None) };
    for (level, spec) in images {
        if *level as u64 % q == 0 {
            return Ok(Some(spec.to_group()?.reduce(q)?));
        }
    }
    Ok(None)
}

fn r8(m: u64, n: u64, rec: &CurveRecord) -> Result<Finding> {
    let mut acc = Acc::default();
    let Some((p, a, _b)) = vertical_shape(m, n) else {
        return Ok(acc.finish(RuleId::R8));
    };
    let q = if p >= 5 { p } else { p * p };
    let mut evaluated = false;
    if a >= vp(q, p) {
        if let Some(g) = image_at_or_above(rec, q)? {
            evaluated = true;
            match g.contains_conjugate_of(&Mat2::t(q)?)? {
                Some(c) => acc.obstruct(format!(
                    "image at level {q} contains a conjugate of T (conjugator {c})"
                )),
                None => acc.note(format!("image at level {q} contains no conjugate of T")),
            }
        }
    }
    if p != 2 {
        if let Some(local) = rec.local_at_any_multiplicative() {
            for (r, i, v) in local {
                evaluated = true;
                if v % p as i64 != 0 {
                    acc.obstruct(format!(
                        "multiplicative reduction at ideal {i} above {r} with {p} ∤ 2·v(j) = {}",
                        2 * v
                    ));
                } else {
                    acc.note(format!("{p} | v(j) at ideal {i} above {r}"));
                }
            }
        }
    }
    if !evaluated {
        acc.missing(
            "images",
            format!("image at level {q} or multiplicative places with v(j) unknown"),
        );
    }
    Ok(acc.finish(RuleId::R8))
}

impl CurveRecord {
    /// `(p, ideal index, v(j))` for every multiplicative place with known `v(j)`.
    fn local_at_any_multiplicative(&self) -> Option<Vec<(u64, usize, i64)>> {
        let local = self.local.as_ref()?;
        let mut out = Vec::new();
        for l in local {
            for (i, id) in l.ideals.iter().enumerate() {
                if let (true, Some(v)) = (id.reduction.is_multiplicative(), id.v_ideal_of_j) {
                    out.push((l.residue_characteristic, i, v));
                }
            }
        }
        Some(out)
    }
}

/// Degree of the largest cyclic subextension of `F(ζ_{p^k}) / F` when
/// `F ∩ Q(ζ_{p^k}) = Q`.
fn forced_cyclic_degree(p: u64, k: u32) -> u64 {
    if p != 2 {
        euler_phi(p.pow(k))
    } else if k <= 1 {
        1
    } else if k == 2 {
        2
    } else {
        2u64.pow(k - 2)
    }
}

fn r9(m: u64, n: u64, rec: &CurveRecord) -> Result<Finding> {
    let mut acc = Acc::default();
    for (a, b) in orientations(m, n) {
        if a < 2 {
            continue;
        }
        for p in prime_divisors(b) {
            let k = vp(b, p);
            if k <= vp(a, p) {
                continue;
            }
            let d = forced_cyclic_degree(p, k);
            if d == 1 {
                continue;
            }
            match rec.cyclotomic_trivial_at(p, k) {
                None => acc.missing("cyclotomic_trivial", format!("F ∩ Q(ζ_{p}^{k}) unknown")),
                Some(false) => acc.note(format!("F ∩ Q(ζ_{p}^{k}) is not Q")),
                Some(true) => match rec.image_at(a) {
                    None => acc.missing("images", format!("image at level {a} unknown")),
                    Some(g) => {
                        let orders = g?.element_orders()?;
                        if orders.iter().any(|o| o % d == 0) {
                            acc.note(format!("image at level {a} has an element of order divisible by {d}"));
                        } else {
                            acc.obstruct(format!(
                                "F(ζ_{p}^{k}) has a cyclic subextension of degree {d} but no element of the image at level {a} has order divisible by {d}"
                            ));
                        }
                    }
                },
            }
        }
    }
    Ok(acc.finish(RuleId::R9))
}

fn entanglement(m: u64, n: u64, s: &[u64], rec: &CurveRecord) -> Result<Finding> {
    let mut acc = Acc::default();
    let part = |x: u64, inside: bool, p: Option<u64>| -> u64 {
        prime_divisors(x)
            .into_iter()
            .filter(|q| match p {
                Some(p) => *q == p,
                None => s.contains(q) == inside,
            })
            .map(|q| q.pow(vp(x, q)))
            .product()
    };
    let mut subs = vec![(part(m, true, None), part(n, true, None))];
    for p in primes_of(m, n) {
        if !s.contains(&p) {
            subs.push((part(m, false, Some(p)), part(n, false, Some(p))));
        }
    }
    for (a, b) in subs {
        if a == b {
            continue;
        }
        if a == 1 || b == 1 {
            let c = a.max(b);
            if rec.zeta_in_field(c) == Some(false) {
                acc.obstruct(format!(
                    "sub-query ({a}, {b}) needs E[{c}] rational, hence ζ_{c} ∈ F, which fails"
                ));
                continue;
            }
        }
        let sub = single_curve_findings(a, b, rec)?;
        let hits: Vec<String> = sub
            .iter()
            .filter(|f| f.verdict == Verdict::Obstructed)
            .map(|f| f.rule.code().to_string())
            .collect();
        if hits.is_empty() {
            acc.note(format!("sub-query ({a}, {b}) not obstructed"));
        } else {
            acc.obstruct(format!("sub-query ({a}, {b}) obstructed by {}", hits.join(", ")));
        }
    }
    Ok(acc.finish(RuleId::S))
}

fn j_cube_root(flag: bool, rec: &CurveRecord) -> Result<Finding> {
    let mut detail = "F(j(E)^{1/3}) ⊆ F(E[3])".to_string();
    if let Some(g) = image_at_or_above(rec, 3)? {
        let large = contains_sl2(&g)?;
        if large && flag {
            detail.push_str("; record inconsistent: SL2(3) in the mod-3 image forces j(E)^{1/3} ∉ F");
        } else if large {
            detail.push_str("; SL2(3) in the mod-3 image, so F(j(E)^{1/3}) / F is nontrivial");
        }
    }
    Ok(Finding {
        rule: RuleId::J3,
        verdict: Verdict::ConstraintSatisfied,
        detail,
    })
}
