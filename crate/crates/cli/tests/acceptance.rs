//! One line per acceptance criterion: `PASS` or `FAIL`, the criterion, the
//! time taken against its limit, and a detail on failure.

use std::time::{Duration, Instant};

use coincide_cli::fixtures::{self, Check, Status};
use coincide_core::arith::gcd;
use coincide_core::lifting::{self, SearchConfig};
use coincide_core::modmat::gl2_elements;
use coincide_core::padic::PAdicImage;
use coincide_core::xmodular::{j_of_t, parse_rational, search_preimages, format_rational};
use coincide_core::{gl2_order, sl2_order, Error, Mat2, MatGroup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240;

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T>(r: coincide_core::Result<T>) -> Result<T, String> {
    r.map_err(|x| x.to_string())
}

fn order_formula() -> Outcome {
    for n in [2u64, 3, 4, 5, 6, 7, 8, 9, 12] {
        let count = gl2_elements(n as u32).count() as u128;
        ensure(gl2_order(n) == count, || {
            format!("n = {n}: formula {} vs {count} enumerated", gl2_order(n))
        })?;
    }
    ensure(gl2_order(8) / gl2_order(4) == 16 && gl2_order(8) % gl2_order(4) == 0, || {
        "#GL2(8) / #GL2(4) is not 2^4".into()
    })
}

fn kernel_structure() -> Outcome {
    for (p, k) in [(2u64, 1u32), (2, 2), (3, 1), (5, 1)] {
        let ker = e(lifting::reduction_kernel(p.pow(k + 1), p.pow(k)))?;
        ensure(e(ker.order())? == p.pow(4), || format!("({p}, {k}): order"))?;
        for x in e(ker.elements())? {
            let o = e(x.order())?;
            ensure(o == 1 || o == p, || format!("({p}, {k}): {x} has order {o}"))?;
        }
    }
    Ok(())
}

fn derived_subgroups() -> Outcome {
    for m in 2..=12u64 {
        let g = e(MatGroup::sl2(m))?;
        let d = e(g.derived_subgroup())?;
        let inv = e(g.abelian_invariants(&d))?;
        let want = gcd(m, 12);
        let expected: Vec<u64> = if want > 1 { vec![want] } else { vec![] };
        ensure(inv.0 == expected, || format!("SL2({m}) / D = {inv}, expected Z/{want}"))?;
        let t = e(Mat2::t(m))?;
        let mut y = t;
        let mut k = 1;
        while !e(d.contains(&y))? {
            y = y.mul(&t);
            k += 1;
        }
        ensure(k == want, || format!("T has order {k} in SL2({m}) / D"))?;
    }
    for m in 2..=15u64 {
        if m % 2 == 0 && m > 12 {
            continue;
        }
        let d = e(e(MatGroup::gl2(m))?.derived_subgroup())?;
        let index = sl2_order(m) / e(d.order())? as u128;
        let want = if m % 2 == 1 { 1 } else { 2 };
        ensure(index == want, || format!("D(GL2({m})) has index {index} in SL2"))?;
    }
    for (m, o) in [(2u64, 3u64), (3, 8), (4, 12)] {
        let g = e(MatGroup::from_literals(m, &[[3, -1, 1, 0], [2, 1, 1, 1]]))?;
        let sl = e(MatGroup::sl2(m))?;
        ensure(e(g.order())? == o, || format!("<A, B> mod {m} has order {}", g.order().unwrap()))?;
        ensure(e(g.is_normal_in(&sl))?, || format!("<A, B> mod {m} is not normal"))?;
    }
    Ok(())
}

fn borel_lemma() -> Outcome {
    for p in [2u64, 3, 5, 7] {
        for k in 1..=3u32 {
            let r = e(lifting::element_split_liftable(&e(Mat2::t(p.pow(k)))?, p.pow(k + 1)))?;
            let want = matches!((p, k), (2, 1) | (3, 1));
            ensure(r.witness().is_some() == want, || {
                format!("T mod {p}^{k}: {}", r.status_name())
            })?;
        }
    }
    Ok(())
}

fn explicit_lifts() -> Outcome {
    let g9 = e(MatGroup::from_literals(9, &[[1, 0, 0, -1], [-2, 2, -2, -2], [4, -2, -3, 4]]))?;
    ensure(e(g9.order())? == 48, || "GL2(3) lift has the wrong order".into())?;
    ensure(e(g9.reduce(3))? == e(MatGroup::gl2(3))?, || "mod 3 image is not GL2(3)".into())?;
    for m in [4u64, 6, 8] {
        let g = e(MatGroup::from_literals(m, &[[-1, 1, -1, 0], [0, 1, 1, 0]]))?;
        ensure(e(g.order())? == 6 && e(g.reduce(2))? == e(MatGroup::gl2(2))?, || {
            format!("integral lift of GL2(2) fails mod {m}")
        })?;
    }
    for m in 3..=16u64 {
        for (gens, o) in [
            ([[0, -1, 1, 1], [0, 1, 1, 0]], 12u64),
            ([[1, 0, 0, -1], [0, 1, -1, 0]], 8),
        ] {
            let g = e(MatGroup::from_literals(m, &gens))?;
            ensure(e(g.order())? == o, || format!("order {o} group has order {} mod {m}", g.order().unwrap()))?;
            if m > 3 {
                for d in (3..m).filter(|d| m % d == 0) {
                    ensure(e(e(g.reduce(d))?.order())? == o, || format!("reduction {m} -> {d} not injective"))?;
                }
            }
        }
    }
    Ok(())
}

fn index_sequence_40a4() -> Outcome {
    let corpus = fixtures::bundled_corpus().map_err(|x| x.to_string())?;
    let f = corpus
        .iter()
        .find(|f| f.id == "profile-40a4")
        .ok_or("fixture profile-40a4 missing")?;
    let r = fixtures::run_fixture(f, &SearchConfig::default());
    ensure(r.status == Status::Pass, || format!("{:?}", r.status))?;
    let Check::Profile { image, kmax } = &f.check else {
        return Err("profile-40a4 is not a profile fixture".into());
    };
    let img = e(image.to_image())?;
    let prof = e(img.index_profile(*kmax))?;
    ensure(prof.u == vec![16, 1, 1], || format!("u = {:?}", prof.u))?;
    let ks = e(img.detect_vertical_coincidences(*kmax))?;
    ensure(ks == vec![1], || format!("coincidences at {ks:?}"))
}

fn random_mat(rng: &mut ChaCha8Rng, n: u64) -> Mat2 {
    loop {
        let e: [i64; 4] = std::array::from_fn(|_| rng.gen_range(0..n as i64));
        let m = Mat2::new(n, e).unwrap();
        if m.is_invertible() {
            return m;
        }
    }
}

fn random_kernel_mat(rng: &mut ChaCha8Rng, p: u64, n: u64) -> Mat2 {
    let e: [i64; 4] = std::array::from_fn(|_| p as i64 * rng.gen_range(0..(n / p) as i64));
    Mat2::new(n, [1 + e[0], e[1], e[2], 1 + e[3]]).unwrap()
}

/// A random subgroup of GL2(Z/nZ), n a power of p: a few random elements
/// and a few elements of the kernel of reduction mod p.
fn random_subgroup(rng: &mut ChaCha8Rng, p: u64, n: u64) -> MatGroup {
    let mut gens = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        gens.push(random_mat(rng, n));
    }
    for _ in 0..rng.gen_range(0..=2) {
        gens.push(random_kernel_mat(rng, p, n));
    }
    MatGroup::new(n, &gens).unwrap()
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut count = 0;
    for (p, depth, runs) in [(3u64, 3u32, 70), (5, 3, 60), (2, 4, 80)] {
        for _ in 0..runs {
            let g = random_subgroup(&mut rng, p, p.pow(depth));
            let img = e(PAdicImage::new(p, depth, g.clone()))?;
            let kmax = depth + 2;
            let prof = e(img.index_profile(kmax))?;
            let label = || format!("p = {p}, generators {:?}", g.generators());
            let p4 = (p as u128).pow(4);
            for k in 0..prof.i.len() {
                ensure(prof.i[k] == prof.j[k] * prof.ell[k], || format!("i != j l at level {}: {}", k + 1, label()))?;
            }
            ensure(prof.u.iter().all(|u| p4 % u == 0), || format!("u = {:?}: {}", prof.u, label()))?;
            let mono = e(img.monotone_ratio_check(kmax))?;
            ensure(mono.passed, || format!("u = {:?} not monotone: {}", prof.u, label()))?;
            e(img.detect_vertical_coincidences(kmax))?;
            count += 1;
        }
    }
    ensure(count >= 200, || format!("only {count} images"))
}

fn complement_search() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let cfg = SearchConfig::default();
    let mut splits = 0;
    for (p, runs) in [(2u64, 17), (3, 17), (5, 16)] {
        for _ in 0..runs {
            let h = random_subgroup(&mut rng, p, p * p);
            let a = e(lifting::sequence_splits(&h, p, &cfg))?;
            let q = e(h.reduce(p))?;
            let b = e(lifting::group_split_liftable_within(&q, p * p, &h, &cfg))?;
            ensure(b.status_name() != "exhausted", || "search budget exhausted".into())?;
            ensure(a.is_some() == b.witness().is_some(), || {
                format!("disagreement on {:?} mod {}", h.generators(), p * p)
            })?;
            splits += a.is_some() as u32;
        }
    }
    let borel = e(MatGroup::from_literals(25, &[[1, 1, 0, 1], [6, 0, 0, 1], [1, 5, 0, 1], [1, 0, 5, 1], [1, 0, 0, 6]]))?;
    ensure(e(borel.order())? == 3125, || "preimage of <T mod 5> has the wrong order".into())?;
    ensure(e(lifting::sequence_splits(&borel, 5, &cfg))?.is_none(), || "preimage of <T mod 5> splits".into())?;
    ensure(splits > 0 && splits < 50, || format!("degenerate sample: {splits} of 50 split"))
}

fn rule_engine() -> Outcome {
    let corpus = fixtures::bundled_corpus().map_err(|x| x.to_string())?;
    let cfg = SearchConfig::default();
    let mut records = 0;
    let mut seen = std::collections::BTreeSet::new();
    for f in &corpus {
        if !matches!(f.check, Check::Audit { .. }) {
            continue;
        }
        records += 1;
        let r = fixtures::run_fixture(f, &cfg);
        ensure(r.status == Status::Pass, || format!("{}: {:?}", f.id, r.status))?;
        for (rule, verdict) in f.expected["verdicts"].as_object().into_iter().flatten() {
            seen.insert((rule.clone(), verdict.as_str().unwrap_or_default().to_string()));
        }
    }
    ensure(records >= 12, || format!("only {records} record fixtures"))?;
    for rule in ["R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9", "R1'", "R2'", "R3'", "R4'"] {
        for v in ["obstructed", "constraint_satisfied"] {
            ensure(seen.contains(&(rule.to_string(), v.to_string())), || format!("no fixture with {rule} {v}"))?;
        }
    }
    Ok(())
}

/// `N(t) / (t + 1)^4` for integer `t`, reduced, by plain integer arithmetic.
fn j_integer(t: i128) -> (i128, i128) {
    const NUM: [i128; 9] = [-1188, -864, 1296, 864, -504, -288, 80, 32, -4];
    let n: i128 = NUM.iter().rev().fold(0, |acc, c| acc * t + c);
    let d = (t + 1).pow(4);
    let g = gcd(n.unsigned_abs() as u64, d.unsigned_abs() as u64) as i128;
    let (n, d) = (n / g, d / g);
    if d < 0 {
        (-n, -d)
    } else {
        (n, d)
    }
}

fn x20b_map() -> Outcome {
    for t in [0i128, 1] {
        let (n, d) = j_integer(t);
        let want = if d == 1 { n.to_string() } else { format!("{n}/{d}") };
        let got = format_rational(&e(j_of_t(&e(parse_rational(&t.to_string()))?))?);
        ensure(got == want, || format!("j({t}) = {got}, independent evaluation {want}"))?;
    }
    ensure(j_integer(0) == (-1188, 1) && j_integer(1) == (-36, 1), || "j(0), j(1) differ from -1188, -36".into())?;
    ensure(matches!(j_of_t(&e(parse_rational("-1"))?), Err(Error::Pole(_))), || "no pole at -1".into())?;
    for t in ["-2", "-1/2", "-3/2", "0", "7/3"] {
        ensure(j_of_t(&e(parse_rational(t))?).is_ok(), || format!("spurious pole at {t}"))?;
    }
    let targets = vec![e(parse_rational("0"))?, e(parse_rational("1728"))?];
    let hits = search_preimages(&targets, 30);
    ensure(hits.values().all(Vec::is_empty), || format!("preimages found: {hits:?}"))
}

fn main() {
    let criteria: Vec<(&str, u64, fn() -> Outcome)> = vec![
        ("order formula for GL2(Z/nZ)", 5, order_formula),
        ("kernel of reduction has order p^4 and exponent p", 0, kernel_structure),
        ("derived subgroups and abelianisations", 60, derived_subgroups),
        ("split lifts of T along p^k -> p^(k+1)", 30, borel_lemma),
        ("explicit split lifts", 0, explicit_lifts),
        ("index ratios of the 40.a4 image", 0, index_sequence_40a4),
        ("index invariants on random p-adic images", 0, monotonicity),
        ("complement search agrees with split lifting", 0, complement_search),
        ("rule engine fixture deck", 0, rule_engine),
        ("j-map of X_20b", 10, x20b_map),
    ];
    let mut failures = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut result = f();
        let took = start.elapsed();
        if limit > 0 && took > Duration::from_secs(limit) && result.is_ok() {
            result = Err(format!("took {took:.2?}, limit {limit} s"));
        }
        let budget = if limit > 0 { format!(" (limit {limit} s)") } else { String::new() };
        match result {
            Ok(()) => println!("PASS  {:>2}  {name}  [{took:.2?}{budget}]", i + 1),
            Err(msg) => {
                failures += 1;
                println!("FAIL  {:>2}  {name}  [{took:.2?}{budget}]  {msg}", i + 1);
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
