//! Split lifts along the reduction `GL2(Z/mnZ) -> GL2(Z/mZ)`.
//!
//! A subgroup `G` of `GL2(Z/mZ)` is split liftable modulo `mn` when some
//! subgroup of `GL2(Z/mnZ)` maps isomorphically onto `G`. The search picks one
//! fibre element per generator, depth first, and abandons a branch as soon as
//! the partial closure is larger than the group it is supposed to cover.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matgroup::{closure, MatGroup};
use crate::modmat::{check_modulus, Mat2};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    /// Maximum number of candidate evaluations before giving up.
    pub budget: u64,
    /// Seed for the sample of elements used by the element-level pre-check.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            seed: 0,
        }
    }
}

/// A validated pair `m | mn` with `m < mn`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LiftProblem {
    pub base: u32,
    pub target: u32,
}

impl LiftProblem {
    pub fn new(base: u64, target: u64) -> Result<Self> {
        let b = check_modulus(base)?;
        let t = check_modulus(target)?;
        if t % b != 0 || t == b {
            return Err(Error::BadModulus(format!(
                "{base} is not a proper divisor of {target}"
            )));
        }
        Ok(Self { base: b, target: t })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LiftStatus<W> {
    Liftable(W),
    NotLiftable,
    Exhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftResult<W> {
    pub status: LiftStatus<W>,
    pub search_count: u64,
}

impl<W> LiftResult<W> {
    pub fn witness(&self) -> Option<&W> {
        match &self.status {
            LiftStatus::Liftable(w) => Some(w),
            _ => None,
        }
    }

    pub fn status_name(&self) -> &'static str {
        match self.status {
            LiftStatus::Liftable(_) => "liftable",
            LiftStatus::NotLiftable => "not_liftable",
            LiftStatus::Exhausted => "exhausted",
        }
    }
}

/// Kernel of `GL2(Z/mnZ) -> GL2(Z/mZ)`, as an explicit group.
pub fn reduction_kernel(target: u64, base: u64) -> Result<MatGroup> {
    let pr = LiftProblem::new(base, target)?;
    let id = Mat2::from_canonical(pr.base, [1, 0, 0, 1]);
    let els = lift_fibers_of(&id, pr);
    MatGroup::from_elements(target, &els)
}

/// All invertible matrices modulo `target` reducing to `g`, sorted.
pub fn lift_fibers(g: &Mat2, target: u64) -> Result<Vec<Mat2>> {
    let pr = LiftProblem::new(g.modulus() as u64, target)?;
    Ok(lift_fibers_of(g, pr))
}

fn lift_fibers_of(g: &Mat2, pr: LiftProblem) -> Vec<Mat2> {
    let m = pr.base;
    let k = pr.target / pr.base;
    let e = g.entries();
    let mut out = Vec::with_capacity((k as usize).pow(4));
    for i0 in 0..k {
        for i1 in 0..k {
            for i2 in 0..k {
                for i3 in 0..k {
                    let x = Mat2::from_canonical(
                        pr.target,
                        [e[0] + m * i0, e[1] + m * i1, e[2] + m * i2, e[3] + m * i3],
                    );
                    if x.is_invertible() {
                        out.push(x);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Whether some lift of `g` to `target` has the same order as `g`. The
/// witness is the first such lift in lexicographic order.
pub fn element_split_liftable(g: &Mat2, target: u64) -> Result<LiftResult<Mat2>> {
    let ord = g.order()?;
    let mut count = 0;
    for x in lift_fibers(g, target)? {
        count += 1;
        if x.pow(ord).is_identity() {
            return Ok(LiftResult {
                status: LiftStatus::Liftable(x),
                search_count: count,
            });
        }
    }
    Ok(LiftResult {
        status: LiftStatus::NotLiftable,
        search_count: count,
    })
}

enum Outcome {
    Found(Vec<Mat2>),
    NotFound,
    Exhausted,
}

struct Dfs<'a> {
    target: u32,
    candidates: &'a [Vec<Mat2>],
    prefix_orders: &'a [usize],
    budget: u64,
    count: u64,
}

impl Dfs<'_> {
    fn run(&mut self, chosen: &mut Vec<Mat2>) -> Outcome {
        let depth = chosen.len();
        if depth == self.candidates.len() {
            return Outcome::Found(chosen.clone());
        }
        let want = self.prefix_orders[depth];
        for c in &self.candidates[depth] {
            self.count += 1;
            if self.count > self.budget {
                return Outcome::Exhausted;
            }
            chosen.push(*c);
            let fits = closure(self.target, chosen, want).is_some_and(|els| els.len() == want);
            if fits {
                match self.run(chosen) {
                    Outcome::NotFound => {}
                    other => return other,
                }
            }
            chosen.pop();
        }
        Outcome::NotFound
    }
}

/// Whether `G` (mod `m`) has a subgroup of `GL2(Z/target Z)` projecting
/// isomorphically onto it.
pub fn group_split_liftable(
    g: &MatGroup,
    target: u64,
    cfg: &SearchConfig,
) -> Result<LiftResult<MatGroup>> {
    split_search(g, target, None, cfg)
}

/// As [`group_split_liftable`], restricted to lifts lying inside `within`.
pub fn group_split_liftable_within(
    g: &MatGroup,
    target: u64,
    within: &MatGroup,
    cfg: &SearchConfig,
) -> Result<LiftResult<MatGroup>> {
    if within.modulus() as u64 != target {
        return Err(Error::BadModulus(format!(
            "ambient group is not modulo {target}"
        )));
    }
    split_search(g, target, Some(within), cfg)
}

fn split_search(
    g: &MatGroup,
    target: u64,
    within: Option<&MatGroup>,
    cfg: &SearchConfig,
) -> Result<LiftResult<MatGroup>> {
    let pr = LiftProblem::new(g.modulus() as u64, target)?;
    let fibers_in = within.map(|h| h.fibers_over(pr.base as u64)).transpose()?;
    let fiber = |x: &Mat2| -> Vec<Mat2> {
        match &fibers_in {
            Some(map) => {
                let mut v = map.get(x).cloned().unwrap_or_default();
                v.sort_unstable();
                v
            }
            None => lift_fibers_of(x, pr),
        }
    };
    let gens = g.generators().to_vec();
    let mut count = 0u64;
    if gens.is_empty() {
        return Ok(LiftResult {
            status: LiftStatus::Liftable(MatGroup::trivial(target)?),
            search_count: 0,
        });
    }

    // element-level necessary condition on generators and a seeded sample
    let mut candidates = Vec::with_capacity(gens.len());
    for x in &gens {
        let ord = x.order()?;
        let c: Vec<Mat2> = fiber(x)
            .into_iter()
            .filter(|y| y.pow(ord).is_identity())
            .collect();
        count += 1;
        if c.is_empty() {
            return Ok(LiftResult {
                status: LiftStatus::NotLiftable,
                search_count: count,
            });
        }
        candidates.push(c);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let els = g.elements()?;
    for x in els.choose_multiple(&mut rng, 16.min(els.len())) {
        let ord = x.order()?;
        count += 1;
        if !fiber(x).iter().any(|y| y.pow(ord).is_identity()) {
            return Ok(LiftResult {
                status: LiftStatus::NotLiftable,
                search_count: count,
            });
        }
    }

    let mut prefix_orders = Vec::with_capacity(gens.len());
    for i in 1..=gens.len() {
        prefix_orders.push(
            closure(pr.base, &gens[..i], crate::group_cap())
                .ok_or(Error::GroupTooLarge {
                    cap: crate::group_cap(),
                })?
                .len(),
        );
    }
    let mut dfs = Dfs {
        target: pr.target,
        candidates: &candidates,
        prefix_orders: &prefix_orders,
        budget: cfg.budget,
        count,
    };
    let out = dfs.run(&mut Vec::new());
    let search_count = dfs.count;
    let status = match out {
        Outcome::Found(lifts) => LiftStatus::Liftable(MatGroup::generate(target, &lifts)?),
        Outcome::NotFound => LiftStatus::NotLiftable,
        Outcome::Exhausted => LiftStatus::Exhausted,
    };
    Ok(LiftResult {
        status,
        search_count,
    })
}

/// For `H` modulo `mn`, looks for a complement `C <= H` to the kernel of
/// reduction modulo `base`: `C` meets the kernel trivially and has the order
/// of the image of `H`.
pub fn sequence_splits(h: &MatGroup, base: u64, cfg: &SearchConfig) -> Result<Option<MatGroup>> {
    let pr = LiftProblem::new(base, h.modulus() as u64)?;
    let q = h.reduce(base)?;
    let q_els = q.elements()?;
    let q_order = q_els.len();
    let fibers = h.fibers_over(base)?;

    // minimal generating set of the quotient, chosen by decreasing element order
    let mut by_order: Vec<(u64, Mat2)> = q_els
        .iter()
        .map(|x| x.order().map(|o| (o, *x)))
        .collect::<Result<_>>()?;
    by_order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut qgens: Vec<Mat2> = Vec::new();
    let mut span = vec![Mat2::from_canonical(pr.base, [1, 0, 0, 1])];
    for (_, x) in by_order {
        if span.len() == q_order {
            break;
        }
        if span.binary_search(&x).is_ok() {
            continue;
        }
        qgens.push(x);
        span = closure(pr.base, &qgens, q_order).ok_or_else(|| {
            Error::InternalInconsistency("quotient closure overflow".into())
        })?;
    }
    if qgens.is_empty() {
        return Ok(Some(MatGroup::trivial(pr.target as u64)?));
    }

    let mut lists = Vec::with_capacity(qgens.len());
    for x in &qgens {
        let ord = x.order()?;
        let mut c: Vec<Mat2> = fibers
            .get(x)
            .map(|v| v.iter().filter(|y| y.pow(ord).is_identity()).copied().collect())
            .unwrap_or_default();
        if c.is_empty() {
            return Ok(None);
        }
        c.sort_unstable();
        lists.push(c);
    }

    let mut count = 0u64;
    let mut chosen: Vec<Mat2> = Vec::new();
    let mut idx = vec![0usize; lists.len()];
    // iterative depth-first search over one fibre element per generator
    loop {
        let depth = chosen.len();
        if depth == lists.len() {
            let c = MatGroup::generate(pr.target as u64, &chosen)?;
            return Ok(Some(c));
        }
        if idx[depth] == lists[depth].len() {
            if depth == 0 {
                return Ok(None);
            }
            idx[depth] = 0;
            chosen.pop();
            idx[depth - 1] += 1;
            continue;
        }
        count += 1;
        if count > cfg.budget {
            return Err(Error::SearchBudgetExceeded { budget: cfg.budget });
        }
        chosen.push(lists[depth][idx[depth]]);
        let meets_kernel_trivially = closure(pr.target, &chosen, q_order).is_some_and(|els| {
            els.iter()
                .filter(|y| y.entries().map(|e| e % pr.base) == [1, 0, 0, 1])
                .count()
                == 1
        });
        if !meets_kernel_trivially {
            chosen.pop();
            idx[depth] += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_sizes() {
        assert_eq!(reduction_kernel(9, 3).unwrap().order().unwrap(), 81);
        assert_eq!(reduction_kernel(4, 2).unwrap().order().unwrap(), 16);
        assert_eq!(reduction_kernel(12, 6).unwrap().order().unwrap(), 16);
        assert!(matches!(reduction_kernel(9, 9), Err(Error::BadModulus(_))));
        assert!(matches!(reduction_kernel(10, 3), Err(Error::BadModulus(_))));
    }

    #[test]
    fn t_mod_2_lifts_to_order_two() {
        let t = Mat2::t(2).unwrap();
        let r = element_split_liftable(&t, 4).unwrap();
        let w = *r.witness().unwrap();
        assert_eq!(w, Mat2::new(4, [1, 1, 0, -1]).unwrap());
        assert_eq!(w.order().unwrap(), 2);
    }

    #[test]
    fn t_mod_5_does_not_lift() {
        let r = element_split_liftable(&Mat2::t(5).unwrap(), 25).unwrap();
        assert_eq!(r.status, LiftStatus::NotLiftable);
        assert_eq!(r.search_count, 625);
    }

    #[test]
    fn gl2_2_lifts_to_8() {
        let g = MatGroup::gl2(2).unwrap();
        let r = group_split_liftable(&g, 8, &SearchConfig::default()).unwrap();
        let w = r.witness().unwrap();
        assert_eq!(w.order().unwrap(), 6);
        assert_eq!(w.reduce(2).unwrap(), g);
    }

    #[test]
    fn tiny_budget_is_exhausted_not_refuted() {
        let g = MatGroup::gl2(3).unwrap();
        let r = group_split_liftable(&g, 9, &SearchConfig { budget: 3, seed: 0 }).unwrap();
        assert_eq!(r.status, LiftStatus::Exhausted);
    }

    #[test]
    fn borel_preimage_does_not_split() {
        let h = MatGroup::new(
            25,
            &[
                Mat2::t(25).unwrap(),
                Mat2::new(25, [6, 0, 0, 1]).unwrap(),
                Mat2::new(25, [1, 5, 0, 1]).unwrap(),
                Mat2::new(25, [1, 0, 5, 1]).unwrap(),
                Mat2::new(25, [1, 0, 0, 6]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(h.order().unwrap(), 3125);
        assert_eq!(sequence_splits(&h, 5, &SearchConfig::default()).unwrap(), None);
    }

    #[test]
    fn complement_in_split_extension() {
        let g = MatGroup::from_literals(4, &[[-1, 1, -1, 0], [0, 1, 1, 0]]).unwrap();
        let k = reduction_kernel(4, 2).unwrap();
        let mut gens = g.generators().to_vec();
        gens.extend_from_slice(k.generators());
        let h = MatGroup::new(4, &gens).unwrap();
        assert_eq!(h.order().unwrap(), 96);
        let c = sequence_splits(&h, 2, &SearchConfig::default()).unwrap().unwrap();
        assert_eq!(c.order().unwrap(), 6);
        assert!(c.is_subgroup_of(&h).unwrap());
    }
}
