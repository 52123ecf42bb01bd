//! Finite subgroups of `GL2(Z/nZ)`.
//!
//! A [`MatGroup`] is stored by generators; the sorted element list is built
//! on first use by breadth-first closure and cached.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use crate::arith::{euler_phi, factorize, gcd, unit_closure};
use crate::error::{Error, Result};
use crate::modmat::{check_modulus, gl2_elements, Mat2};

/// `|GL2(Z/nZ)|`, from the product formula over prime powers.
pub fn gl2_order(n: u64) -> u128 {
    factorize(n)
        .into_iter()
        .map(|(q, j)| {
            let q = q as u128;
            q.pow(4 * (j - 1) + 1) * (q - 1) * (q - 1) * (q + 1)
        })
        .product()
}

/// `|SL2(Z/nZ)|`.
pub fn sl2_order(n: u64) -> u128 {
    gl2_order(n) / euler_phi(n) as u128
}

/// Breadth-first closure of `gens` inside `GL2(Z/nZ)`. Returns `None` as soon
/// as more than `limit` elements have been found. The result is sorted.
pub(crate) fn closure(modulus: u32, gens: &[Mat2], limit: usize) -> Option<Vec<Mat2>> {
    let id = Mat2::from_canonical(modulus, [1, 0, 0, 1]);
    let mut seen: HashSet<Mat2> = HashSet::new();
    seen.insert(id);
    let mut queue = vec![id];
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        for g in gens {
            let y = x.mul(g);
            if seen.insert(y) {
                if seen.len() > limit {
                    return None;
                }
                queue.push(y);
            }
        }
    }
    queue.sort_unstable();
    Some(queue)
}

#[derive(Clone, Debug)]
pub struct MatGroup {
    modulus: u32,
    generators: Vec<Mat2>,
    elements: OnceLock<Vec<Mat2>>,
}

impl PartialEq for MatGroup {
    /// Groups are equal when they have the same modulus and element set.
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
            && match (self.elements(), other.elements()) {
                (Ok(a), Ok(b)) => a == b,
                _ => false,
            }
    }
}

/// Invariant factors `d1 | d2 | ... | dr` of a finite abelian group; the
/// trivial group has no factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianInvariants(pub Vec<u64>);

impl AbelianInvariants {
    pub fn order(&self) -> u64 {
        self.0.iter().product()
    }

    pub fn is_cyclic(&self) -> bool {
        self.0.len() <= 1
    }
}

impl std::fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return write!(f, "trivial");
        }
        let parts: Vec<String> = self.0.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

impl MatGroup {
    /// Group generated by `gens`. Generators are validated but the element
    /// set is not built until needed.
    pub fn new(modulus: u64, gens: &[Mat2]) -> Result<Self> {
        let n = check_modulus(modulus)?;
        let mut generators: Vec<Mat2> = Vec::new();
        for g in gens {
            if g.modulus() != n {
                return Err(Error::BadModulus(format!(
                    "generator {g} is not modulo {n}"
                )));
            }
            if !g.is_invertible() {
                return Err(Error::NotInvertible(g.to_string()));
            }
            if !g.is_identity() && !generators.contains(g) {
                generators.push(*g);
            }
        }
        Ok(Self {
            modulus: n,
            generators,
            elements: OnceLock::new(),
        })
    }

    /// Like [`MatGroup::new`] but materialises the element set immediately.
    pub fn generate(modulus: u64, gens: &[Mat2]) -> Result<Self> {
        let g = Self::new(modulus, gens)?;
        g.elements()?;
        Ok(g)
    }

    /// Group from integer literals `[a, b, c, d]`.
    pub fn from_literals(modulus: u64, gens: &[[i64; 4]]) -> Result<Self> {
        let mats = gens
            .iter()
            .map(|e| Mat2::new(modulus, *e))
            .collect::<Result<Vec<_>>>()?;
        Self::new(modulus, &mats)
    }

    pub fn trivial(modulus: u64) -> Result<Self> {
        Self::new(modulus, &[])
    }

    /// `SL2(Z/nZ)`, generated by `S` and `T`.
    pub fn sl2(n: u64) -> Result<Self> {
        Self::new(n, &[Mat2::s(n)?, Mat2::t(n)?])
    }

    /// `GL2(Z/nZ)`, generated by `S`, `T` and diagonal matrices `diag(u, 1)`.
    pub fn gl2(n: u64) -> Result<Self> {
        let mut gens = vec![Mat2::s(n)?, Mat2::t(n)?];
        let mut reached = vec![1 % n];
        for u in 1..n {
            if gcd(u, n) == 1 && reached.binary_search(&u).is_err() {
                gens.push(Mat2::diag(n, u as i64, 1)?);
                let units: Vec<u64> = gens[2..].iter().map(|g| g.entries()[0] as u64).collect();
                reached = unit_closure(&units, n);
            }
        }
        Self::new(n, &gens)
    }

    /// Builds a group from an explicit element list, choosing generators
    /// greedily in lexicographic order. Fails if the list is not a group.
    pub fn from_elements(modulus: u64, elements: &[Mat2]) -> Result<Self> {
        let n = check_modulus(modulus)?;
        let mut set: Vec<Mat2> = elements.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.iter().any(|g| g.modulus() != n || !g.is_invertible()) {
            return Err(Error::BadModulus(format!(
                "element list is not inside GL2(Z/{n}Z)"
            )));
        }
        let mut gens: Vec<Mat2> = Vec::new();
        let mut current = vec![Mat2::from_canonical(n, [1, 0, 0, 1])];
        for x in &set {
            if current.binary_search(x).is_ok() {
                continue;
            }
            gens.push(*x);
            current = closure(n, &gens, set.len()).ok_or_else(|| {
                Error::InternalInconsistency("element list is not closed".into())
            })?;
        }
        if current != set {
            return Err(Error::InternalInconsistency(
                "element list is not a group".into(),
            ));
        }
        let g = Self::new(modulus, &gens)?;
        let _ = g.elements.set(set);
        Ok(g)
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn generators(&self) -> &[Mat2] {
        &self.generators
    }

    /// Sorted element list, computed on first call.
    pub fn elements(&self) -> Result<&[Mat2]> {
        if let Some(e) = self.elements.get() {
            return Ok(e);
        }
        let cap = crate::group_cap();
        let e = closure(self.modulus, &self.generators, cap)
            .ok_or(Error::GroupTooLarge { cap })?;
        let _ = self.elements.set(e);
        Ok(self.elements.get().expect("just set"))
    }

    pub fn is_materialized(&self) -> bool {
        self.elements.get().is_some()
    }

    pub fn order(&self) -> Result<u64> {
        Ok(self.elements()?.len() as u64)
    }

    pub fn contains(&self, g: &Mat2) -> Result<bool> {
        if g.modulus() != self.modulus {
            return Ok(false);
        }
        Ok(self.elements()?.binary_search(g).is_ok())
    }

    pub fn is_subgroup_of(&self, other: &MatGroup) -> Result<bool> {
        if self.modulus != other.modulus {
            return Ok(false);
        }
        for g in &self.generators {
            if !other.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True when `self` is a normal subgroup of `g`.
    pub fn is_normal_in(&self, g: &MatGroup) -> Result<bool> {
        if !self.is_subgroup_of(g)? {
            return Ok(false);
        }
        for x in &g.generators {
            for h in &self.generators {
                if !self.contains(&h.conjugate_by(x)?)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn index_in(&self, g: &MatGroup) -> Result<u64> {
        if !self.is_subgroup_of(g)? {
            return Err(Error::InternalInconsistency("not a subgroup".into()));
        }
        Ok(g.order()? / self.order()?)
    }

    /// Image of the group under reduction modulo `m`.
    pub fn reduce(&self, m: u64) -> Result<MatGroup> {
        if m == self.modulus as u64 {
            return Ok(self.clone());
        }
        let gens = self
            .generators
            .iter()
            .map(|g| g.reduce(m))
            .collect::<Result<Vec<_>>>()?;
        MatGroup::new(m, &gens)
    }

    /// Smallest normal subgroup containing `seeds`.
    pub fn normal_closure(&self, seeds: &[Mat2]) -> Result<MatGroup> {
        let mut gens: Vec<Mat2> = Vec::new();
        for s in seeds {
            if !s.is_identity() && !gens.contains(s) {
                gens.push(*s);
            }
        }
        let mut h = MatGroup::new(self.modulus as u64, &gens)?;
        loop {
            let mut added = None;
            'scan: for x in &h.generators {
                for g in &self.generators {
                    let c = x.conjugate_by(g)?;
                    if !h.contains(&c)? {
                        added = Some(c);
                        break 'scan;
                    }
                }
            }
            match added {
                Some(c) => {
                    gens.push(c);
                    h = MatGroup::new(self.modulus as u64, &gens)?;
                }
                None => return Ok(h),
            }
        }
    }

    /// Commutator subgroup, the normal closure of the generator commutators.
    pub fn derived_subgroup(&self) -> Result<MatGroup> {
        let mut seeds = Vec::new();
        for (i, a) in self.generators.iter().enumerate() {
            for b in &self.generators[i + 1..] {
                seeds.push(a.commutator(b)?);
            }
        }
        self.normal_closure(&seeds)
    }

    /// Invariant factors of `self / n`.
    pub fn abelian_invariants(&self, n: &MatGroup) -> Result<AbelianInvariants> {
        if n.modulus != self.modulus {
            return Err(Error::BadModulus(format!(
                "moduli {} and {} differ",
                self.modulus, n.modulus
            )));
        }
        if !n.is_normal_in(self)? {
            return Err(Error::NotNormal);
        }
        for (i, a) in self.generators.iter().enumerate() {
            for b in &self.generators[i + 1..] {
                if !n.contains(&a.commutator(b)?)? {
                    return Err(Error::NotAbelianQuotient);
                }
            }
        }
        let q = self.order()? / n.order()?;
        let reps = self.coset_representatives(n)?;
        if reps.len() as u64 != q {
            return Err(Error::InternalInconsistency("coset count".into()));
        }
        let orders = reps
            .iter()
            .map(|x| n.class_order(x))
            .collect::<Result<Vec<u64>>>()?;
        let mut exps_by_prime: Vec<(u64, Vec<u32>)> = Vec::new();
        for (p, e) in factorize(q) {
            // s[j] = log_p #{x : x^(p^j) = 1}
            let mut s = vec![0u32];
            for j in 1..=e {
                let pj = p.pow(j);
                let count = orders.iter().filter(|&&o| pj % o == 0).count() as u64;
                let mut log = 0;
                let mut c = count;
                while c > 1 {
                    if c % p != 0 {
                        return Err(Error::InternalInconsistency(
                            "p-torsion count is not a power of p".into(),
                        ));
                    }
                    c /= p;
                    log += 1;
                }
                s.push(log);
            }
            // number of cyclic factors of exponent >= j is s[j] - s[j-1]
            let ge: Vec<u32> = (1..=e as usize).map(|j| s[j] - s[j - 1]).collect();
            let mut exps = Vec::new();
            for j in (1..=e as usize).rev() {
                let exactly = ge[j - 1] - ge.get(j).copied().unwrap_or(0);
                for _ in 0..exactly {
                    exps.push(j as u32);
                }
            }
            exps_by_prime.push((p, exps));
        }
        let r = exps_by_prime.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut factors = vec![1u64; r];
        for (p, exps) in &exps_by_prime {
            for (i, &k) in exps.iter().enumerate() {
                factors[r - 1 - i] *= p.pow(k);
            }
        }
        if factors.iter().product::<u64>() != q || factors.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::InternalInconsistency(
                "invariant factors do not form a divisibility chain".into(),
            ));
        }
        Ok(AbelianInvariants(factors))
    }

    /// One representative (the least element) per left coset `xN`.
    pub fn coset_representatives(&self, n: &MatGroup) -> Result<Vec<Mat2>> {
        let nel = n.elements()?;
        let mut assigned: HashSet<Mat2> = HashSet::new();
        let mut reps = Vec::new();
        for x in self.elements()? {
            if assigned.contains(x) {
                continue;
            }
            reps.push(*x);
            for h in nel {
                assigned.insert(x.mul(h));
            }
        }
        Ok(reps)
    }

    /// Order of the class of `x` in the quotient by `self`.
    pub fn class_order(&self, x: &Mat2) -> Result<u64> {
        let mut y = *x;
        let mut k = 1;
        while !self.contains(&y)? {
            y = y.mul(x);
            k += 1;
        }
        Ok(k)
    }

    /// `det(G)` as a sorted subgroup of `(Z/nZ)*`.
    pub fn det_image(&self) -> Vec<u64> {
        let dets: Vec<u64> = self
            .generators
            .iter()
            .map(|g| g.det().value() as u64)
            .collect();
        unit_closure(&dets, self.modulus as u64)
    }

    /// `G ∩ SL2(Z/nZ)`.
    pub fn sl_intersection(&self) -> Result<MatGroup> {
        let els: Vec<Mat2> = self
            .elements()?
            .iter()
            .filter(|g| g.det().value() == 1)
            .copied()
            .collect();
        MatGroup::from_elements(self.modulus as u64, &els)
    }

    /// First `c` in lexicographic order of `GL2(Z/nZ)` with `c g c^-1` in `G`.
    pub fn contains_conjugate_of(&self, g: &Mat2) -> Result<Option<Mat2>> {
        if g.modulus() != self.modulus {
            return Err(Error::BadModulus(format!(
                "{g} is not modulo {}",
                self.modulus
            )));
        }
        if !g.is_invertible() {
            return Err(Error::NotInvertible(g.to_string()));
        }
        let els = self.elements()?;
        for c in gl2_elements(self.modulus) {
            let y = g.conjugate_by(&c)?;
            if els.binary_search(&y).is_ok() {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }

    /// For `modulus = m n` with `gcd(m, n) = 1`: whether `G` is the full
    /// product of its images modulo `m` and `n`.
    pub fn is_fiber_product_trivial(&self, m: u64, n: u64) -> Result<bool> {
        if m < 2 || n < 2 || gcd(m, n) != 1 || m * n != self.modulus as u64 {
            return Err(Error::BadModulus(format!(
                "{m} x {n} is not a coprime factorisation of {}",
                self.modulus
            )));
        }
        Ok(self.order()? == self.reduce(m)?.order()? * self.reduce(n)?.order()?)
    }

    /// Orders of all elements, sorted and deduplicated.
    pub fn element_orders(&self) -> Result<Vec<u64>> {
        let mut out = self
            .elements()?
            .iter()
            .map(|g| g.order())
            .collect::<Result<Vec<u64>>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Groups elements by their reduction modulo `m`.
    pub(crate) fn fibers_over(&self, m: u64) -> Result<HashMap<Mat2, Vec<Mat2>>> {
        let mut map: HashMap<Mat2, Vec<Mat2>> = HashMap::new();
        for g in self.elements()? {
            map.entry(g.reduce(m)?).or_default().push(*g);
        }
        Ok(map)
    }
}
