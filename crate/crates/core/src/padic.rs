//! Index sequences of `p`-adic images.
//!
//! A [`PAdicImage`] is the full preimage in `GL2(Z_p)` of a subgroup of
//! `GL2(Z/p^s Z)`. Its level-`k` orders are computed without listing the level
//! itself: the kernel of `G_k -> G_{k-1}` is an elementary abelian `p`-group,
//! spanned by the Schreier generators of a transversal of `G_{k-1}`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, is_prime, unit_closure};
use crate::error::{Error, Result};
use crate::matgroup::{gl2_order, sl2_order, MatGroup};
use crate::modmat::Mat2;

/// Levels at or below this order are also enumerated to cross-check `i = j l`.
const CROSS_CHECK_ORDER: u128 = 1 << 14;

#[derive(Clone, Debug)]
pub struct PAdicImage {
    p: u32,
    depth: u32,
    base: MatGroup,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexProfile {
    pub p: u64,
    /// `i_k = [GL2(Z/p^k) : G_k]` for `k = 1..=kmax`.
    pub i: Vec<u128>,
    /// `j_k = [(Z/p^k)* : det G_k]`.
    pub j: Vec<u128>,
    /// `l_k = [SL2(Z/p^k) : G_k ∩ SL2]`.
    pub ell: Vec<u128>,
    /// `u_k = i_{k+1} / i_k` for `k = 1..kmax`.
    pub u: Vec<u128>,
    /// Levels `k` with `u_k = p^4`.
    pub coincidences: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub passed: bool,
    /// First `k` with `u_{k+1}` not dividing `u_k`.
    pub first_violation: Option<u32>,
}

fn level_orders_of(p: u32, gens_top: &[Mat2], top: u32) -> Result<Vec<u128>> {
    let cap = crate::group_cap();
    let pk = |k: u32| (p as u64).pow(k);
    let g1 = MatGroup::new(p as u64, &reduce_all(gens_top, p as u64)?)?;
    let mut orders = vec![g1.order()? as u128];
    for k in 2..=top {
        let lower = pk(k - 1);
        let upper = pk(k);
        let gens_up = reduce_all(gens_top, upper)?;
        let id_up = Mat2::identity(upper)?;
        let id_low = Mat2::identity(lower)?;
        // transversal of G_{k-1}, each element carrying a lift in G_k
        let mut lifts: HashMap<Mat2, Mat2> = HashMap::new();
        lifts.insert(id_low, id_up);
        let mut queue = vec![id_low];
        let mut head = 0;
        let mut basis: Vec<[u32; 4]> = Vec::new();
        let unit = lower as u32;
        while head < queue.len() && basis.len() < 4 {
            let x = queue[head];
            head += 1;
            let tx = lifts[&x];
            for g in &gens_up {
                let txg = tx.mul(g);
                let y = txg.reduce(lower)?;
                match lifts.get(&y) {
                    None => {
                        if lifts.len() >= cap {
                            return Err(Error::GroupTooLarge { cap });
                        }
                        lifts.insert(y, txg);
                        queue.push(y);
                    }
                    Some(ty) => {
                        let s = txg.mul(&ty.inverse()?);
                        let e = s.entries();
                        let v = [
                            (e[0] - 1) / unit % p,
                            e[1] / unit % p,
                            e[2] / unit % p,
                            (e[3] - 1) / unit % p,
                        ];
                        insert_vector(&mut basis, v, p);
                    }
                }
            }
        }
        let prev = *orders.last().expect("level 1 present");
        orders.push(prev * (p as u128).pow(basis.len() as u32));
    }
    Ok(orders)
}

/// Adds `v` to a row-echelon basis over `F_p` if it is independent.
fn insert_vector(basis: &mut Vec<[u32; 4]>, mut v: [u32; 4], p: u32) {
    let p64 = p as u64;
    for b in basis.iter() {
        let pivot = b.iter().position(|&x| x != 0).expect("nonzero row");
        if v[pivot] != 0 {
            let f = v[pivot] as u64;
            for i in 0..4 {
                v[i] = ((v[i] as u64 + p64 - f * b[i] as u64 % p64) % p64) as u32;
            }
        }
    }
    if let Some(pivot) = v.iter().position(|&x| x != 0) {
        let inv = crate::arith::mod_inverse(v[pivot] as u64, p64).expect("p prime");
        for x in v.iter_mut() {
            *x = (*x as u64 * inv % p64) as u32;
        }
        // keep other rows reduced at the new pivot
        for b in basis.iter_mut() {
            if b[pivot] != 0 {
                let f = b[pivot] as u64;
                for i in 0..4 {
                    b[i] = ((b[i] as u64 + p64 - f * v[i] as u64 % p64) % p64) as u32;
                }
            }
        }
        basis.push(v);
    }
}

fn reduce_all(gens: &[Mat2], m: u64) -> Result<Vec<Mat2>> {
    gens.iter().map(|g| g.reduce(m)).collect()
}

impl PAdicImage {
    pub fn new(p: u64, depth: u32, base: MatGroup) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::BadModulus(format!("{p} is not prime")));
        }
        if depth == 0 {
            return Err(Error::BadModulus("depth must be at least 1".into()));
        }
        let ps = p.checked_pow(depth).unwrap_or(u64::MAX);
        if base.modulus() as u64 != ps {
            return Err(Error::BadModulus(format!(
                "base group is modulo {}, expected {p}^{depth}",
                base.modulus()
            )));
        }
        Ok(Self {
            p: p as u32,
            depth,
            base,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn base(&self) -> &MatGroup {
        &self.base
    }

    fn pk(&self, k: u32) -> Result<u64> {
        let v = (self.p as u64).checked_pow(k).unwrap_or(u64::MAX);
        crate::modmat::check_modulus(v)?;
        Ok(v)
    }

    /// The image `G_k` modulo `p^k`, materialised subject to the size cap.
    pub fn level_image(&self, k: u32) -> Result<MatGroup> {
        if k == 0 {
            return Err(Error::BadModulus("level must be at least 1".into()));
        }
        let pk = self.pk(k)?;
        if k <= self.depth {
            let g = self.base.reduce(pk)?;
            g.elements()?;
            return Ok(g);
        }
        let mut gens = self
            .base
            .generators()
            .iter()
            .map(|g| g.lift_canonical(pk))
            .collect::<Result<Vec<_>>>()?;
        for j in self.depth..k {
            let q = (self.p as i64).pow(j);
            for e in [[1 + q, 0, 0, 1], [1, q, 0, 1], [1, 0, q, 1], [1, 0, 0, 1 + q]] {
                gens.push(Mat2::new(pk, e)?);
            }
        }
        let g = MatGroup::new(pk, &gens)?;
        g.elements()?;
        Ok(g)
    }

    /// `|G_k|` for `k = 1..=kmax`.
    pub fn level_orders(&self, kmax: u32) -> Result<Vec<u128>> {
        let top = kmax.min(self.depth);
        let mut orders = level_orders_of(self.p, self.base.generators(), top)?;
        let gs = if self.depth <= kmax {
            *orders.last().expect("nonempty")
        } else {
            0
        };
        for k in self.depth + 1..=kmax {
            orders.push(gs * (self.p as u128).pow(4 * (k - self.depth)));
        }
        Ok(orders)
    }

    /// `|det G_k|` for `k = 1..=kmax`.
    pub fn det_orders(&self, kmax: u32) -> Result<Vec<u128>> {
        let ps = self.pk(self.depth)?;
        let dets: Vec<u64> = self
            .base
            .generators()
            .iter()
            .map(|g| g.det().value() as u64)
            .collect();
        let top = unit_closure(&dets, ps);
        let mut out = Vec::new();
        for k in 1..=kmax {
            if k <= self.depth {
                let pk = (self.p as u64).pow(k);
                let mut red: Vec<u64> = top.iter().map(|d| d % pk).collect();
                red.sort_unstable();
                red.dedup();
                out.push(red.len() as u128);
            } else {
                out.push(top.len() as u128 * (self.p as u128).pow(k - self.depth));
            }
        }
        Ok(out)
    }

    pub fn index_profile(&self, kmax: u32) -> Result<IndexProfile> {
        if kmax == 0 {
            return Err(Error::BadModulus("kmax must be at least 1".into()));
        }
        self.pk(kmax)?;
        let p = self.p as u128;
        let orders = self.level_orders(kmax)?;
        let dets = self.det_orders(kmax)?;
        let div = |a: u128, b: u128, what: &str| -> Result<u128> {
            if b == 0 || a % b != 0 {
                return Err(Error::InternalInconsistency(format!(
                    "{b} does not divide {a} ({what})"
                )));
            }
            Ok(a / b)
        };
        let (mut i, mut j, mut ell) = (Vec::new(), Vec::new(), Vec::new());
        for k in 1..=kmax {
            let pk = (self.p as u64).pow(k);
            let gk = orders[k as usize - 1];
            let dk = dets[k as usize - 1];
            let sl_part = div(gk, dk, "G_k ∩ SL2")?;
            if gk <= CROSS_CHECK_ORDER {
                let counted = self.level_image(k)?.sl_intersection()?.order()? as u128;
                if counted != sl_part {
                    return Err(Error::InternalInconsistency(format!(
                        "level {k}: |G ∩ SL2| is {counted}, expected {sl_part}"
                    )));
                }
            }
            i.push(div(gl2_order(pk), gk, "i_k")?);
            j.push(div(euler_phi(pk) as u128, dk, "j_k")?);
            ell.push(div(sl2_order(pk), sl_part, "l_k")?);
        }
        let mut u = Vec::new();
        let mut coincidences = Vec::new();
        for k in 1..kmax as usize {
            if i[k - 1] != j[k - 1] * ell[k - 1] {
                return Err(Error::InternalInconsistency(format!(
                    "i_{k} != j_{k} l_{k}"
                )));
            }
            let uk = div(i[k], i[k - 1], "i_k | i_{k+1}")?;
            if p.pow(4) % uk != 0 {
                return Err(Error::InternalInconsistency(format!(
                    "u_{k} = {uk} does not divide p^4"
                )));
            }
            let jr = div(j[k], j[k - 1], "j_k | j_{k+1}")?;
            if jr != 1 && jr != p {
                return Err(Error::InternalInconsistency(format!(
                    "j_{{k+1}}/j_k = {jr} at k = {k}"
                )));
            }
            if uk == p.pow(4) {
                coincidences.push(k as u32);
            }
            u.push(uk);
        }
        let last = kmax as usize - 1;
        if i[last] != j[last] * ell[last] {
            return Err(Error::InternalInconsistency(format!(
                "i_{kmax} != j_{kmax} l_{kmax}"
            )));
        }
        Ok(IndexProfile {
            p: self.p as u64,
            i,
            j,
            ell,
            u,
            coincidences,
        })
    }

    /// Levels `k < kmax` where `G_{k+1} -> G_k` is an isomorphism, after
    /// checking that such levels propagate downwards as they must.
    pub fn detect_vertical_coincidences(&self, kmax: u32) -> Result<Vec<u32>> {
        let prof = self.index_profile(kmax)?;
        let floor = if self.p == 2 { 2 } else { 1 };
        for &k in &prof.coincidences {
            if k < floor {
                continue;
            }
            for l in floor..k {
                if !prof.coincidences.contains(&l) {
                    return Err(Error::InternalInconsistency(format!(
                        "coincidence at level {k} without one at level {l}"
                    )));
                }
            }
        }
        Ok(prof.coincidences)
    }

    /// Checks `u_{k+1} | u_k` from `k = 1` (odd `p`) or `k = 2` (`p = 2`).
    pub fn monotone_ratio_check(&self, kmax: u32) -> Result<MonotoneCheck> {
        let prof = self.index_profile(kmax)?;
        Ok(check_ratio_sequence(self.p as u64, &prof.u))
    }
}

/// The divisibility check on an explicit sequence `u_1, u_2, ...`.
pub fn check_ratio_sequence(p: u64, u: &[u128]) -> MonotoneCheck {
    let start = if p == 2 { 2 } else { 1 };
    for k in start..u.len() {
        // u_{k+1} is u[k], u_k is u[k-1]
        if u[k] == 0 || u[k - 1] % u[k] != 0 {
            return MonotoneCheck {
                passed: false,
                first_violation: Some(k as u32),
            };
        }
    }
    MonotoneCheck {
        passed: true,
        first_violation: None,
    }
}

/// Lower bound for the index of the adelic image of a curve with a
/// `(p^k, p^{k+1})` coincidence.
pub fn adelic_index_lower_bound(p: u64, k: u32) -> Result<u128> {
    if !is_prime(p) || k == 0 {
        return Err(Error::BadModulus(format!(
            "need a prime p and k >= 1, got p = {p}, k = {k}"
        )));
    }
    let p = p as u128;
    Ok(if p == 2 {
        16u128.max(2u128.pow(4 * k - 1))
    } else {
        p.pow(4 * k)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image(p: u64, s: u32, gens: &[[i64; 4]]) -> PAdicImage {
        let g = MatGroup::from_literals(p.pow(s), gens).unwrap();
        PAdicImage::new(p, s, g).unwrap()
    }

    #[test]
    fn sl2_3_profile() {
        let x = PAdicImage::new(3, 1, MatGroup::sl2(3).unwrap()).unwrap();
        let prof = x.index_profile(3).unwrap();
        assert_eq!(prof.i, vec![2, 2, 2]);
        assert_eq!(prof.ell, vec![1, 1, 1]);
        assert_eq!(prof.j, vec![2, 2, 2]);
        assert_eq!(prof.u, vec![1, 1]);
        assert!(prof.coincidences.is_empty());
    }

    #[test]
    fn swap_matrix_mod_4() {
        let x = image(2, 2, &[[0, 1, 1, 0]]);
        let prof = x.index_profile(4).unwrap();
        assert_eq!(prof.u, vec![16, 1, 1]);
        assert_eq!(x.detect_vertical_coincidences(4).unwrap(), vec![1]);
        let m = x.monotone_ratio_check(4).unwrap();
        assert!(m.passed);
    }

    #[test]
    fn tower_orders_match_closure() {
        let x = image(3, 3, &[[1, 1, 0, 1], [2, 0, 0, 1]]);
        let tower = x.level_orders(3).unwrap();
        for k in 1..=3 {
            let direct = x.level_image(k).unwrap().order().unwrap() as u128;
            assert_eq!(tower[k as usize - 1], direct);
        }
    }

    #[test]
    fn preimage_above_depth() {
        let x = image(2, 1, &[[1, 1, 0, 1]]);
        let g3 = x.level_image(3).unwrap();
        assert_eq!(g3.order().unwrap(), 2 * 16 * 16);
        assert_eq!(x.level_orders(3).unwrap(), vec![2, 32, 512]);
    }

    #[test]
    fn ratio_sequence() {
        assert!(check_ratio_sequence(2, &[4, 2, 2, 2, 1]).passed);
        let bad = check_ratio_sequence(3, &[3, 9, 1]);
        assert_eq!(bad.first_violation, Some(1));
    }

    #[test]
    fn adelic_bounds() {
        assert_eq!(adelic_index_lower_bound(3, 1).unwrap(), 81);
        assert_eq!(adelic_index_lower_bound(2, 1).unwrap(), 16);
        assert_eq!(adelic_index_lower_bound(2, 2).unwrap(), 128);
        assert!(adelic_index_lower_bound(4, 1).is_err());
    }

    #[test]
    fn depth_must_match_modulus() {
        let g = MatGroup::sl2(9).unwrap();
        assert!(PAdicImage::new(3, 1, g).is_err());
    }
}
