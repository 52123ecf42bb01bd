//! Residues and 2x2 matrices over `Z/nZ`.
//!
//! Entries are always stored as canonical representatives in `[0, n)`, so
//! derived equality and ordering agree with equality in the ring.

use std::fmt;

use crate::arith::{gcd, mod_inverse};
use crate::error::{Error, Result};
use crate::matgroup::gl2_order;

/// Largest modulus accepted anywhere in the crate.
pub const MAX_MODULUS: u32 = 1 << 20;

pub(crate) fn check_modulus(n: u64) -> Result<u32> {
    if n < 2 || n > MAX_MODULUS as u64 {
        return Err(Error::BadModulus(format!(
            "modulus {n} outside 2..={MAX_MODULUS}"
        )));
    }
    Ok(n as u32)
}

fn reduce_i64(v: i64, n: u32) -> u32 {
    v.rem_euclid(n as i64) as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Residue {
    modulus: u32,
    value: u32,
}

impl Residue {
    pub fn new(modulus: u64, value: i64) -> Result<Self> {
        let modulus = check_modulus(modulus)?;
        Ok(Self {
            modulus,
            value: reduce_i64(value, modulus),
        })
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn is_unit(self) -> bool {
        gcd(self.value as u64, self.modulus as u64) == 1
    }

    pub fn inverse(self) -> Option<Self> {
        mod_inverse(self.value as u64, self.modulus as u64).map(|v| Self {
            modulus: self.modulus,
            value: v as u32,
        })
    }

    fn same(self, other: Self) {
        assert_eq!(
            self.modulus, other.modulus,
            "residue arithmetic across different moduli"
        );
    }
}

impl std::ops::Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Self) -> Self {
        self.same(rhs);
        let n = self.modulus as u64;
        Self {
            modulus: self.modulus,
            value: ((self.value as u64 + rhs.value as u64) % n) as u32,
        }
    }
}

impl std::ops::Sub for Residue {
    type Output = Residue;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl std::ops::Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Self {
        Self {
            modulus: self.modulus,
            value: (self.modulus - self.value) % self.modulus,
        }
    }
}

impl std::ops::Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Self) -> Self {
        self.same(rhs);
        let n = self.modulus as u64;
        Self {
            modulus: self.modulus,
            value: (self.value as u64 * rhs.value as u64 % n) as u32,
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

/// A 2x2 matrix `(a, b; c, d)` over `Z/nZ`, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2 {
    modulus: u32,
    entries: [u32; 4],
}

impl Mat2 {
    /// Builds a matrix from arbitrary integers, reducing each entry.
    pub fn new(modulus: u64, entries: [i64; 4]) -> Result<Self> {
        let n = check_modulus(modulus)?;
        Ok(Self {
            modulus: n,
            entries: entries.map(|e| reduce_i64(e, n)),
        })
    }

    pub(crate) fn from_canonical(modulus: u32, entries: [u32; 4]) -> Self {
        debug_assert!(entries.iter().all(|&e| e < modulus));
        Self { modulus, entries }
    }

    pub fn identity(modulus: u64) -> Result<Self> {
        Self::new(modulus, [1, 0, 0, 1])
    }

    /// `S = (0, -1; 1, 0)`.
    pub fn s(modulus: u64) -> Result<Self> {
        Self::new(modulus, [0, -1, 1, 0])
    }

    /// `T = (1, 1; 0, 1)`.
    pub fn t(modulus: u64) -> Result<Self> {
        Self::new(modulus, [1, 1, 0, 1])
    }

    pub fn diag(modulus: u64, a: i64, d: i64) -> Result<Self> {
        Self::new(modulus, [a, 0, 0, d])
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn entries(&self) -> [u32; 4] {
        self.entries
    }

    pub fn entry(&self, i: usize) -> Residue {
        Residue {
            modulus: self.modulus,
            value: self.entries[i],
        }
    }

    /// Entries as integers in `(-n/2, n/2]`, convenient for display and literals.
    pub fn balanced_entries(&self) -> [i64; 4] {
        let n = self.modulus as i64;
        self.entries.map(|e| {
            let e = e as i64;
            if 2 * e > n {
                e - n
            } else {
                e
            }
        })
    }

    pub fn is_identity(&self) -> bool {
        self.entries == [1, 0, 0, 1]
    }

    pub fn det(&self) -> Residue {
        let n = self.modulus as u64;
        let [a, b, c, d] = self.entries.map(|e| e as u64);
        let v = (a * d % n + n - b * c % n) % n;
        Residue {
            modulus: self.modulus,
            value: v as u32,
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.det().is_unit()
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        assert_eq!(
            self.modulus, rhs.modulus,
            "matrix product across different moduli"
        );
        let n = self.modulus as u64;
        let [a, b, c, d] = self.entries.map(|e| e as u64);
        let [e, f, g, h] = rhs.entries.map(|e| e as u64);
        Mat2 {
            modulus: self.modulus,
            entries: [
                ((a * e + b * g) % n) as u32,
                ((a * f + b * h) % n) as u32,
                ((c * e + d * g) % n) as u32,
                ((c * f + d * h) % n) as u32,
            ],
        }
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let inv = self
            .det()
            .inverse()
            .ok_or_else(|| Error::NotInvertible(self.to_string()))?;
        let n = self.modulus as u64;
        let k = inv.value as u64;
        let [a, b, c, d] = self.entries.map(|e| e as u64);
        let neg = |x: u64| (n - x) % n;
        Ok(Mat2 {
            modulus: self.modulus,
            entries: [
                (d * k % n) as u32,
                (neg(b) * k % n) as u32,
                (neg(c) * k % n) as u32,
                (a * k % n) as u32,
            ],
        })
    }

    pub fn pow(&self, mut e: u64) -> Mat2 {
        let mut acc = Mat2::from_canonical(self.modulus, [1, 0, 0, 1]);
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative order, found by iterated multiplication.
    pub fn order(&self) -> Result<u64> {
        if !self.is_invertible() {
            return Err(Error::NotInvertible(self.to_string()));
        }
        let cap = gl2_order(self.modulus as u64);
        let mut x = *self;
        let mut k: u64 = 1;
        while !x.is_identity() {
            x = x.mul(self);
            k += 1;
            if k as u128 > cap {
                return Err(Error::InternalInconsistency(format!(
                    "order of {self} exceeds |GL2| = {cap}"
                )));
            }
        }
        Ok(k)
    }

    /// Image under `Z/nZ -> Z/mZ`; requires `m | n`.
    pub fn reduce(&self, m: u64) -> Result<Mat2> {
        let m32 = check_modulus(m)?;
        if self.modulus % m32 != 0 {
            return Err(Error::BadModulus(format!(
                "{m} does not divide {}",
                self.modulus
            )));
        }
        Ok(Mat2 {
            modulus: m32,
            entries: self.entries.map(|e| e % m32),
        })
    }

    /// Same integer entries read modulo a multiple `mn` of the modulus.
    pub fn lift_canonical(&self, mn: u64) -> Result<Mat2> {
        let target = check_modulus(mn)?;
        if target % self.modulus != 0 {
            return Err(Error::BadModulus(format!(
                "{} does not divide {mn}",
                self.modulus
            )));
        }
        Ok(Mat2 {
            modulus: target,
            entries: self.entries,
        })
    }

    /// `[g, h] = g h g^-1 h^-1`.
    pub fn commutator(&self, h: &Mat2) -> Result<Mat2> {
        Ok(self.mul(h).mul(&self.inverse()?).mul(&h.inverse()?))
    }

    /// `c g c^-1`.
    pub fn conjugate_by(&self, c: &Mat2) -> Result<Mat2> {
        Ok(c.mul(self).mul(&c.inverse()?))
    }

    /// Combines `a mod m` and `b mod n` (coprime) into the matrix mod `mn`.
    pub fn crt(a: &Mat2, b: &Mat2) -> Result<Mat2> {
        let (m, n) = (a.modulus as u64, b.modulus as u64);
        if gcd(m, n) != 1 {
            return Err(Error::BadModulus(format!("{m} and {n} are not coprime")));
        }
        let mn = check_modulus(m * n)?;
        let mut entries = [0u32; 4];
        for (i, e) in entries.iter_mut().enumerate() {
            *e = crate::arith::crt(a.entries[i] as u64, m, b.entries[i] as u64, n) as u32;
        }
        Ok(Mat2 {
            modulus: mn,
            entries,
        })
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.balanced_entries();
        write!(f, "({a},{b};{c},{d}) mod {}", self.modulus)
    }
}

/// Iterates over `GL2(Z/nZ)` in lexicographic order of canonical entries.
pub fn gl2_elements(n: u32) -> impl Iterator<Item = Mat2> {
    (0..n).flat_map(move |a| {
        (0..n).flat_map(move |b| {
            (0..n).flat_map(move |c| {
                (0..n).filter_map(move |d| {
                    let m = Mat2::from_canonical(n, [a, b, c, d]);
                    m.is_invertible().then_some(m)
                })
            })
        })
    })
}
