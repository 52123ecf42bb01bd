use crate::error::{Error, Result};
use crate::matgroup::{sl2_order, MatGroup};
use crate::modmat::Mat2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbelianPart {
    /// `F(E[m]) ∩ F^ab = F(ζ_m)`.
    FullCyclotomic,
    /// `F(E[m]) ∩ F^ab` is a cyclic cubic extension of `F(ζ_m)`.
    CyclotomicPlusZ3,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LargeImageReport {
    pub contains_sl2: bool,
    pub derived_is_sl2: bool,
    pub abelian_part: AbelianPart,
}

pub(crate) fn contains_sl2(g: &MatGroup) -> Result<bool> {
    let m = g.modulus() as u64;
    Ok(g.contains(&Mat2::s(m)?)? && g.contains(&Mat2::t(m)?)?)
}

/// Structure of an image `SL2(Z/mZ) <= G <= GL2(Z/mZ)` for odd `m`.
pub fn large_image_analysis(g: &MatGroup) -> Result<LargeImageReport> {
    let m = g.modulus() as u64;
    if m % 2 == 0 {
        return Err(Error::BadModulus(format!("level {m} is even")));
    }
    if !contains_sl2(g)? {
        return Err(Error::NotLarge(m as u32));
    }
    let derived_is_sl2 = g.derived_subgroup()?.order()? as u128 == sl2_order(m);
    let abelian_part = if derived_is_sl2 {
        AbelianPart::FullCyclotomic
    } else if m % 3 == 0 {
        AbelianPart::CyclotomicPlusZ3
    } else {
        return Err(Error::InternalInconsistency(format!(
            "derived subgroup of a large image at level {m} prime to 3 is proper"
        )));
    };
    Ok(LargeImageReport {
        contains_sl2: true,
        derived_is_sl2,
        abelian_part,
    })
}
