//! Ramification of division fields and of cyclotomic extensions at a prime
//! ideal `𝔭` above `p`, for `p` not dividing the level.

use crate::arith::{euler_phi, valuation};

use super::record::ReductionType;

/// Bound on `t = e_𝔭(F(E[m]) / F)` implied by the reduction type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RamificationBound {
    /// `t = 1`.
    Unramified,
    /// `v_p(t) = 0`.
    TameAtP,
    /// `v_p(t) <= 1`.
    VpAtMost1,
    /// `v_p(t) <= 3`.
    VpAtMost3,
}

impl RamificationBound {
    /// Largest admissible `v_p(t)`; `None` means `t` itself is 1.
    pub fn max_valuation(self) -> Option<u32> {
        match self {
            RamificationBound::Unramified => None,
            RamificationBound::TameAtP => Some(0),
            RamificationBound::VpAtMost1 => Some(1),
            RamificationBound::VpAtMost3 => Some(3),
        }
    }
}

pub fn ramification_bound(reduction: ReductionType, p: u64) -> RamificationBound {
    use RamificationBound::*;
    match reduction {
        ReductionType::Good { .. } => Unramified,
        ReductionType::MultSplit => TameAtP,
        ReductionType::MultNonSplit if p == 2 => VpAtMost1,
        ReductionType::MultNonSplit => TameAtP,
        ReductionType::Additive { .. } if p == 2 => VpAtMost3,
        ReductionType::Additive { potentially_good: true } if p == 3 => VpAtMost1,
        ReductionType::Additive { .. } => TameAtP,
    }
}

/// Condition on `e = e_𝔭(F / Q)` needed for `F(ζ_{p^k}) ⊆ F(E[m])`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CyclotomicRequirement {
    /// `φ(p^k) | e`.
    PhiDividesE { phi: u64 },
    /// `v_p(e) >= bound`.
    ValuationAtLeast { bound: i64 },
}

impl std::fmt::Display for CyclotomicRequirement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CyclotomicRequirement::PhiDividesE { phi } => write!(f, "{phi} | e"),
            CyclotomicRequirement::ValuationAtLeast { bound } => write!(f, "v_p(e) >= {bound}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RequirementOutcome {
    Permitted(CyclotomicRequirement),
    Fails(CyclotomicRequirement),
}

impl RequirementOutcome {
    pub fn permitted(self) -> bool {
        matches!(self, RequirementOutcome::Permitted(_))
    }
}

pub fn cyclotomic_requirement(
    bound: RamificationBound,
    p: u64,
    k: u32,
    e: u64,
) -> RequirementOutcome {
    let req = match bound.max_valuation() {
        None => CyclotomicRequirement::PhiDividesE {
            phi: euler_phi(p.pow(k)),
        },
        Some(v) => CyclotomicRequirement::ValuationAtLeast {
            bound: k as i64 - 1 - v as i64,
        },
    };
    let ok = match req {
        CyclotomicRequirement::PhiDividesE { phi } => e % phi == 0,
        CyclotomicRequirement::ValuationAtLeast { bound } => valuation(e, p) as i64 >= bound,
    };
    if ok {
        RequirementOutcome::Permitted(req)
    } else {
        RequirementOutcome::Fails(req)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_by_reduction_and_prime() {
        use RamificationBound::*;
        let good = ReductionType::Good { supersingular: None };
        assert_eq!(ramification_bound(good, 5), Unramified);
        assert_eq!(ramification_bound(ReductionType::MultSplit, 2), TameAtP);
        assert_eq!(ramification_bound(ReductionType::MultNonSplit, 2), VpAtMost1);
        assert_eq!(ramification_bound(ReductionType::MultNonSplit, 3), TameAtP);
        let pg = ReductionType::Additive { potentially_good: true };
        let pm = ReductionType::Additive { potentially_good: false };
        assert_eq!(ramification_bound(pg, 3), VpAtMost1);
        assert_eq!(ramification_bound(pm, 3), TameAtP);
        assert_eq!(ramification_bound(pg, 5), TameAtP);
        assert_eq!(ramification_bound(pm, 2), VpAtMost3);
    }

    #[test]
    fn requirements() {
        let r = cyclotomic_requirement(RamificationBound::Unramified, 5, 1, 1);
        assert_eq!(r, RequirementOutcome::Fails(CyclotomicRequirement::PhiDividesE { phi: 4 }));
        assert!(cyclotomic_requirement(RamificationBound::Unramified, 5, 1, 4).permitted());
        assert!(cyclotomic_requirement(RamificationBound::VpAtMost3, 2, 4, 1).permitted());
        assert!(!cyclotomic_requirement(RamificationBound::VpAtMost3, 2, 5, 1).permitted());
        assert!(!cyclotomic_requirement(RamificationBound::TameAtP, 3, 2, 2).permitted());
        assert!(cyclotomic_requirement(RamificationBound::TameAtP, 3, 2, 3).permitted());
    }
}
