//! Curve records and the obstruction audit for division-field coincidences
//! `F(E[m]) = F(E[n])` and `F(E[m]) = F(E'[n])`.

mod audit;
mod large_image;
mod record;
mod report;
mod tables;

pub use audit::{audit, audit_pair};
pub use large_image::{large_image_analysis, AbelianPart, LargeImageReport};
pub use record::{
    CmData, CurveRecord, CyclotomicData, CyclotomicDepth, CyclotomicIntersection, IdealData,
    LocalData, ReductionType,
};
pub use report::{Finding, ObstructionReport, RuleId, Verdict};
pub use tables::{
    cyclotomic_requirement, ramification_bound, CyclotomicRequirement, RamificationBound,
    RequirementOutcome,
};
