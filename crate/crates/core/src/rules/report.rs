use std::fmt;

use serde_json::{json, Value};

/// Rule identifiers, declared in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    R9,
    R1p,
    R2p,
    R3p,
    R4p,
    /// Decomposition along the entanglement set.
    S,
    /// Cube root of the `j`-invariant, informational only.
    J3,
}

impl RuleId {
    pub fn code(self) -> &'static str {
        match self {
            RuleId::R1 => "R1",
            RuleId::R2 => "R2",
            RuleId::R3 => "R3",
            RuleId::R4 => "R4",
            RuleId::R5 => "R5",
            RuleId::R6 => "R6",
            RuleId::R7 => "R7",
            RuleId::R8 => "R8",
            RuleId::R9 => "R9",
            RuleId::R1p => "R1'",
            RuleId::R2p => "R2'",
            RuleId::R3p => "R3'",
            RuleId::R4p => "R4'",
            RuleId::S => "S",
            RuleId::J3 => "J3",
        }
    }

    /// Name of the result the rule rests on.
    pub fn citation(self) -> &'static str {
        match self {
            RuleId::R1 => "Thm. coincidence-ramified-or-bad-reduction",
            RuleId::R2 => "Cor. coincidence-and-reduction",
            RuleId::R3 => "Cor. greatest-prime-divisor-coincidence",
            RuleId::R4 => "Cor. vertical-coincidence-trivial-intersection",
            RuleId::R5 => "Thm. ramification-vertical-coincidence",
            RuleId::R6 => "Prop. coincidence-CM",
            RuleId::R7 => "Thm. large-image-odd-level",
            RuleId::R8 => "Thm. T-and-vertical-coincidence",
            RuleId::R9 => "Lemma cyclic-subextension-element-order",
            RuleId::R1p => "Thm. coincidence-and-reduction-two-curves",
            RuleId::R2p => "Thm. vertical-coincidence-two-curves",
            RuleId::R3p => "Thm. divisibility-two-curves",
            RuleId::R4p => "Thm. large-image-two-curves",
            RuleId::S => "Lemma coincidence-primes-in-S",
            RuleId::J3 => "Lemma j-cube-root",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Obstructed,
    ConstraintSatisfied,
    /// The rule is relevant but the named record field is missing.
    NotApplicable(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Obstructed => "obstructed",
            Verdict::ConstraintSatisfied => "constraint_satisfied",
            Verdict::NotApplicable(_) => "not_applicable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub rule: RuleId,
    pub verdict: Verdict,
    pub detail: String,
}

impl Finding {
    pub fn citation(&self) -> String {
        format!("{} / {}", self.rule.code(), self.rule.citation())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionReport {
    pub m: u64,
    pub n: u64,
    pub two_curve: bool,
    pub findings: Vec<Finding>,
}

impl ObstructionReport {
    pub fn obstructed(&self) -> bool {
        self.findings
            .iter()
            .any(|f| f.verdict == Verdict::Obstructed)
    }

    pub fn finding(&self, rule: RuleId) -> Option<&Finding> {
        self.findings.iter().find(|f| f.rule == rule)
    }

    pub fn to_json(&self) -> Value {
        let findings: Vec<Value> = self
            .findings
            .iter()
            .map(|f| {
                let mut v = json!({
                    "rule": f.rule.code(),
                    "verdict": f.verdict.name(),
                    "detail": f.detail,
                    "citation": f.citation(),
                });
                if let Verdict::NotApplicable(field) = &f.verdict {
                    v["missing"] = json!(field);
                }
                v
            })
            .collect();
        json!({
            "m": self.m,
            "n": self.n,
            "two_curve": self.two_curve,
            "overall": if self.obstructed() { "obstructed" } else { "not_obstructed" },
            "findings": findings,
        })
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let rhs = if self.two_curve { "F(E'[n])" } else { "F(E[n])" };
        out.push_str(&format!(
            "query: F(E[m]) = {rhs} with m = {}, n = {}\n",
            self.m, self.n
        ));
        for f in &self.findings {
            let tag = match &f.verdict {
                Verdict::Obstructed => "OBSTRUCTED".to_string(),
                Verdict::ConstraintSatisfied => "satisfied".to_string(),
                Verdict::NotApplicable(field) => format!("n/a (missing {field})"),
            };
            out.push_str(&format!("{:<55} {:<28} {}\n", f.citation(), tag, f.detail));
        }
        out.push_str(if self.obstructed() {
            "overall: obstructed\n"
        } else {
            "overall: not obstructed\n"
        });
        out
    }
}
