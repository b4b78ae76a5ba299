//! Turns declarative quota specs into the evaluators the solver drives.
//!
//! Every quota family is handled through two operations: membership
//! (`does this exact set satisfy the constraints?`) and the supermodular
//! lower-quota function `p(B)` = the fewest doctors from `B` that any
//! member of the family contains.  Intervals get a closed form, laminar
//! families a tree DP, staffing constraints a min-cost flow, and small
//! explicit families an exhaustive table.  Explicit families must satisfy
//! the simultaneous exchange property; otherwise the quota pair derived
//! from them would describe a strictly larger family and the solver's
//! answers would not be trustworthy, so compilation refuses them.

pub(crate) mod flow;
mod laminar;

pub(crate) use laminar::{laminar_feasible, non_laminar_pair};

use crate::matroid::{self, ExchangeOutcome, ExchangeViolation, SetFunction, TableFn};
use crate::quota::QuotaSpec;
use crate::sets::BitSubset;
use crate::{HospitalId, MarketInstance};
use laminar::LaminarForest;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;
use thiserror::Error;

/// Why a hospital's quota could not be compiled.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum QuotaCompileError {
    #[error(
        "explicit constraints span {size} acceptable doctors; \
         exhaustive compilation is limited to {limit}"
    )]
    GroundTooLarge { size: usize, limit: usize },
    #[error("no set of doctors satisfies the quota constraints")]
    EmptyFamily,
    #[error("the constraint family is not a generalized matroid: {violation}")]
    NotGeneralizedMatroid { violation: ExchangeViolation },
    #[error("classes {first} and {second} overlap without nesting")]
    NotLaminar { first: usize, second: usize },
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("hospital {hospital}: {kind}")]
pub struct CompileError {
    pub hospital: String,
    pub kind: QuotaCompileError,
}

enum Eval {
    Interval { lower: u32 },
    Table { lower: TableFn },
    Laminar { forest: LaminarForest, memo: Mutex<HashMap<BitSubset, u32>> },
    Staffing { memo: Mutex<HashMap<BitSubset, u32>> },
}

/// A hospital quota ready for the solver: cheap membership tests plus the
/// lower-quota function `p(B) = min {|X ∩ B| : X in the family}`.
pub struct CompiledQuota {
    ground: usize,
    spec: QuotaSpec,
    lower_total: u32,
    eval: Eval,
}

impl CompiledQuota {
    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn spec(&self) -> &QuotaSpec {
        &self.spec
    }

    /// `p(A(h))`: how many seats the hospital must fill overall.
    pub fn lower_total(&self) -> u32 {
        self.lower_total
    }

    /// Does `x` satisfy every quota constraint exactly as stated?
    pub fn member(&self, x: &BitSubset) -> bool {
        self.spec.member(x)
    }

    /// The fewest doctors from `b` contained in any member of the family.
    pub fn lower(&self, b: &BitSubset) -> u32 {
        match &self.eval {
            Eval::Interval { lower } => {
                lower.saturating_sub((self.ground - b.card()) as u32)
            }
            Eval::Table { lower } => lower.at(b.as_mask()),
            Eval::Laminar { forest, memo } => {
                if let Some(&v) = memo.lock().unwrap().get(b) {
                    return v;
                }
                let v = forest.eval(b).expect("family verified nonempty at compile time");
                memo.lock().unwrap().insert(b.clone(), v);
                v
            }
            Eval::Staffing { memo } => {
                if let Some(&v) = memo.lock().unwrap().get(b) {
                    return v;
                }
                let QuotaSpec::Staffing { sections } = &self.spec else {
                    unreachable!("staffing evaluator always carries a staffing spec")
                };
                let v = flow::staffing_lower(sections, b)
                    .expect("family verified nonempty at compile time");
                memo.lock().unwrap().insert(b.clone(), v);
                v
            }
        }
    }
}

impl SetFunction for CompiledQuota {
    fn ground_size(&self) -> usize {
        self.ground
    }
    fn value(&self, b: &BitSubset) -> u32 {
        self.lower(b)
    }
}

impl fmt::Debug for CompiledQuota {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompiledQuota")
            .field("ground", &self.ground)
            .field("spec", &self.spec)
            .field("lower_total", &self.lower_total)
            .finish_non_exhaustive()
    }
}

/// Compiles a single quota over a ground of `ground` acceptable doctors.
pub fn compile_quota(spec: &QuotaSpec, ground: usize) -> Result<CompiledQuota, QuotaCompileError> {
    let eval = match spec {
        QuotaSpec::Interval { lower, upper } => {
            if lower > upper || *lower as usize > ground {
                return Err(QuotaCompileError::EmptyFamily);
            }
            Eval::Interval { lower: *lower }
        }
        QuotaSpec::Explicit { .. } => {
            if ground > matroid::VALIDATION_LIMIT {
                return Err(QuotaCompileError::GroundTooLarge {
                    size: ground,
                    limit: matroid::VALIDATION_LIMIT,
                });
            }
            let family: Vec<u64> = (0u64..1 << ground)
                .filter(|&mask| spec.member(&BitSubset::from_mask(ground, mask)))
                .collect();
            if family.is_empty() {
                return Err(QuotaCompileError::EmptyFamily);
            }
            if let ExchangeOutcome::Violation(violation) = matroid::validate_exchange(ground, &family)
            {
                return Err(QuotaCompileError::NotGeneralizedMatroid { violation });
            }
            let (lower, _upper) =
                matroid::family_quota_pair(ground, &family).expect("family is nonempty");
            Eval::Table { lower }
        }
        QuotaSpec::Laminar { classes } => {
            if let Some((first, second)) = non_laminar_pair(classes) {
                return Err(QuotaCompileError::NotLaminar { first, second });
            }
            if !laminar_feasible(classes, ground) {
                return Err(QuotaCompileError::EmptyFamily);
            }
            Eval::Laminar {
                forest: LaminarForest::build(classes, ground),
                memo: Mutex::new(HashMap::new()),
            }
        }
        QuotaSpec::Staffing { sections } => {
            if !flow::staffing_nonempty(sections, ground) {
                return Err(QuotaCompileError::EmptyFamily);
            }
            Eval::Staffing {
                memo: Mutex::new(HashMap::new()),
            }
        }
    };
    let mut compiled = CompiledQuota {
        ground,
        spec: spec.clone(),
        lower_total: 0,
        eval,
    };
    compiled.lower_total = compiled.lower(&BitSubset::full(ground));
    Ok(compiled)
}

/// A validated market with every hospital quota compiled.
#[derive(Debug)]
pub struct CompiledInstance<'a> {
    instance: &'a MarketInstance,
    quotas: Vec<CompiledQuota>,
}

impl<'a> CompiledInstance<'a> {
    pub fn instance(&self) -> &'a MarketInstance {
        self.instance
    }

    pub fn quota(&self, h: HospitalId) -> &CompiledQuota {
        &self.quotas[h.idx()]
    }

    pub fn quotas(&self) -> &[CompiledQuota] {
        &self.quotas
    }
}

pub fn compile_instance(instance: &MarketInstance) -> Result<CompiledInstance<'_>, CompileError> {
    let mut quotas = Vec::with_capacity(instance.n_hospitals());
    for h in instance.hospitals() {
        let compiled =
            compile_quota(instance.quota(h), instance.ground_size(h)).map_err(|kind| {
                CompileError {
                    hospital: instance.hospital_name(h).to_string(),
                    kind,
                }
            })?;
        quotas.push(compiled);
    }
    Ok(CompiledInstance { instance, quotas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quota::ClassBound;

    fn brute_lower(spec: &QuotaSpec, ground: usize, b: &BitSubset) -> Option<u32> {
        (0u64..1 << ground)
            .filter(|&mask| spec.member(&BitSubset::from_mask(ground, mask)))
            .map(|mask| (mask & b.as_mask()).count_ones())
            .min()
    }

    fn assert_matches_brute(spec: &QuotaSpec, ground: usize) {
        let compiled = compile_quota(spec, ground).unwrap();
        for mask in 0u64..1 << ground {
            let b = BitSubset::from_mask(ground, mask);
            assert_eq!(
                Some(compiled.lower(&b)),
                brute_lower(spec, ground, &b),
                "lower quota mismatch at {mask:#b}"
            );
        }
    }

    #[test]
    fn interval_lower_matches_enumeration() {
        for ground in 0..=4usize {
            for u in 0..=ground as u32 {
                for l in 0..=u {
                    assert_matches_brute(&QuotaSpec::Interval { lower: l, upper: u }, ground);
                }
            }
        }
    }

    #[test]
    fn empty_interval_is_rejected() {
        assert_eq!(
            compile_quota(&QuotaSpec::Interval { lower: 2, upper: 1 }, 4).unwrap_err(),
            QuotaCompileError::EmptyFamily
        );
        assert_eq!(
            compile_quota(&QuotaSpec::Interval { lower: 5, upper: 5 }, 4).unwrap_err(),
            QuotaCompileError::EmptyFamily
        );
    }

    #[test]
    fn explicit_interval_like_family_compiles() {
        let spec = QuotaSpec::Explicit {
            constraints: vec![ClassBound {
                members: BitSubset::full(3),
                lo: 1,
                hi: 2,
            }],
        };
        assert_matches_brute(&spec, 3);
        let compiled = compile_quota(&spec, 3).unwrap();
        assert_eq!(compiled.lower_total(), 1);
        assert!(compiled.member(&BitSubset::from_mask(3, 0b101)));
        assert!(!compiled.member(&BitSubset::full(3)));
    }

    #[test]
    fn paired_complement_family_is_refused() {
        // Four per-pair constraints force either {0,1} or {2,3}; that family
        // has no exchange between its two members.
        let pair = |a: usize, b: usize| ClassBound {
            members: BitSubset::from_indices(4, [a, b]),
            lo: 1,
            hi: 1,
        };
        let spec = QuotaSpec::Explicit {
            constraints: vec![pair(0, 2), pair(0, 3), pair(1, 2), pair(1, 3)],
        };
        // Check the family really is the two complementary pairs.
        let family: Vec<u64> = (0u64..16)
            .filter(|&m| spec.member(&BitSubset::from_mask(4, m)))
            .collect();
        assert_eq!(family, vec![0b0011, 0b1100]);
        match compile_quota(&spec, 4).unwrap_err() {
            QuotaCompileError::NotGeneralizedMatroid { violation } => {
                assert_eq!(violation.element, 0);
            }
            other => panic!("expected exchange refusal, got {other}"),
        }
    }

    #[test]
    fn contradictory_explicit_family_is_empty() {
        let spec = QuotaSpec::Explicit {
            constraints: vec![
                ClassBound { members: BitSubset::from_indices(2, [0]), lo: 1, hi: 1 },
                ClassBound { members: BitSubset::from_indices(2, [0]), lo: 0, hi: 0 },
            ],
        };
        assert_eq!(compile_quota(&spec, 2).unwrap_err(), QuotaCompileError::EmptyFamily);
    }

    #[test]
    fn oversized_explicit_ground_is_refused() {
        let spec = QuotaSpec::Explicit {
            constraints: vec![ClassBound {
                members: BitSubset::full(15),
                lo: 0,
                hi: 15,
            }],
        };
        assert_eq!(
            compile_quota(&spec, 15).unwrap_err(),
            QuotaCompileError::GroundTooLarge { size: 15, limit: matroid::VALIDATION_LIMIT }
        );
    }

    #[test]
    fn laminar_lower_matches_enumeration_and_memo_is_stable() {
        let spec = QuotaSpec::Laminar {
            classes: vec![
                ClassBound { members: BitSubset::from_indices(4, [0, 1]), lo: 1, hi: 2 },
                ClassBound { members: BitSubset::from_indices(4, [0, 1, 2, 3]), lo: 2, hi: 3 },
                ClassBound { members: BitSubset::from_indices(4, [2]), lo: 0, hi: 1 },
            ],
        };
        assert_matches_brute(&spec, 4);
        let compiled = compile_quota(&spec, 4).unwrap();
        let b = BitSubset::from_mask(4, 0b0110);
        assert_eq!(compiled.lower(&b), compiled.lower(&b));
    }

    #[test]
    fn staffing_lower_matches_enumeration() {
        use crate::quota::SectionBound;
        let section = |accepts: &[usize], lo, hi| SectionBound {
            label: format!("s{}", accepts[0]),
            accepts: BitSubset::from_indices(4, accepts.iter().copied()),
            lo,
            hi,
        };
        let spec = QuotaSpec::Staffing {
            sections: vec![section(&[0, 1], 1, 2), section(&[1, 2], 1, 2), section(&[3], 0, 1)],
        };
        assert_matches_brute(&spec, 4);
    }

    #[test]
    fn compiled_laminar_pair_is_paramodular() {
        let spec = QuotaSpec::Laminar {
            classes: vec![
                ClassBound { members: BitSubset::from_indices(3, [0, 1]), lo: 1, hi: 2 },
                ClassBound { members: BitSubset::from_indices(3, [2]), lo: 0, hi: 1 },
            ],
        };
        let ground = 3;
        let compiled = compile_quota(&spec, ground).unwrap();
        // Tight upper counterpart by enumeration.
        let upper = TableFn::new(
            ground,
            (0u64..1 << ground)
                .map(|b| {
                    (0u64..1 << ground)
                        .filter(|&m| spec.member(&BitSubset::from_mask(ground, m)))
                        .map(|m| (m & b).count_ones())
                        .max()
                        .unwrap()
                })
                .collect(),
        );
        assert_eq!(
            matroid::validate_paramodular(&compiled, &upper),
            matroid::ParamodularOutcome::Ok
        );
    }

    #[test]
    fn compile_instance_reports_the_offending_hospital() {
        let data = crate::instance::InstanceBuilder::new()
            .doctor("a", ["h"])
            .doctor("b", ["h"])
            .doctor("c", ["h"])
            .doctor("d", ["h"])
            .hospital(
                "h",
                ["a", "b", "c", "d"],
                crate::quota::QuotaData::Explicit {
                    constraints: vec![
                        crate::quota::ClassData { members: vec!["a".into(), "c".into()], lo: 1, hi: 1 },
                        crate::quota::ClassData { members: vec!["a".into(), "d".into()], lo: 1, hi: 1 },
                        crate::quota::ClassData { members: vec!["b".into(), "c".into()], lo: 1, hi: 1 },
                        crate::quota::ClassData { members: vec!["b".into(), "d".into()], lo: 1, hi: 1 },
                    ],
                },
            )
            .data();
        let inst = MarketInstance::new(&data).unwrap();
        let err = compile_instance(&inst).unwrap_err();
        assert_eq!(err.hospital, "h");
        assert!(matches!(err.kind, QuotaCompileError::NotGeneralizedMatroid { .. }));
    }
}
