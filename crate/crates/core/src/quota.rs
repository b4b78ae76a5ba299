//! Hospital quota specifications.
//!
//! A quota constrains which subsets of a hospital's acceptable doctors
//! `A(h)` it may be assigned.  Every variant induces a family of feasible
//! subsets `F ⊆ 2^A(h)`:
//!
//! * `Interval(l, u)` — `F = { X : l <= |X| <= u }`;
//! * `Explicit` — subsets satisfying every listed class constraint
//!   `lo <= |X ∩ B| <= hi`;
//! * `Laminar` — like `Explicit`, but the classes form a laminar family
//!   (any two are nested or disjoint), which keeps the induced lower-quota
//!   function tractable;
//! * `Staffing` — subsets that can be partitioned over sections: each chosen
//!   doctor is assigned to one section that accepts it, and section `s`
//!   receives between `lo(s)` and `hi(s)` doctors.
//!
//! Internally a quota refers to doctors by their *ground position*: the rank
//! of the doctor in the hospital's preference list (0 = most preferred).

use crate::sets::BitSubset;
use thiserror::Error;

/// A quota over a hospital ground of `n` positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuotaSpec {
    Interval {
        lower: u32,
        upper: u32,
    },
    Explicit {
        constraints: Vec<ClassBound>,
    },
    Laminar {
        classes: Vec<ClassBound>,
    },
    Staffing {
        sections: Vec<SectionBound>,
    },
}

/// Bounds `lo <= |X ∩ members| <= hi` on one doctor class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassBound {
    pub members: BitSubset,
    pub lo: u32,
    pub hi: u32,
}

/// One staffing section: who it accepts and how many it must/may receive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionBound {
    pub label: String,
    pub accepts: BitSubset,
    pub lo: u32,
    pub hi: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuotaError {
    #[error("truncation bound {k} exceeds the upper quota {max} on the full ground")]
    TruncationTooLarge { k: u32, max: u32 },
    #[error("staffing quotas admit no direct truncation; enumerate the family to an explicit quota first")]
    TruncationUnsupported,
}

impl QuotaSpec {
    /// Tests membership of `x` in the induced family.
    ///
    /// `Explicit` quotas are checked against the listed constraints only; no
    /// constraint is inferred for unlisted classes.
    pub fn member(&self, x: &BitSubset) -> bool {
        match self {
            QuotaSpec::Interval { lower, upper } => {
                let k = x.card() as u32;
                *lower <= k && k <= *upper
            }
            QuotaSpec::Explicit { constraints } => class_bounds_ok(constraints, x),
            QuotaSpec::Laminar { classes } => class_bounds_ok(classes, x),
            QuotaSpec::Staffing { sections } => {
                crate::compile::flow::staffing_member(sections, x)
            }
        }
    }

    /// The upper quota on the full ground `A(h)` of size `n`.
    ///
    /// For `Explicit` and `Laminar` this is the listed full-ground bound if
    /// present and `n` otherwise.
    pub fn upper_on_ground(&self, n: usize) -> Option<u32> {
        match self {
            QuotaSpec::Interval { upper, .. } => Some(*upper),
            QuotaSpec::Explicit { constraints } => Some(full_ground_bound(constraints, n)),
            QuotaSpec::Laminar { classes } => Some(full_ground_bound(classes, n)),
            QuotaSpec::Staffing { .. } => None,
        }
    }

    /// Caps the quota at `k` doctors in total: the upper quota on the full
    /// ground becomes `k` while every proper-subset constraint (and every
    /// lower bound) is left unchanged.  The induced family shrinks to
    /// `{ X in F : |X| <= k }`.
    pub fn truncated(&self, n: usize, k: u32) -> Result<QuotaSpec, QuotaError> {
        let max = self
            .upper_on_ground(n)
            .ok_or(QuotaError::TruncationUnsupported)?;
        if k > max {
            return Err(QuotaError::TruncationTooLarge { k, max });
        }
        Ok(match self {
            QuotaSpec::Interval { lower, upper } => QuotaSpec::Interval {
                lower: *lower,
                upper: (*upper).min(k),
            },
            QuotaSpec::Explicit { constraints } => QuotaSpec::Explicit {
                constraints: cap_full_ground(constraints, n, k),
            },
            QuotaSpec::Laminar { classes } => QuotaSpec::Laminar {
                classes: cap_full_ground(classes, n, k),
            },
            QuotaSpec::Staffing { .. } => unreachable!("rejected above"),
        })
    }
}

fn class_bounds_ok(bounds: &[ClassBound], x: &BitSubset) -> bool {
    bounds.iter().all(|c| {
        let k = x.intersection_card(&c.members) as u32;
        c.lo <= k && k <= c.hi
    })
}

fn full_ground_bound(bounds: &[ClassBound], n: usize) -> u32 {
    bounds
        .iter()
        .filter(|c| c.members.card() == n)
        .map(|c| c.hi)
        .min()
        .unwrap_or(n as u32)
}

/// Overwrites (or adds) the full-ground constraint with upper bound `k`,
/// keeping its lower bound.
fn cap_full_ground(bounds: &[ClassBound], n: usize, k: u32) -> Vec<ClassBound> {
    let mut out: Vec<ClassBound> = bounds.to_vec();
    match out.iter_mut().find(|c| c.members.card() == n) {
        Some(c) => c.hi = k,
        None => out.push(ClassBound {
            members: BitSubset::full(n),
            lo: 0,
            hi: k,
        }),
    }
    out
}

/// Name-based quota description, as supplied by callers and file formats.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuotaData {
    Interval { lower: u32, upper: u32 },
    Explicit { constraints: Vec<ClassData> },
    Laminar { classes: Vec<ClassData> },
    Staffing { sections: Vec<SectionData> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassData {
    pub members: Vec<String>,
    pub lo: u32,
    pub hi: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionData {
    pub id: Option<String>,
    pub accepts: Vec<String>,
    pub lo: u32,
    pub hi: u32,
}

impl QuotaData {
    pub fn interval(lower: u32, upper: u32) -> Self {
        QuotaData::Interval { lower, upper }
    }

    pub fn explicit(constraints: &[(&[&str], u32, u32)]) -> Self {
        QuotaData::Explicit {
            constraints: class_data(constraints),
        }
    }

    pub fn laminar(classes: &[(&[&str], u32, u32)]) -> Self {
        QuotaData::Laminar {
            classes: class_data(classes),
        }
    }

    pub fn staffing(sections: &[(&str, &[&str], u32, u32)]) -> Self {
        QuotaData::Staffing {
            sections: sections
                .iter()
                .map(|(id, accepts, lo, hi)| SectionData {
                    id: Some(id.to_string()),
                    accepts: accepts.iter().map(|s| s.to_string()).collect(),
                    lo: *lo,
                    hi: *hi,
                })
                .collect(),
        }
    }
}

fn class_data(raw: &[(&[&str], u32, u32)]) -> Vec<ClassData> {
    raw.iter()
        .map(|(members, lo, hi)| ClassData {
            members: members.iter().map(|s| s.to_string()).collect(),
            lo: *lo,
            hi: *hi,
        })
        .collect()
}
