//! Matroid machinery behind classified quotas: rank oracles, ordered choice,
//! and validators for paramodularity and the exchange property.
//!
//! A paramodular quota pair `(p, q)` consists of a supermodular `p`, a
//! submodular `q`, and the cross-inequality
//! `q(B) - p(B') >= q(B \ B') - p(B' \ B)`.  When additionally
//! `0 <= p <= q <= |·|`, the induced family `F(p, q)` is a generalized
//! matroid.  The solver never works with `q` directly: it complements the
//! lower quota into the matroid rank `p̄(B) = p(A) - p(A \ B)` and selects
//! doctors with the choice function induced by preference order.

use crate::sets::BitSubset;
use std::fmt;
use thiserror::Error;

/// Largest ground size accepted by the exhaustive validators.
pub const VALIDATION_LIMIT: usize = 14;

/// An integer-valued set function over a fixed ground.
pub trait SetFunction {
    fn ground_size(&self) -> usize;
    fn value(&self, b: &BitSubset) -> u32;
}

/// A matroid rank oracle: monotone, submodular, with unit increments.
pub trait RankOracle {
    fn ground_size(&self) -> usize;
    fn rank(&self, b: &BitSubset) -> u32;
}

/// Mask-indexed value table over a ground of at most 64 elements.  Serves as
/// either a plain set function or a rank oracle, depending on provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableFn {
    ground: usize,
    values: Vec<u32>,
}

impl TableFn {
    pub fn new(ground: usize, values: Vec<u32>) -> Self {
        assert_eq!(values.len(), 1usize << ground);
        TableFn { ground, values }
    }

    /// Tabulates `f` over every subset of its ground.
    pub fn tabulate(f: &dyn SetFunction) -> Self {
        let n = f.ground_size();
        assert!(n <= VALIDATION_LIMIT, "tabulation limited to {VALIDATION_LIMIT} elements");
        let values = (0u64..1 << n)
            .map(|mask| f.value(&BitSubset::from_mask(n, mask)))
            .collect();
        TableFn { ground: n, values }
    }

    #[inline]
    pub fn at(&self, mask: u64) -> u32 {
        self.values[mask as usize]
    }
}

impl SetFunction for TableFn {
    fn ground_size(&self) -> usize {
        self.ground
    }
    fn value(&self, b: &BitSubset) -> u32 {
        self.at(b.as_mask())
    }
}

impl RankOracle for TableFn {
    fn ground_size(&self) -> usize {
        self.ground
    }
    fn rank(&self, b: &BitSubset) -> u32 {
        self.at(b.as_mask())
    }
}

/// Rank `min(k, |B|)`: any `k` elements are independent.
#[derive(Clone, Debug)]
pub struct UniformMatroid {
    pub ground: usize,
    pub k: u32,
}

impl RankOracle for UniformMatroid {
    fn ground_size(&self) -> usize {
        self.ground
    }
    fn rank(&self, b: &BitSubset) -> u32 {
        (b.card() as u32).min(self.k)
    }
}

/// Disjoint blocks with per-block caps; elements outside every block are
/// unconstrained.
#[derive(Clone, Debug)]
pub struct PartitionMatroid {
    ground: usize,
    blocks: Vec<(BitSubset, u32)>,
    unblocked: BitSubset,
}

impl PartitionMatroid {
    pub fn new(ground: usize, blocks: Vec<(BitSubset, u32)>) -> Self {
        let mut seen = BitSubset::empty(ground);
        for (members, _) in &blocks {
            assert_eq!(members.intersection_card(&seen), 0, "blocks must be disjoint");
            seen = seen.union(members);
        }
        PartitionMatroid {
            ground,
            unblocked: seen.complement(),
            blocks,
        }
    }
}

impl RankOracle for PartitionMatroid {
    fn ground_size(&self) -> usize {
        self.ground
    }
    fn rank(&self, b: &BitSubset) -> u32 {
        let capped: u32 = self
            .blocks
            .iter()
            .map(|(members, cap)| (members.intersection_card(b) as u32).min(*cap))
            .sum();
        capped + self.unblocked.intersection_card(b) as u32
    }
}

/// The complement rank `p̄(B) = p(A) - p(A \ B)` of a supermodular lower
/// quota `p`.
///
/// For a valid lower quota this is a matroid rank function with
/// `p̄(A) = p(A)`, which is what lets a lower-quota problem masquerade as an
/// upper-quota one.  Caching, where worthwhile, lives in the underlying
/// evaluator.
pub struct ComplementRank<'a> {
    p: &'a dyn SetFunction,
    total: u32,
}

impl<'a> ComplementRank<'a> {
    pub fn total(&self) -> u32 {
        self.total
    }
}

pub fn complement(p: &dyn SetFunction) -> ComplementRank<'_> {
    let total = p.value(&BitSubset::full(p.ground_size()));
    ComplementRank { p, total }
}

impl RankOracle for ComplementRank<'_> {
    fn ground_size(&self) -> usize {
        self.p.ground_size()
    }
    fn rank(&self, b: &BitSubset) -> u32 {
        self.total - self.p.value(&b.complement())
    }
}

impl SetFunction for ComplementRank<'_> {
    fn ground_size(&self) -> usize {
        self.p.ground_size()
    }
    fn value(&self, b: &BitSubset) -> u32 {
        self.rank(b)
    }
}

/// A strict preference order over ground positions: `order[i]` is the
/// element ranked `i`-th best.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedGround {
    order: Vec<u32>,
}

impl OrderedGround {
    /// Ground positions already sorted best-first (the layout used by
    /// hospital preference lists).
    pub fn identity(n: usize) -> Self {
        OrderedGround {
            order: (0..n as u32).collect(),
        }
    }

    pub fn new(order: Vec<u32>) -> Self {
        let mut seen = vec![false; order.len()];
        for &e in &order {
            assert!(
                (e as usize) < order.len() && !std::mem::replace(&mut seen[e as usize], true),
                "order must be a permutation of 0..n"
            );
        }
        OrderedGround { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn positions(&self) -> &[u32] {
        &self.order
    }
}

/// The choice function induced by a rank oracle and a preference order:
/// scanning best-first, an element of `x` is kept exactly when it enlarges
/// the rank of the prefix of `x` seen so far.
///
/// Uses at most `|x|` rank evaluations.  The result is the most-preferred
/// maximal independent subset of `x`.
pub fn choose<R: RankOracle + ?Sized>(order: &OrderedGround, rank: &R, x: &BitSubset) -> BitSubset {
    let n = order.len();
    debug_assert_eq!(n, rank.ground_size());
    debug_assert_eq!(n, x.universe());
    let mut prefix = BitSubset::empty(n);
    let mut selected = BitSubset::empty(n);
    let mut current = 0u32;
    for &e in &order.order {
        if x.contains(e as usize) {
            prefix.insert(e as usize);
            let r = rank.rank(&prefix);
            debug_assert!(r == current || r == current + 1, "rank increments must be 0 or 1");
            if r > current {
                selected.insert(e as usize);
                current = r;
            }
        }
    }
    selected
}

/// Which paramodularity requirement failed, with a witness pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamodularViolation {
    /// `p(B) + p(B') > p(B ∪ B') + p(B ∩ B')`.
    NotSupermodular { b: SetWitness, c: SetWitness },
    /// `q(B) + q(B') < q(B ∪ B') + q(B ∩ B')`.
    NotSubmodular { b: SetWitness, c: SetWitness },
    /// `q(B) - p(B') < q(B \ B') - p(B' \ B)`.
    CrossInequality { b: SetWitness, c: SetWitness },
    /// `0 <= p(B) <= q(B) <= |B|` fails.
    BoundsOrder { b: SetWitness },
}

impl fmt::Display for ParamodularViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamodularViolation::NotSupermodular { b, c } => {
                write!(f, "lower quota is not supermodular on {b} and {c}")
            }
            ParamodularViolation::NotSubmodular { b, c } => {
                write!(f, "upper quota is not submodular on {b} and {c}")
            }
            ParamodularViolation::CrossInequality { b, c } => {
                write!(f, "cross-inequality fails on {b} and {c}")
            }
            ParamodularViolation::BoundsOrder { b } => {
                write!(f, "0 <= p <= q <= |B| fails on {b}")
            }
        }
    }
}

/// A subset witness rendered as its member positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetWitness(pub Vec<usize>);

impl SetWitness {
    fn from_mask(n: usize, mask: u64) -> Self {
        SetWitness(BitSubset::from_mask(n, mask).iter().collect())
    }
}

impl fmt::Display for SetWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamodularOutcome {
    Ok,
    /// Exhaustive checking over `2^n` subset pairs is off the table.
    GroundTooLarge { size: usize, limit: usize },
    Violation(ParamodularViolation),
}

/// Exhaustively verifies that `(p, q)` is a g-matroidal pair: paramodular
/// with `0 <= p <= q <= |·|`.  Grounds above [`VALIDATION_LIMIT`] are
/// refused rather than silently sampled.
pub fn validate_paramodular(p: &dyn SetFunction, q: &dyn SetFunction) -> ParamodularOutcome {
    let n = p.ground_size();
    assert_eq!(n, q.ground_size(), "p and q must share a ground");
    if n > VALIDATION_LIMIT {
        return ParamodularOutcome::GroundTooLarge {
            size: n,
            limit: VALIDATION_LIMIT,
        };
    }
    let pt = TableFn::tabulate(p);
    let qt = TableFn::tabulate(q);
    let witness = |mask: u64| SetWitness::from_mask(n, mask);
    for b in 0u64..1 << n {
        let size = b.count_ones();
        if !(pt.at(b) <= qt.at(b) && qt.at(b) <= size) {
            return ParamodularOutcome::Violation(ParamodularViolation::BoundsOrder {
                b: witness(b),
            });
        }
    }
    for b in 0u64..1 << n {
        for c in 0u64..1 << n {
            if pt.at(b) + pt.at(c) > pt.at(b | c) + pt.at(b & c) {
                return ParamodularOutcome::Violation(ParamodularViolation::NotSupermodular {
                    b: witness(b),
                    c: witness(c),
                });
            }
            if qt.at(b) + qt.at(c) < qt.at(b | c) + qt.at(b & c) {
                return ParamodularOutcome::Violation(ParamodularViolation::NotSubmodular {
                    b: witness(b),
                    c: witness(c),
                });
            }
            // q(B) - p(C) >= q(B \ C) - p(C \ B), rearranged to avoid
            // unsigned underflow.
            if qt.at(b) + pt.at(c & !b) < qt.at(b & !c) + pt.at(c) {
                return ParamodularOutcome::Violation(ParamodularViolation::CrossInequality {
                    b: witness(b),
                    c: witness(c),
                });
            }
        }
    }
    ParamodularOutcome::Ok
}

/// A failed simultaneous exchange: moving `element` out of `x` can be
/// repaired neither alone nor by any counter-swap from `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExchangeViolation {
    pub x: SetWitness,
    pub y: SetWitness,
    pub element: usize,
}

impl fmt::Display for ExchangeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sets {} and {} admit no exchange for element {}",
            self.x, self.y, self.element
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExchangeOutcome {
    Ok,
    Violation(ExchangeViolation),
}

/// Checks the simultaneous exchange property on an explicit family given as
/// bitmasks over a ground of `n <= 64` positions: for members `X`, `Y` and
/// `e ∈ X \ Y`, either `X - e` and `Y + e` both belong to the family, or
/// some `e' ∈ Y \ X` makes both `X - e + e'` and `Y + e - e'` members.
pub fn validate_exchange(n: usize, family: &[u64]) -> ExchangeOutcome {
    assert!(n <= 64);
    let member = |mask: u64| family.contains(&mask);
    for &x in family {
        for &y in family {
            let mut moving = x & !y;
            while moving != 0 {
                let e = moving.trailing_zeros() as u64;
                moving &= moving - 1;
                let bit = 1u64 << e;
                if member(x & !bit) && member(y | bit) {
                    continue;
                }
                let mut counters = y & !x;
                let mut repaired = false;
                while counters != 0 {
                    let f = counters.trailing_zeros() as u64;
                    counters &= counters - 1;
                    let fbit = 1u64 << f;
                    if member((x & !bit) | fbit) && member((y | bit) & !fbit) {
                        repaired = true;
                        break;
                    }
                }
                if !repaired {
                    return ExchangeOutcome::Violation(ExchangeViolation {
                        x: SetWitness::from_mask(n, x),
                        y: SetWitness::from_mask(n, y),
                        element: e as usize,
                    });
                }
            }
        }
    }
    ExchangeOutcome::Ok
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("the family contains no sets")]
pub struct EmptyFamily;

/// Derives the tightest quota pair of an explicit family:
/// `p(B) = min |X ∩ B|` and `q(B) = max |X ∩ B|` over members `X`.
///
/// For a family with the exchange property this pair is g-matroidal and
/// reproduces the family as `F(p, q)`.
pub fn family_quota_pair(n: usize, family: &[u64]) -> Result<(TableFn, TableFn), EmptyFamily> {
    assert!(n <= VALIDATION_LIMIT);
    if family.is_empty() {
        return Err(EmptyFamily);
    }
    let mut lower = vec![u32::MAX; 1 << n];
    let mut upper = vec![0u32; 1 << n];
    for (mask, (lo, hi)) in lower.iter_mut().zip(&mut upper).enumerate() {
        for &x in family {
            let inter = (x & mask as u64).count_ones();
            *lo = (*lo).min(inter);
            *hi = (*hi).max(inter);
        }
    }
    Ok((TableFn::new(n, lower), TableFn::new(n, upper)))
}
