//! Exhaustive reference solver for small markets.
//!
//! The oracle walks every assignment of doctors to acceptable hospitals (or
//! to none) and evaluates the feasibility, envy and blocking predicates
//! directly, so it works for *any* quota structure — including ones the
//! compiled solver refuses.  It prices the walk up front: if the assignment
//! space `Π_d (|A(d)|+1)` exceeds the budget it refuses with that exact
//! bound rather than starting a search it may not finish.  Branches whose
//! partial rosters can no longer be completed feasibly are pruned, which
//! never changes any count.

pub mod sat;

use crate::instance::{DoctorId, EdgeId, MarketInstance};
use crate::matching::Matching;
use crate::predicates::{find_blocking_pairs, find_justified_envy};
use crate::quota::QuotaSpec;
use crate::sets::BitSubset;
use thiserror::Error;

/// Default cap on the size of the enumerated assignment space.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("assignment space has {bound} nodes, over the budget of {budget}")]
    BudgetExceeded { bound: u128, budget: u128 },
}

/// The number of leaf assignments the oracle would visit without pruning.
pub fn search_space(inst: &MarketInstance) -> u128 {
    inst.doctors()
        .map(|d| inst.doctor_prefs(d).len() as u128 + 1)
        .fold(1u128, |acc, k| acc.saturating_mul(k))
}

/// Exhaustive counts over all matchings of an instance, with the first
/// witness of each kind in the oracle's canonical visiting order (doctors
/// in input order; each doctor tries its preference list best-first, then
/// staying unassigned).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Survey {
    pub feasible: u64,
    pub envy_free: u64,
    pub stable: u64,
    pub first_feasible: Option<Matching>,
    pub first_envy_free: Option<Matching>,
    pub first_stable: Option<Matching>,
}

/// Counts every feasible, envy-free and stable matching of the instance.
pub fn survey(inst: &MarketInstance, budget: u128) -> Result<Survey, OracleError> {
    let mut out = Survey::default();
    let mut walker = Walker::new(inst, budget)?;
    walker.dfs(0, &mut |inst, assign, rosters| {
        if !leaf_feasible(inst, rosters) {
            return false;
        }
        let m = Matching::from_edge_ids(inst, assign.iter().flatten().copied())
            .expect("walker assigns each doctor at most once");
        out.feasible += 1;
        if out.first_feasible.is_none() {
            out.first_feasible = Some(m.clone());
        }
        if find_justified_envy(inst, &m).expect("feasible by construction").is_empty() {
            out.envy_free += 1;
            if out.first_envy_free.is_none() {
                out.first_envy_free = Some(m.clone());
            }
            if find_blocking_pairs(inst, &m).expect("feasible by construction").is_empty() {
                out.stable += 1;
                if out.first_stable.is_none() {
                    out.first_stable = Some(m);
                }
            }
        }
        false
    });
    Ok(out)
}

/// Returns the first envy-free matching in the oracle's canonical order, or
/// `None` after proving there is none.
pub fn exists_envy_free(
    inst: &MarketInstance,
    budget: u128,
) -> Result<Option<Matching>, OracleError> {
    let mut found = None;
    let mut walker = Walker::new(inst, budget)?;
    walker.dfs(0, &mut |inst, assign, rosters| {
        if !leaf_feasible(inst, rosters) {
            return false;
        }
        let m = Matching::from_edge_ids(inst, assign.iter().flatten().copied())
            .expect("walker assigns each doctor at most once");
        if find_justified_envy(inst, &m).expect("feasible by construction").is_empty() {
            found = Some(m);
            return true;
        }
        false
    });
    Ok(found)
}

/// Independent re-count that enumerates all `2^|E|` edge subsets instead of
/// doctor assignments; used to cross-check [`survey`] on tiny instances.
/// Witnesses are not populated — subset order differs from walker order.
pub fn survey_by_subsets(inst: &MarketInstance) -> Survey {
    let ne = inst.n_edges();
    assert!(ne <= 20, "subset survey is for tiny instances only");
    let mut out = Survey::default();
    for mask in 0u32..(1u32 << ne) {
        let edges = (0..ne).filter(|i| mask >> i & 1 == 1).map(|i| EdgeId(i as u32));
        let Ok(m) = Matching::from_edge_ids(inst, edges) else {
            continue;
        };
        if !inst.hospitals().all(|h| inst.quota(h).member(m.roster(h))) {
            continue;
        }
        out.feasible += 1;
        if find_justified_envy(inst, &m).unwrap().is_empty() {
            out.envy_free += 1;
            if find_blocking_pairs(inst, &m).unwrap().is_empty() {
                out.stable += 1;
            }
        }
    }
    out
}

fn leaf_feasible(inst: &MarketInstance, rosters: &[BitSubset]) -> bool {
    inst.hospitals().all(|h| inst.quota(h).member(&rosters[h.idx()]))
}

/// Can some superset of `chosen` drawn from `possible` satisfy the quota?
/// The check is a relaxation — a `true` is not a guarantee — but a `false`
/// is a proof, which is all pruning needs.
fn completable(spec: &QuotaSpec, chosen: &BitSubset, possible: &BitSubset) -> bool {
    match spec {
        QuotaSpec::Interval { lower, upper } => {
            chosen.card() as u32 <= *upper && possible.card() as u32 >= *lower
        }
        QuotaSpec::Explicit { constraints } | QuotaSpec::Laminar { classes: constraints } => {
            constraints.iter().all(|c| {
                chosen.intersection_card(&c.members) as u32 <= c.hi
                    && possible.intersection_card(&c.members) as u32 >= c.lo
            })
        }
        QuotaSpec::Staffing { sections } => {
            let capacity: u64 = sections.iter().map(|s| s.hi as u64).sum();
            chosen.card() as u64 <= capacity
                && sections
                    .iter()
                    .all(|s| possible.intersection_card(&s.accepts) as u32 >= s.lo)
        }
    }
}

struct Walker<'a> {
    inst: &'a MarketInstance,
    assign: Vec<Option<EdgeId>>,
    rosters: Vec<BitSubset>,
    /// `undecided[h][k]`: ground positions of `h` whose doctor has index
    /// `>= k`, i.e. is still undecided once the first `k` doctors are set.
    undecided: Vec<Vec<BitSubset>>,
}

impl<'a> Walker<'a> {
    fn new(inst: &'a MarketInstance, budget: u128) -> Result<Self, OracleError> {
        let bound = search_space(inst);
        if bound > budget {
            return Err(OracleError::BudgetExceeded { bound, budget });
        }
        let nd = inst.n_doctors();
        let undecided = inst
            .hospitals()
            .map(|h| {
                let g = inst.ground_size(h);
                (0..=nd)
                    .map(|k| {
                        BitSubset::from_indices(
                            g,
                            (0..g).filter(|&p| {
                                inst.edge_doctor(inst.edge_at_ground(h, p)).idx() >= k
                            }),
                        )
                    })
                    .collect()
            })
            .collect();
        Ok(Walker {
            inst,
            assign: vec![None; nd],
            rosters: inst
                .hospitals()
                .map(|h| BitSubset::empty(inst.ground_size(h)))
                .collect(),
            undecided,
        })
    }

    /// Every hospital the doctor finds acceptable must still be completable
    /// once doctors `0..depth` are fixed.
    fn viable(&self, doctor: DoctorId, depth: usize) -> bool {
        self.inst.doctor_prefs(doctor).iter().all(|&e| {
            let h = self.inst.edge_hospital(e);
            let roster = &self.rosters[h.idx()];
            let possible = roster.union(&self.undecided[h.idx()][depth]);
            completable(self.inst.quota(h), roster, &possible)
        })
    }

    /// Depth-first walk; the handler returns `true` to stop the whole walk.
    fn dfs(
        &mut self,
        depth: usize,
        on_leaf: &mut impl FnMut(&MarketInstance, &[Option<EdgeId>], &[BitSubset]) -> bool,
    ) -> bool {
        if depth == self.inst.n_doctors() {
            return on_leaf(self.inst, &self.assign, &self.rosters);
        }
        let d = DoctorId(depth as u32);
        for i in 0..self.inst.doctor_prefs(d).len() {
            let e = self.inst.doctor_prefs(d)[i];
            let h = self.inst.edge_hospital(e);
            let pos = self.inst.hospital_rank(e) as usize;
            self.assign[depth] = Some(e);
            self.rosters[h.idx()].insert(pos);
            if self.viable(d, depth + 1) && self.dfs(depth + 1, on_leaf) {
                return true;
            }
            self.rosters[h.idx()].remove(pos);
        }
        self.assign[depth] = None;
        self.viable(d, depth + 1) && self.dfs(depth + 1, on_leaf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{self, tiny_no_envy_free};
    use crate::instance::InstanceBuilder;
    use crate::predicates::is_feasible;
    use crate::quota::QuotaData;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_the_counterexample_market() {
        let inst = tiny_no_envy_free();
        let s = survey(&inst, DEFAULT_BUDGET).unwrap();
        assert_eq!((s.feasible, s.envy_free, s.stable), (1, 0, 0));
        let m = s.first_feasible.unwrap();
        let d = |n: &str| inst.doctor_id(n).unwrap();
        let h = |n: &str| inst.hospital_id(n).unwrap();
        assert_eq!(m.hospital_of(&inst, d("d1")), Some(h("h1")));
        assert_eq!(m.hospital_of(&inst, d("d2")), Some(h("h2")));
        assert_eq!(s.first_envy_free, None);
        assert_eq!(s.first_stable, None);
    }

    #[test]
    fn budget_is_checked_before_any_work() {
        let inst = tiny_no_envy_free();
        assert_eq!(search_space(&inst), 6);
        assert_eq!(
            survey(&inst, 5),
            Err(OracleError::BudgetExceeded { bound: 6, budget: 5 })
        );
        assert!(survey(&inst, 6).is_ok());
        assert_eq!(
            exists_envy_free(&inst, 5),
            Err(OracleError::BudgetExceeded { bound: 6, budget: 5 })
        );
    }

    #[test]
    fn one_seat_market_counts() {
        let inst = InstanceBuilder::new()
            .doctor("d", ["h"])
            .hospital("h", ["d"], QuotaData::interval(0, 1))
            .build()
            .unwrap();
        let s = survey(&inst, DEFAULT_BUDGET).unwrap();
        // Both matchings are feasible and envy-free; only the full one has
        // no blocking pair (the empty one leaves an attractive open seat).
        // The walker tries assignments before leaving a doctor out, so the
        // full matching is the first witness of every kind.
        assert_eq!((s.feasible, s.envy_free, s.stable), (2, 2, 1));
        assert_eq!(s.first_feasible.unwrap().len(), 1);
        assert_eq!(s.first_stable.unwrap().len(), 1);
    }

    #[test]
    fn paired_family_counts() {
        let names = ["p1", "p2", "n1", "n2"];
        let mut b = InstanceBuilder::new();
        for n in names {
            b = b.doctor(n, ["x"]);
        }
        let inst = b
            .hospital(
                "x",
                names,
                QuotaData::explicit(&[
                    (&["p1", "n1"], 1, 1),
                    (&["p1", "n2"], 1, 1),
                    (&["p2", "n1"], 1, 1),
                    (&["p2", "n2"], 1, 1),
                ]),
            )
            .build()
            .unwrap();
        let s = survey(&inst, DEFAULT_BUDGET).unwrap();
        // Exactly {p1,p2} and {n1,n2} are feasible; neither side can envy
        // the other because no single swap stays within the family.
        assert_eq!((s.feasible, s.envy_free, s.stable), (2, 2, 2));
    }

    #[test]
    fn subset_enumeration_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for i in 0..60 {
            let inst = match i % 3 {
                0 => gen::random_hrlq(&mut rng, 4, 3, 0.6),
                1 => gen::random_laminar(&mut rng, 4, 3, 0.6),
                _ => gen::random_staffing(&mut rng, 4, 3, 0.6),
            };
            if inst.n_edges() > 14 {
                continue;
            }
            let a = survey(&inst, DEFAULT_BUDGET).unwrap();
            let b = survey_by_subsets(&inst);
            assert_eq!(
                (a.feasible, a.envy_free, a.stable),
                (b.feasible, b.envy_free, b.stable)
            );
        }
    }

    #[test]
    fn existence_matches_the_survey_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for i in 0..60 {
            let inst = if i % 2 == 0 {
                gen::random_hrlq(&mut rng, 4, 3, 0.6)
            } else {
                gen::random_laminar(&mut rng, 4, 3, 0.6)
            };
            let s = survey(&inst, DEFAULT_BUDGET).unwrap();
            let w = exists_envy_free(&inst, DEFAULT_BUDGET).unwrap();
            assert_eq!(w.is_some(), s.envy_free > 0);
            if let Some(m) = w {
                assert!(is_feasible(&inst, &m));
                assert!(find_justified_envy(&inst, &m).unwrap().is_empty());
                // Early stop returns the same witness the full survey sees.
                assert_eq!(Some(m), s.first_envy_free);
            }
        }
    }

    #[test]
    fn stability_implies_envy_freeness_in_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let inst = gen::random_hrlq(&mut rng, 4, 3, 0.7);
            let s = survey(&inst, DEFAULT_BUDGET).unwrap();
            assert!(s.stable <= s.envy_free);
            assert!(s.envy_free <= s.feasible);
        }
    }

    #[test]
    fn witnesses_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let inst = gen::random_laminar(&mut rng, 5, 3, 0.7);
        let a = survey(&inst, DEFAULT_BUDGET).unwrap();
        let b = survey(&inst, DEFAULT_BUDGET).unwrap();
        assert_eq!(a, b);
    }
}
