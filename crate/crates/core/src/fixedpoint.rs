//! Fixed-point solver for classified markets.
//!
//! The state tracks two edge sets: `available` holds the edges doctors may
//! still hope for (nothing better has been refused yet), and `proposed`
//! holds the edges hospitals have been offered so far.  One step lets every
//! doctor name its best available edge and every hospital refuse, among all
//! offers seen, the doctors its lower-quota structure can certainly do
//! without.  The step operator is monotone — `available` only shrinks,
//! `proposed` only grows — so iteration from the all-hopeful state reaches
//! a fixed point after at most `2|E|` state changes.  At the fixed point,
//! `available ∩ proposed` is the held matching; it is an envy-free matching
//! of the original market exactly when it fills every hospital's total
//! lower quota.

use crate::compile::CompiledInstance;
use crate::instance::{EdgeId, MarketInstance};
use crate::matching::{Matching, SolveOutcome};
use crate::matroid::{self, OrderedGround, SetFunction};
use crate::sets::BitSubset;

/// A solver state: both components are subsets of the edge set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProposalState {
    pub available: BitSubset,
    pub proposed: BitSubset,
}

impl ProposalState {
    /// The starting state: every edge hopeful, nothing proposed.
    pub fn start(inst: &MarketInstance) -> Self {
        ProposalState {
            available: BitSubset::full(inst.n_edges()),
            proposed: BitSubset::empty(inst.n_edges()),
        }
    }

    /// The solver's progress order: a state dominates another when it has
    /// more available and fewer proposed edges (i.e. it is earlier).
    pub fn dominates(&self, other: &ProposalState) -> bool {
        other.available.is_subset_of(&self.available) && self.proposed.is_subset_of(&other.proposed)
    }
}

/// Each doctor keeps only its most-preferred edge within `n`.
pub fn doctor_choice(inst: &MarketInstance, n: &BitSubset) -> BitSubset {
    let mut out = BitSubset::empty(inst.n_edges());
    for d in inst.doctors() {
        for &e in inst.doctor_prefs(d) {
            if n.contains(e.idx()) {
                out.insert(e.idx());
                break;
            }
        }
    }
    out
}

/// Each hospital keeps, among its edges in `n`, the doctors its lower quota
/// cannot spare.
///
/// Walking the preference list best-first, a doctor is kept exactly when
/// deleting it from the not-yet-refused pool would lower the pool's lower
/// quota — one quota evaluation per offered doctor.
pub fn hospital_choice(ci: &CompiledInstance, n: &BitSubset) -> BitSubset {
    let inst = ci.instance();
    let mut out = BitSubset::empty(inst.n_edges());
    for h in inst.hospitals() {
        let quota = ci.quota(h);
        let g = inst.ground_size(h);
        let mut pool = BitSubset::full(g);
        let mut before = quota.lower(&pool);
        for pos in 0..g {
            let e = inst.edge_at_ground(h, pos);
            if n.contains(e.idx()) {
                pool.remove(pos);
                let after = quota.lower(&pool);
                if after < before {
                    out.insert(e.idx());
                }
                before = after;
            }
        }
    }
    out
}

/// The same hospital choice computed through the complement-rank oracle and
/// the generic ordered choice function; used to cross-check
/// [`hospital_choice`].
pub fn hospital_choice_by_rank(ci: &CompiledInstance, n: &BitSubset) -> BitSubset {
    let inst = ci.instance();
    let mut out = BitSubset::empty(inst.n_edges());
    for h in inst.hospitals() {
        let g = inst.ground_size(h);
        let mut x = BitSubset::empty(g);
        for pos in 0..g {
            if n.contains(inst.edge_at_ground(h, pos).idx()) {
                x.insert(pos);
            }
        }
        let rank = matroid::complement(ci.quota(h) as &dyn SetFunction);
        for pos in matroid::choose(&OrderedGround::identity(g), &rank, &x).iter() {
            out.insert(inst.edge_at_ground(h, pos).idx());
        }
    }
    out
}

/// One application of the solver operator: hospitals' refusals strike edges
/// from `available`, doctors' withheld offers keep edges out of `proposed`.
pub fn step(ci: &CompiledInstance, s: &ProposalState) -> ProposalState {
    let inst = ci.instance();
    let kept_by_hospitals = hospital_choice(ci, &s.proposed);
    let kept_by_doctors = doctor_choice(inst, &s.available);
    ProposalState {
        available: s.proposed.complement().union(&kept_by_hospitals),
        proposed: s.available.complement().union(&kept_by_doctors),
    }
}

/// Iterates `step` to a fixed point, counting state changes.
///
/// The start must dominate its own successor (true of
/// [`ProposalState::start`] and of any state built by
/// [`pre_fixed_point_from`]); the trajectory is then monotone and the
/// change count can never exceed `2|E|`, which is asserted.
pub fn iterate(ci: &CompiledInstance, mut s: ProposalState) -> (ProposalState, usize) {
    let bound = 2 * ci.instance().n_edges();
    let mut updates = 0usize;
    loop {
        let next = step(ci, &s);
        if next == s {
            return (s, updates);
        }
        debug_assert!(s.dominates(&next), "trajectory left the monotone order");
        updates += 1;
        assert!(updates <= bound, "fixed point not reached within 2|E| state changes");
        s = next;
    }
}

/// A solve outcome plus how many state changes the fixed-point loop took.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveReport {
    pub outcome: SolveOutcome,
    pub iterations: usize,
}

/// Finds an envy-free matching of a compiled classified market, or proves
/// none exists.
///
/// The fixed point's held matching fills each hospital with at most its
/// total lower quota; it fills *every* hospital exactly to that total iff
/// the market admits an envy-free matching, and in that case the held
/// matching is one.
pub fn solve(ci: &CompiledInstance) -> SolveReport {
    let inst = ci.instance();
    let (fixed, iterations) = iterate(ci, ProposalState::start(inst));
    let kept = fixed.available.intersection(&fixed.proposed);
    let m = Matching::from_edge_ids(inst, kept.iter().map(|i| EdgeId(i as u32)))
        .expect("a fixed point holds each doctor at most once");
    let filled = inst
        .hospitals()
        .all(|h| m.roster_size(h) as u32 == ci.quota(h).lower_total());
    SolveReport {
        outcome: if filled {
            SolveOutcome::Matching(m)
        } else {
            SolveOutcome::NoEnvyFree
        },
        iterations,
    }
}

/// Builds the canonical state that dominates its successor from any
/// envy-free matching: a matched doctor keeps its assigned edge and its
/// strictly worse edges available; everything else counts as already
/// proposed.  Iterating from here reaches a fixed point whose per-hospital
/// seat counts equal those of every other fixed-point run — the basis for
/// the count-invariance tests.
pub fn pre_fixed_point_from(inst: &MarketInstance, m: &Matching) -> ProposalState {
    let mut available = BitSubset::empty(inst.n_edges());
    for e in inst.edge_ids() {
        let d = inst.edge_doctor(e);
        let keep = m.contains_edge(e)
            || match m.doctor_edge(d) {
                Some(assigned) => inst.doctor_rank(assigned) < inst.doctor_rank(e),
                None => false,
            };
        if keep {
            available.insert(e.idx());
        }
    }
    let mut proposed = available.complement();
    for &e in m.edges() {
        proposed.insert(e.idx());
    }
    ProposalState { available, proposed }
}

/// Does `s` dominate its own successor?  Such states are valid starting
/// points for [`iterate`].
pub fn is_pre_fixed_point(ci: &CompiledInstance, s: &ProposalState) -> bool {
    s.dominates(&step(ci, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::compile_instance;
    use crate::gen::{self, tiny_no_envy_free};
    use crate::hr;
    use crate::instance::InstanceBuilder;
    use crate::matroid::RankOracle;
    use crate::predicates::{find_justified_envy, is_feasible};
    use crate::quota::QuotaData;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn edge_set(inst: &MarketInstance, pairs: &[(&str, &str)]) -> BitSubset {
        BitSubset::from_indices(
            inst.n_edges(),
            pairs.iter().map(|(d, h)| {
                inst.edge_between(inst.doctor_id(d).unwrap(), inst.hospital_id(h).unwrap())
                    .unwrap()
                    .idx()
            }),
        )
    }

    #[test]
    fn doctors_keep_their_best_available_edge() {
        let inst = tiny_no_envy_free();
        let all = BitSubset::full(inst.n_edges());
        assert_eq!(
            doctor_choice(&inst, &all),
            edge_set(&inst, &[("d1", "h1"), ("d2", "h1")])
        );
        assert_eq!(
            doctor_choice(&inst, &BitSubset::empty(inst.n_edges())),
            BitSubset::empty(inst.n_edges())
        );
    }

    #[test]
    fn zero_floor_hospitals_keep_nobody() {
        let inst = InstanceBuilder::new()
            .doctor("a", ["h"])
            .doctor("b", ["h"])
            .hospital("h", ["a", "b"], QuotaData::interval(0, 2))
            .build()
            .unwrap();
        let ci = compile_instance(&inst).unwrap();
        assert!(hospital_choice(&ci, &BitSubset::full(inst.n_edges())).is_empty());
    }

    #[test]
    fn floor_one_hospital_keeps_its_best_offer() {
        let inst = tiny_no_envy_free();
        let ci = compile_instance(&inst).unwrap();
        let offers = edge_set(&inst, &[("d1", "h1"), ("d2", "h1")]);
        assert_eq!(hospital_choice(&ci, &offers), edge_set(&inst, &[("d2", "h1")]));
    }

    #[test]
    fn quota_form_and_rank_form_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for i in 0..150 {
            let inst = match i % 3 {
                0 => gen::random_hrlq(&mut rng, 5, 3, 0.7),
                1 => gen::random_laminar(&mut rng, 5, 3, 0.7),
                _ => gen::random_staffing(&mut rng, 5, 3, 0.7),
            };
            let ci = compile_instance(&inst).unwrap();
            for _ in 0..8 {
                let n = BitSubset::from_indices(
                    inst.n_edges(),
                    (0..inst.n_edges()).filter(|_| rng.gen_bool(0.5)),
                );
                let by_quota = hospital_choice(&ci, &n);
                let by_rank = hospital_choice_by_rank(&ci, &n);
                assert_eq!(by_quota, by_rank, "choice forms disagree");
                // Kept count per hospital = complement rank of the offer set.
                for h in inst.hospitals() {
                    let g = inst.ground_size(h);
                    let offers = BitSubset::from_indices(
                        g,
                        (0..g).filter(|&p| n.contains(inst.edge_at_ground(h, p).idx())),
                    );
                    let kept = (0..g)
                        .filter(|&p| by_quota.contains(inst.edge_at_ground(h, p).idx()))
                        .count() as u32;
                    let rank = matroid::complement(ci.quota(h) as &dyn SetFunction);
                    assert_eq!(kept, rank.rank(&offers));
                }
            }
        }
    }

    #[test]
    fn first_step_from_the_start() {
        let inst = tiny_no_envy_free();
        let ci = compile_instance(&inst).unwrap();
        let s1 = step(&ci, &ProposalState::start(&inst));
        assert_eq!(s1.available, BitSubset::full(inst.n_edges()));
        assert_eq!(s1.proposed, edge_set(&inst, &[("d1", "h1"), ("d2", "h1")]));
    }

    #[test]
    fn step_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..80 {
            let inst = gen::random_laminar(&mut rng, 4, 3, 0.7);
            let ci = compile_instance(&inst).unwrap();
            let ne = inst.n_edges();
            // Build s ≥ s': s has more available, less proposed.
            let small: Vec<usize> = (0..ne).filter(|_| rng.gen_bool(0.4)).collect();
            let extra: Vec<usize> = (0..ne).filter(|_| rng.gen_bool(0.4)).collect();
            let avail_small = BitSubset::from_indices(ne, small.iter().copied());
            let avail_big = BitSubset::from_indices(
                ne,
                small.iter().copied().chain(extra.iter().copied()),
            );
            let prop_small: Vec<usize> = (0..ne).filter(|_| rng.gen_bool(0.4)).collect();
            let prop_extra: Vec<usize> = (0..ne).filter(|_| rng.gen_bool(0.4)).collect();
            let proposed_small = BitSubset::from_indices(ne, prop_small.iter().copied());
            let proposed_big = BitSubset::from_indices(
                ne,
                prop_small.iter().copied().chain(prop_extra.iter().copied()),
            );
            let earlier = ProposalState { available: avail_big, proposed: proposed_small };
            let later = ProposalState { available: avail_small, proposed: proposed_big };
            assert!(earlier.dominates(&later));
            assert!(step(&ci, &earlier).dominates(&step(&ci, &later)));
        }
    }

    #[test]
    fn counterexample_has_no_envy_free_matching() {
        let inst = tiny_no_envy_free();
        let ci = compile_instance(&inst).unwrap();
        let report = solve(&ci);
        assert_eq!(report.outcome, SolveOutcome::NoEnvyFree);
        assert!(report.iterations <= 2 * inst.n_edges());
    }

    #[test]
    fn zero_floors_solve_to_the_empty_matching() {
        let inst = InstanceBuilder::new()
            .doctor("a", ["h"])
            .doctor("b", ["h", "k"])
            .hospital("h", ["a", "b"], QuotaData::interval(0, 2))
            .hospital("k", ["b"], QuotaData::interval(0, 1))
            .build()
            .unwrap();
        let ci = compile_instance(&inst).unwrap();
        let report = solve(&ci);
        assert_eq!(report.outcome, SolveOutcome::Matching(Matching::empty(&inst)));
    }

    #[test]
    fn agrees_with_the_interval_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..150 {
            let inst = gen::random_hrlq(&mut rng, 5, 3, 0.6);
            let ci = compile_instance(&inst).unwrap();
            let fp = solve(&ci).outcome;
            let gs = hr::ef_hrlq(&inst).unwrap();
            match (&fp, &gs) {
                (SolveOutcome::NoEnvyFree, SolveOutcome::NoEnvyFree) => {}
                (SolveOutcome::Matching(a), SolveOutcome::Matching(b)) => {
                    assert!(is_feasible(&inst, a));
                    assert_eq!(find_justified_envy(&inst, a).unwrap(), vec![]);
                    // Seat counts agree even if the matchings differ.
                    for h in inst.hospitals() {
                        assert_eq!(a.roster_size(h), b.roster_size(h));
                    }
                }
                other => panic!("solvers disagree on existence: {other:?}"),
            }
        }
    }

    #[test]
    fn successful_solves_are_envy_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let mut found = 0;
        for i in 0..120 {
            let inst = if i % 2 == 0 {
                gen::random_laminar(&mut rng, 5, 3, 0.7)
            } else {
                gen::random_staffing(&mut rng, 5, 3, 0.7)
            };
            let ci = compile_instance(&inst).unwrap();
            if let SolveOutcome::Matching(m) = solve(&ci).outcome {
                found += 1;
                assert!(is_feasible(&inst, &m));
                assert_eq!(find_justified_envy(&inst, &m).unwrap(), vec![]);
                for h in inst.hospitals() {
                    assert_eq!(m.roster_size(h) as u32, ci.quota(h).lower_total());
                }
            }
        }
        assert!(found > 0, "generator never produced a solvable market");
    }

    #[test]
    fn chain_iterations_grow_with_length() {
        let short = {
            let inst = gen::displacement_chain(20);
            let ci = compile_instance(&inst).unwrap();
            let r = solve(&ci);
            assert!(matches!(r.outcome, SolveOutcome::Matching(_)));
            r.iterations
        };
        let long = {
            let inst = gen::displacement_chain(40);
            let ci = compile_instance(&inst).unwrap();
            let r = solve(&ci);
            assert!(matches!(r.outcome, SolveOutcome::Matching(_)));
            r.iterations
        };
        assert!(short >= 20, "cascade too short: {short}");
        assert!(long as f64 >= 1.6 * short as f64, "iterations did not scale: {short} -> {long}");
        assert!(long <= 2 * 80, "update bound exceeded");
    }

    #[test]
    fn fixed_point_matching_components_agree() {
        // At a fixed point the held matching equals both choice images.
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..60 {
            let inst = gen::random_laminar(&mut rng, 4, 3, 0.7);
            let ci = compile_instance(&inst).unwrap();
            let (fixed, _) = iterate(&ci, ProposalState::start(&inst));
            let kept = fixed.available.intersection(&fixed.proposed);
            assert_eq!(kept, doctor_choice(&inst, &fixed.available));
            assert_eq!(kept, hospital_choice(&ci, &fixed.proposed));
        }
    }
}
