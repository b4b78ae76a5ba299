//! Feasibility, justified envy, and blocking pairs — the predicates that
//! define what the solvers must achieve and what `check` reports.

use crate::instance::{DoctorId, HospitalId, MarketInstance};
use crate::matching::Matching;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PredicateError {
    #[error("matching is not feasible for the instance quotas")]
    InfeasibleMatching,
}

/// One doctor's justified envy toward an assigned doctor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnvyTriple {
    pub envier: DoctorId,
    pub envied: DoctorId,
    pub hospital: HospitalId,
}

/// Every doctor holds at most one seat (guaranteed by `Matching`) and every
/// hospital's roster satisfies its quota constraints exactly as stated.
pub fn is_feasible(inst: &MarketInstance, m: &Matching) -> bool {
    inst.hospitals().all(|h| inst.quota(h).member(m.roster(h)))
}

/// Would doctor `d` rather be at `h` than where the matching puts them?
fn prefers(inst: &MarketInstance, m: &Matching, d: DoctorId, candidate_rank: u32) -> bool {
    match m.doctor_edge(d) {
        None => true,
        Some(assigned) => candidate_rank < inst.doctor_rank(assigned),
    }
}

/// All triples `(d, d', h)` where `d` would rather be at `h`, the hospital
/// ranks `d` above its assigned doctor `d'`, and swapping `d` in for `d'`
/// keeps the roster inside the quota family.  Empty iff the matching is
/// envy-free.
///
/// For interval quotas the swap clause never bites (a swap preserves roster
/// size), so this reduces to the classical preference-only definition.
/// Triples are ordered by the envier's edge, then by the envied doctor's
/// rank at the hospital.
pub fn find_justified_envy(
    inst: &MarketInstance,
    m: &Matching,
) -> Result<Vec<EnvyTriple>, PredicateError> {
    if !is_feasible(inst, m) {
        return Err(PredicateError::InfeasibleMatching);
    }
    let mut out = Vec::new();
    for e in inst.edge_ids() {
        if m.contains_edge(e) {
            continue;
        }
        let (d, h) = inst.edge_ends(e);
        if !prefers(inst, m, d, inst.doctor_rank(e)) {
            continue;
        }
        let my_pos = inst.hospital_rank(e) as usize;
        let roster = m.roster(h);
        for pos in roster.iter() {
            if pos <= my_pos {
                continue; // assigned doctor ranks at least as high
            }
            let mut swapped = roster.clone();
            swapped.remove(pos);
            swapped.insert(my_pos);
            if inst.quota(h).member(&swapped) {
                out.push(EnvyTriple {
                    envier: d,
                    envied: inst.edge_doctor(inst.edge_at_ground(h, pos)),
                    hospital: h,
                });
            }
        }
    }
    Ok(out)
}

/// All pairs `(d, h)` outside the matching where `d` would rather be at `h`
/// and the hospital can accommodate `d` — either by adding (roster stays in
/// the family) or by swapping out a doctor it ranks below `d`.  Empty iff
/// the matching is stable.  Pairs are ordered by edge.
pub fn find_blocking_pairs(
    inst: &MarketInstance,
    m: &Matching,
) -> Result<Vec<(DoctorId, HospitalId)>, PredicateError> {
    if !is_feasible(inst, m) {
        return Err(PredicateError::InfeasibleMatching);
    }
    let mut out = Vec::new();
    for e in inst.edge_ids() {
        if m.contains_edge(e) {
            continue;
        }
        let (d, h) = inst.edge_ends(e);
        if !prefers(inst, m, d, inst.doctor_rank(e)) {
            continue;
        }
        let my_pos = inst.hospital_rank(e) as usize;
        let roster = m.roster(h);
        let mut extended = roster.clone();
        extended.insert(my_pos);
        let blocks = if inst.quota(h).member(&extended) {
            true
        } else {
            roster.iter().filter(|&pos| pos > my_pos).any(|pos| {
                let mut swapped = extended.clone();
                swapped.remove(pos);
                inst.quota(h).member(&swapped)
            })
        };
        if blocks {
            out.push((d, h));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::tiny_no_envy_free;
    use crate::instance::InstanceBuilder;
    use crate::quota::QuotaData;

    fn matching_by_names(inst: &MarketInstance, pairs: &[(&str, &str)]) -> Matching {
        let edges = pairs.iter().map(|(d, h)| {
            inst.edge_between(inst.doctor_id(d).unwrap(), inst.hospital_id(h).unwrap())
                .unwrap()
        });
        Matching::from_edge_ids(inst, edges).unwrap()
    }

    #[test]
    fn unique_feasible_matching_of_the_counterexample() {
        let inst = tiny_no_envy_free();
        assert!(is_feasible(&inst, &matching_by_names(&inst, &[("d1", "h1"), ("d2", "h2")])));
        // h2 stays below its floor here:
        assert!(!is_feasible(&inst, &matching_by_names(&inst, &[("d2", "h1")])));
        assert!(!is_feasible(&inst, &Matching::empty(&inst)));
    }

    #[test]
    fn exact_class_bound_rejects_oversized_roster() {
        let inst = InstanceBuilder::new()
            .doctor("a", ["h"])
            .doctor("b", ["h"])
            .hospital(
                "h",
                ["a", "b"],
                QuotaData::explicit(&[(&["a", "b"], 1, 1)]),
            )
            .build()
            .unwrap();
        assert!(!is_feasible(&inst, &matching_by_names(&inst, &[("a", "h"), ("b", "h")])));
        assert!(is_feasible(&inst, &matching_by_names(&inst, &[("a", "h")])));
    }

    #[test]
    fn envy_in_the_counterexample() {
        let inst = tiny_no_envy_free();
        let m = matching_by_names(&inst, &[("d1", "h1"), ("d2", "h2")]);
        let envy = find_justified_envy(&inst, &m).unwrap();
        assert_eq!(
            envy,
            vec![EnvyTriple {
                envier: inst.doctor_id("d2").unwrap(),
                envied: inst.doctor_id("d1").unwrap(),
                hospital: inst.hospital_id("h1").unwrap(),
            }]
        );
    }

    #[test]
    fn empty_matching_without_floors_is_envy_free_and_stable_only_if_no_blocks() {
        let inst = InstanceBuilder::new()
            .doctor("a", ["h"])
            .hospital("h", ["a"], QuotaData::interval(0, 1))
            .build()
            .unwrap();
        let empty = Matching::empty(&inst);
        assert_eq!(find_justified_envy(&inst, &empty).unwrap(), vec![]);
        // (a, h) still blocks: the seat is open and a wants it.
        assert_eq!(
            find_blocking_pairs(&inst, &empty).unwrap(),
            vec![(inst.doctor_id("a").unwrap(), inst.hospital_id("h").unwrap())]
        );
    }

    #[test]
    fn blocking_pairs_in_the_counterexample() {
        let inst = tiny_no_envy_free();
        let m = matching_by_names(&inst, &[("d1", "h1"), ("d2", "h2")]);
        // h1 has a free seat (upper quota 2) and d2 prefers h1.
        assert_eq!(
            find_blocking_pairs(&inst, &m).unwrap(),
            vec![(inst.doctor_id("d2").unwrap(), inst.hospital_id("h1").unwrap())]
        );
    }

    #[test]
    fn floors_only_market_has_no_blocking_pair_at_the_floor_matching() {
        // Same market shape as the counterexample but with quotas (0, 1):
        // {(d2, h1)} fills every seat that exists.
        let inst = InstanceBuilder::new()
            .doctor("d1", ["h1"])
            .doctor("d2", ["h1", "h2"])
            .hospital("h1", ["d2", "d1"], QuotaData::interval(0, 1))
            .hospital("h2", ["d2"], QuotaData::interval(0, 1))
            .build()
            .unwrap();
        let m = matching_by_names(&inst, &[("d2", "h1")]);
        assert_eq!(find_blocking_pairs(&inst, &m).unwrap(), vec![]);
    }

    #[test]
    fn saturated_market_has_no_blocking_pairs() {
        let inst = InstanceBuilder::new()
            .doctor("a", ["x"])
            .doctor("b", ["y"])
            .hospital("x", ["a"], QuotaData::interval(0, 1))
            .hospital("y", ["b"], QuotaData::interval(0, 1))
            .build()
            .unwrap();
        let m = matching_by_names(&inst, &[("a", "x"), ("b", "y")]);
        assert_eq!(find_blocking_pairs(&inst, &m).unwrap(), vec![]);
        assert_eq!(find_justified_envy(&inst, &m).unwrap(), vec![]);
    }

    #[test]
    fn infeasible_matchings_are_rejected() {
        let inst = tiny_no_envy_free();
        let m = matching_by_names(&inst, &[("d2", "h1")]);
        assert_eq!(
            find_justified_envy(&inst, &m).unwrap_err(),
            PredicateError::InfeasibleMatching
        );
        assert_eq!(
            find_blocking_pairs(&inst, &m).unwrap_err(),
            PredicateError::InfeasibleMatching
        );
    }

    #[test]
    fn paired_family_swaps_block_envy_and_blocking() {
        // Family {{a,b}, {c,d}}: with {c,d} seated, the better-ranked a and b
        // cannot envy or block — no single swap lands back in the family.
        let inst = InstanceBuilder::new()
            .doctor("a", ["h"])
            .doctor("b", ["h"])
            .doctor("c", ["h"])
            .doctor("d", ["h"])
            .hospital(
                "h",
                ["a", "b", "c", "d"],
                QuotaData::explicit(&[
                    (&["a", "c"], 1, 1),
                    (&["a", "d"], 1, 1),
                    (&["b", "c"], 1, 1),
                    (&["b", "d"], 1, 1),
                ]),
            )
            .build()
            .unwrap();
        let m = matching_by_names(&inst, &[("c", "h"), ("d", "h")]);
        assert!(is_feasible(&inst, &m));
        assert_eq!(find_justified_envy(&inst, &m).unwrap(), vec![]);
        assert_eq!(find_blocking_pairs(&inst, &m).unwrap(), vec![]);

        // Under a plain interval quota the same roster would be overrun.
        let relaxed = InstanceBuilder::new()
            .doctor("a", ["h"])
            .doctor("b", ["h"])
            .doctor("c", ["h"])
            .doctor("d", ["h"])
            .hospital("h", ["a", "b", "c", "d"], QuotaData::interval(2, 2))
            .build()
            .unwrap();
        let m2 = matching_by_names(&relaxed, &[("c", "h"), ("d", "h")]);
        assert_eq!(find_justified_envy(&relaxed, &m2).unwrap().len(), 4);
    }
}
