//! Doctor-proposing deferred acceptance and the envy-free existence
//! algorithm for interval-quota markets.
//!
//! The existence algorithm runs deferred acceptance with each hospital's
//! capacity set to its *lower* quota.  If that fills every hospital exactly
//! to its floor, the result is an envy-free matching of the original
//! market; if any hospital falls short, no envy-free matching exists at
//! all — under-filled floors cannot be blamed on the run, because seat
//! counts are identical across all stable matchings.

use crate::instance::{DoctorId, EdgeId, MarketInstance};
use crate::matching::{Matching, SolveOutcome};
use crate::quota::QuotaSpec;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HrError {
    #[error("hospital {hospital} has a non-interval quota; this solver handles interval quotas only")]
    NonIntervalQuota { hospital: String },
}

/// Extracts `(lower, upper)` for every hospital, refusing classified quotas.
pub fn interval_bounds(inst: &MarketInstance) -> Result<Vec<(u32, u32)>, HrError> {
    inst.hospitals()
        .map(|h| match inst.quota(h) {
            QuotaSpec::Interval { lower, upper } => Ok((*lower, *upper)),
            _ => Err(HrError::NonIntervalQuota {
                hospital: inst.hospital_name(h).to_string(),
            }),
        })
        .collect()
}

/// Doctor-proposing deferred acceptance with explicit per-hospital
/// capacities (lower quotas play no role here).  Doctors are processed from
/// a queue in input order; the outcome's per-hospital seat counts do not
/// depend on that order.  Runs in `O(|D| + |H| + |E|)`.
pub fn gale_shapley(inst: &MarketInstance, caps: &[u32]) -> Matching {
    let order: Vec<DoctorId> = inst.doctors().collect();
    gale_shapley_ordered(inst, caps, &order)
}

/// Deferred acceptance processing doctors in the given order (every doctor
/// must appear exactly once).
pub fn gale_shapley_ordered(inst: &MarketInstance, caps: &[u32], order: &[DoctorId]) -> Matching {
    assert_eq!(caps.len(), inst.n_hospitals(), "one capacity per hospital");
    assert_eq!(order.len(), inst.n_doctors(), "every doctor must be queued");

    let mut queue: VecDeque<DoctorId> = order.iter().copied().collect();
    let mut next_choice = vec![0usize; inst.n_doctors()];
    let mut held: Vec<Option<EdgeId>> = vec![None; inst.n_doctors()];
    // Per hospital: which ground positions are held, how many, and the
    // worst held position.  Better proposals only ever push the worst
    // pointer toward the front, so maintenance is amortized linear.
    let mut present: Vec<Vec<bool>> = inst
        .hospitals()
        .map(|h| vec![false; inst.ground_size(h)])
        .collect();
    let mut count = vec![0u32; inst.n_hospitals()];
    let mut worst = vec![0usize; inst.n_hospitals()];

    while let Some(d) = queue.pop_front() {
        let prefs = inst.doctor_prefs(d);
        while next_choice[d.idx()] < prefs.len() {
            let e = prefs[next_choice[d.idx()]];
            next_choice[d.idx()] += 1;
            let h = inst.edge_hospital(e);
            let cap = caps[h.idx()];
            if cap == 0 {
                continue;
            }
            let pos = inst.hospital_rank(e) as usize;
            let hp = &mut present[h.idx()];
            if count[h.idx()] < cap {
                hp[pos] = true;
                held[d.idx()] = Some(e);
                count[h.idx()] += 1;
                worst[h.idx()] = worst[h.idx()].max(pos);
                break;
            }
            if pos < worst[h.idx()] {
                // Bump the worst held doctor and take its seat.
                let out_pos = worst[h.idx()];
                hp[out_pos] = false;
                hp[pos] = true;
                let out_edge = inst.edge_at_ground(h, out_pos);
                let out_doctor = inst.edge_doctor(out_edge);
                held[out_doctor.idx()] = None;
                queue.push_back(out_doctor);
                held[d.idx()] = Some(e);
                let mut w = out_pos;
                while w > 0 && !hp[w] {
                    w -= 1;
                }
                worst[h.idx()] = w;
                break;
            }
            // Full with better doctors: rejected, try the next hospital.
        }
    }

    Matching::from_edge_ids(inst, held.into_iter().flatten())
        .expect("deferred acceptance holds each doctor at most once")
}

/// Finds an envy-free matching of an interval-quota market, or proves none
/// exists: deferred acceptance under the lower quotas succeeds exactly when
/// it fills every hospital to its floor.
pub fn ef_hrlq(inst: &MarketInstance) -> Result<SolveOutcome, HrError> {
    let bounds = interval_bounds(inst)?;
    let caps: Vec<u32> = bounds.iter().map(|&(l, _)| l).collect();
    let m = gale_shapley(inst, &caps);
    let filled = inst
        .hospitals()
        .all(|h| m.roster_size(h) as u32 == caps[h.idx()]);
    Ok(if filled {
        SolveOutcome::Matching(m)
    } else {
        SolveOutcome::NoEnvyFree
    })
}
