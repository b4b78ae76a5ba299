//! Instance generators: the canonical counterexample, random market
//! families with quotas guaranteed satisfiable by construction, and
//! adversarial chains for complexity measurements.

use crate::instance::{InstanceBuilder, MarketInstance};
use crate::quota::{ClassData, QuotaData, SectionData};
use rand::seq::SliceRandom;
use rand::Rng;

/// The smallest market with no envy-free matching.
///
/// Both hospitals need at least one doctor, but only `d2` finds `h2`
/// acceptable, so the unique feasible matching sends `d1` to `h1` and `d2`
/// to `h2`.  Since `d2` prefers `h1` and `h1` prefers `d2` over its
/// occupant `d1`, that matching leaves `d2` with justified envy.
pub fn tiny_no_envy_free() -> MarketInstance {
    InstanceBuilder::new()
        .doctor("d1", ["h1"])
        .doctor("d2", ["h1", "h2"])
        .hospital("h1", ["d2", "d1"], QuotaData::interval(1, 2))
        .hospital("h2", ["d2"], QuotaData::interval(1, 1))
        .build()
        .expect("the counterexample is a valid market")
}

fn doctor_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("d{i}")).collect()
}

fn hospital_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("h{i}")).collect()
}

/// Random acceptability graph plus shuffled preference lists on both sides.
/// Returns per-doctor and per-hospital neighbor lists in preference order.
fn random_bipartite<R: Rng>(
    rng: &mut R,
    n_doctors: usize,
    n_hospitals: usize,
    edge_prob: f64,
) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut doctor_prefs = vec![Vec::new(); n_doctors];
    let mut hospital_prefs = vec![Vec::new(); n_hospitals];
    for (d, prefs) in doctor_prefs.iter_mut().enumerate() {
        for h in 0..n_hospitals {
            if rng.gen_bool(edge_prob) {
                prefs.push(h);
                hospital_prefs[h].push(d);
            }
        }
        prefs.shuffle(rng);
    }
    for prefs in &mut hospital_prefs {
        prefs.shuffle(rng);
    }
    (doctor_prefs, hospital_prefs)
}

fn assemble(
    doctor_prefs: &[Vec<usize>],
    hospital_prefs: &[Vec<usize>],
    quotas: Vec<QuotaData>,
) -> MarketInstance {
    let d_names = doctor_names(doctor_prefs.len());
    let h_names = hospital_names(hospital_prefs.len());
    let mut b = InstanceBuilder::new();
    for (d, prefs) in doctor_prefs.iter().enumerate() {
        b = b.doctor(&d_names[d], prefs.iter().map(|&h| h_names[h].as_str()));
    }
    for ((h, prefs), quota) in hospital_prefs.iter().enumerate().zip(quotas) {
        b = b.hospital(&h_names[h], prefs.iter().map(|&d| d_names[d].as_str()), quota);
    }
    b.build().expect("generated markets are valid")
}

/// Random market with interval quotas `0 <= l <= u <= |A(h)|`.
pub fn random_hrlq<R: Rng>(
    rng: &mut R,
    n_doctors: usize,
    n_hospitals: usize,
    edge_prob: f64,
) -> MarketInstance {
    let (dp, hp) = random_bipartite(rng, n_doctors, n_hospitals, edge_prob);
    let quotas = hp
        .iter()
        .map(|ground| {
            let upper = rng.gen_range(0..=ground.len() as u32);
            let lower = rng.gen_range(0..=upper);
            QuotaData::interval(lower, upper)
        })
        .collect();
    assemble(&dp, &hp, quotas)
}

/// Random market with all lower quotas zero.
pub fn random_hr<R: Rng>(
    rng: &mut R,
    n_doctors: usize,
    n_hospitals: usize,
    edge_prob: f64,
) -> MarketInstance {
    let (dp, hp) = random_bipartite(rng, n_doctors, n_hospitals, edge_prob);
    let quotas = hp
        .iter()
        .map(|ground| QuotaData::interval(0, rng.gen_range(0..=ground.len() as u32)))
        .collect();
    assemble(&dp, &hp, quotas)
}

/// Random market where everyone finds everyone acceptable and the lower
/// quotas sum to at most the number of doctors.
pub fn random_complete<R: Rng>(rng: &mut R, n_doctors: usize, n_hospitals: usize) -> MarketInstance {
    let mut doctor_prefs = vec![(0..n_hospitals).collect::<Vec<_>>(); n_doctors];
    let mut hospital_prefs = vec![(0..n_doctors).collect::<Vec<_>>(); n_hospitals];
    for p in &mut doctor_prefs {
        p.shuffle(rng);
    }
    for p in &mut hospital_prefs {
        p.shuffle(rng);
    }
    let mut budget = n_doctors as u32;
    let mut order: Vec<usize> = (0..n_hospitals).collect();
    order.shuffle(rng);
    let mut lowers = vec![0u32; n_hospitals];
    for h in order {
        let l = rng.gen_range(0..=budget.min(n_doctors as u32));
        lowers[h] = l;
        budget -= l;
    }
    let quotas = lowers
        .iter()
        .map(|&l| QuotaData::interval(l, rng.gen_range(l..=n_doctors as u32)))
        .collect();
    assemble(&doctor_prefs, &hospital_prefs, quotas)
}

/// Laminar classes over ground positions `0..g`: recursive splits of a
/// shuffled permutation, so classes need not be contiguous in preference
/// order.  Returns member-position sets.
fn random_laminar_classes<R: Rng>(rng: &mut R, g: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..g).collect();
    perm.shuffle(rng);
    let mut classes = Vec::new();
    let mut stack = vec![(0usize, g)];
    while let Some((lo, hi)) = stack.pop() {
        let len = hi - lo;
        if len == 0 {
            continue;
        }
        if rng.gen_bool(0.6) {
            classes.push(perm[lo..hi].to_vec());
        }
        if len >= 2 && rng.gen_bool(0.7) {
            let mid = rng.gen_range(lo + 1..hi);
            stack.push((lo, mid));
            stack.push((mid, hi));
        }
    }
    classes
}

/// Random market with laminar class quotas, nonempty by construction: a
/// witness roster is drawn first and every class bound is sampled to
/// contain the witness's count.
pub fn random_laminar<R: Rng>(
    rng: &mut R,
    n_doctors: usize,
    n_hospitals: usize,
    edge_prob: f64,
) -> MarketInstance {
    let (dp, hp) = random_bipartite(rng, n_doctors, n_hospitals, edge_prob);
    let d_names = doctor_names(n_doctors);
    let quotas = hp
        .iter()
        .map(|ground| {
            let g = ground.len();
            let witness: Vec<bool> = (0..g).map(|_| rng.gen_bool(0.5)).collect();
            let classes = random_laminar_classes(rng, g)
                .into_iter()
                .map(|members| {
                    let k = members.iter().filter(|&&p| witness[p]).count() as u32;
                    ClassData {
                        members: members.iter().map(|&p| d_names[ground[p]].clone()).collect(),
                        lo: rng.gen_range(0..=k),
                        hi: rng.gen_range(k..=members.len() as u32),
                    }
                })
                .collect();
            QuotaData::Laminar { classes }
        })
        .collect();
    assemble(&dp, &hp, quotas)
}

/// Random market with staffing quotas, nonempty by construction: a witness
/// roster and a section assignment for it are drawn first, then section
/// bounds are sampled around the witness's per-section counts.
pub fn random_staffing<R: Rng>(
    rng: &mut R,
    n_doctors: usize,
    n_hospitals: usize,
    edge_prob: f64,
) -> MarketInstance {
    let (dp, hp) = random_bipartite(rng, n_doctors, n_hospitals, edge_prob);
    let d_names = doctor_names(n_doctors);
    let quotas = hp
        .iter()
        .map(|ground| {
            let g = ground.len();
            let n_sections = if g == 0 { 0 } else { rng.gen_range(0..=3usize.min(g)) };
            let sections: Vec<Vec<usize>> = (0..n_sections)
                .map(|_| {
                    let mut accepts: Vec<usize> =
                        (0..g).filter(|_| rng.gen_bool(0.5)).collect();
                    if accepts.is_empty() {
                        accepts.push(rng.gen_range(0..g));
                    }
                    accepts
                })
                .collect();
            let mut counts = vec![0u32; n_sections];
            for p in 0..g {
                let accepting: Vec<usize> = (0..n_sections)
                    .filter(|&s| sections[s].contains(&p))
                    .collect();
                if !accepting.is_empty() && rng.gen_bool(0.5) {
                    counts[*accepting.choose(rng).unwrap()] += 1;
                }
            }
            QuotaData::Staffing {
                sections: sections
                    .iter()
                    .enumerate()
                    .map(|(s, accepts)| SectionData {
                        id: Some(format!("s{s}")),
                        accepts: accepts.iter().map(|&p| d_names[ground[p]].clone()).collect(),
                        lo: rng.gen_range(0..=counts[s]),
                        hi: rng.gen_range(counts[s]..=accepts.len() as u32),
                    })
                    .collect(),
            }
        })
        .collect();
    assemble(&dp, &hp, quotas)
}

/// A single-seat hospital chain where one extra doctor sets off a cascade
/// of displacements, so proposal rounds grow with the chain length while
/// every round still touches the whole market.  `2 * length` edges.
pub fn displacement_chain(length: usize) -> MarketInstance {
    assert!(length >= 1);
    let mut b = InstanceBuilder::new();
    let h_names: Vec<String> = (1..=length).map(|k| format!("h{k}")).collect();
    b = b.doctor("d0", [h_names[0].as_str()]);
    for k in 1..length {
        b = b.doctor(&format!("d{k}"), [h_names[k - 1].as_str(), h_names[k].as_str()]);
    }
    b = b.doctor(&format!("d{length}"), [h_names[length - 1].as_str()]);
    for k in 1..=length {
        // Each hospital prefers the doctor that ranks it second; rejecting
        // its first-choice suitor pushes that doctor one link down.
        b = b.hospital(
            &h_names[k - 1],
            [format!("d{}", k - 1), format!("d{k}")]
                .iter()
                .map(|s| s.as_str()),
            QuotaData::interval(1, 1),
        );
    }
    b.build().expect("the chain is a valid market")
}

/// Random interval-quota market with roughly `target_edges` acceptability
/// edges: each doctor ranks a handful of distinct hospitals.
pub fn random_interval_sized<R: Rng>(rng: &mut R, target_edges: usize) -> MarketInstance {
    let per_doctor = 4usize;
    let n_doctors = (target_edges / per_doctor).max(1);
    let n_hospitals = (n_doctors / 4).max(2);
    let mut doctor_prefs = vec![Vec::new(); n_doctors];
    let mut hospital_prefs = vec![Vec::new(); n_hospitals];
    let degree = per_doctor.min(n_hospitals);
    let mut pool: Vec<usize> = (0..n_hospitals).collect();
    for (d, prefs) in doctor_prefs.iter_mut().enumerate() {
        let (chosen, _) = pool.partial_shuffle(rng, degree);
        prefs.extend_from_slice(chosen);
        for &h in prefs.iter() {
            hospital_prefs[h].push(d);
        }
    }
    for p in &mut hospital_prefs {
        p.shuffle(rng);
    }
    let quotas = hospital_prefs
        .iter()
        .map(|ground| {
            let upper = rng.gen_range(1..=(ground.len() as u32).max(1)).min(ground.len() as u32);
            QuotaData::interval(rng.gen_range(0..=upper), upper)
        })
        .collect();
    assemble(&doctor_prefs, &hospital_prefs, quotas)
}
