//! Reduction from a restricted satisfiability problem to envy-free
//! matching with explicit quota families.
//!
//! The source problem is 3-CNF in which every variable occurs exactly
//! twice positively and twice negatively (so `3m = 4n`).  Each variable
//! becomes a hospital with four doctors — one per occurrence — whose quota
//! family admits exactly the two positive doctors or exactly the two
//! negative doctors, and each clause becomes a hospital that must take at
//! least one of its three occurrence doctors.  Every doctor ranks its
//! variable hospital first and its clause hospital second.  The market
//! admits an envy-free matching iff the formula is satisfiable, and the
//! variable rosters of any feasible matching read off a satisfying
//! assignment.  The variable families are not generalized matroids, so the
//! compiled solver refuses these markets; only the exhaustive oracle
//! handles them.

use crate::instance::{InstanceBuilder, MarketInstance};
use crate::matching::Matching;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

/// A literal: variable index (0-based) plus polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lit {
    pub var: usize,
    pub positive: bool,
}

/// A 3-CNF formula in which every variable must occur exactly twice with
/// each polarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf3B2 {
    pub num_vars: usize,
    pub clauses: Vec<[Lit; 3]>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("{vars} variables need {} clauses, found {clauses}", vars * 4 / 3)]
    WrongClauseCount { vars: usize, clauses: usize },
    #[error("clause {clause} uses variable {var} more than once")]
    RepeatedVariable { clause: usize, var: usize },
    #[error("variable {var} occurs {pos}x positive / {neg}x negative; need 2/2")]
    WrongOccurrences { var: usize, pos: usize, neg: usize },
    #[error("variable index {var} out of range for {vars} variables")]
    VarOutOfRange { var: usize, vars: usize },
}

impl Cnf3B2 {
    pub fn validate(&self) -> Result<(), CnfError> {
        let n = self.num_vars;
        if 3 * self.clauses.len() != 4 * n {
            return Err(CnfError::WrongClauseCount { vars: n, clauses: self.clauses.len() });
        }
        let mut pos = vec![0usize; n];
        let mut neg = vec![0usize; n];
        for (ci, clause) in self.clauses.iter().enumerate() {
            for (k, lit) in clause.iter().enumerate() {
                if lit.var >= n {
                    return Err(CnfError::VarOutOfRange { var: lit.var, vars: n });
                }
                if clause[..k].iter().any(|prev| prev.var == lit.var) {
                    return Err(CnfError::RepeatedVariable { clause: ci, var: lit.var });
                }
                if lit.positive {
                    pos[lit.var] += 1;
                } else {
                    neg[lit.var] += 1;
                }
            }
        }
        for v in 0..n {
            if pos[v] != 2 || neg[v] != 2 {
                return Err(CnfError::WrongOccurrences { var: v, pos: pos[v], neg: neg[v] });
            }
        }
        Ok(())
    }

    /// Does `assignment` (one bool per variable) satisfy every clause?
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|lit| assignment[lit.var] == lit.positive))
    }
}

/// Which way hospitals rank their doctors in the reduced market.  The
/// market's verdict must not depend on this — a useful test knob.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HospitalOrder {
    AscendingDoctors,
    DescendingDoctors,
}

/// Occurrence bookkeeping: for each variable, the clause index of its two
/// positive and two negative occurrences, in clause order.
struct Occurrences {
    pos: Vec<[usize; 2]>,
    neg: Vec<[usize; 2]>,
}

fn occurrences(cnf: &Cnf3B2) -> Occurrences {
    let mut pos = vec![Vec::new(); cnf.num_vars];
    let mut neg = vec![Vec::new(); cnf.num_vars];
    for (ci, clause) in cnf.clauses.iter().enumerate() {
        for lit in clause {
            if lit.positive {
                pos[lit.var].push(ci);
            } else {
                neg[lit.var].push(ci);
            }
        }
    }
    Occurrences {
        pos: pos.into_iter().map(|v| [v[0], v[1]]).collect(),
        neg: neg.into_iter().map(|v| [v[0], v[1]]).collect(),
    }
}

/// Doctor names for variable `v` in creation order: its two positive
/// occurrence doctors, then its two negative ones.
fn doctor_names(v: usize) -> [String; 4] {
    [
        format!("d{}p1", v + 1),
        format!("d{}p2", v + 1),
        format!("d{}n1", v + 1),
        format!("d{}n2", v + 1),
    ]
}

/// Builds the matching market for a validated formula.
pub fn reduce_sat(cnf: &Cnf3B2, order: HospitalOrder) -> Result<MarketInstance, CnfError> {
    cnf.validate()?;
    let n = cnf.num_vars;
    let occ = occurrences(cnf);

    let var_hospitals: Vec<String> = (0..n).map(|v| format!("x{}", v + 1)).collect();
    let clause_hospitals: Vec<String> =
        (0..cnf.clauses.len()).map(|c| format!("c{}", c + 1)).collect();
    let doctors: Vec<[String; 4]> = (0..n).map(doctor_names).collect();

    // Per clause, its three doctors in creation order (variable-major).
    let mut clause_doctors: Vec<Vec<&str>> = vec![Vec::new(); cnf.clauses.len()];
    for v in 0..n {
        for (slot, &ci) in occ.pos[v].iter().enumerate() {
            clause_doctors[ci].push(&doctors[v][slot]);
        }
        for (slot, &ci) in occ.neg[v].iter().enumerate() {
            clause_doctors[ci].push(&doctors[v][2 + slot]);
        }
    }
    for list in &mut clause_doctors {
        list.sort_by_key(|name| {
            let v: usize = name[1..name.len() - 2].parse().unwrap();
            let slot = match &name[name.len() - 2..] {
                "p1" => 0,
                "p2" => 1,
                "n1" => 2,
                _ => 3,
            };
            (v, slot)
        });
        if order == HospitalOrder::DescendingDoctors {
            list.reverse();
        }
    }

    let mut b = InstanceBuilder::new();
    for v in 0..n {
        for (slot, name) in doctors[v].iter().enumerate() {
            let ci = if slot < 2 { occ.pos[v][slot] } else { occ.neg[v][slot - 2] };
            b = b.doctor(name, [var_hospitals[v].as_str(), clause_hospitals[ci].as_str()]);
        }
    }
    for v in 0..n {
        let mut prefs: Vec<&str> = doctors[v].iter().map(String::as_str).collect();
        if order == HospitalOrder::DescendingDoctors {
            prefs.reverse();
        }
        let pair = |a: usize, c: usize| {
            (
                vec![doctors[v][a].as_str(), doctors[v][c].as_str()],
                1u32,
                1u32,
            )
        };
        let constraints: Vec<(Vec<&str>, u32, u32)> =
            vec![pair(0, 2), pair(0, 3), pair(1, 2), pair(1, 3)];
        let borrowed: Vec<(&[&str], u32, u32)> =
            constraints.iter().map(|(m, lo, hi)| (m.as_slice(), *lo, *hi)).collect();
        b = b.hospital(
            &var_hospitals[v],
            prefs,
            crate::quota::QuotaData::explicit(&borrowed),
        );
    }
    for (ci, name) in clause_hospitals.iter().enumerate() {
        b = b.hospital(
            name,
            clause_doctors[ci].iter().copied(),
            crate::quota::QuotaData::interval(1, 3),
        );
    }
    Ok(b.build().expect("reduction always builds a valid market"))
}

/// First satisfying assignment in binary counting order, if any.  Brute
/// force; formulas this size have at most a few dozen variables.
pub fn solve_sat(cnf: &Cnf3B2) -> Option<Vec<bool>> {
    let n = cnf.num_vars;
    assert!(n <= 20, "brute-force satisfiability is for small formulas");
    (0u32..1 << n)
        .map(|mask| (0..n).map(|v| mask >> v & 1 == 1).collect::<Vec<bool>>())
        .find(|a| cnf.satisfied_by(a))
}

/// The canonical envy-free matching read off a satisfying assignment: a
/// true variable sends its negative doctors to the variable hospital, a
/// false one its positive doctors, and every remaining doctor goes to its
/// clause hospital.
pub fn witness_matching(
    cnf: &Cnf3B2,
    assignment: &[bool],
    inst: &MarketInstance,
) -> Matching {
    assert!(cnf.satisfied_by(assignment), "witness needs a satisfying assignment");
    let occ = occurrences(cnf);
    let mut edges = Vec::new();
    let mut push = |doctor: &str, hospital: &str| {
        let d = inst.doctor_id(doctor).expect("doctor from the same reduction");
        let h = inst.hospital_id(hospital).expect("hospital from the same reduction");
        edges.push(inst.edge_between(d, h).expect("edge from the same reduction"));
    };
    for v in 0..cnf.num_vars {
        let names = doctor_names(v);
        let var_hospital = format!("x{}", v + 1);
        // Slots 0,1 are positive doctors, 2,3 negative.
        let home: [bool; 4] = if assignment[v] {
            [false, false, true, true]
        } else {
            [true, true, false, false]
        };
        for slot in 0..4 {
            if home[slot] {
                push(&names[slot], &var_hospital);
            } else {
                let ci = if slot < 2 { occ.pos[v][slot] } else { occ.neg[v][slot - 2] };
                push(&names[slot], &format!("c{}", ci + 1));
            }
        }
    }
    Matching::from_edge_ids(inst, edges).expect("each doctor placed once")
}

/// Samples a random formula in the required occurrence pattern.
/// `num_vars` must be a positive multiple of 3 so the clause count is
/// whole.  Rejection-samples clause triples until none repeats a variable.
pub fn random_cnf(rng: &mut impl Rng, num_vars: usize) -> Cnf3B2 {
    assert!(num_vars > 0 && num_vars % 3 == 0, "variable count must be a positive multiple of 3");
    let mut tokens: Vec<Lit> = (0..num_vars)
        .flat_map(|v| {
            [true, true, false, false]
                .into_iter()
                .map(move |positive| Lit { var: v, positive })
        })
        .collect();
    for attempt in 0.. {
        assert!(attempt < 100_000, "rejection sampling failed to terminate");
        tokens.shuffle(rng);
        let ok = tokens.chunks(3).all(|c| {
            c[0].var != c[1].var && c[0].var != c[2].var && c[1].var != c[2].var
        });
        if ok {
            let clauses = tokens.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
            let cnf = Cnf3B2 { num_vars, clauses };
            debug_assert_eq!(cnf.validate(), Ok(()));
            return cnf;
        }
    }
    unreachable!()
}
