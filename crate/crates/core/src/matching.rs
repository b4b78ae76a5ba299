//! Matchings: which acceptability edges are in use, viewed from both sides.

use crate::instance::{DoctorId, EdgeId, HospitalId, MarketInstance};
use crate::sets::BitSubset;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("doctor {doctor} is matched to more than one hospital")]
    DoctorMatchedTwice { doctor: String },
}

/// An assignment of doctors to hospitals along acceptability edges; each
/// doctor holds at most one seat.
///
/// Hospital rosters are kept as subsets of the hospital's *ground*: position
/// `i` in the roster corresponds to the `i`-th doctor on the hospital's
/// preference list, which is also how quota families index members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pairs: Vec<EdgeId>,
    by_doctor: Vec<Option<EdgeId>>,
    rosters: Vec<BitSubset>,
}

impl Matching {
    pub fn empty(inst: &MarketInstance) -> Self {
        Matching {
            pairs: Vec::new(),
            by_doctor: vec![None; inst.n_doctors()],
            rosters: inst
                .hospitals()
                .map(|h| BitSubset::empty(inst.ground_size(h)))
                .collect(),
        }
    }

    pub fn from_edge_ids(
        inst: &MarketInstance,
        edges: impl IntoIterator<Item = EdgeId>,
    ) -> Result<Self, MatchingError> {
        let mut m = Matching::empty(inst);
        let mut pairs: Vec<EdgeId> = edges.into_iter().collect();
        pairs.sort_unstable_by_key(|e| e.idx());
        pairs.dedup();
        for &e in &pairs {
            let (d, h) = inst.edge_ends(e);
            if m.by_doctor[d.idx()].is_some() {
                return Err(MatchingError::DoctorMatchedTwice {
                    doctor: inst.doctor_name(d).to_string(),
                });
            }
            m.by_doctor[d.idx()] = Some(e);
            m.rosters[h.idx()].insert(inst.hospital_rank(e) as usize);
        }
        m.pairs = pairs;
        Ok(m)
    }

    /// Edges in use, ascending by edge id.
    pub fn edges(&self) -> &[EdgeId] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.pairs.binary_search_by_key(&e.idx(), |x| x.idx()).is_ok()
    }

    pub fn doctor_edge(&self, d: DoctorId) -> Option<EdgeId> {
        self.by_doctor[d.idx()]
    }

    pub fn hospital_of(&self, inst: &MarketInstance, d: DoctorId) -> Option<HospitalId> {
        self.by_doctor[d.idx()].map(|e| inst.edge_hospital(e))
    }

    /// The hospital's assigned doctors as ground positions.
    pub fn roster(&self, h: HospitalId) -> &BitSubset {
        &self.rosters[h.idx()]
    }

    pub fn roster_size(&self, h: HospitalId) -> usize {
        self.rosters[h.idx()].card()
    }
}

/// What a solver concluded about a market.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Matching(Matching),
    /// The market provably admits no envy-free matching.
    NoEnvyFree,
}

impl SolveOutcome {
    pub fn as_matching(&self) -> Option<&Matching> {
        match self {
            SolveOutcome::Matching(m) => Some(m),
            SolveOutcome::NoEnvyFree => None,
        }
    }
}
