//! Envy-free matching in doctor/hospital markets with lower quotas.
//!
//! A market assigns doctors to hospitals along an acceptability graph, with
//! both sides ranking their acceptable partners by strict preference.  Each
//! hospital constrains the set of doctors it may hold: either a simple
//! interval `l <= |assigned| <= u`, or a classified quota that bounds the
//! intersection of the assigned set with designated doctor classes.
//!
//! A feasible matching is *envy-free* when no doctor would rather take a seat
//! currently held by a doctor its hospital likes less.  Envy-freeness relaxes
//! stability: it tolerates claims on unused capacity but not on occupied
//! seats, which is what makes markets with lower quotas tractable.
//!
//! The crate provides:
//!
//! * [`instance`] — market data model, construction, validation;
//! * [`quota`] — quota specifications and family membership;
//! * [`matching`] — assignments and their views;
//! * [`predicates`] — feasibility, justified envy, blocking pairs;
//! * [`hr`] — deferred acceptance and the interval-quota solver;
//! * [`matroid`] — rank oracles, ordered choice, paramodularity checks;
//! * [`compile`] — quota compilation to fast lower-quota evaluators;
//! * [`fixedpoint`] — the proposal/rejection fixed-point solver for
//!   classified markets;
//! * [`oracle`] — brute-force enumeration and a SAT-based hard-instance
//!   generator;
//! * [`gen`] — seeded random market generators.

pub mod compile;
pub mod fixedpoint;
pub mod gen;
pub mod hr;
pub mod instance;
pub mod matching;
pub mod matroid;
pub mod oracle;
pub mod predicates;
pub mod quota;
pub mod sets;

pub use compile::{compile_instance, CompileError, CompiledInstance, CompiledQuota};
pub use instance::{DoctorId, EdgeId, HospitalId, InstanceData, MarketInstance, Violation};
pub use matching::{Matching, SolveOutcome};
pub use predicates::{find_blocking_pairs, find_justified_envy, is_feasible, EnvyTriple};
pub use quota::QuotaSpec;
pub use sets::BitSubset;
