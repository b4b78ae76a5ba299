//! Market instances: doctors, hospitals, acceptability edges, preference
//! lists, and per-hospital quotas.
//!
//! [`InstanceData`] is the raw, name-based form in which callers and file
//! formats describe a market.  [`MarketInstance`] is the validated, indexed
//! form used by the solvers: participants become dense integer ids, and each
//! edge caches its rank in both incident preference lists.
//!
//! Identifiers are opaque strings; nothing is inferred from their shape.
//! Degenerate markets (no doctors, no hospitals, no edges) are legal.

use crate::quota::{ClassBound, ClassData, QuotaData, QuotaSpec, SectionBound, SectionData};
use crate::sets::BitSubset;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use thiserror::Error;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn idx(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// Index of a doctor in instance order.
    DoctorId
);
id_type!(
    /// Index of a hospital in instance order.
    HospitalId
);
id_type!(
    /// Index of an acceptability edge in instance order.
    EdgeId
);

/// Raw, name-based market description.
///
/// The `doctors` and `hospitals` vectors fix the instance order used for
/// deterministic processing; preference lists and quotas are keyed by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InstanceData {
    pub doctors: Vec<String>,
    pub hospitals: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub doctor_prefs: BTreeMap<String, Vec<String>>,
    pub hospital_prefs: BTreeMap<String, Vec<String>>,
    pub quotas: BTreeMap<String, QuotaData>,
}

/// A single violated invariant found while validating an [`InstanceData`].
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Violation {
    #[error("doctor {name:?} is listed more than once")]
    DuplicateDoctor { name: String },
    #[error("hospital {name:?} is listed more than once")]
    DuplicateHospital { name: String },
    #[error("edge #{index} references unknown doctor {name:?}")]
    EdgeUnknownDoctor { index: usize, name: String },
    #[error("edge #{index} references unknown hospital {name:?}")]
    EdgeUnknownHospital { index: usize, name: String },
    #[error("edge ({doctor:?}, {hospital:?}) is listed more than once")]
    DuplicateEdge { doctor: String, hospital: String },
    #[error("doctor {name:?} has no preference list")]
    MissingDoctorPrefs { name: String },
    #[error("hospital {name:?} has no preference list")]
    MissingHospitalPrefs { name: String },
    #[error("preference list keyed by unknown doctor {name:?}")]
    PrefsUnknownDoctor { name: String },
    #[error("preference list keyed by unknown hospital {name:?}")]
    PrefsUnknownHospital { name: String },
    #[error("doctor {doctor:?} ranks {entry:?} more than once")]
    DuplicateDoctorPrefEntry { doctor: String, entry: String },
    #[error("hospital {hospital:?} ranks {entry:?} more than once")]
    DuplicateHospitalPrefEntry { hospital: String, entry: String },
    #[error("doctor {doctor:?} ranks {hospital:?} but edge ({doctor:?}, {hospital:?}) is absent")]
    DoctorPrefWithoutEdge { doctor: String, hospital: String },
    #[error("edge ({doctor:?}, {hospital:?}) is missing from doctor {doctor:?}'s preference list")]
    EdgeMissingFromDoctorPrefs { doctor: String, hospital: String },
    #[error("hospital {hospital:?} ranks {doctor:?} but edge ({doctor:?}, {hospital:?}) is absent")]
    HospitalPrefWithoutEdge { hospital: String, doctor: String },
    #[error("edge ({doctor:?}, {hospital:?}) is missing from hospital {hospital:?}'s preference list")]
    EdgeMissingFromHospitalPrefs { hospital: String, doctor: String },
    #[error("hospital {name:?} has no quota")]
    MissingQuota { name: String },
    #[error("quota keyed by unknown hospital {name:?}")]
    QuotaUnknownHospital { name: String },
    #[error("hospital {hospital:?}: interval quota ({lower}, {upper}) violates 0 <= lower <= upper <= {ground}")]
    IntervalBounds {
        hospital: String,
        lower: u32,
        upper: u32,
        ground: u32,
    },
    #[error("hospital {hospital:?}: class #{class_index} bounds ({lo}, {hi}) violate 0 <= lo <= hi <= {size}")]
    ClassBounds {
        hospital: String,
        class_index: usize,
        lo: u32,
        hi: u32,
        size: u32,
    },
    #[error("hospital {hospital:?}: class #{class_index} member {member:?} is not an acceptable doctor of this hospital")]
    ClassMemberNotAcceptable {
        hospital: String,
        class_index: usize,
        member: String,
    },
    #[error("hospital {hospital:?}: class #{class_index} lists member {member:?} more than once")]
    DuplicateClassMember {
        hospital: String,
        class_index: usize,
        member: String,
    },
    #[error("hospital {hospital:?}: section {section:?} bounds ({lo}, {hi}) violate lo <= hi")]
    SectionBounds {
        hospital: String,
        section: String,
        lo: u32,
        hi: u32,
    },
    #[error("hospital {hospital:?}: section {section:?} accepts {member:?}, which is not an acceptable doctor of this hospital")]
    SectionMemberNotAcceptable {
        hospital: String,
        section: String,
        member: String,
    },
    #[error("hospital {hospital:?}: section {section:?} accepts {member:?} more than once")]
    DuplicateSectionMember {
        hospital: String,
        section: String,
        member: String,
    },
    #[error("hospital {hospital:?}: section label {label:?} is used more than once")]
    DuplicateSectionLabel { hospital: String, label: String },
    #[error("hospital {hospital:?}: classes #{first} and #{second} overlap without nesting, so the family is not laminar")]
    NotLaminar {
        hospital: String,
        first: usize,
        second: usize,
    },
    #[error("hospital {hospital:?}: the quota admits no feasible set of doctors")]
    EmptyQuotaFamily { hospital: String },
}

/// Construction failure carrying every violation found.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct InvalidInstance {
    pub violations: Vec<Violation>,
}

impl fmt::Display for InvalidInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid market instance ({} violations):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Validated, indexed market.
#[derive(Clone, Debug)]
pub struct MarketInstance {
    doctors: Vec<String>,
    hospitals: Vec<String>,
    edges: Vec<(DoctorId, HospitalId)>,
    doctor_pref_edges: Vec<Vec<EdgeId>>,
    hospital_pref_edges: Vec<Vec<EdgeId>>,
    /// Rank of each edge in its doctor's preference list (0 = best).
    doctor_rank: Vec<u32>,
    /// Rank of each edge in its hospital's preference list; this is also the
    /// doctor's *ground position* for the hospital's quota.
    hospital_rank: Vec<u32>,
    quotas: Vec<QuotaSpec>,
    doctor_index: HashMap<String, DoctorId>,
    hospital_index: HashMap<String, HospitalId>,
    edge_index: HashMap<(DoctorId, HospitalId), EdgeId>,
}

impl MarketInstance {
    /// Validates `data` and builds the indexed market.
    pub fn new(data: &InstanceData) -> Result<Self, InvalidInstance> {
        let violations = validate(data);
        if !violations.is_empty() {
            return Err(InvalidInstance { violations });
        }
        Ok(Self::assemble(data))
    }

    fn assemble(data: &InstanceData) -> Self {
        let doctor_index: HashMap<String, DoctorId> = data
            .doctors
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), DoctorId(i as u32)))
            .collect();
        let hospital_index: HashMap<String, HospitalId> = data
            .hospitals
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), HospitalId(i as u32)))
            .collect();
        let edges: Vec<(DoctorId, HospitalId)> = data
            .edges
            .iter()
            .map(|(d, h)| (doctor_index[d], hospital_index[h]))
            .collect();
        let edge_index: HashMap<(DoctorId, HospitalId), EdgeId> = edges
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, EdgeId(i as u32)))
            .collect();

        let mut doctor_pref_edges = vec![Vec::new(); data.doctors.len()];
        let mut doctor_rank = vec![0u32; edges.len()];
        for (name, prefs) in &data.doctor_prefs {
            let d = doctor_index[name];
            let list: Vec<EdgeId> = prefs
                .iter()
                .map(|h| edge_index[&(d, hospital_index[h])])
                .collect();
            for (rank, &e) in list.iter().enumerate() {
                doctor_rank[e.idx()] = rank as u32;
            }
            doctor_pref_edges[d.idx()] = list;
        }

        let mut hospital_pref_edges = vec![Vec::new(); data.hospitals.len()];
        let mut hospital_rank = vec![0u32; edges.len()];
        for (name, prefs) in &data.hospital_prefs {
            let h = hospital_index[name];
            let list: Vec<EdgeId> = prefs
                .iter()
                .map(|d| edge_index[&(doctor_index[d], h)])
                .collect();
            for (rank, &e) in list.iter().enumerate() {
                hospital_rank[e.idx()] = rank as u32;
            }
            hospital_pref_edges[h.idx()] = list;
        }

        let quotas: Vec<QuotaSpec> = data
            .hospitals
            .iter()
            .map(|name| {
                let ground: Vec<&str> =
                    data.hospital_prefs[name].iter().map(|s| s.as_str()).collect();
                convert_quota(&data.quotas[name], &ground).expect("validated quota converts")
            })
            .collect();

        MarketInstance {
            doctors: data.doctors.clone(),
            hospitals: data.hospitals.clone(),
            edges,
            doctor_pref_edges,
            hospital_pref_edges,
            doctor_rank,
            hospital_rank,
            quotas,
            doctor_index,
            hospital_index,
            edge_index,
        }
    }

    pub fn n_doctors(&self) -> usize {
        self.doctors.len()
    }

    pub fn n_hospitals(&self) -> usize {
        self.hospitals.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn doctors(&self) -> impl Iterator<Item = DoctorId> {
        (0..self.doctors.len() as u32).map(DoctorId)
    }

    pub fn hospitals(&self) -> impl Iterator<Item = HospitalId> {
        (0..self.hospitals.len() as u32).map(HospitalId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn doctor_name(&self, d: DoctorId) -> &str {
        &self.doctors[d.idx()]
    }

    pub fn hospital_name(&self, h: HospitalId) -> &str {
        &self.hospitals[h.idx()]
    }

    pub fn doctor_id(&self, name: &str) -> Option<DoctorId> {
        self.doctor_index.get(name).copied()
    }

    pub fn hospital_id(&self, name: &str) -> Option<HospitalId> {
        self.hospital_index.get(name).copied()
    }

    #[inline]
    pub fn edge_ends(&self, e: EdgeId) -> (DoctorId, HospitalId) {
        self.edges[e.idx()]
    }

    #[inline]
    pub fn edge_doctor(&self, e: EdgeId) -> DoctorId {
        self.edges[e.idx()].0
    }

    #[inline]
    pub fn edge_hospital(&self, e: EdgeId) -> HospitalId {
        self.edges[e.idx()].1
    }

    /// Edges of `d`, most preferred first.
    #[inline]
    pub fn doctor_prefs(&self, d: DoctorId) -> &[EdgeId] {
        &self.doctor_pref_edges[d.idx()]
    }

    /// Edges of `h`, most preferred first.
    #[inline]
    pub fn hospital_prefs(&self, h: HospitalId) -> &[EdgeId] {
        &self.hospital_pref_edges[h.idx()]
    }

    /// Rank of `e` within its doctor's list; lower is better.
    #[inline]
    pub fn doctor_rank(&self, e: EdgeId) -> u32 {
        self.doctor_rank[e.idx()]
    }

    /// Rank of `e` within its hospital's list; lower is better.  Doubles as
    /// the doctor's position in the hospital's quota ground.
    #[inline]
    pub fn hospital_rank(&self, e: EdgeId) -> u32 {
        self.hospital_rank[e.idx()]
    }

    /// Size of the quota ground `A(h)`.
    #[inline]
    pub fn ground_size(&self, h: HospitalId) -> usize {
        self.hospital_pref_edges[h.idx()].len()
    }

    #[inline]
    pub fn quota(&self, h: HospitalId) -> &QuotaSpec {
        &self.quotas[h.idx()]
    }

    pub fn edge_between(&self, d: DoctorId, h: HospitalId) -> Option<EdgeId> {
        self.edge_index.get(&(d, h)).copied()
    }

    /// The edge sitting at ground position `pos` of hospital `h`.
    #[inline]
    pub fn edge_at_ground(&self, h: HospitalId, pos: usize) -> EdgeId {
        self.hospital_pref_edges[h.idx()][pos]
    }

    /// Rebuilds the name-based description (instance order is preserved).
    pub fn to_data(&self) -> InstanceData {
        InstanceData {
            doctors: self.doctors.clone(),
            hospitals: self.hospitals.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(d, h)| (self.doctors[d.idx()].clone(), self.hospitals[h.idx()].clone()))
                .collect(),
            doctor_prefs: self
                .doctors()
                .map(|d| {
                    let list = self
                        .doctor_prefs(d)
                        .iter()
                        .map(|&e| self.hospitals[self.edge_hospital(e).idx()].clone())
                        .collect();
                    (self.doctors[d.idx()].clone(), list)
                })
                .collect(),
            hospital_prefs: self
                .hospitals()
                .map(|h| {
                    let list = self
                        .hospital_prefs(h)
                        .iter()
                        .map(|&e| self.doctors[self.edge_doctor(e).idx()].clone())
                        .collect();
                    (self.hospitals[h.idx()].clone(), list)
                })
                .collect(),
            quotas: self
                .hospitals()
                .map(|h| (self.hospitals[h.idx()].clone(), self.quota_data(h)))
                .collect(),
        }
    }

    /// The quota of `h` with ground positions translated back to doctor names.
    pub fn quota_data(&self, h: HospitalId) -> QuotaData {
        let name_at = |pos: usize| {
            let e = self.edge_at_ground(h, pos);
            self.doctors[self.edge_doctor(e).idx()].clone()
        };
        let classes_back = |bounds: &[ClassBound]| {
            bounds
                .iter()
                .map(|c| ClassData {
                    members: c.members.iter().map(name_at).collect(),
                    lo: c.lo,
                    hi: c.hi,
                })
                .collect()
        };
        match self.quota(h) {
            QuotaSpec::Interval { lower, upper } => QuotaData::Interval {
                lower: *lower,
                upper: *upper,
            },
            QuotaSpec::Explicit { constraints } => QuotaData::Explicit {
                constraints: classes_back(constraints),
            },
            QuotaSpec::Laminar { classes } => QuotaData::Laminar {
                classes: classes_back(classes),
            },
            QuotaSpec::Staffing { sections } => QuotaData::Staffing {
                sections: sections
                    .iter()
                    .map(|s| SectionData {
                        id: Some(s.label.clone()),
                        accepts: s.accepts.iter().map(name_at).collect(),
                        lo: s.lo,
                        hi: s.hi,
                    })
                    .collect(),
            },
        }
    }

    /// A copy of the market with each hospital's quota truncated at
    /// `caps[h]` doctors.
    ///
    /// Truncated quotas may admit no feasible set (for example when
    /// `caps[h]` undercuts a lower bound); unlike construction, this path
    /// deliberately skips the nonemptiness check, since truncation is an
    /// analysis device rather than an input format.
    pub fn truncated(&self, caps: &[u32]) -> Result<MarketInstance, crate::quota::QuotaError> {
        assert_eq!(caps.len(), self.n_hospitals(), "one cap per hospital");
        let mut out = self.clone();
        for h in self.hospitals() {
            out.quotas[h.idx()] = self.quota(h).truncated(self.ground_size(h), caps[h.idx()])?;
        }
        Ok(out)
    }
}

/// Converts a name-based quota to ground positions.  `ground` lists the
/// hospital's acceptable doctors in preference order.  Fails (with `None`)
/// only on names outside the ground; bound checks live in [`validate`].
fn convert_quota(data: &QuotaData, ground: &[&str]) -> Option<QuotaSpec> {
    let n = ground.len();
    let pos = |name: &str| ground.iter().position(|g| *g == name);
    let classes = |raw: &[ClassData]| -> Option<Vec<ClassBound>> {
        raw.iter()
            .map(|c| {
                let mut members = BitSubset::empty(n);
                for m in &c.members {
                    members.insert(pos(m)?);
                }
                Some(ClassBound {
                    members,
                    lo: c.lo,
                    hi: c.hi,
                })
            })
            .collect()
    };
    Some(match data {
        QuotaData::Interval { lower, upper } => QuotaSpec::Interval {
            lower: *lower,
            upper: *upper,
        },
        QuotaData::Explicit { constraints } => QuotaSpec::Explicit {
            constraints: classes(constraints)?,
        },
        QuotaData::Laminar { classes: cs } => QuotaSpec::Laminar {
            classes: classes(cs)?,
        },
        QuotaData::Staffing { sections } => QuotaSpec::Staffing {
            sections: sections
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let mut accepts = BitSubset::empty(n);
                    for m in &s.accepts {
                        accepts.insert(pos(m)?);
                    }
                    Some(SectionBound {
                        label: s.id.clone().unwrap_or_else(|| format!("s{i}")),
                        accepts,
                        lo: s.lo,
                        hi: s.hi,
                    })
                })
                .collect::<Option<Vec<_>>>()?,
        },
    })
}

/// Checks every instance invariant and returns the full list of violations.
pub fn validate(data: &InstanceData) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut doctors = HashSet::new();
    for name in &data.doctors {
        if !doctors.insert(name.as_str()) {
            out.push(Violation::DuplicateDoctor { name: name.clone() });
        }
    }
    let mut hospitals = HashSet::new();
    for name in &data.hospitals {
        if !hospitals.insert(name.as_str()) {
            out.push(Violation::DuplicateHospital { name: name.clone() });
        }
    }

    let mut edge_set: HashSet<(&str, &str)> = HashSet::new();
    for (index, (d, h)) in data.edges.iter().enumerate() {
        let mut known = true;
        if !doctors.contains(d.as_str()) {
            out.push(Violation::EdgeUnknownDoctor {
                index,
                name: d.clone(),
            });
            known = false;
        }
        if !hospitals.contains(h.as_str()) {
            out.push(Violation::EdgeUnknownHospital {
                index,
                name: h.clone(),
            });
            known = false;
        }
        if known && !edge_set.insert((d.as_str(), h.as_str())) {
            out.push(Violation::DuplicateEdge {
                doctor: d.clone(),
                hospital: h.clone(),
            });
        }
    }

    // Doctor preference lists: exactly the incident edges, each once.
    for name in &data.doctors {
        match data.doctor_prefs.get(name) {
            None => out.push(Violation::MissingDoctorPrefs { name: name.clone() }),
            Some(prefs) => {
                let mut seen = HashSet::new();
                for h in prefs {
                    if !seen.insert(h.as_str()) {
                        out.push(Violation::DuplicateDoctorPrefEntry {
                            doctor: name.clone(),
                            entry: h.clone(),
                        });
                    } else if !edge_set.contains(&(name.as_str(), h.as_str())) {
                        out.push(Violation::DoctorPrefWithoutEdge {
                            doctor: name.clone(),
                            hospital: h.clone(),
                        });
                    }
                }
                for (d, h) in &data.edges {
                    if d == name && !seen.contains(h.as_str()) {
                        out.push(Violation::EdgeMissingFromDoctorPrefs {
                            doctor: name.clone(),
                            hospital: h.clone(),
                        });
                    }
                }
            }
        }
    }
    for name in data.doctor_prefs.keys() {
        if !doctors.contains(name.as_str()) {
            out.push(Violation::PrefsUnknownDoctor { name: name.clone() });
        }
    }

    // Hospital preference lists, symmetrically.
    for name in &data.hospitals {
        match data.hospital_prefs.get(name) {
            None => out.push(Violation::MissingHospitalPrefs { name: name.clone() }),
            Some(prefs) => {
                let mut seen = HashSet::new();
                for d in prefs {
                    if !seen.insert(d.as_str()) {
                        out.push(Violation::DuplicateHospitalPrefEntry {
                            hospital: name.clone(),
                            entry: d.clone(),
                        });
                    } else if !edge_set.contains(&(d.as_str(), name.as_str())) {
                        out.push(Violation::HospitalPrefWithoutEdge {
                            hospital: name.clone(),
                            doctor: d.clone(),
                        });
                    }
                }
                for (d, h) in &data.edges {
                    if h == name && !seen.contains(d.as_str()) {
                        out.push(Violation::EdgeMissingFromHospitalPrefs {
                            hospital: name.clone(),
                            doctor: d.clone(),
                        });
                    }
                }
            }
        }
    }
    for name in data.hospital_prefs.keys() {
        if !hospitals.contains(name.as_str()) {
            out.push(Violation::PrefsUnknownHospital { name: name.clone() });
        }
    }

    // Quotas: one per hospital, bounds in range, structure sound.
    for name in data.quotas.keys() {
        if !hospitals.contains(name.as_str()) {
            out.push(Violation::QuotaUnknownHospital { name: name.clone() });
        }
    }
    for name in &data.hospitals {
        let Some(quota) = data.quotas.get(name) else {
            out.push(Violation::MissingQuota { name: name.clone() });
            continue;
        };
        let Some(prefs) = data.hospital_prefs.get(name) else {
            continue; // ground unknown; already reported above
        };
        validate_quota(name, quota, prefs, &mut out);
    }

    out
}

fn validate_quota(hospital: &str, quota: &QuotaData, ground: &[String], out: &mut Vec<Violation>) {
    let n = ground.len() as u32;
    let ground_refs: Vec<&str> = ground.iter().map(|s| s.as_str()).collect();
    let mut structurally_ok = true;

    let check_classes = |raw: &[ClassData], out: &mut Vec<Violation>| -> bool {
        let mut ok = true;
        for (class_index, c) in raw.iter().enumerate() {
            let mut seen = HashSet::new();
            for m in &c.members {
                if !ground_refs.contains(&m.as_str()) {
                    out.push(Violation::ClassMemberNotAcceptable {
                        hospital: hospital.to_string(),
                        class_index,
                        member: m.clone(),
                    });
                    ok = false;
                } else if !seen.insert(m.as_str()) {
                    out.push(Violation::DuplicateClassMember {
                        hospital: hospital.to_string(),
                        class_index,
                        member: m.clone(),
                    });
                    ok = false;
                }
            }
            let size = seen.len() as u32;
            if ok && !(c.lo <= c.hi && c.hi <= size) {
                out.push(Violation::ClassBounds {
                    hospital: hospital.to_string(),
                    class_index,
                    lo: c.lo,
                    hi: c.hi,
                    size,
                });
                ok = false;
            }
        }
        ok
    };

    match quota {
        QuotaData::Interval { lower, upper } => {
            if !(lower <= upper && *upper <= n) {
                out.push(Violation::IntervalBounds {
                    hospital: hospital.to_string(),
                    lower: *lower,
                    upper: *upper,
                    ground: n,
                });
            }
        }
        QuotaData::Explicit { constraints } => {
            check_classes(constraints, out);
        }
        QuotaData::Laminar { classes } => {
            structurally_ok = check_classes(classes, out);
            if structurally_ok {
                let spec = convert_quota(quota, &ground_refs).expect("members verified");
                let QuotaSpec::Laminar { classes: converted } = &spec else {
                    unreachable!()
                };
                if let Some((first, second)) = crate::compile::non_laminar_pair(converted) {
                    out.push(Violation::NotLaminar {
                        hospital: hospital.to_string(),
                        first,
                        second,
                    });
                } else if !crate::compile::laminar_feasible(converted, ground.len()) {
                    out.push(Violation::EmptyQuotaFamily {
                        hospital: hospital.to_string(),
                    });
                }
            }
        }
        QuotaData::Staffing { sections } => {
            let mut labels = HashSet::new();
            for (i, s) in sections.iter().enumerate() {
                let label = s.id.clone().unwrap_or_else(|| format!("s{i}"));
                if !labels.insert(label.clone()) {
                    out.push(Violation::DuplicateSectionLabel {
                        hospital: hospital.to_string(),
                        label: label.clone(),
                    });
                }
                if s.lo > s.hi {
                    out.push(Violation::SectionBounds {
                        hospital: hospital.to_string(),
                        section: label.clone(),
                        lo: s.lo,
                        hi: s.hi,
                    });
                    structurally_ok = false;
                }
                let mut seen = HashSet::new();
                for m in &s.accepts {
                    if !ground_refs.contains(&m.as_str()) {
                        out.push(Violation::SectionMemberNotAcceptable {
                            hospital: hospital.to_string(),
                            section: label.clone(),
                            member: m.clone(),
                        });
                        structurally_ok = false;
                    } else if !seen.insert(m.as_str()) {
                        out.push(Violation::DuplicateSectionMember {
                            hospital: hospital.to_string(),
                            section: label.clone(),
                            member: m.clone(),
                        });
                        structurally_ok = false;
                    }
                }
            }
            if structurally_ok {
                let spec = convert_quota(quota, &ground_refs).expect("members verified");
                let QuotaSpec::Staffing { sections: converted } = &spec else {
                    unreachable!()
                };
                if !crate::compile::flow::staffing_nonempty(converted, ground.len()) {
                    out.push(Violation::EmptyQuotaFamily {
                        hospital: hospital.to_string(),
                    });
                }
            }
        }
    }
}

/// Fluent construction helper: acceptability edges are derived from doctor
/// preference lists, so only consistent markets can be described.
#[derive(Default)]
pub struct InstanceBuilder {
    doctors: Vec<(String, Vec<String>)>,
    hospitals: Vec<(String, Vec<String>, QuotaData)>,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn doctor<'a>(mut self, name: &str, prefs: impl IntoIterator<Item = &'a str>) -> Self {
        self.doctors.push((
            name.to_string(),
            prefs.into_iter().map(|s| s.to_string()).collect(),
        ));
        self
    }

    pub fn hospital<'a>(
        mut self,
        name: &str,
        prefs: impl IntoIterator<Item = &'a str>,
        quota: QuotaData,
    ) -> Self {
        self.hospitals.push((
            name.to_string(),
            prefs.into_iter().map(|s| s.to_string()).collect(),
            quota,
        ));
        self
    }

    pub fn data(self) -> InstanceData {
        InstanceData {
            doctors: self.doctors.iter().map(|(n, _)| n.clone()).collect(),
            hospitals: self.hospitals.iter().map(|(n, _, _)| n.clone()).collect(),
            edges: self
                .doctors
                .iter()
                .flat_map(|(d, prefs)| prefs.iter().map(move |h| (d.clone(), h.clone())))
                .collect(),
            doctor_prefs: self.doctors.into_iter().collect(),
            hospital_prefs: self
                .hospitals
                .iter()
                .map(|(n, prefs, _)| (n.clone(), prefs.clone()))
                .collect(),
            quotas: self
                .hospitals
                .into_iter()
                .map(|(n, _, q)| (n, q))
                .collect(),
        }
    }

    pub fn build(self) -> Result<MarketInstance, InvalidInstance> {
        MarketInstance::new(&self.data())
    }
}
