//! The JSON instance document: the on-disk form of a market.
//!
//! Field names and the per-hospital quota tagging are a fixed contract;
//! [`parse`] and [`emit`] round-trip byte-for-byte because every map is
//! order-stable (`BTreeMap`) and vectors keep input order.

use anyhow::{bail, Context, Result};
use efm_core::quota::{ClassData, QuotaData, SectionData};
use efm_core::{InstanceData, Matching, MarketInstance};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub doctors: Vec<String>,
    pub hospitals: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub doctor_prefs: BTreeMap<String, Vec<String>>,
    pub hospital_prefs: BTreeMap<String, Vec<String>>,
    pub quotas: BTreeMap<String, QuotaDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum QuotaDoc {
    Interval { lower: u32, upper: u32 },
    Explicit { constraints: Vec<ClassDoc> },
    Laminar { classes: Vec<ClassDoc> },
    Staffing { sections: Vec<SectionDoc> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDoc {
    pub members: Vec<String>,
    pub lo: u32,
    pub hi: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub accepts: Vec<String>,
    pub lo: u32,
    pub hi: u32,
}

impl From<QuotaDoc> for QuotaData {
    fn from(doc: QuotaDoc) -> QuotaData {
        match doc {
            QuotaDoc::Interval { lower, upper } => QuotaData::Interval { lower, upper },
            QuotaDoc::Explicit { constraints } => QuotaData::Explicit {
                constraints: constraints.into_iter().map(ClassData::from).collect(),
            },
            QuotaDoc::Laminar { classes } => QuotaData::Laminar {
                classes: classes.into_iter().map(ClassData::from).collect(),
            },
            QuotaDoc::Staffing { sections } => QuotaData::Staffing {
                sections: sections.into_iter().map(SectionData::from).collect(),
            },
        }
    }
}

impl From<QuotaData> for QuotaDoc {
    fn from(data: QuotaData) -> QuotaDoc {
        match data {
            QuotaData::Interval { lower, upper } => QuotaDoc::Interval { lower, upper },
            QuotaData::Explicit { constraints } => QuotaDoc::Explicit {
                constraints: constraints.into_iter().map(ClassDoc::from).collect(),
            },
            QuotaData::Laminar { classes } => QuotaDoc::Laminar {
                classes: classes.into_iter().map(ClassDoc::from).collect(),
            },
            QuotaData::Staffing { sections } => QuotaDoc::Staffing {
                sections: sections.into_iter().map(SectionDoc::from).collect(),
            },
        }
    }
}

impl From<ClassDoc> for ClassData {
    fn from(c: ClassDoc) -> ClassData {
        ClassData { members: c.members, lo: c.lo, hi: c.hi }
    }
}

impl From<ClassData> for ClassDoc {
    fn from(c: ClassData) -> ClassDoc {
        ClassDoc { members: c.members, lo: c.lo, hi: c.hi }
    }
}

impl From<SectionDoc> for SectionData {
    fn from(s: SectionDoc) -> SectionData {
        SectionData { id: s.id, accepts: s.accepts, lo: s.lo, hi: s.hi }
    }
}

impl From<SectionData> for SectionDoc {
    fn from(s: SectionData) -> SectionDoc {
        SectionDoc { id: s.id, accepts: s.accepts, lo: s.lo, hi: s.hi }
    }
}

impl From<InstanceDocument> for InstanceData {
    fn from(doc: InstanceDocument) -> InstanceData {
        InstanceData {
            doctors: doc.doctors,
            hospitals: doc.hospitals,
            edges: doc.edges,
            doctor_prefs: doc.doctor_prefs,
            hospital_prefs: doc.hospital_prefs,
            quotas: doc.quotas.into_iter().map(|(h, q)| (h, q.into())).collect(),
        }
    }
}

impl From<InstanceData> for InstanceDocument {
    fn from(data: InstanceData) -> InstanceDocument {
        InstanceDocument {
            doctors: data.doctors,
            hospitals: data.hospitals,
            edges: data.edges,
            doctor_prefs: data.doctor_prefs,
            hospital_prefs: data.hospital_prefs,
            quotas: data.quotas.into_iter().map(|(h, q)| (h, q.into())).collect(),
        }
    }
}

/// Parses a JSON document and validates it into a market.
pub fn parse(text: &str) -> Result<MarketInstance> {
    let doc: InstanceDocument =
        serde_json::from_str(text).context("instance file is not a valid JSON document")?;
    let data: InstanceData = doc.into();
    MarketInstance::new(&data).map_err(anyhow::Error::from)
}

/// Renders a market as a pretty-printed JSON document with a trailing newline.
pub fn emit(inst: &MarketInstance) -> String {
    let doc: InstanceDocument = inst.to_data().into();
    let mut out = serde_json::to_string_pretty(&doc).expect("documents always serialize");
    out.push('\n');
    out
}

/// The matched pairs by name, sorted by doctor id (instance order).
pub fn matching_pairs(inst: &MarketInstance, m: &Matching) -> Vec<(String, String)> {
    inst.doctors()
        .filter_map(|d| {
            m.hospital_of(inst, d).map(|h| {
                (inst.doctor_name(d).to_string(), inst.hospital_name(h).to_string())
            })
        })
        .collect()
}

/// Reads a matching file: either a JSON array of `[doctor, hospital]` pairs
/// or tab-separated `doctor<TAB>hospital` lines.
pub fn parse_matching(inst: &MarketInstance, text: &str) -> Result<Matching> {
    let pairs: Vec<(String, String, String)> = if text.trim_start().starts_with('[') {
        let raw: Vec<(String, String)> =
            serde_json::from_str(text).context("matching file is not a JSON array of pairs")?;
        raw.into_iter()
            .enumerate()
            .map(|(i, (d, h))| (d, h, format!("entry #{}", i + 1)))
            .collect()
    } else {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let Some((d, h)) = line.split_once('\t') else {
                bail!("line {}: expected doctor<TAB>hospital, got {line:?}", i + 1);
            };
            out.push((d.trim().to_string(), h.trim().to_string(), format!("line {}", i + 1)));
        }
        out
    };

    let mut edge_ids = Vec::with_capacity(pairs.len());
    for (doctor, hospital, at) in &pairs {
        let d = inst
            .doctor_id(doctor)
            .with_context(|| format!("{at}: unknown doctor {doctor:?}"))?;
        let h = inst
            .hospital_id(hospital)
            .with_context(|| format!("{at}: unknown hospital {hospital:?}"))?;
        let e = inst.edge_between(d, h).with_context(|| {
            format!("{at}: ({doctor:?}, {hospital:?}) is not an acceptability edge")
        })?;
        edge_ids.push(e);
    }
    Matching::from_edge_ids(inst, edge_ids).map_err(anyhow::Error::from)
}
