//! Structural robustness across perturbed variants of one question.
//!
//! A family is a base input plus `T >= 1` variants (paraphrases or schema
//! reorderings). Each member contributes its majority structure; the
//! family measures compare those majorities.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::StructureKey;
use crate::metrics::{build_distribution, mean_defined, GenerationMode, GenerationSet, StructureDistribution};
use crate::schema::SchemaCatalog;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RobustnessError {
    #[error("member {0} of the family has no parsed generation")]
    UndefinedMajority(usize),
    #[error("a family needs at least one variant")]
    NoVariants,
    #[error("no data")]
    NoData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    Paraphrase,
    SchemaPresentation,
}

impl PerturbationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PerturbationKind::Paraphrase => "paraphrase",
            PerturbationKind::SchemaPresentation => "schema_presentation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantFamily {
    pub family_id: String,
    pub kind: PerturbationKind,
    pub base: GenerationSet,
    pub variants: Vec<GenerationSet>,
}

impl VariantFamily {
    /// Base first, then variants in order.
    pub fn members(&self) -> impl Iterator<Item = &GenerationSet> {
        std::iter::once(&self.base).chain(self.variants.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorityStructure {
    pub variant_index: usize,
    /// `None` when the member has no parsed generation.
    pub key: Option<StructureKey>,
    pub count: usize,
    /// More than one structure reached the maximal count.
    pub tie: bool,
}

/// Most frequent key; ties go to the bytewise-smallest key.
pub fn majority_structure(d: &StructureDistribution, variant_index: usize) -> MajorityStructure {
    // groups are already ordered by (count desc, key asc)
    match d.groups.first() {
        None => MajorityStructure {
            variant_index,
            key: None,
            count: 0,
            tie: false,
        },
        Some(top) => MajorityStructure {
            variant_index,
            key: Some(top.key.clone()),
            count: top.count,
            tie: d.groups.get(1).is_some_and(|g| g.count == top.count),
        },
    }
}

fn defined_keys(majorities: &[MajorityStructure]) -> Result<Vec<&StructureKey>, RobustnessError> {
    if majorities.len() < 2 {
        return Err(RobustnessError::NoVariants);
    }
    majorities
        .iter()
        .enumerate()
        .map(|(i, m)| m.key.as_ref().ok_or(RobustnessError::UndefinedMajority(i)))
        .collect()
}

/// Fraction of the `(T+1)T/2` member pairs whose majorities coincide.
/// `majorities[0]` is the base.
pub fn cross_variant_agreement(majorities: &[MajorityStructure]) -> Result<f64, RobustnessError> {
    let keys = defined_keys(majorities)?;
    let mut agree = 0u64;
    for i in 0..keys.len() {
        for j in i + 1..keys.len() {
            if keys[i] == keys[j] {
                agree += 1;
            }
        }
    }
    let n = keys.len() as u64;
    Ok(agree as f64 / (n * (n - 1) / 2) as f64)
}

/// Fraction of variants whose majority differs from the base's.
pub fn perturbation_sensitivity(majorities: &[MajorityStructure]) -> Result<f64, RobustnessError> {
    let keys = defined_keys(majorities)?;
    let base = keys[0];
    let differ = keys[1..].iter().filter(|k| **k != base).count();
    Ok(differ as f64 / (keys.len() - 1) as f64)
}

/// One family's output record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub family_id: String,
    pub kind: PerturbationKind,
    pub cons_para: Option<f64>,
    pub sensitivity: Option<f64>,
    pub sensitive: bool,
    pub excluded: bool,
    /// Distinct structures across all members' parsed generations.
    pub distinct: usize,
}

pub fn family_majorities(f: &VariantFamily, mode: GenerationMode) -> (Vec<MajorityStructure>, usize) {
    let mut all = BTreeSet::new();
    let majorities = f
        .members()
        .enumerate()
        .map(|(i, set)| {
            let keys = set.keys(mode);
            let d = build_distribution(&keys);
            all.extend(d.groups.iter().map(|g| g.key.key.clone()));
            majority_structure(&d, i)
        })
        .collect();
    (majorities, all.len())
}

pub fn evaluate_family(f: &VariantFamily, mode: GenerationMode) -> FamilyRecord {
    let (majorities, distinct) = family_majorities(f, mode);
    family_record(&f.family_id, f.kind, &majorities, distinct)
}

pub fn family_record(
    family_id: &str,
    kind: PerturbationKind,
    majorities: &[MajorityStructure],
    distinct: usize,
) -> FamilyRecord {
    match (cross_variant_agreement(majorities), perturbation_sensitivity(majorities)) {
        (Ok(c), Ok(s)) => FamilyRecord {
            family_id: family_id.to_string(),
            kind,
            cons_para: Some(c),
            sensitivity: Some(s),
            sensitive: s > 0.0,
            excluded: false,
            distinct,
        },
        _ => FamilyRecord {
            family_id: family_id.to_string(),
            kind,
            cons_para: None,
            sensitivity: None,
            sensitive: false,
            excluded: true,
            distinct,
        },
    }
}

/// Fraction of non-excluded families with nonzero sensitivity.
pub fn sensitive_fraction(records: &[FamilyRecord]) -> Result<f64, RobustnessError> {
    let included: Vec<_> = records.iter().filter(|r| !r.excluded).collect();
    if included.is_empty() {
        return Err(RobustnessError::NoData);
    }
    let sensitive = included.iter().filter(|r| r.sensitive).count();
    Ok(sensitive as f64 / included.len() as f64)
}

/// Dataset-level robustness for one model and perturbation kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessSummary {
    pub model: String,
    pub kind: PerturbationKind,
    pub families: usize,
    pub excluded: usize,
    pub ast_sim: Option<f64>,
    pub distinct: Option<f64>,
    pub sensitivity: Option<f64>,
    pub sensitive_frac: Option<f64>,
}

pub fn summarize_families(model: &str, kind: PerturbationKind, records: &[FamilyRecord]) -> RobustnessSummary {
    let included = || records.iter().filter(|r| !r.excluded);
    RobustnessSummary {
        model: model.to_string(),
        kind,
        families: records.len(),
        excluded: records.iter().filter(|r| r.excluded).count(),
        ast_sim: mean_defined(included().map(|r| r.cons_para)),
        distinct: mean_defined(included().map(|r| Some(r.distinct as f64))),
        sensitivity: mean_defined(included().map(|r| r.sensitivity)),
        sensitive_frac: sensitive_fraction(records).ok(),
    }
}

/// Schema presentation variant: table order and each table's column order
/// shuffled with a seeded generator. Foreign keys are kept as they are.
pub fn shuffle_schema(catalog: &SchemaCatalog, seed: u64) -> SchemaCatalog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = catalog.clone();
    out.tables.shuffle(&mut rng);
    for t in &mut out.tables {
        t.columns.shuffle(&mut rng);
    }
    out
}
