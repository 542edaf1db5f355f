//! Per-question structural measures over repeated generations.
//!
//! Every measure is computed from a [`StructureDistribution`]: the counts of
//! distinct structure keys among the generations that parsed. Measures are
//! undefined (`None`) when nothing parsed.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::{KeyOutcome, StructureKey};
use crate::ir;
use crate::sql::Dialect;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("gold SQL for question {0} does not parse")]
    GoldUnparseable(String),
    #[error("no data")]
    NoData,
}

/// How raw generations are turned into SQL before keying.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    /// Raw output is SQL text, possibly fenced.
    #[default]
    Direct,
    /// Raw output is a JSON query IR, compiled to SQL first.
    Compile,
}

impl GenerationMode {
    /// SQL for one raw output, or the reason it could not be produced.
    pub fn to_sql(self, raw: &str) -> Result<String, String> {
        match self {
            GenerationMode::Direct => Ok(crate::canon::extract_sql(raw)),
            GenerationMode::Compile => ir::validate_ir(raw)
                .and_then(|q| ir::compile_ir(&q))
                .map_err(|e| e.to_string()),
        }
    }

    /// Structure key of one raw output. IR failures count as parse failures.
    pub fn key(self, raw: &str) -> KeyOutcome {
        match self.to_sql(raw) {
            Ok(sql) => crate::canon::canonical_key(&sql, Dialect::Sqlite),
            Err(msg) => Err(crate::sql::ParseFailure::new(crate::sql::FailureReason::Syntax, msg, None)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub temperature: f64,
    pub k: usize,
}

/// One question's generations, in generation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSet {
    pub question_id: String,
    pub question: String,
    pub db_id: String,
    pub gold_sql: String,
    pub candidates: Vec<String>,
    pub provenance: Provenance,
}

impl GenerationSet {
    pub fn keys(&self, mode: GenerationMode) -> Vec<KeyOutcome> {
        self.candidates.iter().map(|c| mode.key(c)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureGroup {
    pub key: StructureKey,
    pub count: usize,
    pub frequency: f64,
}

/// Groups sorted by count descending, then key ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureDistribution {
    pub total: usize,
    pub valid_count: usize,
    pub failure_count: usize,
    pub groups: Vec<StructureGroup>,
}

pub fn build_distribution<'a, I>(outcomes: I) -> StructureDistribution
where
    I: IntoIterator<Item = &'a KeyOutcome>,
{
    let mut counts: HashMap<&'a StructureKey, usize> = HashMap::new();
    let mut total = 0;
    let mut failures = 0;
    for o in outcomes {
        total += 1;
        match o {
            Ok(k) => *counts.entry(k).or_default() += 1,
            Err(_) => failures += 1,
        }
    }
    let valid = total - failures;
    let mut groups: Vec<StructureGroup> = counts
        .into_iter()
        .map(|(key, count)| StructureGroup {
            key: key.clone(),
            count,
            frequency: count as f64 / valid as f64,
        })
        .collect();
    groups.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.key.key.as_bytes().cmp(b.key.key.as_bytes())));
    StructureDistribution {
        total,
        valid_count: valid,
        failure_count: failures,
        groups,
    }
}

impl StructureDistribution {
    pub fn frequency_of(&self, key: &StructureKey) -> f64 {
        self.groups.iter().find(|g| &g.key == key).map_or(0.0, |g| g.frequency)
    }
}

/// Majority-structure ratio: the largest group frequency.
pub fn consistency(d: &StructureDistribution) -> Option<f64> {
    let top = d.groups.first()?;
    Some(top.count as f64 / d.valid_count as f64)
}

/// Number of distinct structures.
pub fn diversity(d: &StructureDistribution) -> usize {
    d.groups.len()
}

/// Base-2 Shannon entropy of the group frequencies.
pub fn entropy(d: &StructureDistribution) -> Option<f64> {
    if d.valid_count == 0 {
        return None;
    }
    if d.groups.len() == 1 {
        return Some(0.0);
    }
    let h = d
        .groups
        .iter()
        .map(|g| {
            let p = g.count as f64 / d.valid_count as f64;
            -p * p.log2()
        })
        .sum();
    Some(h)
}

/// Canonical key of the gold query, if it parses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldReference {
    pub gold_key: Option<StructureKey>,
}

impl GoldReference {
    pub fn from_sql(sql: &str) -> Self {
        GoldReference {
            gold_key: crate::canon::canonical_key(sql, Dialect::Sqlite).ok(),
        }
    }

    pub fn parse_ok(&self) -> bool {
        self.gold_key.is_some()
    }
}

/// Fraction of parsed generations whose key equals the gold key.
pub fn gold_alignment(
    d: &StructureDistribution,
    g: &GoldReference,
    question_id: &str,
) -> Result<Option<f64>, MetricError> {
    let gold = g
        .gold_key
        .as_ref()
        .ok_or_else(|| MetricError::GoldUnparseable(question_id.to_string()))?;
    if d.valid_count == 0 {
        return Ok(None);
    }
    let n = d.groups.iter().find(|grp| &grp.key == gold).map_or(0, |grp| grp.count);
    Ok(Some(n as f64 / d.valid_count as f64))
}

/// Fraction of unordered pairs with equal keys.
pub fn pairwise_similarity(keys: &[StructureKey]) -> Option<f64> {
    let n = keys.len();
    if n < 2 {
        return None;
    }
    let mut counts: HashMap<&StructureKey, u64> = HashMap::new();
    for k in keys {
        *counts.entry(k).or_default() += 1;
    }
    Some(equal_pair_fraction(counts.into_values(), n as u64))
}

/// [`pairwise_similarity`] over the parsed members of a distribution.
pub fn pairwise_similarity_of(d: &StructureDistribution) -> Option<f64> {
    if d.valid_count < 2 {
        return None;
    }
    Some(equal_pair_fraction(d.groups.iter().map(|g| g.count as u64), d.valid_count as u64))
}

fn equal_pair_fraction(counts: impl Iterator<Item = u64>, n: u64) -> f64 {
    let equal: u64 = counts.map(|c| c * (c - 1) / 2).sum();
    equal as f64 / (n * (n - 1) / 2) as f64
}

/// One line of per-question output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionMetrics {
    pub question_id: String,
    pub db_id: String,
    pub n: usize,
    pub m: usize,
    pub k_distinct: usize,
    pub majority: Option<f64>,
    pub entropy_bits: Option<f64>,
    pub gold_fraction: Option<f64>,
    pub pairwise_sim: Option<f64>,
    pub failure_count: usize,
    pub gold_parsed: bool,
}

pub fn question_metrics(set: &GenerationSet, mode: GenerationMode) -> QuestionMetrics {
    let keys = set.keys(mode);
    let d = build_distribution(&keys);
    let gold = GoldReference::from_sql(&set.gold_sql);
    QuestionMetrics {
        question_id: set.question_id.clone(),
        db_id: set.db_id.clone(),
        n: d.total,
        m: d.valid_count,
        k_distinct: diversity(&d),
        majority: consistency(&d),
        entropy_bits: entropy(&d),
        gold_fraction: gold_alignment(&d, &gold, &set.question_id).unwrap_or(None),
        pairwise_sim: pairwise_similarity_of(&d),
        failure_count: d.failure_count,
        gold_parsed: gold.parse_ok(),
    }
}

/// Unweighted mean over defined values.
pub fn mean_defined<I: IntoIterator<Item = Option<f64>>>(values: I) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Dataset-level structural statistics for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSummary {
    pub model: String,
    pub questions: usize,
    /// Questions with no parsed generation; excluded from the means.
    pub excluded: usize,
    /// Questions whose gold does not parse; excluded from the gold mean.
    pub gold_unparsed: usize,
    pub distinct: Option<f64>,
    pub majority: Option<f64>,
    pub entropy: Option<f64>,
    pub gold: Option<f64>,
    pub parse_failure_rate: Option<f64>,
}

pub fn summarize(model: &str, rows: &[QuestionMetrics]) -> StructureSummary {
    let evaluated = || rows.iter().filter(|r| r.m > 0);
    let generations: usize = rows.iter().map(|r| r.n).sum();
    let failures: usize = rows.iter().map(|r| r.failure_count).sum();
    StructureSummary {
        model: model.to_string(),
        questions: rows.len(),
        excluded: rows.iter().filter(|r| r.m == 0).count(),
        gold_unparsed: rows.iter().filter(|r| !r.gold_parsed).count(),
        distinct: mean_defined(evaluated().map(|r| Some(r.k_distinct as f64))),
        majority: mean_defined(evaluated().map(|r| r.majority)),
        entropy: mean_defined(evaluated().map(|r| r.entropy_bits)),
        gold: mean_defined(evaluated().map(|r| r.gold_fraction)),
        parse_failure_rate: (generations > 0).then(|| failures as f64 / generations as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::{FailureReason, ParseFailure};

    fn k(s: &str) -> KeyOutcome {
        Ok(StructureKey::from_key(s.to_string()))
    }

    fn bot() -> KeyOutcome {
        Err(ParseFailure::new(FailureReason::Syntax, "x", None))
    }

    fn counts(cs: &[usize]) -> StructureDistribution {
        let outcomes: Vec<KeyOutcome> = cs
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(k(&format!("k{i}")), c))
            .collect();
        build_distribution(&outcomes)
    }

    #[test]
    fn distribution_examples() {
        let d = build_distribution(&[k("k1"), k("k1"), k("k1")]);
        assert_eq!((d.valid_count, d.groups.len(), d.groups[0].count, d.groups[0].frequency), (3, 1, 3, 1.0));

        let d = build_distribution(&[k("k1"), k("k1"), k("k2"), bot()]);
        assert_eq!(d.valid_count, 3);
        assert_eq!(d.failure_count, 1);
        assert_eq!(d.groups[0].key.key, "k1");
        assert_eq!(d.groups[0].frequency, 2.0 / 3.0);
        assert_eq!(d.groups[1].frequency, 1.0 / 3.0);

        let d = build_distribution(&[bot(), bot()]);
        assert_eq!((d.valid_count, d.groups.len(), d.total), (0, 0, 2));
    }

    #[test]
    fn groups_ordered_by_count_then_key() {
        let d = build_distribution(&[k("b"), k("a"), k("c"), k("c")]);
        let order: Vec<&str> = d.groups.iter().map(|g| g.key.key.as_str()).collect();
        assert_eq!(order, ["c", "a", "b"]);
    }

    #[test]
    fn consistency_examples() {
        assert_eq!(consistency(&counts(&[6, 3, 1])), Some(0.6));
        assert_eq!(consistency(&counts(&[4])), Some(1.0));
        assert_eq!(consistency(&counts(&[])), None);
    }

    #[test]
    fn diversity_examples() {
        assert_eq!(diversity(&counts(&[6, 3, 1])), 3);
        assert_eq!(diversity(&counts(&[4])), 1);
        assert_eq!(diversity(&counts(&[])), 0);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&counts(&[5, 5])), Some(1.0));
        // -(0.6 log2 0.6 + 0.3 log2 0.3 + 0.1 log2 0.1), evaluated with mpmath at 50 digits
        let h = entropy(&counts(&[6, 3, 1])).unwrap();
        assert!((h - 1.295_461_844_238_322).abs() < 1e-12, "{h}");
        assert_eq!(entropy(&counts(&[10])), Some(0.0));
        assert_eq!(entropy(&counts(&[])), None);
    }

    #[test]
    fn gold_examples() {
        let d = counts(&[7, 3]);
        let g = GoldReference {
            gold_key: Some(StructureKey::from_key("k0".into())),
        };
        assert_eq!(gold_alignment(&d, &g, "q").unwrap(), Some(0.7));
        let absent = GoldReference {
            gold_key: Some(StructureKey::from_key("zz".into())),
        };
        assert_eq!(gold_alignment(&d, &absent, "q").unwrap(), Some(0.0));
        assert_eq!(gold_alignment(&counts(&[10]), &g, "q").unwrap(), Some(1.0));
        assert_eq!(
            gold_alignment(&d, &GoldReference { gold_key: None }, "q"),
            Err(MetricError::GoldUnparseable("q".into()))
        );
    }

    #[test]
    fn pairwise_examples() {
        let k1 = StructureKey::from_key("k1".into());
        let k2 = StructureKey::from_key("k2".into());
        assert_eq!(pairwise_similarity(&[k1.clone(), k1.clone(), k1.clone()]), Some(1.0));
        assert_eq!(pairwise_similarity(&[k1.clone(), k2.clone()]), Some(0.0));
        assert_eq!(pairwise_similarity(&[k1.clone(), k1.clone(), k2]), Some(1.0 / 3.0));
        assert_eq!(pairwise_similarity(&[k1]), None);
    }

    #[test]
    fn question_metrics_direct_mode() {
        let set = GenerationSet {
            question_id: "0".into(),
            question: "How many singers?".into(),
            db_id: "concert_singer".into(),
            gold_sql: "SELECT count(*) FROM singer".into(),
            candidates: vec![
                "SELECT COUNT(*) FROM singer;".into(),
                "```sql\nselect count(*)\nfrom singer\n```".into(),
                "SELECT count(Singer_ID) FROM singer".into(),
                "not sql".into(),
            ],
            provenance: Provenance {
                model: "m".into(),
                temperature: 1.0,
                k: 4,
            },
        };
        let m = question_metrics(&set, GenerationMode::Direct);
        assert_eq!((m.n, m.m, m.k_distinct, m.failure_count), (4, 3, 2, 1));
        assert_eq!(m.majority, Some(2.0 / 3.0));
        assert_eq!(m.gold_fraction, Some(2.0 / 3.0));
        assert_eq!(m.pairwise_sim, Some(1.0 / 3.0));
        assert!(m.gold_parsed);
    }

    #[test]
    fn summary_excludes_unparsed_questions() {
        let row = |m: usize, maj: Option<f64>| QuestionMetrics {
            question_id: "q".into(),
            db_id: "d".into(),
            n: 10,
            m,
            k_distinct: if m > 0 { 1 } else { 0 },
            majority: maj,
            entropy_bits: maj.map(|_| 0.0),
            gold_fraction: maj,
            pairwise_sim: None,
            failure_count: 10 - m,
            gold_parsed: true,
        };
        let s = summarize("m", &[row(10, Some(1.0)), row(0, None), row(5, Some(0.5))]);
        assert_eq!(s.excluded, 1);
        assert_eq!(s.majority, Some(0.75));
        assert_eq!(s.distinct, Some(1.0));
        assert_eq!(s.parse_failure_rate, Some(15.0 / 30.0));
    }
}
