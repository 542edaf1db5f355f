use proptest::collection::vec;
use proptest::prelude::*;
use sqlshape_core::canon::{KeyOutcome, StructureKey};
use sqlshape_core::metrics::*;
use sqlshape_core::robustness::*;
use sqlshape_core::sql::{FailureReason, ParseFailure};

/// `None` stands for a parse failure.
fn outcomes(symbols: &[Option<u8>]) -> Vec<KeyOutcome> {
    symbols
        .iter()
        .map(|s| match s {
            Some(x) => Ok(StructureKey::from_key(format!("select s{x} from t"))),
            None => Err(ParseFailure::new(FailureReason::Syntax, "x", None)),
        })
        .collect()
}

fn symbols(alphabet: u8) -> impl Strategy<Value = Vec<Option<u8>>> {
    vec(proptest::option::weighted(0.8, 0..alphabet), 1..=12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn distribution_bookkeeping(s in symbols(6)) {
        let d = build_distribution(&outcomes(&s));
        let m = s.iter().flatten().count();
        prop_assert_eq!(d.total, s.len());
        prop_assert_eq!(d.valid_count, m);
        prop_assert_eq!(d.failure_count, s.len() - m);
        prop_assert_eq!(d.groups.iter().map(|g| g.count).sum::<usize>(), m);
        if m > 0 {
            let total: f64 = d.groups.iter().map(|g| g.frequency).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
        for w in d.groups.windows(2) {
            prop_assert!(w[0].count > w[1].count || (w[0].count == w[1].count && w[0].key.key < w[1].key.key));
        }
    }

    #[test]
    fn bounds_and_equivalences(s in symbols(6)) {
        let d = build_distribution(&outcomes(&s));
        let k = diversity(&d);
        match (consistency(&d), entropy(&d)) {
            (Some(c), Some(h)) => {
                prop_assert!(c >= 1.0 / k as f64 - 1e-15 && c <= 1.0);
                prop_assert!(h >= 0.0 && h <= (k as f64).log2() + 1e-12);
                prop_assert_eq!(c == 1.0, k == 1);
                prop_assert_eq!(h == 0.0, k == 1);
            }
            (None, None) => prop_assert_eq!(d.valid_count, 0),
            other => prop_assert!(false, "defined-ness differs: {:?}", other),
        }
    }

    #[test]
    fn entropy_ignores_order(mut s in symbols(6), seed in any::<u64>()) {
        let before = entropy(&build_distribution(&outcomes(&s)));
        let n = s.len();
        for i in 0..n {
            s.swap(i, (seed as usize).wrapping_add(i * 7) % n);
        }
        prop_assert_eq!(entropy(&build_distribution(&outcomes(&s))), before);
    }

    #[test]
    fn gold_alignment_is_gold_frequency(s in symbols(4), g in 0u8..5) {
        let d = build_distribution(&outcomes(&s));
        let gold_key = StructureKey::from_key(format!("select s{g} from t"));
        let gold = GoldReference { gold_key: Some(gold_key.clone()) };
        let got = gold_alignment(&d, &gold, "q").unwrap();
        if d.valid_count == 0 {
            prop_assert_eq!(got, None);
        } else {
            prop_assert_eq!(got, Some(d.frequency_of(&gold_key)));
        }
    }

    #[test]
    fn pairwise_similarity_bounds(s in symbols(5)) {
        let d = build_distribution(&outcomes(&s));
        match pairwise_similarity_of(&d) {
            None => prop_assert!(d.valid_count < 2),
            Some(p) => {
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert_eq!(p == 1.0, diversity(&d) == 1);
            }
        }
    }
}

fn gen_set(id: String, symbols: &[Option<u8>]) -> GenerationSet {
    let candidates = symbols
        .iter()
        .map(|s| match s {
            Some(x) => format!("SELECT c{x} FROM t"),
            None => "SELECT FROM".to_string(),
        })
        .collect();
    GenerationSet {
        question_id: id,
        question: String::new(),
        db_id: "d".into(),
        gold_sql: "SELECT c0 FROM t".into(),
        candidates,
        provenance: Provenance {
            model: "m".into(),
            temperature: 1.0,
            k: 0,
        },
    }
}

fn family(members: &[Vec<Option<u8>>]) -> VariantFamily {
    let sets: Vec<_> = members.iter().enumerate().map(|(i, m)| gen_set(i.to_string(), m)).collect();
    VariantFamily {
        family_id: "f".into(),
        kind: PerturbationKind::Paraphrase,
        base: sets[0].clone(),
        variants: sets[1..].to_vec(),
    }
}

fn members() -> impl Strategy<Value = Vec<Vec<Option<u8>>>> {
    vec(vec(proptest::option::weighted(0.95, 0u8..4), 1..=8), 2..=6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn zero_sensitivity_means_full_agreement(m in members()) {
        let r = evaluate_family(&family(&m), GenerationMode::Direct);
        if r.sensitivity == Some(0.0) {
            prop_assert_eq!(r.cons_para, Some(1.0));
        }
        if let Some(c) = r.cons_para {
            prop_assert!((0.0..=1.0).contains(&c));
        }
        prop_assert_eq!(r.excluded, r.cons_para.is_none());
    }

    #[test]
    fn variant_order_does_not_matter(m in members(), rot in 0usize..5) {
        let r = evaluate_family(&family(&m), GenerationMode::Direct);
        let mut shuffled = m.clone();
        let n = shuffled.len() - 1;
        shuffled[1..].rotate_left(rot % n);
        shuffled[1..].reverse();
        let s = evaluate_family(&family(&shuffled), GenerationMode::Direct);
        prop_assert_eq!(r.cons_para, s.cons_para);
        prop_assert_eq!(r.sensitivity, s.sensitivity);
    }

    #[test]
    fn majority_is_argmax(s in symbols(4)) {
        let d = build_distribution(&outcomes(&s));
        let maj = majority_structure(&d, 0);
        match &maj.key {
            None => prop_assert_eq!(d.valid_count, 0),
            Some(k) => {
                let best = d.groups.iter().map(|g| g.count).max().unwrap();
                prop_assert_eq!(maj.count, best);
                prop_assert_eq!(d.groups.iter().find(|g| &g.key == k).unwrap().count, best);
                let tied: Vec<_> = d.groups.iter().filter(|g| g.count == best).collect();
                prop_assert_eq!(maj.tie, tied.len() > 1);
                prop_assert!(tied.iter().all(|g| g.key.key.as_bytes() >= k.key.as_bytes()));
            }
        }
    }
}
