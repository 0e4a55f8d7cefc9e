use causal_elicit::canonicalize::{vocabulary_of, CanonicalEvent, CanonicalRegistry};
use causal_elicit::extraction::EventRecord;
use causal_elicit::incidence::{aggregate, build_raw_matrix, drop_noninformative, IncidenceMatrix};
use proptest::prelude::*;

const POOL: [&str; 8] = [
    "tariffs rise",
    "yen, weaker",
    "\"auto\" exports fall",
    "gold rallies",
    "BoJ holds rates",
    "equities slide",
    "talks stall",
    "oil spikes",
];

fn records() -> impl Strategy<Value = Vec<EventRecord>> {
    prop::collection::vec(prop::collection::vec(0usize..POOL.len(), 0..6), 1..12)
        .prop_filter("needs a mention", |docs| docs.iter().any(|d| !d.is_empty()))
        .prop_map(|docs| {
            docs.into_iter()
                .enumerate()
                .map(|(i, idx)| {
                    let mut mentions: Vec<String> = Vec::new();
                    for k in idx {
                        if !mentions.iter().any(|m| m == POOL[k]) {
                            mentions.push(POOL[k].to_string());
                        }
                    }
                    EventRecord {
                        doc_id: 10 + 2 * i,
                        mentions,
                    }
                })
                .collect()
        })
}

/// Registry that sends raw string `vocab[j]` to group `groups[j] % g`,
/// with groups relabelled densely in order of first use.
fn registry(vocab: &[String], groups: &[usize], g: usize) -> CanonicalRegistry {
    let mut order: Vec<usize> = Vec::new();
    let mut events: Vec<CanonicalEvent> = Vec::new();
    for (j, raw) in vocab.iter().enumerate() {
        let key = groups[j % groups.len()] % g;
        let id = match order.iter().position(|&o| o == key) {
            Some(id) => id,
            None => {
                order.push(key);
                events.push(CanonicalEvent {
                    canon_id: events.len(),
                    name: format!("group {key}"),
                    members: Vec::new(),
                    occurrences: Vec::new(),
                });
                events.len() - 1
            }
        };
        events[id].members.push(raw.clone());
    }
    CanonicalRegistry::from_events(events).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn or_merge_never_adds_support(
        recs in records(),
        groups in prop::collection::vec(0usize..8, 8),
        g in 1usize..8,
    ) {
        let vocab = vocabulary_of(&recs);
        let x = build_raw_matrix(&recs, &vocab).unwrap();
        let z = aggregate(&x, &registry(&vocab.items, &groups, g)).unwrap();
        prop_assert!(z.n_cols() <= x.n_cols());
        prop_assert_eq!(z.n_rows(), x.n_rows());
        for i in 0..x.n_rows() {
            prop_assert!(z.row_sum(i) <= x.row_sum(i));
            // a document has a merged event iff it has some raw variant
            prop_assert_eq!(z.row_sum(i) == 0, x.row_sum(i) == 0);
        }
    }

    #[test]
    fn mention_order_within_a_document_is_irrelevant(
        recs in records(),
        groups in prop::collection::vec(0usize..8, 8),
        g in 1usize..8,
        rot in 0usize..6,
    ) {
        let vocab = vocabulary_of(&recs);
        let reg = registry(&vocab.items, &groups, g);
        let z = aggregate(&build_raw_matrix(&recs, &vocab).unwrap(), &reg).unwrap();
        let shuffled: Vec<EventRecord> = recs
            .iter()
            .map(|r| {
                let mut m = r.mentions.clone();
                if !m.is_empty() {
                    let k = rot % m.len();
                    m.rotate_left(k);
                    m.reverse();
                }
                EventRecord { doc_id: r.doc_id, mentions: m }
            })
            .collect();
        let vocab2 = vocabulary_of(&shuffled);
        let z2 = aggregate(&build_raw_matrix(&shuffled, &vocab2).unwrap(), &reg).unwrap();
        prop_assert_eq!(z2, z);
    }

    #[test]
    fn singleton_groups_only_relabel(recs in records(), perm in Just((0..POOL.len()).collect::<Vec<usize>>()).prop_shuffle()) {
        let vocab = vocabulary_of(&recs);
        let x = build_raw_matrix(&recs, &vocab).unwrap();
        // events in a shuffled order, one raw string each
        let order: Vec<usize> = perm.into_iter().filter(|&p| p < vocab.len()).collect();
        let events = order
            .iter()
            .enumerate()
            .map(|(c, &j)| CanonicalEvent {
                canon_id: c,
                name: format!("event {j}"),
                members: vec![vocab.items[j].clone()],
                occurrences: Vec::new(),
            })
            .collect();
        let z = aggregate(&x, &CanonicalRegistry::from_events(events).unwrap()).unwrap();
        for (c, &j) in order.iter().enumerate() {
            prop_assert_eq!(z.column(c), x.column(j));
        }
    }

    #[test]
    fn pruning_is_idempotent(rows in prop::collection::vec(prop::collection::vec(0u8..=1, 5), 1..20)) {
        let labels: Vec<String> = (0..5).map(|j| format!("e{j}")).collect();
        let ids: Vec<usize> = (0..rows.len()).collect();
        let z = IncidenceMatrix::new(rows, labels, ids).unwrap();
        if let Ok((once, dropped)) = drop_noninformative(&z) {
            prop_assert_eq!(once.n_cols() + dropped.len(), z.n_cols());
            let (twice, none) = drop_noninformative(&once).unwrap();
            prop_assert_eq!(&twice, &once);
            prop_assert!(none.is_empty());
        }
    }

    #[test]
    fn csv_round_trips(recs in records()) {
        let vocab = vocabulary_of(&recs);
        let x = build_raw_matrix(&recs, &vocab).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("matrix.csv");
        x.write_csv(&path).unwrap();
        prop_assert_eq!(IncidenceMatrix::read_csv(&path).unwrap(), x.clone());
        prop_assert_eq!(std::fs::read_to_string(&path).unwrap(), x.to_csv_string().unwrap());
    }
}
