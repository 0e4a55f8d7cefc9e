//! Raw matrix, OR-merge onto canonical events, pruning and CSV output.

use causal_elicit::canonicalize::{vocabulary_of, CanonicalEvent, CanonicalRegistry};
use causal_elicit::extraction::EventRecord;
use causal_elicit::incidence::{aggregate, build_raw_matrix, drop_noninformative};

fn main() -> causal_elicit::Result<()> {
    let records = vec![
        EventRecord { doc_id: 0, mentions: vec!["tariffs rise".into(), "yen falls".into(), "talks open".into()] },
        EventRecord { doc_id: 1, mentions: vec!["tariffs climb".into(), "talks open".into()] },
        EventRecord { doc_id: 2, mentions: vec!["yen weakens".into(), "talks open".into()] },
    ];
    let vocab = vocabulary_of(&records);
    let x = build_raw_matrix(&records, &vocab)?;
    print!("raw X\n{}", x.to_csv_string()?);

    let event = |id: usize, name: &str, members: &[&str]| CanonicalEvent {
        canon_id: id,
        name: name.into(),
        members: members.iter().map(|s| s.to_string()).collect(),
        occurrences: Vec::new(),
    };
    let reg = CanonicalRegistry::from_events(vec![
        event(0, "Tariffs increase", &["tariffs rise", "tariffs climb"]),
        event(1, "Yen weakens", &["yen falls", "yen weakens"]),
        event(2, "Trade talks open", &["talks open"]),
    ])?;
    let z = aggregate(&x, &reg)?;
    print!("\ncanonical Z\n{}", z.to_csv_string()?);

    let (pruned, dropped) = drop_noninformative(&z)?;
    print!("\npruned\n{}", pruned.to_csv_string()?);
    for d in dropped {
        println!("dropped {} ({})", d.label, d.reason);
    }
    Ok(())
}
