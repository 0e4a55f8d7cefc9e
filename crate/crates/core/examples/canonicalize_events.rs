//! Embedding-first clustering and the incremental registry on a toy corpus.

use causal_elicit::canonicalize::{
    canonicalize_embedding_first, canonicalize_incremental, EmbeddingFirstOptions, IncrementalOptions,
};
use causal_elicit::extraction::EventRecord;
use causal_elicit::llm::{Gateway, ProviderConfig};

fn main() -> causal_elicit::Result<()> {
    let docs: [&[&str]; 4] = [
        &["U.S. imposes tariffs on Japanese cars", "The yen weakens against the dollar"],
        &["U.S. imposes tariffs on Japanese autos", "Gold prices rally"],
        &["Yen weakens sharply against the dollar", "Japanese auto exports decline"],
        &["Gold prices rally to record", "Japanese auto exports fall"],
    ];
    let records: Vec<EventRecord> = docs
        .iter()
        .enumerate()
        .map(|(doc_id, m)| EventRecord {
            doc_id,
            mentions: m.iter().map(|s| s.to_string()).collect(),
        })
        .collect();
    let gw = Gateway::from_config(&ProviderConfig::mock(42))?;

    let opts = EmbeddingFirstOptions {
        k_max: 4,
        ..EmbeddingFirstOptions::default()
    };
    let batch = canonicalize_embedding_first(&gw, &records, &opts)?;
    println!("embedding-first: {} events", batch.registry.len());
    for e in batch.registry.events() {
        println!("  [{}] {} <- {:?}", e.canon_id, e.name, e.members);
    }

    let incremental = canonicalize_incremental(&gw, &records, &IncrementalOptions::default())?;
    println!("incremental: {} events", incremental.registry.len());
    for r in &incremental.records {
        println!("  doc {}: {:?}", r.doc_id, r.mentions);
    }
    println!("{} provider calls", gw.upstream_calls());
    Ok(())
}
