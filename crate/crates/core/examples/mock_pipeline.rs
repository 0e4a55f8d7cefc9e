//! Full offline run with the deterministic mock provider.
//!
//! `cargo run --example mock_pipeline -- [OUT_DIR]`

use causal_elicit::{run_pipeline, RunConfig};

fn main() -> causal_elicit::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("causal-elicit-runs"));
    let cfg = RunConfig {
        out: out.clone(),
        n: 40,
        ..RunConfig::default()
    };
    let bundle = run_pipeline("Japan US tariff outlook", cfg)?;

    println!("{} canonical events survived pruning", bundle.labels.len());
    println!("PC: {} edges, GES: {} edges, LiNGAM: {} edges",
        bundle.pc.edge_count(),
        bundle.ges.edge_count(),
        bundle.lingam.edges().len()
    );
    println!("artifacts under {}", out.join("japan-us-tariff-outlook").display());
    Ok(())
}
