//! GES with BIC and BDeu on a noisy-OR network.

use causal_elicit::discovery::{ges, ScoreKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> causal_elicit::Result<()> {
    let labels: Vec<String> = ["sanctions", "oil supply", "oil price", "inflation"].map(String::from).to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cols = vec![Vec::new(); 4];
    for _ in 0..2000 {
        let s = rng.random_bool(0.4);
        let cut = (s && rng.random_bool(0.8)) || rng.random_bool(0.1);
        let price = (cut && rng.random_bool(0.85)) || rng.random_bool(0.15);
        let infl = (price && rng.random_bool(0.7)) || rng.random_bool(0.1);
        for (c, v) in cols.iter_mut().zip([s, cut, price, infl]) {
            c.push(v as u8);
        }
    }
    for kind in [ScoreKind::BicMultinomial, ScoreKind::Bdeu { equivalent_sample_size: 1.0 }] {
        let r = ges(&cols, &labels, kind)?;
        println!("{kind:?}: score {:.2} after {} forward, {} backward moves", r.score, r.forward_moves, r.backward_moves);
        for (a, b) in r.cpdag.directed_edges() {
            println!("  {} -> {}", labels[a], labels[b]);
        }
        for (a, b) in r.cpdag.undirected_edges() {
            println!("  {} -- {}", labels[a], labels[b]);
        }
    }
    Ok(())
}
