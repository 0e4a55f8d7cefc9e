//! DirectLiNGAM and ICA-LiNGAM on a linear model with uniform noise.

use causal_elicit::discovery::{direct_lingam, ica_lingam, IcaOptions, LingamOptions};
use causal_elicit::ToDot;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> causal_elicit::Result<()> {
    let labels: Vec<String> = ["policy rate", "credit growth", "house prices"].map(String::from).to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut noise = || rng.random_range(-1.0..1.0);
    let n = 4000;
    let rate: Vec<f64> = (0..n).map(|_| noise()).collect();
    let credit: Vec<f64> = rate.iter().map(|r| -0.8 * r + noise()).collect();
    let houses: Vec<f64> = credit.iter().map(|c| 0.6 * c + noise()).collect();
    // columns deliberately out of causal order
    let data = vec![houses, rate, credit];
    let labels = vec![labels[2].clone(), labels[0].clone(), labels[1].clone()];

    let direct = direct_lingam(&data, &labels, &LingamOptions::default())?;
    println!("DirectLiNGAM order: {:?}", direct.order.iter().map(|&i| &labels[i]).collect::<Vec<_>>());
    print!("{}", direct.to_dot());

    let ica = ica_lingam(&data, &labels, &IcaOptions::default())?;
    println!("ICA-LiNGAM converged: {} ({:?} iterations)", ica.converged, ica.iterations);
    print!("{}", ica.dag.to_dot());
    Ok(())
}
