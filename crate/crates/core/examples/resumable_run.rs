//! Stage gating: a second run does nothing, `from` forces later stages,
//! and changing a discovery setting reruns discovery only.

use causal_elicit::{Pipeline, RunConfig, RunOptions, Stage};

fn show(label: &str, p: &mut Pipeline, opts: &RunOptions) -> causal_elicit::Result<()> {
    let o = p.run(opts)?;
    println!("{label:<22} ran {:?}, {} provider calls", o.executed, o.provider_calls);
    Ok(())
}

fn main() -> causal_elicit::Result<()> {
    let tmp = std::env::temp_dir().join(format!("causal-elicit-resume-{}", std::process::id()));
    let cfg = RunConfig {
        out: tmp.clone(),
        n: 15,
        ..RunConfig::default()
    };
    let topic = "Semiconductor export controls";

    show("first run", &mut Pipeline::new(topic, cfg.clone())?, &RunOptions::default())?;
    show("second run", &mut Pipeline::new(topic, cfg.clone())?, &RunOptions::default())?;
    let from = RunOptions {
        from: Some(Stage::Matrix),
        ..RunOptions::default()
    };
    show("from matrix", &mut Pipeline::new(topic, cfg.clone())?, &from)?;
    let stricter = RunConfig { alpha: 0.01, ..cfg };
    show("alpha = 0.01", &mut Pipeline::new(topic, stricter)?, &RunOptions::default())?;

    std::fs::remove_dir_all(&tmp).ok();
    Ok(())
}
