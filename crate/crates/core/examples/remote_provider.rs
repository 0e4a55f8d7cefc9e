//! Talking to an OpenAI-compatible endpoint.
//!
//! Needs network access and a key in the environment variable named by
//! `api_key_env` (default `OPENAI_API_KEY`); the key itself is never stored.
//! Without the variable the example explains what is missing and exits.

use causal_elicit::llm::{ChatRequest, Gateway, ProviderConfig, ProviderKind};
use causal_elicit::Error;

fn main() {
    let cfg = ProviderConfig {
        kind: ProviderKind::Remote,
        base_url: std::env::var("CAUSAL_ELICIT_BASE_URL").unwrap_or_else(|_| "https://api.openai.com/v1".into()),
        ..ProviderConfig::default()
    };
    let gw = match Gateway::from_config(&cfg) {
        Ok(gw) => gw,
        Err(Error::Auth(msg)) => {
            println!("offline: {msg}");
            println!("set {} to try a live request", cfg.api_key_env);
            return;
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let req = ChatRequest::new("You are terse.", "Name one driver of the yen exchange rate.").temperature(0.0);
    match gw.chat(&req) {
        Ok(text) => println!("{text}"),
        Err(e) => eprintln!("request failed: {e}"),
    }
    match gw.embed_batch(&["tariffs rise".to_string(), "tariffs increase".to_string()]) {
        Ok(v) => println!("embedding dim {}, cosine {:.3}", v[0].dim(), v[0].cosine(&v[1])),
        Err(e) => eprintln!("embedding failed: {e}"),
    }
}
