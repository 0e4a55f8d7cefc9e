//! Turning free-form model output into clean event lists.

use causal_elicit::extraction::{clean_mention, normalize_llm_list};

fn main() {
    let samples = [
        "```json\n[\"Tariffs rise on autos\", \"Yen weakens\"]\n```",
        "['BoJ holds rates', 'Exports fall']",
        "Here are the events:\n1. Gold rallies 1.5%\n2. Oil spikes\n- Talks stall\n* Equities slide",
        "{\"events\": [\"Fed cuts rates\", \"Dollar slips\"]}",
        "tariffs, retaliation, supply shock",
    ];
    // a preamble line survives the line splitter as an ordinary item
    for s in samples {
        println!("{s:?}\n  -> {:?}\n", normalize_llm_list(s));
    }
    for raw in ["  tariffs   rise ", "'Event A',", "\"\"quoted twice\"\""] {
        println!("clean({raw:?}) = {:?}", clean_mention(raw));
    }
}
