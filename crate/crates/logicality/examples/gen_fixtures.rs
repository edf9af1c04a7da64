//! Regenerates the shipped fixture datasets under `fixtures/`.
//!
//!     cargo run -p logicality --example gen_fixtures

use std::path::Path;

use logicality::fsio::write_string_atomic;
use logicality::synth::{fixture_corpus, fixture_items, string_form_line};

fn main() -> logicality::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for (name, records) in [("items12.jsonl", fixture_items()), ("corpus100.jsonl", fixture_corpus())] {
        let mut text = String::new();
        for r in &records {
            text.push_str(&string_form_line(r));
            text.push('\n');
        }
        write_string_atomic(&dir.join(name), &text)?;
        println!("{name}: {} items", records.len());
    }
    Ok(())
}
