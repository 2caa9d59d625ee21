//! Writes a synthetic demo workspace and prints the command sequence that
//! runs the full pipeline over it.
//!
//! cargo run --example demo -- /tmp/demo [posts]

use std::path::PathBuf;

use moraltopics::demo::{write_demo, DemoConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "demo".into()));
    let mut cfg = DemoConfig::default();
    if let Some(n) = args.next() {
        cfg.posts = n.parse()?;
    }
    std::fs::create_dir_all(&dir)?;
    let config = write_demo(&dir, &cfg)?;
    println!("wrote {} synthetic threads to {}", cfg.posts, dir.display());
    let steps = [
        "ingest", "filter", "split", "prep", "train", "merge", "pairs", "pmi", "coherence", "ami",
        "lexicon-score", "correlate", "radar", "survey-bank", "report",
    ];
    for s in steps {
        println!("moraltopics --config {} {s}", config.display());
    }
    Ok(())
}
