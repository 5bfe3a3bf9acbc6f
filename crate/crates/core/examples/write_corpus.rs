//! Regenerates the bundled problem files.
//!
//! ```text
//! cargo run -p whgvi-core --example write_corpus -- corpus
//! ```

use std::path::PathBuf;

use whgvi_core::corpus;
use whgvi_core::synthetic::{self, Generator};

/// Seed and dimension of the one bundled instance per synthetic generator.
const SYNTHETIC: [(u64, usize); 6] = [(11, 2), (12, 3), (13, 3), (14, 2), (15, 3), (16, 2)];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    std::fs::create_dir_all(&dir)?;
    let mut specs = corpus::all_examples()?;
    for (kind, (seed, n)) in Generator::ALL.into_iter().zip(SYNTHETIC) {
        specs.push(synthetic::generate(kind, n, seed)?);
    }
    for spec in specs {
        let path = dir.join(format!("{}.json", spec.name));
        std::fs::write(&path, spec.to_json())?;
        println!("{}", path.display());
    }
    Ok(())
}
