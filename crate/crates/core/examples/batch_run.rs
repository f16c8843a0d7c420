//! Running a catalog problem through the batch pipeline into a temporary
//! directory, as the `fuzzy-noether run` command does.
use std::error::Error;

use fuzzy_noether::batch::{catalog, catalog_entry, run_config, RunOptions};

fn main() -> Result<(), Box<dyn Error>> {
    for entry in catalog() {
        println!("{:<14} {}", entry.name, entry.description);
    }
    let out = std::env::temp_dir().join("fuzzy-noether-batch-example");
    let config = catalog_entry("free_particle")
        .ok_or("missing entry")?
        .problem();
    let options = RunOptions {
        out: Some(out.clone()),
        ..RunOptions::default()
    };
    let report = run_config(&config, &options)?;
    for stage in &report.stages {
        println!(
            "{:<13} passed {}  {}",
            stage.stage.name(),
            stage.passed,
            stage.detail
        );
    }
    println!("exit status {}", report.exit_status);
    let csv = std::fs::read_to_string(out.join("conserved.csv"))?;
    for line in csv.lines().take(3) {
        println!("{line}");
    }
    println!("config dump:\n{}", config.dump());
    Ok(())
}
