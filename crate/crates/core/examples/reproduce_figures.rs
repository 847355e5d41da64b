//! Writes all six figure tables for the default scenario into a directory
//! (first argument, default `figures`) and prints a short summary of each.

use std::path::PathBuf;

use cellborrow::scenario::{run_figure, ScenarioConfig, FIGURES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir)?;
    let config = ScenarioConfig::default();
    for &f in FIGURES.iter() {
        let table = run_figure(&config, f)?;
        let path = dir.join(format!("fig{f:02}.csv"));
        table.write(&path)?;
        let x = table.column(&table.columns[0]).unwrap();
        let p = table.column("proposed_value").unwrap();
        let c = table.column("conventional_value").unwrap();
        let last = x.len() - 1;
        println!(
            "{}: {} rows; at {} = {:.3}: proposed {:.4}, conventional {:.4}",
            path.display(),
            x.len(),
            table.columns[0],
            x[last],
            p[last],
            c[last]
        );
    }
    Ok(())
}
