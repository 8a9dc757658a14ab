//! Builds a run configuration in code, executes it and writes the data file with its sidecar.

use quasifree::config::{FieldRange, RunConfig, Task};
use quasifree::run::{execute, write_outputs};

fn main() -> quasifree::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.task = Some(Task::Spectrum);
    cfg.field = FieldRange::parse("0:4:5")?;
    cfg.output.path = std::env::temp_dir().join("quasifree-example/spectrum");
    let art = execute(&cfg)?;
    for p in write_outputs(&cfg, &art)? {
        println!("wrote {}", p.display());
    }
    println!("{}", cfg.to_json());
    Ok(())
}
