//! Runs a subcommand in process: a `key = value` config, one override, and
//! the JSON report written to a temporary directory.

use spikeforge::cli::{execute, Invocation};

fn main() -> spikeforge::Result<()> {
    let dir = std::env::temp_dir().join("spikeforge-cli-run");
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("groundstate.cfg");
    std::fs::write(&config, "# cubic field term in one dimension\nnonlin.kind = field\nnonlin.p = 3\nd = 1\n")?;
    let inv = Invocation {
        command: "groundstate".into(),
        config: Some(config),
        overrides: vec![("out_dir".into(), dir.to_string_lossy().into_owned())],
        timestamp: true,
        ..Invocation::default()
    };
    let summary = execute(&inv)?;
    for c in &summary.checks {
        println!("{}", c.line());
    }
    println!("report written to {}", summary.report_path.unwrap().display());
    Ok(())
}
