//! Drives the command-line harness from code: a config file plus overriding flags.

use abperc::harness::run_cli;

fn main() -> abperc::Result<()> {
    let dir = std::env::temp_dir().join("abperc-example");
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("bound.config");
    std::fs::write(&config, "subcommand = bound\nd = 2\nlambda = 0.5\nlambda-c = 0.35911\n")?;

    let out = dir.join("bound");
    let run = run_cli([
        "abperc".as_ref(),
        "--config".as_ref(),
        config.as_os_str(),
        "--lambda".as_ref(),
        "0.4".as_ref(),
        "--out".as_ref(),
        out.as_os_str(),
    ])?;
    println!("wrote {} and {}", run.data.display(), run.summary.display());
    println!("{}", serde_json::to_string_pretty(&run.summary_value["result"])?);
    Ok(())
}
