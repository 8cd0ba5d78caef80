// The command-line pipeline driven in-process: gen, train, partition,
// thresholds, eval and roc.
//
// cargo run --release --example cli_pipeline

use clap::Parser;
use icascade::cli::Cli;

fn run(args: &[&str]) -> icascade::Result<()> {
    let cli = Cli::try_parse_from(std::iter::once("icascade").chain(args.iter().copied()))
        .map_err(|e| icascade::Error::BadParams(e.to_string()))?;
    println!("$ icascade {}\n{}", args.join(" "), cli.execute()?);
    Ok(())
}

fn main() -> icascade::Result<()> {
    let dir = std::env::temp_dir().join(format!("icascade-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = |name: &str| dir.join(name).display().to_string();
    let (d, m, c, t) = (
        path("d.csv"),
        path("m.json"),
        path("c.json"),
        path("t.json"),
    );

    run(&[
        "gen",
        "--kind",
        "gaussians",
        "--n-pos",
        "500",
        "--n-neg",
        "500",
        "--dim",
        "4",
        "--out",
        &d,
    ])?;
    run(&["train", "--data", &d, "--rounds", "50", "--out", &m])?;
    run(&[
        "partition",
        "--model",
        &m,
        "--data",
        &d,
        "--mode",
        "joint",
        "--stages",
        "4",
        "--out",
        &c,
    ])?;
    run(&[
        "thresholds",
        "--cascade",
        &c,
        "--data",
        &d,
        "--mode",
        "learn",
        "--target",
        "0.98",
        "--out",
        &t,
    ])?;
    run(&[
        "eval",
        "--cascade",
        &t,
        "--data",
        &d,
        "--model",
        &m,
        "--report",
        &path("r.json"),
    ])?;
    run(&[
        "roc",
        "--cascade",
        &t,
        "--data",
        &d,
        "--points",
        "10",
        "--out",
        &path("roc.csv"),
    ])?;

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
