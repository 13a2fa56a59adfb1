//! `sensoracle`: batch preprocess/update/query runs of the sensitive
//! distance and reachability oracles, with optional brute-force
//! verification and a field-operation benchmark CSV.

#![forbid(unsafe_code)]

mod parse;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use pipeline::{Mode, RunConfig};

const USAGE: &str = "usage: sensoracle --mode distance|reach --graph <path> \
[--updates <path>] [--queries <path>] [--mu <float>] [--seed <uint64>] \
[--prime <decimal|auto>] [--verify] [--bench <csv-path>]

exit codes: 0 success, 1 parse error, 2 singular/invariant failure, \
3 verification mismatch";

fn parse_args(args: &[String]) -> Result<RunConfig, String> {
    let mut mode = None;
    let mut mu = 0.5f64;
    let mut seed = 0u64;
    let mut prime = None;
    let mut graph = None;
    let mut updates = None;
    let mut queries = None;
    let mut verify = false;
    let mut bench = None;

    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut value = |flag: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| format!("{flag} needs a value"))
        };
        match arg.as_str() {
            "--mode" => {
                mode = Some(match value("--mode")?.as_str() {
                    "distance" => Mode::Distance,
                    "reach" => Mode::Reach,
                    other => return Err(format!("unknown mode `{other}`")),
                })
            }
            "--mu" => {
                let v = value("--mu")?;
                mu = v
                    .parse::<f64>()
                    .map_err(|_| format!("invalid --mu `{v}`"))?;
            }
            "--seed" => {
                let v = value("--seed")?;
                seed = v
                    .parse::<u64>()
                    .map_err(|_| format!("invalid --seed `{v}`"))?;
            }
            "--prime" => {
                let v = value("--prime")?;
                if v != "auto" {
                    prime = Some(
                        v.parse::<u64>()
                            .map_err(|_| format!("invalid --prime `{v}`"))?,
                    );
                }
            }
            "--graph" => graph = Some(PathBuf::from(value("--graph")?)),
            "--updates" => updates = Some(PathBuf::from(value("--updates")?)),
            "--queries" => queries = Some(PathBuf::from(value("--queries")?)),
            "--verify" => verify = true,
            "--bench" => bench = Some(PathBuf::from(value("--bench")?)),
            other => return Err(format!("unknown flag `{other}`")),
        }
    }

    Ok(RunConfig {
        mode: mode.ok_or("--mode is required")?,
        mu,
        seed,
        prime,
        graph: graph.ok_or("--graph is required")?,
        updates,
        queries,
        verify,
        bench,
    })
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let config = match parse_args(&args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}\n{USAGE}");
            return ExitCode::from(1);
        }
    };
    match pipeline::run(&config) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
