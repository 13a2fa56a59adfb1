//! The preprocess -> update -> query pipeline behind the CLI.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use sensoracle_core::algebra::FieldConfig;
use sensoracle_core::counter;
use sensoracle_core::error::Error as CoreError;
use sensoracle_core::graph::{
    check_field_capacity, reach_in, reach_out, DistanceOracle, GraphSpec, QueryAnswer, ReachOracle,
    UpdateBatch,
};
use sensoracle_core::refcheck::{bellman_ford_all, bfs_reach, BfOutcome, RefGraph};

use crate::parse::{self, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Distance,
    Reach,
}

#[derive(Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub mu: f64,
    pub seed: u64,
    pub prime: Option<u64>,
    pub graph: PathBuf,
    pub updates: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub verify: bool,
    pub bench: Option<PathBuf>,
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Io(String),
    Parse(ParseError),
    Core(CoreError),
    VerifyMismatch(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "{m}"),
            RunError::Io(m) => write!(f, "{m}"),
            RunError::Parse(e) => write!(f, "{e}"),
            RunError::Core(e) => write!(f, "{e}"),
            RunError::VerifyMismatch(m) => write!(f, "verification mismatch: {m}"),
        }
    }
}

impl From<ParseError> for RunError {
    fn from(e: ParseError) -> Self {
        RunError::Parse(e)
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        RunError::Core(e)
    }
}

impl RunError {
    /// 1 = parse/config, 2 = singular or broken algebraic invariant,
    /// 3 = verification mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) | RunError::Parse(_) => 1,
            RunError::Core(e) => match e {
                CoreError::NotPrime(_)
                | CoreError::FieldCapacity { .. }
                | CoreError::EvalCapacity { .. }
                | CoreError::TransformTooLong { .. }
                | CoreError::InvalidInput(_) => 1,
                _ => 2,
            },
            RunError::VerifyMismatch(_) => 3,
        }
    }
}

struct BenchRow {
    phase: &'static str,
    field_ops: u64,
    wall_ms: f64,
}

/// Run the whole pipeline; on success returns the query output (one line
/// per query) ready for stdout.
pub fn run(config: &RunConfig) -> Result<String, RunError> {
    let graph_text = read(&config.graph)?;
    let spec = parse::parse_graph(&graph_text)?;
    let batch = match &config.updates {
        Some(path) => parse::parse_updates(&read(path)?)?,
        None => UpdateBatch::default(),
    };
    let queries = match &config.queries {
        Some(path) => parse::parse_queries(&read(path)?)?,
        None => Vec::new(),
    };

    if !(0.0..=1.0).contains(&config.mu) {
        return Err(RunError::Config(format!(
            "--mu {} outside [0, 1]",
            config.mu
        )));
    }
    // Semantic batch validation is a parse-stage concern: absent/present
    // edge rules, weight bounds, node deletes only in reach mode.
    batch
        .validate(&spec, config.mode == Mode::Reach)
        .map_err(|e| RunError::Config(e.to_string()))?;

    let field = match config.prime {
        Some(p) => {
            let f = FieldConfig::new(p).map_err(|e| RunError::Config(e.to_string()))?;
            let (dim, degree_bound) = match config.mode {
                Mode::Distance => (spec.n(), 2 * spec.w_bound() as usize),
                Mode::Reach => (2 * spec.n(), 0),
            };
            check_field_capacity(&f, dim, degree_bound)
                .map_err(|e| RunError::Config(e.to_string()))?;
            Some(f)
        }
        None => None,
    };

    let n = spec.n();
    let f_size = batch.len();
    let mut bench_rows: Vec<BenchRow> = Vec::new();
    let mut output = String::new();

    match config.mode {
        Mode::Distance => {
            let (oracle, row) = timed(|| match field {
                Some(f) => {
                    DistanceOracle::build_with_field(spec.clone(), config.mu, config.seed, f)
                }
                None => DistanceOracle::build(spec.clone(), config.mu, config.seed),
            });
            let mut oracle = oracle?;
            bench_rows.push(named(row, "preprocess"));

            let (res, row) = timed(|| oracle.update(&batch));
            res?;
            bench_rows.push(named(row, "update"));

            let (answers, row) = timed(|| {
                queries
                    .iter()
                    .map(|&(u, v)| oracle.query(u, v))
                    .collect::<Result<Vec<_>, _>>()
            });
            let answers = answers?;
            bench_rows.push(named(row, "query"));

            for (&(u, v), answer) in queries.iter().zip(&answers) {
                match answer {
                    QueryAnswer::Dist(k) => writeln!(output, "dist {u} {v} {k}").unwrap(),
                    QueryAnswer::Unreachable => writeln!(output, "dist {u} {v} inf").unwrap(),
                    QueryAnswer::NegativeCycle => writeln!(output, "negcycle").unwrap(),
                    QueryAnswer::Reach(_) => unreachable!("distance oracle answered reach"),
                }
            }

            if config.verify {
                verify_distance(&spec, &batch, &queries, &answers)?;
            }
        }
        Mode::Reach => {
            let (oracle, row) = timed(|| match field {
                Some(f) => ReachOracle::build_with_field(spec.clone(), config.seed, f),
                None => ReachOracle::build(spec.clone(), config.seed),
            });
            let mut oracle = oracle?;
            bench_rows.push(named(row, "preprocess"));

            let (res, row) = timed(|| oracle.update(&batch));
            res?;
            bench_rows.push(named(row, "update"));

            let (answers, row) = timed(|| {
                queries
                    .iter()
                    .map(|&(u, v)| oracle.query(u, v))
                    .collect::<Result<Vec<_>, _>>()
            });
            let answers = answers?;
            bench_rows.push(named(row, "query"));

            for (&(u, v), answer) in queries.iter().zip(&answers) {
                match answer {
                    QueryAnswer::Reach(yes) => writeln!(output, "reach {u} {v} {yes}").unwrap(),
                    _ => unreachable!("reach oracle answered distance"),
                }
            }

            if config.verify {
                verify_reach(&spec, &batch, &queries, &answers)?;
            }
        }
    }

    if let Some(path) = &config.bench {
        let mut csv = String::from("phase,n,f,mu,field_ops,wall_ms\n");
        for row in &bench_rows {
            writeln!(
                csv,
                "{},{},{},{},{},{:.3}",
                row.phase, n, f_size, config.mu, row.field_ops, row.wall_ms
            )
            .unwrap();
        }
        std::fs::write(path, csv)
            .map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))?;
    }

    Ok(output)
}

fn read(path: &PathBuf) -> Result<String, RunError> {
    std::fs::read_to_string(path)
        .map_err(|e| RunError::Io(format!("cannot read {}: {e}", path.display())))
}

fn timed<T>(op: impl FnOnce() -> T) -> (T, BenchRow) {
    let ops_before = counter::field_ops();
    let start = Instant::now();
    let value = op();
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let field_ops = counter::field_ops() - ops_before;
    (
        value,
        BenchRow {
            phase: "",
            field_ops,
            wall_ms,
        },
    )
}

fn named(mut row: BenchRow, phase: &'static str) -> BenchRow {
    row.phase = phase;
    row
}

fn verify_distance(
    spec: &GraphSpec,
    batch: &UpdateBatch,
    queries: &[(usize, usize)],
    answers: &[QueryAnswer],
) -> Result<(), RunError> {
    let g = RefGraph::distance_graph(spec, batch)?;
    let mut cache: std::collections::BTreeMap<usize, BfOutcome> = Default::default();
    for (&(u, v), answer) in queries.iter().zip(answers) {
        let outcome = cache
            .entry(u)
            .or_insert_with(|| bellman_ford_all(&g, u - 1));
        let expected = match outcome {
            BfOutcome::NegativeCycle => QueryAnswer::NegativeCycle,
            BfOutcome::Distances(d) => match d[v - 1] {
                Some(k) => QueryAnswer::Dist(k),
                None => QueryAnswer::Unreachable,
            },
        };
        if *answer != expected {
            return Err(RunError::VerifyMismatch(format!(
                "query {u} {v}: oracle answered {answer:?}, reference says {expected:?}"
            )));
        }
    }
    Ok(())
}

fn verify_reach(
    spec: &GraphSpec,
    batch: &UpdateBatch,
    queries: &[(usize, usize)],
    answers: &[QueryAnswer],
) -> Result<(), RunError> {
    let split = RefGraph::reach_split_graph(spec, batch);
    let n = spec.n();
    for (&(u, v), answer) in queries.iter().zip(answers) {
        let expected = QueryAnswer::Reach(bfs_reach(&split, reach_in(u), reach_out(n, v)));
        if *answer != expected {
            return Err(RunError::VerifyMismatch(format!(
                "query {u} {v}: oracle answered {answer:?}, reference says {expected:?}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(RunError::Config("x".into()).exit_code(), 1);
        assert_eq!(RunError::Io("x".into()).exit_code(), 1);
        assert_eq!(RunError::Core(CoreError::NotPrime(9)).exit_code(), 1);
        assert_eq!(
            RunError::Core(CoreError::InvalidInput("x".into())).exit_code(),
            1
        );
        assert_eq!(RunError::Core(CoreError::Singular).exit_code(), 2);
        assert_eq!(
            RunError::Core(CoreError::SingularAfterUpdate).exit_code(),
            2
        );
        assert_eq!(RunError::Core(CoreError::SingularEncoding).exit_code(), 2);
        assert_eq!(
            RunError::Core(CoreError::Invariant("x".into())).exit_code(),
            2
        );
        assert_eq!(RunError::Core(CoreError::NotDivisible).exit_code(), 2);
        assert_eq!(RunError::VerifyMismatch("x".into()).exit_code(), 3);
    }
}
