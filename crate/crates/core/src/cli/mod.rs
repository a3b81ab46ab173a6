//! Batch front-end: verifications, relation sets and integrals with JSON
//! reports. Exit code 0 when every check passes, 1 when one fails, 2 on
//! invalid input.

pub mod algebra;
pub mod numeric;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::integrator::{KnotPath, MorseKnot, QuadratureConfig};
use crate::relations::Family;
use crate::vassiliev::AppendixFixtures;
pub use report::{Check, RunReport, Verdict};

/// Environment variable overriding the fixture directory.
pub const FIXTURE_ENV: &str = "KZCOCYCLE_FIXTURES";

#[derive(Parser, Debug)]
#[command(name = "kzcocycle", version, about = "Chord-diagram relations and 1-cocycle integrals of long knots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include the wall time in the report (makes it run-dependent).
    #[arg(long, global = true)]
    timing: bool,
    /// Evaluate without data parallelism.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Args, Debug, Clone)]
struct QuadArgs {
    /// Quadrature configuration as JSON `{"order", "maxRefine", "tol"}`.
    #[arg(long)]
    quad: Option<PathBuf>,
    /// Overrides the tolerance of the quadrature configuration.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct KnotArgs {
    /// Knot JSON file, or the name of a shipped fixture.
    #[arg(long)]
    knot: String,
    #[arg(long, default_value_t = 3)]
    max_degree: usize,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reproduce the transcribed reference matrices and their kernels.
    VerifyAppendix,
    /// Generate the relators of one family in one degree.
    Relations {
        #[arg(long)]
        degree: usize,
        #[arg(long, value_parser = parse_family)]
        family: Family,
    },
    /// A basis of the weight systems of one degree.
    Weights {
        #[arg(long)]
        degree: usize,
    },
    /// The four-strand curvature matrix and its calibration.
    Curvature {
        #[arg(long, default_value_t = 4)]
        strands: usize,
    },
    /// The tree-form lemma for all labelled trees.
    TreeLemma {
        #[arg(long = "max-p", default_value_t = 6)]
        max_p: usize,
    },
    /// The Kontsevich integral of a Morse knot.
    Z {
        #[arg(long)]
        knot: String,
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// The 1-cocycle integral along a path, or along the rotation loop.
    #[command(args_conflicts_with_subcommands = true)]
    Z1 {
        #[command(subcommand)]
        rotation: Option<Rotation>,
        /// Path JSON file.
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        max_degree: usize,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Cross-checks between independent evaluations.
    Consistency {
        #[command(subcommand)]
        rotation: Rotation,
    },
}

#[derive(Subcommand, Debug)]
enum Rotation {
    /// The loop rotating the knot once about its axis.
    Gramain(KnotArgs),
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// The fixture directory: the environment override or the shipped one.
pub fn fixture_dir() -> PathBuf {
    std::env::var_os(FIXTURE_ENV).map_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures")), PathBuf::from)
}

/// Reads a file, or a shipped knot fixture by name.
fn read_knot_text(name: &str) -> Result<String> {
    let direct = Path::new(name);
    if direct.is_file() {
        return Ok(std::fs::read_to_string(direct)?);
    }
    let dir = fixture_dir().join("knots");
    for candidate in [dir.join(name), dir.join(format!("{name}.json"))] {
        if candidate.is_file() {
            return Ok(std::fs::read_to_string(candidate)?);
        }
    }
    Err(Error::Io(format!("no knot file or fixture named {name}")))
}

fn load_quad(args: &QuadArgs) -> Result<QuadratureConfig> {
    let mut q = match &args.quad {
        Some(p) => QuadratureConfig::from_json_str(&std::fs::read_to_string(p)?)?,
        None => QuadratureConfig::default(),
    };
    if let Some(t) = args.tol {
        q.tol = t;
    }
    q.validate()?;
    Ok(q)
}

fn dispatch(cli: &Cli) -> Result<RunReport> {
    let parallel = !cli.sequential && crate::par::available();
    match &cli.command {
        Command::VerifyAppendix => match std::env::var_os(FIXTURE_ENV) {
            Some(dir) => {
                let dir = PathBuf::from(dir).join("appendixC");
                let fx = AppendixFixtures::load(&dir)?;
                algebra::verify(&fx, dir.to_string_lossy().as_bytes())
            }
            None => algebra::verify(&AppendixFixtures::builtin(), b"builtin"),
        },
        Command::Relations { degree, family } => algebra::relation_set(*degree, *family),
        Command::Weights { degree } => algebra::weights(*degree),
        Command::Curvature { strands } => algebra::curvature(*strands, parallel),
        Command::TreeLemma { max_p } => algebra::tree_lemma(*max_p),
        Command::Z { knot, max_degree, quad } => {
            let text = read_knot_text(knot)?;
            let k = MorseKnot::from_json_str(&text)?;
            numeric::z(&k, text.as_bytes(), *max_degree, &load_quad(quad)?, parallel)
        }
        Command::Z1 { rotation: Some(Rotation::Gramain(a)), .. } => {
            let text = read_knot_text(&a.knot)?;
            let k = MorseKnot::from_json_str(&text)?;
            numeric::z1_gramain(&k, text.as_bytes(), a.max_degree, &load_quad(&a.quad)?, parallel)
        }
        Command::Z1 { rotation: None, path, max_degree, quad } => {
            let path = path.as_ref().ok_or_else(|| Error::Parse("z1 needs --path FILE or the gramain subcommand".into()))?;
            let text = std::fs::read_to_string(path)?;
            let p = KnotPath::from_json(&serde_json::from_str(&text)?)?;
            numeric::z1_path(&p, text.as_bytes(), *max_degree, &load_quad(quad)?, parallel)
        }
        Command::Consistency { rotation: Rotation::Gramain(a) } => {
            let text = read_knot_text(&a.knot)?;
            let k = MorseKnot::from_json_str(&text)?;
            numeric::consistency_gramain(&k, text.as_bytes(), a.max_degree, &load_quad(&a.quad)?, parallel)
        }
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let mut report = match dispatch(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                Error::Quadrature(_) => 1,
                _ => 2,
            };
        }
    };
    if cli.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    let text = match serde_json::to_string_pretty(&report) {
        Ok(t) => t + "\n",
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let written = match &cli.out {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    for c in report.checks.iter().filter(|c| c.verdict == Verdict::Fail) {
        eprintln!("FAIL {}: {}", c.name, c.detail);
    }
    i32::from(!report.passed())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_to_json(args: &[&str]) -> (i32, serde_json::Value) {
        let out = std::env::temp_dir().join(format!("kzcocycle-cli-{}-{}.json", std::process::id(), args.join("_")));
        let mut argv = vec!["kzcocycle", "--out", out.to_str().unwrap()];
        argv.extend_from_slice(args);
        let code = run(argv);
        let text = std::fs::read_to_string(&out).unwrap_or_default();
        let _ = std::fs::remove_file(&out);
        (code, serde_json::from_str(&text).unwrap_or(serde_json::Value::Null))
    }

    #[test]
    fn verify_appendix_passes_with_rank_ten() {
        let (code, j) = run_to_json(&["verify-appendix"]);
        assert_eq!(code, 0);
        assert_eq!(j["outputs"]["m1_rank"], 10);
        assert!(j.get("wall_time_s").is_none());
    }

    #[test]
    fn two_term_relators_have_two_terms() {
        let (code, j) = run_to_json(&["relations", "--degree", "3", "--family", "2T"]);
        assert_eq!(code, 0);
        assert_eq!(j["checks"][0]["verdict"], "pass");
    }

    #[test]
    fn reports_are_byte_stable_without_timing() {
        let (_, a) = run_to_json(&["tree-lemma", "--max-p", "4"]);
        let (_, b) = run_to_json(&["tree-lemma", "--max-p", "4"]);
        assert_eq!(a, b);
        let (_, t) = run_to_json(&["--timing", "tree-lemma", "--max-p", "3"]);
        assert!(t["wall_time_s"].is_number());
    }

    #[test]
    fn invalid_input_exits_with_two() {
        assert_eq!(run(["kzcocycle", "bogus"]), 2);
        assert_eq!(run(["kzcocycle", "relations", "--degree", "3", "--family", "5T"]), 2);
        assert_eq!(run(["kzcocycle", "z", "--knot", "no-such-knot"]), 2);
        assert_eq!(run(["kzcocycle", "z", "--knot", "hump", "--tol", "-1"]), 2);
        assert_eq!(run(["kzcocycle", "--help"]), 0);
    }

    #[test]
    fn knot_fixtures_resolve_by_name() {
        let (code, j) = run_to_json(&["z", "--knot", "trefoil_a", "--tol", "1e-6"]);
        assert_eq!(code, 0);
        let re = j["outputs"]["correctedCrossing"]["re"].as_f64().unwrap();
        assert!((re - 1.0).abs() < 1e-4, "{re}");
    }
}
