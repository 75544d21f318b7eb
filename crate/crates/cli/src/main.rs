use std::path::PathBuf;
use std::process::ExitCode;

use charclass::regulator::QuadratureConfig;
use charclass::Error;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "charclass", version, about = "Chern-Weil, Cheeger-Simons and Borel regulator computations")]
struct Cli {
  #[command(subcommand)]
  command: Command,
}

#[derive(clap::Args, Clone)]
struct Quad {
  /// Gauss points per axis, 2..=64.
  #[arg(long, default_value_t = 16)]
  order:     usize,
  /// Use closed-form tangent vectors instead of finite differences.
  #[arg(long)]
  analytic:  bool,
  #[arg(long, default_value_t = 1e-6)]
  diff_step: f64,
}

impl Quad {
  fn config(&self) -> QuadratureConfig {
    QuadratureConfig { order: self.order, diff_step: self.diff_step, analytic_derivatives: self.analytic, ..QuadratureConfig::default() }
  }
}

#[derive(Subcommand)]
enum Command {
  /// Solve dT_p = Q_p in the basic Weil algebra of (gl_n, u_n).
  Transgress {
    #[arg(long)]
    n:   usize,
    #[arg(long)]
    p:   usize,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
  },
  /// Evaluate the Cheeger-Simons cocycle on the tuples in a JSON file.
  Cocycle {
    #[arg(long)]
    n:      usize,
    #[arg(long)]
    p:      usize,
    #[arg(long)]
    tuples: PathBuf,
    #[command(flatten)]
    quad:   Quad,
    #[arg(long)]
    out:    Option<PathBuf>,
  },
  /// Pair the cocycle with an integral bar cycle of a finitely generated group.
  CsFlat {
    #[arg(long)]
    p:     usize,
    #[arg(long)]
    cycle: PathBuf,
    #[command(flatten)]
    quad:  Quad,
  },
  /// Run the seeded verification suites and print a JSON report.
  Verify {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 7)]
    seed:  u64,
    #[arg(long)]
    out:   Option<PathBuf>,
  },
  /// Classify a meromorphic form by log membership and the F and Q filtrations.
  Filt {
    expr:     String,
    /// Comma-separated boundary variables; defaults to every variable in the expression.
    #[arg(long, value_delimiter = ',')]
    boundary: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', default_value = "")]
    interior: Vec<String>,
  },
}

enum Failure {
  Verification,
  Usage(String),
  Io(String),
}

impl From<Error> for Failure {
  fn from(e: Error) -> Self { Failure::Usage(e.to_string()) }
}

fn read(path: &PathBuf) -> Result<String, Failure> { std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))) }

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
  match out {
    Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
    None => {
      print!("{text}");
      Ok(())
    },
  }
}

fn run(cli: Cli) -> Result<(), Failure> {
  match cli.command {
    Command::Transgress { n, p, out } => {
      let (doc, line) = charclass_cli::transgress(n, p)?;
      emit(&(doc + "\n"), &out)?;
      eprintln!("{line}");
    },
    Command::Cocycle { n, p, tuples, quad, out } => {
      let text = read(&tuples)?;
      let tuples = charclass_cli::parse_tuples(&text).map_err(|e| Failure::Usage(e.to_string()))?;
      emit(&charclass_cli::cocycle_csv(n, p, &tuples, &quad.config())?, &out)?;
    },
    Command::CsFlat { p, cycle, quad } => {
      let cycle = charclass_cli::parse_cycle(&read(&cycle)?)?;
      match charclass_cli::cs_flat(&cycle, p, &quad.config()) {
        Ok(s) => print!("{s}"),
        Err(e @ Error::NotACycle(_)) => {
          eprintln!("{e}");
          return Err(Failure::Verification);
        },
        Err(e) => return Err(e.into()),
      }
    },
    Command::Verify { suite, seed, out } => {
      let report = charclass::verify::run(&suite, seed)?;
      emit(&(report.to_json() + "\n"), &out)?;
      if !report.passed {
        return Err(Failure::Verification);
      }
    },
    Command::Filt { expr, boundary, interior } => {
      let interior: Vec<String> = interior.into_iter().filter(|s| !s.is_empty()).collect();
      match charclass_cli::filt(&expr, boundary, interior) {
        Ok(line) => println!("{line}"),
        Err(Error::Syntax { pos, msg }) => return Err(Failure::Usage(format!("syntax error: {msg}\n{}", charclass_cli::caret(&expr, pos)))),
        Err(e) => return Err(e.into()),
      }
    },
  }
  Ok(())
}

fn main() -> ExitCode {
  if let Some(t) = std::env::var("CHARCLASS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
  }
  match run(Cli::parse()) {
    Ok(()) => ExitCode::SUCCESS,
    Err(Failure::Verification) => ExitCode::from(1),
    Err(Failure::Usage(msg)) => {
      eprintln!("error: {msg}");
      ExitCode::from(2)
    },
    Err(Failure::Io(msg)) => {
      eprintln!("I/O error: {msg}");
      ExitCode::from(3)
    },
  }
}
