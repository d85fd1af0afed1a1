//! `mdlab`: simulations, dependence metrics and LP optima as JSON or CSV
//! reports.
//!
//! Exit status: 0 on success, 2 on usage errors, 3 on numerical or solver
//! failures.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mdlab_core::runner::{run, OutputFormat, RawConfig};
use mdlab_core::Error;

#[derive(Parser, Debug)]
#[command(name = "mdlab", version, about = "One-sided measurement-dependence lab")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Sample joint outcomes for every (X…, Y…) setting pair
    Simulate,
    /// CHSH value, analytic and Monte-Carlo, against the bound 2 + M
    Chsh,
    /// Supremum of the measurement dependence M and the fraction F
    Mdep,
    /// Mutual information between setting and hidden variable
    Mutualinfo,
    /// Minimal dependence reaching a CHSH value or correlator quad (LP)
    Optimize,
    /// Toy table: B, M, F, bound check and marginals
    Table,
    /// Rows over a p range or a B range
    Sweep,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Simulate => "simulate",
            Cmd::Chsh => "chsh",
            Cmd::Mdep => "mdep",
            Cmd::Mutualinfo => "mutualinfo",
            Cmd::Optimize => "optimize",
            Cmd::Table => "table",
            Cmd::Sweep => "sweep",
        }
    }
}

#[derive(Args, Debug)]
struct Opts {
    /// TOML file with any of the options below; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// singlet-onesided | toy-table | uniform-baseline
    #[arg(long, global = true)]
    model: Option<String>,
    /// Toy-table dependence parameter in [0, 1]
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Toy-table outcome a (+1 or -1)
    #[arg(long, global = true, allow_negative_numbers = true)]
    a: Option<i8>,
    /// Toy-table outcome b (+1 or -1)
    #[arg(long, global = true, allow_negative_numbers = true)]
    b: Option<i8>,
    /// `optimal` or `name=x,y,z` entries, e.g. `X=1,0,0,Xp=0,1,0,Y=0,0,1`
    #[arg(long, global = true, allow_hyphen_values = true)]
    settings: Option<String>,
    /// Shots per correlator
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// Master seed (default 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Draw a fresh seed from the OS; the seed used is echoed in the report
    #[arg(long, global = true)]
    entropy: bool,
    /// Worker threads for Monte-Carlo chunks; never changes results
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// json | csv
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Target CHSH value for `optimize`
    #[arg(long, global = true)]
    target_b: Option<f64>,
    /// Target correlators `XY,XY',X'Y,X'Y'` for `optimize`
    #[arg(long, global = true, allow_hyphen_values = true)]
    quad: Option<String>,
    /// `start:end:step` over the toy parameter p
    #[arg(long, global = true)]
    p_range: Option<String>,
    /// `start:end:step` over target CHSH values
    #[arg(long, global = true)]
    b_range: Option<String>,
}

impl Opts {
    fn raw(&self, command: Cmd) -> RawConfig {
        RawConfig {
            command: Some(command.name().to_string()),
            model: self.model.clone(),
            p: self.p,
            a: self.a,
            b: self.b,
            settings: self.settings.clone(),
            shots: self.shots,
            seed: self.seed,
            entropy: self.entropy.then_some(true),
            workers: self.workers,
            format: self.format.clone(),
            output: self.output.clone(),
            target_b: self.target_b,
            quad: self.quad.clone(),
            p_range: self.p_range.clone(),
            b_range: self.b_range.clone(),
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let file = match &cli.opts.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::InvalidArgument(format!("reading config {}: {e}", path.display()))
            })?;
            RawConfig::from_toml_str(&text)?
        }
        None => RawConfig::default(),
    };
    let config = cli.opts.raw(cli.command).or(file).resolve()?;
    let report = run(&config)?;
    let text = match config.output_format {
        OutputFormat::Json => report.to_json()?,
        OutputFormat::Csv => report.to_csv()?,
    };
    match &config.output_path {
        Some(path) => fs::write(path, text).map_err(|e| {
            Error::InvalidArgument(format!("writing {}: {e}", path.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 2,
        Error::SolverFailure(_) => 3,
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on its own parse errors.
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mdlab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::InvalidArgument("x".into())), 2);
        assert_eq!(exit_code(&Error::SolverFailure("x".into())), 3);
    }

    #[test]
    fn flags_become_raw_config() {
        let cli = Cli::parse_from(["mdlab", "table", "--p", "0.3", "--a", "-1", "--entropy"]);
        let raw = cli.opts.raw(cli.command);
        assert_eq!(raw.command.as_deref(), Some("table"));
        assert_eq!(raw.p, Some(0.3));
        assert_eq!(raw.a, Some(-1));
        assert_eq!(raw.entropy, Some(true));
        assert_eq!(raw.seed, None);
    }
}
