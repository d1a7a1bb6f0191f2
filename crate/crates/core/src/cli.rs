//! Command-line front end. Exit codes: 0 success, 1 condition violation,
//! 2 usage or input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::families::{build_family, build_quantum, FamilyId, QuantumKind};
use crate::io::{instance_to_json, read_instance};
use crate::pipeline::{semigroup_report, verify_instance, VerifyConfig, VerifyReport};
use crate::repclass::{classify_all, classify_with, corrupted_tables, golden_mismatches, ClassificationResult};
use crate::{CLOSURE_CAP, EPS_DEDUP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "stable-chsh", version, about = "Teleportation-stable CHSH theories: build, verify, classify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the JSON result to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate the admissible characters and compare with the known list.
    Classify {
        #[arg(long, default_value_t = 8)]
        n_max: u32,
        #[command(flatten)]
        output: Output,
        #[arg(long, hide = true)]
        corrupt_table: bool,
    },
    /// Build a family representative.
    Family {
        #[command(subcommand)]
        action: FamilyAction,
    },
    /// Build a two-qubit realization.
    Quantum {
        #[command(subcommand)]
        action: QuantumAction,
    },
    /// Run the full verification pipeline on an instance file.
    Verify {
        instance: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = EPS_DEDUP)]
        eps: f64,
        #[arg(long, default_value_t = CLOSURE_CAP)]
        cap: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Semigroup closure and group analysis of an instance file.
    Semigroup {
        instance: PathBuf,
        #[arg(long, default_value_t = EPS_DEDUP)]
        eps: f64,
        #[arg(long, default_value_t = CLOSURE_CAP)]
        cap: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Subcommand)]
pub enum FamilyAction {
    Build {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum QuantumAction {
    Build {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_for(e: &Error) -> i32 {
    match e {
        Error::Json(_)
        | Error::Io(_)
        | Error::InvalidInput(_)
        | Error::Dimension(_)
        | Error::BoundTooSmall { .. } => EXIT_INPUT,
        _ => EXIT_VIOLATION,
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn fail(&mut self, e: &Error) -> i32 {
        let _ = writeln!(self.err, "error: {e}");
        exit_for(e)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(Error::Io)
}

fn emit<T: Serialize>(io: &mut Io, output: &Output, value: &T, text: &str) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(value)?;
    if let Some(p) = &output.out {
        write_file(p, &(json.clone() + "\n"))?;
    }
    let shown = match output.format {
        Format::Json => json,
        Format::Text => text.to_string(),
    };
    writeln!(io.out, "{shown}").map_err(Error::Io)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    let mut io = Io { out, err };
    match cli.command {
        Command::Classify { n_max, output, corrupt_table } => cmd_classify(&mut io, n_max, &output, corrupt_table),
        Command::Family { action: FamilyAction::Build { family, a, out } } => cmd_family(&mut io, &family, a, out.as_deref()),
        Command::Quantum { action: QuantumAction::Build { kind, out } } => cmd_quantum(&mut io, &kind, out.as_deref()),
        Command::Verify { instance, depth, eps, cap, output } => cmd_verify(&mut io, &instance, depth, eps, cap, &output),
        Command::Semigroup { instance, eps, cap, output } => cmd_semigroup(&mut io, &instance, eps, cap, &output),
    }
}

fn classification_text(r: &ClassificationResult) -> String {
    let mut s = format!("{:<6}{:<18}{:<6}{:<24}{}\n", "group", "multiplicities", "dim", "label", "duplicate_of");
    for c in &r.solutions {
        let n = format!("{:?}", c.multiplicities);
        let _ = writeln!(
            s,
            "{:<6}{:<18}{:<6}{:<24}{}",
            c.group.name(),
            n,
            c.dimension,
            c.label,
            c.duplicate_of.as_deref().unwrap_or("-")
        );
    }
    let _ = write!(s, "{} families, {} duplicate(s), n_max = {}", r.families().count(), r.duplicates().count(), r.n_max);
    s
}

fn cmd_classify(io: &mut Io, n_max: u32, output: &Output, corrupt: bool) -> i32 {
    let result = if corrupt { classify_with(&corrupted_tables(), n_max) } else { classify_all(n_max) };
    let result = match result {
        Ok(r) => r,
        Err(e) => return io.fail(&e),
    };
    if let Err(e) = emit(io, output, &result.solutions, &classification_text(&result)) {
        return io.fail(&e);
    }
    let mismatches = golden_mismatches(&result);
    if mismatches.is_empty() {
        EXIT_OK
    } else {
        let _ = writeln!(io.err, "classification does not match the expected list:");
        for m in mismatches {
            let _ = writeln!(io.err, "  {m}");
        }
        EXIT_VIOLATION
    }
}

fn write_instance_json(io: &mut Io, json: Result<String, Error>, out: Option<&Path>) -> i32 {
    let result = json.and_then(|j| match out {
        Some(p) => write_file(p, &j),
        None => writeln!(io.out, "{}", j.trim_end()).map_err(Error::Io),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => io.fail(&e),
    }
}

fn cmd_family(io: &mut Io, family: &str, a: f64, out: Option<&Path>) -> i32 {
    let json = family.parse::<FamilyId>().and_then(|id| build_family(id, a)).and_then(|i| instance_to_json(&i));
    write_instance_json(io, json, out)
}

fn cmd_quantum(io: &mut Io, kind: &str, out: Option<&Path>) -> i32 {
    let json = kind.parse::<QuantumKind>().and_then(build_quantum).and_then(|i| instance_to_json(&i));
    write_instance_json(io, json, out)
}

fn verify_text(r: &VerifyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "CHSH value: {:.12}", r.chsh_value);
    let _ = writeln!(s, "a: {:.12}", r.a);
    if let Some(n) = r.group_order {
        let _ = writeln!(s, "group order: {n}");
    }
    if let Some(c) = &r.character {
        let _ = writeln!(s, "character: {c}");
    }
    if let Some(l) = &r.label {
        let _ = writeln!(s, "label: {l}");
    }
    for st in &r.stages {
        let status = match (st.enforced, st.pass) {
            (false, _) => "info",
            (true, true) => "pass",
            (true, false) => "FAIL",
        };
        let _ = write!(s, "  [{status}] {}", st.name);
        if let Some(w) = &st.witness {
            let _ = write!(s, ": {w}");
        }
        s.push('\n');
    }
    let _ = write!(s, "{}", if r.pass { "all stages pass" } else { "verification failed" });
    if !r.pass {
        let _ = write!(s, " ({})", r.failing_stages.join(", "));
    }
    s
}

fn cmd_verify(io: &mut Io, path: &Path, depth: usize, eps: f64, cap: usize, output: &Output) -> i32 {
    let inst = match read_instance(path) {
        Ok(i) => i,
        Err(e) => return io.fail(&e),
    };
    let cfg = VerifyConfig { depth, eps, cap, expected_label: None };
    let report = match verify_instance(&inst, &cfg) {
        Ok(r) => r,
        Err(e) => return io.fail(&e),
    };
    if let Err(e) = emit(io, output, &report, &verify_text(&report)) {
        return io.fail(&e);
    }
    if report.pass {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn cmd_semigroup(io: &mut Io, path: &Path, eps: f64, cap: usize, output: &Output) -> i32 {
    if !(eps > 0.0) || cap == 0 {
        return io.fail(&Error::InvalidInput("eps must be positive and cap at least 1".into()));
    }
    let report = match read_instance(path).and_then(|i| semigroup_report(&i, eps, cap)) {
        Ok(r) => r,
        Err(e) => return io.fail(&e),
    };
    let mut text = format!("closure size: {}\ngroup order: {}", report.closure_size, report.group_order);
    if let Some(l) = &report.label {
        let _ = write!(text, "\nlabel: {l}");
    }
    match emit(io, output, &report, &text) {
        Ok(()) => EXIT_OK,
        Err(e) => io.fail(&e),
    }
}
