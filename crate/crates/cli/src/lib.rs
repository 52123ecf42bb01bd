//! Command line front end: argument parsing, dispatch and the fixture corpus.

pub mod commands;
pub mod fixtures;
pub mod ingest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use coincide_core::lifting::DEFAULT_BUDGET;

pub use commands::Output;
pub use ingest::InputError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "coincide", version, about = "Division field coincidence toolkit")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Largest group (in elements) that may be enumerated.
    #[arg(long, global = true, env = "COINCIDE_GROUP_CAP")]
    pub cap: Option<usize>,
    /// Candidate evaluations allowed to a lift search.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Seed for randomised steps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Subgroup computations in GL2(Z/nZ).
    #[command(subcommand)]
    Group(GroupCmd),
    /// Split lifts along reduction maps.
    #[command(subcommand)]
    Lift(LiftCmd),
    /// Index sequences of p-adic images.
    #[command(subcommand)]
    Padic(PadicCmd),
    /// Audit a coincidence F(E[m]) = F(E[n]) (or F(E'[n]) with --record2).
    Audit(AuditArgs),
    /// The j-map of X_20b.
    #[command(subcommand)]
    Xcurve(XcurveCmd),
    /// Run the fixture corpus.
    VerifyPaper(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct GroupIn {
    /// Group file.
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum GroupCmd {
    /// Order, index and determinant data.
    Info {
        #[command(flatten)]
        g: GroupIn,
        /// Also list the elements.
        #[arg(long)]
        elements: bool,
    },
    /// Derived subgroup.
    Derived(GroupIn),
    /// Invariant factors of G / N (N defaults to the derived subgroup).
    Abelian {
        #[command(flatten)]
        g: GroupIn,
        #[arg(long)]
        sub: Option<PathBuf>,
    },
    /// Determinant image.
    Det(GroupIn),
    /// Intersection with SL2.
    Sl(GroupIn),
    /// Search for a conjugate of a matrix inside the group.
    Conjugate {
        #[command(flatten)]
        g: GroupIn,
        /// Matrix as a,b,c,d.
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Whether G is the full product of its images mod m and mod n.
    Fiber {
        #[command(flatten)]
        g: GroupIn,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
    },
    /// Image under reduction to a divisor of the modulus.
    Reduce {
        #[command(flatten)]
        g: GroupIn,
        #[arg(long)]
        to: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum LiftCmd {
    /// Kernel of GL2(Z/mnZ) -> GL2(Z/mZ).
    Kernel {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// Whether a matrix has a lift of the same order.
    Element {
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
        #[arg(long = "mod")]
        modulus: u64,
        #[arg(long)]
        to: u64,
    },
    /// Whether a group is split liftable.
    Split {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        to: u64,
        /// Only look for lifts inside this group.
        #[arg(long)]
        within: Option<PathBuf>,
    },
    /// Whether a group H of level mn splits over its image mod m.
    Complement {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        base: u64,
    },
}

#[derive(Args, Debug)]
pub struct ImageIn {
    /// Image file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Highest level examined.
    #[arg(long, default_value_t = 4)]
    pub kmax: u32,
}

#[derive(Subcommand, Debug)]
pub enum PadicCmd {
    /// The sequences i, j, l, u.
    Profile(ImageIn),
    /// Levels with a vertical coincidence.
    Coincidences(ImageIn),
    /// Whether u is eventually non-increasing for divisibility.
    Monotone(ImageIn),
    /// Lower bound for the adelic index forced by a (p^k, p^{k+1}) coincidence.
    Bound {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long)]
    pub record: PathBuf,
    /// Record of a second curve over the same field.
    #[arg(long)]
    pub record2: Option<PathBuf>,
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub n: u64,
}

#[derive(Subcommand, Debug)]
pub enum XcurveCmd {
    /// j(t) at a rational t.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
    /// All t of height at most H with j(t) in the target list.
    Search {
        #[arg(long)]
        height: u64,
        /// JSON list of rationals as strings; the bundled CM list if absent.
        #[arg(long)]
        targets: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Corpus file; the bundled corpus if absent.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Directory of the optional table corpus.
    #[arg(long)]
    pub optional: Option<PathBuf>,
}

/// Maps an error to its exit status.
pub fn exit_code_of(err: &anyhow::Error) -> i32 {
    use coincide_core::Error as E;
    if err.downcast_ref::<InputError>().is_some() {
        return EXIT_INPUT;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::NotInvertible(_)
            | E::BadModulus(_)
            | E::MalformedRecord(_)
            | E::Pole(_)
            | E::NotLarge(_)
            | E::NotNormal
            | E::NotAbelianQuotient,
        ) => EXIT_INPUT,
        Some(_) => EXIT_FAILURE,
        None => EXIT_INPUT,
    }
}

/// Runs the tool on `args` (including the program name), writing the report
/// to `out` and diagnostics to `err`; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    if let Some(cap) = cli.cap {
        coincide_core::set_group_cap(cap);
    }
    match commands::dispatch(&cli) {
        Ok(o) => {
            let shown = if cli.json {
                serde_json::to_string_pretty(&o.value).expect("JSON values serialise")
            } else {
                o.text.trim_end().to_string()
            };
            let _ = writeln!(out, "{shown}");
            if o.negative {
                EXIT_NEGATIVE
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_code_of(&e)
        }
    }
}
