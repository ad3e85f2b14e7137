//! `ngon`: build incidence geometries and report on them.
//!
//! Exit status: 0 on success or a positive verdict, 1 on a negative verdict or
//! a refused computation, 2 on usage and I/O errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ngon", version, about = "Generalized polygons: construction, verification, Schubert cells, coordinates")]
pub struct Cli {
    /// Emit JSON instead of text tables.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads for the parallel loops (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Write the report (or, for `build`, the geometry) here instead of stdout.
    #[arg(short, long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Construct a geometry and write it as a polygon file.
    Build(BuildArgs),
    /// Check the generalized n-gon axioms.
    Verify(VerifyArgs),
    /// Schubert cells relative to a base flag.
    Schubert(SchubertArgs),
    /// Coordinate operations and right-loop axioms on a frame.
    Algebra(AlgebraArgs),
    /// Projectivities and the group of projectivities at a vertex.
    Proj(ProjArgs),
    /// Counts, girth, diameter, orders.
    Info(InputArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("family").required(true).args(["plane", "quadrangle", "dihedral", "coset"])))]
pub struct BuildArgs {
    /// PG(2, q) for prime q.
    #[arg(long, value_name = "Q")]
    pub plane: Option<u32>,
    /// The symplectic quadrangle W(q) for prime q.
    #[arg(long, value_name = "Q")]
    pub quadrangle: Option<u32>,
    /// The thin ordinary n-gon.
    #[arg(long, value_name = "N")]
    pub dihedral: Option<usize>,
    /// Coset geometry from a group file carrying `A:` and `B:` lines.
    #[arg(long, value_name = "GROUPFILE")]
    pub coset: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Polygon file.
    #[arg(short, long, value_name = "PATH")]
    pub input: PathBuf,
    /// n; defaults to the file's claim, then to girth/diameter inference.
    #[arg(long, value_name = "N")]
    pub gon: Option<usize>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Ignore any claim and infer n from girth and diameter.
    #[arg(long)]
    pub infer: bool,
    /// Also check the opposite lemma exhaustively.
    #[arg(long)]
    pub opposite_lemma: bool,
}

#[derive(Args, Debug)]
pub struct SchubertArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Base flag as point and line indices (default: the smallest flag).
    #[arg(long, num_args = 2, value_names = ["P", "L"])]
    pub flag: Option<Vec<usize>>,
    /// Coordinatize every cell with the default n-gon.
    #[arg(long)]
    pub coordinatize: bool,
    /// Separate every big-cell point from every smaller point cell.
    #[arg(long)]
    pub separate: bool,
}

#[derive(Args, Debug)]
pub struct AlgebraArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// `auto`, or the 2n vertices of an ordinary n-gon, like `p0 l0 p3 ...`.
    #[arg(long, num_args = 1.., default_value = "auto", value_name = "VERTEX")]
    pub frame: Vec<String>,
    /// 1_L (default: smallest admissible).
    #[arg(long, value_name = "VERTEX")]
    pub one_l: Option<String>,
    /// e (default: smallest admissible).
    #[arg(long, value_name = "VERTEX")]
    pub e: Option<String>,
    /// Print the multiplication, division, addition and subtraction tables.
    #[arg(long)]
    pub tables: bool,
    /// Check every admissible frame on the chosen n-gon instead of one.
    #[arg(long)]
    pub sweep: bool,
}

#[derive(Args, Debug)]
pub struct ProjArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Base vertex, like `p0` or `l2`.
    #[arg(long, value_name = "VERTEX", default_value = "p0")]
    pub at: String,
    /// Print a projectivity from `--at` to this vertex.
    #[arg(long, value_name = "VERTEX")]
    pub to: Option<String>,
    /// Enumerate the group of projectivities at `--at`.
    #[arg(long)]
    pub group: bool,
    /// Largest group order to enumerate.
    #[arg(long, value_name = "N", default_value_t = ngon_core::projmaps::DEFAULT_GROUP_CAP)]
    pub cap: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("ngon: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("ngon: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
