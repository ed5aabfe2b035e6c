//! `adelic-lab`: command-line front end for the exact cut-and-project toolkit.

mod commands;
mod config;
mod error;
mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use adelic_lab::modelsets::DEFAULT_POINT_CAP;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::error::CliError;
use crate::output::{Format, Meta};

#[derive(Parser, Debug)]
#[command(
    name = "adelic-lab",
    version,
    about = "Exact densities, sumsets and solenoids for adelic cut-and-project sets"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to a file instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Flat key=value file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Refuse to enumerate more points than this.
    #[arg(long, global = true, default_value_t = DEFAULT_POINT_CAP)]
    pub max_points: u64,
    #[command(subcommand)]
    pub cmd: Cmd,
}

/// Window `W`, dilation `u` and translation `τ` of a Farey set.
#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    /// Union of closed intervals, e.g. "[0,1/4];[1/2,3/4]".
    #[arg(long)]
    pub window: Option<String>,
    /// Valuation profile of `u`, e.g. "2:1,3:-1".
    #[arg(long, default_value = "")]
    pub dilate: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub translate: String,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// List the Farey points in a box, or count them along a schedule.
    Farey {
        #[command(flatten)]
        spec: SpecArgs,
        /// Box exponents, e.g. "2:1,3:1" for 2⁻¹ℤ₂ × 3⁻¹ℤ₃ × ∏ℤ_p.
        #[arg(long)]
        folner: Option<String>,
        /// Count along this schedule instead of listing.
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long, default_value_t = 4)]
        n_max: u64,
    },
    /// Density table along a Følner schedule.
    Density {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value = "2,3,5")]
        schedule: String,
        #[arg(long, default_value_t = 4)]
        n_max: u64,
        /// Cross-check counts by enumerating points.
        #[arg(long)]
        enumerate: bool,
        /// Tabulate P - P against P instead.
        #[arg(long)]
        doubling: bool,
    },
    /// Density of P - P against P.
    Doubling {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value = "2,3,5")]
        schedule: String,
        #[arg(long, default_value_t = 4)]
        n_max: u64,
    },
    /// The difference set P - P in a box, or its exceptional points.
    Diffset {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        folner: Option<String>,
        /// List lattice points of W - W missing from P - P.
        #[arg(long)]
        exceptional: bool,
    },
    /// Kneser's inequality on the circle for one arc set or a random suite.
    Kneser {
        /// Arcs "a,b;c,d" with endpoints in [0,1].
        #[arg(long)]
        arcs: Option<String>,
        #[arg(long)]
        classify: bool,
        #[arg(long)]
        suite: bool,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 6)]
        max_arcs: usize,
        #[arg(long, default_value_t = 360)]
        denom: u64,
        #[arg(long, default_value_t = 2520)]
        zn: u64,
    },
    /// Brunn–Minkowski check for a union of boxes.
    Bm {
        /// Boxes "[0,1]x[0,1];[1,2]x[0,1/2]".
        #[arg(long)]
        boxes: Option<String>,
        #[arg(long, default_value_t = 512)]
        grid: u32,
        /// Relative tolerance of the equality flag in dimension ≥ 2.
        #[arg(long, default_value = "1/50")]
        tolerance: String,
    },
    /// Volume of the r-fold sumset W^[r].
    SumsetR {
        #[arg(long)]
        window: Option<String>,
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long, default_value_t = 1024)]
        grid: u32,
    },
    /// Cut-and-project set of a lattice, listed in a box or as densities.
    Capset {
        /// Lattice, e.g. "Z[1/2](u=,t=1)".
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long)]
        window: Option<String>,
        #[arg(long = "box", default_value = "")]
        g_box: String,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long, default_value_t = 4)]
        n_max: u64,
    },
    /// Return times of a basepoint (g₀, h₀) to the window.
    ReturnTimes {
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long)]
        window: Option<String>,
        #[arg(long = "box", default_value = "")]
        g_box: String,
        /// A rational, or a valuation profile "p:k,..." when only that is known.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        g0: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        h0: String,
    },
    /// Covolume of a lattice, optionally estimated by counting.
    Covol {
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long = "box")]
        g_box: Option<String>,
        #[arg(long, default_value = "100")]
        t_bound: String,
    },
    /// Whether Γ ∩ (V₁ × W) = {0}.
    LatticeCheck {
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long, default_value = "")]
        v1: String,
        #[arg(long)]
        window: Option<String>,
    },
    /// Truncated solenoids.
    Solenoid {
        #[command(subcommand)]
        cmd: SolCmd,
    },
    /// Følner ratios m(F_n K)/m(F_n) along a schedule.
    FolnerCheck {
        #[arg(long, default_value = "2,3,5")]
        schedule: String,
        #[arg(long, default_value = "")]
        k: String,
        /// Also report ratios for the U-adapted core.
        #[arg(long)]
        u: Option<String>,
        #[arg(long, default_value_t = 6)]
        n_max: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum SolCmd {
    /// Angles of ρ(r).
    Rho {
        #[arg(long, default_value = "2^8")]
        schedule: String,
        #[arg(long, allow_hyphen_values = true)]
        r: Option<String>,
    },
    /// Lift a compatible point to (g, r) and verify Φ(g, r).
    Lift {
        #[arg(long, default_value = "2^8")]
        schedule: String,
        /// Angles "θ1;θ2;...".
        #[arg(long)]
        point: Option<String>,
    },
    /// Compare ρ(W) with the box of centered intervals on a grid.
    SectionCheck {
        #[arg(long, default_value = "2^8")]
        schedule: String,
        #[arg(long)]
        window: Option<String>,
        #[arg(long, default_value_t = 64)]
        grid: u64,
    },
    /// Kernel elements (γ, -γ) with γ ∈ p^v1 ℤ_p and -γ ∈ W.
    Kernel {
        #[arg(long, default_value = "2^8")]
        schedule: String,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        v1: i64,
        #[arg(long)]
        window: Option<String>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ADELIC_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("ADELIC_LAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// Parses the command line, folding in the config file if one is named.
fn parse(args: Vec<OsString>) -> Result<(Cli, Meta), CliError> {
    let root = Cli::command();
    let first = root.clone().try_get_matches_from(&args).unwrap_or_else(|e| e.exit());
    let (leaf_m, leaf_cmd, path) = config::leaf(&first, &root);
    let mut full = args.clone();
    if let Some(cfg) = leaf_m.get_one::<PathBuf>("config") {
        let entries = config::parse_file(cfg)?;
        full.extend(config::extra_args(
            &entries,
            &cfg.display().to_string(),
            &root,
            leaf_cmd,
            leaf_m,
        )?);
    }
    let matches = root.clone().try_get_matches_from(&full).unwrap_or_else(|e| e.exit());
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    let (leaf_m, leaf_cmd, _) = config::leaf(&matches, &root);
    let mut echo = Vec::new();
    for arg in leaf_cmd.get_arguments() {
        let id = arg.get_id().as_str();
        if matches!(id, "help" | "version") {
            continue;
        }
        if let Some(vals) = leaf_m.get_raw(id) {
            let vals: Vec<String> = vals.map(|v| v.to_string_lossy().into_owned()).collect();
            let key = arg.get_long().unwrap_or(id).to_string();
            echo.push((key, vals.join(",")));
        }
    }
    let meta = Meta {
        command: path.join(" "),
        seed: cli.seed,
        config: echo,
    };
    Ok((cli, meta))
}

fn run(args: Vec<OsString>) -> Result<(), CliError> {
    configure_threads()?;
    let (cli, meta) = parse(args)?;
    let table = commands::dispatch(&cli)?;
    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    output::render(&table, &meta, cli.format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.advisory() {
                eprintln!("hint: {hint}");
            }
            e.exit_code()
        }
    }
}
