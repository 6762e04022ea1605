use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conedual::diagnostics::{almost_feasibility, boundedness, gordan_alternative, strong_duality_report, ReportOptions};
use conedual::gallery::{self, ConeMix, Family, Instance};
use conedual::instance::{self, InstanceFile};
use conedual::projection::{project, ProjectOptions};
use conedual::{ConicProgram, Side, SolverSettings};

mod output;
mod subspace;

#[derive(Parser, Debug)]
#[command(name = "conedual", version, about = "Duality diagnostics for conic programs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Relative primal/dual residual tolerance.
    #[arg(long, global = true)]
    tol_feas: Option<f64>,
    /// Relative duality gap tolerance.
    #[arg(long, global = true)]
    tol_gap: Option<f64>,
    /// Strict feasibility margin.
    #[arg(long, global = true)]
    margin: Option<f64>,
    /// Worker threads for `diagnose`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for sampled checks and the gallery.
    #[arg(long, global = true, env = "CONEDUAL_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Primal,
    Dual,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Primal => Side::Primal,
            SideArg::Dual => Side::Dual,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MixArg {
    Lp,
    Soc,
    Psd,
    Mixed,
}

impl From<MixArg> for ConeMix {
    fn from(m: MixArg) -> ConeMix {
        match m {
            MixArg::Lp => ConeMix::Lp,
            MixArg::Soc => ConeMix::Soc,
            MixArg::Psd => ConeMix::Psd,
            MixArg::Mixed => ConeMix::Mixed,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the dual program as an instance file.
    Dualize { input: Option<PathBuf> },
    /// Solve the primal-dual pair.
    Solve { input: Option<PathBuf> },
    /// Full strong duality report.
    Diagnose { input: Option<PathBuf> },
    /// Empty, bounded or unbounded feasible set.
    Bounded {
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "primal")]
        side: SideArg,
    },
    /// Recession direction versus strictly feasible dual recession point.
    Gordan { input: Option<PathBuf> },
    /// Smallest perturbation making one side feasible.
    Almost {
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "primal")]
        side: SideArg,
        /// Perturbation sizes to classify, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1e-6,1e-3")]
        eps: Vec<f64>,
    },
    /// Inequality description of the primal feasible set projected onto a
    /// subspace.
    Project {
        input: Option<PathBuf>,
        /// JSON file holding basis vectors of the subspace.
        #[arg(long)]
        subspace: PathBuf,
        /// Sampled projection-cone elements for non-polyhedral data.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Generate an instance.
    Gallery {
        /// example-adapted, planted, packing or random.
        family: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        m: Option<usize>,
        /// Profile for the random family.
        #[arg(long, default_value = "lp-small")]
        profile: String,
        /// Cone mix for the planted family.
        #[arg(long, value_enum, default_value = "lp")]
        mix: MixArg,
        /// Packing right-hand side with a negative entry.
        #[arg(long)]
        infeasible_b: bool,
    },
}

/// Exit status: 0 completed, 1 usage error, 2 invalid instance.
enum Failure {
    Usage(String),
    Instance(String),
}

fn read_input(path: &Option<PathBuf>) -> Result<String, Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Usage(format!("cannot read stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn load(path: &Option<PathBuf>) -> Result<InstanceFile, Failure> {
    let text = read_input(path)?;
    instance::parse_str(&text).map_err(|e| Failure::Instance(format!("invalid instance: {e}")))
}

fn settings(g: &Global) -> Result<SolverSettings, Failure> {
    let mut s = SolverSettings::default();
    for (name, v, slot) in [
        ("--tol-feas", g.tol_feas, &mut s.tol_feas),
        ("--tol-gap", g.tol_gap, &mut s.tol_gap),
        ("--margin", g.margin, &mut s.margin),
    ] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(Failure::Usage(format!("{name} must be a positive number")));
            }
            *slot = v;
        }
    }
    Ok(s)
}

fn generate(family: &str, cmd: &Command, seed: u64) -> Result<Instance, Failure> {
    let Command::Gallery {
        n,
        m,
        profile,
        mix,
        infeasible_b,
        ..
    } = cmd
    else {
        unreachable!("gallery arguments");
    };
    let fam: Family = family.parse().map_err(|e: conedual::Error| Failure::Usage(e.to_string()))?;
    let made = match fam {
        Family::ExampleAdapted => gallery::example_adapted(*n),
        Family::Planted => gallery::planted_strong_duality(*n, m.unwrap_or(*n), (*mix).into(), seed).map(|(i, _)| i),
        Family::Packing => gallery::packing_instance(m.unwrap_or(*n), *n, seed, !infeasible_b),
        Family::Random => gallery::random_program(profile, seed),
    };
    made.map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: &Cli, out: &mut impl Write) -> Result<(), Failure> {
    let st = settings(&cli.global)?;
    let json = cli.global.json;
    let program = |input: &Option<PathBuf>| -> Result<ConicProgram, Failure> { Ok(load(input)?.program) };
    let text = match &cli.command {
        Command::Dualize { input } => {
            let p = program(input)?;
            instance::to_string(&instance::program_json(&p.dualize(), None))
        }
        Command::Solve { input } => {
            let p = program(input)?;
            output::render(&output::solve_json(&p, &conedual::solve(&p, &st)), json)
        }
        Command::Diagnose { input } => {
            let p = program(input)?;
            let r = strong_duality_report(&p, &st, &ReportOptions { jobs: cli.global.jobs.max(1) });
            output::render(&r.to_json(), json)
        }
        Command::Bounded { input, side } => {
            let p = program(input)?;
            output::render(&output::bounded_json(&boundedness(&p, (*side).into(), None, &st)), json)
        }
        Command::Gordan { input } => {
            let p = program(input)?;
            output::render(&output::gordan_json(&gordan_alternative(&p, &st)), json)
        }
        Command::Almost { input, side, eps } => {
            let p = program(input)?;
            if eps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                return Err(Failure::Usage("--eps values must be nonnegative numbers".into()));
            }
            output::render(&output::almost_json(&almost_feasibility(&p, (*side).into(), eps, &st)), json)
        }
        Command::Project {
            input,
            subspace,
            samples,
        } => {
            let p = program(input)?;
            let l = subspace::load(subspace, p.x_space()).map_err(Failure::Usage)?;
            let opts = ProjectOptions {
                samples: *samples,
                seed: cli.global.seed,
            };
            let v = match project(&p, &l, &opts, &st) {
                Ok(h) => h.to_json(),
                Err(conedual::Error::Precondition(msg)) => serde_json::json!({ "precondition": "No", "message": msg }),
                Err(e) => return Err(Failure::Instance(e.to_string())),
            };
            output::render(&v, json)
        }
        Command::Gallery { family, .. } => {
            let inst = generate(family, &cli.command, cli.global.seed)?;
            instance::to_string(&instance::instance_json(&inst))
        }
    };
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Instance(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
