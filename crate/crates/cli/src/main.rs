use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use hess_core::config::ToolkitConfig;
use hess_core::cycle::DriveCycle;
use hess_core::fis::MfGenome;
use hess_core::moo::{optimize_with, read_front, write_archive, write_front, write_history};
use hess_core::sim::{
    compare_designs, simulate, simulate_battery_only, write_trace, HessDesign, SimParams,
    SimResult,
};

#[derive(Parser)]
#[command(name = "hess", version, about = "Battery/supercapacitor sizing and fuzzy EMS co-design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, short, env = "HESS_OUT_DIR", default_value = "out")]
    out: PathBuf,
    /// Override the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one design over the drive cycle and export its trace.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// `N`, `N:g1,...,g28` or `front.csv@ROW` (1-based data row).
        #[arg(long, short)]
        design: String,
        /// Ignore the controller and let the battery serve all demand.
        #[arg(long)]
        battery_only: bool,
    },
    /// Search sizing and membership functions for the Pareto front.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
    },
    /// Run two designs with the same n_sc and report relative changes of B over A.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Exactly two designs, A then B.
        #[arg(long, short, num_args = 1, required = true)]
        design: Vec<String>,
    },
}

struct Setup {
    cycle: DriveCycle,
    params: SimParams,
    config: ToolkitConfig,
    out: PathBuf,
}

fn setup(common: &Common) -> Result<Setup> {
    let mut config = match &common.config {
        Some(p) => ToolkitConfig::load(p)?,
        None => ToolkitConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let cycle = config.drive_cycle()?;
    let params = config.sim_params()?;
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("cannot create output directory {}", common.out.display()))?;
    Ok(Setup {
        cycle,
        params,
        config,
        out: common.out.clone(),
    })
}

fn parse_design(s: &str) -> Result<HessDesign> {
    if let Some((file, row)) = s.rsplit_once('@') {
        let row: usize = row
            .parse()
            .with_context(|| format!("design `{s}`: row must be a positive integer"))?;
        let rows = read_front(Path::new(file))?;
        ensure!(
            row >= 1 && row <= rows.len(),
            "design `{s}`: row {row} out of range, {file} has {} rows",
            rows.len()
        );
        return Ok(rows[row - 1].design.clone());
    }
    let (n, genes) = match s.split_once(':') {
        Some((n, g)) => (n, Some(g)),
        None => (s, None),
    };
    let n_sc: usize = n
        .trim()
        .parse()
        .with_context(|| format!("design `{s}`: n_sc must be a non-negative integer"))?;
    let genome = match genes {
        None => MfGenome::initial(),
        Some(g) => {
            let genes = g
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .with_context(|| format!("design `{s}`: genes must be numbers"))?;
            MfGenome::new(genes).with_context(|| format!("design `{s}`"))?
        }
    };
    Ok(HessDesign::new(n_sc, genome)?)
}

const SUMMARY_HEADER: &str = "label,n_sc,n_bat,feasible,j_laps,j_lifebat,avg_cell_current,ah_per_lap";

fn summary_row(label: &str, n_sc: usize, r: &SimResult) -> String {
    format!(
        "{label},{n_sc},{},{},{},{},{},{}",
        r.n_bat, r.feasible, r.j_laps, r.j_lifebat, r.avg_cell_current, r.ah_per_lap
    )
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn export_trace(path: &Path, r: &SimResult) -> Result<()> {
    if let Some(t) = &r.trace {
        write_trace(path, t)?;
    }
    Ok(())
}

fn print_result(label: &str, n_sc: usize, r: &SimResult) {
    if r.feasible {
        println!(
            "{label}: n_sc={n_sc} n_bat={} laps={:.4} lifebat={:.6e} avg_cell_current={:.4} A",
            r.n_bat, r.j_laps, r.j_lifebat, r.avg_cell_current
        );
    } else {
        println!("{label}: n_sc={n_sc} infeasible (mass budget leaves no room for battery cells)");
    }
}

fn run_simulate(common: &Common, design: &str, battery_only: bool) -> Result<()> {
    let s = setup(common)?;
    let d = parse_design(design)?;
    let r = if battery_only {
        simulate_battery_only(d.n_sc, &s.cycle, &s.params, true)?
    } else {
        simulate(&d, &s.cycle, &s.params, true)?
    };
    export_trace(&s.out.join("trace.csv"), &r)?;
    let label = if battery_only { "battery_only" } else { "design" };
    write_text(
        &s.out.join("summary.csv"),
        &format!("{SUMMARY_HEADER}\n{}\n", summary_row(label, d.n_sc, &r)),
    )?;
    print_result(label, d.n_sc, &r);
    Ok(())
}

fn run_optimize(common: &Common, population: Option<usize>, generations: Option<usize>) -> Result<()> {
    let s = setup(common)?;
    let mut cfg = s.config.moo_config();
    if let Some(p) = population {
        cfg.population = p;
    }
    if let Some(g) = generations {
        cfg.generations = g;
    }
    let result = optimize_with(&cfg, &s.cycle, &s.params, |g| {
        eprintln!(
            "gen {:>4}  hv {:.6e}  front {:>3}  best laps {:.4}  best lifebat {:.6e}",
            g.generation, g.hypervolume, g.front_size, g.best_laps, g.best_lifebat
        );
    })?;
    write_front(&s.out.join("front.csv"), &result.front, cfg.generations)?;
    write_archive(&s.out.join("archive.csv"), &result.archive)?;
    write_history(&s.out.join("hypervolume.csv"), &result.history)?;
    println!(
        "front of {} designs after {} generations ({} evaluations), written to {}",
        result.front.len(),
        cfg.generations,
        result.archive.len(),
        s.out.display()
    );
    Ok(())
}

fn run_compare(common: &Common, designs: &[String]) -> Result<()> {
    if designs.len() != 2 {
        bail!("compare needs exactly two --design values, got {}", designs.len());
    }
    let a = parse_design(&designs[0])?;
    let b = parse_design(&designs[1])?;
    let s = setup(common)?;
    let c = compare_designs(&a, &b, &s.cycle, &s.params, true)?;
    export_trace(&s.out.join("trace_a.csv"), &c.a)?;
    export_trace(&s.out.join("trace_b.csv"), &c.b)?;
    let mut text = String::new();
    writeln!(text, "{SUMMARY_HEADER},laps_change_pct,lifebat_change_pct").unwrap();
    writeln!(text, "{},,", summary_row("a", a.n_sc, &c.a)).unwrap();
    writeln!(
        text,
        "{},{},{}",
        summary_row("b", b.n_sc, &c.b),
        c.laps_change_pct,
        c.lifebat_change_pct
    )
    .unwrap();
    write_text(&s.out.join("compare.csv"), &text)?;
    print_result("a", a.n_sc, &c.a);
    print_result("b", b.n_sc, &c.b);
    println!(
        "laps change {:+.3}%  lifebat change {:+.3}%",
        c.laps_change_pct, c.lifebat_change_pct
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate {
            common,
            design,
            battery_only,
        } => run_simulate(common, design, *battery_only),
        Command::Optimize {
            common,
            population,
            generations,
        } => run_optimize(common, *population, *generations),
        Command::Compare { common, design } => run_compare(common, design),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already carry their causes in the message
            let mut msg = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {}", msg.replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
