use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use single_ring::freeconv::{density_with, solve_sd_with, BranchPolicy, LawConfig, SolverConfig};
use single_ring::harness::{self, output, quantile_diagonal, ExperimentConfig};
use single_ring::measures::{symmetrize, DiscreteMeasure, SymmetricMeasure};
use single_ring::rdiagonal::eta_bound;
use single_ring::{Complex64, Error, Result};

#[derive(Parser)]
#[command(name = "single-ring", version, about = "Eigenvalue experiments for U·diag(T)·V ensembles")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the base seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory of the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = machine default).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue clouds of every (n, trial): eigenvalues.csv.
    Sample,
    /// Schwinger–Dyson solve at one point, or a density on the config's x-grid.
    SdSolve {
        #[arg(long)]
        rho: f64,
        /// Spectral parameter as `re,im`; omit to use the x-grid.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        /// Height above the real axis for the grid mode.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Follow the continued square root instead of aborting off the
        /// principal branch.
        #[arg(long)]
        continued: bool,
    },
    /// Radial log-potential and ring density with the edge report.
    RingDensity,
    /// Probe hit fractions and modulus extremes.
    SupportExp,
    /// Mean extreme eigenvalue moduli per n.
    StickingExp,
    /// Kolmogorov distance between solver and Monte Carlo laws.
    LawCompare,
    /// Admissible perturbation sizes: eta.csv.
    EtaBound {
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long)]
        c0: f64,
        #[arg(long)]
        s: f64,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_numeric() => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let path = g
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("this command needs --config <path>".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(o) = &g.out {
        cfg.output_dir = o.clone();
    }
    if let Some(t) = g.threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

fn report(path: &Path) {
    println!("wrote {}", path.display());
}

/// `Θ̃` of the quantile diagonal at the largest configured `n`.
fn solver_theta(cfg: &ExperimentConfig) -> Result<SymmetricMeasure> {
    let n = *cfg.n_list.last().expect("validated n_list");
    Ok(symmetrize(&DiscreteMeasure::uniform(&quantile_diagonal(&cfg.theta, n))?))
}

fn parse_z(text: &str) -> Result<Complex64> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Config(format!("bad number {s:?} in --z")));
    match parts.as_slice() {
        [re, im] => Ok(Complex64::new(parse(re)?, parse(im)?)),
        _ => Err(Error::Config(format!("--z expects re,im, got {text:?}"))),
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Sample => {
            let mut cfg = load_config(g)?;
            cfg.write_eigenvalues = true;
            let outcomes = harness::run_trials(&cfg, false)?;
            let mut records = Vec::new();
            for o in outcomes {
                match o {
                    Ok(r) => records.push(r),
                    Err(f) => eprintln!("trial {} at n = {} failed: {}", f.trial, f.n, f.error),
                }
            }
            report(&output::write_text(&cfg.output_dir, "eigenvalues.csv", &output::eigenvalues_csv(&records))?);
        }
        Command::SdSolve { rho, z, eps, continued } => {
            let cfg = load_config(g)?;
            let theta = solver_theta(&cfg)?;
            let solver = SolverConfig {
                branch: if continued { BranchPolicy::Continue } else { BranchPolicy::Principal },
                ..SolverConfig::default()
            };
            let text = match z {
                Some(z) => {
                    let st = solve_sd_with(&theta, rho, parse_z(&z)?, cfg.solver_tol, &solver)?;
                    format!(
                        "re,im,g_re,g_im,gu_re,gu_im,psi_re,psi_im,certificate,branch_ok\n{},{},{},{},{},{},{},{},{},{}\n",
                        st.z1.re, st.z1.im, st.g.re, st.g.im, st.g_u.re, st.g_u.im, st.psi.re, st.psi.im, st.certificate, st.branch_ok
                    )
                }
                None => {
                    let grid = cfg
                        .x_grid
                        .ok_or_else(|| Error::Config("sd-solve without --z needs x_grid in the config".into()))?
                        .values();
                    let law_cfg = LawConfig {
                        solver: SolverConfig::continued(),
                        tol: cfg.solver_tol,
                        ..LawConfig::default()
                    };
                    harness::with_threads(cfg.threads, || density_with(&theta, rho, &grid, eps, &law_cfg))??.to_csv()
                }
            };
            report(&output::write_text(&cfg.output_dir, "sd_solve.csv", &text)?);
        }
        Command::RingDensity => {
            let cfg = load_config(g)?;
            let (rd, rep) = harness::run_ring_density(&cfg)?;
            report(&output::write_text(&cfg.output_dir, "ring_density.csv", &rd.to_csv())?);
            report(&output::write_text(&cfg.output_dir, "potential.csv", &output::ring_potential_csv(&rd))?);
            report(&output::write_json(&cfg.output_dir, "ring_report.json", &rep)?);
        }
        Command::SupportExp => {
            let cfg = load_config(g)?;
            let rep = harness::run_support_experiment(&cfg)?;
            let dir = &cfg.output_dir;
            report(&output::write_text(dir, "support.csv", &output::support_csv(&rep))?);
            report(&output::write_text(dir, "moduli.csv", &output::support_moduli_csv(&rep))?);
            if cfg.log_sigma_min && !cfg.probes.is_empty() {
                report(&output::write_text(dir, "sigma_min.csv", &output::sigma_min_csv(&rep.records, &cfg.probes))?);
            }
            if cfg.write_eigenvalues {
                report(&output::write_text(dir, "eigenvalues.csv", &output::eigenvalues_csv(&rep.records))?);
            }
            report(&output::write_json(dir, "support_report.json", &rep)?);
            warn_failures(rep.failures.len());
        }
        Command::StickingExp => {
            let cfg = load_config(g)?;
            let t = harness::run_sticking_experiment(&cfg)?;
            report(&output::write_text(&cfg.output_dir, "sticking.csv", &output::sticking_csv(&t))?);
            report(&output::write_json(&cfg.output_dir, "sticking.json", &t)?);
            warn_failures(t.failures.len());
        }
        Command::LawCompare => {
            let cfg = load_config(g)?;
            let t = harness::run_law_comparison(&cfg)?;
            report(&output::write_text(&cfg.output_dir, "law_compare.csv", &output::law_csv(&t))?);
            report(&output::write_json(&cfg.output_dir, "law_compare.json", &t)?);
            warn_failures(t.failures.len());
        }
        Command::EtaBound { eps, c0, s, c } => {
            let rows = eps
                .iter()
                .map(|&e| eta_bound(e, c0, s, c).map_err(|e| Error::Config(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let dir = match (&g.out, &g.config) {
                (Some(o), _) => o.clone(),
                (None, Some(_)) => load_config(g)?.output_dir,
                (None, None) => PathBuf::from("out"),
            };
            report(&output::write_text(&dir, "eta.csv", &output::eta_csv(&rows))?);
        }
    }
    Ok(())
}

fn warn_failures(count: usize) {
    if count > 0 {
        eprintln!("{count} trial(s) failed; see the JSON report");
    }
}
