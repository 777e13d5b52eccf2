//! Command-line front end. Exit status 0 on success, 1 on domain errors and
//! 2 on usage errors; every error line starts with `error[CODE]:`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimator::{self, output, Problem, RunConfig};
use crate::fem::TriMesh;
use crate::field::ParameterVector;
use crate::qmc::{load_gen_vector, save_gen_vector, InterlacedLatticeRule, SpodWeights};
use crate::tfrac::write_states;

#[derive(Debug, Parser)]
#[command(name = "fracuq", version, about = "QMC expected values for time-fractional diffusion with a random diffusivity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the structured unit-square mesh.
    Mesh {
        #[arg(long)]
        ndiv: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an interlaced lattice point set as CSV.
    Points {
        #[arg(long, default_value_t = 2)]
        b: u32,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        beta: usize,
        #[arg(long)]
        z: usize,
        /// Generating-vector file; CBC with the example-field weights when absent.
        #[arg(long)]
        genvec: Option<PathBuf>,
        /// Also save the generating vector.
        #[arg(long)]
        save_genvec: Option<PathBuf>,
        /// Shift to [−½, ½)^z.
        #[arg(long)]
        centered: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One trajectory L(u_h(t_n)) for a fixed parameter vector.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated y (missing entries are zero).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Vec<f64>,
    },
    /// QMC estimate of E(t_n) with its standard deviation.
    Estimate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Convergence table against a reference rule.
    Table {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long = "N", value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long = "Nref")]
        n_ref: Option<usize>,
    },
    /// Truncation error |E_z(T) − E_zref(T)|.
    Truncation {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',')]
        z: Vec<usize>,
    },
    /// Simultaneous h and τ refinement at a fixed y.
    Refine {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Validate a config and print the resolved parameters.
    Check {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Override `section.key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Worker threads (default: FRACUQ_THREADS, then the config, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

/// Effective configuration of a config-driven subcommand.
struct Resolved {
    config: RunConfig,
    threads: usize,
    verbose: u8,
}

impl RunArgs {
    fn resolve(&self) -> std::result::Result<Resolved, CliError> {
        if !self.config.is_file() {
            return Err(CliError::Usage(format!("config file {} not found", self.config.display())));
        }
        let mut config = RunConfig::load(&self.config)?.with_overrides(&self.overrides)?;
        if let Some(o) = &self.out {
            config.output.dir = o.clone();
        }
        let env = std::env::var("FRACUQ_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|t| *t > 0);
        let threads = self
            .threads
            .or(env)
            .or(config.estimator.threads)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        config.estimator.threads = Some(threads);
        Ok(Resolved { config, threads, verbose: self.verbose })
    }
}

impl Resolved {
    fn dir(&self) -> &Path {
        &self.config.output.dir
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf> {
        let p = self.dir().join(name);
        output::write_text(&p, text)?;
        Ok(p)
    }

    fn echo(&self) -> Result<()> {
        self.write("resolved-config.json", &self.config.to_json()).map(|_| ())
    }
}

enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(err, "error[E_USAGE]: {first}");
            return 2;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "error[E_USAGE]: {m}");
            2
        }
        Err(CliError::Domain(e)) => {
            let _ = writeln!(err, "error[{}]: {}", e.code(), e.to_string().replace('\n', " "));
            1
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<(), CliError> {
    let io = |e: std::io::Error| Error::io("<stdout>", e);
    match cmd {
        Command::Mesh { ndiv, out: path } => {
            let mesh = TriMesh::unit_square(ndiv)?;
            match path {
                Some(p) => mesh.write(&p)?,
                None => out.write_all(mesh.to_text().as_bytes()).map_err(io)?,
            }
        }
        Command::Points { b, m, beta, z, genvec, save_genvec, centered, out: path } => {
            let rule = match genvec {
                Some(p) => {
                    let r = load_gen_vector(&p)?;
                    if (r.b(), r.m(), r.beta()) != (b, m, beta) {
                        return Err(CliError::Usage(format!("{} holds a rule with b={} m={} beta={}", p.display(), r.b(), r.m(), r.beta())));
                    }
                    r.truncated(z)?
                }
                None => {
                    let q = (1..).find(|q| q * (q + 1) / 2 >= z).unwrap();
                    let field = crate::field::RandomField::example(q, Default::default())?;
                    InterlacedLatticeRule::cbc(b, m, beta, z, &SpodWeights::from_field(&field))?
                }
            };
            if let Some(p) = save_genvec {
                save_gen_vector(&rule, &p)?;
            }
            let pts = rule.points()?;
            let text = if centered {
                let mut s = String::new();
                for y in crate::qmc::shift_to_centered(&pts) {
                    s.push_str(&y.coords().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
                    s.push('\n');
                }
                s
            } else {
                pts.to_csv()
            };
            match path {
                Some(p) => output::write_text(&p, &text)?,
                None => out.write_all(text.as_bytes()).map_err(io)?,
            }
        }
        Command::Solve { run, y } => {
            let r = run.resolve()?;
            r.echo()?;
            let p = Problem::new(&r.config)?;
            if y.len() > p.field().len() {
                return Err(CliError::Usage(format!("--y has {} entries, the run has z = {}", y.len(), p.field().len())));
            }
            ParameterVector::new(y.clone())?;
            let t = p.trajectory(&y, r.config.estimator.dump_fields)?;
            let f = r.write("trajectory.csv", &output::trajectory_csv(&t))?;
            log(err, r.verbose, &format!("wrote {}", f.display()));
            if let Some(states) = &t.states {
                let path = r.dir().join("states.bin");
                write_states(&path, states)?;
                log(err, r.verbose, &format!("wrote {}", path.display()));
            }
            writeln!(out, "L(u_h(T)) = {}", t.functional.last().unwrap()).map_err(io)?;
        }
        Command::Estimate { run } => {
            let r = run.resolve()?;
            r.echo()?;
            let p = Problem::new(&r.config)?;
            let s = p.estimate(r.threads)?;
            let f = r.write("series.csv", &output::series_csv(&s))?;
            if r.config.output.gnuplot {
                r.write("series.gp", &output::gnuplot_script("series.csv", "series.png"))?;
            }
            log(err, r.verbose, &format!("wrote {}", f.display()));
            writeln!(out, "N = {}  z = {}  E(T) = {}  std(T) = {}", s.n_points, s.z, s.final_value(), s.std.last().unwrap()).map_err(io)?;
        }
        Command::Table { run, n_list, n_ref } => {
            let mut r = run.resolve()?;
            if !n_list.is_empty() {
                r.config.estimator.n_list = n_list;
            }
            if let Some(n) = n_ref {
                r.config.estimator.n_ref = n;
            }
            r.echo()?;
            let p = Problem::new(&r.config)?;
            let e = &r.config.estimator;
            let t = estimator::convergence_table(&p, &e.n_list, e.n_ref, r.threads)?;
            let csv = output::table_csv(&t.rows, &t.reference);
            r.write("table.csv", &csv)?;
            r.write("series.csv", &output::series_csv(&t.reference))?;
            if r.config.output.gnuplot {
                r.write("series.gp", &output::gnuplot_script("series.csv", "series.png"))?;
            }
            out.write_all(csv.as_bytes()).map_err(io)?;
        }
        Command::Truncation { run, z } => {
            let mut r = run.resolve()?;
            if !z.is_empty() {
                r.config.estimator.z_list = z;
            }
            r.echo()?;
            let p = Problem::new(&r.config)?;
            let s = estimator::truncation_study(&p, &r.config.estimator.z_list, r.config.qmc.m, r.threads)?;
            let csv = output::truncation_csv(&s);
            r.write("truncation.csv", &csv)?;
            out.write_all(csv.as_bytes()).map_err(io)?;
            writeln!(out, "# slope {}", s.slope).map_err(io)?;
        }
        Command::Refine { run, levels } => {
            let mut r = run.resolve()?;
            if let Some(l) = levels {
                r.config.estimator.refine_levels = l;
            }
            r.echo()?;
            let rows = estimator::spacetime_refinement_study(&r.config, r.config.estimator.refine_levels, &[])?;
            let csv = output::refinement_csv(&rows);
            r.write("refinement.csv", &csv)?;
            out.write_all(csv.as_bytes()).map_err(io)?;
        }
        Command::Check { run } => {
            let r = run.resolve()?;
            r.echo()?;
            let c = &r.config;
            let field = c.field.build()?.truncated(c.z())?;
            let report = field.verify_bounds(33, 64, c.estimator.seed)?;
            let mesh_desc = match &c.space.mesh {
                Some(p) => format!("mesh {}", p.display()),
                None => format!("n_div {} (h = {:.4})", c.space.n_div, std::f64::consts::SQRT_2 / c.space.n_div as f64),
            };
            let text = format!(
                "alpha = {}\nT = {}\nz = {}\ngamma = {}\nN_t = {}\n{mesh_desc}\nN = {}^{} = {}\nbeta = {}\nkappa declared [{}, {}], observed [{}, {}], violations {}\nthreads = {}\n",
                c.model.alpha,
                c.model.t_final,
                c.z(),
                c.gamma(),
                c.time.steps,
                c.qmc.b,
                c.qmc.m,
                (c.qmc.b as usize).pow(c.qmc.m as u32),
                c.qmc.beta,
                report.declared.0,
                report.declared.1,
                report.observed_min,
                report.observed_max,
                report.violation_count,
                r.threads
            );
            out.write_all(text.as_bytes()).map_err(io)?;
            if report.observed_min <= 0.0 {
                return Err(Error::Config(format!("diffusivity reaches {} (not positive)", report.observed_min)).into());
            }
        }
    }
    Ok(())
}

fn log(err: &mut dyn Write, verbose: u8, msg: &str) {
    if verbose > 0 {
        let _ = writeln!(err, "{msg}");
    }
}
