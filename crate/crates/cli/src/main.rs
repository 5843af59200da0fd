use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nmrl::harness::{self, RunConfig, SweepSpec};
use nmrl::pac::{self, PacParams};

#[derive(Parser)]
#[command(name = "nmrl", version, about = "Model-based RL on reward-machine tasks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one agent until its policy matches the oracle or the budget runs out.
    Train(TrainArgs),
    /// Run every configuration of a sweep file and write summary, curves, table and plots.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "sweep_out")]
        out: PathBuf,
    },
    /// PAC thresholds and sample bounds.
    Pac(PacArgs),
    /// Optimal policy statistics for a map/task pair.
    Oracle {
        #[arg(long)]
        map: String,
        #[arg(long)]
        task: String,
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        #[arg(long, default_value_t = 10_000)]
        episodes: usize,
        #[arg(long)]
        deterministic_eval: bool,
    },
    /// Plot an aggregated curves CSV as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "success rate")]
        title: String,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value = "map0_desk")]
    map: String,
    #[arg(long, default_value = "0")]
    task: String,
    #[arg(long, default_value = "qrmax")]
    agent: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    t_e: u64,
    #[arg(long, default_value_t = 1)]
    t_q: u64,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value_t = 500_000)]
    budget: u64,
    #[arg(long, default_value_t = 1000)]
    eval_every: u64,
    #[arg(long, default_value_t = 10_000)]
    eval_episodes: usize,
    /// Finite-horizon baselines' episode length (defaults to the map horizon).
    #[arg(long)]
    horizon: Option<usize>,
    /// Evaluation episode length (defaults to the map horizon).
    #[arg(long)]
    eval_horizon: Option<usize>,
    /// Value-iteration sweeps per planning call (defaults to the PAC horizon).
    #[arg(long)]
    vi_iterations: Option<usize>,
    #[arg(long)]
    deterministic_eval: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PacArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    r_max: f64,
    #[arg(long)]
    states: u64,
    #[arg(long, default_value_t = 4)]
    actions: u64,
    #[arg(long, default_value_t = 1)]
    q: u64,
    /// Bucket count; enables the bucket thresholds.
    #[arg(long)]
    buckets: Option<u64>,
    #[arg(long)]
    stochastic_rm: bool,
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.cmd {
        Cmd::Train(a) => {
            let cfg = RunConfig {
                map: a.map,
                task: a.task,
                agent: a.agent,
                seed: a.seed,
                t_e: a.t_e,
                t_q: a.t_q,
                gamma: a.gamma,
                budget: a.budget,
                eval_every: a.eval_every,
                eval_episodes: a.eval_episodes,
                horizon: a.horizon,
                eval_horizon: a.eval_horizon,
                vi_iterations: a.vi_iterations,
                deterministic_eval: a.deterministic_eval,
                ..RunConfig::default()
            };
            let res = harness::train_until_indistinguishable(&cfg)?;
            match a.out {
                Some(path) => res.write_csv(BufWriter::new(File::create(path)?))?,
                None => res.write_csv(io::stdout().lock())?,
            }
            eprintln!("wall clock: {:.2?}", res.wall_clock);
        }
        Cmd::Sweep { spec, out } => {
            let spec = SweepSpec::parse(&fs::read_to_string(spec)?)?;
            fs::create_dir_all(out.join("runs"))?;
            let rows = harness::sweep(&spec.configs());
            for r in &rows {
                if let Ok(res) = &r.result {
                    let name = format!("{}_{}_{}.csv", r.experiment, r.config.agent, r.config.seed);
                    res.write_csv(BufWriter::new(File::create(out.join("runs").join(name))?))?;
                }
            }
            harness::write_summary(&rows, File::create(out.join("results.csv"))?)?;
            let curves = harness::aggregate_curves(&rows);
            harness::write_curves(&curves, File::create(out.join("curves.csv"))?)?;
            fs::write(out.join("table.csv"), harness::summary_table(&rows))?;
            for e in &spec.experiments {
                let pts: Vec<_> = curves.iter().filter(|p| p.experiment == e.name).cloned().collect();
                if !pts.is_empty() {
                    harness::plot_curves(&pts, &e.name, &out.join(format!("{}.svg", e.name)))?;
                }
            }
            let failed = rows.iter().filter(|r| r.result.is_err()).count();
            eprintln!("{} runs, {} failed; output in {}", rows.len(), failed, out.display());
        }
        Cmd::Pac(a) => {
            let mut p = PacParams::new(a.epsilon, a.delta, a.gamma, a.r_max).sizes(a.states, a.actions, a.q);
            if a.stochastic_rm {
                p = p.stochastic_rm();
            }
            let mut out = io::stdout().lock();
            match a.buckets {
                Some(b) => {
                    let p = p.buckets(b);
                    let t = pac::bucket_thresholds(&p)?;
                    writeln!(out, "t_ET={} t_ER={} t_QT={} t_QR={}", t.t_et, t.t_er, t.t_qt, t.t_qr)?;
                    writeln!(out, "common_threshold={}", pac::bucket_common_threshold(&p)?)?;
                }
                None => {
                    let t = pac::thresholds(&p)?;
                    let n = pac::sample_bound(&p, t.m_e, t.m_q)?;
                    writeln!(out, "m_E={} m_Q={} T={}", t.m_e, t.m_q, t.t)?;
                    writeln!(out, "N={n} (~{:.6e})", n.to_f64())?;
                }
            }
        }
        Cmd::Oracle {
            map,
            task,
            gamma,
            episodes,
            deterministic_eval,
        } => {
            let cfg = RunConfig {
                map,
                task,
                gamma,
                eval_episodes: episodes,
                deterministic_eval,
                ..RunConfig::default()
            };
            let o = harness::oracle_for(&cfg)?;
            println!("success_rate={}", o.stats.success_rate);
            println!("mean_return={}", o.stats.mean_return);
            println!("mean_success_length={}", o.stats.mean_success_length);
        }
        Cmd::Plot { input, out, title } => {
            let pts = harness::read_curves(BufReader::new(File::open(input)?))?;
            harness::plot_curves(&pts, &title, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
