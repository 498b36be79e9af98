use advscen::adversary::{attack, run_planner, AttackConfig, AttackRecord};
use advscen::adversary::optim::Algorithm;
use advscen::autonomy::StackKind;
use advscen::eval::{benchmark, curate, plot, transfer};
use advscen::scenario::io::{load_scenario, save_scenario};
use advscen::scenario::{RandomSource, Scenario};
use advscen::sensorsim::format::save_sweep;
use advscen::{toy, Error, Result};
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Adversarial scenario generation against driving stacks.
#[derive(Parser)]
#[command(name = "advscen", version)]
struct Cli {
    /// Root seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the sweeps of generated scenarios to this directory.
    #[arg(long, global = true, value_name = "DIR")]
    dump_sweeps: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pick the most interactive 6 s window of a long log.
    Curate {
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attack one scenario and write the record and the worst case.
    Attack {
        /// Scenario file, or `toy:NAME` for a built-in scene.
        scenario: String,
        #[command(flatten)]
        opts: AttackOpts,
        #[arg(long, default_value = "attack_out")]
        out: PathBuf,
    },
    /// Run attacks over scenarios x algorithms x actor counts x objectives.
    Benchmark {
        /// Scenario files, `toy:NAME`, or `toy` for the whole suite.
        scenarios: Vec<String>,
        #[command(flatten)]
        opts: AttackOpts,
        /// Comma-separated algorithms (defaults to the config's).
        #[arg(long, value_delimiter = ',')]
        algos: Vec<Algorithm>,
        /// Comma-separated perturbed-actor counts.
        #[arg(long, value_delimiter = ',')]
        ms: Vec<usize>,
        /// Comma-separated objective masks (M0..M5).
        #[arg(long, value_delimiter = ',')]
        objectives: Vec<String>,
        #[arg(long, default_value = "benchmark_out")]
        out: PathBuf,
    },
    /// Attack with each stack, replay on every stack.
    Transfer {
        /// Scenario files, `toy:NAME`, or `toy` for the whole suite.
        scenarios: Vec<String>,
        #[command(flatten)]
        opts: AttackOpts,
        #[arg(long, default_value = "transfer_out")]
        out: PathBuf,
    },
    /// Render best-so-far curves from attack records, or a scenario.
    Plot {
        /// Attack record JSON files.
        #[arg(long, num_args = 1..)]
        records: Vec<PathBuf>,
        /// Scenario to render top-down (file or `toy:NAME`).
        #[arg(long)]
        scenario: Option<String>,
        /// Also draw this stack's plan on the scenario.
        #[arg(long)]
        stack: Option<StackKind>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct AttackOpts {
    /// TOML attack config; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    stack: Option<StackKind>,
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    n_sample: Option<usize>,
}

impl AttackOpts {
    fn config(&self, seed: Option<u64>) -> Result<AttackConfig> {
        let mut c = match &self.config {
            Some(p) => AttackConfig::from_toml_file(p)?,
            None => AttackConfig::default(),
        };
        if let Some(v) = self.algo {
            c.algorithm = v;
        }
        if let Some(v) = self.budget {
            c.budget = Some(v);
        }
        if let Some(v) = self.m {
            c.m = v;
        }
        if let Some(v) = self.stack {
            c.stack = v;
        }
        if let Some(v) = &self.objective {
            c.objective = v.parse()?;
        }
        if let Some(v) = self.n_sample {
            c.n_sample = v;
        }
        if let Some(v) = seed {
            c.seed = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn load_one(spec: &str) -> Result<Vec<(String, Scenario)>> {
    if spec == "toy" {
        return Ok(toy::suite().into_iter().map(|(n, s)| (n.to_string(), s)).collect());
    }
    if let Some(name) = spec.strip_prefix("toy:") {
        let sc = toy::by_name(name).ok_or_else(|| Error::Config(format!("no toy scene named {name:?}")))?;
        return Ok(vec![(name.to_string(), sc)]);
    }
    let path = Path::new(spec);
    let name = path.file_stem().map_or(spec.to_string(), |s| s.to_string_lossy().into_owned());
    Ok(vec![(name, load_scenario(path)?)])
}

fn load_all(specs: &[String]) -> Result<Vec<(String, Scenario)>> {
    let mut out = Vec::new();
    for s in specs {
        out.extend(load_one(s)?);
    }
    Ok(out)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn dump_sweeps(dir: &Path, prefix: &str, sweeps: &[advscen::sensorsim::Sweep]) -> Result<()> {
    create_dir(dir)?;
    for s in sweeps {
        save_sweep(&dir.join(format!("{prefix}_frame{}.csv", s.frame)), s)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Curate { log, out } => {
            let log = load_scenario(&log)?;
            let c = curate(&log, &RandomSource::new(cli.seed.unwrap_or(0)))?;
            println!("window,start_step,collision_fraction");
            for (i, (start, score)) in c.scores.iter().enumerate() {
                println!("{i},{start},{score:.4}");
            }
            println!("chosen window starts at step {}", c.start);
            save_scenario(&c.scenario, &out)?;
        }
        Command::Attack { scenario, opts, out } => {
            let config = opts.config(cli.seed)?;
            let scenes = load_one(&scenario)?;
            create_dir(&out)?;
            for (name, sc) in scenes {
                let o = attack(&sc, &config)?;
                let r = &o.record;
                println!(
                    "{name}: {} queries, actors {:?}, baseline {:.3}, best {:.3} at query {}, collision steps {}",
                    r.queries.len(),
                    r.actor_ids,
                    r.baseline().value,
                    r.best_query().value,
                    r.best + 1,
                    r.best_query().collision_steps
                );
                write(&out.join(format!("{name}_record.json")), &r.to_json())?;
                save_scenario(&o.scenario, &out.join(format!("{name}_adversarial.json")))?;
                if let Some(dir) = &cli.dump_sweeps {
                    dump_sweeps(dir, &name, &o.sweeps)?;
                }
            }
        }
        Command::Benchmark {
            scenarios,
            opts,
            algos,
            ms,
            objectives,
            out,
        } => {
            let base = opts.config(cli.seed)?;
            let scenes = load_all(&scenarios)?;
            let mut configs = vec![base.clone()];
            if !algos.is_empty() {
                configs = configs.iter().flat_map(|c| benchmark::with_algorithms(c, &algos, None)).collect();
            }
            if !ms.is_empty() {
                configs = configs.iter().flat_map(|c| benchmark::with_actor_counts(c, &ms)).collect();
            }
            if !objectives.is_empty() {
                let masks = objectives.iter().map(|s| s.parse()).collect::<Result<Vec<_>>>()?;
                configs = configs.iter().flat_map(|c| benchmark::with_objectives(c, &masks)).collect();
            }
            let results = benchmark::run(&scenes, &configs);
            create_dir(&out)?;
            benchmark::raw_table(&results).write_csv(&out.join("cells.csv"))?;
            let groups: [(&str, &str, fn(&benchmark::CellResult) -> String); 3] = [
                ("algorithms", "algorithm", |c| c.algorithm.to_string()),
                ("actor_counts", "m", |c| c.m.to_string()),
                ("objectives", "objective", |c| c.objective.clone()),
            ];
            for (file, key, f) in groups {
                let t = benchmark::summary_table(file, key, &benchmark::summarize(&results, f));
                t.write_csv(&out.join(format!("{file}.csv")))?;
                println!("{}", t.to_text());
            }
            let failed = results.iter().filter(|r| r.failed()).count();
            if failed > 0 {
                eprintln!("{failed} cell(s) failed; see cells.csv");
            }
        }
        Command::Transfer { scenarios, opts, out } => {
            let base = opts.config(cli.seed)?;
            let scenes = load_all(&scenarios)?;
            let m = transfer::transfer(&scenes, &StackKind::ALL, &base)?;
            create_dir(&out)?;
            let t = m.table();
            t.write_csv(&out.join("transfer.csv"))?;
            write(&out.join("transfer.json"), &serde_json::to_string_pretty(&m).expect("matrix serializes"))?;
            println!("{}", t.to_text());
        }
        Command::Plot {
            records,
            scenario,
            stack,
            out,
        } => {
            if let Some(spec) = scenario {
                let (name, sc) = load_one(&spec)?.into_iter().next().expect("one scenario");
                let plan = match stack {
                    Some(k) => {
                        let cfg = AttackConfig {
                            stack: k,
                            ..AttackConfig::default()
                        };
                        let (_, sweeps, plan) = run_planner(&sc, &BTreeMap::new(), &k, &cfg)?;
                        if let Some(dir) = &cli.dump_sweeps {
                            dump_sweeps(dir, &name, &sweeps)?;
                        }
                        Some(plan.trajectory)
                    }
                    None => None,
                };
                plot::save_svg(&out, &plot::scene_svg(&name, &sc, plan.as_ref()))?;
            } else if !records.is_empty() {
                let mut curves = Vec::new();
                for p in &records {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    let r: AttackRecord = serde_json::from_str(&text).map_err(|e| Error::Parse {
                        field: p.display().to_string(),
                        message: e.to_string(),
                    })?;
                    curves.push((format!("{} ({})", r.algorithm, r.planner), r.queries.iter().map(|q| q.value).collect()));
                }
                plot::save_svg(&out, &plot::best_so_far_svg("best so far", &curves))?;
            } else {
                return Err(Error::Config("plot needs --records or --scenario".into()));
            }
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
