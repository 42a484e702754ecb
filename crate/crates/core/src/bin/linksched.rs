use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use linksched::harness::{
    generate_instance, run_experiment, sweep, write_sweep, Algorithm, ConstantOverrides, ExperimentSpec, GenSpec,
    InstanceSource, OracleSpec,
};
use linksched::oracle::{brute_force_opt, centralized_greedy, DEFAULT_MAX_M};
use linksched::scheduler::{Preset, SchedulerConfig};
use linksched::sinr::{independence_via_affectance, is_independent};
use linksched::{Duplex, Instance, LinkId};

/// Exit status when a run completed but produced an incorrect schedule.
const CORRECTNESS_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "linksched", version, about = "Distributed SINR link scheduling experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        shape: Shape,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and write the metrics CSV.
    Run(RunArgs),
    /// Exact optimum and the sequential greedy for an instance.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_M)]
        max_m: usize,
    },
    /// Check that a set of links is simultaneously feasible.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        /// A result file containing a `selected` array.
        #[arg(long, conflicts_with = "links")]
        schedule: Option<PathBuf>,
        /// Comma-separated link ids.
        #[arg(long, value_delimiter = ',')]
        links: Vec<u32>,
    },
    /// Run generated instances over several sizes, algorithms and duplex modes.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "distributed-nonadaptive,distributed-adaptive")]
        algorithms: Vec<Algorithm>,
        #[arg(long, value_delimiter = ',', default_value = "half,full")]
        duplex: Vec<Duplex>,
        #[arg(long, value_parser = parse_seeds)]
        seeds: Seeds,
        #[arg(long, default_value = "theory-safe")]
        preset: Preset,
        #[arg(long, default_value_t = 100.0)]
        side: f64,
        #[arg(long, default_value_t = 1.0)]
        d_min: f64,
        #[arg(long, default_value_t = 8.0)]
        d_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Copy)]
struct Shape {
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 100.0)]
    side: f64,
    #[arg(long, default_value_t = 1.0)]
    d_min: f64,
    #[arg(long, default_value_t = 8.0)]
    d_max: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec (TOML). Other experiment flags are ignored when given.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["spec", "m"])]
    instance: Option<PathBuf>,
    /// Generate one instance per seed with this many links.
    #[arg(long, conflicts_with = "spec")]
    m: Option<usize>,
    #[arg(long, default_value_t = 100.0)]
    side: f64,
    #[arg(long, default_value_t = 1.0)]
    d_min: f64,
    #[arg(long, default_value_t = 8.0)]
    d_max: f64,
    #[arg(long, default_value = "distributed-nonadaptive")]
    algorithm: Algorithm,
    #[arg(long, default_value = "full")]
    duplex: Duplex,
    #[arg(long, default_value = "theory-safe")]
    preset: Preset,
    /// Seeds: `7`, `1,2,3` or `0..100`.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<Seeds>,
    /// Compare against the exact optimum for instances up to this size.
    #[arg(long)]
    oracle_max_m: Option<usize>,
    #[arg(long)]
    c4: Option<u32>,
    #[arg(long)]
    c5: Option<u32>,
    /// Metrics CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one JSON result file per seed here.
    #[arg(long)]
    results_dir: Option<PathBuf>,
    /// Write simulator traces (NDJSON) per seed and phase here.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> std::result::Result<Seeds, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("{e}"))?;
        if a >= b {
            return Err(format!("empty seed range {s}"));
        }
        return Ok(Seeds((a..b).collect()));
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| format!("bad seed {t:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Seeds)
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => Ok(io::stdout().write_all(bytes)?),
    }
}

fn spec_from_args(a: &RunArgs) -> Result<ExperimentSpec> {
    if let Some(p) = &a.spec {
        return ExperimentSpec::load(p).with_context(|| format!("loading {}", p.display()));
    }
    let instance = match (&a.instance, a.m) {
        (Some(p), _) => InstanceSource::File(p.clone()),
        (None, Some(m)) => InstanceSource::Generate(GenSpec {
            m,
            side: a.side,
            d_min: a.d_min,
            d_max: a.d_max,
        }),
        (None, None) => bail!("give --spec, --instance or --m"),
    };
    let randomized = a.algorithm != Algorithm::Centralized || matches!(instance, InstanceSource::Generate(_));
    let seeds = match (&a.seeds, randomized) {
        (Some(s), _) => s.0.clone(),
        (None, false) => vec![0],
        (None, true) => bail!("--seeds is required for randomized runs"),
    };
    let spec = ExperimentSpec {
        instance,
        algorithm: a.algorithm,
        duplex: a.duplex,
        seeds,
        preset: a.preset,
        oracle: a.oracle_max_m.map(|max_m| OracleSpec { max_m }),
        constants: ConstantOverrides { c4: a.c4, c5: a.c5 },
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Serialize)]
struct SeedReport<'a> {
    seed: u64,
    metrics: &'a linksched::harness::MetricsRow,
    c3: Option<f64>,
    certificate_holds: Option<bool>,
    result: &'a Option<linksched::scheduler::ScheduleResult>,
    /// NDJSON trace files of this seed, relative to the trace directory.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    traces: Vec<String>,
}

fn trace_name(seed: u64, class: usize, run: usize) -> String {
    format!("seed-{seed}-class-{class}-run-{run}.ndjson")
}

fn trace_names(o: &linksched::harness::SeedOutcome) -> Vec<String> {
    let Some(result) = &o.result else { return Vec::new() };
    result
        .phases
        .iter()
        .flat_map(|p| (0..p.traces.len()).map(move |k| trace_name(o.seed, p.class, k)))
        .collect()
}

fn run(a: RunArgs) -> Result<ExitCode> {
    let spec = spec_from_args(&a)?;
    let out = run_experiment(&spec, a.trace_dir.is_some())?;
    let mut csv = Vec::new();
    out.write_csv(&mut csv)?;
    write_out(a.out.as_deref(), &csv)?;
    if let Some(dir) = &a.results_dir {
        fs::create_dir_all(dir)?;
        for o in &out.outcomes {
            let report = SeedReport {
                seed: o.seed,
                metrics: &o.row,
                c3: o.c3,
                certificate_holds: o.certificate_holds,
                result: &o.result,
                traces: trace_names(o),
            };
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            fs::write(dir.join(format!("seed-{}.json", o.seed)), text)?;
        }
    }
    if let Some(dir) = &a.trace_dir {
        fs::create_dir_all(dir)?;
        for o in &out.outcomes {
            let Some(result) = &o.result else { continue };
            for phase in &result.phases {
                for (k, trace) in phase.traces.iter().enumerate() {
                    let path = dir.join(trace_name(o.seed, phase.class, k));
                    trace.write_ndjson(io::BufWriter::new(fs::File::create(path)?))?;
                }
            }
        }
    }
    let failures = out.correctness_failures();
    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("correctness failure for seeds {failures:?}");
        Ok(ExitCode::from(CORRECTNESS_FAILURE))
    }
}

#[derive(Serialize)]
struct OracleReport {
    m: usize,
    opt: usize,
    best_set: Vec<LinkId>,
    subsets_examined: u64,
    greedy: Vec<LinkId>,
    greedy_independent: bool,
}

#[derive(Deserialize)]
struct SelectedOnly {
    #[serde(alias = "selected")]
    selected: Option<Vec<LinkId>>,
    result: Option<Box<SelectedOnly>>,
}

impl SelectedOnly {
    fn links(self) -> Option<Vec<LinkId>> {
        self.selected.or_else(|| self.result.and_then(|r| r.links()))
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Gen { seed, shape, out } => {
            let inst = generate_instance(
                seed,
                &GenSpec {
                    m: shape.m,
                    side: shape.side,
                    d_min: shape.d_min,
                    d_max: shape.d_max,
                },
            )?;
            write_out(out.as_deref(), inst.to_json()?.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run(a) => run(a),
        Cmd::Oracle { instance, max_m } => {
            let inst = Instance::load(&instance).with_context(|| format!("loading {}", instance.display()))?;
            let opt = brute_force_opt(&inst, max_m)?;
            let cfg = SchedulerConfig::preset(Preset::TheorySafe, &inst.params, Duplex::Full, 0);
            let greedy = centralized_greedy(&inst, cfg.psi_prime(&inst.params), cfg.gamma1)?;
            let report = OracleReport {
                m: inst.m(),
                opt: opt.size,
                best_set: opt.best_set,
                subsets_examined: opt.subsets_examined,
                greedy_independent: is_independent(&inst.placed_set(&greedy), &inst.params).passed(),
                greedy,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { instance, schedule, links } => {
            let inst = Instance::load(&instance).with_context(|| format!("loading {}", instance.display()))?;
            let ids: Vec<LinkId> = match schedule {
                Some(p) => {
                    let s: SelectedOnly = serde_json::from_str(&fs::read_to_string(&p)?)
                        .with_context(|| format!("reading {}", p.display()))?;
                    s.links().context("schedule file has no selected links")?
                }
                None => links.into_iter().map(LinkId).collect(),
            };
            if let Some(bad) = ids.iter().find(|l| l.index() >= inst.m()) {
                bail!("unknown link {bad}");
            }
            let set = inst.placed_set(&ids);
            let direct = is_independent(&set, &inst.params);
            let via = independence_via_affectance(&set, &inst.params);
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "links": ids,
                    "independent": direct.passed(),
                    "affectance_agrees": direct.passed() == via.passed(),
                    "failures": direct.failures,
                }))?
            );
            Ok(if direct.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(CORRECTNESS_FAILURE)
            })
        }
        Cmd::Sweep {
            m,
            algorithms,
            duplex,
            seeds,
            preset,
            side,
            d_min,
            d_max,
            out,
        } => {
            let base = ExperimentSpec {
                instance: InstanceSource::Generate(GenSpec {
                    m: m[0],
                    side,
                    d_min,
                    d_max,
                }),
                algorithm: algorithms[0],
                duplex: duplex[0],
                seeds: seeds.0,
                preset,
                oracle: None,
                constants: ConstantOverrides::default(),
            };
            let rows = sweep(&base, &m, &algorithms, &duplex)?;
            let mut buf = Vec::new();
            write_sweep(&rows, &mut buf)?;
            write_out(out.as_deref(), &buf)?;
            let bad = rows.iter().any(|r| r.error.is_some() || (!r.timed_out && !r.independent));
            Ok(if bad {
                ExitCode::from(CORRECTNESS_FAILURE)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}
