use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate_instance, GenSpec};
use crate::adaptive::{adaptive_max_link_schedule, AdaptiveConfig};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::oracle::{brute_force_opt, centralized_greedy, DEFAULT_MAX_M};
use crate::scheduler::{approx_ratio_certificate, max_link_schedule, Preset, ScheduleResult, SchedulerConfig};
use crate::sim::Duplex;
use crate::sinr::is_independent;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Centralized,
    DistributedNonadaptive,
    DistributedAdaptive,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centralized" => Ok(Self::Centralized),
            "distributed-nonadaptive" => Ok(Self::DistributedNonadaptive),
            "distributed-adaptive" => Ok(Self::DistributedAdaptive),
            other => Err(Error::InvalidParams(format!("unknown algorithm {other:?}"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Centralized => "centralized",
            Self::DistributedNonadaptive => "distributed-nonadaptive",
            Self::DistributedAdaptive => "distributed-adaptive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    /// Instance JSON; relative paths resolve against the spec file.
    File(PathBuf),
    /// A fresh instance per seed.
    Generate(GenSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    #[serde(default = "default_max_m")]
    pub max_m: usize,
}

fn default_max_m() -> usize {
    DEFAULT_MAX_M
}

/// Optional overrides of the protocol constants.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantOverrides {
    pub c4: Option<u32>,
    pub c5: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub instance: InstanceSource,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub duplex: Duplex,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub preset: Preset,
    #[serde(default)]
    pub oracle: Option<OracleSpec>,
    #[serde(default)]
    pub constants: ConstantOverrides,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Loads a spec and resolves a relative instance path against the
    /// spec's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut spec = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let InstanceSource::File(f) = &mut spec.instance {
            if f.is_relative() {
                if let Some(dir) = path.parent() {
                    *f = dir.join(&*f);
                }
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidParams("at least one seed is required".into()));
        }
        if let InstanceSource::Generate(g) = &self.instance {
            g.validate()?;
            if let Some(o) = &self.oracle {
                if g.m > o.max_m {
                    return Err(Error::TooLarge { m: g.m, max_m: o.max_m });
                }
            }
        }
        Ok(())
    }

    fn scheduler_configs(&self, inst: &Instance, seed: u64) -> (SchedulerConfig, AdaptiveConfig) {
        let (mut sched, adaptive) = AdaptiveConfig::preset(self.preset, &inst.params, self.duplex, seed);
        if self.algorithm != Algorithm::DistributedAdaptive {
            sched = SchedulerConfig::preset(self.preset, &inst.params, self.duplex, seed);
        }
        if let Some(c4) = self.constants.c4 {
            sched.c4 = c4;
        }
        if let Some(c5) = self.constants.c5 {
            sched.c5 = c5;
        }
        (sched, adaptive)
    }
}

/// One CSV row. Column order is fixed by field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub g: usize,
    pub selected: usize,
    pub slots: u64,
    pub opt: Option<usize>,
    pub ratio: Option<f64>,
    pub independent: bool,
    pub timed_out: bool,
    pub ruling_valid: bool,
    /// Present only when the seed failed before producing a result.
    pub error: Option<String>,
}

impl MetricsRow {
    /// A completed run that is not independent, or a seed that errored.
    pub fn is_correctness_failure(&self) -> bool {
        self.error.is_some() || (!self.timed_out && !self.independent)
    }
}

#[derive(Clone, Debug)]
pub struct SeedOutcome {
    pub seed: u64,
    pub row: MetricsRow,
    pub instance: Option<Instance>,
    pub result: Option<ScheduleResult>,
    /// `|OPT| <= C3 |S|`, when the oracle ran.
    pub certificate_holds: Option<bool>,
    pub c3: Option<f64>,
}

impl SeedOutcome {
    pub fn is_correctness_failure(&self) -> bool {
        self.row.is_correctness_failure() || (!self.row.timed_out && self.certificate_holds == Some(false))
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub outcomes: Vec<SeedOutcome>,
}

impl ExperimentOutput {
    pub fn rows(&self) -> Vec<MetricsRow> {
        self.outcomes.iter().map(|o| o.row.clone()).collect()
    }

    pub fn correctness_failures(&self) -> Vec<u64> {
        self.outcomes
            .iter()
            .filter(|o| o.is_correctness_failure())
            .map(|o| o.seed)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(&self.rows(), out)
    }
}

pub fn write_rows<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(input: R) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_reader(input);
    let rows: std::result::Result<Vec<MetricsRow>, csv::Error> = r.deserialize().collect();
    Ok(rows?)
}

/// Runs one algorithm on one instance and fills in the metrics.
pub fn run_on_instance(spec: &ExperimentSpec, inst: &Instance, seed: u64, capture_traces: bool) -> Result<SeedOutcome> {
    let classes = inst.classes()?;
    let (mut sched, adaptive) = spec.scheduler_configs(inst, seed);
    sched.capture_traces = capture_traces;
    let result = match spec.algorithm {
        Algorithm::Centralized => {
            sched.validate(&inst.params)?;
            let selected = centralized_greedy(inst, sched.psi_prime(&inst.params), sched.gamma1)?;
            ScheduleResult {
                selected,
                ..ScheduleResult::default()
            }
        }
        Algorithm::DistributedNonadaptive => max_link_schedule(inst, &sched)?,
        Algorithm::DistributedAdaptive => adaptive_max_link_schedule(inst, &sched, &adaptive)?,
    };
    let independent = is_independent(&inst.placed_set(&result.selected), &inst.params).passed();
    let (opt, ratio, holds, c3) = match &spec.oracle {
        Some(o) => {
            let opt = brute_force_opt(inst, o.max_m)?;
            let cert = approx_ratio_certificate(&result, &opt, &sched, &inst.params);
            (Some(opt.size), cert.ratio, Some(cert.holds), Some(cert.c3))
        }
        None => (None, None, None, None),
    };
    let row = MetricsRow {
        seed,
        m: inst.m(),
        n: inst.nodes.len(),
        g: classes.diversity(),
        selected: result.selected.len(),
        slots: result.total_slots,
        opt,
        ratio,
        independent,
        timed_out: result.timed_out,
        ruling_valid: result.rulings_valid(inst),
        error: None,
    };
    Ok(SeedOutcome {
        seed,
        row,
        instance: Some(inst.clone()),
        result: Some(result),
        certificate_holds: holds,
        c3,
    })
}

fn instance_for(spec: &ExperimentSpec, seed: u64, shared: Option<&Instance>) -> Result<Instance> {
    match (&spec.instance, shared) {
        (_, Some(inst)) => Ok(inst.clone()),
        (InstanceSource::Generate(g), None) => generate_instance(seed, g),
        (InstanceSource::File(p), None) => Instance::load(p),
    }
}

/// Runs every seed of `spec` in parallel. A seed that fails produces a row
/// with the error message; other seeds are unaffected. Rows come back in
/// seed order.
pub fn run_experiment(spec: &ExperimentSpec, capture_traces: bool) -> Result<ExperimentOutput> {
    spec.validate()?;
    let shared = match &spec.instance {
        InstanceSource::File(p) => {
            let inst = Instance::load(p)?;
            if let Some(o) = &spec.oracle {
                if inst.m() > o.max_m {
                    return Err(Error::TooLarge { m: inst.m(), max_m: o.max_m });
                }
            }
            Some(inst)
        }
        InstanceSource::Generate(_) => None,
    };
    let mut seeds = spec.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let outcomes: Vec<SeedOutcome> = seeds
        .par_iter()
        .map(|&seed| {
            let attempt = instance_for(spec, seed, shared.as_ref())
                .and_then(|inst| run_on_instance(spec, &inst, seed, capture_traces));
            attempt.unwrap_or_else(|e| SeedOutcome {
                seed,
                row: MetricsRow {
                    seed,
                    m: 0,
                    n: 0,
                    g: 0,
                    selected: 0,
                    slots: 0,
                    opt: None,
                    ratio: None,
                    independent: false,
                    timed_out: false,
                    ruling_valid: false,
                    error: Some(e.to_string()),
                },
                instance: None,
                result: None,
                certificate_holds: None,
                c3: None,
            })
        })
        .collect();
    Ok(ExperimentOutput { outcomes })
}

/// One row of a sweep: the configuration plus the metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub duplex: Duplex,
    pub m_target: usize,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub g: usize,
    pub selected: usize,
    pub slots: u64,
    pub independent: bool,
    pub timed_out: bool,
    pub ruling_valid: bool,
    pub error: Option<String>,
}

/// Runs `base` (which must generate its instances) for every combination of
/// link count, algorithm and duplex mode.
pub fn sweep(base: &ExperimentSpec, ms: &[usize], algorithms: &[Algorithm], duplexes: &[Duplex]) -> Result<Vec<SweepRow>> {
    let InstanceSource::Generate(gen) = &base.instance else {
        return Err(Error::InvalidParams("a sweep needs a generated instance source".into()));
    };
    let mut rows = Vec::new();
    for &m in ms {
        for &algorithm in algorithms {
            for &duplex in duplexes {
                let spec = ExperimentSpec {
                    instance: InstanceSource::Generate(GenSpec { m, ..*gen }),
                    algorithm,
                    duplex,
                    ..base.clone()
                };
                for o in run_experiment(&spec, false)?.outcomes {
                    let r = o.row;
                    rows.push(SweepRow {
                        algorithm,
                        duplex,
                        m_target: m,
                        seed: r.seed,
                        m: r.m,
                        n: r.n,
                        g: r.g,
                        selected: r.selected,
                        slots: r.slots,
                        independent: r.independent,
                        timed_out: r.timed_out,
                        ruling_valid: r.ruling_valid,
                        error: r.error,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
