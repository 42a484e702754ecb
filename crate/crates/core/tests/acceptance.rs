//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use linksched::adaptive::{adaptive_max_link_schedule, adaptive_phase_step2, audit_adaptive_step, AdaptiveConfig};
use linksched::harness::{generate_instance, run_experiment, sweep, write_sweep, Algorithm, ExperimentSpec, GenSpec};
use linksched::oracle::brute_force_opt;
use linksched::ruling::{audit_ruling, construct_ruling, slot_budget, RulingConfig, RunOptions};
use linksched::scheduler::{approx_ratio_certificate, max_link_schedule, Preset, SchedulerConfig};
use linksched::sim::is_half_duplex_clean;
use linksched::sinr::{independence_via_affectance, interference_bound, is_independent, sensed_power_uniform};
use linksched::{Duplex, Instance, LinkId, Node, Point, SinrParams};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gen(seed: u64, m: usize, side: f64) -> Instance {
    let spec = GenSpec {
        m,
        side,
        d_min: 1.0,
        d_max: 8.0,
    };
    generate_instance(seed, &spec).expect("generator")
}

fn subset(inst: &Instance, mask: u64) -> Vec<LinkId> {
    (0..inst.m() as u32).filter(|&i| mask >> i & 1 == 1).map(LinkId).collect()
}

fn sinr_equivalence() -> Outcome {
    let results: Vec<(u64, u64)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let m = 2 + (seed % 9) as usize;
            let inst = gen(seed, m, 20.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
            let masks: Vec<u64> = if m <= 6 {
                (0..1u64 << m).collect()
            } else {
                (0..1000).map(|_| rng.random_range(0..1u64 << m)).collect()
            };
            let mut disagree = 0;
            for &mask in &masks {
                let set = inst.placed_set(&subset(&inst, mask));
                if is_independent(&set, &inst.params).passed() != independence_via_affectance(&set, &inst.params).passed() {
                    disagree += 1;
                }
            }
            (masks.len() as u64, disagree)
        })
        .collect();
    let checked: u64 = results.iter().map(|r| r.0).sum();
    let bad: u64 = results.iter().map(|r| r.1).sum();
    outcome(bad == 0, format!("100 instances, {checked} subsets, {bad} disagreements"))
}

fn random_nodes(rng: &mut ChaCha8Rng, first_id: u32, count: u32, side: f64) -> Vec<Node> {
    (first_id..first_id + count)
        .map(|id| Node::new(id, rng.random_range(0.0..side), rng.random_range(0.0..side)))
        .collect()
}

/// Largest number of `w1` nodes in a closed ball of radius `omega` around a `w1` node.
fn max_density(w1: &[Node], omega: f64) -> usize {
    w1.iter()
        .map(|u| w1.iter().filter(|v| u.pos().distance(v.pos()) <= omega).count())
        .max()
        .unwrap_or(1)
}

struct RulingCase {
    w1: Vec<Node>,
    w2: Vec<Node>,
    config: RulingConfig,
    params: SinrParams,
}

fn ruling_case(seed: u64) -> RulingCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w1 = random_nodes(&mut rng, 0, 40, 10.0);
    let w2 = random_nodes(&mut rng, 40, 40, 10.0);
    let params = SinrParams::default_for(1.0);
    let omega1 = 1.0;
    let config = RulingConfig::theory_safe(omega1, max_density(&w1, omega1), &params);
    RulingCase { w1, w2, config, params }
}

fn ruling_full_duplex() -> Outcome {
    let runs: Vec<(bool, bool, bool)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let c = ruling_case(seed);
            let res = construct_ruling(&c.w1, &c.w2, &c.config, &c.params, Duplex::Full, seed).expect("ruling");
            let audit = audit_ruling(&res, &c.w1, &c.w2, c.config.omega1, c.config.omega2);
            let budget = slot_budget(c.w1.len() + c.w2.len(), &c.config, Duplex::Full);
            let completed = !res.timed_out && res.slots_used <= budget;
            (completed, audit.passed(), audit.exact_ok() && audit.all_good())
        })
        .collect();
    let completed = runs.iter().filter(|r| r.0).count();
    let bad_completed = runs.iter().filter(|r| r.0 && !r.1).count();
    let bad_exact = runs.iter().filter(|r| !r.2).count();
    outcome(
        completed >= 95 && bad_completed == 0 && bad_exact == 0,
        format!(
            "completed {completed}/100 within budget (need >= 95); property failures on completed runs: {bad_completed}; separation/exactness failures on any run: {bad_exact}"
        ),
    )
}

fn ruling_half_duplex() -> Outcome {
    let runs: Vec<(bool, bool)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let c = ruling_case(seed);
            let res = construct_ruling(&c.w1, &c.w2, &c.config, &c.params, Duplex::Half, seed).expect("ruling");
            let audit = audit_ruling(&res, &c.w1, &c.w2, c.config.omega1, c.config.omega2);
            let clean = res.trace.as_ref().is_some_and(is_half_duplex_clean);
            (audit.all_good(), clean)
        })
        .collect();
    let good = runs.iter().filter(|r| r.0).count();
    let clean = runs.iter().filter(|r| r.1).count();
    outcome(
        good >= 95 && clean == 100,
        format!("all-good rulings {good}/100 (need >= 95); no transmit-and-sense in {clean}/100 traces"),
    )
}

fn scheduler_independence() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for m in [8usize, 32, 128] {
        let runs: Vec<(bool, bool)> = (0..100u64)
            .into_par_iter()
            .map(|seed| {
                let inst = gen(seed, m, 100.0);
                let config = SchedulerConfig::preset(Preset::TheorySafe, &inst.params, Duplex::Full, seed);
                let res = max_link_schedule(&inst, &config).expect("schedule");
                let independent = is_independent(&inst.placed_set(&res.selected), &inst.params).passed();
                (res.timed_out, independent)
            })
            .collect();
        let completed = runs.iter().filter(|r| !r.0).count();
        let bad = runs.iter().filter(|r| !r.0 && !r.1).count();
        pass &= bad == 0;
        details.push(format!("m={m}: {bad} dependent of {completed} completed"));
    }
    outcome(pass, details.join("; "))
}

fn approximation_ratio() -> Outcome {
    let runs: Vec<(u64, bool, Option<f64>, f64, bool)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let m = 4 + (seed % 9) as usize;
            let inst = gen(seed, m, 24.0);
            let config = SchedulerConfig::preset(Preset::TheorySafe, &inst.params, Duplex::Full, seed);
            let res = max_link_schedule(&inst, &config).expect("schedule");
            let opt = brute_force_opt(&inst, 12).expect("oracle");
            let cert = approx_ratio_certificate(&res, &opt, &config, &inst.params);
            (seed, res.timed_out, cert.ratio, cert.c3, cert.holds)
        })
        .collect();
    let completed: Vec<_> = runs.iter().filter(|r| !r.1).collect();
    let violations = completed.iter().filter(|r| !r.4).count();
    let (max_seed, max_ratio) = completed
        .iter()
        .filter_map(|r| r.2.map(|x| (r.0, x)))
        .fold((0, 0.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
    let c3 = runs.first().map(|r| r.3).unwrap_or(f64::NAN);
    outcome(
        violations == 0,
        format!(
            "{} completed, {violations} violations of |OPT| <= C3*|S| with C3 = {c3:.1}; max empirical ratio {max_ratio:.3} (seed {max_seed})",
            completed.len()
        ),
    )
}

fn median(mut v: Vec<u64>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

/// Sum of squared log residuals of the best fit `c * g * log2(m)^k`.
fn fit_residual(points: &[(usize, f64)], g: f64, k: i32) -> f64 {
    let ys: Vec<f64> = points
        .iter()
        .map(|&(m, s)| (s / (g * (m as f64).log2().powi(k))).ln())
        .collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    ys.iter().map(|y| (y - mean).powi(2)).sum()
}

fn slot_scaling() -> Outcome {
    let ms = [16usize, 64, 256];
    let algorithms = [Algorithm::DistributedNonadaptive, Algorithm::DistributedAdaptive];
    let duplexes = [Duplex::Half, Duplex::Full];
    let mut medians: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    let key = |a: Algorithm, d: Duplex| format!("{a} {d:?}").to_lowercase();
    let mut g_seen = Vec::new();
    for &m in &ms {
        // constant link density: the side grows with sqrt(m)
        let side = 12.5 * (m as f64).sqrt();
        let base = ExperimentSpec::from_toml(&format!(
            "algorithm = \"distributed-nonadaptive\"\nseeds = [{}]\n[instance.generate]\nm = {m}\nside = {side}\nd_min = 1.0\nd_max = 8.0\n",
            (0..20).map(|s| s.to_string()).collect::<Vec<_>>().join(",")
        ))
        .expect("spec");
        let rows = sweep(&base, &[m], &algorithms, &duplexes).expect("sweep");
        for &a in &algorithms {
            for &d in &duplexes {
                let slots: Vec<u64> = rows
                    .iter()
                    .filter(|r| r.algorithm == a && r.duplex == d)
                    .map(|r| r.slots)
                    .collect();
                medians.entry(key(a, d)).or_default().push((m, median(slots)));
            }
        }
        g_seen.extend(rows.iter().map(|r| r.g));
    }
    let g_fixed = g_seen.iter().all(|&g| g == 3);
    let expected = [
        ((Algorithm::DistributedNonadaptive, Duplex::Half), 3),
        ((Algorithm::DistributedNonadaptive, Duplex::Full), 2),
        ((Algorithm::DistributedAdaptive, Duplex::Half), 2),
        ((Algorithm::DistributedAdaptive, Duplex::Full), 1),
    ];
    let mut pass = g_fixed;
    let mut parts = Vec::new();
    for ((a, d), k) in expected {
        let pts = &medians[&key(a, d)];
        let r = |k: i32| fit_residual(pts, 3.0, k);
        let ok = r(k) < r(k - 1) && r(k) < r(k + 1);
        pass &= ok;
        parts.push(format!(
            "{}: medians {:?}, residual k={}:{:.4} k={k}:{:.4} k={}:{:.4}{}",
            key(a, d),
            pts.iter().map(|p| p.1).collect::<Vec<_>>(),
            k - 1,
            r(k - 1),
            r(k),
            k + 1,
            r(k + 1),
            if ok { "" } else { " MISFIT" }
        ));
    }
    for d in duplexes {
        let at = |a| medians[&key(a, d)].last().unwrap().1;
        let (ad, na) = (at(Algorithm::DistributedAdaptive), at(Algorithm::DistributedNonadaptive));
        pass &= ad < na;
        parts.push(format!("m=256 {d:?}: adaptive {ad} vs non-adaptive {na}"));
    }
    outcome(pass, format!("g=3 throughout: {g_fixed}; {}", parts.join("; ")))
}

fn interference_bound_check() -> Outcome {
    let mut below = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = SinrParams {
            alpha: rng.random_range(2.2..5.0),
            beta: rng.random_range(1.1..4.0),
            noise: rng.random_range(0.1..2.0),
            phi: rng.random_range(0.1..2.0),
            power: rng.random_range(1.0..100.0),
        };
        let rho1: f64 = rng.random_range(0.5..3.0);
        let rho2 = rng.random_range(0.51 * rho1..4.0 * rho1);
        let v = Point::new(0.0, 0.0);
        // half the configurations are tight square lattices, the rest random packings
        let reach = rho2 + 12.0 * rho1;
        let mut tx: Vec<Point> = Vec::new();
        if seed % 2 == 0 {
            let step = rho1 * (1.0 + 1e-12);
            let k = (reach / step).ceil() as i64;
            let (ox, oy) = (rng.random_range(0.0..rho1), rng.random_range(0.0..rho1));
            for i in -k..=k {
                for j in -k..=k {
                    let p = Point::new(ox + i as f64 * step, oy + j as f64 * step);
                    if p.distance(v) >= rho2 && p.distance(v) <= reach {
                        tx.push(p);
                    }
                }
            }
        } else {
            for _ in 0..4000 {
                let p = Point::new(rng.random_range(-reach..reach), rng.random_range(-reach..reach));
                if p.distance(v) >= rho2 && tx.iter().all(|q| q.distance(p) >= rho1) {
                    tx.push(p);
                }
            }
        }
        let bound = interference_bound(&tx, v, rho1, rho2, &params).expect("preconditions");
        let sp = sensed_power_uniform(&tx, v, &params).expect("sensed");
        if sp < bound {
            below += 1;
        }
        worst = worst.max((sp - params.noise) / (bound - params.noise));
    }
    outcome(
        below == 100,
        format!("SP below the bound in {below}/100 configurations; largest interference/bound ratio {worst:.4}"),
    )
}

fn adaptive_substeps() -> Outcome {
    let runs: Vec<bool> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d_i = rng.random_range(1.0..4.0);
            let n1 = rng.random_range(5..60);
            let n2 = rng.random_range(0..60);
            let side = rng.random_range(20.0..120.0) * d_i;
            let w1 = random_nodes(&mut rng, 0, n1, side);
            let w2 = random_nodes(&mut rng, n1, n2, side);
            let params = SinrParams::default_for(8.0);
            let (sched, adaptive) = AdaptiveConfig::preset(Preset::TheorySafe, &params, Duplex::Full, seed);
            let opts = RunOptions::new(Duplex::Full, seed);
            let step = adaptive_phase_step2(&w1, &w2, d_i, (n1 + n2) as usize, &sched, &adaptive, &params, &opts)
                .expect("adaptive step");
            !step.ruling.timed_out && audit_adaptive_step(&step, &w1, &w2, adaptive.c9).passed()
        })
        .collect();
    let ok = runs.iter().filter(|&&b| b).count();
    outcome(ok == 100, format!("dominating-set and postprocessing properties hold on {ok}/100 phase inputs"))
}

fn experiment_bytes(spec: &ExperimentSpec) -> Vec<u8> {
    let out = run_experiment(spec, true).expect("experiment");
    let mut bytes = Vec::new();
    out.write_csv(&mut bytes).expect("csv");
    for o in &out.outcomes {
        let result = o.result.as_ref().expect("result");
        bytes.extend(serde_json::to_vec(result).expect("json"));
        for p in &result.phases {
            for t in &p.traces {
                t.write_ndjson(&mut bytes).expect("ndjson");
            }
        }
    }
    bytes
}

fn determinism() -> Outcome {
    let mut ok = true;
    let mut total = 0;
    for (alg, duplex) in [("distributed-nonadaptive", "half"), ("distributed-adaptive", "full"), ("centralized", "full")] {
        let spec = ExperimentSpec::from_toml(&format!(
            "algorithm = \"{alg}\"\nduplex = \"{duplex}\"\nseeds = [3, 1, 2, 1]\n[instance.generate]\nm = 24\nside = 60.0\nd_min = 1.0\nd_max = 8.0"
        ))
        .expect("spec");
        let a = experiment_bytes(&spec);
        let b = experiment_bytes(&spec);
        ok &= a == b;
        total += a.len();
    }
    let base = ExperimentSpec::from_toml(
        "algorithm = \"distributed-adaptive\"\nseeds = [0, 1, 2]\n[instance.generate]\nm = 16\nside = 50.0\nd_min = 1.0\nd_max = 8.0\n",
    )
    .expect("spec");
    let sweep_bytes = || {
        let rows = sweep(&base, &[8, 16], &[Algorithm::DistributedAdaptive], &[Duplex::Half, Duplex::Full]).expect("sweep");
        let mut v = Vec::new();
        write_sweep(&rows, &mut v).expect("csv");
        v
    };
    ok &= sweep_bytes() == sweep_bytes();
    // the adaptive scheduler called directly agrees with the harness
    let inst = gen(5, 20, 60.0);
    let (s, a) = AdaptiveConfig::preset(Preset::TheorySafe, &inst.params, Duplex::Full, 5);
    let direct = |()| serde_json::to_string(&adaptive_max_link_schedule(&inst, &s, &a).unwrap()).unwrap();
    ok &= direct(()) == direct(());
    outcome(ok, format!("repeated runs byte-identical ({total} bytes of CSV, results and traces compared, plus sweep CSV)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("SINR/affectance equivalence", sinr_equivalence),
        ("ruling correctness, full duplex", ruling_full_duplex),
        ("ruling goodness, half duplex", ruling_half_duplex),
        ("scheduler independence", scheduler_independence),
        ("approximation ratio certificate", approximation_ratio),
        ("slot-count scaling", slot_scaling),
        ("interference bound", interference_bound_check),
        ("adaptive sub-step identities", adaptive_substeps),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!(
            "{verdict} [{}] {name} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
