//! Seeded experiment campaigns and the network-versus-model fidelity test.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{beta_hat, model_step, AgentId, AgentModel, Distribution, Scheduler, Surface};
use crate::error::{Error, Result};
use crate::lattice::Mesh;
use crate::lcl::{check_weak_coloring, CoverageMode};
use crate::mesh::{ExecMode, MeshNetwork};
use crate::rng::derive_seed;

/// Standard normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Largest window side the fidelity test accepts.
pub const FIDELITY_MAX_SIDE: usize = 3;

/// Exact laws are enumerated only up to this many outcomes.
pub const EXACT_SUPPORT_LIMIT: f64 = 1e6;

/// Environment variable capping the worker threads used for trials.
pub const THREADS_ENV: &str = "NUCLEATE_THREADS";

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Run `f` on a pool capped by `NUCLEATE_THREADS` when it is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| Error::Configuration(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Configuration(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// How the model was referenced (file path or family name); reported only.
    pub model_ref: String,
    pub model: AgentModel,
    pub sizes: Vec<usize>,
    pub rounds: u64,
    pub trials: usize,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Configuration("trials must be at least 1".into()));
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(Error::Configuration("sizes must be a nonempty list of positive sides".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Configuration("sizes must be strictly ascending".into()));
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRow {
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeResult {
    #[serde(flatten)]
    pub row: SizeRow,
    /// Mean first round at which the surface was fully and validly colored,
    /// over the trials where that happened within the budget.
    pub mean_rounds_to_valid: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub model: String,
    pub model_hash: String,
    pub master_seed: u64,
    pub rounds: u64,
    pub trials: usize,
    pub sizes: Vec<SizeResult>,
}

impl ExperimentResult {
    pub fn rows(&self) -> Vec<SizeRow> {
        self.sizes.iter().map(|s| s.row.clone()).collect()
    }

    pub fn p_hats(&self) -> Vec<f64> {
        self.sizes.iter().map(|s| s.row.p_hat).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in self.rows() {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }

    pub fn from_json(text: &str) -> Result<ExperimentResult> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<SizeRow>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Outcome of one mesh-sim campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub success: bool,
    pub first_valid_round: Option<u64>,
}

fn fully_valid(net: &MeshNetwork) -> bool {
    let col = net.coloring();
    col.colored_count() == col.colors().len() && check_weak_coloring(&col, CoverageMode::FullSurface).map(|r| r.valid).unwrap_or(false)
}

/// Round 0 then `rounds` rounds on an n×n network; success means full and
/// valid after exactly `rounds` rounds.
pub fn run_trial(model: &AgentModel, n: usize, rounds: u64, seed: u64) -> Result<TrialOutcome> {
    let mesh = Mesh::new(model.dimension, n)?;
    let mut net = MeshNetwork::new(model, mesh, seed)?;
    net.init_round0()?;
    let mut first = fully_valid(&net).then_some(0);
    for r in 1..=rounds {
        net.run_round()?;
        if first.is_none() && fully_valid(&net) {
            first = Some(r);
        }
    }
    let success = if rounds == 0 { first == Some(0) } else { fully_valid(&net) };
    Ok(TrialOutcome { success, first_valid_round: first })
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let mut sizes = Vec::new();
    for &n in &spec.sizes {
        let outcomes = with_thread_cap(|| {
            (0..spec.trials)
                .into_par_iter()
                .map(|t| run_trial(&spec.model, n, spec.rounds, derive_seed(spec.master_seed, &[n as u64, t as u64])))
                .collect::<Result<Vec<_>>>()
        })??;
        let successes = outcomes.iter().filter(|o| o.success).count();
        let firsts: Vec<u64> = outcomes.iter().filter_map(|o| o.first_valid_round).collect();
        let (ci_lo, ci_hi) = wilson_interval(successes, spec.trials, Z95);
        sizes.push(SizeResult {
            row: SizeRow { n, trials: spec.trials, successes, p_hat: successes as f64 / spec.trials as f64, ci_lo, ci_hi },
            mean_rounds_to_valid: (!firsts.is_empty()).then(|| firsts.iter().sum::<u64>() as f64 / firsts.len() as f64),
        });
    }
    Ok(ExperimentResult {
        model: spec.model_ref.clone(),
        model_hash: spec.model.content_hash(),
        master_seed: spec.master_seed,
        rounds: spec.rounds,
        trials: spec.trials,
        sizes,
    })
}

/// β̂ at one location of the starting surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationLaw {
    pub x: i64,
    pub y: i64,
    pub occupant: String,
    pub probs: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub model_hash: String,
    pub master_seed: u64,
    pub side: usize,
    pub samples: usize,
    /// Total variation between the two empirical one-round laws.
    pub tv_distance: f64,
    pub tv_model_exact: Option<f64>,
    pub tv_mesh_exact: Option<f64>,
    pub model_support: usize,
    pub mesh_support: usize,
    pub exact_support: Option<usize>,
    /// Both empirical supports equal the exact support.
    pub supports_equal: bool,
    pub exact_table: Vec<LocationLaw>,
}

type Occupancy = Vec<Option<AgentId>>;

fn tv(a: &BTreeMap<Occupancy, f64>, b: &BTreeMap<Occupancy, f64>) -> f64 {
    let keys: BTreeSet<&Occupancy> = a.keys().chain(b.keys()).collect();
    0.5 * keys.into_iter().map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

fn empirical(counts: BTreeMap<Occupancy, usize>, samples: usize) -> BTreeMap<Occupancy, f64> {
    counts.into_iter().map(|(k, c)| (k, c as f64 / samples as f64)).collect()
}

/// Exact one-step law of the synchronous scheduler: a product of per-location β̂.
pub fn exact_one_step(laws: &[Distribution]) -> Option<BTreeMap<Occupancy, f64>> {
    let size: f64 = laws.iter().map(|d| d.support().len() as f64).product();
    if size > EXACT_SUPPORT_LIMIT {
        return None;
    }
    let mut acc: BTreeMap<Occupancy, f64> = BTreeMap::from([(Vec::new(), 1.0)]);
    for d in laws {
        let mut next = BTreeMap::new();
        for (k, p) in &acc {
            for o in d.support() {
                let mut k2 = k.clone();
                k2.push(o);
                next.insert(k2, p * d.prob(o));
            }
        }
        acc = next;
    }
    Some(acc)
}

fn state_name(model: &AgentModel, s: Option<AgentId>) -> String {
    s.map_or_else(|| "EMPTY".into(), |a| model.agent(a).name.clone())
}

/// Compare the network's one-round law with the model's synchronous
/// one-step law, starting from the seed on an n×n window (n ≤ 3).
pub fn run_fidelity(model: &AgentModel, side: usize, samples: usize, master_seed: u64) -> Result<FidelityReport> {
    if side == 0 || side > FIDELITY_MAX_SIDE {
        return Err(Error::Configuration(format!("fidelity windows are 1..={FIDELITY_MAX_SIDE} on a side, got {side}")));
    }
    if samples == 0 {
        return Err(Error::Configuration("samples must be at least 1".into()));
    }
    let model = AgentModel { pi_nu: 0.0, ..model.clone() };
    let mesh = Mesh::new(model.dimension, side)?;
    let start = Surface::seeded(&model, mesh)?;
    let count = |samples: Vec<Occupancy>| {
        let mut m = BTreeMap::new();
        for s in samples {
            *m.entry(s).or_insert(0usize) += 1;
        }
        m
    };
    let model_samples = with_thread_cap(|| {
        (0..samples)
            .into_par_iter()
            .map(|s| {
                let mut surf = start.clone();
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, &[0, s as u64]));
                model_step(&mut surf, &model, Scheduler::Synchronous, &mut rng);
                surf.occupancy()
            })
            .collect::<Vec<_>>()
    })?;
    let mesh_samples = with_thread_cap(|| {
        (0..samples)
            .into_par_iter()
            .map(|s| -> Result<Occupancy> {
                let mut net = MeshNetwork::new(&model, mesh, derive_seed(master_seed, &[1, s as u64]))?.with_mode(ExecMode::Sequential);
                net.init_round0()?;
                net.run_round()?;
                Ok(net.extract_configuration().occupancy())
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let model_law = empirical(count(model_samples), samples);
    let mesh_law = empirical(count(mesh_samples), samples);
    let laws: Vec<Distribution> = (0..mesh.vertex_count()).map(|i| beta_hat(&model, &start.view(&model, i))).collect();
    let exact = exact_one_step(&laws);
    let exact_table = mesh
        .points()
        .zip(&laws)
        .enumerate()
        .map(|(i, (p, d))| LocationLaw {
            x: p.x,
            y: p.y,
            occupant: state_name(&model, start.cell(i).map(|c| c.agent)),
            probs: d.support().into_iter().map(|o| (state_name(&model, o), d.prob(o))).collect(),
        })
        .collect();
    let support = |m: &BTreeMap<Occupancy, f64>| m.iter().filter(|(_, &p)| p > 0.0).map(|(k, _)| k.clone()).collect::<BTreeSet<_>>();
    let supports_equal = match &exact {
        Some(e) => support(&model_law) == support(e) && support(&mesh_law) == support(e),
        None => support(&model_law) == support(&mesh_law),
    };
    Ok(FidelityReport {
        model_hash: model.content_hash(),
        master_seed,
        side,
        samples,
        tv_distance: tv(&model_law, &mesh_law),
        tv_model_exact: exact.as_ref().map(|e| tv(&model_law, e)),
        tv_mesh_exact: exact.as_ref().map(|e| tv(&mesh_law, e)),
        model_support: model_law.len(),
        mesh_support: mesh_law.len(),
        exact_support: exact.as_ref().map(|e| support(e).len()),
        supports_equal,
        exact_table,
    })
}
