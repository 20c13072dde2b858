//! Round-based crash-rate experiments, threshold estimation and ancilla
//! overhead measurement.
//!
//! A trial follows one data block. Each round couples it by transversal CNOT
//! to a partner drawn from a pool of surviving blocks, corrects both error
//! types in a random order (which fixes its side of the next round's CNOT),
//! then asks the perfect decoder whether it has crashed. The first rounds are
//! burn-in and are not tallied; a crash ends the trial.
//!
//! Trials are simulated in fixed chunks that share one pool and one factory.
//! Trial `i` at rate `gamma` draws from the stream `i` of a generator keyed by
//! `(seed, gamma)`, so tallies do not depend on how chunks are spread over
//! threads.

use std::collections::VecDeque;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ancilla::{AncillaFactory, AncillaTally, FactoryConfig, FactoryStats, Scheme, DEFAULT_RETRY_BUDGET};
use crate::circuit::LogicalState;
use crate::ec::{correct, pre_gate_ordering, role_after, DataBlock, Protocol, Role};
use crate::error::{Result, SimError};
use crate::hamming::{crash_components, CONCAT_LEN};
use crate::noise::{Noise, NoiseParams, RandomSource};
use crate::pauli::{ErrorType, Frame};
use crate::stats::{phi, wilson, Z95};

pub const DEFAULT_POOL_CAPACITY: usize = 1024;
pub const DEFAULT_ROUNDS: u32 = 20;
pub const DEFAULT_BURN_IN: u32 = 3;
/// Blocks enter the pool only after surviving more rounds than this.
pub const POOL_MIN_ROUND: u32 = 3;
/// Trials per chunk in crash-rate runs.
pub const CHUNK_TRIALS: u64 = 64;
/// Ancillas per chunk in overhead runs.
pub const CHUNK_ANCILLAS: u64 = 256;

/// The correction protocol each scheme pairs with.
pub fn protocol_for(scheme: Scheme) -> Protocol {
    match scheme {
        Scheme::Steane => Protocol::Steane,
        Scheme::Reject | Scheme::Ideal => Protocol::Single,
    }
}

/// Seed of the generator family used at one rate.
pub fn point_seed(seed: u64, gamma: f64) -> u64 {
    splitmix64(seed ^ splitmix64(gamma.to_bits()))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub scheme: Scheme,
    pub checks: usize,
    pub trials: u64,
    /// Counted rounds per trial, after burn-in.
    pub rounds: u32,
    pub burn_in: u32,
    pub pool_capacity: usize,
    pub retry_budget: u64,
    pub seed: u64,
    /// Classify every ancilla delivered to the data.
    pub ancilla_stats: bool,
}

impl SweepConfig {
    pub fn new(scheme: Scheme, trials: u64, seed: u64) -> Self {
        Self {
            scheme,
            checks: 4,
            trials,
            rounds: DEFAULT_ROUNDS,
            burn_in: DEFAULT_BURN_IN,
            pool_capacity: DEFAULT_POOL_CAPACITY,
            retry_budget: DEFAULT_RETRY_BUDGET,
            seed,
            ancilla_stats: false,
        }
    }

    fn factory_config(&self) -> FactoryConfig {
        FactoryConfig::new(self.scheme)
            .with_checks(self.checks)
            .with_retry_budget(self.retry_budget)
    }

    fn validate(&self) -> Result<()> {
        AncillaFactory::new(self.factory_config())?;
        if self.trials == 0 {
            return Err(SimError::Config("trials must be at least 1".into()));
        }
        if self.rounds == 0 {
            return Err(SimError::Config("rounds must be at least 1".into()));
        }
        if self.pool_capacity == 0 {
            return Err(SimError::Config("pool capacity must be positive".into()));
        }
        Ok(())
    }
}

/// Bounded FIFO of surviving block frames, sampled without removal.
#[derive(Clone, Debug)]
pub struct BlockPool {
    blocks: VecDeque<Frame>,
    capacity: usize,
}

impl BlockPool {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "pool capacity must be positive");
        Self {
            blocks: VecDeque::with_capacity(capacity.min(4096)),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn insert(&mut self, frame: Frame) {
        if self.blocks.len() == self.capacity {
            self.blocks.pop_front();
        }
        self.blocks.push_back(frame);
    }

    /// A uniformly chosen stored frame, or a clean one if the pool is empty.
    pub fn draw(&self, rng: &mut RandomSource) -> Frame {
        if self.blocks.is_empty() {
            return Frame::new(CONCAT_LEN);
        }
        self.blocks[rng.below(self.blocks.len() as u64) as usize]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RoundOutcome {
    pub crash_x: bool,
    pub crash_z: bool,
    /// Whether a snapshot of the block entered the pool.
    pub pooled: bool,
}

impl RoundOutcome {
    pub fn crashed(&self) -> bool {
        self.crash_x || self.crash_z
    }
}

/// One round on `block`, whose side of the CNOT is `role`. `round` counts
/// from 1. On return `role` holds the side for the next round.
#[allow(clippy::too_many_arguments)]
pub fn run_round(
    block: &mut DataBlock,
    role: &mut Role,
    round: u32,
    pool: &mut BlockPool,
    protocol: Protocol,
    factory: &mut AncillaFactory,
    noise: &mut Noise,
) -> Result<RoundOutcome> {
    let mut partner = pool.draw(noise.rng());
    match role {
        Role::Control => noise.transversal_cnot(block.frame_mut(), &mut partner),
        Role::Target => noise.transversal_cnot(&mut partner, block.frame_mut()),
    }
    let first = if noise.rng().coin() { ErrorType::X } else { ErrorType::Z };
    correct(protocol, block, first, factory, noise)?;
    correct(protocol, block, first.other(), factory, noise)?;
    *role = role_after(first);
    debug_assert_eq!(pre_gate_ordering(*role).0, first);
    let (crash_x, crash_z) = crash_components(block.frame());
    let mut out = RoundOutcome {
        crash_x,
        crash_z,
        pooled: false,
    };
    if !out.crashed() && round > POOL_MIN_ROUND {
        pool.insert(*block.frame());
        out.pooled = true;
    }
    Ok(out)
}

/// Additive counters of a batch of trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub rounds: u64,
    pub crashes: u64,
    pub aborts: u64,
    /// Counted rounds by (X crashed, Z crashed).
    pub crash_table: [[u64; 2]; 2],
    pub factory: FactoryStats,
    pub ancilla: AncillaTally,
}

impl Tally {
    pub fn merge(&mut self, o: &Tally) {
        self.trials += o.trials;
        self.rounds += o.rounds;
        self.crashes += o.crashes;
        self.aborts += o.aborts;
        for i in 0..2 {
            for j in 0..2 {
                self.crash_table[i][j] += o.crash_table[i][j];
            }
        }
        self.factory.merge(&o.factory);
        self.ancilla.merge(&o.ancilla);
    }
}

fn run_trial(
    cfg: &SweepConfig,
    pool: &mut BlockPool,
    factory: &mut AncillaFactory,
    noise: &mut Noise,
    tally: &mut Tally,
) -> Result<()> {
    let protocol = protocol_for(cfg.scheme);
    let mut block = DataBlock::new();
    let mut role = if noise.rng().coin() { Role::Control } else { Role::Target };
    tally.trials += 1;
    for round in 1..=cfg.burn_in + cfg.rounds {
        let out = match run_round(&mut block, &mut role, round, pool, protocol, factory, noise) {
            Ok(out) => out,
            Err(SimError::RetryBudgetExhausted { .. }) => {
                tally.aborts += 1;
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        if round > cfg.burn_in {
            tally.rounds += 1;
            tally.crash_table[out.crash_x as usize][out.crash_z as usize] += 1;
            tally.crashes += out.crashed() as u64;
        }
        if out.crashed() {
            break;
        }
    }
    Ok(())
}

fn run_chunk(params: NoiseParams, cfg: &SweepConfig, trials: Range<u64>) -> Result<Tally> {
    let mut factory = AncillaFactory::new(cfg.factory_config())?;
    if cfg.ancilla_stats {
        factory.enable_tally();
    }
    let mut pool = BlockPool::new(cfg.pool_capacity);
    let mut tally = Tally::default();
    let family = point_seed(cfg.seed, params.gamma());
    for trial in trials {
        let mut noise = Noise::new(params, RandomSource::for_stream(family, trial));
        run_trial(cfg, &mut pool, &mut factory, &mut noise, &mut tally)?;
    }
    tally.factory = factory.take_stats();
    tally.ancilla = factory.tally().copied().unwrap_or_default();
    Ok(tally)
}

fn chunks(total: u64, size: u64) -> Vec<Range<u64>> {
    (0..total.div_ceil(size))
        .map(|c| c * size..((c + 1) * size).min(total))
        .collect()
}

/// Tallies of `cfg.trials` trials at one rate.
pub fn run_point(gamma: f64, cfg: &SweepConfig) -> Result<Tally> {
    cfg.validate()?;
    let params = NoiseParams::new(gamma)?;
    let parts = chunks(cfg.trials, CHUNK_TRIALS)
        .into_par_iter()
        .map(|r| run_chunk(params, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let mut total = Tally::default();
    for t in &parts {
        total.merge(t);
    }
    Ok(total)
}

/// One row of a crash-rate sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub gamma: f64,
    pub scheme: Scheme,
    pub checks: usize,
    pub trials: u64,
    pub rounds: u64,
    pub crashes: u64,
    pub crash_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean time per delivered 49-qubit ancilla in units of the noiseless
    /// verified preparation.
    pub mean_time_units: Option<f64>,
    pub rejections_l1: u64,
    pub rejections_l2: u64,
    pub aborts: u64,
    /// Phi coefficient between X and Z crashes over counted rounds.
    pub xz_correlation: Option<f64>,
    pub seed: u64,
    pub crash_table: [[u64; 2]; 2],
    pub ancilla: Option<AncillaTally>,
}

impl SweepResult {
    pub fn from_tally(gamma: f64, cfg: &SweepConfig, t: &Tally) -> Self {
        let (ci_low, ci_high) = wilson(t.crashes, t.rounds, Z95);
        Self {
            gamma,
            scheme: cfg.scheme,
            checks: cfg.checks,
            trials: t.trials,
            rounds: t.rounds,
            crashes: t.crashes,
            crash_rate: if t.rounds == 0 { 0.0 } else { t.crashes as f64 / t.rounds as f64 },
            ci_low,
            ci_high,
            mean_time_units: mean_time_units(&t.factory),
            rejections_l1: t.factory.rejections_l1,
            rejections_l2: t.factory.rejections_l2,
            aborts: t.aborts,
            xz_correlation: phi(t.crash_table),
            seed: cfg.seed,
            crash_table: t.crash_table,
            ancilla: cfg.ancilla_stats.then_some(t.ancilla),
        }
    }
}

fn mean_time_units(stats: &FactoryStats) -> Option<f64> {
    (stats.delivered49 > 0)
        .then(|| stats.time_steps as f64 / stats.delivered49 as f64 / AncillaFactory::baseline_time_steps() as f64)
}

fn check_grid(gammas: &[f64]) -> Result<()> {
    if gammas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SimError::Config("rates must be strictly increasing".into()));
    }
    for &g in gammas {
        NoiseParams::new(g)?;
    }
    Ok(())
}

/// Crash-rate sweep over an ascending grid.
pub fn run_sweep(gammas: &[f64], cfg: &SweepConfig) -> Result<Vec<SweepResult>> {
    check_grid(gammas)?;
    gammas
        .iter()
        .map(|&g| run_point(g, cfg).map(|t| SweepResult::from_tally(g, cfg, &t)))
        .collect()
}

/// The same sweep with idealized ancillas.
pub fn run_ideal_experiment(gammas: &[f64], cfg: &SweepConfig) -> Result<Vec<SweepResult>> {
    let cfg = SweepConfig {
        scheme: Scheme::Ideal,
        ..cfg.clone()
    };
    run_sweep(gammas, &cfg)
}

/// Where the crash-rate curve meets `crash_rate = 3/4 gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdEstimate {
    Crossing {
        gamma_star: f64,
        left: f64,
        right: f64,
        /// Largest distance, in natural-log units, of a bracketing point
        /// from the reference line; `None` if the lower point has no crashes.
        residual: Option<f64>,
    },
    NoCrossing,
}

impl ThresholdEstimate {
    pub fn gamma_star(&self) -> Option<f64> {
        match self {
            ThresholdEstimate::Crossing { gamma_star, .. } => Some(*gamma_star),
            ThresholdEstimate::NoCrossing => None,
        }
    }
}

/// Interpolates the first upward crossing of the reference line between
/// consecutive `(gamma, crash_rate)` points, in log-log coordinates. When the
/// lower point has no crashes the ratio to the line is interpolated linearly
/// in log gamma instead.
pub fn estimate_threshold(points: &[(f64, f64)]) -> ThresholdEstimate {
    let ratio = |(g, r): (f64, f64)| r / (0.75 * g);
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ua, ub) = (ratio(a), ratio(b));
        if !(ua < 1.0 && ub >= 1.0) {
            continue;
        }
        let (la, lb) = (a.0.ln(), b.0.ln());
        let t = if ua > 0.0 {
            let (fa, fb) = (ua.ln(), ub.ln());
            fa / (fa - fb)
        } else {
            (1.0 - ua) / (ub - ua)
        };
        let residual = (ua > 0.0).then(|| ua.ln().abs().max(ub.ln().abs()));
        return ThresholdEstimate::Crossing {
            gamma_star: (la + t * (lb - la)).exp(),
            left: a.0,
            right: b.0,
            residual,
        };
    }
    ThresholdEstimate::NoCrossing
}

pub fn threshold_of(results: &[SweepResult]) -> ThresholdEstimate {
    let pts: Vec<(f64, f64)> = results.iter().map(|r| (r.gamma, r.crash_rate)).collect();
    estimate_threshold(&pts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverheadConfig {
    pub scheme: Scheme,
    pub checks: usize,
    /// Ancillas delivered per rate, alternating |+>_L and |0>_L.
    pub samples: u64,
    pub retry_budget: u64,
    pub seed: u64,
}

impl OverheadConfig {
    pub fn new(scheme: Scheme, samples: u64, seed: u64) -> Self {
        Self {
            scheme,
            checks: 4,
            samples,
            retry_budget: DEFAULT_RETRY_BUDGET,
            seed,
        }
    }
}

/// Preparation cost and residual errors of delivered 49-qubit ancillas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverheadPoint {
    pub gamma: f64,
    pub scheme: Scheme,
    pub checks: usize,
    pub stats: FactoryStats,
    /// `None` when some preparation ran out of retries.
    pub time_units: Option<f64>,
    pub ancilla: AncillaTally,
    pub exhausted: bool,
    pub seed: u64,
}

fn overhead_chunk(params: NoiseParams, cfg: &OverheadConfig, chunk: u64, samples: Range<u64>) -> Result<(FactoryStats, AncillaTally, bool)> {
    let mut factory = AncillaFactory::new(
        FactoryConfig::new(cfg.scheme)
            .with_checks(cfg.checks)
            .with_retry_budget(cfg.retry_budget),
    )?;
    factory.enable_tally();
    let mut noise = Noise::new(params, RandomSource::for_stream(point_seed(cfg.seed, params.gamma()), chunk));
    let mut exhausted = false;
    for i in samples {
        let state = if i % 2 == 0 { LogicalState::Plus } else { LogicalState::Zero };
        match factory.prepare49(&mut noise, state) {
            Ok(_) => {}
            Err(SimError::RetryBudgetExhausted { .. }) => {
                exhausted = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let tally = factory.tally().copied().unwrap_or_default();
    Ok((factory.take_stats(), tally, exhausted))
}

/// Mean cost per delivered ancilla at each rate, normalized so the noiseless
/// verified preparation costs 1.
pub fn measure_overhead(gammas: &[f64], cfg: &OverheadConfig) -> Result<Vec<OverheadPoint>> {
    check_grid(gammas)?;
    AncillaFactory::new(
        FactoryConfig::new(cfg.scheme)
            .with_checks(cfg.checks)
            .with_retry_budget(cfg.retry_budget),
    )?;
    if cfg.samples == 0 {
        return Err(SimError::Config("samples must be at least 1".into()));
    }
    gammas
        .iter()
        .map(|&g| {
            let params = NoiseParams::new(g)?;
            let parts = chunks(cfg.samples, CHUNK_ANCILLAS)
                .into_iter()
                .enumerate()
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|(c, r)| overhead_chunk(params, cfg, c as u64, r))
                .collect::<Result<Vec<_>>>()?;
            let mut stats = FactoryStats::default();
            let mut ancilla = AncillaTally::default();
            let mut exhausted = false;
            for (s, a, e) in &parts {
                stats.merge(s);
                ancilla.merge(a);
                exhausted |= e;
            }
            Ok(OverheadPoint {
                gamma: g,
                scheme: cfg.scheme,
                checks: cfg.checks,
                stats,
                time_units: if exhausted { None } else { mean_time_units(&stats) },
                ancilla,
                exhausted,
                seed: cfg.seed,
            })
        })
        .collect()
}
