//! Encoded ancilla factories.
//!
//! Every 7-qubit ancilla is encoded and then verified against the error
//! component that would leak into the data, retrying until verification
//! passes. A 49-qubit ancilla is built from seven such blocks joined by the
//! same encoder applied transversally. After each layer of logical CNOTs,
//! every sub-block the layer touched is checked for bit flips and phase
//! flips, in the order suited to its next gate. The schemes differ in what
//! those checks do with a nonzero syndrome:
//!
//! * `Steane`: correct it once two extracted syndromes agree, then verify
//!   the logical-level checks with transversally coupled verifier blocks,
//!   restarting if any fails.
//! * `Reject`: discard all 49 qubits and start over; no logical checks.
//! * `Ideal`: no circuit at all; each qubit takes one fault and any nonzero
//!   sub-block syndrome discards the ancilla.
//!
//! Time is charged per circuit layer to the factory's running total:
//! a 7-qubit attempt costs its scheduled depth, a transversal layer one unit,
//! an extraction two (coupling and readout) plus its ancilla, a logical check
//! one unit per coupled sub-block plus readout plus its verifier.

use std::fmt;
use std::ops::Sub;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::circuit::{asap_depth, verification_checks, Check, EncodingCircuit, LogicalState};
use crate::ec::{pre_gate_ordering, Role};
use crate::error::{Result, SimError};
use crate::hamming::{decode7, parity7, reduced_block_weights, Syndrome7, BLOCKS, CONCAT_LEN};
use crate::noise::{Noise, NoiseParams, RandomSource};
use crate::pauli::{Basis, ErrorType, Frame};

/// Default cap on attempts for a single delivered ancilla.
pub const DEFAULT_RETRY_BUDGET: u64 = 1_000_000;

/// Which preparation (and matching correction protocol) to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Steane,
    Reject,
    Ideal,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Steane => "steane",
            Scheme::Reject => "reject",
            Scheme::Ideal => "ideal",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "steane" => Ok(Scheme::Steane),
            "reject" => Ok(Scheme::Reject),
            "ideal" => Ok(Scheme::Ideal),
            other => Err(SimError::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Counters accumulated by a factory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoryStats {
    pub attempts7: u64,
    pub rejections_l1: u64,
    pub delivered7: u64,
    pub attempts49: u64,
    pub rejections_l2: u64,
    pub delivered49: u64,
    pub time_steps: u64,
}

impl FactoryStats {
    pub fn merge(&mut self, other: &FactoryStats) {
        self.attempts7 += other.attempts7;
        self.rejections_l1 += other.rejections_l1;
        self.delivered7 += other.delivered7;
        self.attempts49 += other.attempts49;
        self.rejections_l2 += other.rejections_l2;
        self.delivered49 += other.delivered49;
        self.time_steps += other.time_steps;
    }
}

impl Sub for FactoryStats {
    type Output = FactoryStats;

    fn sub(self, rhs: FactoryStats) -> FactoryStats {
        FactoryStats {
            attempts7: self.attempts7 - rhs.attempts7,
            rejections_l1: self.rejections_l1 - rhs.rejections_l1,
            delivered7: self.delivered7 - rhs.delivered7,
            attempts49: self.attempts49 - rhs.attempts49,
            rejections_l2: self.rejections_l2 - rhs.rejections_l2,
            delivered49: self.delivered49 - rhs.delivered49,
            time_steps: self.time_steps - rhs.time_steps,
        }
    }
}

/// Residual-error census of delivered 49-qubit ancillas.
///
/// Each component is first reduced to its lightest equivalent (a logical
/// operator that fixes the state counts as trivial). A component has a
/// physical error if anything remains, a logical error if some sub-block
/// keeps two or more flips. `leak_*` count only the component that the
/// ancilla passes to the data (Z for |+>_L, X for |0>_L); the plain
/// counters take either component.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaTally {
    pub delivered: u64,
    pub physical: u64,
    pub logical: u64,
    pub leak_physical: u64,
    pub leak_logical: u64,
}

impl AncillaTally {
    pub fn record(&mut self, frame: &Frame, state: LogicalState) {
        let leaking = state.verified_component();
        let [(lp, ll), (op, ol)] = [leaking, leaking.other()].map(|k| classify(frame.mask(k), k == leaking));
        self.delivered += 1;
        self.physical += (lp || op) as u64;
        self.logical += (ll || ol) as u64;
        self.leak_physical += lp as u64;
        self.leak_logical += ll as u64;
    }

    pub fn merge(&mut self, other: &AncillaTally) {
        self.delivered += other.delivered;
        self.physical += other.physical;
        self.logical += other.logical;
        self.leak_physical += other.leak_physical;
        self.leak_logical += other.leak_logical;
    }

    fn rate(&self, count: u64) -> f64 {
        count as f64 / self.delivered.max(1) as f64
    }

    pub fn physical_rate(&self) -> f64 {
        self.rate(self.physical)
    }

    pub fn logical_rate(&self) -> f64 {
        self.rate(self.logical)
    }

    pub fn leak_physical_rate(&self) -> f64 {
        self.rate(self.leak_physical)
    }

    pub fn leak_logical_rate(&self) -> f64 {
        self.rate(self.leak_logical)
    }
}

/// (physical, logical) flags of one error component of a 49-qubit ancilla.
/// `harmful_logical` says whether the component's logical operator changes
/// the ancilla's state; if not it is free to absorb into the reduction.
pub fn classify(mask: u64, harmful_logical: bool) -> (bool, bool) {
    let class = harmful_logical.then_some(mask.count_ones() & 1 == 1);
    let weights = reduced_block_weights(mask, class);
    (weights.iter().any(|&w| w > 0), weights.iter().any(|&w| w >= 2))
}

/// An ancilla together with the cost of producing it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Delivered {
    pub frame: Frame,
    pub stats: FactoryStats,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactoryConfig {
    pub scheme: Scheme,
    /// Verification checks per 7-qubit ancilla: 4, or 3 to skip the logical check.
    pub checks: usize,
    pub retry_budget: u64,
}

impl FactoryConfig {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            checks: 4,
            retry_budget: DEFAULT_RETRY_BUDGET,
        }
    }

    pub fn with_checks(mut self, checks: usize) -> Self {
        self.checks = checks;
        self
    }

    pub fn with_retry_budget(mut self, budget: u64) -> Self {
        self.retry_budget = budget;
        self
    }
}

const VERIFIER: usize = 7;

/// Readout after a 7-qubit verification attempt.
enum Verdict {
    Pass(Frame),
    Fail,
}

/// Ancilla source for one worker. Owns no randomness; every call takes the
/// worker's [`Noise`].
#[derive(Clone, Debug)]
pub struct AncillaFactory {
    config: FactoryConfig,
    plus: EncodingCircuit,
    zero: EncodingCircuit,
    checks_plus: [Check; 4],
    checks_zero: [Check; 4],
    depth7: u64,
    stats: FactoryStats,
    tally: Option<AncillaTally>,
}

impl AncillaFactory {
    pub fn new(config: FactoryConfig) -> Result<Self> {
        if !(3..=4).contains(&config.checks) {
            return Err(SimError::Config(format!(
                "verification checks must be 3 or 4, got {}",
                config.checks
            )));
        }
        if config.retry_budget == 0 {
            return Err(SimError::Config("retry budget must be positive".into()));
        }
        let plus = EncodingCircuit::for_state(LogicalState::Plus);
        let zero = EncodingCircuit::for_state(LogicalState::Zero);
        let checks_plus = verification_checks(LogicalState::Plus);
        let depth7 = prepare7_depth(&plus, &checks_plus[..config.checks]) as u64;
        Ok(Self {
            config,
            plus,
            zero,
            checks_plus,
            checks_zero: verification_checks(LogicalState::Zero),
            depth7,
            stats: FactoryStats::default(),
            tally: None,
        })
    }

    pub fn config(&self) -> &FactoryConfig {
        &self.config
    }

    pub fn scheme(&self) -> Scheme {
        self.config.scheme
    }

    /// Running totals since construction (or the last [`take_stats`](Self::take_stats)).
    pub fn stats(&self) -> &FactoryStats {
        &self.stats
    }

    pub fn take_stats(&mut self) -> FactoryStats {
        std::mem::take(&mut self.stats)
    }

    /// Time steps of one noiseless verified (four-check) 49-qubit
    /// preparation: the unit of all reported overheads.
    pub fn baseline_time_steps() -> u64 {
        static BASELINE: OnceLock<u64> = OnceLock::new();
        *BASELINE.get_or_init(|| {
            let mut factory = AncillaFactory::new(FactoryConfig::new(Scheme::Steane)).expect("default config is valid");
            let mut noise = Noise::new(NoiseParams::noiseless(), RandomSource::new(0));
            factory
                .prepare49(&mut noise, LogicalState::Plus)
                .expect("noiseless preparation succeeds")
                .stats
                .time_steps
        })
    }

    /// Starts classifying every delivered 49-qubit ancilla.
    pub fn enable_tally(&mut self) {
        self.tally.get_or_insert_with(AncillaTally::default);
    }

    pub fn tally(&self) -> Option<&AncillaTally> {
        self.tally.as_ref()
    }

    fn circuit(&self, state: LogicalState) -> &EncodingCircuit {
        match state {
            LogicalState::Plus => &self.plus,
            LogicalState::Zero => &self.zero,
        }
    }

    fn checks(&self, state: LogicalState) -> &[Check] {
        let all = match state {
            LogicalState::Plus => &self.checks_plus,
            LogicalState::Zero => &self.checks_zero,
        };
        &all[..self.config.checks]
    }

    /// A verified 7-qubit ancilla.
    pub fn prepare7(&mut self, noise: &mut Noise, state: LogicalState) -> Result<Delivered> {
        let before = self.stats;
        let frame = self.prepare7_frame(noise, state)?;
        Ok(Delivered {
            frame,
            stats: self.stats - before,
        })
    }

    fn prepare7_frame(&mut self, noise: &mut Noise, state: LogicalState) -> Result<Frame> {
        for _ in 0..self.config.retry_budget {
            self.stats.attempts7 += 1;
            self.stats.time_steps += self.depth7;
            match self.attempt7(noise, state) {
                Verdict::Pass(f) => {
                    self.stats.delivered7 += 1;
                    return Ok(f);
                }
                Verdict::Fail => self.stats.rejections_l1 += 1,
            }
        }
        Err(SimError::RetryBudgetExhausted {
            what: "7-qubit ancilla",
            attempts: self.config.retry_budget,
        })
    }

    fn attempt7(&self, noise: &mut Noise, state: LogicalState) -> Verdict {
        let mut f = Frame::new(8);
        let fresh = noise.prepare_block(7);
        f.flip(ErrorType::X, fresh.x_mask());
        f.flip(ErrorType::Z, fresh.z_mask());
        for (c, t) in self.circuit(state).cnots() {
            noise.cnot_unchecked(&mut f, c, t);
        }
        for check in self.checks(state) {
            if run_check7(noise, &mut f, check) {
                return Verdict::Fail;
            }
        }
        Verdict::Pass(Frame::from_masks(7, f.x_mask(), f.z_mask()))
    }

    /// Syndrome of one 7-qubit sub-block of `frame`, extracted with a fresh
    /// verified ancilla. The sub-block picks up the coupling's back-action.
    pub fn extract_block_syndrome(
        &mut self,
        noise: &mut Noise,
        frame: &mut Frame,
        block: usize,
        kind: ErrorType,
    ) -> Result<Syndrome7> {
        let state = LogicalState::for_extraction(kind);
        let mut anc = self.prepare7_frame(noise, state)?;
        let mut blk = frame.block(block);
        match kind {
            ErrorType::X => noise.transversal_cnot(&mut blk, &mut anc),
            ErrorType::Z => noise.transversal_cnot(&mut anc, &mut blk),
        }
        frame.set_block(block, &blk);
        let flips = noise.measure_block(anc, state.readout_basis());
        self.stats.time_steps += 2;
        Ok(Syndrome7::of_mask(flips))
    }

    /// Sub-block correction by agreement: extract one syndrome at a time,
    /// stop at the first trivial one, and flip a qubit only once two
    /// syndromes agree (at most three extractions).
    fn correct_block(&mut self, noise: &mut Noise, frame: &mut Frame, block: usize, kind: ErrorType) -> Result<()> {
        let mut seen: [Option<Syndrome7>; 2] = [None; 2];
        for n in 0..3 {
            let s = self.extract_block_syndrome(noise, frame, block, kind)?;
            if s.is_zero() {
                return Ok(());
            }
            if seen.contains(&Some(s)) {
                if let Some(q) = decode7(s) {
                    frame.flip(kind, 1 << (7 * block + q));
                }
                return Ok(());
            }
            if n < 2 {
                seen[n] = Some(s);
            }
        }
        Ok(())
    }

    /// A 49-qubit ancilla from the configured scheme.
    pub fn prepare49(&mut self, noise: &mut Noise, state: LogicalState) -> Result<Delivered> {
        let before = self.stats;
        let frame = self.prepare49_frame(noise, state)?;
        Ok(Delivered {
            frame,
            stats: self.stats - before,
        })
    }

    pub(crate) fn prepare49_frame(&mut self, noise: &mut Noise, state: LogicalState) -> Result<Frame> {
        for _ in 0..self.config.retry_budget {
            self.stats.attempts49 += 1;
            let attempt = match self.config.scheme {
                Scheme::Ideal => self.attempt49_ideal(noise),
                scheme => self.attempt49(noise, state, scheme)?,
            };
            match attempt {
                Some(f) => {
                    self.stats.delivered49 += 1;
                    if let Some(t) = self.tally.as_mut() {
                        t.record(&f, state);
                    }
                    return Ok(f);
                }
                None => self.stats.rejections_l2 += 1,
            }
        }
        Err(SimError::RetryBudgetExhausted {
            what: "49-qubit ancilla",
            attempts: self.config.retry_budget,
        })
    }

    fn attempt49(&mut self, noise: &mut Noise, state: LogicalState, scheme: Scheme) -> Result<Option<Frame>> {
        let circuit = self.circuit(state).clone();
        let mut f = Frame::new(CONCAT_LEN);
        for (b, basis) in circuit.preps().iter().enumerate() {
            let block_state = match basis {
                Basis::X => LogicalState::Plus,
                Basis::Z => LogicalState::Zero,
            };
            let blk = self.prepare7_frame(noise, block_state)?;
            f.set_block(b, &blk);
        }
        for (l, layer) in circuit.layers().iter().enumerate() {
            for &(c, t) in layer {
                let mut bc = f.block(c);
                let mut bt = f.block(t);
                noise.transversal_cnot(&mut bc, &mut bt);
                f.set_block(c, &bc);
                f.set_block(t, &bt);
            }
            self.stats.time_steps += 1;
            for &(c, t) in layer {
                for b in [c, t] {
                    let (first, second) = pre_gate_ordering(next_role(&circuit, l, b, state));
                    for kind in [first, second] {
                        if scheme == Scheme::Reject {
                            let s = self.extract_block_syndrome(noise, &mut f, b, kind)?;
                            if !s.is_zero() {
                                return Ok(None);
                            }
                        } else {
                            self.correct_block(noise, &mut f, b, kind)?;
                        }
                    }
                }
            }
        }
        if scheme == Scheme::Steane {
            for check in verification_checks(state) {
                if self.logical_check(noise, &mut f, state, &check)? {
                    return Ok(None);
                }
            }
        }
        Ok(Some(f))
    }

    /// Measures one logical-level check of a 49-qubit |+>_L (|0>_L) candidate
    /// with a verified 7-qubit verifier block coupled transversally to each
    /// sub-block in the check's support. Returns true if the decoded verifier
    /// reports a violation.
    fn logical_check(&mut self, noise: &mut Noise, f: &mut Frame, state: LogicalState, check: &Check) -> Result<bool> {
        let mut verifier = self.prepare7_frame(noise, state)?;
        let mut layers = 0;
        for b in 0..BLOCKS {
            if check.support >> b & 1 == 0 {
                continue;
            }
            let mut blk = f.block(b);
            match check.detects {
                ErrorType::Z => noise.transversal_cnot(&mut verifier, &mut blk),
                ErrorType::X => noise.transversal_cnot(&mut blk, &mut verifier),
            }
            f.set_block(b, &blk);
            layers += 1;
        }
        let flips = noise.measure_block(verifier, state.info_basis());
        self.stats.time_steps += layers + 1;
        let corrected = parity7(flips) ^ !Syndrome7::of_mask(flips).is_zero();
        Ok(corrected)
    }

    fn attempt49_ideal(&mut self, noise: &mut Noise) -> Option<Frame> {
        self.stats.time_steps += 1;
        let f = noise.prepare_block(CONCAT_LEN);
        let detected = (0..BLOCKS).any(|b| {
            let blk = f.block(b);
            ErrorType::BOTH
                .iter()
                .any(|&k| !Syndrome7::of_mask(blk.mask(k)).is_zero())
        });
        (!detected).then_some(f)
    }
}

/// Role of sub-block `block` in its next logical CNOT after layer `layer`, or
/// the delivered ancilla's role in extraction if it has none.
fn next_role(circuit: &EncodingCircuit, layer: usize, block: usize, state: LogicalState) -> Role {
    for later in &circuit.layers()[layer + 1..] {
        for &(c, t) in later {
            if c == block {
                return Role::Control;
            }
            if t == block {
                return Role::Target;
            }
        }
    }
    match state {
        LogicalState::Plus => Role::Target,
        LogicalState::Zero => Role::Control,
    }
}

/// Runs one verification check on the candidate in qubits 0..7 using qubit 7
/// as the verifier. Returns the (noisy) flip bit.
fn run_check7(noise: &mut Noise, f: &mut Frame, check: &Check) -> bool {
    let mut qubits = check.support;
    f.clear(VERIFIER);
    // Z-detecting checks use a |+> verifier as CNOT control; X-detecting
    // checks a |0> verifier as target.
    let verifier_basis = match check.detects {
        ErrorType::Z => Basis::X,
        ErrorType::X => Basis::Z,
    };
    let p = noise.prepare(verifier_basis);
    f.apply_unchecked(VERIFIER, p);
    while qubits != 0 {
        let q = qubits.trailing_zeros() as usize;
        qubits &= qubits - 1;
        match check.detects {
            ErrorType::Z => noise.cnot_unchecked(f, VERIFIER, q),
            ErrorType::X => noise.cnot_unchecked(f, q, VERIFIER),
        }
    }
    let fault = noise.sample_fault();
    let readout = match check.detects {
        ErrorType::Z => fault.z_bit(),
        ErrorType::X => fault.x_bit(),
    };
    (f.mask(check.detects) >> VERIFIER & 1 == 1) ^ readout
}

/// Scheduled depth of one 7-qubit attempt: preparations, encoder, verifier
/// couplings and verifier readout.
fn prepare7_depth(circuit: &EncodingCircuit, checks: &[Check]) -> usize {
    let mut ops: Vec<Vec<usize>> = Vec::new();
    for q in 0..circuit.len() {
        ops.push(vec![q]);
    }
    for (k, _) in checks.iter().enumerate() {
        ops.push(vec![VERIFIER + k]);
    }
    for (c, t) in circuit.cnots() {
        ops.push(vec![c, t]);
    }
    for (k, check) in checks.iter().enumerate() {
        for q in 0..7 {
            if check.support >> q & 1 == 1 {
                ops.push(vec![VERIFIER + k, q]);
            }
        }
    }
    for (k, _) in checks.iter().enumerate() {
        ops.push(vec![VERIFIER + k]);
    }
    asap_depth(ops.iter().map(|v| v.as_slice()))
}
