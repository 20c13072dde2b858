//! Depolarizing noise on the four elementary operations.
//!
//! Preparation, single-qubit gates, CNOTs and destructive measurements each
//! fail independently with probability `gamma`. A failure depolarizes every
//! qubit the operation touches: each gets an independent uniformly random
//! Pauli, identity included. There are no memory errors.
//!
//! [`Noise`] decides failures with a geometric fault clock: instead of one
//! Bernoulli draw per operation it draws the gap to the next failure, which is
//! distributed identically and costs one decrement per operation at small
//! `gamma`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FrameError, Result, SimError};
use crate::pauli::{Basis, Frame, Pauli};

/// Depolarizing strength shared by all operation classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    gamma: f64,
}

impl NoiseParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(SimError::InvalidGamma(gamma));
        }
        Ok(Self { gamma })
    }

    pub fn noiseless() -> Self {
        Self { gamma: 0.0 }
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Seedable, splittable randomness.
///
/// A source is a ChaCha8 stream identified by `(seed, stream)`; the harness
/// gives every trial its own stream so results do not depend on scheduling.
#[derive(Clone, Debug)]
pub struct RandomSource {
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self::for_stream(seed, 0)
    }

    pub fn for_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        self.rng.random_range(0..n)
    }

    /// `k` distinct indices below `n`, uniformly.
    pub fn distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.rng, n, k).into_vec()
    }

    #[inline]
    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }

    #[inline]
    pub fn uniform_pauli(&mut self) -> Pauli {
        Pauli::from_index(self.rng.next_u32())
    }
}

/// Per-operation Bernoulli sampling of a depolarizing fault.
///
/// With probability `1 - gamma` returns `I`; otherwise a uniform Pauli. This is
/// the direct definition; [`Noise`] produces the same distribution faster.
pub fn sample_fault(rng: &mut RandomSource, gamma: f64) -> Pauli {
    if rng.next_f64() < gamma {
        rng.uniform_pauli()
    } else {
        Pauli::I
    }
}

/// A noisy execution context: parameters plus a private random stream.
#[derive(Clone, Debug)]
pub struct Noise {
    params: NoiseParams,
    log_keep: f64,
    countdown: u64,
    rng: RandomSource,
    bits: u64,
    bits_left: u32,
}

impl Noise {
    pub fn new(params: NoiseParams, rng: RandomSource) -> Self {
        let mut noise = Self {
            params,
            log_keep: (-params.gamma).ln_1p(),
            countdown: 0,
            rng,
            bits: 0,
            bits_left: 0,
        };
        noise.countdown = noise.gap();
        noise
    }

    #[inline]
    pub fn params(&self) -> NoiseParams {
        self.params
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    /// Randomness for protocol choices that are not faults (orderings, pool draws).
    #[inline]
    pub fn rng(&mut self) -> &mut RandomSource {
        &mut self.rng
    }

    /// Number of successful operations before the next failure.
    fn gap(&mut self) -> u64 {
        let g = self.params.gamma;
        if g <= 0.0 {
            return u64::MAX;
        }
        if g >= 1.0 {
            return 0;
        }
        let u = 1.0 - self.rng.next_f64();
        let k = (u.ln() / self.log_keep).floor();
        if k >= u64::MAX as f64 {
            u64::MAX
        } else {
            k as u64
        }
    }

    /// Whether the next elementary operation fails.
    #[inline]
    pub fn fails(&mut self) -> bool {
        if self.countdown == 0 {
            self.countdown = self.gap();
            true
        } else {
            self.countdown -= 1;
            false
        }
    }

    /// Failures among the next `n` operations, as a bit mask (bit i = i-th op).
    #[inline]
    pub fn fault_mask(&mut self, n: u32) -> u64 {
        debug_assert!(n <= 64);
        let n = n as u64;
        if self.countdown >= n {
            self.countdown -= n;
            return 0;
        }
        let mut mask = 0u64;
        let mut pos = 0u64;
        loop {
            let remaining = n - pos;
            if self.countdown >= remaining {
                self.countdown -= remaining;
                return mask;
            }
            pos += self.countdown;
            mask |= 1 << pos;
            pos += 1;
            self.countdown = self.gap();
        }
    }

    #[inline]
    fn take_bits(&mut self, k: u32) -> u32 {
        if self.bits_left < k {
            self.bits = self.rng.next_u64();
            self.bits_left = 64;
        }
        let v = (self.bits & ((1 << k) - 1)) as u32;
        self.bits >>= k;
        self.bits_left -= k;
        v
    }

    /// A uniformly random Pauli (the depolarized state's record).
    #[inline]
    pub fn uniform_pauli(&mut self) -> Pauli {
        Pauli::from_index(self.take_bits(2))
    }

    /// The fault of one operation on one qubit.
    #[inline]
    pub fn sample_fault(&mut self) -> Pauli {
        if self.fails() {
            self.uniform_pauli()
        } else {
            Pauli::I
        }
    }

    /// Error record of a freshly prepared qubit. Both bases fail the same way.
    #[inline]
    pub fn prepare(&mut self, _basis: Basis) -> Pauli {
        self.sample_fault()
    }

    /// `n` fresh qubits prepared in parallel.
    pub fn prepare_block(&mut self, n: usize) -> Frame {
        let mut f = Frame::new(n);
        let mut faults = self.fault_mask(n as u32);
        while faults != 0 {
            let q = faults.trailing_zeros() as usize;
            faults &= faults - 1;
            let p = self.uniform_pauli();
            f.apply_unchecked(q, p);
        }
        f
    }

    /// Ideal CNOT followed, with probability gamma, by depolarization of both qubits.
    pub fn cnot(&mut self, frame: &mut Frame, control: usize, target: usize) -> Result<(), FrameError> {
        frame.propagate_cnot(control, target)?;
        if self.fails() {
            self.depolarize_pair(frame, control, target);
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn cnot_unchecked(&mut self, frame: &mut Frame, control: usize, target: usize) {
        frame.cnot_unchecked(control, target);
        if self.fails() {
            self.depolarize_pair(frame, control, target);
        }
    }

    #[inline]
    fn depolarize_pair(&mut self, frame: &mut Frame, a: usize, b: usize) {
        let bits = self.take_bits(4);
        frame.apply_unchecked(a, Pauli::from_index(bits));
        frame.apply_unchecked(b, Pauli::from_index(bits >> 2));
    }

    /// Noisy Hadamard on one qubit.
    pub fn hadamard(&mut self, frame: &mut Frame, q: usize) -> Result<(), FrameError> {
        frame.propagate_hadamard(q)?;
        let p = self.sample_fault();
        frame.apply(q, p)
    }

    /// Noisy destructive measurement: a failure depolarizes the qubit just
    /// before it is read out.
    pub fn measure(&mut self, frame: &mut Frame, q: usize, basis: Basis) -> Result<bool, FrameError> {
        let p = self.sample_fault();
        frame.apply(q, p)?;
        frame.measure_flip(q, basis)
    }

    /// Qubit-wise CNOT from every qubit of `control` to the matching qubit of `target`.
    pub fn transversal_cnot(&mut self, control: &mut Frame, target: &mut Frame) {
        assert_eq!(control.len(), target.len(), "transversal CNOT between unequal blocks");
        let n = control.len();
        {
            let cx = control.x_mask();
            let tz = target.z_mask();
            let (tx, _) = target.masks_mut();
            *tx ^= cx;
            let (_, cz) = control.masks_mut();
            *cz ^= tz;
        }
        let mut faults = self.fault_mask(n as u32);
        while faults != 0 {
            let q = faults.trailing_zeros() as usize;
            faults &= faults - 1;
            let bits = self.take_bits(4);
            control.apply_unchecked(q, Pauli::from_index(bits));
            target.apply_unchecked(q, Pauli::from_index(bits >> 2));
        }
    }

    /// Transversal destructive measurement; returns the mask of flipped outcomes.
    pub fn measure_block(&mut self, mut frame: Frame, basis: Basis) -> u64 {
        let mut faults = self.fault_mask(frame.len() as u32);
        while faults != 0 {
            let q = faults.trailing_zeros() as usize;
            faults &= faults - 1;
            let p = self.uniform_pauli();
            frame.apply_unchecked(q, p);
        }
        frame.measure_all(basis)
    }
}
