//! Phaseless Pauli frames.
//!
//! A frame records, for every qubit of a block, which Pauli error (I, X, Y or Z)
//! it currently carries. Phases are dropped: only the error statistics matter,
//! and the ideal state of every block is a known stabilizer state.
//!
//! Frames are bit-packed as an x-mask and a z-mask in two `u64` words, so a
//! 49-qubit block fits in a single pair and syndromes are computed word-wise.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use crate::error::FrameError;

/// Largest block the packed representation supports.
pub const MAX_QUBITS: usize = 64;

/// A single-qubit Pauli operator modulo phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Pauli {
    #[default]
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub const fn from_bits(x_bit: bool, z_bit: bool) -> Self {
        match (x_bit, z_bit) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Decodes the two low bits of `bits` as `(x, z)`.
    #[inline]
    pub const fn from_index(bits: u32) -> Self {
        Self::from_bits(bits & 1 != 0, bits & 2 != 0)
    }

    #[inline]
    pub const fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    #[inline]
    pub const fn z_bit(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// Phaseless product: the x and z bits add modulo two.
    #[inline]
    pub const fn compose(self, other: Pauli) -> Pauli {
        Self::from_bits(self.x_bit() ^ other.x_bit(), self.z_bit() ^ other.z_bit())
    }

    #[inline]
    pub const fn is_identity(self) -> bool {
        matches!(self, Pauli::I)
    }

    /// Conjugation by a Hadamard exchanges X and Z.
    #[inline]
    pub const fn hadamard(self) -> Pauli {
        Self::from_bits(self.z_bit(), self.x_bit())
    }
}

impl BitXor for Pauli {
    type Output = Pauli;

    fn bitxor(self, rhs: Pauli) -> Pauli {
        self.compose(rhs)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Which component of an error a check or syndrome looks at.
///
/// `X` means bit-flip errors (the x-mask), `Z` phase-flip errors (the z-mask).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorType {
    X,
    Z,
}

impl ErrorType {
    pub const BOTH: [ErrorType; 2] = [ErrorType::X, ErrorType::Z];

    pub const fn other(self) -> ErrorType {
        match self {
            ErrorType::X => ErrorType::Z,
            ErrorType::Z => ErrorType::X,
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorType::X => write!(f, "X"),
            ErrorType::Z => write!(f, "Z"),
        }
    }
}

/// Measurement or preparation basis of a single qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Computational basis: prepares |0>, measurement is flipped by X and Y.
    Z,
    /// Conjugate basis: prepares |+>, measurement is flipped by Z and Y.
    X,
}

impl Basis {
    /// The error component that flips a measurement in this basis.
    pub const fn flipped_by(self) -> ErrorType {
        match self {
            Basis::Z => ErrorType::X,
            Basis::X => ErrorType::Z,
        }
    }

    pub const fn dual(self) -> Basis {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }
}

#[inline]
pub(crate) const fn low_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Per-qubit error record of a block of `len` qubits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Frame {
    x: u64,
    z: u64,
    retired: u64,
    len: u8,
}

impl Frame {
    /// An error-free frame on `len` qubits.
    ///
    /// # Panics
    /// If `len` exceeds [`MAX_QUBITS`].
    pub fn new(len: usize) -> Self {
        assert!(len <= MAX_QUBITS, "frame length {len} exceeds {MAX_QUBITS}");
        Self {
            x: 0,
            z: 0,
            retired: 0,
            len: len as u8,
        }
    }

    /// Builds a frame from raw masks; bits at or beyond `len` are discarded.
    pub fn from_masks(len: usize, x: u64, z: u64) -> Self {
        let mut f = Self::new(len);
        let m = low_mask(len);
        f.x = x & m;
        f.z = z & m;
        f
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Self {
        let mut f = Self::new(paulis.len());
        for (q, p) in paulis.iter().enumerate() {
            f.x |= (p.x_bit() as u64) << q;
            f.z |= (p.z_bit() as u64) << q;
        }
        f
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn x_mask(&self) -> u64 {
        self.x
    }

    #[inline]
    pub fn z_mask(&self) -> u64 {
        self.z
    }

    #[inline]
    pub fn mask(&self, kind: ErrorType) -> u64 {
        match kind {
            ErrorType::X => self.x,
            ErrorType::Z => self.z,
        }
    }

    /// Qubits already consumed by a destructive measurement.
    #[inline]
    pub fn retired_mask(&self) -> u64 {
        self.retired
    }

    /// Number of qubits carrying a non-identity Pauli.
    #[inline]
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    #[inline]
    pub fn is_clean(&self) -> bool {
        self.x | self.z == 0
    }

    fn check(&self, q: usize) -> Result<(), FrameError> {
        if q >= self.len() {
            return Err(FrameError::OutOfRange {
                index: q,
                len: self.len(),
            });
        }
        if self.retired >> q & 1 == 1 {
            return Err(FrameError::Retired { index: q });
        }
        Ok(())
    }

    pub fn get(&self, q: usize) -> Result<Pauli, FrameError> {
        if q >= self.len() {
            return Err(FrameError::OutOfRange {
                index: q,
                len: self.len(),
            });
        }
        Ok(Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1))
    }

    pub fn paulis(&self) -> Vec<Pauli> {
        (0..self.len())
            .map(|q| Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1))
            .collect()
    }

    /// Composes `p` onto the entry at `q`.
    pub fn apply(&mut self, q: usize, p: Pauli) -> Result<(), FrameError> {
        self.check(q)?;
        self.apply_unchecked(q, p);
        Ok(())
    }

    #[inline]
    pub(crate) fn apply_unchecked(&mut self, q: usize, p: Pauli) {
        self.x ^= (p.x_bit() as u64) << q;
        self.z ^= (p.z_bit() as u64) << q;
    }

    /// Resets the entry at `q` to I, as for a qubit about to be re-prepared.
    #[inline]
    pub(crate) fn clear(&mut self, q: usize) {
        self.x &= !(1 << q);
        self.z &= !(1 << q);
        self.retired &= !(1 << q);
    }

    /// Flips the given component on every qubit in `mask` (a classical correction).
    #[inline]
    pub fn flip(&mut self, kind: ErrorType, mask: u64) {
        let mask = mask & low_mask(self.len());
        match kind {
            ErrorType::X => self.x ^= mask,
            ErrorType::Z => self.z ^= mask,
        }
    }

    /// Entry-wise composition with another frame of the same length.
    pub fn compose(&self, other: &Frame) -> Result<Frame, FrameError> {
        if self.len != other.len {
            return Err(FrameError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        let mut out = *self;
        out.x ^= other.x;
        out.z ^= other.z;
        out.retired |= other.retired;
        Ok(out)
    }

    /// Conjugation by CNOT: X on the control spreads to the target, Z on the
    /// target spreads to the control.
    pub fn propagate_cnot(&mut self, control: usize, target: usize) -> Result<(), FrameError> {
        self.check(control)?;
        self.check(target)?;
        if control == target {
            return Err(FrameError::SameQubit { index: control });
        }
        self.cnot_unchecked(control, target);
        Ok(())
    }

    #[inline]
    pub(crate) fn cnot_unchecked(&mut self, control: usize, target: usize) {
        self.x ^= (self.x >> control & 1) << target;
        self.z ^= (self.z >> target & 1) << control;
    }

    /// Conjugation by a Hadamard: swaps the x and z bits at `q`.
    pub fn propagate_hadamard(&mut self, q: usize) -> Result<(), FrameError> {
        self.check(q)?;
        let xb = self.x >> q & 1;
        let zb = self.z >> q & 1;
        self.x ^= (xb ^ zb) << q;
        self.z ^= (xb ^ zb) << q;
        Ok(())
    }

    /// Hadamard on every qubit.
    pub fn transpose(&self) -> Frame {
        Frame {
            x: self.z,
            z: self.x,
            retired: self.retired,
            len: self.len,
        }
    }

    /// Destructively measures qubit `q`, returning whether the recorded error
    /// flips the ideal outcome. The qubit is retired and its entry cleared.
    pub fn measure_flip(&mut self, q: usize, basis: Basis) -> Result<bool, FrameError> {
        self.check(q)?;
        let flip = self.mask(basis.flipped_by()) >> q & 1 == 1;
        self.x &= !(1 << q);
        self.z &= !(1 << q);
        self.retired |= 1 << q;
        Ok(flip)
    }

    /// Transversal destructive measurement of the whole block; returns the
    /// mask of flipped outcomes.
    #[inline]
    pub fn measure_all(self, basis: Basis) -> u64 {
        self.mask(basis.flipped_by()) & !self.retired
    }

    /// The `index`-th 7-qubit sub-block as its own frame.
    #[inline]
    pub fn block(&self, index: usize) -> Frame {
        let shift = 7 * index;
        Frame::from_masks(7, self.x >> shift, self.z >> shift)
    }

    #[inline]
    pub fn set_block(&mut self, index: usize, block: &Frame) {
        let shift = 7 * index;
        let m = 0x7fu64 << shift;
        self.x = (self.x & !m) | ((block.x & 0x7f) << shift);
        self.z = (self.z & !m) | ((block.z & 0x7f) << shift);
    }

    #[inline]
    pub(crate) fn masks_mut(&mut self) -> (&mut u64, &mut u64) {
        (&mut self.x, &mut self.z)
    }
}

impl BitXorAssign<&Frame> for Frame {
    fn bitxor_assign(&mut self, rhs: &Frame) {
        assert_eq!(self.len, rhs.len, "frame length mismatch");
        self.x ^= rhs.x;
        self.z ^= rhs.z;
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frame(")?;
        for q in 0..self.len() {
            if q > 0 && q % 7 == 0 {
                write!(f, " ")?;
            }
            let p = Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1);
            if p.is_identity() {
                write!(f, ".")?;
            } else {
                write!(f, "{p}")?;
            }
        }
        write!(f, ")")
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // 2x2 complex matrices as [[re, im]; 4], row-major.
    type C = (f64, f64);
    type M = [C; 4];

    fn mul(a: &M, b: &M) -> M {
        let cm = |x: C, y: C| (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
        let ca = |x: C, y: C| (x.0 + y.0, x.1 + y.1);
        [
            ca(cm(a[0], b[0]), cm(a[1], b[2])),
            ca(cm(a[0], b[1]), cm(a[1], b[3])),
            ca(cm(a[2], b[0]), cm(a[3], b[2])),
            ca(cm(a[2], b[1]), cm(a[3], b[3])),
        ]
    }

    fn matrix(p: Pauli) -> M {
        let o = (0.0, 0.0);
        let one = (1.0, 0.0);
        match p {
            Pauli::I => [one, o, o, one],
            Pauli::X => [o, one, one, o],
            Pauli::Y => [o, (0.0, -1.0), (0.0, 1.0), o],
            Pauli::Z => [one, o, o, (-1.0, 0.0)],
        }
    }

    /// 4x4 Kronecker product, control qubit as the high index.
    fn kron(a: &M, b: &M) -> [[C; 4]; 4] {
        let mut out = [[(0.0, 0.0); 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let x = a[i * 2 + j];
                        let y = b[k * 2 + l];
                        out[i * 2 + k][j * 2 + l] = (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
                    }
                }
            }
        }
        out
    }

    /// Brute-force CNOT conjugation table: for each input pair, find the
    /// output pair equal to CNOT (a⊗b) CNOT up to a global phase.
    fn cnot_oracle(a: Pauli, b: Pauli) -> (Pauli, Pauli) {
        let perm = [0usize, 1, 3, 2];
        let input = kron(&matrix(a), &matrix(b));
        let mut conj = [[(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                conj[i][j] = input[perm[i]][perm[j]];
            }
        }
        for pa in Pauli::ALL {
            for pb in Pauli::ALL {
                let cand = kron(&matrix(pa), &matrix(pb));
                // conj = phase * cand for some unit phase
                let mut phase: Option<C> = None;
                let mut ok = true;
                for i in 0..4 {
                    for j in 0..4 {
                        let (c, d) = (cand[i][j], conj[i][j]);
                        let cz = c.0.abs() + c.1.abs() < 1e-12;
                        let dz = d.0.abs() + d.1.abs() < 1e-12;
                        if cz != dz {
                            ok = false;
                        } else if !cz {
                            // d / c
                            let den = c.0 * c.0 + c.1 * c.1;
                            let q = ((d.0 * c.0 + d.1 * c.1) / den, (d.1 * c.0 - d.0 * c.1) / den);
                            match phase {
                                None => phase = Some(q),
                                Some(p) => {
                                    if (p.0 - q.0).abs() + (p.1 - q.1).abs() > 1e-9 {
                                        ok = false;
                                    }
                                }
                            }
                        }
                    }
                }
                if ok {
                    return (pa, pb);
                }
            }
        }
        unreachable!("CNOT maps Paulis to Paulis")
    }

    #[test]
    fn compose_examples() {
        assert_eq!(Pauli::I ^ Pauli::X, Pauli::X);
        assert_eq!(Pauli::X ^ Pauli::Z, Pauli::Y);
        assert_eq!(Pauli::Y ^ Pauli::Y, Pauli::I);
    }

    #[test]
    fn compose_is_abelian_group_of_order_four() {
        for a in Pauli::ALL {
            assert_eq!(a ^ Pauli::I, a);
            assert_eq!(a ^ a, Pauli::I);
            for b in Pauli::ALL {
                assert_eq!(a ^ b, b ^ a);
                for c in Pauli::ALL {
                    assert_eq!((a ^ b) ^ c, a ^ (b ^ c));
                }
            }
        }
    }

    #[test]
    fn compose_matches_matrix_product_up_to_phase() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let prod = mul(&matrix(a), &matrix(b));
                let expect = matrix(a ^ b);
                // compare |entries|
                for k in 0..4 {
                    let l = (prod[k].0.powi(2) + prod[k].1.powi(2)).sqrt();
                    let r = (expect[k].0.powi(2) + expect[k].1.powi(2)).sqrt();
                    assert!((l - r).abs() < 1e-12, "{a}{b}");
                }
            }
        }
    }

    #[test]
    fn cnot_examples() {
        let mut f = Frame::from_paulis(&[Pauli::X, Pauli::I]);
        f.propagate_cnot(0, 1).unwrap();
        assert_eq!(f.paulis(), vec![Pauli::X, Pauli::X]);

        let mut f = Frame::from_paulis(&[Pauli::I, Pauli::Z]);
        f.propagate_cnot(0, 1).unwrap();
        assert_eq!(f.paulis(), vec![Pauli::Z, Pauli::Z]);

        let mut f = Frame::from_paulis(&[Pauli::Z, Pauli::I]);
        f.propagate_cnot(0, 1).unwrap();
        assert_eq!(f.paulis(), vec![Pauli::Z, Pauli::I]);
    }

    #[test]
    fn cnot_matches_matrix_conjugation_table() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let mut f = Frame::from_paulis(&[a, b]);
                f.propagate_cnot(0, 1).unwrap();
                let (ea, eb) = cnot_oracle(a, b);
                assert_eq!(f.paulis(), vec![ea, eb], "CNOT on {a}{b}");
            }
        }
    }

    #[test]
    fn cnot_usage_errors() {
        let mut f = Frame::new(7);
        assert!(matches!(
            f.propagate_cnot(0, 7),
            Err(FrameError::OutOfRange { index: 7, len: 7 })
        ));
        assert!(matches!(
            f.propagate_cnot(3, 3),
            Err(FrameError::SameQubit { index: 3 })
        ));
        assert!(f.propagate_hadamard(9).is_err());
    }

    #[test]
    fn hadamard_examples() {
        let mut f = Frame::from_paulis(&[Pauli::X, Pauli::Y, Pauli::I]);
        for q in 0..3 {
            f.propagate_hadamard(q).unwrap();
        }
        assert_eq!(f.paulis(), vec![Pauli::Z, Pauli::Y, Pauli::I]);
    }

    #[test]
    fn measure_examples() {
        let mut f = Frame::from_paulis(&[Pauli::Y, Pauli::Z, Pauli::Z]);
        assert!(f.measure_flip(0, Basis::Z).unwrap());
        assert!(!f.measure_flip(1, Basis::Z).unwrap());
        assert!(f.measure_flip(2, Basis::X).unwrap());
        // retired
        assert!(matches!(
            f.measure_flip(0, Basis::Z),
            Err(FrameError::Retired { index: 0 })
        ));
        assert!(f.propagate_cnot(0, 1).is_err());
    }

    #[test]
    fn block_roundtrip() {
        let mut f = Frame::new(49);
        let b = Frame::from_paulis(&[Pauli::X, Pauli::I, Pauli::Z, Pauli::I, Pauli::I, Pauli::Y, Pauli::I]);
        f.set_block(3, &b);
        assert_eq!(f.block(3), b);
        assert_eq!(f.block(2), Frame::new(7));
        assert_eq!(f.weight(), 3);
        assert_eq!(f.get(21).unwrap(), Pauli::X);
    }

    fn arb_frame(n: usize) -> impl Strategy<Value = Frame> {
        (any::<u64>(), any::<u64>()).prop_map(move |(x, z)| Frame::from_masks(n, x, z))
    }

    proptest! {
        #[test]
        fn cnot_is_an_involution(f in arb_frame(49), c in 0usize..49, t in 0usize..49) {
            prop_assume!(c != t);
            let mut g = f;
            g.propagate_cnot(c, t).unwrap();
            g.propagate_cnot(c, t).unwrap();
            prop_assert_eq!(g, f);
        }

        #[test]
        fn weight_is_subadditive(a in arb_frame(49), b in arb_frame(49)) {
            let c = a.compose(&b).unwrap();
            prop_assert!(c.weight() <= a.weight() + b.weight());
            prop_assert!(c.weight() <= 49);
        }

        #[test]
        fn length_is_preserved(f in arb_frame(7), c in 0usize..7, t in 0usize..7, q in 0usize..7) {
            prop_assume!(c != t);
            let mut g = f;
            g.propagate_cnot(c, t).unwrap();
            g.propagate_hadamard(q).unwrap();
            prop_assert_eq!(g.len(), 7);
        }
    }
}
