//! The Steane [[7,1,3]] code and its one-level concatenation as a [[49,1,9]] code.
//!
//! Qubit `q` of a 7-qubit block sits at Hamming position `q + 1`, and column
//! `j` of the check matrix is the binary expansion of `j`. With that labeling a
//! nonzero syndrome is directly the position of a single flipped bit. The code
//! is self-dual, so one table serves both X and Z errors.
//!
//! A 49-qubit block is seven 7-qubit sub-blocks; qubit `7 * b + q` is qubit `q`
//! of sub-block `b`. Its syndrome for one error type is the seven inner
//! syndromes plus the outer syndrome of the seven sub-block parities.

use std::fmt;

use crate::pauli::{ErrorType, Frame};

pub const BLOCK_LEN: usize = 7;
pub const BLOCKS: usize = 7;
pub const CONCAT_LEN: usize = BLOCK_LEN * BLOCKS;

const fn syndrome_of(mask: u32) -> u8 {
    let mut s = 0u32;
    let mut q = 0;
    while q < 7 {
        if mask >> q & 1 == 1 {
            s ^= q + 1;
        }
        q += 1;
    }
    s as u8
}

const SYNDROME_TABLE: [u8; 128] = {
    let mut t = [0u8; 128];
    let mut m = 0;
    while m < 128 {
        t[m] = syndrome_of(m as u32);
        m += 1;
    }
    t
};

/// Row `r` of the check matrix as a 7-bit support mask.
const fn check_row(r: u32) -> u8 {
    let mut m = 0u8;
    let mut q = 0;
    while q < 7 {
        if (q + 1) >> r & 1 == 1 {
            m |= 1 << q;
        }
        q += 1;
    }
    m
}

/// The 3 x 7 parity-check matrix of the Hamming code, stored by rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckMatrix {
    rows: [u8; 3],
}

impl CheckMatrix {
    pub const HAMMING: CheckMatrix = CheckMatrix {
        rows: [check_row(0), check_row(1), check_row(2)],
    };

    pub fn rows(&self) -> [u8; 3] {
        self.rows
    }

    /// Column `j` (1-based position) as a 3-bit value.
    pub fn column(&self, position: usize) -> u8 {
        let q = position - 1;
        (0..3).fold(0u8, |acc, r| acc | ((self.rows[r] >> q & 1) << r))
    }

    /// All 8 elements of the row space (the stabilizer supports, identity included).
    pub fn row_space(&self) -> [u8; 8] {
        let mut out = [0u8; 8];
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = (0..3)
                .filter(|r| c >> r & 1 == 1)
                .fold(0u8, |acc, r| acc ^ self.rows[r]);
        }
        out
    }
}

/// Supports of the three stabilizer generators of each type.
pub const STABILIZER_ROWS: [u8; 3] = [check_row(0), check_row(1), check_row(2)];

/// Support of the weight-3 logical representative used by verification checks.
pub const LOGICAL_SUPPORT: u8 = 0b000_0111;

/// Three-bit syndrome of one 7-qubit block for one error type.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syndrome7(u8);

impl Syndrome7 {
    pub const ZERO: Syndrome7 = Syndrome7(0);

    pub fn new(value: u8) -> Self {
        assert!(value < 8, "syndrome value {value} out of range");
        Syndrome7(value)
    }

    /// Syndrome of the low seven bits of `mask`.
    #[inline]
    pub fn of_mask(mask: u64) -> Self {
        Syndrome7(SYNDROME_TABLE[(mask & 0x7f) as usize])
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Parity of the low seven bits: the transversal logical value of a block.
#[inline]
pub fn parity7(mask: u64) -> bool {
    (mask & 0x7f).count_ones() & 1 == 1
}

pub fn syndrome7(frame: &Frame, kind: ErrorType) -> Syndrome7 {
    Syndrome7::of_mask(frame.mask(kind))
}

/// Position-to-fix lookup: the qubit index whose column equals `s`.
#[inline]
pub fn decode7(s: Syndrome7) -> Option<usize> {
    if s.0 == 0 {
        None
    } else {
        Some(s.0 as usize - 1)
    }
}

/// Overlap parity of the error's `kind` component with the all-ones logical.
pub fn logical_value(frame: &Frame, kind: ErrorType) -> bool {
    frame.mask(kind).count_ones() & 1 == 1
}

/// Minimum-weight representatives of one syndrome coset, split by logical class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CosetEntry {
    pub weight: [u8; 2],
    pub rep: [u8; 2],
}

const COSET_TABLE: [CosetEntry; 8] = {
    let mut t = [CosetEntry {
        weight: [u8::MAX; 2],
        rep: [0; 2],
    }; 8];
    // ascending scan keeps the numerically smallest minimum-weight mask
    let mut m = 0u32;
    while m < 128 {
        let s = SYNDROME_TABLE[m as usize] as usize;
        let class = (m.count_ones() & 1) as usize;
        let w = m.count_ones() as u8;
        if w < t[s].weight[class] {
            t[s].weight[class] = w;
            t[s].rep[class] = m as u8;
        }
        m += 1;
    }
    t
};

/// Minimum weight and representative for each logical class of syndrome `s`.
#[inline]
pub fn coset_weights(s: Syndrome7) -> CosetEntry {
    COSET_TABLE[s.0 as usize]
}

/// Inner and outer syndromes of a 49-qubit block for one error type, packed
/// into 24 bits: three per sub-block, then three for the outer code.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Syndrome49(u32);

impl Syndrome49 {
    pub const ZERO: Syndrome49 = Syndrome49(0);

    pub fn from_parts(inner: [Syndrome7; BLOCKS], outer: Syndrome7) -> Self {
        let mut v = 0u32;
        for (b, s) in inner.iter().enumerate() {
            v |= (s.0 as u32) << (3 * b);
        }
        v |= (outer.0 as u32) << 21;
        Syndrome49(v)
    }

    /// Syndrome of an error (or of a measured flip pattern) given as a 49-bit mask.
    #[inline]
    pub fn of_mask(mask: u64) -> Self {
        let mut v = 0u32;
        let mut parities = 0u64;
        for b in 0..BLOCKS {
            let block = mask >> (7 * b) & 0x7f;
            v |= (SYNDROME_TABLE[block as usize] as u32) << (3 * b);
            parities |= ((block.count_ones() & 1) as u64) << b;
        }
        v |= (SYNDROME_TABLE[parities as usize] as u32) << 21;
        Syndrome49(v)
    }

    pub fn of_frame(frame: &Frame, kind: ErrorType) -> Self {
        Self::of_mask(frame.mask(kind))
    }

    #[inline]
    pub fn inner(self, block: usize) -> Syndrome7 {
        Syndrome7((self.0 >> (3 * block) & 7) as u8)
    }

    #[inline]
    pub fn outer(self) -> Syndrome7 {
        Syndrome7((self.0 >> 21 & 7) as u8)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

impl fmt::Debug for Syndrome49 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Syndrome49[")?;
        for b in 0..BLOCKS {
            write!(f, "{}", self.inner(b).0)?;
        }
        write!(f, "|{}]", self.outer().0)
    }
}

/// A physical correction for one error type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorrectionPlan {
    /// Qubits to flip, as a 49-bit mask.
    pub flips: u64,
    pub weight: u32,
    /// Outer logical value of the correction (parity of its sub-block parities).
    pub logical_class: bool,
}

impl CorrectionPlan {
    pub const EMPTY: CorrectionPlan = CorrectionPlan {
        flips: 0,
        weight: 0,
        logical_class: false,
    };

    fn from_flips(flips: u64) -> Self {
        CorrectionPlan {
            flips,
            weight: flips.count_ones(),
            logical_class: flips.count_ones() & 1 == 1,
        }
    }
}

/// For each outer syndrome, its 16 admissible sub-block parity vectors ordered
/// by (class, value) so a strict-improvement scan honors the tie-break.
const ADMISSIBLE: [[u8; 16]; 8] = {
    let mut t = [[0u8; 16]; 8];
    let mut fill = [0usize; 8];
    let mut class = 0;
    while class < 2 {
        let mut b = 0u32;
        while b < 128 {
            if (b.count_ones() & 1) as usize == class {
                let s = SYNDROME_TABLE[b as usize] as usize;
                t[s][fill[s]] = b as u8;
                fill[s] += 1;
            }
            b += 1;
        }
        class += 1;
    }
    t
};

fn decode49_filtered(s: Syndrome49, class: Option<bool>) -> CorrectionPlan {
    let mut inner = [COSET_TABLE[0]; BLOCKS];
    for (b, slot) in inner.iter_mut().enumerate() {
        *slot = COSET_TABLE[s.inner(b).0 as usize];
    }
    let mut best: Option<(u32, u8)> = None;
    for &b in ADMISSIBLE[s.outer().0 as usize].iter() {
        if let Some(c) = class {
            if (b.count_ones() & 1 == 1) != c {
                continue;
            }
        }
        let cost: u32 = (0..BLOCKS)
            .map(|i| inner[i].weight[(b >> i & 1) as usize] as u32)
            .sum();
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, b));
        }
    }
    let (_, b) = best.expect("every outer syndrome has admissible parity vectors");
    let flips = (0..BLOCKS).fold(0u64, |acc, i| {
        acc | (inner[i].rep[(b >> i & 1) as usize] as u64) << (7 * i)
    });
    CorrectionPlan::from_flips(flips)
}

/// Exact minimum-weight decoding of the concatenated code.
///
/// Ties prefer logical class 0, then the smallest sub-block parity vector,
/// then the smallest representative within each sub-block.
pub fn decode49(s: Syndrome49) -> CorrectionPlan {
    decode49_filtered(s, None)
}

/// Minimum-weight correction restricted to one logical class.
pub fn decode49_in_class(s: Syndrome49, class: bool) -> CorrectionPlan {
    decode49_filtered(s, Some(class))
}

/// Level-by-level decoding: fix one bit per sub-block from its own syndrome,
/// then fix one sub-block's logical value from the corrected parities.
pub fn hierarchical_decode49(s: Syndrome49) -> CorrectionPlan {
    let mut flips = 0u64;
    let mut parities = 0u64;
    for b in 0..BLOCKS {
        if let Some(q) = decode7(s.inner(b)) {
            flips |= 1 << (7 * b + q);
            parities |= 1 << b;
        }
    }
    let residual = Syndrome7(s.outer().0 ^ SYNDROME_TABLE[parities as usize]);
    if let Some(b) = decode7(residual) {
        flips ^= (LOGICAL_SUPPORT as u64) << (7 * b);
    }
    CorrectionPlan::from_flips(flips)
}

/// Whether a perfect minimum-weight decoder would leave a logical error in
/// the `kind` component.
#[inline]
pub fn component_crashes(mask: u64) -> bool {
    let plan = decode49(Syndrome49::of_mask(mask));
    plan.logical_class != (mask.count_ones() & 1 == 1)
}

/// Crash verdict of a 49-qubit frame: true if either component would be
/// decoded to a logical error.
pub fn crash_check(frame: &Frame) -> bool {
    let (x, z) = crash_components(frame);
    x || z
}

pub fn crash_components(frame: &Frame) -> (bool, bool) {
    (
        component_crashes(frame.x_mask()),
        component_crashes(frame.z_mask()),
    )
}

/// Weights of the seven sub-block pieces of the minimum-weight equivalent of
/// `mask`, taken within a fixed logical class (or across both when `class`
/// is `None`, for components where the logical operator is harmless).
pub fn reduced_block_weights(mask: u64, class: Option<bool>) -> [u8; BLOCKS] {
    let s = Syndrome49::of_mask(mask);
    let plan = match class {
        Some(c) => decode49_in_class(s, c),
        None => decode49(s),
    };
    let mut out = [0u8; BLOCKS];
    for (b, w) in out.iter_mut().enumerate() {
        *w = (plan.flips >> (7 * b) & 0x7f).count_ones() as u8;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn x_at(positions: &[usize], len: usize) -> Frame {
        let mut f = Frame::new(len);
        for &p in positions {
            f.apply(p, Pauli::X).unwrap();
        }
        f
    }

    #[test]
    fn check_matrix_columns_are_binary_positions() {
        let h = CheckMatrix::HAMMING;
        let mut seen = [false; 8];
        for j in 1..=7 {
            assert_eq!(h.column(j), j as u8);
            assert!(!seen[j]);
            seen[j] = true;
        }
        assert_eq!(STABILIZER_ROWS, h.rows());
    }

    #[test]
    fn code_contains_its_dual() {
        // brute force over all 128 words: collect ker(H)
        let codewords: Vec<u8> = (0u8..128).filter(|&m| syndrome_of(m as u32) == 0).collect();
        assert_eq!(codewords.len(), 16);
        for row in CheckMatrix::HAMMING.row_space() {
            assert!(codewords.contains(&row), "row {row:07b} not a codeword");
            // even overlap with the logical representative
            assert_eq!(row.count_ones() % 2, 0);
            if row != 0 {
                assert_eq!(row.count_ones(), 4);
            }
        }
    }

    #[test]
    fn syndrome7_examples() {
        assert_eq!(syndrome7(&Frame::new(7), ErrorType::X), Syndrome7::ZERO);
        // single X at position 5 (qubit 4)
        assert_eq!(syndrome7(&x_at(&[4], 7), ErrorType::X).value(), 5);
        assert_eq!(syndrome7(&x_at(&[4], 7), ErrorType::Z).value(), 0);
        // positions 1,2,3
        assert_eq!(syndrome7(&x_at(&[0, 1, 2], 7), ErrorType::X).value(), 0);
    }

    #[test]
    fn weight_three_scan_finds_exactly_seven_undetected_patterns() {
        let undetected: Vec<u32> = (0u32..128)
            .filter(|m| m.count_ones() == 3 && syndrome_of(*m) == 0)
            .collect();
        assert_eq!(undetected.len(), 7);
        assert!(undetected.contains(&0b111));
        // all single and double errors are detected
        for m in 1u32..128 {
            if m.count_ones() <= 2 {
                assert_ne!(syndrome_of(m), 0);
            }
        }
    }

    #[test]
    fn decode7_examples() {
        assert_eq!(decode7(Syndrome7::ZERO), None);
        assert_eq!(decode7(Syndrome7::new(5)), Some(4));
        assert_eq!(decode7(Syndrome7::new(7)), Some(6));
        for q in 0..7 {
            let s = syndrome7(&x_at(&[q], 7), ErrorType::X);
            assert_eq!(decode7(s), Some(q));
        }
    }

    #[test]
    fn logical_value_examples() {
        assert!(!logical_value(&Frame::new(7), ErrorType::X));
        for q in 0..7 {
            assert!(logical_value(&x_at(&[q], 7), ErrorType::X));
        }
        for row in CheckMatrix::HAMMING.row_space().into_iter().filter(|&r| r != 0) {
            let f = Frame::from_masks(7, row as u64, 0);
            assert!(!logical_value(&f, ErrorType::X));
        }
    }

    #[test]
    fn coset_table_matches_exhaustive_scan() {
        for s in 0..8u8 {
            let e = coset_weights(Syndrome7::new(s));
            if s == 0 {
                assert_eq!(e.weight, [0, 3]);
                assert_eq!(e.rep[0], 0);
            } else {
                assert_eq!(e.weight, [2, 1]);
                assert_eq!(e.rep[1], 1 << (s - 1));
            }
            assert!(e.weight[0].min(e.weight[1]) <= 1);
            for class in 0..2 {
                let rep = e.rep[class] as u32;
                assert_eq!(syndrome_of(rep), s);
                assert_eq!((rep.count_ones() & 1) as usize, class);
                // lexicographically smallest minimum-weight representative
                let first = (0u32..128)
                    .find(|m| {
                        syndrome_of(*m) == s
                            && (m.count_ones() & 1) as usize == class
                            && m.count_ones() as u8 == e.weight[class]
                    })
                    .unwrap();
                assert_eq!(first, rep);
            }
        }
    }

    #[test]
    fn syndrome49_parts_roundtrip() {
        let inner = [1, 2, 3, 4, 5, 6, 7].map(Syndrome7::new);
        let s = Syndrome49::from_parts(inner, Syndrome7::new(3));
        for b in 0..7 {
            assert_eq!(s.inner(b), inner[b]);
        }
        assert_eq!(s.outer().value(), 3);
    }

    #[test]
    fn decode49_zero_syndrome() {
        assert_eq!(decode49(Syndrome49::ZERO), CorrectionPlan::EMPTY);
        assert_eq!(hierarchical_decode49(Syndrome49::ZERO), CorrectionPlan::EMPTY);
    }

    #[test]
    fn single_errors_decode_exactly() {
        for q in 0..49 {
            let m = 1u64 << q;
            let s = Syndrome49::of_mask(m);
            assert_eq!(decode49(s).flips, m, "decode49 at {q}");
            assert_eq!(hierarchical_decode49(s).flips, m, "hierarchical at {q}");
        }
    }

    #[test]
    fn decode49_corrects_all_weight_two_x_patterns() {
        for a in 0..49 {
            for b in a + 1..49 {
                let m = 1u64 << a | 1u64 << b;
                let plan = decode49(Syndrome49::of_mask(m));
                assert_eq!(Syndrome49::of_mask(plan.flips), Syndrome49::of_mask(m));
                assert!(plan.weight <= 2);
                assert!(!component_crashes(m), "{a},{b}");
            }
        }
    }

    #[test]
    fn decode49_random_weight_three_and_four() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for w in [3usize, 4] {
            for _ in 0..20_000 {
                let m = sample(&mut rng, 49, w).iter().fold(0u64, |a, q| a | 1 << q);
                let s = Syndrome49::of_mask(m);
                let plan = decode49(s);
                assert_eq!(Syndrome49::of_mask(plan.flips), s);
                assert!(plan.weight as usize <= w);
                assert!(!component_crashes(m));
            }
        }
    }

    #[test]
    fn decode49_is_minimal_for_random_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20_000 {
            let w = rng.random_range(0..=8);
            let m = sample(&mut rng, 49, w).iter().fold(0u64, |a, q| a | 1 << q);
            let s = Syndrome49::of_mask(m);
            let plan = decode49(s);
            assert_eq!(Syndrome49::of_mask(plan.flips), s);
            assert!(plan.weight as usize <= w);
            let class = decode49_in_class(s, !plan.logical_class);
            assert!(class.weight >= plan.weight);
        }
    }

    #[test]
    fn hierarchical_decoder_has_a_weight_four_failure() {
        // two errors in each of two sub-blocks
        let m = 0b11u64 | 0b11u64 << 7;
        assert!(!component_crashes(m));
        let plan = hierarchical_decode49(Syndrome49::of_mask(m));
        assert_eq!(Syndrome49::of_mask(plan.flips), Syndrome49::of_mask(m));
        assert_ne!(plan.logical_class, m.count_ones() & 1 == 1);
    }

    #[test]
    fn crash_check_constructed_patterns() {
        assert!(!crash_check(&Frame::new(49)));
        // X on every qubit is the transversal logical X: a crash by definition
        let all = Frame::from_masks(49, (1u64 << 49) - 1, 0);
        assert!(crash_check(&all));
        // minimum-weight logical: weight-3 inner logicals on sub-blocks 0,1,2
        // (outer positions 1,2,3 form a weight-3 outer logical)
        let logical9 = 0b111u64 | 0b111 << 7 | 0b111 << 14;
        assert!(crash_check(&Frame::from_masks(49, logical9, 0)));
        // remove one bit: weight 8, one flip away from the logical
        let near = logical9 & !(1 << 14);
        assert!(crash_check(&Frame::from_masks(49, near, 0)));
        // a level-2 stabilizer never crashes
        let stab = (STABILIZER_ROWS[0] as u64) | (STABILIZER_ROWS[0] as u64) << 7;
        assert!(!crash_check(&Frame::from_masks(49, 0, stab)));
    }
}
