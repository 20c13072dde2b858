//! Exhaustive and sampled checks of the 49-qubit decoders.

use crate::hamming::{decode49, hierarchical_decode49, CorrectionPlan, Syndrome49, CONCAT_LEN};
use crate::noise::RandomSource;
use crate::pauli::{ErrorType, Frame, Pauli};

/// Outcome of one audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub patterns: u64,
    pub failures: u64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Whether `decoder` returns `frame` to the code space without a logical
/// error, correcting each component independently.
pub fn corrects(frame: &Frame, decoder: fn(Syndrome49) -> CorrectionPlan) -> bool {
    ErrorType::BOTH.iter().all(|&kind| {
        let mask = frame.mask(kind);
        let residual = mask ^ decoder(Syndrome49::of_mask(mask)).flips;
        Syndrome49::of_mask(residual).is_zero() && residual.count_ones().is_multiple_of(2)
    })
}

/// Every Pauli pattern of weight at most `max_weight` (0, 1 or 2) on 49 qubits.
pub fn exhaustive_low_weight(max_weight: usize) -> AuditReport {
    assert!(max_weight <= 2, "exhaustive audit is limited to weight 2");
    let nontrivial = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut report = AuditReport {
        patterns: 0,
        failures: 0,
    };
    let mut check = |f: Frame| {
        report.patterns += 1;
        report.failures += !corrects(&f, decode49) as u64;
    };
    check(Frame::new(CONCAT_LEN));
    if max_weight >= 1 {
        for q in 0..CONCAT_LEN {
            for p in nontrivial {
                let mut f = Frame::new(CONCAT_LEN);
                f.apply_unchecked(q, p);
                check(f);
            }
        }
    }
    if max_weight >= 2 {
        for a in 0..CONCAT_LEN {
            for b in a + 1..CONCAT_LEN {
                for pa in nontrivial {
                    for pb in nontrivial {
                        let mut f = Frame::new(CONCAT_LEN);
                        f.apply_unchecked(a, pa);
                        f.apply_unchecked(b, pb);
                        check(f);
                    }
                }
            }
        }
    }
    report
}

/// `count` random patterns with exactly `weight` non-identity entries.
pub fn random_weight(weight: usize, count: u64, rng: &mut RandomSource) -> AuditReport {
    let mut failures = 0;
    for _ in 0..count {
        let mut f = Frame::new(CONCAT_LEN);
        for q in rng.distinct(CONCAT_LEN, weight) {
            let p = Pauli::from_index(1 + rng.below(3) as u32);
            f.apply_unchecked(q, p);
        }
        failures += !corrects(&f, decode49) as u64;
    }
    AuditReport {
        patterns: count,
        failures,
    }
}

/// The first weight-4 bit-flip pattern, in lexicographic order of supports,
/// that the level-by-level decoder gets wrong and the exact decoder gets right.
pub fn hierarchical_witness() -> Option<u64> {
    let n = CONCAT_LEN;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let mask = 1u64 << a | 1 << b | 1 << c | 1 << d;
                    let f = Frame::from_masks(CONCAT_LEN, mask, 0);
                    if !corrects(&f, hierarchical_decode49) && corrects(&f, decode49) {
                        return Some(mask);
                    }
                }
            }
        }
    }
    None
}
