//! Syndrome extraction on 49-qubit data blocks and the two correction
//! protocols.

use serde::{Deserialize, Serialize};

use crate::ancilla::AncillaFactory;
use crate::circuit::LogicalState;
use crate::error::Result;
use crate::hamming::{decode49, hierarchical_decode49, CorrectionPlan, Syndrome49, CONCAT_LEN};
use crate::noise::Noise;
use crate::pauli::{ErrorType, Frame};

/// Side of the next transversal CNOT a block sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Control,
    Target,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Control => Role::Target,
            Role::Target => Role::Control,
        }
    }
}

/// Order of the two corrections before a CNOT. The component the gate
/// spreads out of the block is corrected last, closest to the gate.
pub fn pre_gate_ordering(role: Role) -> (ErrorType, ErrorType) {
    match role {
        Role::Control => (ErrorType::Z, ErrorType::X),
        Role::Target => (ErrorType::X, ErrorType::Z),
    }
}

/// The role a block ends up with when corrected in the given order.
pub fn role_after(first: ErrorType) -> Role {
    match first {
        ErrorType::Z => Role::Control,
        ErrorType::X => Role::Target,
    }
}

/// Correction procedure applied by the EC step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Repeat until two syndromes agree; correct level by level.
    Steane,
    /// One syndrome, exact minimum-weight decoding of the whole code.
    Single,
}

/// A 49-qubit data block: its error frame, syndromes carried over from an
/// inconclusive round, and the corrections applied so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataBlock {
    frame: Frame,
    pending: [Vec<Syndrome49>; 2],
    corrections: [u64; 2],
}

impl Default for DataBlock {
    fn default() -> Self {
        Self::new()
    }
}

fn slot(kind: ErrorType) -> usize {
    match kind {
        ErrorType::X => 0,
        ErrorType::Z => 1,
    }
}

impl DataBlock {
    pub fn new() -> Self {
        Self::from_frame(Frame::new(CONCAT_LEN))
    }

    /// # Panics
    /// If `frame` is not 49 qubits long.
    pub fn from_frame(frame: Frame) -> Self {
        assert_eq!(frame.len(), CONCAT_LEN, "data blocks are {CONCAT_LEN} qubits");
        Self {
            frame,
            pending: [Vec::new(), Vec::new()],
            corrections: [0, 0],
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn frame_mut(&mut self) -> &mut Frame {
        &mut self.frame
    }

    pub fn pending(&self, kind: ErrorType) -> &[Syndrome49] {
        &self.pending[slot(kind)]
    }

    /// XOR of every correction of this type applied so far.
    pub fn corrections(&self, kind: ErrorType) -> u64 {
        self.corrections[slot(kind)]
    }

    /// Applies a classical correction; applying the same plan twice undoes it.
    pub fn apply(&mut self, kind: ErrorType, plan: &CorrectionPlan) {
        self.frame.flip(kind, plan.flips);
        self.corrections[slot(kind)] ^= plan.flips;
    }
}

/// What one EC step did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EcOutcome {
    pub syndromes: u32,
    pub plan: Option<CorrectionPlan>,
}

impl EcOutcome {
    pub fn corrected(&self) -> bool {
        self.plan.is_some()
    }
}

/// Couples a fresh 49-qubit ancilla to the data and reads it out.
///
/// Bit flips go data to |+>_L ancilla, read in the Z basis; phase flips go
/// |0>_L ancilla to data, read in the X basis.
pub fn extract_syndrome(
    data: &mut DataBlock,
    kind: ErrorType,
    factory: &mut AncillaFactory,
    noise: &mut Noise,
) -> Result<Syndrome49> {
    let state = LogicalState::for_extraction(kind);
    let mut anc = factory.prepare49_frame(noise, state)?;
    match kind {
        ErrorType::X => noise.transversal_cnot(&mut data.frame, &mut anc),
        ErrorType::Z => noise.transversal_cnot(&mut anc, &mut data.frame),
    }
    let flips = noise.measure_block(anc, state.readout_basis());
    Ok(Syndrome49::of_mask(flips))
}

/// One syndrome, decoded as a distance-9 code.
pub fn correct_single(
    data: &mut DataBlock,
    kind: ErrorType,
    factory: &mut AncillaFactory,
    noise: &mut Noise,
) -> Result<EcOutcome> {
    let s = extract_syndrome(data, kind, factory, noise)?;
    if s.is_zero() {
        return Ok(EcOutcome {
            syndromes: 1,
            plan: None,
        });
    }
    let plan = decode49(s);
    data.apply(kind, &plan);
    Ok(EcOutcome {
        syndromes: 1,
        plan: Some(plan),
    })
}

/// Repeated extraction until two syndromes agree, stopping at the first
/// trivial one. Syndromes of an inconclusive step are kept for exactly one
/// more step of the same type, where a match with the first new syndrome
/// counts as agreement.
pub fn correct_steane(
    data: &mut DataBlock,
    kind: ErrorType,
    factory: &mut AncillaFactory,
    noise: &mut Noise,
) -> Result<EcOutcome> {
    let carried = std::mem::take(&mut data.pending[slot(kind)]);
    let mut seen: Vec<Syndrome49> = Vec::with_capacity(3);
    for n in 1..=3u32 {
        let s = extract_syndrome(data, kind, factory, noise)?;
        if s.is_zero() {
            return Ok(EcOutcome {
                syndromes: n,
                plan: None,
            });
        }
        if seen.contains(&s) || carried.contains(&s) {
            let plan = hierarchical_decode49(s);
            data.apply(kind, &plan);
            return Ok(EcOutcome {
                syndromes: n,
                plan: Some(plan),
            });
        }
        seen.push(s);
    }
    data.pending[slot(kind)] = seen;
    Ok(EcOutcome {
        syndromes: 3,
        plan: None,
    })
}

pub fn correct(
    protocol: Protocol,
    data: &mut DataBlock,
    kind: ErrorType,
    factory: &mut AncillaFactory,
    noise: &mut Noise,
) -> Result<EcOutcome> {
    match protocol {
        Protocol::Steane => correct_steane(data, kind, factory, noise),
        Protocol::Single => correct_single(data, kind, factory, noise),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_policy() {
        assert_eq!(pre_gate_ordering(Role::Control), (ErrorType::Z, ErrorType::X));
        assert_eq!(pre_gate_ordering(Role::Target), (ErrorType::X, ErrorType::Z));
        for role in [Role::Control, Role::Target] {
            assert_eq!(role_after(pre_gate_ordering(role).0), role);
            assert_eq!(role.other().other(), role);
        }
    }

    #[test]
    fn corrections_are_involutions() {
        let mut d = DataBlock::new();
        d.frame_mut().flip(ErrorType::X, 0b1011 << 9);
        let before = d.clone();
        let plan = decode49(Syndrome49::of_mask(0b1011 << 9));
        d.apply(ErrorType::X, &plan);
        d.apply(ErrorType::X, &plan);
        assert_eq!(d, before);
    }
}
