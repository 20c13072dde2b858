//! Encoding and verification circuits for the 7-qubit code.
//!
//! The logical |+> encoder comes from the check matrix: qubits whose column
//! is not a unit vector carry the information and start in |+>, the three
//! parity qubits start in |0>, and every information qubit feeds each parity
//! qubit whose row covers it. The |0> encoder is its Hadamard conjugate: the
//! preparations swap bases and every CNOT reverses.

use crate::hamming::{CheckMatrix, LOGICAL_SUPPORT, STABILIZER_ROWS};
use crate::pauli::{Basis, ErrorType};

/// Which logical eigenstate an encoded ancilla carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicalState {
    /// |+>_L, the target of the data-to-ancilla CNOT in bit-flip extraction.
    Plus,
    /// |0>_L, the control of the ancilla-to-data CNOT in phase-flip extraction.
    Zero,
}

impl LogicalState {
    /// Basis the information qubits are prepared in.
    pub fn info_basis(self) -> Basis {
        match self {
            LogicalState::Plus => Basis::X,
            LogicalState::Zero => Basis::Z,
        }
    }

    /// The error component that verification suppresses (the component that
    /// leaks from this ancilla into the data).
    pub fn verified_component(self) -> ErrorType {
        match self {
            LogicalState::Plus => ErrorType::Z,
            LogicalState::Zero => ErrorType::X,
        }
    }

    /// Basis the ancilla is measured in when used for extraction.
    pub fn readout_basis(self) -> Basis {
        self.info_basis().dual()
    }

    /// The state used to extract syndromes of `kind` errors.
    pub fn for_extraction(kind: ErrorType) -> Self {
        match kind {
            ErrorType::X => LogicalState::Plus,
            ErrorType::Z => LogicalState::Zero,
        }
    }

    pub fn dual(self) -> Self {
        match self {
            LogicalState::Plus => LogicalState::Zero,
            LogicalState::Zero => LogicalState::Plus,
        }
    }
}

/// Preparations plus depth-scheduled CNOT layers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingCircuit {
    preps: Vec<Basis>,
    layers: Vec<Vec<(usize, usize)>>,
}

impl EncodingCircuit {
    /// Encoder for |+>_L derived from the Hamming check matrix.
    pub fn plus() -> Self {
        let h = CheckMatrix::HAMMING;
        let parity: Vec<usize> = (0..3).map(|r| (1usize << r) - 1).collect();
        let mut preps = vec![Basis::X; 7];
        for &p in &parity {
            preps[p] = Basis::Z;
        }
        let mut cnots = Vec::new();
        for (r, &p) in parity.iter().enumerate() {
            for q in 0..7 {
                if !parity.contains(&q) && h.rows()[r] >> q & 1 == 1 {
                    cnots.push((q, p));
                }
            }
        }
        Self {
            preps,
            layers: schedule_layers(&cnots),
        }
    }

    pub fn for_state(state: LogicalState) -> Self {
        match state {
            LogicalState::Plus => Self::plus(),
            LogicalState::Zero => Self::plus().dual(),
        }
    }

    /// Hadamard conjugate: bases swapped, CNOTs reversed.
    pub fn dual(&self) -> Self {
        Self {
            preps: self.preps.iter().map(|b| b.dual()).collect(),
            layers: self
                .layers
                .iter()
                .map(|l| l.iter().map(|&(c, t)| (t, c)).collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.preps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preps.is_empty()
    }

    pub fn preps(&self) -> &[Basis] {
        &self.preps
    }

    pub fn layers(&self) -> &[Vec<(usize, usize)>] {
        &self.layers
    }

    pub fn cnots(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.layers.iter().flatten().copied()
    }

    /// Preparation layer plus CNOT layers.
    pub fn depth(&self) -> usize {
        1 + self.layers.len()
    }
}

/// Greedy layering of CNOTs into rounds on disjoint qubits.
///
/// Each round takes gates in order of how many unscheduled gates remain on
/// their qubits, so the busiest qubits are never starved.
pub fn schedule_layers(cnots: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut remaining: Vec<(usize, usize)> = cnots.to_vec();
    let mut layers = Vec::new();
    while !remaining.is_empty() {
        let n = remaining.iter().map(|&(c, t)| c.max(t) + 1).max().unwrap_or(0);
        let mut degree = vec![0usize; n];
        for &(c, t) in &remaining {
            degree[c] += 1;
            degree[t] += 1;
        }
        let mut order: Vec<usize> = (0..remaining.len()).collect();
        order.sort_by_key(|&i| {
            let (c, t) = remaining[i];
            (std::cmp::Reverse(degree[c].max(degree[t])), std::cmp::Reverse(degree[c] + degree[t]), i)
        });
        let mut busy = vec![false; n];
        let mut layer = Vec::new();
        let mut taken = vec![false; remaining.len()];
        for i in order {
            let (c, t) = remaining[i];
            if !busy[c] && !busy[t] {
                busy[c] = true;
                busy[t] = true;
                layer.push((c, t));
                taken[i] = true;
            }
        }
        layer.sort_unstable();
        layers.push(layer);
        remaining = remaining
            .into_iter()
            .zip(taken)
            .filter(|(_, t)| !t)
            .map(|(g, _)| g)
            .collect();
    }
    layers
}

/// ASAP depth of a sequence of operations, each given by the qubits it touches.
pub fn asap_depth<'a>(ops: impl IntoIterator<Item = &'a [usize]>) -> usize {
    let mut ready: Vec<usize> = Vec::new();
    let mut depth = 0;
    for qubits in ops {
        let start = qubits.iter().map(|&q| ready.get(q).copied().unwrap_or(0)).max().unwrap_or(0);
        let end = start + 1;
        for &q in qubits {
            if q >= ready.len() {
                ready.resize(q + 1, 0);
            }
            ready[q] = end;
        }
        depth = depth.max(end);
    }
    depth
}

/// A verification check: a weight-3 or -4 operator whose value on a correct
/// ancilla is +1, measured through one fresh verifier qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Check {
    /// Error component the check detects.
    pub detects: ErrorType,
    /// Support as a 7-bit mask (qubits or, at the block level, sub-blocks).
    pub support: u8,
}

/// The three stabilizer checks followed by the logical check, for the
/// component an ancilla of `state` must keep small. Dropping the last entry
/// gives the three-check variant.
pub fn verification_checks(state: LogicalState) -> [Check; 4] {
    let detects = state.verified_component();
    [
        Check {
            detects,
            support: STABILIZER_ROWS[0],
        },
        Check {
            detects,
            support: STABILIZER_ROWS[1],
        },
        Check {
            detects,
            support: STABILIZER_ROWS[2],
        },
        Check {
            detects,
            support: LOGICAL_SUPPORT,
        },
    ]
}
