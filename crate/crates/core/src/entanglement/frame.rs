//! Pauli frames read off a stabilizer tableau.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, Clbit, Gate, Pauli, Qubit};
use crate::error::{EntanglementError, SimError};
use crate::sim::{Outcomes, PauliString, Tableau};
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub node: NodeId,
    pub pauli: Pauli,
    /// Applied when the parity of these bits is odd.
    pub bits: Vec<Clbit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PauliFrame {
    pub constant: Vec<(NodeId, Pauli)>,
    pub conditional: Vec<FrameEntry>,
}

impl PauliFrame {
    pub fn is_empty(&self) -> bool {
        self.constant.is_empty() && self.conditional.is_empty()
    }

    pub fn gates(&self) -> Vec<Gate> {
        let mut out: Vec<Gate> = self
            .constant
            .iter()
            .map(|&(n, p)| match p {
                Pauli::X => Gate::X(Qubit(n as u32)),
                Pauli::Z => Gate::Z(Qubit(n as u32)),
            })
            .collect();
        out.extend(self.conditional.iter().map(|e| Gate::CondPauli {
            pauli: e.pauli,
            qubit: Qubit(e.node as u32),
            bits: e.bits.clone(),
        }));
        out
    }
}

/// Row-reduced span of bit vectors, remembering which inputs make up each
/// pivot.
struct Span {
    pivots: Vec<(usize, Vec<u64>, Vec<u64>)>,
    combo_words: usize,
}

fn get(v: &[u64], i: usize) -> bool {
    v[i / 64] >> (i % 64) & 1 == 1
}

fn xor(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= y;
    }
}

impl Span {
    fn new(inputs: usize) -> Self {
        Span {
            pivots: Vec::new(),
            combo_words: inputs.div_ceil(64).max(1),
        }
    }

    fn reduce(&self, v: &mut [u64], combo: &mut [u64]) {
        for (bit, pv, pc) in &self.pivots {
            if get(v, *bit) {
                xor(v, pv);
                xor(combo, pc);
            }
        }
    }

    fn insert(&mut self, index: usize, mut v: Vec<u64>) {
        let mut combo = vec![0u64; self.combo_words];
        combo[index / 64] |= 1 << (index % 64);
        self.reduce(&mut v, &mut combo);
        if let Some(bit) = (0..v.len() * 64).find(|&i| get(&v, i)) {
            self.pivots.push((bit, v, combo));
        }
    }

    /// Inputs summing to `target`, if any.
    fn solve(&self, mut target: Vec<u64>) -> Option<Vec<u64>> {
        let mut combo = vec![0u64; self.combo_words];
        self.reduce(&mut target, &mut combo);
        target.iter().all(|&w| w == 0).then_some(combo)
    }
}

/// Derives the corrections that turn `survivors` into the standard GHZ state
/// after `effective` (run from |0…0⟩ on `support`) and the listed
/// measurements.
pub(crate) fn derive_frame(
    support: &[NodeId],
    effective: &[Gate],
    measured: &[(NodeId, Basis, Clbit)],
    survivors: &[NodeId],
) -> Result<PauliFrame, EntanglementError> {
    let local: BTreeMap<NodeId, usize> = support.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let k = support.len();
    let mut t = Tableau::new(k);
    for g in effective {
        let g = g.map_qubits(|q| Qubit(local[&q.index()] as u32));
        t.apply_gate(&g).expect("frame derivation uses Clifford gates only");
    }
    let gens = t.stabilizers();
    let mwords = measured.len().div_ceil(64).max(1);
    let mut span = Span::new(k);
    for (i, g) in gens.iter().enumerate() {
        let mut pattern = vec![0u64; mwords];
        for (j, &(node, basis, _)) in measured.iter().enumerate() {
            let (x, z) = g.get(local[&node]);
            if match basis {
                Basis::X => z,
                Basis::Z => x,
            } {
                pattern[j / 64] |= 1 << (j % 64);
            }
        }
        span.insert(i, pattern);
    }

    let mut cond: BTreeMap<(NodeId, u8), Vec<Clbit>> = BTreeMap::new();
    for (j, &(node, _, bit)) in measured.iter().enumerate() {
        let mut target = vec![0u64; mwords];
        target[j / 64] |= 1 << (j % 64);
        let combo = span
            .solve(target)
            .ok_or(EntanglementError::DeterministicMeasurement(node))?;
        let mut flip = PauliString::identity(k);
        for (i, g) in gens.iter().enumerate() {
            if get(&combo, i) {
                for &s in survivors {
                    let q = local[&s];
                    let (x0, z0) = flip.get(q);
                    let (x1, z1) = g.get(q);
                    flip.set(q, x0 ^ x1, z0 ^ z1);
                }
            }
        }
        for &s in survivors {
            let (x, z) = flip.get(local[&s]);
            if x {
                cond.entry((s, 0)).or_default().push(bit);
            }
            if z {
                cond.entry((s, 1)).or_default().push(bit);
            }
        }
    }

    for &(node, basis, _) in measured {
        t.measure(local[&node], basis, &mut Outcomes::forced(vec![false]))
            .map_err(|e| match e {
                SimError::ImpossibleOutcome { .. } => EntanglementError::DeterministicMeasurement(node),
                other => panic!("unexpected simulator error {other}"),
            })?;
    }
    let not_ghz = || EntanglementError::NotGhz(survivors.to_vec());
    let s_local: Vec<usize> = survivors.iter().map(|s| local[s]).collect();
    let mut constant = Vec::new();
    if let Some((&s0, rest)) = s_local.split_first() {
        for (&v, &node) in rest.iter().zip(&survivors[1..]) {
            match t.expectation(&PauliString::zs(k, &[s0, v])) {
                Some(1) => {}
                Some(_) => {
                    constant.push((node, Pauli::X));
                    t.x(v);
                }
                None => return Err(not_ghz()),
            }
        }
        match t.expectation(&PauliString::xs(k, &s_local)) {
            Some(1) => {}
            Some(_) => constant.push((survivors[0], Pauli::Z)),
            None => return Err(not_ghz()),
        }
    }
    Ok(PauliFrame {
        constant,
        conditional: cond
            .into_iter()
            .map(|((node, p), bits)| FrameEntry {
                node,
                pauli: if p == 0 { Pauli::X } else { Pauli::Z },
                bits,
            })
            .collect(),
    })
}
