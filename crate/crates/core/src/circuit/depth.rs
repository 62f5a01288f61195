//! ASAP depth with CX = 1, measurement = `meas_depth`, everything else free.

use super::{decompose_gate, Circuit, Gate};

/// Per-qubit and per-bit ready times under the weighted cost model.
#[derive(Debug, Clone)]
pub struct Timeline {
    qubit: Vec<f64>,
    bit: Vec<f64>,
    meas_depth: f64,
}

impl Timeline {
    pub fn new(num_qubits: usize, meas_depth: f64) -> Self {
        Timeline {
            qubit: vec![0.0; num_qubits],
            bit: Vec::new(),
            meas_depth,
        }
    }

    pub fn qubit_time(&self, q: usize) -> f64 {
        self.qubit[q]
    }

    pub fn depth(&self) -> f64 {
        self.qubit
            .iter()
            .chain(self.bit.iter())
            .copied()
            .fold(0.0, f64::max)
    }

    fn bit_slot(&mut self, b: usize) -> &mut f64 {
        if b >= self.bit.len() {
            self.bit.resize(b + 1, 0.0);
        }
        &mut self.bit[b]
    }

    /// Schedules `g` (expanding composite gates) and returns its finish time.
    pub fn apply(&mut self, g: &Gate) -> f64 {
        match g {
            Gate::Swap(..) | Gate::Bridge(..) | Gate::Cz(..) | Gate::Cp(..) => {
                let mut end = 0.0;
                for sub in decompose_gate(g) {
                    end = self.apply(&sub);
                }
                end
            }
            Gate::Cx(a, b) => {
                let t = self.qubit[a.index()].max(self.qubit[b.index()]) + 1.0;
                self.qubit[a.index()] = t;
                self.qubit[b.index()] = t;
                t
            }
            Gate::Measure { qubit, bit, .. } => {
                let t = self.qubit[qubit.index()].max(*self.bit_slot(bit.index()))
                    + self.meas_depth;
                self.qubit[qubit.index()] = t;
                *self.bit_slot(bit.index()) = t;
                t
            }
            Gate::CondPauli { qubit, bits, .. } => {
                let mut t = self.qubit[qubit.index()];
                for b in bits {
                    t = t.max(*self.bit_slot(b.index()));
                }
                self.qubit[qubit.index()] = t;
                t
            }
            other => {
                let q = other.qubits()[0].index();
                self.qubit[q]
            }
        }
    }
}

pub fn weighted_depth(c: &Circuit, meas_depth: f64) -> f64 {
    let mut t = Timeline::new(c.num_qubits(), meas_depth);
    for g in c.gates() {
        t.apply(g);
    }
    t.depth()
}
