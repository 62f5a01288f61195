use num_complex::Complex64 as C;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{decompose_gate, Basis, Circuit, Gate, Pauli};
use crate::error::SimError;

pub const STATEVECTOR_CAP: usize = 24;

const ZERO_PROB: f64 = 1e-12;

/// Source of measurement outcomes: forced values first, then seeded draws.
#[derive(Debug, Clone)]
pub struct Outcomes {
    rng: ChaCha8Rng,
    forced: Vec<bool>,
    next: usize,
    strict: bool,
}

impl Outcomes {
    pub fn seeded(seed: u64) -> Self {
        Outcomes {
            rng: ChaCha8Rng::seed_from_u64(seed),
            forced: Vec::new(),
            next: 0,
            strict: true,
        }
    }

    /// The i-th measurement takes `forced[i]`, failing if that outcome has
    /// zero probability; later ones fall back to a fixed seed.
    pub fn forced(forced: Vec<bool>) -> Self {
        Outcomes {
            forced,
            ..Outcomes::seeded(0)
        }
    }

    /// Like [`Outcomes::forced`], but an impossible forced value yields the
    /// possible outcome instead of an error.
    pub fn preferred(forced: Vec<bool>) -> Self {
        Outcomes {
            forced,
            strict: false,
            ..Outcomes::seeded(0)
        }
    }

    /// Draws an outcome given the probability of 1.
    pub(crate) fn draw(&mut self, p1: f64) -> bool {
        let i = self.next;
        self.next += 1;
        match self.forced.get(i) {
            Some(&b) => b,
            None => self.rng.gen::<f64>() < p1,
        }
    }

    /// Whether the next draw is forced and must not be corrected.
    pub(crate) fn is_forced_next(&self) -> bool {
        self.strict && self.next < self.forced.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C>,
}

type Mat2 = [[C; 2]; 2];

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub(crate) fn matrix(g: &Gate) -> Option<Mat2> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    Some(match *g {
        Gate::H(_) => [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
        Gate::X(_) => [[o, l], [l, o]],
        Gate::Y(_) => [[o, c(0.0, -1.0)], [c(0.0, 1.0), o]],
        Gate::Z(_) => [[l, o], [o, -l]],
        Gate::S(_) => [[l, o], [o, c(0.0, 1.0)]],
        Gate::Sdg(_) => [[l, o], [o, c(0.0, -1.0)]],
        Gate::Rz(_, t) => [[C::from_polar(1.0, -t / 2.0), o], [o, C::from_polar(1.0, t / 2.0)]],
        Gate::Ry(_, t) => {
            let (sn, cs) = (t / 2.0).sin_cos();
            [[c(cs, 0.0), c(-sn, 0.0)], [c(sn, 0.0), c(cs, 0.0)]]
        }
        _ => return None,
    })
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self, SimError> {
        if n > STATEVECTOR_CAP {
            return Err(SimError::TooManyQubits {
                qubits: n,
                cap: STATEVECTOR_CAP,
            });
        }
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[0] = C::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Tensor product of single-qubit states; `states[q]` is qubit q.
    pub fn product(states: &[[C; 2]]) -> Result<Self, SimError> {
        let mut sv = StateVector::zero(states.len())?;
        for (i, a) in sv.amps.iter_mut().enumerate() {
            *a = states
                .iter()
                .enumerate()
                .map(|(q, s)| s[(i >> q) & 1])
                .product();
        }
        Ok(sv)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> C {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn apply_1q(&mut self, q: usize, m: &Mat2) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1 << control, 1 << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn apply_cphase(&mut self, a: usize, b: usize, theta: f64) {
        let mask = (1 << a) | (1 << b);
        let ph = C::from_polar(1.0, theta);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp *= ph;
            }
        }
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1 << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects qubit `q` onto `outcome` and renormalizes.
    pub fn collapse(&mut self, q: usize, outcome: bool) -> Result<(), SimError> {
        let p1 = self.prob_one(q);
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p < ZERO_PROB {
            return Err(SimError::ImpossibleOutcome { qubit: q, outcome });
        }
        let bit = 1 << q;
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & bit) != 0) == outcome {
                *a *= scale;
            } else {
                *a = C::new(0.0, 0.0);
            }
        }
        Ok(())
    }

    /// Applies any unitary gate of the IR.
    pub fn apply_gate(&mut self, g: &Gate) {
        if let Some(m) = matrix(g) {
            self.apply_1q(g.qubits()[0].index(), &m);
            return;
        }
        match *g {
            Gate::Cx(a, b) => self.apply_cx(a.index(), b.index()),
            Gate::Cz(a, b) => self.apply_cphase(a.index(), b.index(), std::f64::consts::PI),
            Gate::Cp(a, b, t) => self.apply_cphase(a.index(), b.index(), t),
            Gate::Swap(..) | Gate::Bridge(..) => {
                for sub in decompose_gate(g) {
                    self.apply_gate(&sub);
                }
            }
            _ => unreachable!("non-unitary gate {g:?}"),
        }
    }

    /// Measures `q` in `basis`, leaving it in the measured eigenstate.
    pub fn measure(&mut self, q: usize, basis: Basis, outcomes: &mut Outcomes) -> Result<bool, SimError> {
        let h = matrix(&Gate::H(crate::circuit::Qubit(0))).unwrap();
        if basis == Basis::X {
            self.apply_1q(q, &h);
        }
        let p1 = self.prob_one(q);
        let forced = outcomes.is_forced_next();
        let mut m = outcomes.draw(p1);
        if !forced {
            if m && p1 < ZERO_PROB {
                m = false;
            } else if !m && 1.0 - p1 < ZERO_PROB {
                m = true;
            }
        }
        self.collapse(q, m)?;
        if basis == Basis::X {
            self.apply_1q(q, &h);
        }
        Ok(m)
    }
}

/// Runs `c` from `init`, returning the final state and classical bits.
pub fn statevector_run(
    c: &Circuit,
    init: StateVector,
    outcomes: &mut Outcomes,
) -> Result<(StateVector, Vec<bool>), SimError> {
    let mut sv = init;
    if c.num_qubits() > sv.n {
        return Err(SimError::MappingMismatch {
            expected: c.num_qubits(),
            got: sv.n,
        });
    }
    let mut bits = vec![false; c.num_bits()];
    for g in c.gates() {
        match g {
            Gate::Measure { qubit, basis, bit } => {
                bits[bit.index()] = sv.measure(qubit.index(), *basis, outcomes)?;
            }
            Gate::CondPauli { pauli, qubit, bits: cond } => {
                if cond.iter().fold(false, |acc, b| acc ^ bits[b.index()]) {
                    let p = match pauli {
                        Pauli::X => Gate::X(*qubit),
                        Pauli::Z => Gate::Z(*qubit),
                    };
                    sv.apply_gate(&p);
                }
            }
            other => sv.apply_gate(other),
        }
    }
    Ok((sv, bits))
}
