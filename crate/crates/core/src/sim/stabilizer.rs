//! CHP stabilizer tableau with bit-packed rows.

use std::f64::consts::FRAC_PI_2;

use crate::circuit::{Basis, Circuit, Gate, Pauli};
use crate::error::SimError;

use super::statevector::Outcomes;

/// A Hermitian Pauli product with sign; `x & z` marks a Y.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    negative: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = n.div_ceil(64).max(1);
        PauliString {
            n,
            x: vec![0; w],
            z: vec![0; w],
            negative: false,
        }
    }

    /// `X` on every listed qubit.
    pub fn xs(n: usize, qubits: &[usize]) -> Self {
        let mut p = PauliString::identity(n);
        for &q in qubits {
            p.set(q, true, false);
        }
        p
    }

    pub fn zs(n: usize, qubits: &[usize]) -> Self {
        let mut p = PauliString::identity(n);
        for &q in qubits {
            p.set(q, false, true);
        }
        p
    }

    pub fn set(&mut self, q: usize, x: bool, z: bool) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        self.x[w] = (self.x[w] & !m) | if x { m } else { 0 };
        self.z[w] = (self.z[w] & !m) | if z { m } else { 0 };
    }

    pub fn get(&self, q: usize) -> (bool, bool) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        (self.x[w] & m != 0, self.z[w] & m != 0)
    }

    pub fn negate(mut self) -> Self {
        self.negative = !self.negative;
        self
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Moves qubit `q` to `map[q]` in an `n`-qubit register.
    pub fn remap(&self, n: usize, map: &[usize]) -> PauliString {
        let mut p = PauliString::identity(n);
        p.negative = self.negative;
        for (q, &to) in map.iter().enumerate().take(self.n) {
            let (x, z) = self.get(q);
            p.set(to, x, z);
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

/// Phase exponent (mod 4) picked up when multiplying row bits `(x1,z1)` into
/// `(x2,z2)`, summed over one word.
fn phase_word(x1: u64, z1: u64, x2: u64, z2: u64) -> i64 {
    let y1 = x1 & z1;
    let xo = x1 & !z1;
    let zo = !x1 & z1;
    let pos = (y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2);
    let neg = (y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2);
    pos.count_ones() as i64 - neg.count_ones() as i64
}

impl Tableau {
    /// The all-|0⟩ state.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Tableau {
            n,
            words,
            x: vec![0; rows * words],
            z: vec![0; rows * words],
            r: vec![false; rows],
        };
        for q in 0..n {
            t.x[q * words + q / 64] |= 1 << (q % 64);
            t.z[(n + q) * words + q / 64] |= 1 << (q % 64);
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn bit(v: &[u64], words: usize, row: usize, q: usize) -> bool {
        v[row * words + q / 64] >> (q % 64) & 1 == 1
    }

    fn xb(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.x, self.words, row, q)
    }

    fn zb(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.z, self.words, row, q)
    }

    pub fn h(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for row in 0..2 * self.n {
            let i = row * self.words + w;
            let (xv, zv) = (self.x[i] & m, self.z[i] & m);
            if xv != 0 && zv != 0 {
                self.r[row] ^= true;
            }
            self.x[i] = (self.x[i] & !m) | zv;
            self.z[i] = (self.z[i] & !m) | xv;
        }
    }

    pub fn s(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for row in 0..2 * self.n {
            let i = row * self.words + w;
            if self.x[i] & m != 0 && self.z[i] & m != 0 {
                self.r[row] ^= true;
            }
            self.z[i] ^= self.x[i] & m;
        }
    }

    fn flip_signs(&mut self, q: usize, on_x: bool, on_z: bool) {
        for row in 0..2 * self.n {
            if (on_x && self.xb(row, q)) ^ (on_z && self.zb(row, q)) {
                self.r[row] ^= true;
            }
        }
    }

    pub fn x(&mut self, q: usize) {
        self.flip_signs(q, false, true);
    }

    pub fn z(&mut self, q: usize) {
        self.flip_signs(q, true, false);
    }

    pub fn y(&mut self, q: usize) {
        self.flip_signs(q, true, true);
    }

    pub fn cx(&mut self, a: usize, b: usize) {
        let (wa, ma) = (a / 64, 1u64 << (a % 64));
        let (wb, mb) = (b / 64, 1u64 << (b % 64));
        for row in 0..2 * self.n {
            let base = row * self.words;
            let xa = self.x[base + wa] & ma != 0;
            let za = self.z[base + wa] & ma != 0;
            let xb = self.x[base + wb] & mb != 0;
            let zb = self.z[base + wb] & mb != 0;
            if xa && zb && (xb == za) {
                self.r[row] ^= true;
            }
            if xa {
                self.x[base + wb] ^= mb;
            }
            if zb {
                self.z[base + wa] ^= ma;
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cx(a, b);
        self.h(b);
    }

    /// Multiplies row `src` into row `dst`.
    fn rowsum(&mut self, dst: usize, src: usize) {
        let w = self.words;
        let mut e = 2 * (self.r[dst] as i64) + 2 * (self.r[src] as i64);
        for k in 0..w {
            e += phase_word(
                self.x[src * w + k],
                self.z[src * w + k],
                self.x[dst * w + k],
                self.z[dst * w + k],
            );
        }
        self.r[dst] = e.rem_euclid(4) == 2;
        for k in 0..w {
            self.x[dst * w + k] ^= self.x[src * w + k];
            self.z[dst * w + k] ^= self.z[src * w + k];
        }
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        self.x.copy_within(src * w..(src + 1) * w, dst * w);
        self.z.copy_within(src * w..(src + 1) * w, dst * w);
        self.r[dst] = self.r[src];
    }

    fn clear_row(&mut self, row: usize) {
        let w = self.words;
        self.x[row * w..(row + 1) * w].fill(0);
        self.z[row * w..(row + 1) * w].fill(0);
        self.r[row] = false;
    }

    /// Z measurement; returns `(outcome, deterministic)`.
    pub fn measure_z(&mut self, q: usize, outcomes: &mut Outcomes) -> Result<(bool, bool), SimError> {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&row| self.xb(row, q)) {
            for row in 0..2 * n {
                if row != p && self.xb(row, q) {
                    self.rowsum(row, p);
                }
            }
            self.copy_row(p - n, p);
            self.clear_row(p);
            let m = outcomes.draw(0.5);
            self.r[p] = m;
            self.z[p * self.words + q / 64] |= 1 << (q % 64);
            return Ok((m, false));
        }
        let scratch = 2 * n;
        self.clear_row(scratch);
        for i in 0..n {
            if self.xb(i, q) {
                self.rowsum(scratch, i + n);
            }
        }
        let m = self.r[scratch];
        let strict = outcomes.is_forced_next();
        if outcomes.draw(0.5) != m && strict {
            return Err(SimError::ImpossibleOutcome { qubit: q, outcome: !m });
        }
        Ok((m, true))
    }

    pub fn measure(&mut self, q: usize, basis: Basis, outcomes: &mut Outcomes) -> Result<(bool, bool), SimError> {
        if basis == Basis::X {
            self.h(q);
        }
        let r = self.measure_z(q, outcomes);
        if basis == Basis::X {
            self.h(q);
        }
        r
    }

    /// `Some(±1)` when `±p` is in the stabilizer group, `None` when the
    /// outcome of measuring `p` would be random.
    pub fn expectation(&self, p: &PauliString) -> Option<i8> {
        let n = self.n;
        let w = self.words;
        let anticommutes = |row: usize| {
            let mut acc = 0u32;
            for k in 0..w {
                acc ^= ((p.x[k] & self.z[row * w + k]) ^ (p.z[k] & self.x[row * w + k])).count_ones() & 1;
            }
            acc == 1
        };
        if (n..2 * n).any(anticommutes) {
            return None;
        }
        let mut acc = self.clone();
        let scratch = 2 * n;
        acc.clear_row(scratch);
        for i in 0..n {
            if anticommutes(i) {
                acc.rowsum(scratch, i + n);
            }
        }
        let same = (0..w).all(|k| acc.x[scratch * w + k] == p.x[k] && acc.z[scratch * w + k] == p.z[k]);
        debug_assert!(same, "commuting Pauli outside the stabilizer span");
        if !same {
            return None;
        }
        Some(if acc.r[scratch] ^ p.negative { -1 } else { 1 })
    }

    /// Stabilizer generators as Pauli strings.
    pub fn stabilizers(&self) -> Vec<PauliString> {
        (self.n..2 * self.n)
            .map(|row| PauliString {
                n: self.n,
                x: self.x[row * self.words..(row + 1) * self.words].to_vec(),
                z: self.z[row * self.words..(row + 1) * self.words].to_vec(),
                negative: self.r[row],
            })
            .collect()
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<(), SimError> {
        match *g {
            Gate::H(q) => self.h(q.index()),
            Gate::X(q) => self.x(q.index()),
            Gate::Y(q) => self.y(q.index()),
            Gate::Z(q) => self.z(q.index()),
            Gate::S(q) => self.s(q.index()),
            Gate::Sdg(q) => {
                self.z(q.index());
                self.s(q.index());
            }
            Gate::Rz(q, t) => {
                let k = quarter_turns(t).ok_or_else(|| SimError::NonClifford(format!("rz({t})")))?;
                for _ in 0..k {
                    self.s(q.index());
                }
            }
            Gate::Cx(a, b) => self.cx(a.index(), b.index()),
            Gate::Cz(a, b) => self.cz(a.index(), b.index()),
            Gate::Swap(..) | Gate::Bridge(..) => {
                for sub in crate::circuit::decompose_gate(g) {
                    self.apply_gate(&sub)?;
                }
            }
            Gate::Ry(_, t) => return Err(SimError::NonClifford(format!("ry({t})"))),
            Gate::Cp(_, _, t) => return Err(SimError::NonClifford(format!("cp({t})"))),
            Gate::Measure { .. } | Gate::CondPauli { .. } => {
                unreachable!("classical ops are handled by stabilizer_run")
            }
        }
        Ok(())
    }
}

/// Rotation angle as a number of S gates, if it is a multiple of pi/2.
fn quarter_turns(t: f64) -> Option<usize> {
    let k = t / FRAC_PI_2;
    let r = k.round();
    ((k - r).abs() < 1e-9).then(|| r.rem_euclid(4.0) as usize)
}

#[derive(Debug, Clone)]
pub struct StabilizerRun {
    pub tableau: Tableau,
    pub bits: Vec<bool>,
    /// Per classical bit, whether its last write was deterministic.
    pub deterministic: Vec<bool>,
}

pub fn stabilizer_run(c: &Circuit, outcomes: &mut Outcomes) -> Result<StabilizerRun, SimError> {
    stabilizer_run_from(c, Tableau::new(c.num_qubits()), outcomes)
}

pub fn stabilizer_run_from(
    c: &Circuit,
    mut t: Tableau,
    outcomes: &mut Outcomes,
) -> Result<StabilizerRun, SimError> {
    let mut bits = vec![false; c.num_bits()];
    let mut det = vec![false; c.num_bits()];
    for g in c.gates() {
        match g {
            Gate::Measure { qubit, basis, bit } => {
                let (m, d) = t.measure(qubit.index(), *basis, outcomes)?;
                bits[bit.index()] = m;
                det[bit.index()] = d;
            }
            Gate::CondPauli { pauli, qubit, bits: cond } => {
                if cond.iter().fold(false, |acc, b| acc ^ bits[b.index()]) {
                    match pauli {
                        Pauli::X => t.x(qubit.index()),
                        Pauli::Z => t.z(qubit.index()),
                    }
                }
            }
            other => t.apply_gate(other)?,
        }
    }
    Ok(StabilizerRun {
        tableau: t,
        bits,
        deterministic: det,
    })
}
