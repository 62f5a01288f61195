//! Benchmark circuits: QFT, QAOA, VQE and Bernstein-Vazirani.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, Qubit};

fn q(i: usize) -> Qubit {
    Qubit(i as u32)
}

/// H on every qubit followed by the controlled-phase ladder; no final
/// reversal swaps.
pub fn gen_qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for i in 0..n {
        c.push(Gate::H(q(i)));
        for j in i + 1..n {
            c.push(Gate::Cp(q(j), q(i), PI / (1u64 << (j - i).min(62)) as f64));
        }
    }
    c
}

/// `⌊n(n−1)/4⌋` distinct pairs drawn uniformly with ChaCha8 seeded by
/// `seed`, in lexicographic order.
pub fn qaoa_edges(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let total = n * (n - 1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, total, n * (n - 1) / 4).into_vec();
    picked.sort_unstable();
    // Pair index k enumerates (0,1), (0,2), …, (0,n−1), (1,2), …
    let mut out = Vec::with_capacity(picked.len());
    let (mut i, mut row_start) = (0, 0);
    for k in picked {
        while k >= row_start + (n - 1 - i) {
            row_start += n - 1 - i;
            i += 1;
        }
        out.push((i, i + 1 + k - row_start));
    }
    out
}

/// One QAOA layer: H, CX·RZ·CX per sampled edge, then an RX mixer written
/// as H·RZ·H.
pub fn gen_qaoa(n: usize, seed: u64) -> Circuit {
    let edges = qaoa_edges(n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5157_414f);
    let (gamma, beta): (f64, f64) = (rng.gen::<f64>() * PI, rng.gen::<f64>() * PI);
    let mut c = Circuit::new(n);
    c.extend((0..n).map(|i| Gate::H(q(i))));
    for (i, j) in edges {
        c.extend([Gate::Cx(q(i), q(j)), Gate::Rz(q(j), 2.0 * gamma), Gate::Cx(q(i), q(j))]);
    }
    for i in 0..n {
        c.extend([Gate::H(q(i)), Gate::Rz(q(i), 2.0 * beta), Gate::H(q(i))]);
    }
    c
}

/// Full-entanglement ansatz: per layer an RY layer then CX(i, j) for every
/// i < j, closed by a final RY layer.
pub fn gen_vqe(n: usize, layers: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    for _ in 0..layers {
        for i in 0..n {
            c.push(Gate::Ry(q(i), rng.gen::<f64>() * 2.0 * PI));
        }
        for i in 0..n {
            for j in i + 1..n {
                c.push(Gate::Cx(q(i), q(j)));
            }
        }
    }
    for i in 0..n {
        c.push(Gate::Ry(q(i), rng.gen::<f64>() * 2.0 * PI));
    }
    c
}

/// Secret over the first `n − 1` qubits with exactly `⌊(n−1)/2⌋` ones.
pub fn bv_secret(n: usize, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = vec![false; n - 1];
    for i in sample(&mut rng, n - 1, (n - 1) / 2) {
        s[i] = true;
    }
    s
}

/// Bernstein-Vazirani with the last qubit as the oracle target. The target
/// starts in |1⟩, so measuring the string qubits at the end yields the secret.
pub fn gen_bv(n: usize, seed: u64) -> Circuit {
    let secret = bv_secret(n, seed);
    let t = n - 1;
    let mut c = Circuit::new(n);
    c.push(Gate::X(q(t)));
    c.extend((0..n).map(|i| Gate::H(q(i))));
    for (i, &bit) in secret.iter().enumerate() {
        if bit {
            c.push(Gate::Cx(q(i), q(t)));
        }
    }
    c.extend((0..n).map(|i| Gate::H(q(i))));
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkKind {
    Qft,
    Qaoa,
    Vqe,
    Bv,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 4] = [BenchmarkKind::Qft, BenchmarkKind::Qaoa, BenchmarkKind::Vqe, BenchmarkKind::Bv];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::Qft => "qft",
            BenchmarkKind::Qaoa => "qaoa",
            BenchmarkKind::Vqe => "vqe",
            BenchmarkKind::Bv => "bv",
        }
    }
}

/// A named benchmark instance such as `qft-261`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Benchmark {
    pub kind: BenchmarkKind,
    pub size: usize,
}

impl Benchmark {
    pub fn new(kind: BenchmarkKind, size: usize) -> Self {
        Benchmark { kind, size }
    }

    pub fn generate(&self, seed: u64, vqe_layers: usize) -> Circuit {
        match self.kind {
            BenchmarkKind::Qft => gen_qft(self.size),
            BenchmarkKind::Qaoa => gen_qaoa(self.size, seed),
            BenchmarkKind::Vqe => gen_vqe(self.size, vqe_layers, seed),
            BenchmarkKind::Bv => gen_bv(self.size, seed),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.kind.name(), self.size)
    }
}

impl FromStr for Benchmark {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, size) = s
            .split_once('-')
            .ok_or_else(|| format!("benchmark `{s}` is not of the form name-size"))?;
        let kind = BenchmarkKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| format!("unknown benchmark `{name}` (expected qft, qaoa, vqe or bv)"))?;
        let size: usize = size.parse().map_err(|_| format!("bad benchmark size `{size}`"))?;
        if size < 2 {
            return Err("benchmark size must be at least 2".into());
        }
        Ok(Benchmark { kind, size })
    }
}
