//! Equivalence checking of a compiled circuit against its source.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{Circuit, Gate, Qubit};
use crate::error::SimError;

use super::stabilizer::{stabilizer_run, stabilizer_run_from, Tableau};
use super::statevector::{statevector_run, Outcomes, StateVector, STATEVECTOR_CAP};

pub const FIDELITY_TOLERANCE: f64 = 1e-9;

/// Where each logical qubit sits before and after the compiled circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QubitMap {
    pub input: Vec<usize>,
    pub output: Vec<usize>,
}

impl QubitMap {
    pub fn fixed(map: Vec<usize>) -> Self {
        QubitMap {
            output: map.clone(),
            input: map,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Statevector,
    Stabilizer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "reason")]
pub enum VerifyStatus {
    Pass,
    Fail,
    Unverifiable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub seed: u64,
    pub branches: usize,
    /// Forced branches whose outcome pattern has zero probability.
    pub infeasible: usize,
    pub min_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub mode: Option<VerifyMode>,
    pub status: VerifyStatus,
    pub tolerance: f64,
    pub trials: Vec<TrialReport>,
    pub min_fidelity: Option<f64>,
    /// Distinct measurement-outcome patterns exercised across all trials.
    pub branch_coverage: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.status == VerifyStatus::Pass
    }

    fn unverifiable(reason: String) -> Self {
        VerifyReport {
            mode: None,
            status: VerifyStatus::Unverifiable(reason),
            tolerance: FIDELITY_TOLERANCE,
            trials: Vec::new(),
            min_fidelity: None,
            branch_coverage: 0,
        }
    }

    fn collect(mode: VerifyMode, results: Vec<(TrialReport, HashSet<Vec<bool>>)>) -> Self {
        let mut patterns = HashSet::new();
        let mut trials = Vec::new();
        for (t, p) in results {
            patterns.extend(p);
            trials.push(t);
        }
        let min = trials.iter().map(|t| t.min_fidelity).fold(f64::INFINITY, f64::min);
        let ok = !trials.is_empty()
            && trials.iter().all(|t| t.branches > t.infeasible)
            && min >= 1.0 - FIDELITY_TOLERANCE;
        VerifyReport {
            mode: Some(mode),
            status: if ok { VerifyStatus::Pass } else { VerifyStatus::Fail },
            tolerance: FIDELITY_TOLERANCE,
            min_fidelity: (!trials.is_empty()).then_some(min),
            trials,
            branch_coverage: patterns.len(),
        }
    }
}

/// Overlap of `actual`'s data-qubit reduced state with the pure `ideal`
/// state; `data[j]` is where logical qubit j lives in `actual`.
pub fn reduced_fidelity(ideal: &StateVector, actual: &StateVector, data: &[usize]) -> f64 {
    let data_mask: usize = data.iter().map(|&p| 1usize << p).sum();
    let mut acc: HashMap<usize, C> = HashMap::new();
    let ideal_amps = ideal.amplitudes();
    for (i, a) in actual.amplitudes().iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let j = data
            .iter()
            .enumerate()
            .fold(0usize, |j, (k, &p)| j | ((i >> p) & 1) << k);
        *acc.entry(i & !data_mask).or_default() += ideal_amps[j].conj() * a;
    }
    acc.values().map(|v| v.norm_sqr()).sum()
}

fn check_map(original: &Circuit, compiled: &Circuit, map: &QubitMap) -> Result<(), SimError> {
    let n = original.num_qubits();
    for m in [&map.input, &map.output] {
        if m.len() != n {
            return Err(SimError::MappingMismatch {
                expected: n,
                got: m.len(),
            });
        }
        if m.iter().any(|&p| p >= compiled.num_qubits()) {
            return Err(SimError::MappingMismatch {
                expected: compiled.num_qubits(),
                got: m.iter().copied().max().unwrap_or(0) + 1,
            });
        }
    }
    Ok(())
}

fn num_measurements(c: &Circuit) -> usize {
    c.count_where(|g| matches!(g, Gate::Measure { .. }))
}

/// Every outcome pattern when there are few measurements, otherwise
/// `branches` random patterns that fall back to the possible outcome.
fn branch_plan(m: usize, branches: usize, rng: &mut ChaCha8Rng) -> Vec<Outcomes> {
    if m < usize::BITS as usize && (1usize << m) <= branches {
        (0..1usize << m)
            .map(|k| Outcomes::forced((0..m).map(|b| k >> b & 1 == 1).collect()))
            .collect()
    } else {
        (0..branches)
            .map(|_| Outcomes::preferred((0..m).map(|_| rng.gen()).collect()))
            .collect()
    }
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(trial as u64)
}

/// Statevector comparison over random product inputs.
pub fn check_equivalence(
    original: &Circuit,
    compiled: &Circuit,
    map: &QubitMap,
    trials: usize,
    branches: usize,
    seed: u64,
) -> Result<VerifyReport, SimError> {
    check_map(original, compiled, map)?;
    let n_phys = compiled.num_qubits();
    if n_phys > STATEVECTOR_CAP {
        return Err(SimError::TooManyQubits {
            qubits: n_phys,
            cap: STATEVECTOR_CAP,
        });
    }
    let m = num_measurements(compiled);
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let states: Vec<[C; 2]> = (0..original.num_qubits())
                .map(|_| {
                    let (th, ph): (f64, f64) = (rng.gen::<f64>() * PI, rng.gen::<f64>() * 2.0 * PI);
                    [C::new((th / 2.0).cos(), 0.0), C::from_polar((th / 2.0).sin(), ph)]
                })
                .collect();
            let (ideal, _) = statevector_run(original, StateVector::product(&states)?, &mut Outcomes::seeded(s))?;
            let mut phys = vec![[C::new(1.0, 0.0), C::new(0.0, 0.0)]; n_phys];
            for (q, &p) in map.input.iter().enumerate() {
                phys[p] = states[q];
            }
            let init = StateVector::product(&phys)?;
            let mut report = TrialReport {
                seed: s,
                branches: 0,
                infeasible: 0,
                min_fidelity: f64::INFINITY,
            };
            let mut patterns = HashSet::new();
            for mut outcomes in branch_plan(m, branches, &mut rng) {
                report.branches += 1;
                match statevector_run(compiled, init.clone(), &mut outcomes) {
                    Ok((sv, bits)) => {
                        patterns.insert(bits);
                        let f = reduced_fidelity(&ideal, &sv, &map.output);
                        report.min_fidelity = report.min_fidelity.min(f);
                    }
                    Err(SimError::ImpossibleOutcome { .. }) => report.infeasible += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((report, patterns))
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(VerifyReport::collect(VerifyMode::Statevector, results))
}

/// Prepares one of the six Pauli eigenstates on `q`.
fn pauli_eigenstate(k: u8, q: Qubit) -> Vec<Gate> {
    match k {
        0 => vec![],
        1 => vec![Gate::X(q)],
        2 => vec![Gate::H(q)],
        3 => vec![Gate::X(q), Gate::H(q)],
        4 => vec![Gate::H(q), Gate::S(q)],
        _ => vec![Gate::X(q), Gate::H(q), Gate::S(q)],
    }
}

/// Tableau comparison over random Pauli-eigenstate inputs: every stabilizer
/// of the source's output, moved to the output map, must hold with the
/// same sign on the compiled state.
pub fn check_equivalence_stabilizer(
    original: &Circuit,
    compiled: &Circuit,
    map: &QubitMap,
    trials: usize,
    branches: usize,
    seed: u64,
) -> Result<VerifyReport, SimError> {
    check_map(original, compiled, map)?;
    let n_phys = compiled.num_qubits();
    let m = num_measurements(compiled);
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let kinds: Vec<u8> = (0..original.num_qubits()).map(|_| rng.gen_range(0..6)).collect();
            let mut src = Circuit::new(original.num_qubits());
            let mut init = Tableau::new(n_phys);
            for (q, &k) in kinds.iter().enumerate() {
                src.extend(pauli_eigenstate(k, Qubit(q as u32)));
                for g in pauli_eigenstate(k, Qubit(map.input[q] as u32)) {
                    init.apply_gate(&g)?;
                }
            }
            src.set_num_bits(original.num_bits());
            src.append(original);
            let ideal = stabilizer_run(&src, &mut Outcomes::seeded(s))?;
            let gens: Vec<_> = ideal
                .tableau
                .stabilizers()
                .iter()
                .map(|p| p.remap(n_phys, &map.output))
                .collect();
            let mut report = TrialReport {
                seed: s,
                branches: 0,
                infeasible: 0,
                min_fidelity: f64::INFINITY,
            };
            let mut patterns = HashSet::new();
            for mut outcomes in branch_plan(m, branches, &mut rng) {
                report.branches += 1;
                match stabilizer_run_from(compiled, init.clone(), &mut outcomes) {
                    Ok(run) => {
                        let ok = gens.iter().all(|g| run.tableau.expectation(g) == Some(1));
                        patterns.insert(run.bits);
                        report.min_fidelity = report.min_fidelity.min(if ok { 1.0 } else { 0.0 });
                    }
                    Err(SimError::ImpossibleOutcome { .. }) => report.infeasible += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((report, patterns))
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(VerifyReport::collect(VerifyMode::Stabilizer, results))
}

/// Picks statevector mode under the size cap, stabilizer mode for Clifford
/// circuits, and reports anything else as unverifiable.
pub fn verify(
    original: &Circuit,
    compiled: &Circuit,
    map: &QubitMap,
    trials: usize,
    branches: usize,
    seed: u64,
) -> Result<VerifyReport, SimError> {
    if compiled.num_qubits() <= STATEVECTOR_CAP {
        return check_equivalence(original, compiled, map, trials, branches, seed);
    }
    let clifford = |c: &Circuit| c.gates().all(is_tableau_gate);
    if clifford(original) && clifford(compiled) {
        return check_equivalence_stabilizer(original, compiled, map, trials, branches, seed);
    }
    check_map(original, compiled, map)?;
    Ok(VerifyReport::unverifiable(format!(
        "unverifiable at this size: {} qubits exceeds the statevector cap of {} and the circuit is not Clifford",
        compiled.num_qubits(),
        STATEVECTOR_CAP
    )))
}

fn is_tableau_gate(g: &Gate) -> bool {
    match *g {
        Gate::Rz(_, t) => {
            let k = t / (PI / 2.0);
            (k - k.round()).abs() < 1e-9
        }
        Gate::Ry(..) | Gate::Cp(..) => false,
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Basis, Pauli};

    fn teleport() -> (Circuit, Circuit, QubitMap) {
        let original = Circuit::new(1);
        let mut c = Circuit::new(3);
        let a = c.alloc_bit();
        let b = c.alloc_bit();
        c.extend([
            Gate::H(Qubit(1)),
            Gate::Cx(Qubit(1), Qubit(2)),
            Gate::Cx(Qubit(0), Qubit(1)),
            Gate::Measure { qubit: Qubit(0), basis: Basis::X, bit: a },
            Gate::Measure { qubit: Qubit(1), basis: Basis::Z, bit: b },
            Gate::CondPauli { pauli: Pauli::X, qubit: Qubit(2), bits: vec![b] },
            Gate::CondPauli { pauli: Pauli::Z, qubit: Qubit(2), bits: vec![a] },
        ]);
        (original, c, QubitMap { input: vec![0], output: vec![2] })
    }

    #[test]
    fn identity_passes() {
        let c = Circuit::new(3);
        let r = check_equivalence(&c, &c, &QubitMap::fixed(vec![0, 1, 2]), 5, 4, 1).unwrap();
        assert!(r.passed());
        assert!((r.min_fidelity.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn teleportation_passes_every_branch() {
        let (orig, c, map) = teleport();
        let r = check_equivalence(&orig, &c, &map, 20, 4, 7).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.branch_coverage, 4);
        let s = check_equivalence_stabilizer(&orig, &c, &map, 20, 4, 7).unwrap();
        assert!(s.passed());
    }

    #[test]
    fn corrupted_frame_fails() {
        let (orig, mut c, map) = teleport();
        let mut bad = Circuit::with_bits(3, 2);
        for g in c.gates().take(6) {
            bad.push(g.clone());
        }
        c = bad;
        assert!(!check_equivalence(&orig, &c, &map, 20, 4, 7).unwrap().passed());
        assert!(!check_equivalence_stabilizer(&orig, &c, &map, 20, 4, 7).unwrap().passed());
    }

    #[test]
    fn wrong_map_is_rejected() {
        let (orig, c, _) = teleport();
        let r = check_equivalence(&orig, &c, &QubitMap::fixed(vec![0, 1]), 1, 1, 0);
        assert!(matches!(r, Err(SimError::MappingMismatch { .. })));
    }

    #[test]
    fn large_non_clifford_is_unverifiable() {
        let mut orig = Circuit::new(1);
        orig.push(Gate::Rz(Qubit(0), 0.1));
        let mut c = Circuit::new(30);
        c.push(Gate::Rz(Qubit(0), 0.1));
        let r = verify(&orig, &c, &QubitMap::fixed(vec![0]), 1, 1, 0).unwrap();
        assert!(matches!(r.status, VerifyStatus::Unverifiable(ref s) if s.contains("unverifiable at this size")));
    }

    #[test]
    fn large_clifford_uses_tableau() {
        let mut orig = Circuit::new(2);
        orig.extend([Gate::H(Qubit(0)), Gate::Cx(Qubit(0), Qubit(1))]);
        let mut c = Circuit::new(40);
        c.extend([Gate::H(Qubit(5)), Gate::Swap(Qubit(5), Qubit(6)), Gate::Cx(Qubit(6), Qubit(39))]);
        let map = QubitMap { input: vec![5, 39], output: vec![6, 39] };
        let r = verify(&orig, &c, &map, 10, 2, 3).unwrap();
        assert_eq!(r.mode, Some(VerifyMode::Stabilizer));
        assert!(r.passed());
    }
}
