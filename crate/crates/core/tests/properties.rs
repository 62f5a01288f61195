//! Property tests for cross-module invariants.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64 as C;
use proptest::prelude::*;

use mech::circuit::{
    aggregate_frontier, commuting_frontier, decompose_to_basis, weighted_depth, Circuit, FrontierTracker, Gate, Qubit,
};
use mech::highway::{allocate_highway, critical_qubits, HighwayConfig};
use mech::metrics::{eff_cnots, ErrorModel, Weight};
use mech::scheduler::{compile, SchedulerConfig};
use mech::sim::{check_equivalence, stabilizer_run, statevector_run, Outcomes, PauliString, QubitMap, StateVector};
use mech::error::TopologyError;
use mech::topology::{apply_sparsity, build_chiplet_array, distance_map, ChipletSpec, CouplingGraph, EdgeKind, Ratio, Structure};

fn arb_structure() -> impl Strategy<Value = Structure> {
    prop::sample::select(Structure::ALL.to_vec())
}

fn arb_spec(max_side: usize) -> impl Strategy<Value = ChipletSpec> {
    (arb_structure(), 2..=max_side, 2..=max_side, 1..=3usize, 1..=3usize, 1..=7u32).prop_map(|(s, cr, cc, ar, ac, k)| {
        ChipletSpec {
            structure: s,
            chiplet_rows: cr,
            chiplet_cols: cc,
            array_rows: ar,
            array_cols: ac,
            cross_sparsity: Ratio::new(k, 7).unwrap(),
        }
    })
}

fn q(i: usize) -> Qubit {
    Qubit(i as u32)
}

fn arb_gate(n: usize, clifford: bool) -> impl Strategy<Value = Gate> {
    let one = (0..n, 0..8usize, -PI..PI).prop_map(move |(a, k, t)| match k {
        0 => Gate::H(q(a)),
        1 => Gate::X(q(a)),
        2 => Gate::Y(q(a)),
        3 => Gate::Z(q(a)),
        4 => Gate::S(q(a)),
        5 => Gate::Sdg(q(a)),
        6 if !clifford => Gate::Rz(q(a), t),
        7 if !clifford => Gate::Ry(q(a), t),
        _ => Gate::H(q(a)),
    });
    let two = (0..n, 1..n, 0..4usize, -PI..PI).prop_map(move |(a, d, k, t)| {
        let b = (a + d) % n;
        match k {
            0 => Gate::Cx(q(a), q(b)),
            1 => Gate::Cz(q(a), q(b)),
            2 if !clifford => Gate::Cp(q(a), q(b), t),
            _ => Gate::Swap(q(a), q(b)),
        }
    });
    prop_oneof![one, two]
}

fn arb_circuit(n: usize, len: usize, clifford: bool) -> impl Strategy<Value = Circuit> {
    prop::collection::vec(arb_gate(n, clifford), 1..=len).prop_map(move |gs| {
        let mut c = Circuit::new(n);
        c.extend(gs);
        c
    })
}

fn random_state(n: usize, seed: u64) -> StateVector {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<[C; 2]> = (0..n)
        .map(|_| {
            let (th, ph): (f64, f64) = (rng.gen::<f64>() * PI, rng.gen::<f64>() * 2.0 * PI);
            [C::new((th / 2.0).cos(), 0.0), C::from_polar((th / 2.0).sin(), ph)]
        })
        .collect();
    StateVector::product(&states).unwrap()
}

fn run(c: &Circuit, init: &StateVector) -> StateVector {
    statevector_run(c, init.clone(), &mut Outcomes::seeded(0)).unwrap().0
}

/// Specs too small for their structure to connect are rejected by design.
fn built(spec: &ChipletSpec) -> Result<CouplingGraph, TestCaseError> {
    match build_chiplet_array(spec) {
        Ok(g) => Ok(g),
        Err(TopologyError::DisconnectedChiplets(..) | TopologyError::Disconnected) => {
            Err(TestCaseError::reject("structure too small to connect"))
        }
        Err(e) => Err(TestCaseError::fail(e.to_string())),
    }
}

fn floyd_warshall(g: &CouplingGraph) -> Vec<Vec<Option<usize>>> {
    let n = g.num_nodes();
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
    }
    for e in g.edges() {
        d[e.a][e.b] = Some(1);
        d[e.b][e.a] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|x| a + b < x) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn arrays_are_connected_and_cross_edges_span_chiplets(spec in arb_spec(6)) {
        let g = built(&spec)?;
        prop_assert!(g.is_connected());
        for e in g.edges() {
            let split = g.node(e.a).chiplet != g.node(e.b).chiplet;
            prop_assert_eq!(split, e.kind == EdgeKind::CrossChip);
        }
    }

    #[test]
    fn sparsity_is_idempotent_and_monotone(spec in arb_spec(6), a in 1..=7u32, b in 1..=7u32) {
        let g = built(&ChipletSpec { cross_sparsity: Ratio::ONE, ..spec })?;
        let (lo, hi) = (Ratio::new(a.min(b), 7).unwrap(), Ratio::new(a.max(b), 7).unwrap());
        let once = apply_sparsity(&g, lo);
        let twice = apply_sparsity(&once, lo);
        prop_assert_eq!(once.edges(), twice.edges());
        let wide: BTreeSet<(usize, usize)> = apply_sparsity(&g, hi).edges().iter().map(|e| (e.a, e.b)).collect();
        prop_assert!(once.edges().iter().all(|e| wide.contains(&(e.a, e.b))));
    }

    #[test]
    fn distance_map_matches_all_pairs(spec in arb_spec(4), src in any::<prop::sample::Index>()) {
        let g = built(&spec)?;
        prop_assume!(g.num_nodes() <= 100);
        let s = src.index(g.num_nodes());
        let oracle = floyd_warshall(&g);
        prop_assert_eq!(distance_map(&g, &[s], &[]), oracle[s].clone());
    }

    #[test]
    fn highway_segments_are_paths_between_critical_qubits(spec in arb_spec(7)) {
        prop_assume!(spec.chiplet_rows >= 3 && spec.chiplet_cols >= 3);
        let g = built(&spec)?;
        let l = allocate_highway(&g, &HighwayConfig::default()).unwrap();
        let on: Vec<usize> = (0..g.num_nodes()).filter(|&n| l.on_highway(n)).collect();
        prop_assume!(!on.is_empty());
        let reach = mech::topology::bfs_filtered(&g, &on[..1], |n| l.on_highway(n));
        prop_assert!(on.iter().all(|&n| reach[n].is_some()), "highway is disconnected");
        let critical: BTreeSet<usize> = critical_qubits(&l).into_iter().collect();
        for seg in l.path_segments() {
            prop_assert!(critical.contains(&seg[0]) && critical.contains(seg.last().unwrap()));
            prop_assert!(seg.windows(2).all(|w| g.are_adjacent(w[0], w[1])));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_preserves_the_state(c in arb_circuit(5, 24, false), seed in any::<u64>()) {
        let init = random_state(5, seed);
        let a = run(&c, &init);
        let b = run(&decompose_to_basis(&c), &init);
        prop_assert!((a.inner(&b).norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn frontier_gates_commute_pairwise(c in arb_circuit(4, 16, false), seed in any::<u64>()) {
        let f = commuting_frontier(&c, &[]);
        let init = random_state(4, seed);
        for (i, &x) in f.iter().enumerate() {
            for &y in &f[i + 1..] {
                let mut xy = Circuit::new(4);
                xy.extend([c.gate(x).clone(), c.gate(y).clone()]);
                let mut yx = Circuit::new(4);
                yx.extend([c.gate(y).clone(), c.gate(x).clone()]);
                let d = (run(&xy, &init).inner(&run(&yx, &init)).norm_sqr() - 1.0).abs();
                prop_assert!(d < 1e-10, "{:?} and {:?} do not commute", c.gate(x), c.gate(y));
            }
        }
    }

    #[test]
    fn aggregation_partitions_the_frontier(c in arb_circuit(6, 30, false)) {
        let mut t = FrontierTracker::new(&c);
        while !t.is_done() {
            let f = t.frontier();
            let agg = aggregate_frontier(&c, &f);
            let mut seen: Vec<usize> = agg.groups.iter().flat_map(|g| g.sources.iter().copied()).collect();
            seen.extend(&agg.residual);
            seen.sort_unstable();
            let mut want = f.clone();
            want.sort_unstable();
            prop_assert_eq!(&seen, &want);
            let cx = f.iter().filter(|&&i| matches!(c.gate(i), Gate::Cx(..))).count();
            prop_assert_eq!(agg.groups.iter().map(|g| g.len()).sum::<usize>(), cx);
            t.execute(f[0]);
        }
    }

    #[test]
    fn depth_never_drops_when_a_gate_is_inserted(c in arb_circuit(5, 20, false), g in arb_gate(5, false), at in any::<prop::sample::Index>()) {
        let gates: Vec<Gate> = c.gates().cloned().collect();
        let k = at.index(gates.len() + 1);
        let mut longer = Circuit::new(5);
        longer.extend(gates[..k].iter().cloned());
        longer.push(g);
        longer.extend(gates[k..].iter().cloned());
        prop_assert!(weighted_depth(&longer, 2.0) >= weighted_depth(&c, 2.0));
    }

    #[test]
    fn stabilizer_and_statevector_agree(c in arb_circuit(6, 30, true), paulis in prop::collection::vec((0..6usize, 0..3usize), 1..4)) {
        let tab = stabilizer_run(&c, &mut Outcomes::seeded(0)).unwrap().tableau;
        let sv = run(&c, &StateVector::zero(6).unwrap());
        let mut p = PauliString::identity(6);
        let mut apply = Circuit::new(6);
        for &(k, kind) in &paulis {
            let (x, z, g) = match kind {
                0 => (true, false, Gate::X(q(k))),
                1 => (false, true, Gate::Z(q(k))),
                _ => (true, true, Gate::Y(q(k))),
            };
            // Repeated qubits would multiply Paulis; keep the first.
            if apply.gates().any(|h| h.qubits()[0] == q(k)) {
                continue;
            }
            p.set(k, x, z);
            apply.push(g);
        }
        let e = sv.inner(&run(&apply, &sv)).re;
        let want = tab.expectation(&p).map_or(0.0, f64::from);
        prop_assert!((e - want).abs() < 1e-9, "tableau {} statevector {}", want, e);
    }

    #[test]
    fn eff_cnots_is_linear_and_exact(on in 0u64..1 << 30, cross in 0u64..1 << 30, meas in 0u64..1 << 30, rc in 1u64..100, rm in 1u64..100) {
        let model = ErrorModel { ratio_cross: Weight::new(rc, 10).unwrap(), ratio_meas: Weight::new(rm, 10).unwrap(), meas_depth: 2.0 };
        let oracle = (10 * on + rc * cross + rm * meas) as f64 / 10.0;
        prop_assert_eq!(eff_cnots(on, cross, meas, &model).to_bits(), oracle.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn compiled_random_circuits_are_equivalent(c in arb_circuit(6, 24, false), min_targets in 2..=4usize, seed in any::<u64>()) {
        let g = build_chiplet_array(&ChipletSpec::square(3, 1, 2)).unwrap();
        let l = allocate_highway(&g, &HighwayConfig::default()).unwrap();
        let p = compile(&c, &g, &l, &SchedulerConfig { min_targets, ..Default::default() }).unwrap();
        for gate in p.circuit.gates() {
            let qs = gate.qubits();
            prop_assert!(qs.windows(2).all(|w| g.are_adjacent(w[0].index(), w[1].index())), "{:?}", gate);
        }
        let distinct: BTreeSet<_> = p.final_map.iter().collect();
        prop_assert_eq!(distinct.len(), p.final_map.len());
        for s in &p.shuttles {
            let mut owned = BTreeSet::new();
            for gr in &s.gates {
                prop_assert!(gr.nodes.iter().all(|n| owned.insert(*n)));
                for comp in &gr.components {
                    prop_assert_eq!(comp.t_exe, comp.t_arr.max(comp.t_ava));
                }
            }
        }
        let map = QubitMap { input: p.initial_map.clone(), output: p.final_map.clone() };
        let r = check_equivalence(&c, &p.circuit, &map, 2, 4, seed).unwrap();
        prop_assert!(r.passed(), "min fidelity {:?}", r.min_fidelity);
    }
}
