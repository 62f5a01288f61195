//! Acceptance gate: one PASS/FAIL line per criterion. Failures are
//! reported but only turn into a nonzero exit when `MECH_ACCEPTANCE_STRICT`
//! is set, so the rest of the workspace suite keeps running.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use mech::circuit::{crz_gates, Circuit, ComponentKind, Gate, Qubit};
use mech::entanglement::{cat_protocol, ghz_prep_contiguous, ghz_prep_interleaved, ghz_prep_tree, CatComponent, GhzFragment, TreeEdge};
use mech::highway::{allocate_highway, HighwayConfig, HighwayLayout};
use mech::metrics::{bv_secret, eff_cnots, gen_bv, BenchmarkKind, ErrorModel};
use mech::scheduler::compile;
use mech::sim::{
    check_equivalence, check_equivalence_stabilizer, stabilizer_run, Outcomes, PauliString, QubitMap, Tableau,
};
use mech::topology::{build_chiplet_array, ChipletSpec, CouplingGraph, NodeId, Ratio};
use mech_cli::pipeline::{compile_on, remeasure, BenchSpec, Target};
use mech_cli::sweep::{compile_pair, improvement};
use mech_cli::Config;

const FIDELITY_FLOOR: f64 = 1.0 - 1e-9;
const C1_GATES: usize = 200;
const C1_MAX_QUBITS: usize = 16;
const C1_LIMIT: Duration = Duration::from_secs(120);
/// Random product inputs per gate, and measurement branches per input:
/// exhaustive when they fit, sampled otherwise.
const C1_INPUTS: usize = 2;
const C1_BRANCHES: usize = 64;
const C2_LENGTHS: std::ops::RangeInclusive<usize> = 2..=40;
const C2_CONTIGUOUS_DEPTH: f64 = 2.0;
const C2_INTERLEAVED_DEPTH: f64 = 6.0;
const C2_LIMIT: Duration = Duration::from_secs(60);
const C3_TRIALS: usize = 20;
const C3_MAX_PHYSICAL: usize = 22;
const C3_LIMIT: Duration = Duration::from_secs(600);
const C4_MAX_DEPTH: f64 = 60.0;
const C4_MAX_RATIO: f64 = 1.5;
const C6_TRIPLES: usize = 1000;
const C7_MIN_R2: f64 = 0.99;
const C7_MAX_SPREAD: f64 = 0.10;
const C8_LIMIT: Duration = Duration::from_secs(600);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn grid(rows: usize, cols: usize) -> CouplingGraph {
    build_chiplet_array(&ChipletSpec { chiplet_rows: rows, chiplet_cols: cols, ..ChipletSpec::square(1, 1, 1) }).unwrap()
}

fn q(n: usize) -> Qubit {
    Qubit(n as u32)
}

/// Random multi-target gates on a 2xW grid: highway on row 0, operands on
/// row 1, GHZ prepared over the whole top row.
fn criterion_1() -> Verdict {
    let start = Instant::now();
    let results: Vec<(f64, usize)> = (0..C1_GATES as u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let width = rng.gen_range(2..=C1_MAX_QUBITS / 2);
            let k = rng.gen_range(1..=6.min(width - 1));
            let g = grid(2, width);
            let top = |c: usize| g.node_at(0, c).unwrap();
            let bottom = |c: usize| g.node_at(1, c).unwrap();
            let mut cols: Vec<usize> = (0..width).collect();
            cols.shuffle(&mut rng);
            let (control, targets) = (cols[0], &cols[1..=k]);
            let edges: Vec<TreeEdge> = (1..width).map(|c| TreeEdge::direct(top(c - 1), top(c))).collect();
            let required: Vec<NodeId> = cols[..=k].iter().map(|&c| top(c)).collect();
            let prep = ghz_prep_tree(&g, &edges, top(control), &required).unwrap();
            let mut original = Circuit::new(k + 1);
            let comps: Vec<CatComponent> = targets
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let kind = if rng.gen_bool(0.5) {
                        original.push(Gate::Cx(q(0), q(i + 1)));
                        ComponentKind::Cx
                    } else {
                        let theta = rng.gen_range(-3.0..3.0);
                        original.extend(crz_gates(q(0), q(i + 1), theta));
                        ComponentKind::Crz(theta)
                    };
                    CatComponent { target: bottom(c), entrance: top(c), kind }
                })
                .collect();
            let cat = cat_protocol(&g, &prep.surviving, bottom(control), top(control), &comps).unwrap();
            let mut compiled = Circuit::new(g.num_nodes());
            compiled.append_fresh_bits(&prep.circuit);
            compiled.append_fresh_bits(&cat);
            let map = QubitMap::fixed(cols[..=k].iter().map(|&c| bottom(c)).collect());
            let r = check_equivalence(&original, &compiled, &map, C1_INPUTS, C1_BRANCHES, seed).unwrap();
            let fid = if r.passed() { r.min_fidelity.unwrap() } else { f64::NEG_INFINITY };
            (fid, r.branch_coverage)
        })
        .collect();
    let elapsed = start.elapsed();
    let min = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let branches: usize = results.iter().map(|r| r.1).sum();
    verdict(
        min >= FIDELITY_FLOOR && elapsed < C1_LIMIT,
        format!("{C1_GATES} gates, min fidelity {min:.12}, {branches} branches, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn patterns(m: usize, seed: u64) -> Vec<Vec<bool>> {
    if m <= 10 {
        (0..1usize << m).map(|k| (0..m).map(|b| k >> b & 1 == 1).collect()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..256).map(|_| (0..m).map(|_| rng.gen()).collect()).collect()
    }
}

fn is_ghz(t: &Tableau, nodes: &[NodeId]) -> bool {
    let n = t.num_qubits();
    t.expectation(&PauliString::xs(n, nodes)) == Some(1)
        && nodes[1..].iter().all(|&v| t.expectation(&PauliString::zs(n, &[nodes[0], v])) == Some(1))
}

/// Every sampled branch ends with GHZ on the survivors, measured nodes in
/// |0⟩ and untouched nodes (prepared in |+i⟩) unchanged.
fn fragment_exact(n: usize, frag: &GhzFragment, untouched: &[NodeId]) -> bool {
    let mut c = Circuit::new(n);
    for &s in untouched {
        c.extend([Gate::H(q(s)), Gate::S(q(s))]);
    }
    c.append_fresh_bits(&frag.circuit);
    patterns(frag.measured.len(), frag.support.len() as u64).into_iter().all(|p| {
        let Ok(run) = stabilizer_run(&c, &mut Outcomes::forced(p)) else {
            return false;
        };
        let t = &run.tableau;
        is_ghz(t, &frag.surviving)
            && frag.measured.iter().all(|&v| t.expectation(&PauliString::zs(n, &[v])) == Some(1))
            && untouched.iter().all(|&s| {
                let mut y = PauliString::identity(n);
                y.set(s, true, true);
                t.expectation(&y) == Some(1)
            })
    })
}

fn single_line(len: usize) -> (CouplingGraph, HighwayLayout) {
    let g = build_chiplet_array(&ChipletSpec { chiplet_rows: 3, chiplet_cols: len, ..ChipletSpec::square(1, 1, 1) }).unwrap();
    let cfg = HighwayConfig { row_offset: Some(1), col_offset: Some(usize::MAX), ..HighwayConfig::default() };
    let l = allocate_highway(&g, &cfg).unwrap();
    (g, l)
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut worst = (0.0f64, 0.0f64);
    let mut bad = Vec::new();
    let line = grid(1, *C2_LENGTHS.end());
    for len in C2_LENGTHS {
        let path: Vec<NodeId> = (0..len).collect();
        let f = ghz_prep_contiguous(&line, &path).unwrap();
        worst.0 = worst.0.max(f.prep_depth());
        if !fragment_exact(line.num_nodes(), &f, &[]) || f.prep_depth() > C2_CONTIGUOUS_DEPTH {
            bad.push(format!("contiguous-{len}"));
        }
        let (g, l) = single_line(len);
        let seg = &l.lines()[0];
        let f = ghz_prep_interleaved(&g, &l, seg).unwrap();
        worst.1 = worst.1.max(f.prep_depth());
        let slots: Vec<NodeId> = seg.iter().copied().filter(|&v| !l.is_backbone(v)).collect();
        if !fragment_exact(g.num_nodes(), &f, &slots) || f.prep_depth() > C2_INTERLEAVED_DEPTH {
            bad.push(format!("interleaved-{len}"));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        bad.is_empty() && elapsed < C2_LIMIT,
        format!(
            "lengths {}..={}, max prep depth {} contiguous / {} interleaved, {:.1}s{}",
            C2_LENGTHS.start(),
            C2_LENGTHS.end(),
            worst.0,
            worst.1,
            elapsed.as_secs_f64(),
            if bad.is_empty() { String::new() } else { format!(", failing {bad:?}") }
        ),
    )
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let cfg = Config::square(3, 1, 2);
    let target = Target::build(&cfg).unwrap();
    let mut notes = Vec::new();
    let mut pass = target.graph.num_nodes() <= C3_MAX_PHYSICAL;
    for name in ["qft-5", "qaoa-6", "vqe-4", "bv-8"] {
        let b = name.parse::<BenchSpec>().unwrap().resolve(&target);
        let c = b.generate(cfg.seed, cfg.vqe_layers);
        let p = compile_on(&cfg, &target, &c, true).unwrap().program;
        let map = QubitMap { input: p.initial_map.clone(), output: p.final_map.clone() };
        let r = check_equivalence(&c, &p.circuit, &map, C3_TRIALS, 4, 17).unwrap();
        pass &= r.passed() && r.trials.len() >= C3_TRIALS;
        notes.push(format!("{name} {:.12}", r.min_fidelity.unwrap_or(f64::NAN)));
    }
    let (ok, note) = bv_261_check();
    pass &= ok;
    notes.push(note);
    let elapsed = start.elapsed();
    pass &= elapsed < C3_LIMIT;
    verdict(pass, format!("{} physical; {}; {:.1}s", target.graph.num_nodes(), notes.join(", "), elapsed.as_secs_f64()))
}

/// Stabilizer equivalence plus a deterministic Z readout of the secret on
/// every data qubit, across several measurement branches.
fn bv_261_check() -> (bool, String) {
    let cfg = Config::square(6, 3, 3);
    let target = Target::build(&cfg).unwrap();
    let c = gen_bv(261, cfg.seed);
    let p = compile(&c, &target.graph, &target.layout, &cfg.scheduler_config()).unwrap();
    let map = QubitMap { input: p.initial_map.clone(), output: p.final_map.clone() };
    let r = check_equivalence_stabilizer(&c, &p.circuit, &map, 4, 4, 5).unwrap();
    let secret = bv_secret(261, cfg.seed);
    let n = p.circuit.num_qubits();
    let readout = (0..4).all(|s| {
        let run = stabilizer_run(&p.circuit, &mut Outcomes::seeded(s)).unwrap();
        secret.iter().enumerate().all(|(i, &bit)| {
            let z = run.tableau.expectation(&PauliString::zs(n, &[p.final_map[i]]));
            z == Some(if bit { -1 } else { 1 })
        })
    });
    (r.passed() && readout, format!("bv-261 stabilizer {:?}, secret readout {}", r.status, if readout { "exact" } else { "wrong" }))
}

fn mech_depth(cfg: &Config, bench: &str) -> f64 {
    let target = Target::build(cfg).unwrap();
    let b = bench.parse::<BenchSpec>().unwrap().resolve(&target);
    let c = b.generate(cfg.seed, cfg.vqe_layers);
    compile_on(cfg, &target, &c, true).unwrap().metrics.depth
}

fn criterion_4() -> Verdict {
    let d261 = mech_depth(&Config::square(6, 3, 3), "bv-261");
    let d360 = mech_depth(&Config::square(7, 3, 3), "bv-360");
    let ratio = d360 / d261;
    verdict(
        d261 <= C4_MAX_DEPTH && ratio <= C4_MAX_RATIO,
        format!("bv-261 depth {d261}, bv-360 depth {d360}, ratio {ratio:.3}"),
    )
}

fn criterion_5() -> Verdict {
    let arrays = [(2, 2), (2, 3), (3, 3)];
    let jobs: Vec<(BenchmarkKind, usize)> =
        BenchmarkKind::ALL.into_iter().flat_map(|k| (0..arrays.len()).map(move |a| (k, a))).collect();
    let imps: Vec<f64> = jobs
        .par_iter()
        .map(|&(kind, a)| {
            let (r, c) = arrays[a];
            let pair = compile_pair(&Config::square(7, r, c), BenchSpec { kind, size: None }).unwrap();
            improvement(pair.base.metrics.depth, pair.mech.metrics.depth)
        })
        .collect();
    let mut pass = true;
    let mut notes = Vec::new();
    for (i, kind) in BenchmarkKind::ALL.into_iter().enumerate() {
        let row = &imps[i * arrays.len()..(i + 1) * arrays.len()];
        pass &= row.iter().all(|&x| x > 0.0) && row.windows(2).all(|w| w[1] >= w[0]);
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.3}")).collect();
        notes.push(format!("{} {}", kind.name(), cells.join("/")));
    }
    verdict(pass, format!("depth improvement 2x2/2x3/3x3: {}", notes.join(", ")))
}

fn criterion_6() -> Verdict {
    let model = ErrorModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mismatches = (0..C6_TRIPLES)
        .filter(|_| {
            let (on, cross, meas): (u64, u64, u64) =
                (rng.gen_range(0..1 << 24), rng.gen_range(0..1 << 24), rng.gen_range(0..1 << 24));
            let oracle = (10 * on + 74 * cross + 22 * meas) as f64 / 10.0;
            eff_cnots(on, cross, meas, &model).to_bits() != oracle.to_bits()
        })
        .count();
    verdict(mismatches == 0, format!("{C6_TRIPLES} triples, {mismatches} mismatches"))
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / lo
}

fn criterion_7() -> Verdict {
    let base = Config::square(7, 3, 3);
    let target = Target::build(&base).unwrap();
    let depths: Vec<f64> = (1..=20).map(f64::from).collect();
    let fits: Vec<(BenchmarkKind, f64)> = BenchmarkKind::ALL
        .par_iter()
        .map(|&kind| {
            let c = BenchSpec { kind, size: None }.resolve(&target).generate(base.seed, base.vqe_layers);
            let compiled = compile_on(&base, &target, &c, true).unwrap();
            let ys: Vec<f64> = depths
                .iter()
                .map(|&md| remeasure(&compiled, &target, &ErrorModel { meas_depth: md, ..base.error_model() }).unwrap().depth)
                .collect();
            (kind, r_squared(&depths, &ys))
        })
        .collect();
    let sparsities = [Ratio::new(7, 7).unwrap(), Ratio::new(3, 7).unwrap(), Ratio::new(1, 7).unwrap()];
    let jobs: Vec<(BenchmarkKind, Ratio)> =
        BenchmarkKind::ALL.into_iter().flat_map(|k| sparsities.map(|s| (k, s))).collect();
    let metrics: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(kind, s)| {
            let mut cfg = base.clone();
            cfg.topology.cross_sparsity = s;
            let t = Target::build(&cfg).unwrap();
            let c = BenchSpec { kind, size: None }.resolve(&t).generate(cfg.seed, cfg.vqe_layers);
            let m = compile_on(&cfg, &t, &c, true).unwrap().metrics;
            (m.depth, m.eff_cnots)
        })
        .collect();
    let mut pass = fits.iter().all(|f| f.1 >= C7_MIN_R2);
    let mut notes: Vec<String> = fits.iter().map(|(k, r2)| format!("{} R2 {r2:.4}", k.name())).collect();
    for (i, kind) in BenchmarkKind::ALL.into_iter().enumerate() {
        let m = &metrics[i * 3..i * 3 + 3];
        let d = spread(&m.iter().map(|x| x.0).collect::<Vec<_>>());
        let e = spread(&m.iter().map(|x| x.1).collect::<Vec<_>>());
        pass &= d < C7_MAX_SPREAD && e < C7_MAX_SPREAD;
        notes.push(format!("{} sparsity spread depth {d:.3} eff {e:.3}", kind.name()));
    }
    verdict(pass, notes.join(", "))
}

fn criterion_8() -> Verdict {
    let cfg = Config::square(6, 3, 3);
    let target = Target::build(&cfg).unwrap();
    let mut worst = Duration::ZERO;
    let mut notes = Vec::new();
    for kind in BenchmarkKind::ALL {
        let c = BenchSpec { kind, size: Some(261) }.resolve(&target).generate(cfg.seed, cfg.vqe_layers);
        let start = Instant::now();
        compile(&c, &target.graph, &target.layout, &cfg.scheduler_config()).unwrap();
        let t = start.elapsed();
        worst = worst.max(t);
        notes.push(format!("{}-261 {:.1}s", kind.name(), t.as_secs_f64()));
    }
    verdict(
        worst <= C8_LIMIT && target.graph.num_nodes() == 324,
        format!("{} physical; {}", target.graph.num_nodes(), notes.join(", ")),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("protocol correctness", criterion_1),
        ("GHZ synthesis", criterion_2),
        ("end-to-end equivalence", criterion_3),
        ("BV depth", criterion_4),
        ("improvement trend", criterion_5),
        ("metric exactness", criterion_6),
        ("sensitivity", criterion_7),
        ("scale and runtime", criterion_8),
    ];
    let only: BTreeSet<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let v = run();
        failed += usize::from(!v.pass);
        println!("criterion {n} ({name}): {} | {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("{failed} criteria failed");
    if failed > 0 && std::env::var_os("MECH_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
