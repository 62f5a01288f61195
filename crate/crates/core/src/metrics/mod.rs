//! Error-weighted operation counts and benchmark generators.

mod bench;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use bench::{bv_secret, gen_bv, gen_qaoa, gen_qft, gen_vqe, qaoa_edges, Benchmark, BenchmarkKind};

use crate::circuit::{decompose_gate, weighted_depth, Circuit, Gate};
use crate::error::MetricsError;
use crate::highway::HighwayLayout;
use crate::topology::{CouplingGraph, EdgeKind};

/// Non-negative rational weight, written as a decimal (`7.4`) or a fraction
/// (`37/5`), so weighted sums are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Weight {
    num: u64,
    den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Weight {
    pub fn new(num: u64, den: u64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let g = gcd(num, den).max(1);
        Some(Weight { num: num / g, den: den / g })
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl FromStr for Weight {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let bad = || format!("`{s}` is not a non-negative decimal or fraction");
        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            return Weight::new(n, d).ok_or_else(bad);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 12 {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let f: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        int.checked_mul(den)
            .and_then(|x| x.checked_add(f))
            .and_then(|n| Weight::new(n, den))
            .ok_or_else(bad)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Float(f64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Int(i) => i.to_string(),
            // Shortest round-trip form, so 7.4 reads back as 37/5.
            Raw::Float(f) => format!("{f}"),
            Raw::Text(t) => t,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrorModel {
    /// Cross-chip CX error over on-chip CX error.
    pub ratio_cross: Weight,
    /// Measurement error over on-chip CX error.
    pub ratio_meas: Weight,
    /// Depth charged per measurement.
    pub meas_depth: f64,
}

impl Default for ErrorModel {
    fn default() -> Self {
        ErrorModel {
            ratio_cross: Weight::new(37, 5).unwrap(),
            ratio_meas: Weight::new(11, 5).unwrap(),
            meas_depth: 2.0,
        }
    }
}

impl ErrorModel {
    pub fn validate(&self) -> Result<(), String> {
        if self.ratio_cross.num == 0 {
            return Err("ratio_cross must be positive".into());
        }
        if self.ratio_meas.num == 0 {
            return Err("ratio_meas must be positive".into());
        }
        if !(self.meas_depth > 0.0 && self.meas_depth.is_finite()) {
            return Err("meas_depth must be positive".into());
        }
        Ok(())
    }
}

/// `n_on + ratio_cross·n_cross + ratio_meas·n_meas`, summed exactly and
/// rounded once.
pub fn eff_cnots(n_on: u64, n_cross: u64, n_meas: u64, model: &ErrorModel) -> f64 {
    let (rc, rm) = (model.ratio_cross, model.ratio_meas);
    let l = (rc.den / gcd(rc.den, rm.den)) as u128 * rm.den as u128;
    let total = n_on as u128 * l
        + n_cross as u128 * rc.num as u128 * (l / rc.den as u128)
        + n_meas as u128 * rm.num as u128 * (l / rm.den as u128);
    let g = gcd_u128(total, l).max(1);
    (total / g) as f64 / (l / g) as f64
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd_u128(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n_on: u64,
    pub n_cross: u64,
    pub n_meas: u64,
    pub depth: f64,
    pub eff_cnots: f64,
    pub highway_fraction: f64,
}

/// Classifies every CX (after lowering composite gates) by the edge it
/// uses, counts measurements and takes the weighted depth.
pub fn count_ops(
    c: &Circuit,
    graph: &CouplingGraph,
    layout: &HighwayLayout,
    model: &ErrorModel,
) -> Result<Metrics, MetricsError> {
    let (mut n_on, mut n_cross, mut n_meas) = (0u64, 0u64, 0u64);
    for (index, g) in c.gates().enumerate() {
        if let Gate::Measure { .. } = g {
            n_meas += 1;
            continue;
        }
        for sub in decompose_gate(g) {
            if let Gate::Cx(a, b) = sub {
                match graph.edge_kind(a.index(), b.index()) {
                    Some(EdgeKind::OnChip) => n_on += 1,
                    Some(EdgeKind::CrossChip) => n_cross += 1,
                    None => {
                        return Err(MetricsError::NonAdjacent {
                            index,
                            a: a.index(),
                            b: b.index(),
                        })
                    }
                }
            }
        }
    }
    Ok(Metrics {
        n_on,
        n_cross,
        n_meas,
        depth: weighted_depth(c, model.meas_depth),
        eff_cnots: eff_cnots(n_on, n_cross, n_meas, model),
        highway_fraction: layout.highway_fraction(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Basis, Qubit};
    use crate::topology::{build_chiplet_array, ChipletSpec};

    #[test]
    fn default_weights() {
        let m = ErrorModel::default();
        assert_eq!(eff_cnots(100, 10, 20, &m), 218.0);
        assert_eq!(eff_cnots(0, 0, 0, &m), 0.0);
        assert_eq!(eff_cnots(0, 1, 0, &m), 7.4);
    }

    #[test]
    fn unit_weights_count_everything() {
        let m = ErrorModel {
            ratio_cross: "1".parse().unwrap(),
            ratio_meas: "1".parse().unwrap(),
            ..ErrorModel::default()
        };
        assert_eq!(eff_cnots(3, 4, 5, &m), 12.0);
    }

    #[test]
    fn weight_parsing() {
        assert_eq!("7.4".parse::<Weight>().unwrap(), Weight::new(37, 5).unwrap());
        assert_eq!("37/5".parse::<Weight>().unwrap(), Weight::new(37, 5).unwrap());
        assert_eq!(".5".parse::<Weight>().unwrap(), Weight::new(1, 2).unwrap());
        for bad in ["", "-1", "1/0", "a", "1.2.3"] {
            assert!(bad.parse::<Weight>().is_err(), "{bad}");
        }
        let w: Weight = serde_json::from_str("2.2").unwrap();
        assert_eq!(w, Weight::new(11, 5).unwrap());
    }

    #[test]
    fn cross_chip_cx_is_weighted() {
        let g = build_chiplet_array(&ChipletSpec::square(2, 1, 2)).unwrap();
        let (a, b) = g
            .edges()
            .iter()
            .find(|e| e.kind == EdgeKind::CrossChip)
            .map(|e| (e.a, e.b))
            .unwrap();
        let mut c = Circuit::new(g.num_nodes());
        c.push(Gate::Cx(Qubit(a as u32), Qubit(b as u32)));
        let m = count_ops(&c, &g, &HighwayLayout::empty(&g), &ErrorModel::default()).unwrap();
        assert_eq!((m.n_on, m.n_cross, m.n_meas), (0, 1, 0));
        assert_eq!(m.eff_cnots, 7.4);
        assert_eq!(m.highway_fraction, 0.0);
    }

    #[test]
    fn composites_and_measurements() {
        let g = build_chiplet_array(&ChipletSpec::square(3, 1, 1)).unwrap();
        let mut c = Circuit::new(9);
        let b = c.alloc_bit();
        c.extend([
            Gate::Swap(Qubit(0), Qubit(1)),
            Gate::Bridge(Qubit(0), Qubit(1), Qubit(2)),
            Gate::Cz(Qubit(3), Qubit(4)),
            Gate::Measure { qubit: Qubit(5), basis: Basis::X, bit: b },
        ]);
        let m = count_ops(&c, &g, &HighwayLayout::empty(&g), &ErrorModel::default()).unwrap();
        assert_eq!((m.n_on, m.n_cross, m.n_meas), (8, 0, 1));
        assert_eq!(m.eff_cnots, 8.0 + 2.2);
    }

    #[test]
    fn non_adjacent_gate_is_rejected() {
        let g = build_chiplet_array(&ChipletSpec::square(3, 1, 1)).unwrap();
        let mut c = Circuit::new(9);
        c.push(Gate::Cx(Qubit(0), Qubit(8)));
        assert_eq!(
            count_ops(&c, &g, &HighwayLayout::empty(&g), &ErrorModel::default()).unwrap_err(),
            MetricsError::NonAdjacent { index: 0, a: 0, b: 8 }
        );
    }
}
