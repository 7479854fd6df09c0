use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{BulkModel, ModelBuilder, SpinBlock, ZERO_BLOCK};
use crate::c64;
use crate::error::{bail, Result};
use crate::geometry::LatticeSpec;

fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

fn diag(up: c64, down: c64) -> SpinBlock {
    let mut b = ZERO_BLOCK;
    b[0][0] = up;
    b[1][1] = down;
    b
}

fn scalar(x: f64) -> SpinBlock {
    diag(re(x), re(x))
}

/// Honeycomb lattice as a sheared rectangular lattice: `A` at the cell origin, `B` at `(1/3, 1/3)`.
pub fn honeycomb_lattice() -> LatticeSpec {
    LatticeSpec { a1: 1, a2: 1, basis: vec![[0.0, 0.0], [1.0 / 3.0, 1.0 / 3.0]] }
}

/// Square lattice with two orbitals per cell at `(0, 0)` and `(1/2, 1/2)`.
pub fn two_orbital_lattice() -> LatticeSpec {
    LatticeSpec { a1: 1, a2: 1, basis: vec![[0.0, 0.0], [0.5, 0.5]] }
}

/// Position in the undistorted honeycomb, primitive vectors `(1, 0)` and `(1/2, √3/2)`.
fn honeycomb_embedding(cell: [i64; 2], basis: usize) -> [f64; 2] {
    let f = if basis == 0 { 0.0 } else { 1.0 / 3.0 };
    let u = cell[0] as f64 + f;
    let v = cell[1] as f64 + f;
    [u + 0.5 * v, 0.5 * 3f64.sqrt() * v]
}

const NN: [[i64; 2]; 3] = [[0, 0], [-1, 0], [0, -1]];
const NNN: [[i64; 2]; 3] = [[1, 0], [0, 1], [-1, 1]];

/// Nearest neighbours of `(0, basis)` as `(cell, basis)`.
fn nearest(basis: usize) -> Vec<([i64; 2], usize)> {
    NN.iter().map(|d| if basis == 0 { (*d, 1) } else { ([-d[0], -d[1]], 0) }).collect()
}

/// Orientation `±1` of the two-bond path from `(0, basis)` to `(disp, basis)`.
fn chirality(basis: usize, disp: [i64; 2]) -> f64 {
    let src = honeycomb_embedding([0, 0], basis);
    let dst = honeycomb_embedding(disp, basis);
    for (c, b) in nearest(basis) {
        let back = nearest(b);
        let reaches = back.iter().any(|(c2, b2)| *b2 == basis && [c[0] + c2[0], c[1] + c2[1]] == disp);
        if reaches {
            let mid = honeycomb_embedding(c, b);
            let (u, v) = ([mid[0] - src[0], mid[1] - src[1]], [dst[0] - mid[0], dst[1] - mid[1]]);
            return (u[0] * v[1] - u[1] * v[0]).signum();
        }
    }
    unreachable!("second-neighbour displacement without a common neighbour")
}

/// Two time-reversed copies of the Haldane model; spin down carries the conjugate flux.
pub fn spinful_haldane(t: f64, t2: f64, phi: f64, mass: f64) -> Result<BulkModel> {
    let mut b = ModelBuilder::new("spinful-haldane", honeycomb_lattice())
        .param("t", t)
        .param("t2", t2)
        .param("phi", phi)
        .param("mass", mass)
        .onsite(0, scalar(mass))
        .onsite(1, scalar(-mass));
    for d in NN {
        b = b.hop(d, 0, 1, scalar(t));
    }
    for basis in 0..2 {
        for d in NNN {
            let phase = c64::from_polar(t2, chirality(basis, d) * phi);
            b = b.hop(d, basis, basis, diag(phase, phase.conj()));
        }
    }
    b.build()
}

/// Kane–Mele model: intrinsic spin-orbit `λ_so`, Rashba `λ_R` and staggered potential `λ_v`.
pub fn kane_mele(t: f64, lambda_so: f64, lambda_r: f64, lambda_v: f64) -> Result<BulkModel> {
    let mut b = ModelBuilder::new("kane-mele", honeycomb_lattice())
        .param("t", t)
        .param("lambda_so", lambda_so)
        .param("lambda_r", lambda_r)
        .param("lambda_v", lambda_v)
        .onsite(0, scalar(lambda_v))
        .onsite(1, scalar(-lambda_v));
    let a = honeycomb_embedding([0, 0], 0);
    for d in NN {
        let p = honeycomb_embedding(d, 1);
        let len = ((p[0] - a[0]).powi(2) + (p[1] - a[1]).powi(2)).sqrt();
        let (dx, dy) = ((p[0] - a[0]) / len, (p[1] - a[1]) / len);
        // i λ_R (σ_x d_y - σ_y d_x)
        let mut block = scalar(t);
        block[0][1] += c64::new(0.0, lambda_r * dy) - c64::new(lambda_r * dx, 0.0);
        block[1][0] += c64::new(0.0, lambda_r * dy) + c64::new(lambda_r * dx, 0.0);
        b = b.hop(d, 0, 1, block);
    }
    for basis in 0..2 {
        for d in NNN {
            let v = c64::new(0.0, lambda_so * chirality(basis, d));
            b = b.hop(d, basis, basis, diag(v, -v));
        }
    }
    b.build()
}

/// Bernevig–Hughes–Zhang model with orbitals `s` (basis 0) and `p` (basis 1).
///
/// Spin up is `d(k)·τ` with `d = (A sin k1, A sin k2, M + 2B(2 - cos k1 - cos k2))`,
/// spin down its time-reversed partner, and `breaking` couples `s` and `p` of
/// opposite spin within a cell.
pub fn bhz(a: f64, b: f64, m: f64, breaking: f64) -> Result<BulkModel> {
    let mut builder = ModelBuilder::new("bhz", two_orbital_lattice())
        .param("a", a)
        .param("b", b)
        .param("m", m)
        .param("breaking", breaking)
        .onsite(0, scalar(m + 4.0 * b))
        .onsite(1, scalar(-(m + 4.0 * b)));
    let spin = |v: c64| diag(v, v.conj());
    for (d, p_to_s, s_to_p) in [
        ([1, 0], c64::new(0.0, -0.5 * a), c64::new(0.0, -0.5 * a)),
        ([0, 1], c64::new(-0.5 * a, 0.0), c64::new(0.5 * a, 0.0)),
    ] {
        builder = builder.hop(d, 0, 0, scalar(-b)).hop(d, 1, 1, scalar(b)).hop(d, 1, 0, spin(p_to_s)).hop(
            d,
            0,
            1,
            spin(s_to_p),
        );
    }
    if breaking != 0.0 {
        let mut block = ZERO_BLOCK;
        block[0][1] = re(-breaking);
        block[1][0] = re(breaking);
        builder = builder.hop([0, 0], 1, 0, block);
    }
    builder.build()
}

/// Decoupled sites with energies `-gap/2` (even basis index) and `+gap/2` (odd).
pub fn atomic_insulator(lattice: LatticeSpec, gap: f64) -> Result<BulkModel> {
    if lattice.basis.len() % 2 != 0 {
        bail!(Model, "atomic insulator needs an even number of basis sites");
    }
    let mut b = ModelBuilder::new("atomic", lattice).param("gap", gap);
    for i in 0..b.lattice.basis.len() {
        let e = if i % 2 == 0 { -0.5 * gap } else { 0.5 * gap };
        b = b.onsite(i, scalar(e));
    }
    b.build()
}

/// Named model with parameters, as written in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Lattice of the atomic insulator: `two-orbital` (default) or `honeycomb`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<String>,
}

impl ModelSpec {
    pub fn new(name: &str, params: &[(&str, f64)]) -> Self {
        Self {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            lattice: None,
        }
    }

    fn take(&self, allowed: &[(&str, f64)]) -> Result<Vec<f64>> {
        for k in self.params.keys() {
            if !allowed.iter().any(|(a, _)| a == k) {
                let names: Vec<&str> = allowed.iter().map(|a| a.0).collect();
                bail!(Config, "unknown parameter '{k}' for model '{}' (expected one of {names:?})", self.name);
            }
        }
        Ok(allowed.iter().map(|(k, d)| self.params.get(*k).copied().unwrap_or(*d)).collect())
    }

    pub fn build(&self) -> Result<BulkModel> {
        if self.lattice.is_some() && self.name != "atomic" {
            bail!(Config, "only the atomic model takes a lattice choice");
        }
        match self.name.as_str() {
            "spinful-haldane" => {
                let p = self.take(&[("t", 1.0), ("t2", 0.2), ("phi", FRAC_PI_2), ("mass", 0.0)])?;
                spinful_haldane(p[0], p[1], p[2], p[3])
            }
            "kane-mele" => {
                let p = self.take(&[("t", 1.0), ("lambda_so", 0.2), ("lambda_r", 0.0), ("lambda_v", 0.1)])?;
                kane_mele(p[0], p[1], p[2], p[3])
            }
            "bhz" => {
                let p = self.take(&[("a", 1.0), ("b", 1.0), ("m", -1.0), ("breaking", 0.0)])?;
                bhz(p[0], p[1], p[2], p[3])
            }
            "atomic" => {
                let p = self.take(&[("gap", 2.0)])?;
                let lattice = match self.lattice.as_deref().unwrap_or("two-orbital") {
                    "two-orbital" => two_orbital_lattice(),
                    "honeycomb" => honeycomb_lattice(),
                    other => bail!(Config, "unknown atomic lattice '{other}' (two-orbital, honeycomb)"),
                };
                atomic_insulator(lattice, p[0])
            }
            other => bail!(Config, "unknown model '{other}' (spinful-haldane, kane-mele, bhz, atomic)"),
        }
    }
}
