//! Precomputed post-collision interpolation stencils.
//!
//! For lattice nodes `ξ_i`, `ξ_j` the displacement `d = ((ξ_i-ξ_j)·ω)ω`
//! depends only on the lattice offset `i - j` and on `ω`, so one table indexed
//! by `(offset, ω)` serves every pair. `ξ'_* = ξ_j + d` and `ξ' = ξ_i - d` are
//! interpolated from nodes around them with separable per-axis weights.

use serde::{Deserialize, Serialize};

use crate::collision::quadrature::{dot, KernelParams, SphereQuadrature, VelocityGrid};

/// Per-axis interpolation rule applied to `f/μ^{1/2}` at off-grid velocities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Two nodes per axis (8-point stencil).
    Trilinear,
    /// Three nodes per axis centred on the nearest node (27-point stencil);
    /// reproduces quadratics, hence all collision invariants.
    #[default]
    Triquadratic,
}

/// One `(offset, ω)` entry.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    /// Lattice offset of the first corner of `ξ'_*` relative to `ξ_j`.
    pub star_base: [i32; 3],
    /// Lattice offset of the first corner of `ξ'` relative to `ξ_i`.
    pub prime_base: [i32; 3],
    /// Per-axis corner weights for `ξ'_*` (unused slots are zero).
    pub star_w: [[f64; 3]; 3],
    /// Per-axis corner weights for `ξ'`.
    pub prime_w: [[f64; 3]; 3],
    /// `w_{ξ_*} |ξ-ξ_*|^γ B₀ dω`, with the angular weights renormalised so
    /// that they integrate `B₀` exactly for this offset.
    pub weight: f64,
}

/// Stencils for every lattice offset in `[-(n-1), n-1]³`.
#[derive(Debug, Clone)]
pub struct StencilTable {
    n: usize,
    per_offset: usize,
    reach: i32,
    entries: Vec<Stencil>,
}

fn axis_weights(x: f64, interp: Interpolation) -> (i32, [f64; 3]) {
    match interp {
        Interpolation::Trilinear => {
            let m = x.floor();
            let t = x - m;
            (m as i32, [1.0 - t, t, 0.0])
        }
        Interpolation::Triquadratic => {
            let m = x.round();
            let t = x - m;
            (m as i32 - 1, [0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)])
        }
    }
}

impl StencilTable {
    pub fn build(vgrid: &VelocityGrid, sph: &SphereQuadrature, kp: &KernelParams, interp: Interpolation) -> Self {
        let n = vgrid.points_per_axis();
        let h = vgrid.spacing();
        let cell = vgrid.weight();
        let mass = kp.angular_mass();

        // antipodal pairs collapse onto one stencil since d(ω) = d(-ω)
        let nodes = sph.nodes();
        let q = sph.weights();
        let half = nodes.len() / 2;
        let antipodal = nodes.len() % 2 == 0
            && (0..half).all(|k| (0..3).all(|a| (nodes[k][a] + nodes[k + half][a]).abs() < 1e-14));
        let reps: Vec<usize> = if antipodal { (0..half).collect() } else { (0..nodes.len()).collect() };
        let per_offset = reps.len();

        let span = 2 * n - 1;
        let mut entries = Vec::with_capacity(span * span * span * per_offset);
        let mut reach = 0i32;
        let off = n as i32 - 1;
        for ux in -off..=off {
            for uy in -off..=off {
                for uz in -off..=off {
                    let u = [ux as f64 * h, uy as f64 * h, uz as f64 * h];
                    let un = dot(u, u).sqrt();
                    let raw: Vec<f64> = if un > 0.0 {
                        nodes.iter().zip(q).map(|(&w, &qw)| qw * kp.angular.eval(dot(u, w) / un)).collect()
                    } else {
                        q.to_vec()
                    };
                    let total: f64 = raw.iter().sum();
                    let scale = if total > 0.0 { mass / total } else { 0.0 };
                    let speed = if un > 0.0 { un.powf(kp.gamma) } else if kp.gamma == 0.0 { 1.0 } else { 0.0 };
                    for &k in &reps {
                        let w = nodes[k];
                        let mut a = raw[k];
                        if antipodal {
                            a += raw[k + half];
                        }
                        let s = dot(u, w);
                        let mut st = Stencil {
                            star_base: [0; 3],
                            prime_base: [0; 3],
                            star_w: [[0.0; 3]; 3],
                            prime_w: [[0.0; 3]; 3],
                            weight: cell * speed * a * scale,
                        };
                        for ax in 0..3 {
                            let dl = s * w[ax] / h;
                            let (bs, ws) = axis_weights(dl, interp);
                            let (bp, wp) = axis_weights(-dl, interp);
                            st.star_base[ax] = bs;
                            st.star_w[ax] = ws;
                            st.prime_base[ax] = bp;
                            st.prime_w[ax] = wp;
                            reach = reach.max(bs.abs() + 3).max(bp.abs() + 3);
                        }
                        entries.push(st);
                    }
                }
            }
        }
        Self { n, per_offset, reach, entries }
    }

    /// Stencils for the lattice offset `ci - cj`.
    #[inline]
    pub fn for_offset(&self, ci: [usize; 3], cj: [usize; 3]) -> &[Stencil] {
        let span = 2 * self.n - 1;
        let o = |a: usize| ci[a] + self.n - 1 - cj[a];
        let idx = (o(0) * span + o(1)) * span + o(2);
        &self.entries[idx * self.per_offset..(idx + 1) * self.per_offset]
    }

    pub fn per_offset(&self) -> usize {
        self.per_offset
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest lattice distance a corner can fall outside the grid.
    pub fn reach(&self) -> i32 {
        self.reach
    }

    pub fn entries(&self) -> &[Stencil] {
        &self.entries
    }
}

/// Zero-padded cubic lattice so that stencil gathers and scatters need no
/// bounds checks.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PaddedLattice {
    pub n: usize,
    pub pad: usize,
    pub side: usize,
}

impl PaddedLattice {
    pub fn new(n: usize, reach: i32) -> Self {
        let pad = reach.max(1) as usize;
        Self { n, pad, side: n + 2 * pad }
    }

    pub fn len(&self) -> usize {
        self.side * self.side * self.side
    }

    /// Padded index of `c + off` (with `c` an interior lattice point).
    #[inline]
    pub fn index(&self, c: [usize; 3], off: [i32; 3]) -> usize {
        let p = |a: usize| (c[a] as i64 + self.pad as i64 + off[a] as i64) as usize;
        (p(0) * self.side + p(1)) * self.side + p(2)
    }

    pub fn strides(&self) -> [usize; 3] {
        [self.side * self.side, self.side, 1]
    }

    /// Scatters interior values into a zeroed padded array.
    pub fn embed(&self, interior: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        let n = self.n;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    out[self.index([x, y, z], [0, 0, 0])] = interior[(x * n + y) * n + z];
                }
            }
        }
        out
    }

    /// Whether `c + off + {0,1,2}³` stays inside the interior lattice on every
    /// axis where the weight is nonzero.
    #[inline]
    pub fn inside(&self, c: [usize; 3], off: [i32; 3], w: &[[f64; 3]; 3]) -> bool {
        (0..3).all(|a| {
            (0..3).all(|e| {
                let p = c[a] as i64 + off[a] as i64 + e as i64;
                w[a][e] == 0.0 || (0..self.n as i64).contains(&p)
            })
        })
    }
}

/// Value of the separable interpolant `Σ w_x w_y w_z v[base + (a,b,c)]`.
#[inline]
pub(crate) fn gather(v: &[f64], base: usize, strides: [usize; 3], w: &[[f64; 3]; 3]) -> f64 {
    let mut acc = 0.0;
    for a in 0..3 {
        if w[0][a] == 0.0 {
            continue;
        }
        let mut sa = 0.0;
        for b in 0..3 {
            if w[1][b] == 0.0 {
                continue;
            }
            let o = base + a * strides[0] + b * strides[1];
            sa += w[1][b] * (w[2][0] * v[o] + w[2][1] * v[o + 1] + w[2][2] * v[o + 2]);
        }
        acc += w[0][a] * sa;
    }
    acc
}

/// Adds `s · w_x w_y w_z` into `v[base + (a,b,c)]`.
#[inline]
pub(crate) fn scatter(v: &mut [f64], base: usize, strides: [usize; 3], w: &[[f64; 3]; 3], s: f64) {
    for a in 0..3 {
        let sa = s * w[0][a];
        if sa == 0.0 {
            continue;
        }
        for b in 0..3 {
            let sb = sa * w[1][b];
            if sb == 0.0 {
                continue;
            }
            let o = base + a * strides[0] + b * strides[1];
            v[o] += sb * w[2][0];
            v[o + 1] += sb * w[2][1];
            v[o + 2] += sb * w[2][2];
        }
    }
}
