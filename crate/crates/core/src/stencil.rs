//! Node lattice, the flux-form operator `K = −div_h(γ∇_h)` with homogeneous
//! Dirichlet ghosts, and a Jacobi-preconditioned CG for `(s + K)v = b`.
//!
//! Arrays are stored x-fastest; every parallel loop runs over z-planes and
//! every reduction sums fixed-size partials in index order, so results do not
//! depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{lattice_coord, Point3};
use crate::medium::Medium;

const REDUCE_CHUNK: usize = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("CG did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Box of nodes `(k + ½)h` for `k ∈ start + [0, shape)` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub start: [i64; 3],
    pub shape: [usize; 3],
    pub h: f64,
}

impl Lattice {
    pub fn new(start: [i64; 3], shape: [usize; 3], h: f64) -> Self {
        assert!(h > 0.0 && shape.iter().all(|&n| n > 0));
        Self { start, shape, h }
    }

    /// Smallest lattice covering the closed box `[lo, hi]`.
    pub fn covering(lo: Point3, hi: Point3, h: f64) -> Self {
        let mut start = [0i64; 3];
        let mut shape = [0usize; 3];
        for a in 0..3 {
            let k0 = crate::geometry::lattice_floor(lo[a], h);
            let k1 = crate::geometry::lattice_ceil(hi[a], h);
            start[a] = k0;
            shape[a] = (k1 - k0 + 1) as usize;
        }
        Self::new(start, shape, h)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn plane(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.shape[1] + j) * self.shape[0] + i
    }

    pub fn coord(&self, i: usize, j: usize, k: usize) -> Point3 {
        let h = self.h();
        Point3::new(
            lattice_coord(self.start[0] + i as i64, h),
            lattice_coord(self.start[1] + j as i64, h),
            lattice_coord(self.start[2] + k as i64, h),
        )
    }

    /// First and last node coordinates.
    pub fn bounds(&self) -> (Point3, Point3) {
        let [nx, ny, nz] = self.shape;
        (self.coord(0, 0, 0), self.coord(nx - 1, ny - 1, nz - 1))
    }

    /// Index of the node at `x`, if `x` is a node of this lattice.
    pub fn node_at(&self, x: Point3) -> Option<usize> {
        let mut ijk = [0usize; 3];
        for a in 0..3 {
            let t = x[a] / self.h() - 0.5 - self.start[a] as f64;
            let r = t.round();
            if (t - r).abs() > 1e-9 || r < 0.0 || r as usize >= self.shape[a] {
                return None;
            }
            ijk[a] = r as usize;
        }
        Some(self.index(ijk[0], ijk[1], ijk[2]))
    }

    /// Trilinear stencil at `x`: eight `(index, weight)` pairs. Coordinates
    /// within 1e-9 cells of a node plane snap onto it. `None` outside the hull
    /// of the nodes.
    pub fn trilinear(&self, x: Point3) -> Option<[(usize, f64); 8]> {
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let mut t = x[a] / self.h() - 0.5 - self.start[a] as f64;
            let r = t.round();
            if (t - r).abs() < 1e-9 {
                t = r;
            }
            if t < 0.0 || t > (self.shape[a] - 1) as f64 {
                return None;
            }
            let mut i0 = t.floor() as usize;
            if i0 == self.shape[a] - 1 && i0 > 0 {
                i0 -= 1;
            }
            base[a] = i0;
            frac[a] = t - i0 as f64;
        }
        let mut out = [(0usize, 0.0f64); 8];
        for (c, slot) in out.iter_mut().enumerate() {
            let d = [c & 1, (c >> 1) & 1, (c >> 2) & 1];
            let mut w = 1.0;
            let mut ijk = [0usize; 3];
            for a in 0..3 {
                let n = (base[a] + d[a]).min(self.shape[a] - 1);
                ijk[a] = n;
                w *= if d[a] == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            *slot = (self.index(ijk[0], ijk[1], ijk[2]), w);
        }
        Some(out)
    }

    /// Nodal samples of `g`, computed plane by plane.
    pub fn sample(&self, g: impl Fn(Point3) -> f64 + Sync) -> Vec<f64> {
        let [nx, ny, _] = self.shape;
        let mut out = vec![0.0; self.len()];
        out.par_chunks_mut(self.plane()).enumerate().for_each(|(k, plane)| {
            for j in 0..ny {
                for i in 0..nx {
                    plane[j * nx + i] = g(self.coord(i, j, k));
                }
            }
        });
        out
    }
}

/// `Σ aᵢbᵢ`, reduced in a fixed order.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let partials: Vec<f64> = a
        .par_chunks(REDUCE_CHUNK)
        .zip(b.par_chunks(REDUCE_CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partials.iter().sum()
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a == b {
        return a;
    }
    2.0 * a * b / (a + b)
}

/// The assembled operator. Nodes carry a material index into a small table
/// of face conductances (already divided by `h²`); the extra index `ghost`
/// stands for the Dirichlet exterior, whose faces take the node's own `γ`.
#[derive(Debug, Clone)]
pub struct Operator {
    pub lattice: Lattice,
    material: Vec<u8>,
    /// `face[(a·m + b)·3 + axis]` for materials `a`, `b` (`m` includes ghost).
    face: Vec<f64>,
    n_materials: usize,
    /// Per `(j, k)` row: the material if the row and its four neighbouring
    /// rows are all that material (ghost rows count as matching), else 255.
    uniform_row: Vec<u8>,
    ghost_row: Vec<u8>,
    zeros: Vec<f64>,
}

impl Operator {
    pub fn assemble(lattice: Lattice, medium: &Medium) -> Self {
        let [nx, ny, _] = lattice.shape;
        let h2 = lattice.h() * lattice.h();
        let mut table: Vec<[f64; 3]> = Vec::new();
        let mut material = vec![0u8; lattice.len()];
        for (k, plane) in material.chunks_mut(lattice.plane()).enumerate() {
            for j in 0..ny {
                for i in 0..nx {
                    let g = medium.gamma_at(lattice.coord(i, j, k)).0;
                    let m = match table.iter().position(|t| *t == g) {
                        Some(m) => m,
                        None => {
                            table.push(g);
                            table.len() - 1
                        }
                    };
                    plane[j * nx + i] = m as u8;
                }
            }
        }
        assert!(table.len() < 255, "at most 254 distinct coefficients");
        let ghost = table.len();
        let m = ghost + 1;
        let mut face = vec![0.0; m * m * 3];
        for a in 0..m {
            for b in 0..m {
                for ax in 0..3 {
                    face[(a * m + b) * 3 + ax] = match (a == ghost, b == ghost) {
                        (false, false) => harmonic(table[a][ax], table[b][ax]) / h2,
                        (false, true) => table[a][ax] / h2,
                        (true, false) => table[b][ax] / h2,
                        (true, true) => 0.0,
                    };
                }
            }
        }
        let nz = lattice.shape[2];
        let row_material = |j: usize, k: usize| {
            let r = &material[(k * ny + j) * nx..(k * ny + j + 1) * nx];
            r.iter().all(|&q| q == r[0]).then_some(r[0])
        };
        let own: Vec<Option<u8>> = (0..nz).flat_map(|k| (0..ny).map(move |j| (j, k))).map(|(j, k)| row_material(j, k)).collect();
        let mut uniform_row = vec![255u8; ny * nz];
        for k in 0..nz {
            for j in 0..ny {
                let Some(c) = own[k * ny + j] else { continue };
                let same = |jj: Option<usize>, kk: Option<usize>| match (jj, kk) {
                    (Some(jj), Some(kk)) if jj < ny && kk < nz => own[kk * ny + jj] == Some(c),
                    _ => true,
                };
                if same(j.checked_sub(1), Some(k)) && same(Some(j + 1), Some(k)) && same(Some(j), k.checked_sub(1)) && same(Some(j), Some(k + 1)) {
                    uniform_row[k * ny + j] = c;
                }
            }
        }
        Self { lattice, material, face, n_materials: m, uniform_row, ghost_row: vec![ghost as u8; nx], zeros: vec![0.0; nx] }
    }

    /// Diagonal of `K`.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.lattice.len()];
        let ones = vec![1.0; self.lattice.len()];
        let plane = self.lattice.plane();
        d.par_chunks_mut(plane).enumerate().for_each(|(k, o)| {
            self.plane_terms(&ones, k, |q, diag, _| o[q] = diag);
        });
        d
    }

    /// `(Ku)` at every node of plane `k`, handed to `emit(plane_offset, value)`.
    #[inline]
    fn plane_apply(&self, u: &[f64], k: usize, mut emit: impl FnMut(usize, f64)) {
        self.plane_terms(u, k, |q, diag, off| emit(q, diag - off));
    }

    /// Per node of plane `k`: `(Σ_faces c)·u_p` and `Σ_faces c·u_neighbour`.
    #[inline]
    fn plane_terms(&self, u: &[f64], k: usize, mut emit: impl FnMut(usize, f64, f64)) {
        let [nx, ny, nz] = self.lattice.shape;
        let plane = nx * ny;
        let base = k * plane;
        let m = self.n_materials;
        let face = &self.face;
        let zero = &self.zeros[..nx];
        let ghost = &self.ghost_row[..nx];
        let mat = &self.material;
        let g = *ghost.first().unwrap_or(&0) as usize;
        for j in 0..ny {
            let row = base + j * nx;
            let uc = &u[row..row + nx];
            let uniform = self.uniform_row[k * ny + j];
            if uniform != 255 {
                let us = if j > 0 { &u[row - nx..row] } else { zero };
                let un = if j + 1 < ny { &u[row + nx..row + 2 * nx] } else { zero };
                let ub = if k > 0 { &u[row - plane..row - plane + nx] } else { zero };
                let ut = if k + 1 < nz { &u[row + plane..row + plane + nx] } else { zero };
                let cc = (uniform as usize * m + uniform as usize) * 3;
                let (cx, cy, cz) = (face[cc], face[cc + 1], face[cc + 2]);
                // Same operations in the same order as the general branch, so a
                // row's values do not depend on which branch computed them.
                let d = cx + cx + cy + cy + cz + cz;
                let off = |i: usize, uw: f64, ue: f64| {
                    cx * uw + cx * ue + cy * us[i] + cy * un[i] + cz * ub[i] + cz * ut[i]
                };
                if nx == 1 {
                    emit(j * nx, d * uc[0], off(0, 0.0, 0.0));
                    continue;
                }
                emit(j * nx, d * uc[0], off(0, 0.0, uc[1]));
                for i in 1..nx - 1 {
                    emit(j * nx + i, d * uc[i], off(i, uc[i - 1], uc[i + 1]));
                }
                emit(j * nx + nx - 1, d * uc[nx - 1], off(nx - 1, uc[nx - 2], 0.0));
                continue;
            }
            let mc = &mat[row..row + nx];
            let (us, ms) = if j > 0 { (&u[row - nx..row], &mat[row - nx..row]) } else { (zero, ghost) };
            let (un, mn) = if j + 1 < ny { (&u[row + nx..row + 2 * nx], &mat[row + nx..row + 2 * nx]) } else { (zero, ghost) };
            let (ub, mb) = if k > 0 { (&u[row - plane..row - plane + nx], &mat[row - plane..row - plane + nx]) } else { (zero, ghost) };
            let (ut, mt) = if k + 1 < nz { (&u[row + plane..row + plane + nx], &mat[row + plane..row + plane + nx]) } else { (zero, ghost) };
            for i in 0..nx {
                let c = mc[i] as usize * m;
                let (mw, uw) = if i > 0 { (mc[i - 1] as usize, uc[i - 1]) } else { (g, 0.0) };
                let (me, ue) = if i + 1 < nx { (mc[i + 1] as usize, uc[i + 1]) } else { (g, 0.0) };
                let fw = face[(c + mw) * 3];
                let fe = face[(c + me) * 3];
                let fs = face[(c + ms[i] as usize) * 3 + 1];
                let fnn = face[(c + mn[i] as usize) * 3 + 1];
                let fb = face[(c + mb[i] as usize) * 3 + 2];
                let ft = face[(c + mt[i] as usize) * 3 + 2];
                let diag = (fw + fe + fs + fnn + fb + ft) * uc[i];
                let off = fw * uw + fe * ue + fs * us[i] + fnn * un[i] + fb * ub[i] + ft * ut[i];
                emit(j * nx + i, diag, off);
            }
        }
    }

    /// `out = (shift + K) u`.
    pub fn apply_shifted(&self, shift: f64, u: &[f64], out: &mut [f64]) {
        let plane = self.lattice.plane();
        out.par_chunks_mut(plane).enumerate().for_each(|(k, o)| {
            let base = k * plane;
            self.plane_apply(u, k, |q, s| o[q] = s + shift * u[base + q]);
        });
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        self.apply_shifted(0.0, u, out);
    }

    /// One leapfrog step `prev ← 2u − prev − dt²Ku` (so `prev` becomes
    /// `u^{n+1}`). Returns `(Σ (u^{n+1} − uⁿ)², Σ u^{n+1}·Kuⁿ)` for the
    /// discrete energy.
    pub fn leapfrog(&self, u: &[f64], prev: &mut [f64], dt2: f64) -> (f64, f64) {
        let plane = self.lattice.plane();
        let partials: Vec<(f64, f64)> = prev
            .par_chunks_mut(plane)
            .enumerate()
            .map(|(k, pv)| {
                let base = k * plane;
                let (mut kin, mut pot) = (0.0, 0.0);
                self.plane_apply(u, k, |q, ku| {
                    let cur = u[base + q];
                    let next = 2.0 * cur - pv[q] - dt2 * ku;
                    pv[q] = next;
                    let d = next - cur;
                    kin += d * d;
                    pot += next * ku;
                });
                (kin, pot)
            })
            .collect();
        partials.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d))
    }

    /// Solve `(shift + K)x = b` by Jacobi-preconditioned CG from `x = 0`.
    pub fn solve_shifted(
        &self,
        shift: f64,
        b: &[f64],
        tolerance: f64,
        max_iterations: usize,
    ) -> Result<(Vec<f64>, CgReport), SolveError> {
        let n = b.len();
        let inv_diag: Vec<f64> = self.diagonal().into_iter().map(|d| 1.0 / (d + shift)).collect();
        let b_norm = dot(b, b).sqrt();
        let mut x = vec![0.0; n];
        if b_norm == 0.0 {
            return Ok((x, CgReport { iterations: 0, relative_residual: 0.0 }));
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.par_iter().zip(&inv_diag).map(|(r, m)| r * m).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        for it in 1..=max_iterations {
            self.apply_shifted(shift, &p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            // x += αp, r −= αAp, z = M⁻¹r, with ‖r‖² and r·z per chunk.
            let partials: Vec<(f64, f64)> = x
                .par_chunks_mut(REDUCE_CHUNK)
                .zip(r.par_chunks_mut(REDUCE_CHUNK))
                .zip(z.par_chunks_mut(REDUCE_CHUNK))
                .enumerate()
                .map(|(c, ((xc, rc), zc))| {
                    let o = c * REDUCE_CHUNK;
                    let (mut rr, mut rzc) = (0.0, 0.0);
                    for q in 0..xc.len() {
                        xc[q] += alpha * p[o + q];
                        let rn = rc[q] - alpha * ap[o + q];
                        rc[q] = rn;
                        let zn = rn * inv_diag[o + q];
                        zc[q] = zn;
                        rr += rn * rn;
                        rzc += rn * zn;
                    }
                    (rr, rzc)
                })
                .collect();
            let (rr, rz_new) = partials.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
            let res = rr.sqrt() / b_norm;
            if res <= tolerance {
                return Ok((x, CgReport { iterations: it, relative_residual: res }));
            }
            let beta = rz_new / rz;
            rz = rz_new;
            p.par_iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
        }
        let res = dot(&r, &r).sqrt() / b_norm;
        Err(SolveError::NoConvergence { iterations: max_iterations, residual: res })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}
