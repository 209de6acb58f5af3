//! Sparse symmetric matrices, the cotangent Laplacian with lumped mass, and
//! a shift-invert subspace eigensolver for `K u = μ M u` with diagonal `M`.
//!
//! Linear solves use Jacobi-preconditioned conjugate gradients, one column
//! at a time; columns are solved in parallel but each solve is sequential,
//! so results do not depend on the thread count.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::TriMesh;

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n × n` matrix from triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().expect("nonempty") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[r] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).find(|&k| self.cols[k] == r).map_or(0.0, |k| self.vals[k]))
            .collect()
    }

    /// `self + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        let mut t = Vec::with_capacity(self.nnz() + self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                t.push((r, self.cols[k], self.vals[k]));
            }
            t.push((r, r, d[r]));
        }
        Self::from_triplets(self.n, t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }
}

/// Cotangent stiffness matrix and barycentric lumped mass of a mesh. Works
/// in any ambient dimension since only edge vectors of each face are used.
pub fn cotan_laplacian(mesh: &TriMesh) -> (CsrMatrix, Vec<f64>) {
    let mut t = Vec::with_capacity(mesh.faces.len() * 12);
    for f in &mesh.faces {
        for k in 0..3 {
            let (i, j, l) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            let a = mesh.vertices[j] - mesh.vertices[i];
            let b = mesh.vertices[l] - mesh.vertices[i];
            let dot = a.dot(&b);
            let cross = (a.norm_squared() * b.norm_squared() - dot * dot).max(0.0).sqrt();
            let w = 0.5 * dot / cross;
            t.push((j, l, -w));
            t.push((l, j, -w));
            t.push((j, j, w));
            t.push((l, l, w));
        }
    }
    (CsrMatrix::from_triplets(mesh.n_vertices(), t), mesh.vertex_areas())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive definite `A` by
/// Jacobi-preconditioned CG, starting from `x`.
pub fn pcg(a: &CsrMatrix, diag: &[f64], b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> Result<usize> {
    let n = a.n;
    let mut r = vec![0.0; n];
    a.mul_vec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= rtol * bnorm {
            return Ok(it);
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Numeric("conjugate gradients met a non-positive curvature direction".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if dot(&r, &r).sqrt() <= rtol * bnorm {
        return Ok(max_iter);
    }
    Err(Error::Numeric(format!("conjugate gradients did not converge in {max_iter} iterations")))
}

/// Eigenpairs of `K u = μ M u`, ascending, with `M`-orthonormal vectors.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Extra subspace columns beyond the requested count.
    pub guard: usize,
    pub max_iter: usize,
    /// Relative tolerance on the Ritz residuals.
    pub tol: f64,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { guard: 8, max_iter: 300, tol: 1e-9, seed: 0x5eed }
    }
}

/// Dense reference solver, intended for small problems and tests.
pub fn dense_generalized_eigen(k: &CsrMatrix, mass: &[f64]) -> EigenPairs {
    let n = k.n;
    let s: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut a = k.to_dense();
    for r in 0..n {
        for c in 0..n {
            a[(r, c)] *= s[r] * s[c];
        }
    }
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    EigenPairs {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: order.iter().map(|&i| (0..n).map(|r| eig.eigenvectors[(r, i)] * s[r]).collect()).collect(),
    }
}

/// Smallest `count` eigenpairs of `K u = μ M u` by shift-invert subspace
/// iteration. `shift` must lie strictly below the spectrum so that
/// `K - shift·M` is positive definite.
pub fn smallest_eigenpairs(
    k: &CsrMatrix,
    mass: &[f64],
    count: usize,
    shift: f64,
    opts: &EigenOptions,
) -> Result<EigenPairs> {
    let n = k.n;
    if count == 0 || count > n {
        return Err(Error::Parameter(format!("cannot compute {count} eigenpairs of a {n}-dimensional problem")));
    }
    let b = (count + opts.guard).min(n);
    let shifted = k.add_diagonal(&mass.iter().map(|m| -shift * m).collect::<Vec<_>>());
    let diag = shifted.diagonal();
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Numeric("shifted operator has a non-positive diagonal".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..b).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut y: Vec<Vec<f64>> = vec![vec![0.0; n]; b];
    let mut prev: Option<Vec<f64>> = None;
    let mut kx = vec![0.0; n];
    for _ in 0..opts.max_iter {
        // Y = (K - σM)⁻¹ M X, warm-started from the previous block.
        y.par_iter_mut()
            .zip(x.par_iter())
            .map(|(yc, xc)| {
                let rhs: Vec<f64> = xc.iter().zip(mass).map(|(a, m)| a * m).collect();
                pcg(&shifted, &diag, &rhs, yc, 1e-12, 20 * n + 100).map(|_| ())
            })
            .collect::<Result<Vec<_>>>()?;
        let (vals, vecs) = rayleigh_ritz(k, mass, &y)?;
        // Residual check on the requested pairs.
        let mut worst: f64 = 0.0;
        for (j, v) in vecs.iter().take(count).enumerate() {
            k.mul_vec(v, &mut kx);
            let r: f64 =
                kx.iter().zip(v).zip(mass).map(|((kv, vi), m)| (kv - vals[j] * m * vi).powi(2) / m).sum::<f64>().sqrt();
            worst = worst.max(r / (vals[j] - shift).abs().max(1.0));
        }
        let stalled = prev
            .as_ref()
            .is_some_and(|p| p.iter().zip(&vals).take(count).all(|(a, b)| (a - b).abs() <= 1e-14 * (b - shift).abs()));
        prev = Some(vals.clone());
        x = vecs.clone();
        y = vecs;
        if worst < opts.tol || stalled {
            return Ok(EigenPairs { values: vals[..count].to_vec(), vectors: x[..count].to_vec() });
        }
    }
    Err(Error::Numeric(format!("eigensolver did not converge in {} iterations", opts.max_iter)))
}

/// Rayleigh–Ritz on the span of `basis` for `(K, M)`; returns ascending Ritz
/// values and `M`-orthonormal Ritz vectors.
fn rayleigh_ritz(k: &CsrMatrix, mass: &[f64], basis: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let b = basis.len();
    let n = k.n;
    // M-orthonormalise (modified Gram–Schmidt, twice) to keep the small
    // problem well conditioned.
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(b);
    for v in basis {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &q {
                let c: f64 = w.iter().zip(u).zip(mass).map(|((a, b), m)| a * b * m).sum();
                for i in 0..n {
                    w[i] -= c * u[i];
                }
            }
        }
        let nrm: f64 = w.iter().zip(mass).map(|(a, m)| a * a * m).sum::<f64>().sqrt();
        if !(nrm > 1e-300) {
            return Err(Error::Numeric("subspace collapsed during eigen iteration".into()));
        }
        w.iter_mut().for_each(|a| *a /= nrm);
        q.push(w);
    }
    let kq: Vec<Vec<f64>> = q
        .iter()
        .map(|v| {
            let mut out = vec![0.0; n];
            k.mul_vec(v, &mut out);
            out
        })
        .collect();
    let mut h = DMatrix::<f64>::zeros(b, b);
    for i in 0..b {
        for j in 0..=i {
            let v = dot(&q[i], &kq[j]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&c| {
            let mut out = vec![0.0; n];
            for (j, qj) in q.iter().enumerate() {
                let s = eig.eigenvectors[(j, c)];
                for i in 0..n {
                    out[i] += s * qj[i];
                }
            }
            out
        })
        .collect();
    Ok((vals, vecs))
}

/// Smallest `k` eigenvalues of the cotangent Laplacian with lumped mass, in
/// nondecreasing order, with the corresponding eigenfunctions.
pub fn laplace_eigenpairs(mesh: &TriMesh, k: usize) -> Result<EigenPairs> {
    let n = mesh.n_vertices();
    if k == 0 || k * 10 > n {
        return Err(Error::Parameter(format!("k = {k} must be in 1..={} for {n} vertices", n / 10)));
    }
    let (stiff, mass) = cotan_laplacian(mesh);
    // Scale-aware shift below zero: the spectrum scales like 1/area.
    let shift = -4.0 * std::f64::consts::PI / mesh.area();
    let mut pairs = smallest_eigenpairs(&stiff, &mass, k, shift, &EigenOptions::default())?;
    // The constant mode is exact; clean roundoff in the reported value.
    if pairs.values[0].abs() < 1e-9 * pairs.values.last().copied().unwrap_or(1.0).abs().max(1.0) {
        pairs.values[0] = 0.0;
    }
    Ok(pairs)
}

/// Eigenvalues only.
pub fn laplace_minmax(mesh: &TriMesh, k: usize) -> Result<Vec<f64>> {
    Ok(laplace_eigenpairs(mesh, k)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::shapes::{clifford_torus, ellipsoid};

    #[test]
    fn csr_sums_duplicates() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, -1.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.diagonal(), vec![4.0, 0.0]);
        let mut y = [0.0; 2];
        m.mul_vec(&[1.0, 1.0], &mut y);
        assert_eq!(y, [3.0, 2.0]);
    }

    #[test]
    fn laplacian_annihilates_constants_and_is_symmetric() {
        let m = ellipsoid(1.0, 0.8, 0.6, 16);
        let (k, mass) = cotan_laplacian(&m);
        let mut y = vec![0.0; k.n];
        k.mul_vec(&vec![1.0; k.n], &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        let d = k.to_dense();
        assert!((&d - d.transpose()).amax() < 1e-14);
        assert!((mass.iter().sum::<f64>() - m.area()).abs() < 1e-12);
    }

    #[test]
    fn pcg_solves_spd_system() {
        let m = ellipsoid(1.0, 1.0, 1.0, 12);
        let (k, mass) = cotan_laplacian(&m);
        let a = k.add_diagonal(&mass);
        let diag = a.diagonal();
        let b: Vec<f64> = (0..a.n).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; a.n];
        pcg(&a, &diag, &b, &mut x, 1e-13, 10_000).unwrap();
        let mut ax = vec![0.0; a.n];
        a.mul_vec(&x, &mut ax);
        let err: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-11 * dot(&b, &b).sqrt());
    }

    #[test]
    fn iterative_matches_dense_oracle() {
        let m = ellipsoid(1.0, 0.9, 0.7, 16);
        let (k, mass) = cotan_laplacian(&m);
        let dense = dense_generalized_eigen(&k, &mass);
        let it = smallest_eigenpairs(&k, &mass, 10, -1.0, &EigenOptions::default()).unwrap();
        for j in 0..10 {
            assert!((it.values[j] - dense.values[j]).abs() < 1e-8 * dense.values[j].abs().max(1.0));
        }
    }

    #[test]
    fn round_sphere_spectrum() {
        let m = ellipsoid(1.0, 1.0, 1.0, 64);
        let ev = laplace_minmax(&m, 16).unwrap();
        assert_eq!(ev[0], 0.0);
        let want = [2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0, 12.0, 12.0];
        for (g, w) in ev[1..11].iter().zip(want) {
            assert!((g - w).abs() < 0.05 * w, "{g} vs {w}");
        }
    }

    #[test]
    fn flat_clifford_spectrum() {
        let m = clifford_torus(32);
        let ev = laplace_minmax(&m, 9).unwrap();
        let want = [0.0, 2.0, 2.0, 2.0, 2.0, 4.0, 4.0, 4.0, 4.0];
        for (g, w) in ev.iter().zip(want) {
            assert!((g - w).abs() < 1e-8 + 0.05 * w, "{g} vs {w}");
        }
    }

    #[test]
    fn rejects_too_many_eigenvalues() {
        let m = ellipsoid(1.0, 1.0, 1.0, 8);
        assert!(laplace_minmax(&m, m.n_vertices()).is_err());
    }
}
