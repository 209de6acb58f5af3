//! Real spherical harmonics on the unit 2-sphere, orthonormal in L².

use std::f64::consts::PI;

use crate::geom::{Point, TriMesh};

/// Number of real harmonics of degree at most `d`.
pub const fn harmonic_basis_size(d: usize) -> usize {
    (d + 1) * (d + 1)
}

/// Smallest degree `d` whose basis has at least `p + 1` elements.
pub fn harmonic_degree_for(p: usize) -> usize {
    let mut d = 0;
    while harmonic_basis_size(d) < p + 1 {
        d += 1;
    }
    d
}

/// Values of all real harmonics `Y_l^m`, `l ≤ d`, `-l ≤ m ≤ l`, at a unit
/// vector, ordered by `l` then `m`.
pub fn real_spherical_harmonics(d: usize, x: &Point) -> Vec<f64> {
    let r = (x.x * x.x + x.y * x.y + x.z * x.z).sqrt();
    let ct = (x.z / r).clamp(-1.0, 1.0);
    let st = (1.0 - ct * ct).max(0.0).sqrt();
    let phi = x.y.atan2(x.x);

    // plm[l][m] = associated Legendre P_l^m(cos θ) without Condon–Shortley phase
    let mut plm = vec![vec![0.0; d + 1]; d + 1];
    let mut pmm = 1.0;
    for m in 0..=d {
        if m > 0 {
            pmm *= (2 * m - 1) as f64 * st;
        }
        plm[m][m] = pmm;
        if m < d {
            plm[m + 1][m] = ct * (2 * m + 1) as f64 * pmm;
        }
        for l in m + 2..=d {
            plm[l][m] = ((2 * l - 1) as f64 * ct * plm[l - 1][m] - (l + m - 1) as f64 * plm[l - 2][m]) / (l - m) as f64;
        }
    }
    let mut out = Vec::with_capacity(harmonic_basis_size(d));
    for l in 0..=d {
        for mi in -(l as i64)..=(l as i64) {
            let m = mi.unsigned_abs() as usize;
            // (l-m)!/(l+m)! as a running product
            let ratio: f64 = ((l - m + 1)..=(l + m)).map(|k| 1.0 / k as f64).product();
            let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
            let v = match mi {
                0 => norm * plm[l][0],
                mi if mi > 0 => std::f64::consts::SQRT_2 * norm * plm[l][m] * (m as f64 * phi).cos(),
                _ => std::f64::consts::SQRT_2 * norm * plm[l][m] * (m as f64 * phi).sin(),
            };
            out.push(v);
        }
    }
    out
}

/// Which harmonics span the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmonicSpan {
    /// All harmonics of degree at most `d`.
    UpTo(usize),
    /// Only degree exactly `d` (homogeneous).
    Exactly(usize),
    /// The first `n` basis functions in degree order.
    First(usize),
}

impl HarmonicSpan {
    /// Range of basis indices in the degree-ordered basis.
    pub fn range(self) -> std::ops::Range<usize> {
        match self {
            Self::UpTo(d) => 0..harmonic_basis_size(d),
            Self::Exactly(d) => d * d..harmonic_basis_size(d),
            Self::First(n) => 0..n,
        }
    }

    /// Highest degree appearing in the span.
    pub fn degree(self) -> usize {
        match self {
            Self::UpTo(d) | Self::Exactly(d) => d,
            Self::First(n) => harmonic_degree_for(n.saturating_sub(1)),
        }
    }
}

/// Basis functions of the span evaluated at the mesh vertices, one vector
/// per function.
pub fn harmonic_basis(mesh: &TriMesh, span: HarmonicSpan) -> Vec<Vec<f64>> {
    let range = span.range();
    let d = span.degree();
    let mut cols = vec![Vec::with_capacity(mesh.n_vertices()); range.len()];
    for p in &mesh.vertices {
        let y = real_spherical_harmonics(d, p);
        for (c, k) in range.clone().enumerate() {
            cols[c].push(y[k]);
        }
    }
    cols
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::p3;
    use crate::geom::shapes::ellipsoid;

    #[test]
    fn degree_map() {
        assert_eq!(harmonic_degree_for(1), 1);
        assert_eq!(harmonic_degree_for(3), 1);
        assert_eq!(harmonic_degree_for(4), 2);
        assert_eq!(harmonic_degree_for(80), 8);
        assert_eq!(harmonic_basis_size(4), 25);
    }

    #[test]
    fn low_degrees_are_coordinate_polynomials() {
        let x = p3(0.36, -0.48, 0.8);
        let y = real_spherical_harmonics(2, &x);
        let c1 = (3.0 / (4.0 * PI)).sqrt();
        assert!((y[0] - 0.5 / PI.sqrt()).abs() < 1e-15);
        assert!((y[1] - c1 * x.y).abs() < 1e-15);
        assert!((y[2] - c1 * x.z).abs() < 1e-15);
        assert!((y[3] - c1 * x.x).abs() < 1e-15);
        let c20 = (5.0 / (16.0 * PI)).sqrt();
        assert!((y[6] - c20 * (3.0 * x.z * x.z - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_under_mesh_quadrature() {
        let m = ellipsoid(1.0, 1.0, 1.0, 96);
        let w = m.vertex_areas();
        let b = harmonic_basis(&m, HarmonicSpan::UpTo(4));
        for i in 0..b.len() {
            for j in 0..=i {
                let g: f64 = (0..w.len()).map(|v| b[i][v] * b[j][v] * w[v]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 0.02, "({i},{j}) {g}");
            }
        }
    }

    #[test]
    fn addition_theorem() {
        // Σ_m Y_lm(x)² = (2l+1)/(4π) at every point.
        let x = p3(0.1, 0.7, -0.2).normalize();
        let y = real_spherical_harmonics(6, &x);
        for l in 0..=6usize {
            let s: f64 = y[l * l..(l + 1) * (l + 1)].iter().map(|v| v * v).sum();
            assert!((s - (2 * l + 1) as f64 / (4.0 * PI)).abs() < 1e-12);
        }
    }
}
