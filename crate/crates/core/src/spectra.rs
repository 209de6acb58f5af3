//! Morse index of the Jacobi operator `Δ + |A|² + Ric(N, N)` on minimal
//! surfaces of the unit S³, where `Ric(N, N) = 2`.
//!
//! The analytic method counts closed-form Laplace eigenvalues below the
//! (constant) potential. The discrete method assembles
//! `K - M·diag(|A|² + 2)` from the cotangent stiffness `K` and lumped mass
//! `M` and counts its negative eigenvalues.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Ambient, CurvatureField, TriMesh};
use crate::spectral::{cotan_laplacian, smallest_eigenpairs, EigenOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexSurface {
    GreatSphere,
    CliffordTorus,
}

impl FromStr for IndexSurface {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "great_sphere" | "great-sphere" | "sphere" | "equator" => Ok(Self::GreatSphere),
            "clifford" | "clifford_torus" | "clifford-torus" => Ok(Self::CliffordTorus),
            other => Err(Error::UnsupportedSurface(other.to_string())),
        }
    }
}

impl fmt::Display for IndexSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GreatSphere => "great_sphere",
            Self::CliffordTorus => "clifford_torus",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexMethod {
    AnalyticLattice,
    DiscreteMesh,
}

/// An eigenvalue cluster with its multiplicity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub surface: String,
    pub method: IndexMethod,
    /// `|A|² + Ric(N, N)`, averaged over vertices for the discrete method.
    pub potential: f64,
    /// Laplace eigenvalues strictly below the potential.
    pub below_potential: Vec<Cluster>,
    pub index: usize,
    /// Eigenvalues treated as Jacobi fields rather than counted.
    pub nullity: usize,
}

fn cluster(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut sum = 0.0;
    for &v in values {
        match out.last_mut() {
            Some(c) if (v - sum / c.multiplicity as f64).abs() <= tol => {
                c.multiplicity += 1;
                sum += v;
                c.value = sum / c.multiplicity as f64;
            }
            _ => {
                sum = v;
                out.push(Cluster { value: v, multiplicity: 1 });
            }
        }
    }
    out
}

/// Index from the closed-form spectra: `l(l+1)` with multiplicity `2l+1` on
/// the unit 2-sphere, `2(m² + n²)` on the flat Clifford torus.
pub fn jacobi_index_analytic(surface: IndexSurface) -> IndexReport {
    let (potential, eigen): (f64, Vec<f64>) = match surface {
        IndexSurface::GreatSphere => {
            let ev = (0..10u32).flat_map(|l| std::iter::repeat_n(f64::from(l * (l + 1)), 2 * l as usize + 1));
            (2.0, ev.collect())
        }
        IndexSurface::CliffordTorus => {
            let mut ev = Vec::new();
            for m in -6i32..=6 {
                for n in -6i32..=6 {
                    ev.push(f64::from(2 * (m * m + n * n)));
                }
            }
            ev.sort_by(f64::total_cmp);
            (4.0, ev)
        }
    };
    let below: Vec<f64> = eigen.iter().copied().filter(|&e| e < potential).collect();
    let nullity = eigen.iter().filter(|&&e| e == potential).count();
    IndexReport {
        surface: surface.to_string(),
        method: IndexMethod::AnalyticLattice,
        potential,
        below_potential: cluster(&below, 0.0),
        index: below.len(),
        nullity,
    }
}

/// Largest area-weighted RMS mean curvature accepted as minimal.
pub const MINIMAL_RMS: f64 = 1e-2;

/// Jacobi eigenvalues within this fraction of the mean potential are
/// classified as nullity.
pub const KERNEL_BAND: f64 = 0.02;

/// Index of the discrete Jacobi operator on an S³ mesh.
pub fn jacobi_index_numeric(mesh: &TriMesh, field: &CurvatureField, surface: &str) -> Result<IndexReport> {
    if field.len() != mesh.n_vertices() || field.ambient != mesh.ambient {
        return Err(Error::Input("curvature field does not belong to the mesh".into()));
    }
    let rms = field.mean_curvature_rms();
    if mesh.ambient != Ambient::S3 {
        return Err(Error::NotMinimal { rms, threshold: MINIMAL_RMS });
    }
    if !(rms <= MINIMAL_RMS) {
        return Err(Error::NotMinimal { rms, threshold: MINIMAL_RMS });
    }
    let n = mesh.n_vertices();
    let (stiff, mass) = cotan_laplacian(mesh);
    let pot: Vec<f64> = (0..n).map(|v| field.second_form_sq(v) + 2.0).collect();
    let total: f64 = mass.iter().sum();
    let mean_pot = pot.iter().zip(&mass).map(|(p, m)| p * m).sum::<f64>() / total;
    let max_pot = pot.iter().copied().fold(0.0, f64::max);
    let jac = stiff.add_diagonal(&pot.iter().zip(&mass).map(|(p, m)| -p * m).collect::<Vec<_>>());
    let band = KERNEL_BAND * mean_pot;
    let shift = -max_pot - 1.0;
    let mut count = 12.min(n);
    let values = loop {
        let pairs = smallest_eigenpairs(&jac, &mass, count, shift, &EigenOptions::default())?;
        let top = *pairs.values.last().expect("nonempty");
        if top > band || count == n {
            break pairs.values;
        }
        if count * 2 > n {
            return Err(Error::Numeric("too many eigenvalues below the potential to resolve".into()));
        }
        count *= 2;
    };
    let index = values.iter().filter(|&&m| m < -band).count();
    let nullity = values.iter().filter(|&&m| m.abs() <= band).count();
    let below: Vec<f64> = values.iter().filter(|&&m| m < -band).map(|m| m + mean_pot).collect();
    Ok(IndexReport {
        surface: surface.to_string(),
        method: IndexMethod::DiscreteMesh,
        potential: mean_pot,
        below_potential: cluster(&below, band),
        index,
        nullity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::estimate_curvatures;
    use crate::geom::shapes::{clifford_torus, geodesic_sphere, tube_torus};
    use crate::geom::Point;

    #[test]
    fn analytic_indices() {
        let s = jacobi_index_analytic(IndexSurface::GreatSphere);
        assert_eq!((s.index, s.nullity), (1, 3));
        let c = jacobi_index_analytic(IndexSurface::CliffordTorus);
        assert_eq!(c.index, 5);
        assert_eq!(c.nullity, 4);
        let lst: Vec<(f64, usize)> = c.below_potential.iter().map(|k| (k.value, k.multiplicity)).collect();
        assert_eq!(lst, vec![(0.0, 1), (2.0, 4)]);
    }

    #[test]
    fn parses_surface_names() {
        assert_eq!("clifford".parse::<IndexSurface>().unwrap(), IndexSurface::CliffordTorus);
        assert!(matches!("torus".parse::<IndexSurface>(), Err(Error::UnsupportedSurface(_))));
    }

    #[test]
    fn numeric_great_sphere() {
        let m = geodesic_sphere(&Point::new(0.0, 0.0, 0.0, 1.0), std::f64::consts::FRAC_PI_2, 64);
        let f = estimate_curvatures(&m).unwrap();
        let r = jacobi_index_numeric(&m, &f, "equator").unwrap();
        assert_eq!(r.index, 1);
        assert_eq!(r.nullity, 3);
    }

    #[test]
    fn numeric_clifford() {
        let m = clifford_torus(64);
        let f = estimate_curvatures(&m).unwrap();
        let r = jacobi_index_numeric(&m, &f, "clifford").unwrap();
        assert_eq!(r.below_potential.len(), 2, "{r:?}");
        assert!(r.below_potential[0].value.abs() < 0.05 * 4.0);
        assert_eq!(r.below_potential[1].multiplicity, 4);
        assert!((r.below_potential[1].value - 2.0).abs() < 0.1);
    }

    #[test]
    fn tube_torus_is_not_minimal() {
        let m = tube_torus(std::f64::consts::SQRT_2, 1.0, 16);
        let f = estimate_curvatures(&m).unwrap();
        assert!(matches!(jacobi_index_numeric(&m, &f, "tube"), Err(Error::NotMinimal { .. })));
    }
}
