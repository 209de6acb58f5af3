//! Principal curvatures by local polynomial fitting.
//!
//! At every vertex the two-ring is expressed in a tangent frame and a height
//! function `z = h(x, y)` is fitted by least squares: a full cubic when the
//! neighbourhood has enough samples, a quadric otherwise. The shape operator
//! is read off the fit at the origin (first fundamental form included, so a
//! tilted frame does not bias the result) and the frame is re-aligned with
//! the fitted normal for a second pass.
//!
//! On S³ the neighbourhood is pulled back by the Riemannian logarithm at the
//! vertex. Christoffel symbols vanish at the origin of normal coordinates, so
//! the fitted Hessian is the second fundamental form of the surface inside
//! S³, with no spherical part to remove.
//!
//! Sign convention: curvatures are positive where the surface bends away
//! from its normal (a round sphere with outward normal has k = 1/r).

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;

use super::stereo::Frame4;
use super::{Ambient, Point, TriMesh};
use crate::error::{Error, Result};

/// Per-vertex curvature data.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub ambient: Ambient,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    /// Unit normals; tangent to S³ when the ambient is S³.
    pub normals: Vec<Point>,
    /// Barycentric dual-cell areas.
    pub weights: Vec<f64>,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.k1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k1.is_empty()
    }

    #[inline]
    pub fn mean(&self, v: usize) -> f64 {
        0.5 * (self.k1[v] + self.k2[v])
    }

    /// Squared norm of the second fundamental form, k1² + k2².
    #[inline]
    pub fn second_form_sq(&self, v: usize) -> f64 {
        self.k1[v] * self.k1[v] + self.k2[v] * self.k2[v]
    }

    pub fn total_weight(&self) -> f64 {
        crate::numeric::compensated_sum(&self.weights)
    }

    /// Area-weighted RMS of the mean curvature.
    pub fn mean_curvature_rms(&self) -> f64 {
        let num: f64 = (0..self.len()).map(|v| self.mean(v).powi(2) * self.weights[v]).sum();
        (num / self.total_weight()).sqrt()
    }
}

/// Local neighbourhood data needed for one vertex fit.
pub(crate) struct Stencil {
    pub one_ring_faces: Vec<usize>,
    pub two_ring: Vec<usize>,
}

pub(crate) fn stencils(mesh: &TriMesh) -> Vec<Stencil> {
    let vf = mesh.vertex_faces();
    let nb = mesh.vertex_neighbors();
    (0..mesh.n_vertices())
        .map(|v| {
            let mut ring: Vec<usize> = nb[v].clone();
            for &u in &nb[v] {
                ring.extend_from_slice(&nb[u]);
            }
            ring.sort_unstable();
            ring.dedup();
            ring.retain(|&u| u != v);
            Stencil { one_ring_faces: vf[v].clone(), two_ring: ring }
        })
        .collect()
}

/// Curvature at one vertex. Returns `(k1, k2, normal)`.
pub(crate) fn vertex_curvature(mesh: &TriMesh, v: usize, st: &Stencil) -> Result<(f64, f64, Point)> {
    vertex_curvature_at(&mesh.vertices, &mesh.faces, mesh.ambient, v, st)
}

/// [`vertex_curvature`] on raw vertex positions, so callers can evaluate
/// perturbed configurations without rebuilding a mesh.
pub(crate) fn vertex_curvature_at(
    vertices: &[Point],
    faces: &[[usize; 3]],
    ambient: Ambient,
    v: usize,
    st: &Stencil,
) -> Result<(f64, f64, Point)> {
    let p = vertices[v];
    let frame = (ambient == Ambient::S3).then(|| Frame4::new(&p));
    let local = |q: &Point| -> Vector3<f64> {
        match &frame {
            Some(f) => f.sphere_log(q),
            None => Vector3::new(q.x - p.x, q.y - p.y, q.z - p.z),
        }
    };

    let mut n = Vector3::zeros();
    for &f in &st.one_ring_faces {
        let face = faces[f];
        let k = face.iter().position(|&u| u == v).expect("face incident to vertex");
        let a = local(&vertices[face[(k + 1) % 3]]);
        let b = local(&vertices[face[(k + 2) % 3]]);
        n += a.cross(&b);
    }
    let nn = n.norm();
    if !(nn > 0.0) {
        return Err(Error::MeshQuality(format!("vertex {v} has a degenerate one-ring")));
    }
    n /= nn;

    let pts: Vec<Vector3<f64>> = st.two_ring.iter().map(|&u| local(&vertices[u])).collect();
    if pts.len() < 5 {
        return Err(Error::MeshQuality(format!("vertex {v} has only {} neighbours", pts.len())));
    }
    let scale = pts.iter().map(|q| q.norm()).sum::<f64>() / pts.len() as f64;

    let mut result = (0.0, 0.0, n);
    for _pass in 0..2 {
        let (e1, e2) = tangent_basis(&n);
        let cubic = pts.len() >= 12;
        let cols = if cubic { 9 } else { 5 };
        let mut a = DMatrix::<f64>::zeros(pts.len(), cols);
        let mut rhs = DVector::<f64>::zeros(pts.len());
        for (r, q) in pts.iter().enumerate() {
            let x = q.dot(&e1) / scale;
            let y = q.dot(&e2) / scale;
            let z = q.dot(&n) / scale;
            let row = [x * x, x * y, y * y, x, y, x * x * x, x * x * y, x * y * y, y * y * y];
            for c in 0..cols {
                a[(r, c)] = row[c];
            }
            rhs[r] = z;
        }
        let coef = a
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::Numeric(format!("curvature fit at vertex {v}: {e}")))?;
        // h(x, y) in unscaled units: second derivatives pick up 1/scale.
        let (hxx, hxy, hyy) = (2.0 * coef[0] / scale, coef[1] / scale, 2.0 * coef[2] / scale);
        let (gx, gy) = (coef[3], coef[4]);
        let g2 = gx * gx + gy * gy;
        let w = (1.0 + g2).sqrt();
        // II = Hess / w, I = Id + g gᵀ; principal curvatures solve det(II - κ I) = 0.
        let (l, m, nn2) = (hxx / w, hxy / w, hyy / w);
        let (ee, ff, gg) = (1.0 + gx * gx, gx * gy, 1.0 + gy * gy);
        let qa = ee * gg - ff * ff;
        let qb = -(l * gg - 2.0 * m * ff + nn2 * ee);
        let qc = l * nn2 - m * m;
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        let kap_hi = (-qb + disc) / (2.0 * qa);
        let kap_lo = (-qb - disc) / (2.0 * qa);
        let normal = ((n - e1 * gx - e2 * gy) / w).normalize();
        result = (-kap_lo, -kap_hi, normal);
        n = normal;
    }
    let (k1, k2, nrm) = result;
    let normal = match &frame {
        Some(f) => f.from_tangent(&nrm),
        None => Point::new(nrm.x, nrm.y, nrm.z, 0.0),
    };
    Ok((k1, k2, normal))
}

fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if n.x.abs() < 0.6 { Vector3::x() } else { Vector3::y() };
    let e1 = (helper - n * n.dot(&helper)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Checks that no face is degenerate relative to the mesh scale.
pub(crate) fn check_faces(mesh: &TriMesh) -> Result<()> {
    let h = mesh.mean_edge_length();
    let floor = 1e-12 * h * h;
    for f in 0..mesh.faces.len() {
        if !(mesh.face_area(f) > floor) {
            return Err(Error::MeshQuality(format!("face {f} has zero area")));
        }
    }
    Ok(())
}

/// Estimates principal curvatures, normals and dual areas at every vertex.
pub fn estimate_curvatures(mesh: &TriMesh) -> Result<CurvatureField> {
    check_faces(mesh)?;
    let st = stencils(mesh);
    let per_vertex: Vec<(f64, f64, Point)> =
        (0..mesh.n_vertices()).into_par_iter().map(|v| vertex_curvature(mesh, v, &st[v])).collect::<Result<_>>()?;
    let mut field = CurvatureField {
        ambient: mesh.ambient,
        k1: Vec::with_capacity(per_vertex.len()),
        k2: Vec::with_capacity(per_vertex.len()),
        normals: Vec::with_capacity(per_vertex.len()),
        weights: mesh.vertex_areas(),
    };
    for (k1, k2, n) in per_vertex {
        field.k1.push(k1);
        field.k2.push(k2);
        field.normals.push(n);
    }
    Ok(field)
}
