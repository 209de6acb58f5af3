//! Three small experiments for the browser page in `www/`.
//!
//! Each operation has a plain Rust form returning `Result<_, String>` and a
//! thin `#[wasm_bindgen]` wrapper. Curves come back flattened, one record
//! after another, so they cross the boundary as a single `Float64Array`.

use std::f64::consts::PI;

use cel_core::canonical::{v_directions, CanonicalSlice, HK_VMAX};
use cel_core::energies::willmore_energy;
use cel_core::geom::shapes::{clifford_torus, geodesic_sphere, icosphere, s3_ellipsoid};
use cel_core::geom::{estimate_curvatures, Point, TriMesh};
use cel_core::optimize::{tube_energy, tube_energy_exact};
use cel_core::sweepouts::{harmonic_basis, level_length, HarmonicSpan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

const TWO_PI_SQ: f64 = 2.0 * PI * PI;

/// Largest mesh resolution the page may request.
pub const MAX_RESOLUTION: usize = 96;

fn check_resolution(res: usize) -> Result<(), String> {
    if (8..=MAX_RESOLUTION).contains(&res) {
        Ok(())
    } else {
        Err(format!("resolution must be in 8..={MAX_RESOLUTION}, got {res}"))
    }
}

/// Willmore energy of the tube tori with radius ratio in `[1.1, 3]`, as
/// records `(ratio, W / 2π², exact / 2π²)`.
pub fn tube_curve(resolution: usize, points: usize) -> Result<Vec<f64>, String> {
    check_resolution(resolution)?;
    if !(2..=200).contains(&points) {
        return Err(format!("points must be in 2..=200, got {points}"));
    }
    let mut out = Vec::with_capacity(3 * points);
    for k in 0..points {
        let c = 1.1 + 1.9 * k as f64 / (points - 1) as f64;
        let w = tube_energy(c, resolution).map_err(|e| e.to_string())?;
        out.extend([c, w / TWO_PI_SQ, tube_energy_exact(c) / TWO_PI_SQ]);
    }
    Ok(out)
}

fn s3_fixture(name: &str, resolution: usize) -> Result<TriMesh, String> {
    match name {
        "clifford" => Ok(clifford_torus(resolution)),
        "geodesic" => Ok(geodesic_sphere(&Point::new(0.0, 0.0, 0.0, 1.0), PI / 3.0, resolution)),
        "ellipsoid" => Ok(s3_ellipsoid(1.0, 0.7, 0.5, resolution)),
        other => Err(format!("unknown surface {other:?}")),
    }
}

/// Areas of the canonical family `Σ_(v,t)` for `t` in `[-π, π]` at a fixed
/// `v` of norm `v_norm`, as records `(t, area / W)`.
pub fn canonical_areas(surface: &str, v_norm: f64, t_steps: usize, resolution: usize) -> Result<Vec<f64>, String> {
    check_resolution(resolution)?;
    if !(0.0..=HK_VMAX).contains(&v_norm) {
        return Err(format!("|v| must be in [0, {HK_VMAX}]"));
    }
    if !(3..=257).contains(&t_steps) {
        return Err(format!("t steps must be in 3..=257, got {t_steps}"));
    }
    let mesh = s3_fixture(surface, resolution)?;
    let err = |e: cel_core::Error| e.to_string();
    let w = willmore_energy(&mesh, &estimate_curvatures(&mesh).map_err(err)?).map_err(err)?.value;
    let slice = CanonicalSlice::new(&mesh, &(v_directions()[2] * v_norm)).map_err(err)?;
    let mut out = Vec::with_capacity(2 * t_steps);
    for k in 0..t_steps {
        let t = -PI + 2.0 * PI * k as f64 / (t_steps - 1) as f64;
        out.extend([t, slice.area(t).map_err(err)? / w]);
    }
    Ok(out)
}

/// Nodal length of a random degree-`d` spherical harmonic on the unit
/// sphere, divided by `2π d`.
pub fn nodal_ratio(degree: usize, seed: u64, resolution: usize) -> Result<f64, String> {
    check_resolution(resolution)?;
    if !(1..=8).contains(&degree) {
        return Err(format!("degree must be in 1..=8, got {degree}"));
    }
    let mesh = icosphere(1.0, resolution);
    let basis = harmonic_basis(&mesh, HarmonicSpan::Exactly(degree));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let values: Vec<f64> =
        (0..mesh.n_vertices()).map(|v| basis.iter().zip(&coeffs).map(|(b, a)| a * b[v]).sum()).collect();
    Ok(level_length(&mesh, &values, 0.0) / (2.0 * PI * degree as f64))
}

#[wasm_bindgen(js_name = tubeCurve)]
pub fn tube_curve_js(resolution: usize, points: usize) -> Result<Vec<f64>, JsError> {
    tube_curve(resolution, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = canonicalAreas)]
pub fn canonical_areas_js(surface: &str, v_norm: f64, t_steps: usize, resolution: usize) -> Result<Vec<f64>, JsError> {
    canonical_areas(surface, v_norm, t_steps, resolution).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = nodalRatio)]
pub fn nodal_ratio_js(degree: usize, seed: u64, resolution: usize) -> Result<f64, JsError> {
    nodal_ratio(degree, seed, resolution).map_err(|e| JsError::new(&e))
}
