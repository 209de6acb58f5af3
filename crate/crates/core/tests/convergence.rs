//! Refinement studies: quadrature order, invariance under Möbius maps and
//! stability of discrete spectra.

use cel_core::conformal::ConformalDilation;
use cel_core::energies::mobius_energy;
use cel_core::geom::shapes::{clifford_torus, hopf_link, icosphere, perturbed_link};
use cel_core::geom::{estimate_curvatures, Point, PolyLink};
use cel_core::spectra::{jacobi_index_numeric, IndexSurface};
use cel_core::spectral::laplace_minmax;

#[test]
fn mobius_quadrature_converges_at_least_threefold_per_doubling() {
    let base = |n| perturbed_link(&hopf_link(n), 0.1, 17).unwrap();
    let fine = mobius_energy(&base(1024)).unwrap().value;
    let errs: Vec<f64> = [32, 64, 128].iter().map(|&n| (mobius_energy(&base(n)).unwrap().value - fine).abs()).collect();
    for w in errs.windows(2) {
        assert!(w[0] >= 3.0 * w[1], "{errs:?}");
    }
}

fn dilate(link: &PolyLink, v: Point) -> PolyLink {
    let f = ConformalDilation::new(v).unwrap();
    let m = |c: &[Point]| c.iter().map(|x| f.apply(x).unwrap()).collect();
    PolyLink::new(m(&link.gamma1), m(&link.gamma2), 4).unwrap()
}

#[test]
fn hopf_energy_is_invariant_under_dilations() {
    let l = hopf_link(128);
    let e0 = mobius_energy(&l).unwrap().value;
    for r in [0.1, 0.3, 0.5] {
        let v = Point::new(0.5, 0.5, 0.5, 0.5) * r;
        let e = mobius_energy(&dilate(&l, v)).unwrap().value;
        assert!((e - e0).abs() < 1e-3 * e0, "|v| = {r}: {e} vs {e0}");
    }
}

#[test]
fn sphere_spectrum_error_shrinks_under_refinement() {
    let want = [0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0];
    let err = |res| {
        let got = laplace_minmax(&icosphere(1.0, res), 9).unwrap();
        got.iter().zip(&want).map(|(g, w): (&f64, &f64)| (g - w).abs()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(32), err(64));
    assert!(fine < coarse && fine < 0.02 * 6.0, "{coarse} -> {fine}");
}

#[test]
fn clifford_index_is_stable_under_refinement() {
    for res in [64, 128] {
        let m = clifford_torus(res);
        let r = jacobi_index_numeric(&m, &estimate_curvatures(&m).unwrap(), &IndexSurface::CliffordTorus.to_string())
            .unwrap();
        assert_eq!(r.index, 5, "res {res}");
    }
}
