//! Property tests for the geometric invariants, with independent oracles
//! written here rather than taken from the library.

use std::f64::consts::PI;

use cel_core::canonical::parallel_jacobian;
use cel_core::conformal::ConformalDilation;
use cel_core::energies::{link_to_r3, linking_number, mobius_energy, willmore_energy};
use cel_core::geom::io::{mesh_from_obj, mesh_to_obj};
use cel_core::geom::shapes::{clifford_torus, coaxial_circles, ellipsoid, hopf_link, perturbed_link, torus_link};
use cel_core::geom::{estimate_curvatures, Point, PolyLink};
use cel_core::numeric::compensated_sum;
use proptest::prelude::*;

/// Linking number as half the signed crossing count of the xy projection.
fn crossing_linking_number(link: &PolyLink) -> f64 {
    let seg = |c: &[Point], i: usize| (c[i], c[(i + 1) % c.len()]);
    let mut total = 0.0;
    for i in 0..link.gamma1.len() {
        let (a0, a1) = seg(&link.gamma1, i);
        let da = a1 - a0;
        for j in 0..link.gamma2.len() {
            let (b0, b1) = seg(&link.gamma2, j);
            let db = b1 - b0;
            let det = da.x * db.y - da.y * db.x;
            if det == 0.0 {
                continue;
            }
            let r = b0 - a0;
            let s = (r.x * db.y - r.y * db.x) / det;
            let u = (r.x * da.y - r.y * da.x) / det;
            if !(0.0..1.0).contains(&s) || !(0.0..1.0).contains(&u) {
                continue;
            }
            let za = a0.z + s * da.z;
            let zb = b0.z + u * db.z;
            let (over, under) = if za > zb { (da, db) } else { (db, da) };
            total += (over.x * under.y - over.y * under.x).signum();
        }
    }
    total / 2.0
}

#[test]
fn crossing_oracle_on_fixtures() {
    for (link, want) in [
        (link_to_r3(&hopf_link(96)).unwrap(), 1.0),
        (coaxial_circles(1.5, 64), 0.0),
        (link_to_r3(&torus_link(2, 4, 200).unwrap()).unwrap(), 2.0),
        (link_to_r3(&torus_link(2, 6, 300).unwrap()).unwrap(), 3.0),
    ] {
        let lk = linking_number(&link).unwrap().value as f64;
        assert_eq!(lk.abs(), want);
        assert_eq!(crossing_linking_number(&link), lk);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauss_integral_matches_crossing_count(seed in 0u64..10_000, amp in 0.0f64..0.2, torus in 0usize..3) {
        let base = match torus {
            0 => hopf_link(80),
            1 => torus_link(2, 4, 160).unwrap(),
            _ => link_to_r3(&coaxial_circles(1.2, 64)).unwrap_or_else(|_| coaxial_circles(1.2, 64)),
        };
        let l = link_to_r3(&perturbed_link(&base, amp, seed).unwrap()).unwrap();
        prop_assume!(l.min_distance() > 10.0 * l.max_segment_length());
        let lk = linking_number(&l).unwrap();
        prop_assert_eq!(lk.value as f64, crossing_linking_number(&l));
    }

    #[test]
    fn dilation_keeps_points_on_the_sphere(
        v in prop::array::uniform4(-0.45f64..0.45),
        x in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let x = Point::from(x);
        prop_assume!(x.norm() > 1e-3);
        let x = x / x.norm();
        let f = ConformalDilation::new(Point::from(v)).unwrap();
        let y = f.apply(&x).unwrap();
        prop_assert!((y.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pointwise_jacobian_bound(k1 in -50.0f64..50.0, k2 in -50.0f64..50.0, t in -PI..PI) {
        let h = 0.5 * (k1 + k2);
        prop_assert!(parallel_jacobian(k1, k2, t) <= 1.0 + h * h + 1e-12);
        prop_assert!(parallel_jacobian(k1, k2, t) >= 0.0);
    }

    #[test]
    fn compensated_sum_ignores_order(mut xs in prop::collection::vec(-1e6f64..1e6, 1..400), seed in any::<u64>()) {
        let a = compensated_sum(&xs);
        // deterministic shuffle
        let mut s = seed | 1;
        for i in (1..xs.len()).rev() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            xs.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let b = compensated_sum(&xs);
        let scale: f64 = xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((a - b).abs() <= 1e-12 * scale);
    }

    #[test]
    fn obj_round_trip_is_exact(res in 8usize..24, s3 in any::<bool>()) {
        let m = if s3 { clifford_torus(res) } else { ellipsoid(1.0, 0.8, 0.6, res) };
        let back = mesh_from_obj(&mesh_to_obj(&m)).unwrap();
        prop_assert_eq!(back.ambient, m.ambient);
        prop_assert_eq!(&back.faces, &m.faces);
        if s3 {
            // the reader renormalizes S3 points onto the sphere
            for (a, b) in back.vertices.iter().zip(&m.vertices) {
                prop_assert!((a - b).norm() <= 1e-15);
            }
        } else {
            prop_assert_eq!(&back.vertices, &m.vertices);
        }
    }

    #[test]
    fn energies_are_scale_invariant(s in 0.1f64..10.0) {
        let l = coaxial_circles(0.7, 48);
        let e0 = mobius_energy(&l).unwrap().value;
        let e1 = mobius_energy(&l.map_points(|p| p * s, 3)).unwrap().value;
        prop_assert!((e0 - e1).abs() <= 1e-9 * e0);

        let m = ellipsoid(1.0, 0.8, 0.6, 16);
        let w0 = willmore_energy(&m, &estimate_curvatures(&m).unwrap()).unwrap().value;
        let ms = m.scaled(s);
        let w1 = willmore_energy(&ms, &estimate_curvatures(&ms).unwrap()).unwrap().value;
        // roundoff in the rank-revealing fit, not a scale dependence
        prop_assert!((w0 - w1).abs() <= 1e-6 * w0);
    }
}
