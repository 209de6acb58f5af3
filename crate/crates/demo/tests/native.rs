use cel_demo::{canonical_areas, nodal_ratio, tube_curve};

#[test]
fn tube_curve_has_its_minimum_near_sqrt2() {
    let c = tube_curve(32, 39).unwrap();
    let rows: Vec<&[f64]> = c.chunks(3).collect();
    assert_eq!(rows.len(), 39);
    let best = rows.iter().min_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    assert!((best[0] - 2f64.sqrt()).abs() < 0.06, "{best:?}");
    for r in &rows {
        assert!(r[2] >= 1.0 - 1e-12);
        assert!((r[1] - r[2]).abs() < 0.1 * r[2], "{r:?}");
    }
}

#[test]
fn canonical_areas_stay_below_willmore() {
    let a = canonical_areas("clifford", 0.3, 33, 32).unwrap();
    assert_eq!(a.len(), 66);
    let max = a.chunks(2).map(|r| r[1]).fold(0.0, f64::max);
    assert!(max <= 1.02, "{max}");
    assert!(a[1] < 0.01, "antipodal slice {}", a[1]);
}

#[test]
fn nodal_lengths_respect_crofton() {
    for d in 1..=4 {
        let r = nodal_ratio(d, 11, 48).unwrap();
        assert!(r > 0.0 && r <= 1.02, "d = {d}: {r}");
    }
    assert_eq!(nodal_ratio(3, 5, 48).unwrap(), nodal_ratio(3, 5, 48).unwrap());
}

#[test]
fn bad_arguments_are_rejected() {
    assert!(tube_curve(4, 10).is_err());
    assert!(canonical_areas("klein", 0.3, 33, 32).is_err());
    assert!(canonical_areas("clifford", 0.9, 33, 32).is_err());
    assert!(nodal_ratio(0, 1, 32).is_err());
}
