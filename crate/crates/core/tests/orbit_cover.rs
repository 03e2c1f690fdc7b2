//! Exhaustive orbit cover and projection scans.

use mixing_core::lattice::{build_lattice, norm_sq};
use mixing_core::orbits::{build_orbits_2d, build_orbits_hd, cover_multiplicity, projection_bound_margin};

#[test]
fn planar_covers_for_all_short_steps() {
    let b = build_lattice(2, 40).unwrap();
    let mut steps = 0;
    for a in -3i64..=3 {
        for c in -3i64..=3 {
            let l = [a, c];
            let n2 = norm_sq(&l);
            if n2 == 0 || n2 > 9 {
                continue;
            }
            steps += 1;
            let s = build_orbits_2d(&l, &b).unwrap();
            let r = cover_multiplicity(&s, &b, 3);
            assert!(r.certified_points > 0);
            assert!(r.violations.is_empty(), "l = {l:?}: {:?}", &r.violations[..r.violations.len().min(5)]);
            for o in &s.orbits {
                assert!(s.is_maximal(o));
                assert!(projection_bound_margin(o) >= 1.0, "l = {l:?}, start {:?}", o.start);
            }
        }
    }
    assert_eq!(steps, 28);
}

#[test]
fn spatial_planes_with_special_orbits() {
    let b = build_lattice(3, 10).unwrap();
    for (l1, l2) in [([1, 0, 0], [0, 1, 0]), ([1, 1, 0], [1, -1, 0])] {
        let s = build_orbits_hd(&l1, &l2, &b).unwrap();
        let r = cover_multiplicity(&s, &b, 3);
        assert!(r.certified_points > 0);
        assert!(r.violations.is_empty(), "{l1:?}, {l2:?}: {:?}", &r.violations[..r.violations.len().min(5)]);
        let specials: Vec<_> = s.orbits.iter().filter(|o| o.special).collect();
        assert!(!specials.is_empty());
        for o in &s.orbits {
            assert!(s.is_maximal(o));
            assert!(projection_bound_margin(o) >= 1.0, "start {:?}, special {}", o.start, o.special);
        }
    }
}

#[test]
fn skew_pair_in_three_dimensions() {
    // Non-orthogonal steps of equal length.
    let b = build_lattice(3, 9).unwrap();
    let s = build_orbits_hd(&[1, 1, 0], &[0, 1, 1], &b).unwrap();
    let r = cover_multiplicity(&s, &b, 3);
    assert!(r.certified_points > 0);
    assert!(r.violations.is_empty(), "{:?}", &r.violations[..r.violations.len().min(5)]);
    assert!(s.orbits.iter().all(|o| projection_bound_margin(o) >= 1.0));
}
