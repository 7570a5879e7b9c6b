use hocc_core::mesh::{chamfer, fscore, fscores, MM_PER_UNIT};
use hocc_core::{Error, Vec3};
use proptest::prelude::*;

fn cloud(max: usize) -> impl Strategy<Value = Vec<Vec3>> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 1..max)
        .prop_map(|v| v.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect())
}

fn brute_nn(p: Vec3, to: &[Vec3]) -> f64 {
    to.iter().map(|q| (*q - p).norm()).fold(f64::INFINITY, f64::min)
}

#[test]
fn two_point_clouds_by_hand() {
    // a → b: 0.003 and 0.004; b → a: 0.003, 0.004, 0.010 (meters)
    let a = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)];
    let b = [Vec3::new(0.003, 0.0, 0.0), Vec3::new(1.0, 0.004, 0.0), Vec3::new(0.0, 0.0, 0.01)];
    let expected = ((0.003 + 0.004) / 2.0 + (0.003 + 0.004 + 0.010) / 3.0) * MM_PER_UNIT;
    assert!((chamfer(&a, &b).unwrap() - expected).abs() < 1e-9);
    let f = fscore(&a, &b, 5.0).unwrap();
    assert_eq!((f.precision, f.recall), (1.0, 2.0 / 3.0));
    assert!((f.f - 0.8).abs() < 1e-12);
}

#[test]
fn empty_clouds_and_bad_thresholds_are_rejected() {
    let a = [Vec3::default()];
    assert!(matches!(chamfer(&a, &[]), Err(Error::Precondition(_))));
    assert!(matches!(fscore(&[], &a, 5.0), Err(Error::Precondition(_))));
    assert!(matches!(fscore(&a, &a, 0.0), Err(Error::Precondition(_))));
    assert!(matches!(fscore(&a, &a, f64::NAN), Err(Error::Precondition(_))));
}

proptest! {
    #[test]
    fn identity_and_symmetry(a in cloud(150), b in cloud(150), tau in 0.1..800.0f64) {
        prop_assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
        let aa = fscore(&a, &a, tau).unwrap();
        prop_assert_eq!((aa.precision, aa.recall, aa.f), (1.0, 1.0, 1.0));
        prop_assert_eq!(chamfer(&a, &b).unwrap(), chamfer(&b, &a).unwrap());
        let (ab, ba) = (fscore(&a, &b, tau).unwrap(), fscore(&b, &a, tau).unwrap());
        prop_assert_eq!(ab.precision, ba.recall);
        prop_assert_eq!(ab.recall, ba.precision);
        prop_assert_eq!(ab.f, ba.f);
    }

    #[test]
    fn agrees_with_brute_force(a in cloud(200), b in cloud(200), tau in 0.1..800.0f64) {
        let ab: f64 = a.iter().map(|p| brute_nn(*p, &b)).sum::<f64>() / a.len() as f64;
        let ba: f64 = b.iter().map(|p| brute_nn(*p, &a)).sum::<f64>() / b.len() as f64;
        prop_assert!((chamfer(&a, &b).unwrap() - (ab + ba) * MM_PER_UNIT).abs() <= 1e-9);
        let hit = |from: &[Vec3], to: &[Vec3]| {
            from.iter().filter(|p| brute_nn(**p, to) * MM_PER_UNIT <= tau).count() as f64 / from.len() as f64
        };
        let f = fscore(&a, &b, tau).unwrap();
        prop_assert_eq!(f.precision, hit(&a, &b));
        prop_assert_eq!(f.recall, hit(&b, &a));
    }

    #[test]
    fn fscore_is_bounded_and_monotone_in_threshold(a in cloud(80), b in cloud(80), t1 in 0.1..500.0f64, dt in 0.0..500.0f64) {
        let f = fscores(&a, &b, &[t1, t1 + dt]).unwrap();
        for s in &f {
            prop_assert!((0.0..=1.0).contains(&s.f));
            prop_assert!(s.f <= s.precision.max(s.recall) + 1e-15);
        }
        prop_assert!(f[0].precision <= f[1].precision && f[0].recall <= f[1].recall);
    }

    #[test]
    fn invariant_under_reordering_and_translation(a in cloud(60), b in cloud(60), shift in (-0.5..0.5f64, -0.5..0.5f64, -0.5..0.5f64)) {
        let t = Vec3::new(shift.0, shift.1, shift.2);
        let mut ra = a.clone();
        ra.reverse();
        prop_assert!((chamfer(&a, &b).unwrap() - chamfer(&ra, &b).unwrap()).abs() <= 1e-9);
        let ta: Vec<Vec3> = a.iter().map(|p| *p + t).collect();
        let tb: Vec<Vec3> = b.iter().map(|p| *p + t).collect();
        prop_assert!((chamfer(&a, &b).unwrap() - chamfer(&ta, &tb).unwrap()).abs() <= 1e-6);
    }
}
