//! Persistence pairs against a dense boundary-matrix reduction.

mod oracle;

use oracle::checks;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sashimi_core::topology::{build_witness_complex, FilteredComplex, Simplex};
use sashimi_core::Point;

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn random_complexes_match_dense_reduction(seed in any::<u64>(), n in 1usize..16, pe in 0.1f64..0.9, pt in 0.0f64..1.0) {
        let c = checks::random_complex(seed, n, pe, pt);
        prop_assert!(c.len() <= 200);
        prop_assert_eq!(checks::diagram(&c).unwrap(), oracle::dense_persistence(&c));
    }

    #[test]
    fn witness_complexes_match_dense_reduction(seed in any::<u64>(), nl in 2usize..14, nw in 5usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pt = || Point::new(rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0);
        let l: Vec<Point> = (0..nl).map(|_| pt()).collect();
        let w: Vec<Point> = (0..nw).map(|_| pt()).collect();
        let c = build_witness_complex(&l, &w, 2, 6.0).unwrap();
        prop_assert_eq!(checks::diagram(&c).unwrap(), oracle::dense_persistence(&c));
    }
}

#[test]
fn fixtures() {
    let sx = |v: &[u32], x: f64| Simplex::new(v, x).unwrap();
    // Square with one diagonal filled in late: one loop born at 2, killed at 4.
    let square = FilteredComplex::from_simplices(
        vec![
            sx(&[0], 0.0),
            sx(&[1], 0.0),
            sx(&[2], 0.0),
            sx(&[3], 0.0),
            sx(&[0, 1], 1.0),
            sx(&[1, 2], 1.0),
            sx(&[2, 3], 1.0),
            sx(&[0, 3], 2.0),
            sx(&[0, 2], 3.0),
            sx(&[0, 1, 2], 3.0),
            sx(&[0, 2, 3], 4.0),
        ],
        5.0,
    );
    let want = vec![(0, 0.0, 1.0, false), (0, 0.0, 1.0, false), (0, 0.0, 1.0, false), (0, 0.0, 5.0, true), (1, 2.0, 4.0, false)];
    assert_eq!(checks::diagram(&square).unwrap(), want);
    assert_eq!(oracle::dense_persistence(&square), want);

    // Two components merging late; the younger one dies.
    let two = FilteredComplex::from_simplices(
        vec![sx(&[0], 0.0), sx(&[1], 1.0), sx(&[2], 2.0), sx(&[0, 1], 1.5), sx(&[1, 2], 3.0)],
        4.0,
    );
    let want = vec![(0, 0.0, 4.0, true), (0, 1.0, 1.5, false), (0, 2.0, 3.0, false)];
    assert_eq!(checks::diagram(&two).unwrap(), want);
    assert_eq!(oracle::dense_persistence(&two), want);
}
