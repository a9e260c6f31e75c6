//! Randomized invariants, proptest-driven.

use proptest::prelude::*;
use wavedge::*;

fn mm1(pos: usize, scale: f64, value: f64) -> ModMax1d {
    ModMax1d { pos, scale, value }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raster_round_trip_is_bit_exact(
        rows in 4usize..12,
        cols in 4usize..12,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let px: Vec<f64> = (0..rows * cols)
            .map(|_| rng.gen_range(0u8..=255) as f64 / 255.0)
            .collect();
        let img = Image2D::new(rows, cols, px).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.pgm");
        let p2 = dir.path().join("b.pgm");
        write_raster(&img, &p1).unwrap();
        let back = load_raster(&p1).unwrap();
        write_raster(&back, &p2).unwrap();
        prop_assert_eq!(back, load_raster(&p2).unwrap());
        prop_assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn gradient_angle_stays_in_range(
        wx in -100.0f64..100.0,
        wy in -100.0f64..100.0,
    ) {
        prop_assume!(wx != 0.0 || wy != 0.0);
        let a = angle_of(wx, wy).unwrap();
        prop_assert!(a > -std::f64::consts::FRAC_PI_2);
        prop_assert!(a <= 3.0 * std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn decision_score_laws(
        dpos in 0usize..200,
        scale in 2.0f64..32.0,
        v_coarse in 0.1f64..10.0,
        v_fine in 0.1f64..10.0,
        flip in any::<bool>(),
        alpha in -0.5f64..0.5,
    ) {
        let n = mm1(500, scale, v_coarse);
        let sign = if flip { -1.0 } else { 1.0 };
        let m = mm1(500 + dpos, scale / 2.0, sign * v_fine);
        let p = DecisionParams::for_1d(alpha);
        let score = decision_1d(&n, &m, &p);
        prop_assert!((0.0..=1.0).contains(&score));
        if flip {
            prop_assert_eq!(score, 0.0);
        } else if (dpos as f64) <= p.window_factor * m.scale {
            prop_assert!(score > 0.0);
        }
    }

    #[test]
    fn chaining_partitions_every_input(
        seed in any::<u64>(),
        count in 1usize..120,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut seen = std::collections::HashSet::new();
        let mut maxima = Vec::new();
        for _ in 0..count {
            let (r, c) = (rng.gen_range(0usize..24), rng.gen_range(0usize..24));
            if seen.insert((r, c)) {
                maxima.push(ModMax2d {
                    row: r,
                    col: c,
                    scale: 4.0,
                    value: rng.gen_range(0.1..5.0),
                    angle: rng.gen_range(-1.5..4.7),
                });
            }
        }
        maxima.sort_by_key(|m| (m.row, m.col));
        let curves = chain_curves(&maxima);
        let total: usize = curves.iter().map(|c| c.len()).sum();
        prop_assert_eq!(total, maxima.len());
        let mut covered = std::collections::HashSet::new();
        for curve in &curves {
            for w in curve.points.windows(2) {
                let dr = (w[0].row as i64 - w[1].row as i64).abs();
                let dc = (w[0].col as i64 - w[1].col as i64).abs();
                prop_assert!(dr <= 1 && dc <= 1 && dr + dc > 0);
            }
            for pt in &curve.points {
                prop_assert!(covered.insert((pt.row, pt.col)), "point repeated");
            }
        }
    }

    #[test]
    fn distance_transform_matches_brute_force(
        seed in any::<u64>(),
        count in 1usize..24,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(usize, usize)> = (0..count)
            .map(|_| (rng.gen_range(0usize..20), rng.gen_range(0usize..20)))
            .collect();
        let truth = EdgeMap::from_pixels(20, 20, pts.clone());
        // one detected pixel probes the transform at a random location
        let probe = (rng.gen_range(0usize..20), rng.gen_range(0usize..20));
        let detected = EdgeMap::from_pixels(20, 20, [probe]);
        let got = fom(&detected, &truth, &FomParams::default()).unwrap();
        let d2 = pts
            .iter()
            .map(|&(r, c)| {
                let dr = probe.0 as f64 - r as f64;
                let dc = probe.1 as f64 - c as f64;
                dr * dr + dc * dc
            })
            .fold(f64::INFINITY, f64::min);
        let want = (1.0 / (1.0 + 0.11 * d2)) / truth.count().max(1) as f64;
        prop_assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn spurious_pixels_never_raise_fom(
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(usize, usize)> = (0..8)
            .map(|_| (rng.gen_range(0usize..16), rng.gen_range(0usize..16)))
            .collect();
        let truth = EdgeMap::from_pixels(16, 16, pts.clone());
        let base = fom(&truth, &truth, &FomParams::default()).unwrap();
        prop_assert_eq!(base, 1.0);
        let mut extra = pts.clone();
        let spur = (rng.gen_range(0usize..16), rng.gen_range(0usize..16));
        prop_assume!(!pts.contains(&spur));
        extra.push(spur);
        let padded = EdgeMap::from_pixels(16, 16, extra);
        prop_assert!(fom(&padded, &truth, &FomParams::default()).unwrap() < base);
    }

    #[test]
    fn dyadic_schedule_round_trips(
        finest in 1.0f64..16.0,
        levels in 1usize..6,
    ) {
        let sched = ScaleSchedule::dyadic(finest, levels).unwrap();
        let again = ScaleSchedule::from_scales(
            sched.scales().to_vec(),
            ScheduleKind::Dyadic,
        )
        .unwrap();
        prop_assert_eq!(sched, again);
    }
}
