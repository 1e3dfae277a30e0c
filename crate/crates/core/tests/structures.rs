mod common;

use common::*;
use proptest::prelude::*;
use sketchsolve::oracle;
use sketchsolve::{SampledMatrix, SampledVector};

#[test]
fn two_stage_law_is_entry_law_exhaustively() {
    let mut r = rng(1);
    for m in 1..=8 {
        for n in 1..=8 {
            let mut a = random_matrix(&mut r, m, n);
            // zero out a row and a column to exercise empty branches
            if m > 1 {
                a.row_mut(m - 1).fill(c(0.0, 0.0));
            }
            if n > 1 {
                a.column_mut(0).fill(c(0.0, 0.0));
            }
            let s = SampledMatrix::from_dense(&a, false).unwrap();
            let fro = a.iter().map(|z| z.norm_sqr()).sum::<f64>();
            for i in 0..m {
                let row_sq = s.row_norm_sq_unmetered(i);
                let p_row = row_sq / s.frobenius_sq();
                for j in 0..n {
                    let p_in = if row_sq > 0.0 {
                        a[(i, j)].norm_sqr() / row_sq
                    } else {
                        0.0
                    };
                    let want = a[(i, j)].norm_sqr() / fro;
                    assert!((p_row * p_in - want).abs() <= 1e-12, "({m}x{n}) entry ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn two_stage_sampling_passes_chi_square() {
    let mut r = rng(2);
    let a = random_matrix(&mut r, 6, 5);
    let s = SampledMatrix::from_dense(&a, false).unwrap();
    let entries: Vec<_> = a.transpose().iter().copied().collect();
    let probs = brute_dist(&entries);
    let mut counts = vec![0u64; 30];
    let mut rs = rng(3);
    for _ in 0..100_000 {
        let i = s.sample_row(&mut rs).unwrap();
        let j = s.sample_in_row(i, &mut rs).unwrap();
        counts[i * 5 + j] += 1;
    }
    let (stat, df) = oracle::chi_square(&counts, &probs);
    assert!(stat < oracle::chi_square_critical(df, 1e-3), "chi2 {stat} df {df}");
}

#[test]
fn empirical_tv_concentrates_at_the_multinomial_rate() {
    let n = 64;
    let draws = 100_000;
    let bound = 3.0 * (n as f64 / draws as f64).sqrt();
    let trials = 100;
    let mut ok = 0;
    for t in 0..trials {
        let mut r = rng(100 + t);
        let v = SampledVector::build(&random_vec(&mut r, n)).unwrap();
        let probs = brute_dist(v.values());
        let mut counts = vec![0u64; n];
        for _ in 0..draws {
            counts[v.sample(&mut r).unwrap()] += 1;
        }
        if brute_tv(&empirical(&counts), &probs) <= bound {
            ok += 1;
        }
    }
    assert!(ok as f64 >= 0.99 * trials as f64, "{ok}/{trials}");
}

#[test]
fn every_access_bumps_exactly_one_counter() {
    let a = SampledMatrix::from_dense(&random_matrix(&mut rng(4), 4, 4), true).unwrap();
    let mut r = rng(5);
    let total = |s: &SampledMatrix| s.ledger_snapshot().total();
    let ops: Vec<Box<dyn Fn(&SampledMatrix, &mut rand_chacha::ChaCha8Rng)>> = vec![
        Box::new(|s, _| {
            s.entry(1, 2).unwrap();
        }),
        Box::new(|s, _| {
            s.row_norm(3).unwrap();
        }),
        Box::new(|s, _| {
            s.frobenius_sq();
        }),
        Box::new(|s, r| {
            s.sample_row(r).unwrap();
        }),
        Box::new(|s, r| {
            s.sample_in_row(0, r).unwrap();
        }),
        Box::new(|s, _| {
            s.col_norm(1).unwrap();
        }),
        Box::new(|s, r| {
            s.sample_col(r).unwrap();
        }),
        Box::new(|s, r| {
            s.sample_in_col(2, r).unwrap();
        }),
    ];
    for op in &ops {
        let before = total(&a);
        op(&a, &mut r);
        assert_eq!(total(&a), before + 1);
    }
}

#[test]
fn row_norm_tree_matches_rows_after_writes() {
    let mut r = rng(6);
    let mut a = SampledMatrix::from_dense(&random_matrix(&mut r, 5, 7), true).unwrap();
    for t in 0..200 {
        let (i, j) = (t % 5, (t * 3) % 7);
        a.write(i, j, gaussian(&mut r)).unwrap();
    }
    let dense = a.to_dense();
    let fro: f64 = dense.iter().map(|z| z.norm_sqr()).sum();
    assert!((a.frobenius_sq() - fro).abs() <= 1e-12 * fro);
    for i in 0..5 {
        let row: f64 = dense.row(i).iter().map(|z| z.norm_sqr()).sum();
        assert!((a.row_norm(i).unwrap().powi(2) - row).abs() <= 1e-12 * row);
    }
    assert!(a.consistency_defect() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn writes_round_trip(
        init in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..40),
        writes in prop::collection::vec((any::<prop::sample::Index>(), -1e3f64..1e3, -1e3f64..1e3), 0..100),
    ) {
        let vals: Vec<_> = init.iter().map(|&(a, b)| c(a, b)).collect();
        let mut v = SampledVector::build(&vals).unwrap();
        let mut shadow = vals.clone();
        for (idx, re, im) in writes {
            let i = idx.index(shadow.len());
            v.write(i, c(re, im)).unwrap();
            shadow[i] = c(re, im);
        }
        for (i, z) in shadow.iter().enumerate() {
            prop_assert_eq!(v.read(i).unwrap(), *z);
        }
        let brute = norm_sq(&shadow);
        prop_assert!((v.norm_sq() - brute).abs() <= 1e-12 * brute.max(f64::MIN_POSITIVE) + 1e-300);
        prop_assert!(v.min_node() >= 0.0);
    }

    #[test]
    fn row_probabilities_match_the_formula(
        rows in prop::collection::vec(prop::collection::vec(-10f64..10.0, 3), 1..12),
    ) {
        let m = rows.len();
        let flat: Vec<_> = rows.iter().flatten().map(|&x| c(x, 0.0)).collect();
        let a = SampledMatrix::from_row_major(&flat, (m, 3), false).unwrap();
        let fro: f64 = flat.iter().map(|z| z.norm_sqr()).sum();
        prop_assume!(fro > 0.0);
        for (i, row) in rows.iter().enumerate() {
            let want: f64 = row.iter().map(|x| x * x).sum::<f64>() / fro;
            let got = a.row_norm_sq_unmetered(i) / a.frobenius_sq();
            prop_assert!((got - want).abs() <= 1e-12);
        }
    }
}
