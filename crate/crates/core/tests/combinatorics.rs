//! Pairing statistics and moment polynomials against literal brute force.

use proptest::prelude::*;
use typeb_core::partitions::{
    colorings, count_pairings, pairings, partition_class, set_partitions, set_partitions_min2, Pairing, TypeBPairing,
};
use typeb_core::poly::IntPoly;
use typeb_core::wick::{q_moment, qt_moment, typeb_moment_scalar, VARS_Q, VARS_Q_RHO};

/// All set partitions of `0..k` as block lists, by inserting each element
/// into an existing block or a new one.
fn naive_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![vec![]];
    for x in 0..k {
        let mut next = Vec::new();
        for p in &out {
            for b in 0..p.len() {
                let mut q = p.clone();
                q[b].push(x);
                next.push(q);
            }
            let mut q = p.clone();
            q.push(vec![x]);
            next.push(q);
        }
        out = next;
    }
    out
}

fn naive_pairings(n: usize) -> Vec<Vec<(usize, usize)>> {
    naive_partitions(2 * n)
        .into_iter()
        .filter(|p| p.iter().all(|b| b.len() == 2))
        .map(|p| p.into_iter().map(|b| (b[0] + 1, b[1] + 1)).collect())
        .collect()
}

fn literal_crossings(blocks: &[(usize, usize)]) -> usize {
    let mut c = 0;
    for &(w1, z1) in blocks {
        for &(w2, z2) in blocks {
            if w1 < w2 && w2 < z1 && z1 < z2 {
                c += 1;
            }
        }
    }
    c
}

fn literal_nestings(blocks: &[(usize, usize)]) -> usize {
    let mut c = 0;
    for &(w1, z1) in blocks {
        for &(w2, z2) in blocks {
            if w1 < w2 && z2 < z1 {
                c += 1;
            }
        }
    }
    c
}

/// `sum_{pairings, colorings} rho^NB q^(Cr + 2 CNB)` by direct enumeration,
/// with the inner-negative nesting count taken from the definition.
fn literal_typeb(n: usize) -> IntPoly {
    let mut poly = IntPoly::zero(VARS_Q_RHO);
    for blocks in naive_pairings(n) {
        let cr = literal_crossings(&blocks);
        for mask in 0u32..1 << n {
            let neg = |t: usize| mask >> t & 1 == 1;
            let mut cnb = 0;
            for (i, &(w1, z1)) in blocks.iter().enumerate() {
                for (j, &(w2, z2)) in blocks.iter().enumerate() {
                    if i != j && w1 < w2 && z2 < z1 && neg(j) {
                        cnb += 1;
                    }
                }
            }
            poly.add_term((cr + 2 * cnb) as u32, mask.count_ones(), 1);
        }
    }
    poly
}

#[test]
fn pairing_counts_are_double_factorials() {
    let mut df = 1u128;
    for n in 1..=6 {
        df *= 2 * n as u128 - 1;
        assert_eq!(count_pairings(n), df);
        assert_eq!(pairings(n).count() as u128, df);
    }
    assert_eq!(naive_pairings(4).len(), 105);
}

#[test]
fn statistics_match_definitions() {
    for n in 1..=5 {
        let mut seen = 0;
        for p in pairings(n) {
            let blocks = p.blocks().to_vec();
            assert_eq!(p.crossings(), literal_crossings(&blocks));
            assert_eq!(p.nestings(), literal_nestings(&blocks));
            seen += 1;
        }
        assert_eq!(seen, naive_pairings(n).len());
    }
}

#[test]
fn cnb_matches_definition() {
    let p = Pairing::new(&[(1, 6), (2, 5), (3, 4)]).unwrap();
    for c in colorings(&p) {
        let mut cnb = 0;
        for (i, &(w1, z1)) in p.blocks().iter().enumerate() {
            for (j, &(w2, z2)) in p.blocks().iter().enumerate() {
                if i != j && w1 < w2 && z2 < z1 && c.is_negative(j) {
                    cnb += 1;
                }
            }
        }
        assert_eq!(c.cnb(), cnb);
    }
    let all_negative = TypeBPairing::new(p, 0b111).unwrap();
    assert_eq!(all_negative.cnb(), 3);
}

#[test]
fn typeb_polynomial_matches_literal_sum() {
    for n in 0..=5 {
        assert_eq!(typeb_moment_scalar(2 * n).unwrap(), literal_typeb(n), "order {}", 2 * n);
    }
}

#[test]
fn reductions_to_q_gaussian() {
    for n in 0..=5 {
        let q = q_moment(2 * n).unwrap();
        let b = typeb_moment_scalar(2 * n).unwrap().substitute_second(&0).with_vars(VARS_Q);
        assert_eq!(b, q);
        let qt = qt_moment(2 * n).unwrap().substitute_second(&1).with_vars(VARS_Q);
        assert_eq!(qt, q);
    }
}

#[test]
fn sixth_q_moment_from_crossing_counts() {
    let mut hist = [0i64; 4];
    for blocks in naive_pairings(3) {
        hist[literal_crossings(&blocks)] += 1;
    }
    assert_eq!(hist, [5, 6, 3, 1]);
    let q6 = q_moment(6).unwrap();
    for (c, &h) in hist.iter().enumerate() {
        assert_eq!(q6.coeff(c as u32, 0), h);
    }
}

#[test]
fn set_partition_counts() {
    let bell = [1, 1, 2, 5, 15, 52, 203, 877];
    for (k, &b) in bell.iter().enumerate() {
        assert_eq!(set_partitions(k).len(), b);
        let min2 = naive_partitions(k)
            .into_iter()
            .filter(|p| p.iter().all(|b| b.len() >= 2))
            .count();
        assert_eq!(set_partitions_min2(k).len(), min2);
    }
    assert_eq!(set_partitions_min2(6).len(), 41);
}

#[test]
fn partition_class_of_tuples() {
    let c = partition_class(&[7, 3, 7, 3]);
    assert_eq!(c.blocks(), &[vec![1, 3], vec![2, 4]]);
    assert!(c.is_pairing());
    assert_eq!(c.to_pairing().unwrap().crossings(), 1);
}

proptest! {
    #[test]
    fn pair_statistics_partition_all_block_pairs(seed in 0usize..10_395, n in 1usize..=6) {
        let total = count_pairings(n) as usize;
        let p = pairings(n).nth(seed % total).unwrap();
        let pairs = n * (n - 1) / 2;
        prop_assert_eq!(p.crossings() + p.nestings() + p.alignments(), pairs);
    }

    #[test]
    fn reflection_preserves_crossings_and_nestings(seed in 0usize..945, n in 1usize..=5) {
        let total = count_pairings(n) as usize;
        let p = pairings(n).nth(seed % total).unwrap();
        let m = 2 * n + 1;
        let mirrored: Vec<(usize, usize)> = p.blocks().iter().map(|&(w, z)| (m - z, m - w)).collect();
        let r = Pairing::new(&mirrored).unwrap();
        prop_assert_eq!(r.crossings(), p.crossings());
        prop_assert_eq!(r.nestings(), p.nestings());
    }

    #[test]
    fn typeb_polynomial_eval_is_a_sum_over_colorings(q in -1.0f64..1.0, rho in -1.0f64..1.0) {
        let poly = typeb_moment_scalar(6).unwrap();
        let mut direct = 0.0;
        for p in pairings(3) {
            for c in colorings(&p) {
                direct += rho.powi(c.negative_blocks() as i32) * q.powi((p.crossings() + 2 * c.cnb()) as i32);
            }
        }
        prop_assert!((poly.eval(q, rho) - direct).abs() < 1e-12);
    }
}
