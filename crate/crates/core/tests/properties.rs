use proptest::prelude::*;

use sdpsense::mpla::{
    default_rank_tol, penrose_residuals, pseudoinverse, svd, sym_eig, MpMatrix, MpScalar,
};
use sdpsense::sdpmodel::{format_sdpa, parse_sdpa, BlockMatrix, SdpProblem};

fn entries(n: usize, m: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-50i64..=50, n * m)
}

fn symmetric(prec: u32, n: usize, raw: &[i64]) -> MpMatrix {
    let scale = MpScalar::ratio(prec, 1, 7);
    let a = MpMatrix::from_fn(prec, n, n, |i, j| {
        &MpScalar::from_i64(prec, raw[i * n + j]) * &scale
    });
    a.add(&a.transpose())
}

fn small(x: &MpScalar, bits: i32) -> bool {
    *x <= MpScalar::pow2(x.prec(), -bits)
}

fn relative(err: MpScalar, norm: &MpScalar) -> MpScalar {
    let one = MpScalar::one(err.prec());
    &err / &norm.max(&one)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigendecomposition_reconstructs((n, raw) in (1usize..=6).prop_flat_map(|n| (Just(n), entries(n, n)))) {
        let p = 256;
        let a = symmetric(p, n, &raw);
        let e = sym_eig(&a, &MpScalar::pow2(p, -(p as i32))).unwrap();
        let err = relative(e.reconstruct().sub(&a).frobenius_norm(), &a.frobenius_norm());
        prop_assert!(small(&err, 200), "reconstruction {:e}", err.to_f64());
        let q = &e.eigenvectors;
        let orth = q.t_matmul(q).sub(&MpMatrix::identity(p, n)).max_abs();
        prop_assert!(small(&orth, 200), "orthogonality {:e}", orth.to_f64());
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn singular_values_reconstruct((r, c, raw) in (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| (Just(r), Just(c), entries(r, c)))) {
        let p = 256;
        let a = MpMatrix::from_fn(p, r, c, |i, j| MpScalar::from_i64(p, raw[i * c + j]));
        let s = svd(&a).unwrap();
        let k = s.sigma.len();
        let mut us = s.u.clone();
        for j in 0..k {
            let col: Vec<MpScalar> = s.u.column(j).iter().map(|x| x * &s.sigma[j]).collect();
            us.set_column(j, &col);
        }
        let err = relative(us.matmul(&s.v.transpose()).sub(&a).frobenius_norm(), &a.frobenius_norm());
        prop_assert!(small(&err, 200), "svd reconstruction {:e}", err.to_f64());
        prop_assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.sigma.iter().all(|x| !x.is_sign_negative() || x.is_zero()));
    }

    #[test]
    fn pseudoinverse_satisfies_penrose(
        (r, c, k, left, right) in (2usize..=7, 2usize..=7, 1usize..=3)
            .prop_flat_map(|(r, c, k)| (Just(r), Just(c), Just(k), entries(r, k), entries(k, c)))
    ) {
        // Rank at most k by construction.
        let p = 1024;
        let l = MpMatrix::from_fn(p, r, k, |i, j| MpScalar::from_i64(p, left[i * k + j]));
        let rt = MpMatrix::from_fn(p, k, c, |i, j| MpScalar::from_i64(p, right[i * c + j]));
        let s = l.matmul(&rt);
        let pinv = pseudoinverse(&s, &default_rank_tol(p)).unwrap();
        for (i, res) in penrose_residuals(&s, &pinv).iter().enumerate() {
            prop_assert!(small(res, 200), "identity {} residual {:e}", i + 1, res.to_f64());
        }
    }

    #[test]
    fn frobenius_dot_is_symmetric_and_bilinear(
        (n, a, b, c, s) in (1usize..=5).prop_flat_map(|n| (Just(n), entries(n, n), entries(n, n), entries(n, n), -9i64..=9))
    ) {
        let p = 128;
        let (a, b, c) = (symmetric(p, n, &a), symmetric(p, n, &b), symmetric(p, n, &c));
        let (a, b, c) = (
            BlockMatrix::new(vec![a]),
            BlockMatrix::new(vec![b]),
            BlockMatrix::new(vec![c]),
        );
        let s = MpScalar::from_i64(p, s);
        prop_assert_eq!(a.dot(&b), b.dot(&a));
        let lhs = a.scale(&s).add(&c).dot(&b);
        let rhs = &(&s * &a.dot(&b)) + &c.dot(&b);
        prop_assert!(small(&(&lhs - &rhs).abs(), 100));
    }

    #[test]
    fn sdpa_text_round_trips(
        (n1, n2, m, raw) in (1usize..=4, 1usize..=3, 1usize..=4)
            .prop_flat_map(|(n1, n2, m)| (Just(n1), Just(n2), Just(m), entries(m + 1, n1 * n1 + n2 * n2 + 1)))
    ) {
        let p = 256;
        let width = n1 * n1 + n2 * n2 + 1;
        let a: Vec<BlockMatrix> = (0..=m)
            .map(|k| {
                let row = &raw[k * width..(k + 1) * width];
                BlockMatrix::new(vec![
                    symmetric(p, n1, &row[..n1 * n1]),
                    symmetric(p, n2, &row[n1 * n1..n1 * n1 + n2 * n2]),
                ])
            })
            .collect();
        let b = (1..=m).map(|k| MpScalar::from_i64(p, raw[k * width - 1])).collect();
        let prob = SdpProblem::new(vec![n1, n2], a, b).unwrap();
        let back = parse_sdpa(&format_sdpa(&prob), p).unwrap();
        prop_assert!(back.warnings.is_empty());
        prop_assert_eq!(back.problem, prob);
    }
}
