use drsdiag::linalg::{eigh, smat, svec, SymMat};
use proptest::prelude::*;

fn symmetric(max_order: usize) -> impl Strategy<Value = SymMat<f64>> {
    (1..=max_order).prop_flat_map(|n| {
        proptest::collection::vec(-10.0f64..10.0, n * (n + 1) / 2).prop_map(move |packed| {
            let mut m = SymMat::zeros(n);
            let mut it = packed.into_iter();
            for i in 0..n {
                for j in 0..=i {
                    m.set(i, j, it.next().unwrap());
                }
            }
            m
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eigh_reconstructs_and_is_orthonormal(m in symmetric(8)) {
        let n = m.order();
        let e = eigh(&m).unwrap();
        let scale = m.frobenius().max(1.0);
        let r = e.reconstruct();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((r.get(i, j) - m.get(i, j)).abs());
                let qtq: f64 = (0..n).map(|k| e.vectors[(k, i)] * e.vectors[(k, j)]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                prop_assert!((qtq - id).abs() <= 1e-12, "QᵀQ[{i},{j}] = {qtq}");
            }
        }
        prop_assert!(worst / scale <= 1e-12, "relative reconstruction error {}", worst / scale);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn svec_roundtrip_within_one_ulp(m in symmetric(8)) {
        // bit-exact recovery is checked (and reported) by the acceptance target
        let back = smat(svec(&m).as_slice()).unwrap();
        for i in 0..m.order() {
            for j in 0..=i {
                let (a, b) = (back.get(i, j), m.get(i, j));
                prop_assert!((a - b).abs() <= f64::EPSILON * b.abs(), "({i},{j}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn svec_preserves_inner_products(
        (a, b) in (1usize..=8).prop_flat_map(|n| (symmetric_of(n), symmetric_of(n)))
    ) {
        let lhs = svec(&a).dot(&svec(&b));
        let rhs = a.trace_product(&b);
        prop_assert!((lhs - rhs).abs() <= 1e-14 * (1.0 + a.frobenius() * b.frobenius()), "{lhs} vs {rhs}");
    }
}

fn symmetric_of(n: usize) -> impl Strategy<Value = SymMat<f64>> {
    proptest::collection::vec(-10.0f64..10.0, n * n)
        .prop_map(move |raw| SymMat::from_fn(n, |i, j| raw[i.max(j) * n + i.min(j)]))
}
