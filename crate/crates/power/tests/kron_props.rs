use itflow_power::dynamics::{kron_reduce, DaeBlocks};
use itflow_power::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(r: usize, c: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
}

/// Blocks together with a random reordering of the states and of the
/// algebraic variables.
fn blocks() -> impl Strategy<Value = (DaeBlocks, DMatrix<f64>, DMatrix<f64>)> {
    (1usize..5, 1usize..5).prop_flat_map(|(nx, ny)| {
        // A dominant diagonal keeps the algebraic block comfortably invertible.
        (
            matrix(nx, nx),
            matrix(nx, ny),
            matrix(ny, nx),
            matrix(ny, ny),
            Just((0..nx).collect::<Vec<_>>()).prop_shuffle(),
            Just((0..ny).collect::<Vec<_>>()).prop_shuffle(),
        )
            .prop_map(move |(a, b, c, d, sx, sy)| {
                let d = d + DMatrix::identity(ny, ny) * (ny as f64 + 1.0);
                (DaeBlocks { a, b, c, d }, permutation(&sx), permutation(&sy))
            })
    })
}

fn permutation(order: &[usize]) -> DMatrix<f64> {
    let n = order.len();
    DMatrix::from_fn(n, n, |r, c| if order[r] == c { 1.0 } else { 0.0 })
}

proptest! {
    #[test]
    fn algebraic_ordering_is_irrelevant((blk, _, p) in blocks()) {
        let permuted = DaeBlocks {
            a: blk.a.clone(),
            b: &blk.b * p.transpose(),
            c: &p * &blk.c,
            d: &p * &blk.d * p.transpose(),
        };
        let diff = kron_reduce(&blk).unwrap() - kron_reduce(&permuted).unwrap();
        prop_assert!(diff.amax() < 1e-10);
    }

    #[test]
    fn state_permutation_commutes((blk, p, _) in blocks()) {
        let permuted = DaeBlocks {
            a: &p * &blk.a * p.transpose(),
            b: &p * &blk.b,
            c: &blk.c * p.transpose(),
            d: blk.d.clone(),
        };
        let expected = &p * kron_reduce(&blk).unwrap() * p.transpose();
        prop_assert!((kron_reduce(&permuted).unwrap() - expected).amax() < 1e-10);
    }
}

#[test]
fn rank_deficient_algebra_is_named() {
    let blk = DaeBlocks {
        a: DMatrix::identity(2, 2),
        b: DMatrix::zeros(2, 2),
        c: DMatrix::zeros(2, 2),
        d: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]),
    };
    let err = kron_reduce(&blk).unwrap_err();
    assert!(matches!(err, Error::SingularAlgebraicJacobian { .. }));
    assert_eq!(err.name(), "SingularAlgebraicJacobian");
}
