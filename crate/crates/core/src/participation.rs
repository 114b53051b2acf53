//! Classical participation factors `p_ki = u_k^i w_k^i`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::numerics::eig_biorthogonal;

/// States along rows, modes along columns in the sorted spectrum order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipationMatrix {
    pub eigenvalues: Vec<Complex64>,
    pub entries: DMatrix<Complex64>,
}

impl ParticipationMatrix {
    pub fn magnitudes(&self) -> DMatrix<f64> {
        self.entries.map(|p| p.norm())
    }

    /// Magnitudes of one mode's column.
    pub fn mode(&self, i: usize) -> Vec<f64> {
        self.entries.column(i).iter().map(|p| p.norm()).collect()
    }

    pub fn column_sum(&self, i: usize) -> Complex64 {
        self.entries.column(i).sum()
    }

    /// State with the largest |p_ki| in mode `i`; lowest index on ties.
    pub fn dominant_state(&self, i: usize) -> usize {
        let col = self.mode(i);
        let mut best = 0;
        for (k, &v) in col.iter().enumerate() {
            if v > col[best] {
                best = k;
            }
        }
        best
    }
}

pub fn participation_matrix(a: &DMatrix<f64>) -> Result<ParticipationMatrix> {
    let eig = eig_biorthogonal(a)?;
    let n = eig.len();
    let entries = DMatrix::from_fn(n, n, |k, i| eig.left[(i, k)] * eig.right[(k, i)]);
    Ok(ParticipationMatrix {
        eigenvalues: eig.values,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    use crate::error::Error;
    use crate::models::participation_counterexample;

    #[test]
    fn diagonal_gives_identity() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -3.0, -2.0]));
        let p = participation_matrix(&a).unwrap();
        // Sorted spectrum is (-1, -2, -3); state k owns eigenvalue a_kk.
        let owner = [0, 2, 1];
        for (i, &k) in owner.iter().enumerate() {
            assert!((p.entries[(k, i)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            assert_eq!(p.dominant_state(i), k);
        }
        assert!((p.magnitudes().sum() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn counterexample_is_identity() {
        let p = participation_matrix(participation_counterexample().a()).unwrap();
        let identity = DMatrix::<f64>::identity(2, 2);
        assert!((p.magnitudes() - identity).amax() < 1e-6);
        assert!((p.eigenvalues[0].re + 0.2231).abs() < 1e-12);
    }

    #[test]
    fn complex_columns_sum_to_one() {
        let a = DMatrix::from_row_slice(3, 3, &[-0.1, 2.0, 0.3, -2.0, -0.1, 0.0, 0.5, 0.1, -1.0]);
        let p = participation_matrix(&a).unwrap();
        assert!(p.eigenvalues[0].im != 0.0);
        for i in 0..3 {
            assert!((p.column_sum(i) - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn defective_passthrough() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            participation_matrix(&a),
            Err(Error::DefectiveMatrix { .. })
        ));
    }
}
