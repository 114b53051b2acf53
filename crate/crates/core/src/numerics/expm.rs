//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (degree chosen from the 1-norm).

use nalgebra::DMatrix;

use super::{ensure_finite, ensure_square, norm1};
use crate::error::{Error, Result};

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_230e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const PADE_9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Returns `exp(a * t)`.
///
/// Fails with [`Error::Overflow`] when the result cannot be represented,
/// rather than saturating to infinities.
pub fn matrix_exponential(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    ensure_square(a, "matrix_exponential")?;
    ensure_finite(a, "matrix_exponential")?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    let n = a.nrows();
    if t == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let at = a * t;
    let norm = norm1(&at);
    if !norm.is_finite() {
        return Err(Error::Overflow { norm });
    }

    let result = if norm <= THETA_3 {
        pade_low(&at, &PADE_3)
    } else if norm <= THETA_5 {
        pade_low(&at, &PADE_5)
    } else if norm <= THETA_7 {
        pade_low(&at, &PADE_7)
    } else if norm <= THETA_9 {
        pade_low(&at, &PADE_9)
    } else {
        let s = ((norm / THETA_13).log2().ceil()).max(0.0) as i32;
        let scaled = &at / 2f64.powi(s);
        let mut r = pade_13(&scaled)?;
        for _ in 0..s {
            r = &r * &r;
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Overflow { norm });
            }
        }
        Ok(r)
    }?;

    if result.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow { norm });
    }
    Ok(result)
}

fn pade_low(a: &DMatrix<f64>, b: &[f64]) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = DMatrix::identity(n, n);
    let mut u_inner = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    for k in 0..b.len() / 2 {
        v += &power * b[2 * k];
        u_inner += &power * b[2 * k + 1];
        power = &power * &a2;
    }
    let u = a * u_inner;
    solve_pade(u, v)
}

fn pade_13(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let b = &PADE_13;
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = a * (u_hi + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1]);
    let v_hi = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = v_hi + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    solve_pade(u, v)
}

fn solve_pade(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = &v + &u;
    let q = v - u;
    q.lu().solve(&p).ok_or(Error::Overflow {
        norm: f64::INFINITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_generator_is_identity() {
        let e = matrix_exponential(&DMatrix::zeros(2, 2), 1.0).unwrap();
        assert_eq!(e, DMatrix::identity(2, 2));
    }

    #[test]
    fn zero_time_is_exact_identity() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(
            matrix_exponential(&a, 0.0).unwrap(),
            DMatrix::identity(2, 2)
        );
    }

    #[test]
    fn nilpotent_series_truncates() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        for tau in [0.1, 1.0, 7.5, 300.0] {
            let e = matrix_exponential(&a, tau).unwrap();
            let want = DMatrix::from_row_slice(2, 2, &[1.0, tau, 0.0, 1.0]);
            assert!((e - want).norm() < 1e-12 * tau.max(1.0));
        }
    }

    #[test]
    fn diagonal_matches_scalar_exponentials() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-0.2231, -0.9163]));
        let e = matrix_exponential(&a, 1.0).unwrap();
        assert!((e[(0, 0)] - (-0.2231f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - (-0.9163f64).exp()).abs() < 1e-15);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn rotation_generator() {
        // exp([[0, -w], [w, 0]] t) is a rotation by w t.
        let w = 3.0;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -w, w, 0.0]);
        for t in [0.01, 0.3, 2.0, 25.0] {
            let e = matrix_exponential(&a, t).unwrap();
            let (s, c) = (w * t).sin_cos();
            let want = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
            assert!((e - want).norm() < 1e-11, "t = {t}");
        }
    }

    #[test]
    fn overflow_is_reported() {
        let a = DMatrix::from_diagonal_element(2, 2, 1.0);
        match matrix_exponential(&a, 1.0e4) {
            Err(Error::Overflow { norm }) => assert!(norm >= 1.0e4),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn negative_time_rejected() {
        let a = DMatrix::zeros(2, 2);
        assert!(matches!(
            matrix_exponential(&a, -1.0),
            Err(Error::InvalidArgument(_))
        ));
    }
}
