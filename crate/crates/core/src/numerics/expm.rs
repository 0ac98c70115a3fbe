//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (degree selection after Higham, SIAM J. Matrix Anal. Appl. 26, 2005).

use super::{lu_solve, ComplexMatrix, NumericsError, C64};

const THETA: [(usize, f64); 4] =
    [(3, 1.495585217958292e-2), (5, 2.53939833006323e-1), (7, 9.504178996162932e-1), (9, 2.097847961257068)];
const THETA_13: f64 = 5.371920351148152;

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        13 => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
        _ => unreachable!("unsupported Padé degree {m}"),
    }
}

fn axpy_sum(terms: &[(f64, &ComplexMatrix)], n: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n, n);
    for (coef, m) in terms {
        out = &out + &m.scale_real(*coef);
    }
    out
}

/// `exp(m)` for a square matrix.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    let n = m.require_square()?;
    if !m.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    let eye = ComplexMatrix::identity(n);
    let norm = m.norm_one();
    if norm == 0.0 {
        return Ok(eye);
    }

    for &(deg, theta) in &THETA {
        if norm <= theta {
            return pade_low(m, deg, &eye);
        }
    }

    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scaled = m.scale_real(0.5f64.powi(s));
    let b = pade_coefficients(13);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &(&a6 * &axpy_sum(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n))
        + &axpy_sum(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &eye)], n);
    let u = &scaled * &u_inner;
    let v = &(&a6 * &axpy_sum(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n))
        + &axpy_sum(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &eye)], n);
    let mut r = lu_solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    Ok(r)
}

fn pade_low(a: &ComplexMatrix, deg: usize, eye: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    let b = pade_coefficients(deg);
    let n = a.rows();
    let a2 = a * a;
    // even powers A^0, A^2, ..., A^(deg-1)
    let mut powers = vec![eye.clone()];
    for k in 1..=deg / 2 {
        let next = &powers[k - 1] * &a2;
        powers.push(next);
    }
    let mut u_inner = ComplexMatrix::zeros(n, n);
    let mut v = ComplexMatrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        u_inner = &u_inner + &p.scale(C64::new(b[2 * k + 1], 0.0));
        v = &v + &p.scale(C64::new(b[2 * k], 0.0));
    }
    let u = a * &u_inner;
    lu_solve(&(&v - &u), &(&v + &u))
}
