use super::{ComplexMatrix, NumericsError, C64};

/// Solves `a · X = b` by LU with partial pivoting. `b` may hold several columns.
pub fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    let n = a.require_square()?;
    if b.rows() != n {
        return Err(NumericsError::DimensionMismatch(format!(
            "lu_solve: {}x{} system with {} right-hand rows",
            n,
            n,
            b.rows()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let nrhs = b.cols();
    for k in 0..n {
        let (p, pmax) =
            (k..n).map(|i| (i, lu[(i, k)].norm())).fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if pmax == 0.0 {
            return Err(NumericsError::Singular);
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            for j in 0..nrhs {
                let t = x[(k, j)];
                x[(k, j)] = x[(p, j)];
                x[(p, j)] = t;
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            lu[(i, k)] = f;
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
            for j in 0..nrhs {
                let u = x[(k, j)];
                x[(i, j)] -= f * u;
            }
        }
    }
    for j in 0..nrhs {
        for i in (0..n).rev() {
            let mut s = x[(i, j)];
            for k in i + 1..n {
                s -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = s / lu[(i, i)];
        }
    }
    if !x.is_finite() {
        return Err(NumericsError::Singular);
    }
    Ok(x)
}
