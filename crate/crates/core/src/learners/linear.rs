use crate::error::Result;
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::{mean, Real};

/// Least squares with intercept on column-standardized data.
///
/// Falls back to a vanishing ridge when `XᵀX` is singular (collinear or
/// more features than rows), which picks the minimum-norm-like solution.
pub(crate) fn least_squares<T: Real>(x: &Matrix<T>, y: &[T]) -> Result<(Vec<T>, T)> {
    let p = x.cols();
    let x_means: Vec<T> = (0..p).map(|j| mean(&x.column(j))).collect();
    let y_mean = mean(y);
    let xc = Matrix::from_fn(x.rows(), p, |r, c| x[(r, c)] - x_means[c]);
    let yc: Vec<T> = y.iter().map(|&v| v - y_mean).collect();
    let xtx = xc.tr_matmul(&xc)?;
    let xty = xc.tr_vec(&yc)?;

    let trace = xtx.diagonal().into_iter().sum::<T>() / T::from_usize_lossy(p);
    let mut ridge = T::zero();
    let coef = loop {
        let mut a = xtx.clone();
        for j in 0..p {
            a[(j, j)] = a[(j, j)] + ridge;
        }
        match Cholesky::factor(&a, None) {
            Ok(ch) => break ch.solve_vec(&xty)?,
            Err(e) => {
                let base = trace.max(T::one());
                ridge = if ridge == T::zero() {
                    base * T::lit(1e-10)
                } else {
                    ridge * T::lit(100.0)
                };
                if ridge > base * T::lit(1e6) {
                    return Err(e);
                }
            }
        }
    };
    let intercept = y_mean
        - coef
            .iter()
            .zip(&x_means)
            .fold(T::zero(), |acc, (&b, &m)| acc + b * m);
    Ok((coef, intercept))
}
