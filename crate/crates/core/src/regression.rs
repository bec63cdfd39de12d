//! Linear moment estimators with individual-clustered sandwich variances.
//!
//! Every estimator in the crate solves `Σᵢ Qᵢ'(yᵢ − Hᵢ θ) = 0` for some
//! per-cluster weighting `Qᵢ`: GLS uses `Qᵢ = Wᵢ Hᵢ`, IV uses the instrument
//! matrix, 2SLS the first-stage projections. The sandwich is
//! `A⁻¹ M A⁻ᵀ` with `A = Σ Qᵢ'Hᵢ / n` and `M = Σ sᵢ sᵢ' / n`, `sᵢ = Qᵢ'eᵢ`.

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Lu, Matrix};
use crate::scalar::Real;

/// Normal quantile used for two-sided 95% intervals.
pub const Z95: f64 = 1.96;

/// One cluster's contribution to the moment system.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentBlock<T> {
    pub q: Matrix<T>,
    pub h: Matrix<T>,
    pub y: Vec<T>,
}

impl<T: Real> MomentBlock<T> {
    /// GLS block with `Q = W H`.
    pub fn gls(h: Matrix<T>, y: Vec<T>, weight: &Matrix<T>) -> Result<Self> {
        let q = weight.matmul(&h)?;
        Self::new(q, h, y)
    }

    pub fn new(q: Matrix<T>, h: Matrix<T>, y: Vec<T>) -> Result<Self> {
        if q.rows() != h.rows() || h.rows() != y.len() || q.cols() != h.cols() {
            return Err(Error::Dimension(format!(
                "moment block with Q {}x{}, H {}x{}, y {}",
                q.rows(),
                q.cols(),
                h.rows(),
                h.cols(),
                y.len()
            )));
        }
        Ok(Self { q, h, y })
    }

    pub fn k(&self) -> usize {
        self.h.cols()
    }

    pub fn residuals(&self, theta: &[T]) -> Vec<T> {
        (0..self.h.rows())
            .map(|r| {
                let fit = self
                    .h
                    .row(r)
                    .iter()
                    .zip(theta)
                    .fold(T::zero(), |a, (&h, &t)| a + h * t);
                self.y[r] - fit
            })
            .collect()
    }

    /// `Q'e` at `theta`.
    pub fn score(&self, theta: &[T]) -> Vec<T> {
        self.q
            .tr_vec(&self.residuals(theta))
            .expect("consistent block")
    }
}

fn dimension<T: Real>(blocks: &[MomentBlock<T>]) -> Result<usize> {
    let k = blocks
        .first()
        .map(MomentBlock::k)
        .ok_or_else(|| Error::InvalidInput("no moment blocks".into()))?;
    if blocks.iter().any(|b| b.k() != k) {
        return Err(Error::Dimension(
            "moment blocks disagree on column count".into(),
        ));
    }
    Ok(k)
}

/// `Σ Qᵢ'Hᵢ` and `Σ Qᵢ'yᵢ`.
pub fn cross_products<T: Real>(blocks: &[MomentBlock<T>]) -> Result<(Matrix<T>, Vec<T>)> {
    let k = dimension(blocks)?;
    let mut a = Matrix::zeros(k, k);
    let mut b = vec![T::zero(); k];
    for blk in blocks {
        a = a.add(&blk.q.tr_matmul(&blk.h)?)?;
        for (acc, v) in b.iter_mut().zip(blk.q.tr_vec(&blk.y)?) {
            *acc = *acc + v;
        }
    }
    Ok((a, b))
}

/// Solves the moment equations.
///
/// A rank-deficient `H` is reported by name (`names` labels the columns);
/// a singular non-symmetric system is reported as a weak instrument.
pub fn solve_moments<T: Real>(blocks: &[MomentBlock<T>], names: &[String]) -> Result<Vec<T>> {
    let (a, b) = cross_products(blocks)?;
    let scale = a.as_slice().iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if !a.all_finite() || !b.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("moment cross products".into()));
    }
    let k = a.rows();
    let mut gram = Matrix::zeros(k, k);
    for blk in blocks {
        gram = gram.add(&blk.h.tr_matmul(&blk.h)?)?;
    }
    Cholesky::factor(&gram, Some(names))?;
    let solved = if a.asymmetry() <= T::epsilon() * T::lit(16.0) * scale {
        Cholesky::factor(&a.symmetrize(), None).and_then(|c| c.solve_vec(&b))
    } else {
        Lu::factor(&a).and_then(|lu| lu.solve_vec(&b))
    };
    match solved {
        Err(Error::Singular(msg)) => Err(Error::WeakInstrument(msg)),
        other => other,
    }
}

/// `Σ Qᵢ'Hᵢ / n`.
pub fn bread<T: Real>(blocks: &[MomentBlock<T>], n: T) -> Result<Matrix<T>> {
    Ok(cross_products(blocks)?.0.scale(T::one() / n))
}

/// `Σ sᵢ sᵢ' / n` with cluster scores `sᵢ = Qᵢ'(yᵢ − Hᵢθ)`.
pub fn meat<T: Real>(blocks: &[MomentBlock<T>], theta: &[T], n: T) -> Result<Matrix<T>> {
    let k = dimension(blocks)?;
    if theta.len() != k {
        return Err(Error::Dimension(format!(
            "theta of length {} for {k} columns",
            theta.len()
        )));
    }
    let mut m = Matrix::zeros(k, k);
    for blk in blocks {
        let s = blk.score(theta);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = m[(i, j)] + s[i] * s[j];
            }
        }
    }
    Ok(m.scale(T::one() / n))
}

/// `A⁻¹ M A⁻ᵀ`, symmetrized.
pub fn sandwich_from_parts<T: Real>(bread: &Matrix<T>, meat: &Matrix<T>) -> Result<Matrix<T>> {
    let inv = bread
        .inverse()
        .map_err(|e| Error::Singular(format!("sandwich bread: {e}")))?;
    Ok(inv.matmul(meat)?.matmul(&inv.transpose())?.symmetrize())
}

/// Point estimate with its sandwich variance.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFit<T> {
    pub theta: Vec<T>,
    /// Asymptotic variance of `√n (θ̂ − θ)`.
    pub sigma: Matrix<T>,
    pub n: usize,
}

impl<T: Real> MomentFit<T> {
    pub fn standard_errors(&self) -> Vec<T> {
        standard_errors(&self.sigma, self.n)
    }

    pub fn ci95(&self) -> Vec<(T, T)> {
        ci95(&self.theta, &self.standard_errors())
    }
}

/// Solves and attaches the clustered sandwich; `n` is the observation count used for scaling.
pub fn fit_moments<T: Real>(
    blocks: &[MomentBlock<T>],
    names: &[String],
    n: usize,
) -> Result<MomentFit<T>> {
    let theta = solve_moments(blocks, names)?;
    let nt = T::from_usize_lossy(n);
    let sigma = sandwich_from_parts(&bread(blocks, nt)?, &meat(blocks, &theta, nt)?)?;
    Ok(MomentFit { theta, sigma, n })
}

pub fn standard_errors<T: Real>(sigma: &Matrix<T>, n: usize) -> Vec<T> {
    let nt = T::from_usize_lossy(n);
    sigma
        .diagonal()
        .into_iter()
        .map(|v| (v.max(T::zero()) / nt).sqrt())
        .collect()
}

pub fn ci95<T: Real>(theta: &[T], se: &[T]) -> Vec<(T, T)> {
    let z = T::lit(Z95);
    theta
        .iter()
        .zip(se)
        .map(|(&t, &s)| (t - z * s, t + z * s))
        .collect()
}
