//! Numerical Gateaux derivatives of the `β₁` score in the first-stage nuisance.
//!
//! The nuisance is perturbed as `τg + h·δ`, which moves the control to
//! `τû − h·δ`. Two scores are compared:
//!
//! * plug-in: `x₁'W(τy − τx₁β₁ − τX̃β₂ − ρ(τû − hδ))`, the `β₁` row of the
//!   control-function moment;
//! * orthogonalized: `(A_h x₁)' W (A_h ω)`, where `A_h` removes the span of
//!   `[τX̃, τû − hδ]` (a `W`-weighted projection pooled over individuals)
//!   and `ω` is the structural error net of the control.
//!
//! Derivatives are central differences at each step in the grid.

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Real;

/// One individual's transformed data with its nuisance quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBlock<T> {
    pub ty: Vec<T>,
    pub tx1: Vec<T>,
    pub tx_exog: Matrix<T>,
    /// Control at the unperturbed nuisance.
    pub control: Vec<T>,
    /// Transformed structural error net of the control.
    pub omega: Vec<T>,
    /// Perturbation direction `δ` of the transformed nuisance.
    pub direction: Vec<T>,
    pub weight: Matrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityCheck<T> {
    pub h: Vec<T>,
    /// Derivative estimate of the orthogonalized score at each step.
    pub orthogonal: Vec<T>,
    /// Derivative estimate of the plug-in score at each step.
    pub plugin: Vec<T>,
}

impl<T: Real> OrthogonalityCheck<T> {
    /// `|orthogonal| / |plugin|` at the smallest step.
    pub fn ratio(&self) -> T {
        let i = smallest(&self.h);
        self.orthogonal[i].abs() / self.plugin[i].abs()
    }
}

fn smallest<T: Real>(h: &[T]) -> usize {
    (0..h.len())
        .min_by(|&a, &b| h[a].abs().partial_cmp(&h[b].abs()).expect("finite steps"))
        .expect("non-empty grid")
}

fn shifted_control<T: Real>(b: &ScoreBlock<T>, h: T) -> Vec<T> {
    b.control
        .iter()
        .zip(&b.direction)
        .map(|(&u, &d)| u - h * d)
        .collect()
}

fn exog_and_control<T: Real>(b: &ScoreBlock<T>, h: T) -> Result<Matrix<T>> {
    Matrix::hstack(&[&b.tx_exog, &Matrix::column_vector(&shifted_control(b, h))])
}

fn orthogonal_score<T: Real>(blocks: &[ScoreBlock<T>], h: T) -> Result<T> {
    let us: Vec<Matrix<T>> = blocks
        .iter()
        .map(|b| exog_and_control(b, h))
        .collect::<Result<_>>()?;
    let k = us[0].cols();
    let mut gram = Matrix::zeros(k, k);
    let mut ux = vec![T::zero(); k];
    let mut uw = vec![T::zero(); k];
    let mut wus = Vec::with_capacity(blocks.len());
    for (b, u) in blocks.iter().zip(&us) {
        let wu = b.weight.matmul(u)?;
        gram = gram.add(&u.tr_matmul(&wu)?)?;
        for (acc, v) in ux.iter_mut().zip(wu.tr_vec(&b.tx1)?) {
            *acc = *acc + v;
        }
        for (acc, v) in uw.iter_mut().zip(wu.tr_vec(&b.omega)?) {
            *acc = *acc + v;
        }
        wus.push(wu);
    }
    let chol = Cholesky::factor(&gram, None)?;
    let cx = chol.solve_vec(&ux)?;
    let cw = chol.solve_vec(&uw)?;
    let mut total = T::zero();
    let mut rows = 0;
    for (b, u) in blocks.iter().zip(&us) {
        let px = u.mat_vec(&cx)?;
        let pw = u.mat_vec(&cw)?;
        let ax: Vec<T> = b.tx1.iter().zip(&px).map(|(&x, &p)| x - p).collect();
        let aw: Vec<T> = b.omega.iter().zip(&pw).map(|(&w, &p)| w - p).collect();
        let waw = b.weight.mat_vec(&aw)?;
        total = total + crate::linalg::dot(&ax, &waw);
        rows += b.tx1.len();
    }
    Ok(total / T::from_usize_lossy(rows))
}

fn plugin_score<T: Real>(blocks: &[ScoreBlock<T>], theta: &[T], h: T) -> Result<T> {
    let kx = theta.len() - 2;
    let (beta1, beta2, rho) = (theta[0], &theta[1..1 + kx], theta[1 + kx]);
    let mut total = T::zero();
    let mut rows = 0;
    for b in blocks {
        let u = shifted_control(b, h);
        let e: Vec<T> = (0..b.ty.len())
            .map(|r| {
                let xb = b
                    .tx_exog
                    .row(r)
                    .iter()
                    .zip(beta2)
                    .fold(T::zero(), |a, (&x, &c)| a + x * c);
                b.ty[r] - b.tx1[r] * beta1 - xb - rho * u[r]
            })
            .collect();
        total = total + crate::linalg::dot(&b.tx1, &b.weight.mat_vec(&e)?);
        rows += b.ty.len();
    }
    Ok(total / T::from_usize_lossy(rows))
}

/// Central-difference derivatives of both scores at `h = 0`.
///
/// `theta` is `(β₁, β₂…, ρ)`, typically the truth.
pub fn orthogonality_check<T: Real>(
    blocks: &[ScoreBlock<T>],
    theta: &[T],
    h_grid: &[T],
) -> Result<OrthogonalityCheck<T>> {
    if h_grid.is_empty() {
        return Err(Error::InvalidInput("step grid is empty".into()));
    }
    if h_grid
        .iter()
        .any(|h| !(h.abs() > T::zero()) || !h.is_finite())
    {
        return Err(Error::InvalidInput(
            "steps must be finite and non-zero".into(),
        ));
    }
    let kx = blocks
        .first()
        .ok_or_else(|| Error::InvalidInput("no score blocks".into()))?
        .tx_exog
        .cols();
    if theta.len() != kx + 2 {
        return Err(Error::Dimension(format!(
            "theta of length {} for {kx} exogenous regressors",
            theta.len()
        )));
    }
    let two = T::lit(2.0);
    let mut orthogonal = Vec::with_capacity(h_grid.len());
    let mut plugin = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        orthogonal.push((orthogonal_score(blocks, h)? - orthogonal_score(blocks, -h)?) / (two * h));
        plugin
            .push((plugin_score(blocks, theta, h)? - plugin_score(blocks, theta, -h)?) / (two * h));
    }
    Ok(OrthogonalityCheck {
        h: h_grid.to_vec(),
        orthogonal,
        plugin,
    })
}
