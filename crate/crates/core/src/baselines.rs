//! Comparator estimators: within OLS, within 2SLS with polynomial
//! instruments, and the two plug-in estimators that use a learned first
//! stage without a control function.
//!
//! All of them report individual-clustered sandwich standard errors from
//! [`crate::regression`].

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::panel::{
    first_stage_design, transform_with, IndividualBlock, PanelDataset, TransformKind,
    TransformedPanel, Weighting,
};
use crate::regression::{self, MomentBlock};
use crate::rng::derive_seed;
use crate::scalar::Real;
use crate::slcf::{first_stage_residuals, make_crossfit_plan, Nuisance, SlcfConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineFit<T> {
    pub estimator: String,
    /// `(β₁, β₂…)`.
    pub coefficients: Vec<T>,
    pub names: Vec<String>,
    pub standard_errors: Vec<T>,
    pub ci95: Vec<(T, T)>,
    pub sigma: Matrix<T>,
    pub n_total: usize,
}

impl<T: Real> BaselineFit<T> {
    pub fn beta1(&self) -> T {
        self.coefficients[0]
    }

    fn from_moments(estimator: &str, fit: regression::MomentFit<T>, names: Vec<String>) -> Self {
        let standard_errors = fit.standard_errors();
        let ci95 = fit.ci95();
        Self {
            estimator: estimator.to_string(),
            coefficients: fit.theta,
            names,
            standard_errors,
            ci95,
            sigma: fit.sigma,
            n_total: fit.n,
        }
    }
}

fn regressors<T: Real>(b: &crate::panel::TransformedBlock<T>) -> Result<Matrix<T>> {
    Matrix::hstack(&[&Matrix::column_vector(&b.tx1), &b.tx_exog])
}

/// OLS of within-transformed `y` on within-transformed `(x₁, x̃)`.
pub fn wols<T: Real>(data: &PanelDataset<T>) -> Result<BaselineFit<T>> {
    let tp = transform_with(data, TransformKind::Within, Weighting::Identity)?;
    let blocks = tp
        .blocks
        .iter()
        .map(|b| {
            let h = regressors(b)?;
            MomentBlock::new(h.clone(), h, b.ty.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let names = data.regressor_names();
    let fit = regression::fit_moments(&blocks, &names, tp.total_obs())?;
    Ok(BaselineFit::from_moments("WOLS", fit, names))
}

/// Instrument set for [`w2sls`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolynomialInstruments {
    pub degree: usize,
    /// Include cross products of different variables up to `degree`.
    pub interactions: bool,
}

impl PolynomialInstruments {
    pub fn powers(degree: usize) -> Self {
        Self {
            degree,
            interactions: false,
        }
    }
}

/// Exponent vectors of the monomials used as instruments, ordered by total degree.
fn monomials(n_vars: usize, options: PolynomialInstruments) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if options.interactions {
        for total in 1..=options.degree {
            let mut exps = vec![0; n_vars];
            compositions(total, 0, &mut exps, &mut out);
        }
    } else {
        for d in 1..=options.degree {
            for v in 0..n_vars {
                let mut e = vec![0; n_vars];
                e[v] = d;
                out.push(e);
            }
        }
    }
    out
}

fn compositions(remaining: usize, var: usize, exps: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if var == exps.len() - 1 {
        exps[var] = remaining;
        out.push(exps.clone());
        exps[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        exps[var] = k;
        compositions(remaining - k, var + 1, exps, out);
    }
    exps[var] = 0;
}

/// Within 2SLS with polynomial instruments in `(z, x̃)`.
///
/// Monomials are formed from the raw levels and then within-transformed.
/// Instruments are rescaled to unit variance, which leaves the projection
/// unchanged but improves conditioning at high degrees.
pub fn w2sls<T: Real>(
    data: &PanelDataset<T>,
    options: PolynomialInstruments,
) -> Result<BaselineFit<T>> {
    if options.degree == 0 {
        return Err(Error::InvalidInput(
            "polynomial degree must be at least 1".into(),
        ));
    }
    let n_vars = data.n_inst() + data.n_exog();
    let terms = monomials(n_vars, options);
    let var_names: Vec<String> = data
        .inst_names()
        .iter()
        .chain(data.exog_names())
        .cloned()
        .collect();
    let inst_names: Vec<String> = terms
        .iter()
        .map(|e| {
            e.iter()
                .zip(&var_names)
                .filter(|(&p, _)| p > 0)
                .map(|(&p, n)| {
                    if p == 1 {
                        n.clone()
                    } else {
                        format!("{n}^{p}")
                    }
                })
                .collect::<Vec<_>>()
                .join("*")
        })
        .collect();

    let expanded = PanelDataset::with_names(
        data.individuals()
            .iter()
            .map(|b| expand_instruments(b, &terms))
            .collect(),
        data.exog_names().to_vec(),
        inst_names.clone(),
        usize::MAX,
    )?;
    let tp = transform_with(&expanded, TransformKind::Within, Weighting::Identity)?;

    let l = terms.len();
    let scale: Vec<T> = (0..l)
        .map(|c| {
            let ss: T = tp
                .blocks
                .iter()
                .flat_map(|b| b.tz.column(c))
                .map(|v| v * v)
                .sum();
            let sd = (ss / T::from_usize_lossy(tp.total_rows())).sqrt();
            if sd > T::zero() {
                sd
            } else {
                T::one()
            }
        })
        .collect();
    let zs: Vec<Matrix<T>> = tp
        .blocks
        .iter()
        .map(|b| Matrix::from_fn(b.rows(), l, |r, c| b.tz[(r, c)] / scale[c]))
        .collect();

    let regs: Vec<Matrix<T>> = tp.blocks.iter().map(regressors).collect::<Result<_>>()?;
    let k = regs[0].cols();
    if l < k {
        return Err(Error::InvalidInput(format!(
            "{l} instruments cannot identify {k} coefficients"
        )));
    }
    let mut zz = Matrix::zeros(l, l);
    let mut zx = Matrix::zeros(l, k);
    for (z, x) in zs.iter().zip(&regs) {
        zz = zz.add(&z.tr_matmul(z)?)?;
        zx = zx.add(&z.tr_matmul(x)?)?;
    }
    let chol = Cholesky::factor(&zz, Some(&inst_names))?;
    let pi_cols: Vec<Vec<T>> = (0..k)
        .map(|j| chol.solve_vec(&zx.column(j)))
        .collect::<Result<_>>()?;
    let pi = Matrix::from_fn(l, k, |r, c| pi_cols[c][r]);

    let blocks = tp
        .blocks
        .iter()
        .zip(zs.iter().zip(regs))
        .map(|(b, (z, x))| MomentBlock::new(z.matmul(&pi)?, x, b.ty.clone()))
        .collect::<Result<Vec<_>>>()?;
    let names = data.regressor_names();
    let fit = regression::fit_moments(&blocks, &names, tp.total_obs())?;
    let label = if options.degree == 1 {
        "W2SLS".to_string()
    } else {
        format!("W2SLS_poly{}", options.degree)
    };
    Ok(BaselineFit::from_moments(&label, fit, names))
}

fn expand_instruments<T: Real>(b: &IndividualBlock<T>, terms: &[Vec<usize>]) -> IndividualBlock<T> {
    let t = b.periods();
    let z = Matrix::from_fn(t, terms.len(), |r, c| {
        let vars = b.z.row(r).iter().chain(b.x_exog.row(r));
        vars.zip(&terms[c])
            .fold(T::one(), |acc, (&v, &p)| acc * v.powi(p as i32))
    });
    IndividualBlock { z, ..b.clone() }
}

/// Learned transformed first stage `τĝ` per block, out-of-fold when cross-fitting.
pub fn fitted_first_stage<T: Real>(
    data: &PanelDataset<T>,
    config: &SlcfConfig,
) -> Result<(TransformedPanel<T>, Vec<Vec<T>>)> {
    let tp = transform_with(data, config.transform, config.weighting)?;
    let design = first_stage_design(data, config.transform, config.design)?;
    let nuisance = Nuisance::SuperLearner {
        design: &design,
        config: &config.super_learner,
    };
    let n = tp.blocks.len();
    let mut fitted: Vec<Vec<T>> = vec![Vec::new(); n];
    let seed = derive_seed(config.seed, 2);
    let all: Vec<usize> = (0..n).collect();
    let folds: Vec<(Vec<usize>, Vec<usize>)> = if config.cross_fit {
        let plan = make_crossfit_plan(n, config.folds, 1, derive_seed(config.seed, 0))?;
        let split = plan.split(0);
        (0..split.k())
            .map(|b| {
                let test = split.members(b);
                let train = all
                    .iter()
                    .copied()
                    .filter(|&i| split.fold_of(i) != b)
                    .collect();
                (train, test)
            })
            .collect()
    } else {
        vec![(all.clone(), all)]
    };
    for (b, (train, test)) in folds.iter().enumerate() {
        let fs = first_stage_residuals(&nuisance, train, test, derive_seed(seed, b as u64))?;
        for (&i, res) in fs.test.iter().zip(fs.residuals) {
            fitted[i] = tp.blocks[i]
                .tx1
                .iter()
                .zip(res)
                .map(|(&x, e)| x - e)
                .collect();
        }
    }
    Ok((tp, fitted))
}

fn label(prefix: &str, config: &SlcfConfig) -> String {
    let cf = if config.cross_fit { "" } else { "_nocf" };
    format!("{}_{}{}", config.transform.label(), prefix, cf)
}

/// IV with the learned first stage `τĝ` as instrument for `τx₁`.
pub fn plugin_iv<T: Real>(data: &PanelDataset<T>, config: &SlcfConfig) -> Result<BaselineFit<T>> {
    let (tp, fitted) = fitted_first_stage(data, config)?;
    let blocks = tp
        .blocks
        .iter()
        .zip(&fitted)
        .map(|(b, g)| {
            let inst = Matrix::hstack(&[&Matrix::column_vector(g), &b.tx_exog])?;
            MomentBlock::new(b.weight.matmul(&inst)?, regressors(b)?, b.ty.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let names = data.regressor_names();
    let fit = regression::fit_moments(&blocks, &names, tp.total_obs())?;
    Ok(BaselineFit::from_moments(
        &label("plugin_IV", config),
        fit,
        names,
    ))
}

/// Regression of `τy` on `(τĝ, τx̃)`.
pub fn naive_plugin_2sls<T: Real>(
    data: &PanelDataset<T>,
    config: &SlcfConfig,
) -> Result<BaselineFit<T>> {
    let (tp, fitted) = fitted_first_stage(data, config)?;
    let blocks = tp
        .blocks
        .iter()
        .zip(&fitted)
        .map(|(b, g)| {
            let h = Matrix::hstack(&[&Matrix::column_vector(g), &b.tx_exog])?;
            MomentBlock::gls(h, b.ty.clone(), &b.weight)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut names = data.regressor_names();
    names[0] = "x1_hat".into();
    let fit = regression::fit_moments(&blocks, &names, tp.total_obs())?;
    Ok(BaselineFit::from_moments(
        &label("naive_2SLS", config),
        fit,
        data.regressor_names(),
    ))
}
