use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::panel::{IndividualBlock, PanelDataset};
use crate::rng::rng_from_seed;

/// Parameters of the simulated triangular panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpConfig {
    /// Nonlinearity of the first stage.
    pub a: f64,
    pub n: usize,
    #[serde(default = "DgpConfig::default_t")]
    pub t: usize,
    #[serde(default = "DgpConfig::one")]
    pub beta1: f64,
    #[serde(default = "DgpConfig::one")]
    pub beta2: f64,
    #[serde(default = "DgpConfig::default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub seed: u64,
}

impl DgpConfig {
    fn default_t() -> usize {
        2
    }

    fn one() -> f64 {
        1.0
    }

    fn default_rho() -> f64 {
        0.9
    }

    pub fn new(a: f64, n: usize, t: usize, seed: u64) -> Self {
        Self {
            a,
            n,
            t,
            beta1: 1.0,
            beta2: 1.0,
            rho: 0.9,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "a must be positive, got {}",
                self.a
            )));
        }
        if self.n < 10 {
            return Err(Error::InvalidInput(format!("need N >= 10, got {}", self.n)));
        }
        if self.t < 2 {
            return Err(Error::InvalidInput(format!("need T >= 2, got {}", self.t)));
        }
        if ![self.beta1, self.beta2, self.rho]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("DGP coefficients".into()));
        }
        Ok(())
    }
}

/// `−a|z| − 2 tanh(x₂) + z/a`.
pub fn g_fun(a: f64, x2: f64, z: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput(format!("a must be positive, got {a}")));
    }
    Ok(g_unchecked(a, x2, z))
}

#[inline]
fn g_unchecked(a: f64, x2: f64, z: f64) -> f64 {
    -a * z.abs() - 2.0 * x2.tanh() + z / a
}

/// Latent draws kept alongside a simulated panel, indexed `[individual][period]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpTruth {
    pub alpha: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    /// `ζ̃`, the part of the structural error unrelated to `u`.
    pub omega: Vec<Vec<f64>>,
    pub eps: Vec<Vec<f64>>,
    /// First-stage function values `g(x₂, z)`.
    pub g: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Simulated {
    pub data: PanelDataset<f64>,
    pub truth: DgpTruth,
}

/// Simulates the panel with the default first stage [`g_fun`].
pub fn gen_dgp1(config: &DgpConfig) -> Result<Simulated> {
    config.validate()?;
    let a = config.a;
    gen_dgp_with(config, |x2, z| g_unchecked(a, x2, z))
}

/// Simulates the panel with a caller-supplied first stage `g(x₂, z)`.
///
/// Draw order per individual: `α`, then for each period `ζ, ν, u, ζ̃`, where
/// `x₂ = α + ζ`, `z = α + ν`, `x₁ = g + α + u`, `ε = ρu + ζ̃` and
/// `y = β₁x₁ + β₂x₂ + α + ε`; `ζ, ν ~ U(−2, 2)` and `α, u, ζ̃ ~ U(−1, 1)`.
pub fn gen_dgp_with(config: &DgpConfig, g: impl Fn(f64, f64) -> f64) -> Result<Simulated> {
    config.validate()?;
    let (n, t) = (config.n, config.t);
    let mut rng = rng_from_seed(config.seed);
    let mut blocks = Vec::with_capacity(n);
    let mut truth = DgpTruth {
        alpha: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        omega: Vec::with_capacity(n),
        eps: Vec::with_capacity(n),
        g: Vec::with_capacity(n),
    };
    for i in 0..n {
        let alpha: f64 = rng.gen_range(-1.0..1.0);
        let (mut y, mut x1, mut x2, mut z) =
            (vec![0.0; t], vec![0.0; t], vec![0.0; t], vec![0.0; t]);
        let (mut us, mut ws, mut es, mut gs) =
            (vec![0.0; t], vec![0.0; t], vec![0.0; t], vec![0.0; t]);
        for s in 0..t {
            let zeta: f64 = rng.gen_range(-2.0..2.0);
            let nu: f64 = rng.gen_range(-2.0..2.0);
            let u: f64 = rng.gen_range(-1.0..1.0);
            let omega: f64 = rng.gen_range(-1.0..1.0);
            x2[s] = alpha + zeta;
            z[s] = alpha + nu;
            gs[s] = g(x2[s], z[s]);
            x1[s] = gs[s] + alpha + u;
            es[s] = config.rho * u + omega;
            y[s] = config.beta1 * x1[s] + config.beta2 * x2[s] + alpha + es[s];
            us[s] = u;
            ws[s] = omega;
        }
        blocks.push(IndividualBlock::new(
            format!("{}", i + 1),
            y,
            x1,
            Matrix::column_vector(&x2),
            Matrix::column_vector(&z),
        ));
        truth.alpha.push(alpha);
        truth.u.push(us);
        truth.omega.push(ws);
        truth.eps.push(es);
        truth.g.push(gs);
    }
    let data = PanelDataset::with_names(
        blocks,
        vec!["x2".into()],
        vec!["z".into()],
        crate::panel::DEFAULT_MAX_PERIODS,
    )?;
    if !data
        .individuals()
        .iter()
        .all(|b| b.y.iter().chain(&b.x1).all(|v| v.is_finite()))
    {
        return Err(Error::NonFinite("simulated panel".into()));
    }
    Ok(Simulated { data, truth })
}
