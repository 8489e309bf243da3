use std::f64::consts::LN_2;

use crate::linalg::{cholesky, real_part, CMat};
use crate::model::{los_matrix, AntennaPositions, SystemConfig};
use crate::objectives::SteeringDerivatives;
use crate::{Error, Result, C64};

/// The matrices behind the ZF ergodic-rate approximation at one position vector.
///
/// `Σ(x) = Θ1 + (1/N) Θ2 Hbar^H Hbar Θ2` with `Θ1 = (Ω + I)^-1`, `Θ2 = (Ω Θ1)^(1/2)`
/// and `Ω = diag(K)`. The diagonal matrices are stored as their diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct ZfSurrogateContext {
    pub omega: Vec<f64>,
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    pub sigma: CMat,
    pub los: CMat,
}

impl ZfSurrogateContext {
    pub fn new(positions: &AntennaPositions, config: &SystemConfig) -> Result<Self> {
        if config.n_antennas <= config.n_users {
            return Err(Error::Dimension(format!(
                "ZF approximation needs more antennas than users (N = {}, M = {})",
                config.n_antennas, config.n_users
            )));
        }
        let los = los_matrix(positions, config)?;
        let omega = config.rician_k.clone();
        let theta1: Vec<f64> = omega.iter().map(|k| 1.0 / (k + 1.0)).collect();
        let theta2: Vec<f64> = omega
            .iter()
            .zip(&theta1)
            .map(|(k, t)| (k * t).sqrt())
            .collect();
        let n = config.n_antennas as f64;
        let gram = los.ad_mul(&los);
        let m = config.n_users;
        let sigma = CMat::from_fn(m, m, |i, j| {
            let diag = if i == j { theta1[i] } else { 0.0 };
            C64::from(diag) + gram[(i, j)] * (theta2[i] * theta2[j] / n)
        });
        Ok(Self {
            omega,
            theta1,
            theta2,
            sigma,
            los,
        })
    }

    fn sigma_inverse(&self) -> Result<CMat> {
        Ok(cholesky(self.sigma.clone(), "Σ(x)")?.inverse())
    }
}

/// Numerators `P_m β_m (N - M)` of the per-user approximate SNR.
fn snr_scale(config: &SystemConfig) -> Vec<f64> {
    let dof = (config.n_antennas - config.n_users) as f64;
    (0..config.n_users)
        .map(|m| config.power_ratio[m] * config.path_loss[m] * dof)
        .collect()
}

/// `sum_m log2(1 + P_m β_m (N - M) / [Σ^-1(x)]_mm)`
pub fn zf_surrogate(positions: &AntennaPositions, config: &SystemConfig) -> Result<f64> {
    let ctx = ZfSurrogateContext::new(positions, config)?;
    let inv = ctx.sigma_inverse()?;
    snr_scale(config)
        .iter()
        .enumerate()
        .map(|(m, a)| Ok((1.0 + a / real_part(inv[(m, m)], "[Σ^-1]_mm")?).log2()))
        .sum()
}

/// Analytic gradient of [`zf_surrogate`]: the chain log-rate -> `[Σ^-1]_mm`
/// -> `Σ^-1` -> `Σ` -> `Hbar`.
pub fn zf_surrogate_grad(positions: &AntennaPositions, config: &SystemConfig) -> Result<Vec<f64>> {
    let ctx = ZfSurrogateContext::new(positions, config)?;
    let inv = ctx.sigma_inverse()?;
    let scale = snr_scale(config);
    let m_users = config.n_users;
    let n = config.n_antennas as f64;
    let k = config.wavenumber();
    let diag: Vec<f64> = (0..m_users)
        .map(|m| real_part(inv[(m, m)], "[Σ^-1]_mm"))
        .collect::<Result<_>>()?;

    positions
        .as_slice()
        .iter()
        .enumerate()
        .map(|(row, &x_n)| {
            let b = SteeringDerivatives::at(x_n, config).b_vec;
            // Hbar^H dHbar/dx_n: only row `row` of dHbar is non-zero, equal to (2π/λ) b^T.
            let lhs = CMat::from_fn(m_users, m_users, |i, j| ctx.los[(row, i)].conj() * b[j] * k);
            let inner = lhs.adjoint() + lhs;
            let d_sigma = CMat::from_fn(m_users, m_users, |i, j| {
                inner[(i, j)] * (ctx.theta2[i] * ctx.theta2[j] / n)
            });
            let d_inv = -(&inv * d_sigma * &inv);
            let mut acc = 0.0;
            for m in 0..m_users {
                let s = diag[m];
                let ds = real_part(d_inv[(m, m)], "d[Σ^-1]_mm")?;
                acc += -scale[m] / (s * s + scale[m] * s) * ds;
            }
            Ok(acc / LN_2)
        })
        .collect()
}
