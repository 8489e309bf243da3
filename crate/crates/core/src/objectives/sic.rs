use std::f64::consts::LN_2;

use crate::linalg::{cholesky, log2_det_hpd, real_part, CMat};
use crate::model::{los_matrix, AntennaPositions, SystemConfig};
use crate::objectives::SteeringDerivatives;
use crate::{Result, C64};

/// Expected channel covariance sum and its regularized inverse at one position vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SicBoundContext {
    /// `sum_m P_m E[h_m h_m^H]`, with
    /// `E[h_m h_m^H] = (K_m β_m / (K_m + 1)) hbar_m hbar_m^H + (β_m / (K_m + 1)) I`.
    pub expected_outer: CMat,
    /// `D(x) = (I + expected_outer)^-1`
    pub d_matrix: CMat,
    pub los: CMat,
}

impl SicBoundContext {
    pub fn new(positions: &AntennaPositions, config: &SystemConfig) -> Result<Self> {
        let expected_outer = expected_outer(positions, config)?;
        let n = config.n_antennas;
        let d_matrix =
            cholesky(CMat::identity(n, n) + &expected_outer, "I + sum P E[hh^H]")?.inverse();
        Ok(Self {
            expected_outer,
            d_matrix,
            los: los_matrix(positions, config)?,
        })
    }
}

fn expected_outer(positions: &AntennaPositions, config: &SystemConfig) -> Result<CMat> {
    let los = los_matrix(positions, config)?;
    let n = config.n_antennas;
    let mut acc = CMat::zeros(n, n);
    for m in 0..config.n_users {
        let (k, beta, p) = (
            config.rician_k[m],
            config.path_loss[m],
            config.power_ratio[m],
        );
        let diffuse = p * beta / (k + 1.0);
        for i in 0..n {
            acc[(i, i)] += C64::from(diffuse);
        }
        crate::linalg::add_outer(&mut acc, &los.column(m), p * k * beta / (k + 1.0));
    }
    Ok(acc)
}

/// Jensen upper bound on the ergodic MMSE-SIC sum rate,
/// `log2 det(I + sum_m P_m E[h_m h_m^H])`.
pub fn sic_bound_objective(positions: &AntennaPositions, config: &SystemConfig) -> Result<f64> {
    let n = config.n_antennas;
    log2_det_hpd(
        CMat::identity(n, n) + expected_outer(positions, config)?,
        "I + sum P E[hh^H]",
    )
}

/// Analytic gradient of [`sic_bound_objective`]:
/// `(1/ln 2) tr{D(x) sum_m (P_m K_m β_m / (K_m + 1)) (dhbar_m hbar_m^H + hbar_m dhbar_m^H)}`.
pub fn sic_bound_grad(positions: &AntennaPositions, config: &SystemConfig) -> Result<Vec<f64>> {
    let ctx = SicBoundContext::new(positions, config)?;
    let d = &ctx.d_matrix;
    let m_users = config.n_users;
    // D hbar_m and hbar_m^H D, one column / row per user
    let d_h = d * &ctx.los;
    let h_d = ctx.los.ad_mul(d);
    let weight: Vec<f64> = (0..m_users)
        .map(|m| {
            let (k, beta) = (config.rician_k[m], config.path_loss[m]);
            config.power_ratio[m] * k * beta / (k + 1.0)
        })
        .collect();

    positions
        .as_slice()
        .iter()
        .enumerate()
        .map(|(n, &x_n)| {
            let dm = SteeringDerivatives::at(x_n, config).d_scalar;
            // dhbar_m/dx_n = d_m e_n, so tr{D e_n d_m hbar^H} = d_m (hbar^H D)_n
            // and tr{D hbar conj(d_m) e_n^T} = conj(d_m) (D hbar)_n.
            let tr: C64 = (0..m_users)
                .map(|m| (dm[m] * h_d[(m, n)] + dm[m].conj() * d_h[(n, m)]) * weight[m])
                .sum();
            Ok(real_part(tr, "SIC bound trace")? / LN_2)
        })
        .collect()
}
