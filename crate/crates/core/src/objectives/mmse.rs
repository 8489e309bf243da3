use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::linalg::{add_outer, cholesky, inner, real_part, CMat};
use crate::model::{
    los_matrix, sample_nlos_with, AntennaPositions, ChannelRealization, RandomStream, SystemConfig,
};
use crate::objectives::SteeringDerivatives;
use crate::{Error, Result, C64};

/// Fixed NLoS draws behind the sample-average MMSE objective.
///
/// Drawn once and reused at every iterate so the objective stays deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct MmseSampleSet {
    draws: Vec<CMat>,
    stream: RandomStream,
}

impl MmseSampleSet {
    /// Draw `count` matrices of shape `n x m`; draw `s` comes from sub-stream `s`.
    pub fn draw(stream: RandomStream, count: usize, n: usize, m: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::EmptySampleSet);
        }
        let draws = (0..count as u64)
            .map(|s| sample_nlos_with(&mut stream.substream_rng(s), n, m))
            .collect();
        Ok(Self { draws, stream })
    }

    pub fn from_draws(draws: Vec<CMat>, stream: RandomStream) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        Ok(Self { draws, stream })
    }

    pub fn count(&self) -> usize {
        self.draws.len()
    }

    pub fn draws(&self) -> &[CMat] {
        &self.draws
    }

    pub fn stream(&self) -> RandomStream {
        self.stream
    }

    fn check(&self, config: &SystemConfig) -> Result<()> {
        let shape = (config.n_antennas, config.n_users);
        match self.draws.iter().find(|d| d.shape() != shape) {
            Some(d) => Err(Error::Dimension(format!(
                "sample of shape {:?}, expected {shape:?}",
                d.shape()
            ))),
            None => Ok(()),
        }
    }
}

/// `B_m = I + sum_{i != m} P_i h_i h_i^H` for one channel draw.
fn interference_cov(h: &CMat, config: &SystemConfig, m: usize) -> CMat {
    let mut b = CMat::identity(h.nrows(), h.nrows());
    for i in (0..config.n_users).filter(|&i| i != m) {
        add_outer(&mut b, &h.column(i), config.power_ratio[i]);
    }
    b
}

struct UserTerm {
    /// `h_m^H B_m^-1 h_m`
    quad: f64,
    /// `B_m^-1 h_m`
    u: nalgebra::DVector<C64>,
}

fn user_term(h: &CMat, config: &SystemConfig, m: usize) -> Result<UserTerm> {
    let hm = h.column(m);
    let u = cholesky(interference_cov(h, config, m), "B_m,s")?.solve(&hm);
    let quad = real_part(inner(&hm, &u), "h^H B^-1 h")?;
    Ok(UserTerm { quad, u })
}

fn sample_channel(los: &CMat, draw: &CMat, config: &SystemConfig) -> Result<CMat> {
    Ok(ChannelRealization::from_parts(los.clone(), draw.clone(), config)?.combined)
}

fn prepare(
    positions: &AntennaPositions,
    config: &SystemConfig,
    samples: &MmseSampleSet,
) -> Result<CMat> {
    samples.check(config)?;
    los_matrix(positions, config)
}

/// `(1/S) sum_s sum_m log2(1 + P_m h_ms^H B_ms^-1 h_ms)`
pub fn mmse_saa_objective(
    positions: &AntennaPositions,
    config: &SystemConfig,
    samples: &MmseSampleSet,
) -> Result<f64> {
    let los = prepare(positions, config, samples)?;
    let per_sample = samples
        .draws
        .par_iter()
        .map(|draw| {
            let h = sample_channel(&los, draw, config)?;
            (0..config.n_users)
                .map(|m| Ok((1.0 + config.power_ratio[m] * user_term(&h, config, m)?.quad).log2()))
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_sample.iter().sum::<f64>() / samples.count() as f64)
}

/// Analytic gradient of [`mmse_saa_objective`].
///
/// Per sample and user, the derivative of `q = h^H B^-1 h` is
/// `dh^H B^-1 h + h^H d(B^-1) h + h^H B^-1 dh` with `d(B^-1) = -B^-1 dB B^-1`.
/// `dh_i/dx_n` is zero except in entry `n` (value `c_i(x_n)`), so with
/// `u = B^-1 h_m` and `t_i = h_i^H u` every term reduces to scalars.
pub fn mmse_saa_grad(
    positions: &AntennaPositions,
    config: &SystemConfig,
    samples: &MmseSampleSet,
) -> Result<Vec<f64>> {
    let los = prepare(positions, config, samples)?;
    let derivs: Vec<SteeringDerivatives> = positions
        .as_slice()
        .iter()
        .map(|&x| SteeringDerivatives::at(x, config))
        .collect();
    let n_ant = config.n_antennas;
    let m_users = config.n_users;

    let per_sample = samples
        .draws
        .par_iter()
        .map(|draw| {
            let h = sample_channel(&los, draw, config)?;
            let mut grad = vec![0.0; n_ant];
            for m in 0..m_users {
                let UserTerm { quad, u } = user_term(&h, config, m)?;
                let p = config.power_ratio[m];
                let weight = p / ((1.0 + p * quad) * LN_2);
                let t: Vec<C64> = (0..m_users).map(|i| inner(&h.column(i), &u)).collect();
                for (n, sd) in derivs.iter().enumerate() {
                    let c = &sd.c_scalar;
                    let un = u[n];
                    let d_h_term = c[m].conj() * un;
                    let h_d_term = un.conj() * c[m];
                    let d_inv_term: C64 = (0..m_users)
                        .filter(|&i| i != m)
                        .map(|i| {
                            (un.conj() * c[i] * t[i] + t[i].conj() * c[i].conj() * un)
                                * config.power_ratio[i]
                        })
                        .sum::<C64>();
                    let dq = real_part(d_h_term - d_inv_term + h_d_term, "d(h^H B^-1 h)")?;
                    grad[n] += weight * dq;
                }
            }
            Ok(grad)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let scale = 1.0 / samples.count() as f64;
    let mut total = vec![0.0; n_ant];
    for g in &per_sample {
        for (acc, v) in total.iter_mut().zip(g) {
            *acc += v;
        }
    }
    Ok(total.into_iter().map(|v| v * scale).collect())
}
