//! Instantaneous-CSI receive beamformers (ZF, MMSE, MMSE-SIC) and the SINRs they achieve.

use nalgebra::SymmetricEigen;

use crate::linalg::{add_outer, cholesky, inner, log2_det_hpd, real_part, CMat, CVec};
use crate::model::{ChannelRealization, SystemConfig};
use crate::{Error, Result, C64};

/// Gram matrices with a larger condition number are treated as singular.
pub const ZF_CONDITION_LIMIT: f64 = 1e12;

/// Unit-norm receive combining vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer(CVec);

impl Beamformer {
    /// Normalizes `v`.
    pub fn from_direction(v: CVec) -> Self {
        let norm = v.norm();
        Self(v / C64::from(norm))
    }

    pub fn weights(&self) -> &CVec {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePerUser {
    pub sinr: Vec<f64>,
    /// `log2(1 + sinr)`, bits/s/Hz.
    pub rate: Vec<f64>,
}

impl RatePerUser {
    pub fn from_sinr(sinr: Vec<f64>) -> Self {
        let rate = sinr.iter().map(|g| (1.0 + g).log2()).collect();
        Self { sinr, rate }
    }

    pub fn sum_rate(&self) -> f64 {
        self.rate.iter().sum()
    }
}

fn check_channel(channel: &ChannelRealization, config: &SystemConfig) -> Result<()> {
    let shape = channel.combined.shape();
    if shape != (config.n_antennas, config.n_users) {
        return Err(Error::Dimension(format!(
            "channel is {shape:?}, config expects ({}, {})",
            config.n_antennas, config.n_users
        )));
    }
    Ok(())
}

/// SINR of `user` when combined with `w`, every other user interfering.
pub fn sinr_of(
    w: &Beamformer,
    channel: &ChannelRealization,
    config: &SystemConfig,
    user: usize,
) -> Result<f64> {
    check_channel(channel, config)?;
    if user >= config.n_users {
        return Err(Error::IndexOutOfRange {
            index: user,
            n_users: config.n_users,
        });
    }
    let h = &channel.combined;
    let gain = |i: usize| config.power_ratio[i] * inner(w.weights(), &h.column(i)).norm_sqr();
    let interference: f64 = (0..config.n_users).filter(|&i| i != user).map(gain).sum();
    Ok(gain(user) / (interference + 1.0))
}

/// ZF SINRs from the diagonal of the inverse Gram matrix.
pub fn zf_rates(channel: &ChannelRealization, config: &SystemConfig) -> Result<RatePerUser> {
    check_channel(channel, config)?;
    let h = &channel.combined;
    let gram = h.ad_mul(h);
    let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| {
        (lo.min(e), hi.max(e))
    });
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition.is_nan() || condition > ZF_CONDITION_LIMIT {
        return Err(Error::RankDeficient { condition });
    }
    let inv = cholesky(gram, "ZF Gram matrix")?.inverse();
    let sinr = (0..config.n_users)
        .map(|m| config.power_ratio[m] / inv[(m, m)].re)
        .collect();
    Ok(RatePerUser::from_sinr(sinr))
}

/// Zero-forcing receiver. Beamformer `m` projects `h_m` onto the orthogonal
/// complement of the other users' channels; the SINRs come from the inverse Gram.
pub fn zf_receiver(
    channel: &ChannelRealization,
    config: &SystemConfig,
) -> Result<(Vec<Beamformer>, RatePerUser)> {
    let rates = zf_rates(channel, config)?;
    let h = &channel.combined;
    let beams = (0..config.n_users)
        .map(|m| {
            let hm = h.column(m).into_owned();
            if config.n_users == 1 {
                return Ok(Beamformer::from_direction(hm));
            }
            let others = h.clone().remove_column(m);
            let coeff =
                cholesky(others.ad_mul(&others), "ZF interferer Gram")?.solve(&others.ad_mul(&hm));
            Ok(Beamformer::from_direction(hm - others * coeff))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((beams, rates))
}

/// `I + sum_{i in users} P_i h_i h_i^H`
fn interference_plus_noise(
    h: &CMat,
    config: &SystemConfig,
    users: impl Iterator<Item = usize>,
) -> CMat {
    let mut acc = CMat::identity(h.nrows(), h.nrows());
    for i in users {
        add_outer(&mut acc, &h.column(i), config.power_ratio[i]);
    }
    acc
}

/// MMSE combining against the given interference-plus-noise covariance.
fn mmse_against(
    cov: CMat,
    h: &CMat,
    config: &SystemConfig,
    user: usize,
) -> Result<(Beamformer, f64)> {
    let hm = h.column(user);
    let u = cholesky(cov, "interference-plus-noise covariance")?.solve(&hm);
    let quad = real_part(inner(&hm, &u), "h^H B^-1 h")?;
    Ok((
        Beamformer::from_direction(u),
        config.power_ratio[user] * quad,
    ))
}

pub fn mmse_receiver(
    channel: &ChannelRealization,
    config: &SystemConfig,
) -> Result<(Vec<Beamformer>, RatePerUser)> {
    check_channel(channel, config)?;
    let h = &channel.combined;
    let mut beams = Vec::with_capacity(config.n_users);
    let mut sinr = Vec::with_capacity(config.n_users);
    for m in 0..config.n_users {
        let cov = interference_plus_noise(h, config, (0..config.n_users).filter(|&i| i != m));
        let (w, g) = mmse_against(cov, h, config, m)?;
        beams.push(w);
        sinr.push(g);
    }
    Ok((beams, RatePerUser::from_sinr(sinr)))
}

/// MMSE-SIC receiver decoding users in `order` (0-based user indices).
///
/// The user at decode position `k` sees only the users decoded after it as
/// interference. Results are indexed by user, not by decode position.
pub fn sic_receiver(
    channel: &ChannelRealization,
    config: &SystemConfig,
    order: &[usize],
) -> Result<(Vec<Beamformer>, RatePerUser)> {
    check_channel(channel, config)?;
    let m_users = config.n_users;
    let mut seen = vec![false; m_users];
    if order.len() != m_users
        || !order
            .iter()
            .all(|&u| u < m_users && !std::mem::replace(&mut seen[u], true))
    {
        return Err(Error::InvalidPermutation(m_users));
    }

    let h = &channel.combined;
    let mut beams: Vec<Option<Beamformer>> = vec![None; m_users];
    let mut sinr = vec![0.0; m_users];
    let mut cov = CMat::identity(h.nrows(), h.nrows());
    for &user in order.iter().rev() {
        let (w, g) = mmse_against(cov.clone(), h, config, user)?;
        beams[user] = Some(w);
        sinr[user] = g;
        add_outer(&mut cov, &h.column(user), config.power_ratio[user]);
    }
    let beams = beams
        .into_iter()
        .map(|b| b.expect("every user decoded"))
        .collect();
    Ok((beams, RatePerUser::from_sinr(sinr)))
}

/// `log2 det(I + sum_m P_m h_m h_m^H)`
pub fn sic_sum_rate(channel: &ChannelRealization, config: &SystemConfig) -> Result<f64> {
    check_channel(channel, config)?;
    let cov = interference_plus_noise(&channel.combined, config, 0..config.n_users);
    log2_det_hpd(cov, "sum covariance")
}
