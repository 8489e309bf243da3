//! Seeded Monte Carlo estimates of the ergodic sum rate at fixed positions.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    los_matrix, sample_nlos_with, AntennaPositions, ChannelRealization, RandomStream, SystemConfig,
};
use crate::receivers::{mmse_receiver, sic_sum_rate, zf_rates};
use crate::{Error, Result};

/// Spacing of the fixed-position baseline array, in wavelengths.
pub const FPA_SPACING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReceiverKind {
    #[serde(rename = "zf")]
    Zf,
    #[serde(rename = "mmse")]
    Mmse,
    #[serde(rename = "mmse-sic")]
    MmseSic,
}

impl ReceiverKind {
    pub const ALL: [ReceiverKind; 3] = [Self::Zf, Self::Mmse, Self::MmseSic];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Zf => "zf",
            Self::Mmse => "mmse",
            Self::MmseSic => "mmse-sic",
        }
    }
}

impl fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zf" => Ok(Self::Zf),
            "mmse" => Ok(Self::Mmse),
            "mmse-sic" | "sic" => Ok(Self::MmseSic),
            other => Err(Error::InvalidConfig(format!("unknown receiver {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErgodicEstimate {
    /// Sample mean of the sum rate, bits/s/Hz.
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_samples)`.
    pub std_error: f64,
    pub n_samples: usize,
    pub receiver: ReceiverKind,
    pub seed: u64,
    pub stream_id: u64,
}

/// Instantaneous sum rate of one receiver on one channel draw.
pub fn sample_sum_rate(
    channel: &ChannelRealization,
    config: &SystemConfig,
    receiver: ReceiverKind,
) -> Result<f64> {
    match receiver {
        ReceiverKind::Zf => Ok(zf_rates(channel, config)?.sum_rate()),
        ReceiverKind::Mmse => Ok(mmse_receiver(channel, config)?.1.sum_rate()),
        ReceiverKind::MmseSic => sic_sum_rate(channel, config),
    }
}

pub fn ergodic_sum_rate(
    positions: &AntennaPositions,
    config: &SystemConfig,
    receiver: ReceiverKind,
    n_samples: usize,
    stream: &RandomStream,
) -> Result<ErgodicEstimate> {
    Ok(ergodic_sum_rates(positions, config, &[receiver], n_samples, stream)?[0])
}

/// Estimates for several receivers on the same channel draws.
///
/// Sample `i` uses sub-stream `i` of `stream`, so the estimate does not depend
/// on how the samples are scheduled.
pub fn ergodic_sum_rates(
    positions: &AntennaPositions,
    config: &SystemConfig,
    receivers: &[ReceiverKind],
    n_samples: usize,
    stream: &RandomStream,
) -> Result<Vec<ErgodicEstimate>> {
    ergodic_sum_rates_with(positions, config, receivers, n_samples, stream, true)
}

/// As [`ergodic_sum_rates`], optionally evaluating the samples on the calling thread only.
pub fn ergodic_sum_rates_with(
    positions: &AntennaPositions,
    config: &SystemConfig,
    receivers: &[ReceiverKind],
    n_samples: usize,
    stream: &RandomStream,
    parallel: bool,
) -> Result<Vec<ErgodicEstimate>> {
    if n_samples == 0 {
        return Err(Error::InvalidConfig("n_samples must be at least 1".into()));
    }
    config.validate()?;
    let los = los_matrix(positions, config)?;
    let eval = |i: u64| -> Result<Vec<f64>> {
        let nlos = sample_nlos_with(
            &mut stream.substream_rng(i),
            config.n_antennas,
            config.n_users,
        );
        let ch = ChannelRealization::from_parts(los.clone(), nlos, config)?;
        receivers
            .iter()
            .map(|&r| sample_sum_rate(&ch, config, r))
            .collect()
    };
    let rows: Vec<Vec<f64>> = if parallel {
        (0..n_samples as u64)
            .into_par_iter()
            .map(eval)
            .collect::<Result<_>>()?
    } else {
        (0..n_samples as u64).map(eval).collect::<Result<_>>()?
    };

    Ok(receivers
        .iter()
        .enumerate()
        .map(|(k, &receiver)| {
            let (mean, std_error) = mean_and_std_error(rows.iter().map(|r| r[k]), n_samples);
            ErgodicEstimate {
                mean,
                std_error,
                n_samples,
                receiver,
                seed: stream.seed,
                stream_id: stream.stream_id,
            }
        })
        .collect())
}

fn mean_and_std_error(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Conventional array: half-wavelength spacing anchored at zero.
pub fn fpa_positions(config: &SystemConfig) -> Result<AntennaPositions> {
    let spacing = FPA_SPACING * config.wavelength;
    let needed = config.n_antennas.saturating_sub(1) as f64 * spacing;
    if needed > config.span + crate::model::FEASIBILITY_TOL {
        return Err(Error::InfeasibleGeometry {
            span: config.span,
            n_antennas: config.n_antennas,
            min_spacing: spacing,
        });
    }
    Ok(AntennaPositions::uniform(config.n_antennas, spacing))
}
