//! Scenario configuration, antenna positions and Rician channel construction.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMat, CVec};
use crate::{Error, Result, C64};

/// Name of the pseudo-random generator behind [`RandomStream`], recorded in experiment metadata.
pub const GENERATOR_NAME: &str = "ChaCha8Rng (rand_chacha 0.9)";

/// Absolute slack allowed when checking spacing and span constraints.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Static scenario parameters.
///
/// Powers are stored as the linear ratio of transmit power to noise power, so
/// no separate noise term exists anywhere in the crate. Angles are radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_antennas: usize,
    pub n_users: usize,
    /// Total span `L` available to the array, in wavelengths.
    pub span: f64,
    pub min_spacing: f64,
    pub wavelength: f64,
    pub power_ratio: Vec<f64>,
    pub rician_k: Vec<f64>,
    pub path_loss: Vec<f64>,
    pub angle: Vec<f64>,
}

impl SystemConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_antennas: usize,
        span: f64,
        min_spacing: f64,
        wavelength: f64,
        power_ratio: Vec<f64>,
        rician_k: Vec<f64>,
        path_loss: Vec<f64>,
        angle: Vec<f64>,
    ) -> Result<Self> {
        let config = Self {
            n_antennas,
            n_users: angle.len(),
            span,
            min_spacing,
            wavelength,
            power_ratio,
            rician_k,
            path_loss,
            angle,
        };
        config.validate()?;
        Ok(config)
    }

    /// Evaluation scenario with five users: 15 dB transmit SNR, K = 10,
    /// unit path loss, half-wavelength minimum spacing.
    pub fn default_scenario(n_antennas: usize, span: f64) -> Result<Self> {
        let m = DEFAULT_ANGLES.len();
        Self::new(
            n_antennas,
            span,
            0.5,
            1.0,
            vec![db_to_linear(15.0); m],
            vec![10.0; m],
            vec![1.0; m],
            DEFAULT_ANGLES.to_vec(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_antennas == 0 {
            return bad("n_antennas must be at least 1".into());
        }
        if self.n_users == 0 {
            return bad("n_users must be at least 1".into());
        }
        for (name, v) in [
            ("power_ratio", &self.power_ratio),
            ("rician_k", &self.rician_k),
            ("path_loss", &self.path_loss),
            ("angle", &self.angle),
        ] {
            if v.len() != self.n_users {
                return bad(format!(
                    "{name} has {} entries, expected {}",
                    v.len(),
                    self.n_users
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return bad(format!("{name} contains a non-finite entry"));
            }
        }
        if self.power_ratio.iter().any(|&p| p < 0.0) {
            return bad("power_ratio entries must be non-negative".into());
        }
        if self.rician_k.iter().any(|&k| k <= 0.0) {
            return bad("rician_k entries must be positive".into());
        }
        if self.path_loss.iter().any(|&b| b <= 0.0) {
            return bad("path_loss entries must be positive".into());
        }
        if !self.wavelength.is_finite() || self.wavelength <= 0.0 {
            return bad("wavelength must be positive".into());
        }
        if !self.min_spacing.is_finite()
            || self.min_spacing < 0.0
            || !self.span.is_finite()
            || self.span < 0.0
        {
            return bad("span and min_spacing must be non-negative".into());
        }
        self.constraints().check(self.n_antennas)
    }

    pub fn constraints(&self) -> Constraints {
        Constraints {
            span: self.span,
            min_spacing: self.min_spacing,
        }
    }

    pub fn with_span(&self, span: f64) -> Result<Self> {
        let mut c = self.clone();
        c.span = span;
        c.validate()?;
        Ok(c)
    }

    pub fn with_antennas(&self, n_antennas: usize) -> Result<Self> {
        let mut c = self.clone();
        c.n_antennas = n_antennas;
        c.validate()?;
        Ok(c)
    }

    /// Mixture weights `(sqrt(K b / (K + 1)), sqrt(b / (K + 1)))` for user `m`.
    pub fn mixture_weights(&self, m: usize) -> (f64, f64) {
        let k = self.rician_k[m];
        let b = self.path_loss[m];
        ((k * b / (k + 1.0)).sqrt(), (b / (k + 1.0)).sqrt())
    }

    pub(crate) fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub(crate) fn check_positions(&self, positions: &AntennaPositions) -> Result<()> {
        if positions.len() != self.n_antennas {
            return Err(Error::Dimension(format!(
                "{} positions for {} antennas",
                positions.len(),
                self.n_antennas
            )));
        }
        Ok(())
    }
}

/// Arrival angles of the five evaluation users, radians.
pub const DEFAULT_ANGLES: [f64; 5] = [0.0542, 0.8186, 0.9386, 0.2841, 0.1805];

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Spacing and span limits on a position vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub span: f64,
    pub min_spacing: f64,
}

impl Constraints {
    /// Errors when `n` antennas cannot fit in the span at the minimum spacing.
    pub fn check(&self, n: usize) -> Result<()> {
        let needed = n.saturating_sub(1) as f64 * self.min_spacing;
        if needed > self.span + FEASIBILITY_TOL {
            return Err(Error::InfeasibleGeometry {
                span: self.span,
                n_antennas: n,
                min_spacing: self.min_spacing,
            });
        }
        Ok(())
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        let (Some(&first), Some(&last)) = (x.first(), x.last()) else {
            return false;
        };
        first >= -FEASIBILITY_TOL
            && last <= self.span + FEASIBILITY_TOL
            && x.windows(2)
                .all(|w| w[1] - w[0] >= self.min_spacing - FEASIBILITY_TOL)
    }
}

/// Ordered antenna coordinates along the array axis, in wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaPositions(Vec<f64>);

impl AntennaPositions {
    /// Validated constructor; the coordinates must satisfy `constraints`.
    pub fn new(coords: Vec<f64>, constraints: &Constraints) -> Result<Self> {
        constraints.check(coords.len())?;
        if !constraints.is_feasible(&coords) {
            return Err(Error::InvalidConfig(format!(
                "positions {coords:?} violate span {} / spacing {}",
                constraints.span, constraints.min_spacing
            )));
        }
        Ok(Self(coords))
    }

    /// Wraps arbitrary coordinates. The objectives are defined on all of R^N,
    /// which finite-difference probes rely on.
    pub fn from_unchecked(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    /// `n` antennas at `spacing`, starting at zero.
    pub fn uniform(n: usize, spacing: f64) -> Self {
        Self((0..n).map(|i| i as f64 * spacing).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_feasible(&self, constraints: &Constraints) -> bool {
        constraints.is_feasible(&self.0)
    }

    pub fn translated(&self, shift: f64) -> Self {
        Self(self.0.iter().map(|x| x + shift).collect())
    }
}

/// Seed plus stream index identifying an independent, replayable draw sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

/// Each sub-stream owns 2^32 words of the ChaCha keystream.
const SUBSTREAM_WORDS_LOG2: u32 = 32;

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Generator for sub-sample `index`. Sub-streams occupy disjoint blocks of
    /// the keystream, so any subset of samples can be regenerated on its own.
    /// Index 0 coincides with [`RandomStream::rng`].
    pub fn substream_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_word_pos(u128::from(index) << SUBSTREAM_WORDS_LOG2);
        rng
    }
}

/// Line-of-sight steering vector `exp(j 2π x_n sin(angle) / λ)`.
pub fn steering_vector(positions: &AntennaPositions, angle: f64, wavelength: f64) -> CVec {
    let k = 2.0 * PI / wavelength * angle.sin();
    CVec::from_iterator(
        positions.len(),
        positions
            .as_slice()
            .iter()
            .map(|&x| C64::from_polar(1.0, k * x)),
    )
}

/// `N x M` matrix whose column `m` is the steering vector of user `m`.
pub fn los_matrix(positions: &AntennaPositions, config: &SystemConfig) -> Result<CMat> {
    config.check_positions(positions)?;
    let cols: Vec<CVec> = config
        .angle
        .iter()
        .map(|&theta| steering_vector(positions, theta, config.wavelength))
        .collect();
    Ok(CMat::from_columns(&cols))
}

/// i.i.d. circularly symmetric unit-variance complex Gaussian `n x m` matrix.
pub fn sample_nlos(stream: &RandomStream, n: usize, m: usize) -> CMat {
    sample_nlos_with(&mut stream.rng(), n, m)
}

pub fn sample_nlos_with<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> CMat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(n, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// One instantaneous channel together with the parts it was mixed from.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub los: CMat,
    pub nlos: CMat,
    /// `H(x)`; column `m` is user `m`'s channel.
    pub combined: CMat,
}

impl ChannelRealization {
    /// Mixes a precomputed LoS matrix with an NLoS draw per the Rician model.
    pub fn from_parts(los: CMat, nlos: CMat, config: &SystemConfig) -> Result<Self> {
        let shape = (config.n_antennas, config.n_users);
        if los.shape() != shape || nlos.shape() != shape {
            return Err(Error::Dimension(format!(
                "channel parts {:?}/{:?}, expected {shape:?}",
                los.shape(),
                nlos.shape()
            )));
        }
        let mut combined = CMat::zeros(shape.0, shape.1);
        for m in 0..shape.1 {
            let (a, b) = config.mixture_weights(m);
            let col = los.column(m) * C64::from(a) + nlos.column(m) * C64::from(b);
            combined.set_column(m, &col);
        }
        Ok(Self {
            los,
            nlos,
            combined,
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.combined.nrows()
    }

    pub fn n_users(&self) -> usize {
        self.combined.ncols()
    }
}

pub fn assemble_channel(
    positions: &AntennaPositions,
    config: &SystemConfig,
    nlos: CMat,
) -> Result<ChannelRealization> {
    ChannelRealization::from_parts(los_matrix(positions, config)?, nlos, config)
}
