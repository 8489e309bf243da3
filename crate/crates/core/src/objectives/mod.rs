//! Statistical-CSI surrogate objectives over antenna positions and their gradients.
//!
//! Each receiver family gets its own surrogate for the ergodic sum rate:
//!
//! * ZF: closed-form large-system approximation built from the LoS Gram matrix.
//! * MMSE: sample average over a fixed set of NLoS draws.
//! * MMSE-SIC: Jensen upper bound `log2 det(I + sum_m P_m E[h_m h_m^H])`.
//!
//! Gradients are analytic. [`finite_difference_gradient`] is the independent
//! check used by the tests and the `grad-check` command.

mod mmse;
mod sic;
mod zf;

pub use mmse::{mmse_saa_grad, mmse_saa_objective, MmseSampleSet};
pub use sic::{sic_bound_grad, sic_bound_objective, SicBoundContext};
pub use zf::{zf_surrogate, zf_surrogate_grad, ZfSurrogateContext};

use crate::linalg::CVec;
use crate::model::{AntennaPositions, SystemConfig};
use crate::{Result, C64};

/// Default central-difference step, wavelengths.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Something the optimizer can climb.
pub trait Objective: Sync {
    fn value(&self, positions: &AntennaPositions) -> Result<f64>;
    fn gradient(&self, positions: &AntennaPositions) -> Result<Vec<f64>>;
}

/// One of the three receiver surrogates bound to its scenario.
#[derive(Debug, Clone)]
pub enum SurrogateObjective {
    Zf {
        config: SystemConfig,
    },
    MmseSaa {
        config: SystemConfig,
        samples: MmseSampleSet,
    },
    SicBound {
        config: SystemConfig,
    },
}

impl SurrogateObjective {
    pub fn config(&self) -> &SystemConfig {
        match self {
            Self::Zf { config } | Self::MmseSaa { config, .. } | Self::SicBound { config } => {
                config
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zf { .. } => "zf-approx",
            Self::MmseSaa { .. } => "mmse-saa",
            Self::SicBound { .. } => "sic-bound",
        }
    }
}

impl Objective for SurrogateObjective {
    fn value(&self, positions: &AntennaPositions) -> Result<f64> {
        match self {
            Self::Zf { config } => zf_surrogate(positions, config),
            Self::MmseSaa { config, samples } => mmse_saa_objective(positions, config, samples),
            Self::SicBound { config } => sic_bound_objective(positions, config),
        }
    }

    fn gradient(&self, positions: &AntennaPositions) -> Result<Vec<f64>> {
        match self {
            Self::Zf { config } => zf_surrogate_grad(positions, config),
            Self::MmseSaa { config, samples } => mmse_saa_grad(positions, config, samples),
            Self::SicBound { config } => sic_bound_grad(positions, config),
        }
    }
}

/// Derivatives of the LoS phase terms with respect to a single coordinate `x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringDerivatives {
    /// `sin(θ_m) exp(j(2π x_n sin(θ_m)/λ + π/2))`
    pub b_vec: CVec,
    /// `d_m` scaled by the LoS mixture weight `sqrt(K_m β_m / (K_m + 1))`.
    pub c_scalar: Vec<C64>,
    /// `(2π/λ) b_m`, the derivative of entry `n` of the steering vector of user `m`.
    pub d_scalar: Vec<C64>,
}

impl SteeringDerivatives {
    pub fn at(x_n: f64, config: &SystemConfig) -> Self {
        let k = config.wavenumber();
        let b_vec = CVec::from_iterator(
            config.n_users,
            config.angle.iter().map(|&theta| {
                let s = theta.sin();
                C64::from_polar(s, k * x_n * s + std::f64::consts::FRAC_PI_2)
            }),
        );
        let d_scalar: Vec<C64> = b_vec.iter().map(|b| b * k).collect();
        let c_scalar = d_scalar
            .iter()
            .enumerate()
            .map(|(m, d)| d * config.mixture_weights(m).0)
            .collect();
        Self {
            b_vec,
            c_scalar,
            d_scalar,
        }
    }
}

/// Central differences `(f(x + h e_n) - f(x - h e_n)) / 2h`.
///
/// No feasibility check is applied to the perturbed points.
pub fn finite_difference_gradient<F>(
    f: F,
    positions: &AntennaPositions,
    step: f64,
) -> Result<Vec<f64>>
where
    F: Fn(&AntennaPositions) -> Result<f64>,
{
    let base = positions.as_slice();
    (0..base.len())
        .map(|n| {
            let mut plus = base.to_vec();
            let mut minus = base.to_vec();
            plus[n] += step;
            minus[n] -= step;
            let fp = f(&AntennaPositions::from_unchecked(plus))?;
            let fm = f(&AntennaPositions::from_unchecked(minus))?;
            Ok((fp - fm) / (2.0 * step))
        })
        .collect()
}

/// Largest component-wise `|a - b| / max(|a|, |b|, 1e-8)`.
pub fn gradient_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1e-8))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_constant_and_quadratic() {
        let x = AntennaPositions::from_unchecked(vec![0.3, -1.2, 4.0]);
        let g = finite_difference_gradient(|_| Ok(7.5), &x, 1e-6).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));

        let sq = |p: &AntennaPositions| Ok(p.as_slice().iter().map(|v| v * v).sum::<f64>());
        let g =
            finite_difference_gradient(sq, &AntennaPositions::from_unchecked(vec![0.0; 3]), 1e-6)
                .unwrap();
        assert!(g.iter().all(|&v| v == 0.0));

        let g =
            finite_difference_gradient(sq, &AntennaPositions::from_unchecked(vec![1.0, 2.0]), 1e-6)
                .unwrap();
        assert!(
            (g[0] - 2.0).abs() < 1e-6 && (g[1] - 4.0).abs() < 1e-6,
            "{g:?}"
        );
    }

    #[test]
    fn steering_derivative_relations() {
        let cfg = SystemConfig::default_scenario(4, 3.0).unwrap();
        let sd = SteeringDerivatives::at(1.37, &cfg);
        for m in 0..cfg.n_users {
            assert!((sd.b_vec[m].norm() - cfg.angle[m].sin().abs()).abs() < 1e-14);
            let w = cfg.mixture_weights(m).0;
            assert!((sd.c_scalar[m] - sd.d_scalar[m] * w).norm() < 1e-14);
        }
        // d_m is the derivative of exp(j 2π x sin θ_m)
        let x = AntennaPositions::from_unchecked(vec![1.37]);
        let h = 1e-7;
        for m in 0..cfg.n_users {
            let f =
                |dx: f64| crate::model::steering_vector(&x.translated(dx), cfg.angle[m], 1.0)[0];
            let fd = (f(h) - f(-h)) / (2.0 * h);
            assert!((fd - sd.d_scalar[m]).norm() < 1e-6);
        }
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(gradient_relative_error(&[0.0], &[0.0]), 0.0);
        assert!((gradient_relative_error(&[1.0, 2.0], &[1.0, 2.2]) - 0.2 / 2.2).abs() < 1e-15);
        assert!((gradient_relative_error(&[1e-12], &[0.0]) - 1e-4).abs() < 1e-18);
    }
}
