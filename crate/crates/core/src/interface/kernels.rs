//! Gaussian-regularized Heaviside, delta, sign and damping functions.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smoothed interface kernels of half-thickness `eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizedKernels {
    pub eps: f64,
    /// Width multiplier of the damping band, at least 2.
    pub m_damp: f64,
}

impl RegularizedKernels {
    pub fn new(eps: f64, m_damp: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "interface thickness must be positive, got {eps}"
            )));
        }
        if !(m_damp >= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "damping multiplier must be at least 2, got {m_damp}"
            )));
        }
        Ok(Self { eps, m_damp })
    }

    /// Kernels with `eps = eps_factor * h` and the default damping width 2.
    pub fn for_mesh(h: f64, eps_factor: f64) -> Result<Self> {
        Self::new(eps_factor * h, 2.0)
    }

    /// `H(phi) = (1 + erf(pi phi / 3 eps)) / 2`, evaluated through `erfc` so the
    /// far tail keeps its relative accuracy.
    #[inline]
    pub fn heaviside(&self, phi: f64) -> f64 {
        0.5 * libm::erfc(-PI * phi / (3.0 * self.eps))
    }

    /// `1 - H(phi)` without cancellation.
    #[inline]
    pub fn heaviside_complement(&self, phi: f64) -> f64 {
        0.5 * libm::erfc(PI * phi / (3.0 * self.eps))
    }

    /// `delta(phi) = H'(phi) = sqrt(pi / 9) / eps * exp(-pi^2 phi^2 / 9 eps^2)`.
    #[inline]
    pub fn delta(&self, phi: f64) -> f64 {
        let s = PI * phi / (3.0 * self.eps);
        (PI / 9.0).sqrt() / self.eps * (-s * s).exp()
    }

    /// Smoothed sign `2 H - 1`.
    #[inline]
    pub fn sign(&self, phi: f64) -> f64 {
        libm::erf(PI * phi / (3.0 * self.eps))
    }

    /// `D(phi) = H(phi + m eps) - H(phi - m eps)`.
    #[inline]
    pub fn damping(&self, phi: f64) -> f64 {
        let k = PI / (3.0 * self.eps);
        let a = k * (phi + self.m_damp * self.eps);
        let b = k * (phi - self.m_damp * self.eps);
        // difference of erfc tails on the far side of the band avoids cancellation
        if phi >= 0.0 {
            0.5 * (libm::erfc(b) - libm::erfc(a))
        } else {
            0.5 * (libm::erfc(-a) - libm::erfc(-b))
        }
    }
}

pub fn heaviside_eps(phi: f64, eps: f64) -> Result<f64> {
    Ok(RegularizedKernels::new(eps, 2.0)?.heaviside(phi))
}

pub fn delta_eps(phi: f64, eps: f64) -> Result<f64> {
    Ok(RegularizedKernels::new(eps, 2.0)?.delta(phi))
}

pub fn sign_eps(phi: f64, eps: f64) -> Result<f64> {
    Ok(RegularizedKernels::new(eps, 2.0)?.sign(phi))
}

pub fn damping(phi: f64, eps: f64, m: f64) -> Result<f64> {
    Ok(RegularizedKernels::new(eps, m)?.damping(phi))
}
