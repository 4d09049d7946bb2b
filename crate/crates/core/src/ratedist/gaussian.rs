use crate::math;
use crate::{Error, Result};

/// Closed forms for a unit-variance Gaussian source observed at SNR `gamma`.
/// Rates are in nats; losses are mean squared errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianReport {
    pub gamma: f64,
    /// `I(X; Z) = ln(1 + gamma) / 2`.
    pub compress_rate: f64,
    /// Twice the posterior variance, `2 / (1 + gamma)`.
    pub compress_loss: f64,
    /// Indirect rate needed for `compress_loss`.
    pub indirect_rate_at_loss: f64,
    /// Indirect loss at `compress_rate`.
    pub indirect_loss_at_rate: f64,
    /// Rate-distortion-perception point reached by the compression denoiser,
    /// `(rate, loss)`.
    pub rdp_point: (f64, f64),
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("gamma = {gamma}")))
    }
}

/// Indirect rate-distortion function at loss `l`, clipped at zero.
pub fn gaussian_indirect_rate(gamma: f64, l: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let mmse = 1.0 / (1.0 + gamma);
    if l <= mmse {
        return Ok(f64::INFINITY);
    }
    Ok((0.5 * math::ln(gamma / ((1.0 + gamma) * l - 1.0))).max(0.0))
}

/// Indirect distortion-rate function at rate `r` (nats).
pub fn gaussian_indirect_loss(gamma: f64, r: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let mmse = 1.0 / (1.0 + gamma);
    Ok(mmse + gamma / (1.0 + gamma) * math::exp(-2.0 * r.max(0.0)))
}

pub fn gaussian_example(gamma: f64) -> Result<GaussianReport> {
    check_gamma(gamma)?;
    let compress_rate = 0.5 * math::ln(1.0 + gamma);
    let compress_loss = 2.0 / (1.0 + gamma);
    Ok(GaussianReport {
        gamma,
        compress_rate,
        compress_loss,
        indirect_rate_at_loss: gaussian_indirect_rate(gamma, compress_loss)?,
        indirect_loss_at_rate: gaussian_indirect_loss(gamma, compress_rate)?,
        rdp_point: (compress_rate, compress_loss),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;

    #[test]
    fn unit_snr() {
        let r = gaussian_example(1.0).unwrap();
        assert!((r.compress_loss - 1.0).abs() < 1e-15);
        assert!((r.compress_rate / LN_2 - 0.5).abs() < 1e-15);
        assert_eq!(r.indirect_rate_at_loss, 0.0);
    }

    #[test]
    fn snr_three() {
        let r = gaussian_example(3.0).unwrap();
        assert!((r.compress_loss - 0.5).abs() < 1e-15);
        assert!((r.compress_rate / LN_2 - 1.0).abs() < 1e-15);
        assert!((r.indirect_loss_at_rate - 0.4375).abs() < 1e-15);
        assert!((r.indirect_rate_at_loss - 0.5 * 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn indirect_beats_compression_everywhere() {
        for i in -40..=40 {
            let gamma = 10f64.powf(i as f64 / 10.0);
            let r = gaussian_example(gamma).unwrap();
            assert!(r.indirect_loss_at_rate < r.compress_loss);
            let closed = (1.0 + 2.0 * gamma) / ((1.0 + gamma) * (1.0 + gamma));
            assert!((r.indirect_loss_at_rate - closed).abs() < 1e-12);
        }
        let r = gaussian_example(1e-9).unwrap();
        assert!((r.compress_loss - 2.0).abs() < 1e-8 && r.compress_rate < 1e-8);
        assert!(gaussian_example(0.0).is_err());
    }
}
