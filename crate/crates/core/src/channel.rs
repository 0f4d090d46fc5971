//! BPSK over AWGN and LLR quantization.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Arithmetic mode of a decoder run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum QuantMode {
    #[default]
    Float,
    Fixed,
}

/// Bit widths of the fixed-point datapath.
///
/// Channel and internal LLRs share the fractional resolution; path metrics
/// are unsigned `pm_bits`-wide accumulators at the same resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizationSpec {
    pub channel_bits: u32,
    pub internal_bits: u32,
    pub frac_bits: u32,
    pub pm_bits: u32,
    pub mode: QuantMode,
}

impl Default for QuantizationSpec {
    /// 4-bit channel LLRs, 6-bit internal LLRs with 2 fractional bits, 8-bit PMs.
    fn default() -> Self {
        Self { channel_bits: 4, internal_bits: 6, frac_bits: 2, pm_bits: 8, mode: QuantMode::Fixed }
    }
}

/// Which LLR word width to quantize to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlrWidth {
    Channel,
    Internal,
}

impl QuantizationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.channel_bits < 2 || self.internal_bits > 31 || self.pm_bits == 0 || self.pm_bits > 31 {
            return domain(format!("unsupported bit widths {self:?}"));
        }
        if self.channel_bits > self.internal_bits {
            return domain("channel LLR width exceeds internal width");
        }
        if self.frac_bits >= self.internal_bits {
            return domain("fractional bits must be fewer than internal bits");
        }
        Ok(())
    }

    /// Largest channel magnitude in units of `2^-frac_bits`.
    pub fn channel_max_raw(&self) -> i32 {
        (1i32 << (self.channel_bits - 1)) - 1
    }

    pub fn internal_max_raw(&self) -> i32 {
        (1i32 << (self.internal_bits - 1)) - 1
    }

    pub fn metric_max_raw(&self) -> i32 {
        ((1i64 << self.pm_bits) - 1) as i32
    }

    pub fn resolution(&self) -> f64 {
        1.0 / f64::from(1u32 << self.frac_bits)
    }
}

/// Rounds to the nearest multiple of `2^-frac_bits` (halves away from zero)
/// and saturates symmetrically. Float mode passes values through.
pub fn quantize(llr: f64, spec: &QuantizationSpec, which: LlrWidth) -> f64 {
    if spec.mode == QuantMode::Float {
        return llr;
    }
    let max = match which {
        LlrWidth::Channel => spec.channel_max_raw(),
        LlrWidth::Internal => spec.internal_max_raw(),
    };
    let scale = f64::from(1u32 << spec.frac_bits);
    let mag = (llr.abs() * scale).round().min(f64::from(max));
    llr.signum() * mag / scale
}

/// BPSK modulation over an AWGN channel, producing channel LLRs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnChannel {
    sigma2: f64,
    noiseless: bool,
}

impl AwgnChannel {
    /// `sigma^2 = 1 / (2 R 10^(Eb/N0 / 10))`.
    pub fn new(ebn0_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return domain(format!("code rate {rate} outside (0, 1]"));
        }
        let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0));
        Ok(Self { sigma2, noiseless: false })
    }

    /// Suppresses the noise while keeping the LLR scaling.
    pub fn noiseless(mut self) -> Self {
        self.noiseless = true;
        self
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Channel LLRs `2y / sigma^2` for the codeword `x`.
    pub fn transmit<R: Rng + ?Sized>(&self, x: &[u8], rng: &mut R) -> Vec<f64> {
        let sigma = self.sigma2.sqrt();
        let scale = 2.0 / self.sigma2;
        x.iter()
            .map(|&b| {
                let symbol = 1.0 - 2.0 * f64::from(b);
                let noise: f64 = if self.noiseless { 0.0 } else { rng.sample::<f64, _>(StandardNormal) * sigma };
                scale * (symbol + noise)
            })
            .collect()
    }
}

/// One-shot form of [`AwgnChannel::transmit`].
pub fn transmit<R: Rng + ?Sized>(x: &[u8], ebn0_db: f64, rate: f64, rng: &mut R) -> Result<Vec<f64>> {
    Ok(AwgnChannel::new(ebn0_db, rate)?.transmit(x, rng))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for `(seed, stream, frame)`; the result does not
/// depend on which worker draws it or in what order.
pub fn frame_rng(seed: u64, stream: u64, frame: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ frame);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed() -> QuantizationSpec {
        QuantizationSpec::default()
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.0, &fixed(), LlrWidth::Internal), 0.0);
        assert_eq!(quantize(100.0, &fixed(), LlrWidth::Internal), 7.75);
        assert_eq!(quantize(-100.0, &fixed(), LlrWidth::Internal), -7.75);
        assert_eq!(quantize(1.3, &fixed(), LlrWidth::Internal), 1.25);
        assert_eq!(quantize(100.0, &fixed(), LlrWidth::Channel), 1.75);
        // halves round away from zero
        assert_eq!(quantize(0.125, &fixed(), LlrWidth::Internal), 0.25);
        assert_eq!(quantize(-0.125, &fixed(), LlrWidth::Internal), -0.25);
        let float = QuantizationSpec { mode: QuantMode::Float, ..fixed() };
        assert_eq!(quantize(1.3, &float, LlrWidth::Internal), 1.3);
    }

    #[test]
    fn spec_validation() {
        assert!(fixed().validate().is_ok());
        assert!(QuantizationSpec { channel_bits: 7, ..fixed() }.validate().is_err());
        assert!(QuantizationSpec { frac_bits: 6, ..fixed() }.validate().is_err());
    }

    #[test]
    fn noiseless_signs() {
        let ch = AwgnChannel::new(1.0, 0.5).unwrap().noiseless();
        let mut rng = frame_rng(1, 0, 0);
        let llr = ch.transmit(&[0, 1], &mut rng);
        assert!(llr[0] > 0.0 && llr[1] < 0.0);
        assert!(transmit(&[0], 1.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn seeded_streams_repeat() {
        let ch = AwgnChannel::new(2.0, 0.5).unwrap();
        let a = ch.transmit(&[0; 64], &mut frame_rng(7, 3, 11));
        let b = ch.transmit(&[0; 64], &mut frame_rng(7, 3, 11));
        let c = ch.transmit(&[0; 64], &mut frame_rng(7, 3, 12));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn llr_moments() {
        let ch = AwgnChannel::new(1.5, 0.5).unwrap();
        let count = 100_000;
        let llr = ch.transmit(&vec![0u8; count], &mut frame_rng(42, 0, 0));
        let mean = llr.iter().sum::<f64>() / count as f64;
        let var = llr.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
        let want_mean = 2.0 / ch.sigma2();
        let want_var = 4.0 / ch.sigma2();
        let stderr = (want_var / count as f64).sqrt();
        assert!((mean - want_mean).abs() < 3.0 * stderr, "mean {mean} vs {want_mean}");
        // sample variance of a Gaussian has relative standard error sqrt(2/(n-1))
        let var_stderr = want_var * (2.0 / (count - 1) as f64).sqrt();
        assert!((var - want_var).abs() < 4.0 * var_stderr, "var {var} vs {want_var}");
    }
}
