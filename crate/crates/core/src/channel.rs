//! BPSK over a binary-input AWGN channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// LLR magnitude used when the channel is noiseless.
pub const DEFAULT_SATURATION: f64 = 20.0;

/// How a dB figure maps to the noise variance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrConvention {
    /// Energy per information bit; the code rate enters the variance.
    #[default]
    EbN0,
    /// Energy per transmitted symbol.
    EsN0,
}

impl std::str::FromStr for SnrConvention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ebn0" => Ok(Self::EbN0),
            "esn0" => Ok(Self::EsN0),
            other => Err(format!("unknown SNR convention {other:?} (ebn0|esn0)")),
        }
    }
}

/// Linear symbol SNR `Es/N0` for a dB figure under `convention`.
pub fn symbol_snr(snr_db: f64, rate: f64, convention: SnrConvention) -> f64 {
    let linear = 10f64.powf(snr_db / 10.0);
    match convention {
        SnrConvention::EbN0 => rate * linear,
        SnrConvention::EsN0 => linear,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub snr_db: f64,
    pub rate: f64,
    #[serde(default)]
    pub convention: SnrConvention,
    /// Skip the noise entirely; LLRs saturate at `saturation`.
    #[serde(default)]
    pub noiseless: bool,
    #[serde(default = "default_saturation")]
    pub saturation: f64,
}

fn default_saturation() -> f64 {
    DEFAULT_SATURATION
}

impl ChannelConfig {
    pub fn new(snr_db: f64, rate: f64) -> Self {
        Self {
            snr_db,
            rate,
            convention: SnrConvention::EbN0,
            noiseless: false,
            saturation: DEFAULT_SATURATION,
        }
    }

    pub fn noiseless(saturation: f64) -> Self {
        Self {
            snr_db: f64::INFINITY,
            rate: 1.0,
            convention: SnrConvention::EsN0,
            noiseless: true,
            saturation,
        }
    }

    pub fn with_convention(mut self, convention: SnrConvention) -> Self {
        self.convention = convention;
        self
    }

    /// `σ² = 1 / (2 Es/N0)`.
    pub fn noise_variance(&self) -> f64 {
        if self.noiseless {
            return 0.0;
        }
        1.0 / (2.0 * symbol_snr(self.snr_db, self.rate, self.convention))
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_variance().sqrt()
    }
}

/// `0 -> +1`, `1 -> -1`.
pub fn modulate(bits: &[u8]) -> Vec<f64> {
    bits.iter()
        .map(|&b| if b & 1 == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// Adds white Gaussian noise of the configured variance.
pub fn transmit<R: Rng + ?Sized>(symbols: &[f64], cfg: &ChannelConfig, rng: &mut R) -> Vec<f64> {
    let sigma = cfg.noise_std();
    if sigma == 0.0 {
        return symbols.to_vec();
    }
    symbols
        .iter()
        .map(|&s| {
            let n: f64 = rng.sample(StandardNormal);
            s + sigma * n
        })
        .collect()
}

/// Channel LLRs `2y/σ²`; positive favours bit 0.
pub fn demodulate(received: &[f64], cfg: &ChannelConfig) -> Vec<f64> {
    let var = cfg.noise_variance();
    if var == 0.0 || !var.is_finite() {
        return received
            .iter()
            .map(|&y| {
                if y > 0.0 {
                    cfg.saturation
                } else if y < 0.0 {
                    -cfg.saturation
                } else {
                    0.0
                }
            })
            .collect();
    }
    received.iter().map(|&y| 2.0 * y / var).collect()
}

/// Saturated LLRs for a codeword seen through a noiseless channel.
pub fn noiseless_llr(codeword: &[u8], saturation: f64) -> Vec<f64> {
    codeword
        .iter()
        .map(|&b| if b & 1 == 0 { saturation } else { -saturation })
        .collect()
}

/// Independent random stream for one frame: the same `(seed, frame)` pair
/// always yields the same stream regardless of which worker runs it.
pub fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulation_map() {
        assert_eq!(modulate(&[0, 0]), vec![1.0, 1.0]);
        assert_eq!(modulate(&[1, 1]), vec![-1.0, -1.0]);
        assert_eq!(modulate(&[0, 1, 0]), vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn noiseless_transmission_is_identity() {
        let cfg = ChannelConfig::noiseless(20.0);
        let s = modulate(&[0, 1, 1, 0]);
        let y = transmit(&s, &cfg, &mut frame_rng(1, 0));
        assert_eq!(y, s);
        assert_eq!(demodulate(&y, &cfg), vec![20.0, -20.0, -20.0, 20.0]);
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let cfg = ChannelConfig::new(2.0, 0.5);
        let s = modulate(&[0; 64]);
        let a = transmit(&s, &cfg, &mut frame_rng(7, 3));
        let b = transmit(&s, &cfg, &mut frame_rng(7, 3));
        let c = transmit(&s, &cfg, &mut frame_rng(7, 4));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_mean_is_zero() {
        let cfg = ChannelConfig::new(1.0, 0.5);
        let sigma = cfg.noise_std();
        let s = vec![1.0; 1_000_000];
        let y = transmit(&s, &cfg, &mut frame_rng(99, 0));
        let mean = y.iter().zip(&s).map(|(a, b)| a - b).sum::<f64>() / s.len() as f64;
        assert!(mean.abs() < 5.0 * sigma / 1e3, "mean {mean}");
        let var = y.iter().zip(&s).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / s.len() as f64;
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.01);
    }

    #[test]
    fn llr_definition() {
        // Es/N0 = 0.5 gives σ² = 1
        let cfg = ChannelConfig::new(10.0 * 0.5f64.log10(), 1.0).with_convention(SnrConvention::EsN0);
        assert!((cfg.noise_variance() - 1.0).abs() < 1e-12);
        let l = demodulate(&[1.0, -1.0, 0.0], &cfg);
        assert!((l[0] - 2.0).abs() < 1e-12 && (l[1] + 2.0).abs() < 1e-12);
        assert_eq!(l[2], 0.0);
    }

    #[test]
    fn conventions_agree_after_rate_shift() {
        for &(snr, rate) in &[(2.0, 0.5), (4.0, 0.25), (-1.0, 0.8)] {
            let eb = ChannelConfig::new(snr, rate);
            let es = ChannelConfig::new(snr + 10.0 * f64::log10(rate), rate)
                .with_convention(SnrConvention::EsN0);
            assert!((eb.noise_variance() - es.noise_variance()).abs() < 1e-12);
        }
    }
}
