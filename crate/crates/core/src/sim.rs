//! Monte Carlo FER / ANV sweeps.
//!
//! Frame `k` of every SNR point uses random stream `k` of the run seed, so
//! the data words and the normalized noise shapes are shared across the
//! sweep and points differ only in noise scale. Frames are simulated in
//! fixed-size batches; the early-stop test runs between batches, which keeps
//! results independent of the worker count.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{demodulate, frame_rng, modulate, transmit, ChannelConfig, SnrConvention, DEFAULT_SATURATION};
use crate::cutoff::{BhattacharyyaRule, CutoffState};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::fano::{bit_channel_r0, default_biases, FanoConfig, FanoDecoder, DEFAULT_DELTA, DEFAULT_MAX_VISITS_PER_BIT};
use crate::pac::PacCode;
use crate::scl::scl_decode;

/// Source of the per-bit Fano biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BiasMode {
    /// Polarized cutoff rates on information bits; computed at `snr_db` if
    /// given, otherwise at each simulated SNR.
    PolarizedR0 { snr_db: Option<f64> },
    Zero,
    Explicit { biases: Vec<f64> },
}

impl BiasMode {
    pub fn resolve(&self, code: &PacCode, snr_db: f64, convention: SnrConvention) -> Result<Vec<f64>> {
        match self {
            BiasMode::PolarizedR0 { snr_db: fixed } => {
                let snr = fixed.unwrap_or(snr_db);
                let root = CutoffState::from_snr(snr, code.rate(), convention);
                let r0 = bit_channel_r0(root, code.profile.log_len(), &BhattacharyyaRule);
                default_biases(&code.profile, &r0)
            }
            BiasMode::Zero => Ok(vec![0.0; code.len()]),
            BiasMode::Explicit { biases } => {
                if biases.len() != code.len() {
                    return Err(Error::Shape(format!(
                        "{} biases for a code of length {}",
                        biases.len(),
                        code.len()
                    )));
                }
                Ok(biases.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decoder", rename_all = "lowercase")]
pub enum DecoderChoice {
    Fano {
        delta: f64,
        /// Visit cap per decoded bit.
        max_visits_per_bit: u64,
        bias: BiasMode,
    },
    Scl { list_size: usize },
}

impl DecoderChoice {
    pub fn fano_default() -> Self {
        DecoderChoice::Fano {
            delta: DEFAULT_DELTA,
            max_visits_per_bit: DEFAULT_MAX_VISITS_PER_BIT,
            bias: BiasMode::PolarizedR0 { snr_db: None },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub snrs_db: Vec<f64>,
    /// Frame cap per point.
    pub max_frames: u64,
    /// Frames always simulated before early stopping is considered.
    pub min_frames: u64,
    /// Stop a point once this many frame errors are seen.
    pub target_errors: u64,
    pub batch: u64,
    pub seed: u64,
    pub convention: SnrConvention,
    pub noiseless: bool,
    pub saturation: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            snrs_db: vec![],
            max_frames: 100_000,
            min_frames: 0,
            target_errors: 100,
            batch: 256,
            seed: 0,
            convention: SnrConvention::EbN0,
            noiseless: false,
            saturation: DEFAULT_SATURATION,
        }
    }
}

/// Per-point statistics; merging is associative and commutative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameStats {
    pub frames: u64,
    pub errors: u64,
    pub timeouts: u64,
    pub visit_sum: u64,
    /// Sum of squared per-frame ANV.
    pub anv_sq_sum: f64,
    pub max_visits: u64,
}

impl FrameStats {
    fn single(error: bool, timed_out: bool, visits: u64, len: usize) -> Self {
        let anv = visits as f64 / len as f64;
        Self {
            frames: 1,
            errors: error as u64,
            timeouts: timed_out as u64,
            visit_sum: visits,
            anv_sq_sum: anv * anv,
            max_visits: visits,
        }
    }

    pub fn merge(self, o: Self) -> Self {
        Self {
            frames: self.frames + o.frames,
            errors: self.errors + o.errors,
            timeouts: self.timeouts + o.timeouts,
            visit_sum: self.visit_sum + o.visit_sum,
            anv_sq_sum: self.anv_sq_sum + o.anv_sq_sum,
            max_visits: self.max_visits.max(o.max_visits),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub errors: u64,
    pub fer: f64,
    pub mean_anv: f64,
    pub anv_std: f64,
    pub max_anv: f64,
    pub timeouts: u64,
}

impl SweepPoint {
    fn from_stats(snr_db: f64, s: &FrameStats, len: usize) -> Self {
        let frames = s.frames.max(1) as f64;
        let mean_anv = s.visit_sum as f64 / len as f64 / frames;
        let var = (s.anv_sq_sum / frames - mean_anv * mean_anv).max(0.0);
        Self {
            snr_db,
            frames: s.frames,
            errors: s.errors,
            fer: s.errors as f64 / frames,
            mean_anv,
            anv_std: var.sqrt(),
            max_anv: s.max_visits as f64 / len as f64,
            timeouts: s.timeouts,
        }
    }

    /// Binomial standard error of the FER estimate.
    pub fn fer_std_error(&self) -> f64 {
        (self.fer * (1.0 - self.fer) / self.frames.max(1) as f64).sqrt()
    }

    /// Standard error of the mean ANV.
    pub fn anv_std_error(&self) -> f64 {
        self.anv_std / (self.frames.max(1) as f64).sqrt()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

pub const CSV_HEADER: &str = "snr_db,frames,errors,fer,mean_anv,timeouts,anv_std,max_anv";

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{:.6e},{:.6},{},{:.6},{:.6}",
                p.snr_db, p.frames, p.errors, p.fer, p.mean_anv, p.timeouts, p.anv_std, p.max_anv
            );
        }
        out
    }
}

/// Simulates one frame; returns `(frame error, timed out, visits)`.
fn simulate_frame(
    code: &PacCode,
    channel: &ChannelConfig,
    decoder: &PreparedDecoder,
    seed: u64,
    frame: u64,
) -> Result<FrameStats> {
    let mut rng = frame_rng(seed, frame);
    let data: Vec<u8> = (0..code.dimension()).map(|_| rng.random_range(0..2u8)).collect();
    let x = code.encode(&data)?;
    let y = transmit(&modulate(&x), channel, &mut rng);
    let llr = demodulate(&y, channel);
    let n = code.len();
    let stats = match decoder {
        PreparedDecoder::Fano(cfg) => {
            let r = FanoDecoder::new(code, cfg)?.decode(&llr)?;
            let wrong = r.timed_out || r.d_hat[..] != data[..];
            FrameStats::single(wrong, r.timed_out, r.visits, n)
        }
        PreparedDecoder::Scl(l) => {
            let paths = scl_decode(&llr, code, *l)?;
            let d_hat = crate::pac::extract_data(&paths[0].v_hat, &code.profile);
            FrameStats::single(d_hat[..] != data[..], false, n as u64, n)
        }
    };
    Ok(stats)
}

enum PreparedDecoder {
    Fano(FanoConfig),
    Scl(usize),
}

fn prepare(code: &PacCode, decoder: &DecoderChoice, snr_db: f64, convention: SnrConvention) -> Result<PreparedDecoder> {
    Ok(match decoder {
        DecoderChoice::Fano {
            delta,
            max_visits_per_bit,
            bias,
        } => {
            let mut cfg = FanoConfig::new(bias.resolve(code, snr_db, convention)?);
            cfg.delta = *delta;
            cfg.max_visits = Some(max_visits_per_bit.saturating_mul(code.len() as u64));
            cfg.validate(code.len())?;
            PreparedDecoder::Fano(cfg)
        }
        DecoderChoice::Scl { list_size } => {
            if *list_size == 0 {
                return Err(Error::Config("list size must be at least 1".into()));
            }
            PreparedDecoder::Scl(*list_size)
        }
    })
}

/// Runs one SNR point.
pub fn simulate_point(
    code: &PacCode,
    decoder: &DecoderChoice,
    snr_db: f64,
    cfg: &SweepConfig,
    exec: Executor,
) -> Result<SweepPoint> {
    let prepared = prepare(code, decoder, snr_db, cfg.convention)?;
    let channel = if cfg.noiseless {
        ChannelConfig::noiseless(cfg.saturation)
    } else {
        ChannelConfig {
            snr_db,
            rate: code.rate(),
            convention: cfg.convention,
            noiseless: false,
            saturation: cfg.saturation,
        }
    };
    let batch = cfg.batch.max(1);
    let mut total = FrameStats::default();
    while total.frames < cfg.max_frames {
        if total.frames >= cfg.min_frames && total.errors >= cfg.target_errors {
            break;
        }
        let count = batch.min(cfg.max_frames - total.frames);
        let outcomes = exec.map_range(total.frames, count, |frame| {
            simulate_frame(code, &channel, &prepared, cfg.seed, frame)
        });
        for o in outcomes {
            total = total.merge(o?);
        }
    }
    Ok(SweepPoint::from_stats(snr_db, &total, code.len()))
}

pub fn simulate(code: &PacCode, decoder: &DecoderChoice, cfg: &SweepConfig, exec: Executor) -> Result<SweepResult> {
    let points = cfg
        .snrs_db
        .iter()
        .map(|&snr| simulate_point(code, decoder, snr, cfg, exec))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pac::{ConnectionPolynomial, RateProfile};

    fn code64() -> PacCode {
        PacCode::new(
            RateProfile::from_hex("000A467F9CCE937F", 64).unwrap(),
            ConnectionPolynomial::default(),
        )
    }

    #[test]
    fn noiseless_sweep_has_floor_values() {
        let cfg = SweepConfig {
            snrs_db: vec![3.0],
            max_frames: 64,
            noiseless: true,
            batch: 16,
            ..Default::default()
        };
        let r = simulate(&code64(), &DecoderChoice::fano_default(), &cfg, Executor::Sequential).unwrap();
        let p = &r.points[0];
        assert_eq!((p.frames, p.errors, p.fer, p.mean_anv), (64, 0, 0.0, 1.0));
    }

    #[test]
    fn executors_agree() {
        let cfg = SweepConfig {
            snrs_db: vec![2.0],
            max_frames: 96,
            target_errors: 5,
            batch: 32,
            seed: 3,
            ..Default::default()
        };
        let code = code64();
        let dec = DecoderChoice::fano_default();
        let a = simulate(&code, &dec, &cfg, Executor::Sequential).unwrap();
        let b = simulate(&code, &dec, &cfg, Executor::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points[0].frames % 32, 0);
    }

    #[test]
    fn stats_merge_is_associative() {
        let a = FrameStats::single(true, false, 100, 64);
        let b = FrameStats::single(false, true, 70, 64);
        let c = FrameStats::single(false, false, 64, 64);
        assert_eq!(a.merge(b).merge(c), a.merge(b.merge(c)));
        assert_eq!(a.merge(b), b.merge(a));
    }

    #[test]
    fn csv_layout() {
        let r = SweepResult {
            points: vec![SweepPoint {
                snr_db: 2.5,
                frames: 10,
                errors: 1,
                fer: 0.1,
                mean_anv: 1.5,
                anv_std: 0.5,
                max_anv: 3.0,
                timeouts: 0,
            }],
        };
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("2.5,10,1,1.000000e-1,1.500000,0,0.500000,3.000000"));
    }
}
