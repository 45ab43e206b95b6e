//! Fano sequential decoding of PAC codes.
//!
//! The decoder walks the PAC tree depth first. Each branch carries the metric
//! `1 - log2(1 + exp(-(1 - 2u) llr)) - bias` where `llr` is the SC decision
//! LLR for the bit and `u` the polar-input bit implied by the branch. A
//! running threshold, moved in steps of `delta`, decides whether the search
//! advances or backtracks.
//!
//! LLRs and partial sums are stored per layer at the positions of the bits
//! they cover, so values for a prefix stay valid after the search backs up
//! into it and no recomputation is needed when a sibling branch is tried.

use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffState;
use crate::error::{Error, Result};
use crate::pac::{extract_data, BitWord, PacCode, RateProfile};
use crate::sc;

pub const DEFAULT_DELTA: f64 = 2.0;

/// Default visit cap per decoded bit.
pub const DEFAULT_MAX_VISITS_PER_BIT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FanoConfig {
    pub delta: f64,
    pub biases: Vec<f64>,
    /// Total forward moves allowed before giving up.
    pub max_visits: Option<u64>,
}

impl FanoConfig {
    pub fn new(biases: Vec<f64>) -> Self {
        let max = DEFAULT_MAX_VISITS_PER_BIT * biases.len() as u64;
        Self {
            delta: DEFAULT_DELTA,
            biases,
            max_visits: Some(max),
        }
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return Err(Error::Config(format!("delta must be positive, got {}", self.delta)));
        }
        if self.biases.len() != len {
            return Err(Error::Shape(format!(
                "{} biases for a code of length {len}",
                self.biases.len()
            )));
        }
        if self.biases.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config("biases must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FanoResult {
    pub d_hat: BitWord,
    pub v_hat: BitWord,
    /// Forward moves, i.e. node arrivals including re-visits.
    pub visits: u64,
    pub anv: f64,
    pub timed_out: bool,
}

/// `1 - log2(1 + exp(-(1 - 2u) llr)) - bias`.
pub fn branch_metric(llr: f64, u: u8, bias: f64) -> f64 {
    let x = if u == 0 { -llr } else { llr };
    // log(1 + e^x), stable for large |x|
    let softplus = x.max(0.0) + (-x.abs()).exp().ln_1p();
    1.0 - softplus / std::f64::consts::LN_2 - bias
}

/// Polarized cutoff rates on information bits, zero on frozen bits.
pub fn default_biases(profile: &RateProfile, leaf_r0: &[f64]) -> Result<Vec<f64>> {
    if leaf_r0.len() != profile.len() {
        return Err(Error::Shape(format!(
            "{} per-bit cutoff rates for a profile of length {}",
            leaf_r0.len(),
            profile.len()
        )));
    }
    Ok((0..profile.len())
        .map(|i| if profile.is_info(i) { leaf_r0[i] } else { 0.0 })
        .collect())
}

/// Per-bit cutoff rates from fully polarizing `root`.
pub fn bit_channel_r0(root: CutoffState, log_len: u32, rule: &dyn crate::cutoff::PolarizationRule) -> Vec<f64> {
    crate::cutoff::polarize(root, log_len, rule)
        .into_iter()
        .map(|s| s.r0)
        .collect()
}

#[derive(Clone, Copy, Default)]
struct Branches {
    values: [u8; 2],
    metrics: [f64; 2],
    count: usize,
    feedback: u8,
}

/// Reusable decoder with buffers sized for one code.
pub struct FanoDecoder<'a> {
    code: &'a PacCode,
    cfg: &'a FanoConfig,
    taps: Vec<usize>,
    log_len: u32,
    llr: Vec<f64>,
    sums: Vec<u8>,
    v: Vec<u8>,
    metric: Vec<f64>,
    branches: Vec<Branches>,
    choice: Vec<usize>,
}

impl<'a> FanoDecoder<'a> {
    pub fn new(code: &'a PacCode, cfg: &'a FanoConfig) -> Result<Self> {
        let n = code.len();
        cfg.validate(n)?;
        let log_len = code.profile.log_len();
        Ok(Self {
            code,
            cfg,
            taps: code.poly.taps(),
            log_len,
            llr: vec![0.0; log_len as usize * n],
            sums: vec![0; log_len as usize * n],
            v: vec![0; n],
            metric: vec![0.0; n + 1],
            branches: vec![Branches::default(); n],
            choice: vec![0; n],
        })
    }

    fn decision_llr(&mut self, channel: &[f64], i: usize) -> f64 {
        let n = self.code.len();
        let log_len = self.log_len;
        if log_len == 0 {
            return channel[0];
        }
        let (start, top) = if i == 0 {
            (0, log_len)
        } else {
            let t = i.trailing_zeros();
            let h = 1usize << t;
            let s = i - h;
            for j in 0..h {
                let (a, b) = if t + 1 == log_len {
                    (channel[s + j], channel[i + j])
                } else {
                    let p = (t as usize + 1) * n;
                    (self.llr[p + s + j], self.llr[p + i + j])
                };
                self.llr[t as usize * n + i + j] = sc::g(a, b, self.sums[t as usize * n + s + j]);
            }
            (i, t)
        };
        for layer in (0..top).rev() {
            let h = 1usize << layer;
            for j in 0..h {
                let (a, b) = if layer + 1 == log_len {
                    (channel[start + j], channel[start + h + j])
                } else {
                    let p = (layer as usize + 1) * n;
                    (self.llr[p + start + j], self.llr[p + start + h + j])
                };
                self.llr[layer as usize * n + start + j] = sc::f(a, b);
            }
        }
        self.llr[i]
    }

    fn push_decision(&mut self, i: usize, u: u8) {
        let n = self.code.len();
        self.sums[i] = u;
        for layer in 0..self.log_len.saturating_sub(1) {
            if (i >> layer) & 1 == 0 {
                break;
            }
            let h = 1usize << layer;
            let s = (i >> (layer + 1)) << (layer + 1);
            let (lo, hi) = self.sums.split_at_mut((layer as usize + 1) * n);
            let cur = &lo[layer as usize * n..];
            for j in 0..h {
                hi[s + j] = cur[s + j] ^ cur[s + h + j];
                hi[s + h + j] = cur[s + h + j];
            }
        }
    }

    fn expand(&mut self, channel: &[f64], i: usize) {
        let dec = self.decision_llr(channel, i);
        let feedback = sc::conv_feedback(&self.v, &self.taps, i);
        let bias = self.cfg.biases[i];
        let br = if self.code.profile.is_info(i) {
            let m0 = branch_metric(dec, feedback, bias);
            let m1 = branch_metric(dec, 1 ^ feedback, bias);
            if m1 > m0 {
                Branches { values: [1, 0], metrics: [m1, m0], count: 2, feedback }
            } else {
                Branches { values: [0, 1], metrics: [m0, m1], count: 2, feedback }
            }
        } else {
            let m = branch_metric(dec, feedback, bias);
            Branches { values: [0, 0], metrics: [m, m], count: 1, feedback }
        };
        self.branches[i] = br;
        self.choice[i] = 0;
    }

    pub fn decode(&mut self, channel: &[f64]) -> Result<FanoResult> {
        let n = self.code.len();
        if channel.len() != n {
            return Err(Error::Shape(format!(
                "{} channel LLRs for a code of length {n}",
                channel.len()
            )));
        }
        let delta = self.cfg.delta;
        let max_visits = self.cfg.max_visits.unwrap_or(u64::MAX);
        let mut threshold = 0.0f64;
        let mut depth = 0usize;
        let mut visits = 0u64;
        self.metric[0] = 0.0;
        self.expand(channel, 0);

        loop {
            let br = self.branches[depth];
            let c = self.choice[depth];
            let forward = self.metric[depth] + br.metrics[c];
            if forward >= threshold {
                if visits >= max_visits {
                    return Ok(self.finish(depth, visits, true));
                }
                let bit = br.values[c];
                self.v[depth] = bit;
                self.push_decision(depth, bit ^ br.feedback);
                visits += 1;
                if self.metric[depth] < threshold + delta {
                    // first arrival at this node: tighten
                    while forward >= threshold + delta {
                        threshold += delta;
                    }
                }
                self.metric[depth + 1] = forward;
                depth += 1;
                if depth == n {
                    return Ok(self.finish(depth, visits, false));
                }
                self.expand(channel, depth);
                continue;
            }
            loop {
                if depth == 0 {
                    threshold -= delta;
                    self.choice[0] = 0;
                    break;
                }
                if self.metric[depth - 1] >= threshold {
                    depth -= 1;
                    if self.choice[depth] + 1 < self.branches[depth].count {
                        self.choice[depth] += 1;
                        break;
                    }
                } else {
                    threshold -= delta;
                    self.choice[depth] = 0;
                    break;
                }
            }
        }
    }

    fn finish(&self, depth: usize, visits: u64, timed_out: bool) -> FanoResult {
        let n = self.code.len();
        let mut v = vec![0u8; n];
        v[..depth].copy_from_slice(&self.v[..depth]);
        let v_hat = BitWord::from_bits(v);
        FanoResult {
            d_hat: extract_data(&v_hat, &self.code.profile),
            v_hat,
            visits,
            anv: visits as f64 / n as f64,
            timed_out,
        }
    }
}

pub fn fano_decode(llr: &[f64], code: &PacCode, cfg: &FanoConfig) -> Result<FanoResult> {
    FanoDecoder::new(code, cfg)?.decode(llr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{demodulate, frame_rng, modulate, noiseless_llr, transmit, ChannelConfig};
    use crate::cutoff::BhattacharyyaRule;
    use crate::pac::ConnectionPolynomial;
    use rand::Rng;

    fn code64() -> PacCode {
        PacCode::new(
            RateProfile::from_hex("000A467F9CCE937F", 64).unwrap(),
            ConnectionPolynomial::default(),
        )
    }

    fn biases(code: &PacCode, snr: f64) -> Vec<f64> {
        let root = CutoffState::from_snr(snr, code.rate(), Default::default());
        let r0 = bit_channel_r0(root, code.profile.log_len(), &BhattacharyyaRule);
        default_biases(&code.profile, &r0).unwrap()
    }

    #[test]
    fn branch_metric_values() {
        assert_eq!(branch_metric(0.0, 0, 0.0), 0.0);
        assert_eq!(branch_metric(0.0, 1, 0.0), 0.0);
        assert!((branch_metric(800.0, 0, 0.0) - 1.0).abs() < 1e-12);
        let expected = 1.0 - (1.0 + 2f64.exp()).log2() - 0.5;
        assert!((branch_metric(2.0, 1, 0.5) - expected).abs() < 1e-12);
        assert!(branch_metric(-800.0, 0, 0.0) < -1000.0);
    }

    #[test]
    fn bias_rules() {
        let frozen = RateProfile::frozen(8).unwrap();
        assert_eq!(default_biases(&frozen, &[0.7; 8]).unwrap(), vec![0.0; 8]);
        let p = RateProfile::from_hex("5A", 8).unwrap();
        let b = default_biases(&p, &[1.0; 8]).unwrap();
        let mask: Vec<f64> = p.mask().iter().map(|&m| m as u8 as f64).collect();
        assert_eq!(b, mask);
    }

    #[test]
    fn depth_three_recursion() {
        let r0 = bit_channel_r0(CutoffState::from_z(0.4015), 3, &BhattacharyyaRule);
        // direct recursion on z
        let mut level = vec![0.4015f64];
        for _ in 0..3 {
            level = level.iter().flat_map(|&z| [2.0 * z - z * z, z * z]).collect();
        }
        for (a, z) in r0.iter().zip(&level) {
            assert!((a - (1.0 - (1.0 + z).log2())).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_decode_has_no_backtracking() {
        let code = code64();
        let cfg = FanoConfig::new(biases(&code, 5.0));
        let mut rng = frame_rng(3, 0);
        for _ in 0..20 {
            let d: Vec<u8> = (0..32).map(|_| rng.random_range(0..2)).collect();
            let x = code.encode(&d).unwrap();
            let r = fano_decode(&noiseless_llr(&x, 20.0), &code, &cfg).unwrap();
            assert_eq!(&r.d_hat[..], &d[..]);
            assert_eq!(r.visits, 64);
            assert_eq!(r.anv, 1.0);
            assert!(!r.timed_out);
        }
    }

    #[test]
    fn deterministic_and_frozen_compliant() {
        let code = code64();
        let cfg = FanoConfig::new(biases(&code, 2.0));
        let ch = ChannelConfig::new(2.0, code.rate());
        for frame in 0..30 {
            let mut rng = frame_rng(8, frame);
            let d: Vec<u8> = (0..32).map(|_| rng.random_range(0..2)).collect();
            let x = code.encode(&d).unwrap();
            let llr = demodulate(&transmit(&modulate(&x), &ch, &mut rng), &ch);
            let a = fano_decode(&llr, &code, &cfg).unwrap();
            let b = fano_decode(&llr, &code, &cfg).unwrap();
            assert_eq!(a, b);
            assert!(a.visits >= 64);
            for i in 0..64 {
                if !code.profile.is_info(i) {
                    assert_eq!(a.v_hat[i], 0);
                }
            }
        }
    }

    #[test]
    fn timeout_returns_frozen_compliant_prefix() {
        let code = code64();
        let mut cfg = FanoConfig::new(biases(&code, 0.0));
        cfg.max_visits = Some(70);
        let ch = ChannelConfig::new(-3.0, code.rate());
        let mut timeouts = 0;
        for frame in 0..20 {
            let mut rng = frame_rng(9, frame);
            let x = code.encode(&[0; 32]).unwrap();
            let llr = demodulate(&transmit(&modulate(&x), &ch, &mut rng), &ch);
            let r = fano_decode(&llr, &code, &cfg).unwrap();
            if r.timed_out {
                timeouts += 1;
                assert_eq!(r.visits, 70);
                for i in 0..64 {
                    if !code.profile.is_info(i) {
                        assert_eq!(r.v_hat[i], 0);
                    }
                }
            }
        }
        assert!(timeouts > 0);
    }

    #[test]
    fn config_validation() {
        let code = code64();
        let mut cfg = FanoConfig::new(vec![0.0; 64]);
        cfg.delta = 0.0;
        assert!(fano_decode(&[1.0; 64], &code, &cfg).is_err());
        let cfg = FanoConfig::new(vec![0.0; 32]);
        assert!(fano_decode(&[1.0; 64], &code, &cfg).is_err());
    }
}
