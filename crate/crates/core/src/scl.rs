//! Successive cancellation list decoding of PAC codes and the list-based
//! weight-spectrum estimate used as the optimizer's fitness.
//!
//! Every path carries its own convolutional state through the data-carrier
//! estimate `v_hat`; the bit fed to the polar tree is `u_i = v_i ^ feedback`.
//! Running the list decoder on the all-zero codeword seen through a
//! noiseless channel ranks candidate paths by how many `u` decisions disagree
//! with the channel, which surfaces the low-weight codewords.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::pac::{encode_carrier, BitWord, PacCode};
use crate::sc;

#[derive(Clone, Debug, PartialEq)]
pub struct DecodePath {
    pub v_hat: BitWord,
    pub metric: f64,
}

/// Path storage laid out slot by slot so forks copy contiguous slices.
struct PathPool {
    stride: usize,
    len: usize,
    llr: Vec<f64>,
    left: Vec<u8>,
    v: Vec<u8>,
    metric: Vec<f64>,
    free: Vec<usize>,
}

impl PathPool {
    fn new(len: usize, capacity: usize) -> Self {
        let stride = len - 1;
        Self {
            stride,
            len,
            llr: Vec::with_capacity(capacity * stride),
            left: Vec::with_capacity(capacity * stride),
            v: Vec::with_capacity(capacity * len),
            metric: Vec::with_capacity(capacity),
            free: Vec::new(),
        }
    }

    fn alloc(&mut self) -> usize {
        if let Some(slot) = self.free.pop() {
            return slot;
        }
        let slot = self.metric.len();
        self.llr.resize((slot + 1) * self.stride, 0.0);
        self.left.resize((slot + 1) * self.stride, 0);
        self.v.resize((slot + 1) * self.len, 0);
        self.metric.push(0.0);
        slot
    }

    fn copy(&mut self, from: usize, to: usize) {
        let (s, n) = (self.stride, self.len);
        self.llr.copy_within(from * s..(from + 1) * s, to * s);
        self.left.copy_within(from * s..(from + 1) * s, to * s);
        self.v.copy_within(from * n..(from + 1) * n, to * n);
        self.metric[to] = self.metric[from];
    }

    fn v(&self, slot: usize) -> &[u8] {
        &self.v[slot * self.len..(slot + 1) * self.len]
    }
}

#[derive(Clone, Copy)]
struct Fork {
    metric: f64,
    rank: usize,
    bit: u8,
}

fn fork_order(a: &Fork, b: &Fork) -> Ordering {
    a.metric
        .total_cmp(&b.metric)
        .then(a.rank.cmp(&b.rank))
        .then(a.bit.cmp(&b.bit))
}

/// List decoding of `llr` keeping at most `list_size` paths; output sorted by
/// ascending metric, ties by path order.
pub fn scl_decode(llr: &[f64], code: &PacCode, list_size: usize) -> Result<Vec<DecodePath>> {
    let n = code.len();
    if llr.len() != n {
        return Err(Error::Shape(format!(
            "{} channel LLRs for a code of length {n}",
            llr.len()
        )));
    }
    if list_size == 0 {
        return Err(Error::Config("list size must be at least 1".into()));
    }
    let log_len = code.profile.log_len();
    let taps = code.poly.taps();
    let mut pool = PathPool::new(n, list_size.min(1 << code.dimension().min(20)));
    let mut scratch = vec![0u8; n];
    let mut active = vec![pool.alloc()];
    let mut decision = Vec::with_capacity(list_size);
    let mut forks: Vec<Fork> = Vec::with_capacity(2 * list_size);

    for i in 0..n {
        decision.clear();
        for &slot in &active {
            let (s, len) = (pool.stride, pool.len);
            let tree = &mut pool.llr[slot * s..(slot + 1) * s];
            let left = &pool.left[slot * s..(slot + 1) * s];
            let dec = sc::compact_decision_llr(tree, left, llr, i, log_len);
            let feedback = sc::conv_feedback(&pool.v[slot * len..(slot + 1) * len], &taps, i);
            decision.push((dec, feedback));
        }

        if !code.profile.is_info(i) {
            for (&slot, &(dec, feedback)) in active.iter().zip(&decision) {
                pool.metric[slot] += sc::penalty(dec, feedback);
                pool.v[slot * n + i] = 0;
                let left = &mut pool.left[slot * pool.stride..(slot + 1) * pool.stride];
                sc::compact_push_decision(left, &mut scratch, i, feedback, log_len);
            }
            continue;
        }

        forks.clear();
        for (rank, (&slot, &(dec, feedback))) in active.iter().zip(&decision).enumerate() {
            for bit in 0..2u8 {
                forks.push(Fork {
                    metric: pool.metric[slot] + sc::penalty(dec, bit ^ feedback),
                    rank,
                    bit,
                });
            }
        }
        if forks.len() > list_size {
            forks.select_nth_unstable_by(list_size - 1, fork_order);
            forks.truncate(list_size);
        }
        let mut keep = vec![[false; 2]; active.len()];
        for fk in &forks {
            keep[fk.rank][fk.bit as usize] = true;
        }
        let mut metric_of = vec![[0.0; 2]; active.len()];
        for fk in &forks {
            metric_of[fk.rank][fk.bit as usize] = fk.metric;
        }
        for (rank, &slot) in active.iter().enumerate() {
            if keep[rank] == [false, false] {
                pool.free.push(slot);
            }
        }
        let mut next = Vec::with_capacity(forks.len());
        for (rank, &slot) in active.iter().enumerate() {
            let feedback = decision[rank].1;
            let targets = match keep[rank] {
                [true, true] => {
                    let twin = pool.alloc();
                    pool.copy(slot, twin);
                    [Some(slot), Some(twin)]
                }
                [true, false] => [Some(slot), None],
                [false, true] => [None, Some(slot)],
                [false, false] => [None, None],
            };
            for (bit, target) in targets.into_iter().enumerate() {
                let Some(t) = target else { continue };
                let bit = bit as u8;
                pool.metric[t] = metric_of[rank][bit as usize];
                pool.v[t * n + i] = bit;
                let left = &mut pool.left[t * pool.stride..(t + 1) * pool.stride];
                sc::compact_push_decision(left, &mut scratch, i, bit ^ feedback, log_len);
                next.push(t);
            }
        }
        active = next;
    }

    let mut out: Vec<(usize, DecodePath)> = active
        .iter()
        .enumerate()
        .map(|(rank, &slot)| {
            (
                rank,
                DecodePath {
                    v_hat: BitWord::from_bits(pool.v(slot).iter().copied()),
                    metric: pool.metric[slot],
                },
            )
        })
        .collect();
    out.sort_by(|a, b| a.1.metric.total_cmp(&b.1.metric).then(a.0.cmp(&b.0)));
    Ok(out.into_iter().map(|(_, p)| p).collect())
}

/// Codeword weights of the list survivors, one per path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpectrum {
    pub list_size: usize,
    pub weights: Vec<usize>,
    /// Minimum nonzero weight observed.
    pub d: usize,
    pub a_d: usize,
}

impl WeightSpectrum {
    pub fn from_weights(list_size: usize, weights: Vec<usize>) -> Result<Self> {
        let d = weights
            .iter()
            .copied()
            .filter(|&w| w > 0)
            .min()
            .ok_or(Error::EmptySpectrum(list_size))?;
        let a_d = weights.iter().filter(|&&w| w == d).count();
        Ok(Self {
            list_size,
            weights,
            d,
            a_d,
        })
    }

    /// Weight → multiplicity, including the all-zero path at weight 0.
    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for &w in &self.weights {
            *h.entry(w).or_insert(0) += 1;
        }
        h
    }

    pub fn count(&self, weight: usize) -> usize {
        self.weights.iter().filter(|&&w| w == weight).count()
    }

    pub fn mlubv(&self, snr_db: f64, rate: f64) -> f64 {
        mlubv(&self.histogram(), snr_db, rate)
    }
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Union bound `Σ_w A_w Q(sqrt(2 w R Eb/N0))` over nonzero weights.
pub fn mlubv(histogram: &BTreeMap<usize, usize>, snr_db: f64, rate: f64) -> f64 {
    let ebn0 = 10f64.powf(snr_db / 10.0);
    histogram
        .iter()
        .filter(|(&w, _)| w > 0)
        .map(|(&w, &count)| count as f64 * q_function((2.0 * w as f64 * rate * ebn0).sqrt()))
        .sum()
}

/// List-decodes the noiseless all-zero word and re-encodes the survivors.
pub fn estimate_spectrum(code: &PacCode, list_size: usize, saturation: f64) -> Result<WeightSpectrum> {
    if list_size < 2 {
        return Err(Error::Config("spectrum estimation needs a list size of at least 2".into()));
    }
    let llr = vec![saturation; code.len()];
    let paths = scl_decode(&llr, code, list_size)?;
    let weights = paths
        .iter()
        .map(|p| encode_carrier(&p.v_hat, &code.poly).map(|x| x.weight()))
        .collect::<Result<Vec<_>>>()?;
    WeightSpectrum::from_weights(list_size, weights)
}
