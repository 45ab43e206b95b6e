//! Cutoff-rate polarization and the information-bit budgets it induces.
//!
//! A channel state is tracked through its Bhattacharyya-style parameter `z`
//! with `R0 = 1 - log2(1 + z)`. Splitting a channel into `(W-, W+)` along the
//! polarization tree gives per-segment cutoff rates; flooring
//! `segment_len * R0` gives the maximum number of information bits a rate
//! profile may place in that segment for low-complexity sequential decoding.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{symbol_snr, SnrConvention};
use crate::error::{Error, Result};
use crate::pac::RateProfile;

/// Slack applied before flooring so that e.g. `0.3 * 10` still yields 3.
const FLOOR_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffState {
    pub r0: f64,
    pub z: f64,
}

impl CutoffState {
    pub fn from_z(z: f64) -> Self {
        let z = z.clamp(0.0, 1.0);
        Self {
            r0: 1.0 - (1.0 + z).log2(),
            z,
        }
    }

    pub fn from_r0(r0: f64) -> Self {
        let r0 = r0.clamp(0.0, 1.0);
        Self {
            r0,
            z: 2f64.powf(1.0 - r0) - 1.0,
        }
    }

    /// Cutoff rate of the BI-AWGN channel at a given SNR: `z = exp(-Es/N0)`.
    pub fn from_snr(snr_db: f64, rate: f64, convention: SnrConvention) -> Self {
        Self::from_z((-symbol_snr(snr_db, rate, convention)).exp())
    }
}

/// How one channel splits into its `(minus, plus)` pair, in terms of `z`.
pub trait PolarizationRule: Sync {
    fn split(&self, z: f64) -> (f64, f64);
}

/// `z+ = z²`, `z- = 2z - z²`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BhattacharyyaRule;

impl PolarizationRule for BhattacharyyaRule {
    fn split(&self, z: f64) -> (f64, f64) {
        (2.0 * z - z * z, z * z)
    }
}

pub fn polarize_step(state: CutoffState, rule: &dyn PolarizationRule) -> (CutoffState, CutoffState) {
    let (minus, plus) = rule.split(state.z);
    (CutoffState::from_z(minus), CutoffState::from_z(plus))
}

/// All `2^depth` leaves of the polarization tree, all-minus leaf first.
pub fn polarize(root: CutoffState, depth: u32, rule: &dyn PolarizationRule) -> Vec<CutoffState> {
    let mut level = vec![root];
    for _ in 0..depth {
        level = level
            .into_iter()
            .flat_map(|s| {
                let (m, p) = polarize_step(s, rule);
                [m, p]
            })
            .collect();
    }
    level
}

/// Per-segment caps on the number of information bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarizationBudgets {
    pub depth: u32,
    pub caps: Vec<usize>,
    pub segment_len: usize,
}

impl PolarizationBudgets {
    /// `cap_j = floor(segment_len * r0_j)` for leaves at depth `log2(len(leaves))`.
    pub fn from_leaves(leaves: &[CutoffState], block_len: usize) -> Result<Self> {
        let segments = leaves.len();
        if segments == 0 || !segments.is_power_of_two() || !block_len.is_multiple_of(segments) {
            return Err(Error::Shape(format!(
                "{segments} leaves do not tile a block of {block_len}"
            )));
        }
        let segment_len = block_len / segments;
        let caps = leaves
            .iter()
            .map(|s| ((segment_len as f64) * s.r0 + FLOOR_SLACK).floor() as usize)
            .collect();
        Ok(Self {
            depth: segments.trailing_zeros(),
            caps,
            segment_len,
        })
    }

    /// Budgets from a design SNR, polarized `depth` times with `rule`.
    pub fn from_design_snr(
        snr_db: f64,
        rate: f64,
        convention: SnrConvention,
        depth: u32,
        block_len: usize,
        rule: &dyn PolarizationRule,
    ) -> Result<Self> {
        let root = CutoffState::from_snr(snr_db, rate, convention);
        Self::from_leaves(&polarize(root, depth, rule), block_len)
    }

    /// Explicit caps; each must fit its segment.
    pub fn from_caps(caps: Vec<usize>, block_len: usize) -> Result<Self> {
        let segments = caps.len();
        if segments == 0 || !segments.is_power_of_two() || !block_len.is_multiple_of(segments) {
            return Err(Error::Shape(format!(
                "{segments} caps do not tile a block of {block_len}"
            )));
        }
        let segment_len = block_len / segments;
        if let Some(c) = caps.iter().find(|&&c| c > segment_len) {
            return Err(Error::Config(format!(
                "cap {c} exceeds segment length {segment_len}"
            )));
        }
        Ok(Self {
            depth: segments.trailing_zeros(),
            caps,
            segment_len,
        })
    }

    /// No constraint beyond the block itself.
    pub fn unconstrained(block_len: usize) -> Self {
        Self {
            depth: 0,
            caps: vec![block_len],
            segment_len: block_len,
        }
    }

    pub fn block_len(&self) -> usize {
        self.segment_len * self.caps.len()
    }

    pub fn total(&self) -> usize {
        self.caps.iter().sum()
    }

    pub fn check_feasible(&self, k: usize) -> Result<()> {
        let available = self.total().min(self.block_len());
        if available < k {
            return Err(Error::Infeasible {
                needed: k,
                available,
            });
        }
        Ok(())
    }

    pub fn segment_of(&self, position: usize) -> usize {
        position / self.segment_len
    }
}

/// True iff every segment of `profile` stays within its cap.
pub fn check_constraint(profile: &RateProfile, budgets: &PolarizationBudgets) -> bool {
    profile.len() == budgets.block_len()
        && profile
            .segment_counts(budgets.caps.len())
            .iter()
            .zip(&budgets.caps)
            .all(|(count, cap)| count <= cap)
}

/// Draws a uniformly random feasible profile position by position.
pub fn sample_constrained_profile<R: Rng + ?Sized>(
    k: usize,
    budgets: &PolarizationBudgets,
    rng: &mut R,
) -> Result<RateProfile> {
    let n = budgets.block_len();
    sample_profile_within(k, budgets, &vec![true; n], rng)
}

/// Like [`sample_constrained_profile`] but draws from `preferred` positions
/// first; if those cannot supply `k` bits within the caps, the remainder is
/// filled from any other feasible position.
pub fn sample_profile_within<R: Rng + ?Sized>(
    k: usize,
    budgets: &PolarizationBudgets,
    preferred: &[bool],
    rng: &mut R,
) -> Result<RateProfile> {
    budgets.check_feasible(k)?;
    let n = budgets.block_len();
    let mut profile = RateProfile::frozen(n)?;
    let mut spare = budgets.caps.clone();
    let mut remaining = k;
    for use_preferred in [true, false] {
        let mut pool: Vec<usize> = (0..n)
            .filter(|&i| preferred[i] == use_preferred && !profile.is_info(i))
            .collect();
        while remaining > 0 {
            pool.retain(|&i| spare[budgets.segment_of(i)] > 0);
            let Some(&pick) = pool.choose(rng) else { break };
            pool.retain(|&i| i != pick);
            profile.set(pick, true);
            spare[budgets.segment_of(pick)] -= 1;
            remaining -= 1;
        }
    }
    debug_assert_eq!(remaining, 0);
    Ok(profile)
}
