//! Dynamic rate-profile optimization.
//!
//! An elitist evolutionary search over rate profiles restricted to the
//! polarization budgets. Fitness is the union bound computed from a list
//! decoding weight-spectrum estimate, and the list size is escalated only
//! while a candidate still looks at least as good as the best minimum
//! distance / multiplicity pair seen so far. Most candidates are discarded
//! after the smallest list size.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{SnrConvention, DEFAULT_SATURATION};
use crate::cutoff::{
    check_constraint, sample_constrained_profile, sample_profile_within, BhattacharyyaRule,
    CutoffState, PolarizationBudgets,
};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::pac::{ConnectionPolynomial, PacCode, RateProfile};
use crate::scl::{estimate_spectrum, mlubv, WeightSpectrum};

/// Relative slack on `A_d <= alpha * A_best` so that products such as
/// `1.2 * 10` compare equal to the integer they denote.
const ALPHA_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub list_schedule: Vec<usize>,
    pub alpha: f64,
    pub elite_percent: f64,
    pub pop_size: usize,
    pub max_iter: usize,
    pub fitness_snr_db: f64,
    #[serde(default = "default_saturation")]
    pub saturation: f64,
    pub seed: u64,
}

fn default_saturation() -> f64 {
    DEFAULT_SATURATION
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.list_schedule.is_empty() {
            return Err(Error::Config("list schedule is empty".into()));
        }
        if self.list_schedule[0] < 2 {
            return Err(Error::Config("list sizes must be at least 2".into()));
        }
        if self.list_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("list schedule must be strictly ascending".into()));
        }
        if self.alpha.is_nan() || self.alpha <= 1.0 {
            return Err(Error::Config(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if !(self.elite_percent > 0.0 && self.elite_percent <= 100.0) {
            return Err(Error::Config(format!(
                "elite percent must be in (0, 100], got {}",
                self.elite_percent
            )));
        }
        if self.pop_size == 0 {
            return Err(Error::Config("population size must be positive".into()));
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        ((self.pop_size as f64 * self.elite_percent / 100.0).round() as usize).clamp(1, self.pop_size)
    }
}

/// Best `(d, A_d)` seen so far; `a_d_best = None` stands for infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestRecord {
    pub d_best: usize,
    pub a_d_best: Option<usize>,
}

impl BestRecord {
    pub fn new(d_best: usize, a_d_best: Option<usize>) -> Self {
        Self { d_best, a_d_best }
    }

    /// Loop condition for list-size escalation.
    pub fn worth_escalating(&self, d: usize, a_d: usize, alpha: f64) -> bool {
        d > self.d_best || (d == self.d_best && self.within_alpha(a_d, alpha))
    }

    /// Post-loop rejection test; the exact complement of [`Self::worth_escalating`].
    pub fn rejects(&self, d: usize, a_d: usize, alpha: f64) -> bool {
        d < self.d_best || (d == self.d_best && !self.within_alpha(a_d, alpha))
    }

    fn within_alpha(&self, a_d: usize, alpha: f64) -> bool {
        match self.a_d_best {
            None => true,
            Some(best) => {
                let bound = alpha * best as f64;
                a_d as f64 <= bound * (1.0 + ALPHA_SLACK)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub profile: RateProfile,
    pub d: usize,
    pub a_d: usize,
    pub mlubv: f64,
    pub max_list_evaluated: usize,
    pub rejected: bool,
}

impl Candidate {
    /// Selection order: accepted before rejected, then ascending union bound,
    /// larger `d`, smaller `A_d`, and the mask itself.
    pub fn fitness_cmp(&self, other: &Self) -> Ordering {
        self.rejected
            .cmp(&other.rejected)
            .then(self.mlubv.total_cmp(&other.mlubv))
            .then(other.d.cmp(&self.d))
            .then(self.a_d.cmp(&other.a_d))
            .then(self.profile.mask().cmp(other.profile.mask()))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalCounters {
    /// Candidate slots processed.
    pub encounters: u64,
    pub cache_hits: u64,
    /// Spectrum evaluations per list size.
    pub per_list: BTreeMap<usize, u64>,
}

impl EvalCounters {
    pub fn new(schedule: &[usize]) -> Self {
        Self {
            per_list: schedule.iter().map(|&l| (l, 0)).collect(),
            ..Self::default()
        }
    }

    /// Row of evaluation counts with the encounter total in the `0` column.
    pub fn table(&self) -> Vec<(usize, u64)> {
        std::iter::once((0, self.encounters))
            .chain(self.per_list.iter().map(|(&l, &c)| (l, c)))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let table = self.table();
        serde_json::json!({
            "list_sizes": table.iter().map(|r| r.0).collect::<Vec<_>>(),
            "evaluations": table.iter().map(|r| r.1).collect::<Vec<_>>(),
            "encounters": self.encounters,
            "cache_hits": self.cache_hits,
            "new_profiles": self.encounters - self.cache_hits,
        })
    }
}

/// Spectrum summary kept for a profile that has been evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct CacheEntry {
    pub d: usize,
    pub a_d: usize,
    pub histogram: BTreeMap<usize, usize>,
    pub max_list: usize,
}

impl CacheEntry {
    pub fn from_spectrum(ws: &WeightSpectrum) -> Self {
        Self {
            d: ws.d,
            a_d: ws.a_d,
            histogram: ws.histogram(),
            max_list: ws.list_size,
        }
    }
}

/// Evaluations keyed by profile; the polynomial is fixed for a run.
pub type FitnessCache = HashMap<RateProfile, CacheEntry>;

/// Outcome of escalating one fresh profile through the list schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct Escalation {
    pub entry: CacheEntry,
    /// List sizes actually decoded, in order.
    pub lists: Vec<usize>,
}

/// Runs the list schedule against `spectrum_at`, stopping after the first
/// list size at which the candidate is no longer competitive with `best`.
/// Returns the last spectrum and the list sizes that were evaluated.
pub fn escalate_with<F>(
    schedule: &[usize],
    alpha: f64,
    best: &BestRecord,
    mut spectrum_at: F,
) -> Result<(WeightSpectrum, Vec<usize>)>
where
    F: FnMut(usize) -> Result<WeightSpectrum>,
{
    let mut lists = Vec::new();
    let mut last = None;
    for &l in schedule {
        let ws = spectrum_at(l)?;
        lists.push(l);
        let go_on = best.worth_escalating(ws.d, ws.a_d, alpha);
        last = Some(ws);
        if !go_on {
            break;
        }
    }
    let ws = last.ok_or_else(|| Error::Config("empty list schedule".into()))?;
    Ok((ws, lists))
}

/// Evaluates `profile` at `L_1` and escalates while the candidate is still
/// competitive with `best`; the last evaluation is final.
pub fn escalate(
    profile: &RateProfile,
    poly: &ConnectionPolynomial,
    cfg: &OptimizerConfig,
    best: &BestRecord,
) -> Result<Escalation> {
    let code = PacCode::new(profile.clone(), poly.clone());
    let (ws, lists) = escalate_with(&cfg.list_schedule, cfg.alpha, best, |l| {
        estimate_spectrum(&code, l, cfg.saturation)
    })?;
    Ok(Escalation {
        entry: CacheEntry::from_spectrum(&ws),
        lists,
    })
}

/// Applies the acceptance rule to an evaluated profile.
pub fn judge(
    profile: &RateProfile,
    entry: &CacheEntry,
    cfg: &OptimizerConfig,
    best: &BestRecord,
) -> Candidate {
    let rejected = best.rejects(entry.d, entry.a_d, cfg.alpha);
    let fitness = if rejected {
        1.0
    } else {
        mlubv(&entry.histogram, cfg.fitness_snr_db, profile.rate())
    };
    Candidate {
        profile: profile.clone(),
        d: entry.d,
        a_d: entry.a_d,
        mlubv: fitness,
        max_list_evaluated: entry.max_list,
        rejected,
    }
}

/// Single-candidate evaluation with cache and counter bookkeeping.
pub fn evaluate_candidate(
    profile: &RateProfile,
    poly: &ConnectionPolynomial,
    cfg: &OptimizerConfig,
    best: &BestRecord,
    cache: &mut FitnessCache,
    counters: &mut EvalCounters,
) -> Result<Candidate> {
    counters.encounters += 1;
    if let Some(entry) = cache.get(profile) {
        counters.cache_hits += 1;
        return Ok(judge(profile, entry, cfg, best));
    }
    let esc = escalate(profile, poly, cfg, best)?;
    for l in &esc.lists {
        *counters.per_list.entry(*l).or_insert(0) += 1;
    }
    let cand = judge(profile, &esc.entry, cfg, best);
    cache.insert(profile.clone(), esc.entry);
    Ok(cand)
}

/// Evaluates a whole population against one best record. Fresh profiles are
/// decoded through `exec`; a profile seen earlier (in the cache or in an
/// earlier slot of the same batch) counts as a cache hit, so counters do not
/// depend on the worker count.
pub fn evaluate_population(
    population: &[RateProfile],
    poly: &ConnectionPolynomial,
    cfg: &OptimizerConfig,
    best: &BestRecord,
    cache: &mut FitnessCache,
    counters: &mut EvalCounters,
    exec: Executor,
) -> Result<Vec<Candidate>> {
    let mut fresh: Vec<RateProfile> = Vec::new();
    let mut fresh_index: HashMap<&RateProfile, usize> = HashMap::new();
    for p in population {
        counters.encounters += 1;
        if cache.contains_key(p) || fresh_index.contains_key(p) {
            counters.cache_hits += 1;
        } else {
            fresh_index.insert(p, fresh.len());
            fresh.push(p.clone());
        }
    }
    let results = exec.map(&fresh, |p| escalate(p, poly, cfg, best));
    for (p, res) in fresh.iter().zip(results) {
        let esc = res?;
        for l in &esc.lists {
            *counters.per_list.entry(*l).or_insert(0) += 1;
        }
        cache.insert(p.clone(), esc.entry);
    }
    Ok(population
        .iter()
        .map(|p| judge(p, &cache[p], cfg, best))
        .collect())
}

/// Carries the elite fraction forward and fills the rest with mutants.
pub fn select_and_mutate<R: Rng + ?Sized>(
    population: &[Candidate],
    cfg: &OptimizerConfig,
    budgets: &PolarizationBudgets,
    k: usize,
    rng: &mut R,
) -> Result<Vec<RateProfile>> {
    budgets.check_feasible(k)?;
    let mut ranked: Vec<&Candidate> = population.iter().collect();
    ranked.sort_by(|a, b| a.fitness_cmp(b));
    let elites: Vec<&RateProfile> = ranked
        .iter()
        .take(cfg.elite_count().min(ranked.len()))
        .map(|c| &c.profile)
        .collect();
    let mut next: Vec<RateProfile> = elites.iter().map(|&p| p.clone()).collect();
    while next.len() < cfg.pop_size {
        let parent = *elites.choose(rng).expect("at least one elite");
        next.push(mutate(parent, budgets, k, rng));
    }
    Ok(next)
}

/// Flips one random position, then flips random positions until the profile
/// carries `k` bits and satisfies the budgets. Each repair flip is drawn from
/// the positions that move the profile toward feasibility.
pub fn mutate<R: Rng + ?Sized>(
    parent: &RateProfile,
    budgets: &PolarizationBudgets,
    k: usize,
    rng: &mut R,
) -> RateProfile {
    let n = parent.len();
    let segments = budgets.caps.len();
    let mut child = parent.clone();
    child.flip(rng.random_range(0..n));
    loop {
        let counts = child.segment_counts(segments);
        let weight: usize = counts.iter().sum();
        let over: Vec<bool> = counts.iter().zip(&budgets.caps).map(|(c, cap)| c > cap).collect();
        let pool: Vec<usize> = if over.iter().any(|&o| o) {
            (0..n)
                .filter(|&i| child.is_info(i) && over[budgets.segment_of(i)])
                .collect()
        } else if weight > k {
            (0..n).filter(|&i| child.is_info(i)).collect()
        } else if weight < k {
            (0..n)
                .filter(|&i| {
                    let s = budgets.segment_of(i);
                    !child.is_info(i) && counts[s] < budgets.caps[s]
                })
                .collect()
        } else {
            break;
        };
        let &pos = pool.choose(rng).expect("feasible budgets leave a repair move");
        child.flip(pos);
    }
    child
}

/// Where the initial population comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PopulationSource {
    RandomConstrained,
    /// Draw from the information set of the Reed-Muller code of this dimension.
    RmSubset { rm_dimension: usize },
    /// Given profiles first, random feasible profiles after.
    Profiles { profiles: Vec<RateProfile> },
}

/// Information positions of the Reed-Muller code of dimension `rm_dimension`:
/// indices whose binary weight is at least the matching threshold.
pub fn rm_information_set(len: usize, rm_dimension: usize) -> Result<Vec<bool>> {
    if !len.is_power_of_two() {
        return Err(Error::Shape(format!("length {len} is not a power of two")));
    }
    let weight = |i: usize| i.count_ones();
    let log_len = len.trailing_zeros();
    for threshold in 0..=log_len {
        let set: Vec<bool> = (0..len).map(|i| weight(i) >= threshold).collect();
        let size = set.iter().filter(|&&b| b).count();
        if size == rm_dimension {
            return Ok(set);
        }
    }
    Err(Error::Config(format!(
        "{rm_dimension} is not a Reed-Muller dimension for length {len}"
    )))
}

pub fn seed_population<R: Rng + ?Sized>(
    source: &PopulationSource,
    k: usize,
    budgets: &PolarizationBudgets,
    pop_size: usize,
    rng: &mut R,
) -> Result<Vec<RateProfile>> {
    budgets.check_feasible(k)?;
    let n = budgets.block_len();
    let mut population = Vec::with_capacity(pop_size);
    match source {
        PopulationSource::RandomConstrained => {}
        PopulationSource::RmSubset { rm_dimension } => {
            let preferred = rm_information_set(n, *rm_dimension)?;
            while population.len() < pop_size {
                population.push(sample_profile_within(k, budgets, &preferred, rng)?);
            }
        }
        PopulationSource::Profiles { profiles } => {
            for p in profiles.iter().take(pop_size) {
                if p.len() != n || p.dimension() != k {
                    return Err(Error::Shape(format!(
                        "seed profile {} does not have N={n}, K={k}",
                        p.to_hex()
                    )));
                }
                if !check_constraint(p, budgets) {
                    return Err(Error::Config(format!(
                        "seed profile {} violates the budgets",
                        p.to_hex()
                    )));
                }
                population.push(p.clone());
            }
        }
    }
    while population.len() < pop_size {
        population.push(sample_constrained_profile(k, budgets, rng)?);
    }
    Ok(population)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iteration: usize,
    /// Lowest union bound reached so far.
    pub best_mlubv: f64,
    pub d_best: usize,
    pub a_d_best: Option<usize>,
}

pub const HISTORY_HEADER: &str = "iteration,best_mlubv,d_best,a_d_best";

/// History as CSV; an unset `a_d_best` is written as `inf`.
pub fn history_csv(rows: &[HistoryRow]) -> String {
    let mut out = format!("{HISTORY_HEADER}\n");
    for r in rows {
        let a = r.a_d_best.map_or_else(|| "inf".to_string(), |a| a.to_string());
        out.push_str(&format!("{},{:.6e},{},{}\n", r.iteration, r.best_mlubv, r.d_best, a));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrpoOutcome {
    pub best_profile: RateProfile,
    pub best_candidate: Candidate,
    pub record: BestRecord,
    pub history: Vec<HistoryRow>,
    pub counters: EvalCounters,
    /// Every candidate evaluated, per iteration.
    pub evaluated: Vec<Vec<Candidate>>,
}

/// Runs the search for `cfg.max_iter` iterations.
pub fn drpo(
    cfg: &OptimizerConfig,
    poly: &ConnectionPolynomial,
    budgets: &PolarizationBudgets,
    initial_population: Vec<RateProfile>,
    initial_best: BestRecord,
    exec: Executor,
) -> Result<DrpoOutcome> {
    cfg.validate()?;
    let k = initial_population
        .first()
        .map(|p| p.dimension())
        .ok_or_else(|| Error::Config("empty initial population".into()))?;
    for p in &initial_population {
        if p.dimension() != k || !check_constraint(p, budgets) {
            return Err(Error::Config(format!(
                "initial profile {} is not a valid K={k} profile under the budgets",
                p.to_hex()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cache = FitnessCache::new();
    let mut counters = EvalCounters::new(&cfg.list_schedule);
    let mut record = initial_best;
    let mut record_holder: Option<Candidate> = None;
    let mut best_accepted: Option<Candidate> = None;
    let mut history = Vec::with_capacity(cfg.max_iter);
    let mut evaluated = Vec::with_capacity(cfg.max_iter);
    let mut population = initial_population;
    let mut last: Vec<Candidate> = Vec::new();

    if cfg.max_iter == 0 {
        let mut scratch = EvalCounters::new(&cfg.list_schedule);
        last = evaluate_population(&population, poly, cfg, &record, &mut cache, &mut scratch, exec)?;
    }

    for iteration in 1..=cfg.max_iter {
        let candidates =
            evaluate_population(&population, poly, cfg, &record, &mut cache, &mut counters, exec)?;

        let top_d = candidates.iter().map(|c| c.d).max().unwrap_or(0);
        if top_d > record.d_best {
            record = BestRecord::new(top_d, None);
            record_holder = None;
        }
        if top_d == record.d_best {
            let holder = candidates
                .iter()
                .filter(|c| c.d == record.d_best)
                .min_by_key(|c| c.a_d);
            if let Some(c) = holder {
                let improves = record.a_d_best.is_none_or(|a| c.a_d < a);
                let first_match = record_holder.is_none() && record.a_d_best == Some(c.a_d);
                if improves || first_match {
                    record.a_d_best = Some(c.a_d);
                    record_holder = Some(c.clone());
                }
            }
        }
        for c in candidates.iter().filter(|c| !c.rejected) {
            if best_accepted.as_ref().is_none_or(|b| c.fitness_cmp(b) == Ordering::Less) {
                best_accepted = Some(c.clone());
            }
        }
        history.push(HistoryRow {
            iteration,
            best_mlubv: best_accepted.as_ref().map_or(1.0, |c| c.mlubv),
            d_best: record.d_best,
            a_d_best: record.a_d_best,
        });

        population = select_and_mutate(&candidates, cfg, budgets, k, &mut rng)?;
        evaluated.push(candidates.clone());
        last = candidates;
    }

    let best_candidate = match record_holder {
        Some(c) => c,
        None => last
            .iter()
            .min_by(|a, b| a.fitness_cmp(b))
            .cloned()
            .expect("population is non-empty"),
    };
    Ok(DrpoOutcome {
        best_profile: best_candidate.profile.clone(),
        best_candidate,
        record,
        history,
        counters,
        evaluated,
    })
}

/// Full description of an optimization run, as read from a JSON config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub len: usize,
    #[serde(rename = "K")]
    pub dimension: usize,
    #[serde(default)]
    pub poly: Option<ConnectionPolynomial>,
    pub list_schedule: Vec<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_elite_percent")]
    pub elite_percent: f64,
    #[serde(default = "default_pop_size")]
    pub pop_size: usize,
    pub max_iter: usize,
    pub fitness_snr_db: f64,
    #[serde(default)]
    pub budgets: Option<Vec<usize>>,
    #[serde(default, alias = "design_snr")]
    pub design_snr_db: Option<f64>,
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default)]
    pub convention: SnrConvention,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_init")]
    pub init: PopulationSource,
    pub initial_d_best: usize,
    #[serde(default)]
    pub initial_a_d_best: Option<usize>,
    #[serde(default = "default_saturation")]
    pub saturation: f64,
}

fn default_alpha() -> f64 {
    1.2
}
fn default_elite_percent() -> f64 {
    5.0
}
fn default_pop_size() -> usize {
    100
}
fn default_init() -> PopulationSource {
    PopulationSource::RandomConstrained
}

impl RunConfig {
    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            list_schedule: self.list_schedule.clone(),
            alpha: self.alpha,
            elite_percent: self.elite_percent,
            pop_size: self.pop_size,
            max_iter: self.max_iter,
            fitness_snr_db: self.fitness_snr_db,
            saturation: self.saturation,
            seed: self.seed,
        }
    }

    pub fn budgets(&self) -> Result<PolarizationBudgets> {
        match (&self.budgets, self.design_snr_db) {
            (Some(caps), _) => PolarizationBudgets::from_caps(caps.clone(), self.len),
            (None, Some(snr)) => {
                let rate = self.dimension as f64 / self.len as f64;
                let root = CutoffState::from_snr(snr, rate, self.convention);
                let leaves = crate::cutoff::polarize(root, self.depth.unwrap_or(0), &BhattacharyyaRule);
                PolarizationBudgets::from_leaves(&leaves, self.len)
            }
            (None, None) => Ok(PolarizationBudgets::unconstrained(self.len)),
        }
    }

    pub fn run(&self, exec: Executor) -> Result<DrpoOutcome> {
        let budgets = self.budgets()?;
        budgets.check_feasible(self.dimension)?;
        let cfg = self.optimizer();
        cfg.validate()?;
        let poly = self.poly.clone().unwrap_or_default();
        // population seeding draws from its own stream so the search stream
        // is unaffected by the seeding source
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        let population = seed_population(&self.init, self.dimension, &budgets, cfg.pop_size, &mut rng)?;
        drpo(
            &cfg,
            &poly,
            &budgets,
            population,
            BestRecord::new(self.initial_d_best, self.initial_a_d_best),
            exec,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::frame_rng;

    fn cfg(schedule: Vec<usize>) -> OptimizerConfig {
        OptimizerConfig {
            list_schedule: schedule,
            alpha: 1.2,
            elite_percent: 5.0,
            pop_size: 100,
            max_iter: 1,
            fitness_snr_db: 4.0,
            saturation: 20.0,
            seed: 1,
        }
    }

    #[test]
    fn escalation_rule_boundaries() {
        let best = BestRecord::new(8, Some(10));
        assert!(best.worth_escalating(9, 1000, 1.2));
        assert!(best.worth_escalating(8, 12, 1.2));
        assert!(!best.worth_escalating(8, 13, 1.2));
        assert!(!best.worth_escalating(7, 1, 1.2));
        assert!(best.rejects(8, 13, 1.2));
        assert!(!best.rejects(8, 12, 1.2));
        let inf = BestRecord::new(8, None);
        assert!(inf.worth_escalating(8, usize::MAX, 1.2));
        assert!(!inf.rejects(8, 1 << 40, 1.2));
        for a in 0..200 {
            for d in 6..10 {
                assert_ne!(best.worth_escalating(d, a, 1.2), best.rejects(d, a, 1.2));
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(vec![100, 200]).validate().is_ok());
        assert!(cfg(vec![200, 100]).validate().is_err());
        assert!(cfg(vec![]).validate().is_err());
        let mut c = cfg(vec![4]);
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        assert_eq!(cfg(vec![4]).elite_count(), 5);
    }

    #[test]
    fn rm_set_sizes() {
        let set = rm_information_set(256, 163).unwrap();
        assert_eq!(set.iter().filter(|&&b| b).count(), 163);
        assert!(set.iter().enumerate().all(|(i, &b)| b == (i.count_ones() >= 4)));
        assert!(rm_information_set(256, 100).is_err());
        assert_eq!(rm_information_set(64, 64).unwrap(), vec![true; 64]);
    }

    #[test]
    fn mutants_are_feasible() {
        let budgets = PolarizationBudgets::from_caps(vec![2, 6, 8, 14], 64).unwrap();
        let mut rng = frame_rng(4, 0);
        let parent = sample_constrained_profile(24, &budgets, &mut rng).unwrap();
        for _ in 0..2000 {
            let child = mutate(&parent, &budgets, 24, &mut rng);
            assert_eq!(child.dimension(), 24);
            assert!(check_constraint(&child, &budgets));
        }
    }

    #[test]
    fn full_elite_keeps_population() {
        let budgets = PolarizationBudgets::unconstrained(8);
        let mut c = cfg(vec![4]);
        c.pop_size = 3;
        c.elite_percent = 100.0;
        let pop: Vec<Candidate> = ["17", "1B", "2B"]
            .iter()
            .enumerate()
            .map(|(i, h)| Candidate {
                profile: RateProfile::from_hex(h, 8).unwrap(),
                d: 2,
                a_d: 1,
                mlubv: 0.1 * (3 - i) as f64,
                max_list_evaluated: 4,
                rejected: false,
            })
            .collect();
        let next = select_and_mutate(&pop, &c, &budgets, 4, &mut frame_rng(1, 0)).unwrap();
        let mut got: Vec<String> = next.iter().map(|p| p.to_hex()).collect();
        got.sort();
        assert_eq!(got, vec!["17", "1B", "2B"]);
    }

    #[test]
    fn selection_order_puts_rejected_last() {
        let p = RateProfile::from_hex("17", 8).unwrap();
        let mk = |mlubv, rejected, d, a| Candidate {
            profile: p.clone(),
            d,
            a_d: a,
            mlubv,
            max_list_evaluated: 4,
            rejected,
        };
        assert_eq!(mk(0.5, false, 2, 1).fitness_cmp(&mk(1.0, true, 2, 1)), Ordering::Less);
        assert_eq!(mk(0.5, false, 3, 1).fitness_cmp(&mk(0.5, false, 2, 1)), Ordering::Less);
        assert_eq!(mk(0.5, false, 2, 1).fitness_cmp(&mk(0.5, false, 2, 4)), Ordering::Less);
    }

    #[test]
    fn seeding_sources() {
        let budgets = PolarizationBudgets::from_caps(vec![4, 12, 14, 16], 64).unwrap();
        let mut rng = frame_rng(2, 0);
        for src in [
            PopulationSource::RandomConstrained,
            PopulationSource::RmSubset { rm_dimension: 42 },
        ] {
            let pop = seed_population(&src, 32, &budgets, 20, &mut rng).unwrap();
            assert_eq!(pop.len(), 20);
            assert!(pop.iter().all(|p| p.dimension() == 32 && check_constraint(p, &budgets)));
        }
        let given = RateProfile::from_hex("000A467F9CCE937F", 64).unwrap();
        let src = PopulationSource::Profiles { profiles: vec![given.clone()] };
        let loose = PolarizationBudgets::unconstrained(64);
        let pop = seed_population(&src, 32, &loose, 5, &mut rng).unwrap();
        assert_eq!(pop[0], given);
        assert_eq!(pop.len(), 5);
        let bad = PopulationSource::Profiles {
            profiles: vec![RateProfile::from_hex("FFFFFFFF00000000", 64).unwrap()],
        };
        assert!(seed_population(&bad, 32, &budgets, 5, &mut rng).is_err());
    }
}
