//! Monte-Carlo experiment pipeline: random user placement, allocation, link
//! evaluation and aggregation of throughput and SINR versus user count.
//!
//! Trial seeds are derived as
//! `splitmix64(splitmix64(splitmix64(master) ^ n) ^ trial)`, so any single
//! trial can be re-run in isolation from `(master, n, trial)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocator::{baseline_greedy, baseline_random, build_instance, solve_bnb, ObjectiveMode};
use crate::error::{Error, Result};
use crate::linkbudget::{
    isolated_background_current, link_report, link_reports, signal_photocurrent, Assignment,
    Link,
};
use crate::optics::{gain_matrix, Wavelength};
use crate::{LinkReport, ObjectiveWeights, ReceiverModel, RoomConfig, UserPosition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocatorMode {
    OptimalSurrogate,
    OptimalTrueSinr,
    Greedy,
    Random,
}

impl AllocatorMode {
    pub fn name(self) -> &'static str {
        match self {
            AllocatorMode::OptimalSurrogate => "optimal_surrogate",
            AllocatorMode::OptimalTrueSinr => "optimal_true_sinr",
            AllocatorMode::Greedy => "greedy",
            AllocatorMode::Random => "random",
        }
    }
}

impl std::str::FromStr for AllocatorMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal_surrogate" | "optimal" | "surrogate" => Ok(AllocatorMode::OptimalSurrogate),
            "optimal_true_sinr" | "true_sinr" => Ok(AllocatorMode::OptimalTrueSinr),
            "greedy" => Ok(AllocatorMode::Greedy),
            "random" => Ok(AllocatorMode::Random),
            other => Err(Error::Config(format!("unknown allocator mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub room: RoomConfig,
    pub receiver: ReceiverModel,
    pub user_counts: Vec<usize>,
    pub trials_per_point: usize,
    pub seed: u64,
    pub allocator_mode: AllocatorMode,
    pub weights: ObjectiveWeights,
    pub target_ber: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            room: RoomConfig::default(),
            receiver: ReceiverModel::default(),
            user_counts: (1..=10).collect(),
            trials_per_point: 5,
            seed: 1,
            allocator_mode: AllocatorMode::OptimalSurrogate,
            weights: ObjectiveWeights::default(),
            target_ber: crate::linkbudget::DEFAULT_TARGET_BER,
        }
    }
}

/// Interference weight of the calibrated preset. Smaller weights let the
/// surrogate co-channel nearby users for a little extra signal; from about
/// this value on, two users are always split across wavelengths while
/// throughput still peaks at seven users.
pub const CALIBRATED_INTERFERENCE_WEIGHT: f64 = 3000.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Tabulated transmit powers and unit objective weights.
    #[default]
    Table1,
    /// Transmit powers scaled so a lone user at the room centre reaches the
    /// rate cap, plus [`CALIBRATED_INTERFERENCE_WEIGHT`].
    Calibrated,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Preset::Table1),
            "calibrated" => Ok(Preset::Calibrated),
            other => Err(Error::Config(format!("unknown preset '{other}'"))),
        }
    }
}

impl ScenarioSpec {
    /// Default spec with the calibrated preset applied.
    pub fn calibrated() -> Result<Self> {
        let mut spec = Self::default();
        spec.apply_preset(Preset::Calibrated)?;
        Ok(spec)
    }

    pub fn apply_preset(&mut self, preset: Preset) -> Result<()> {
        match preset {
            Preset::Table1 => {
                self.room.power_multiplier = 1.0;
                self.weights = ObjectiveWeights::default();
            }
            Preset::Calibrated => {
                self.room.power_multiplier =
                    calibrated_power_multiplier(&self.room, &self.receiver, self.target_ber)?;
                self.weights = ObjectiveWeights {
                    interference: CALIBRATED_INTERFERENCE_WEIGHT,
                    ..ObjectiveWeights::default()
                };
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.room.validate()?;
        self.receiver.validate()?;
        if self.trials_per_point == 0 {
            return Err(Error::Config("trials_per_point must be at least 1".into()));
        }
        if self.user_counts.is_empty() || self.user_counts.contains(&0) {
            return Err(Error::Config("user counts must be non-empty and all at least 1".into()));
        }
        if !(self.target_ber > 0.0 && self.target_ber < 0.5) {
            return Err(Error::Config(format!(
                "target BER must lie in (0, 0.5), got {}",
                self.target_ber
            )));
        }
        Ok(())
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n as u64) ^ trial as u64)
}

/// `n` users i.i.d. uniform over the communication floor (a Poisson point
/// process conditioned on its count).
pub fn generate_users(room: &RoomConfig, n: usize, seed: u64) -> Vec<UserPosition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = rng.gen_range(0.0..=room.width);
            let y = rng.gen_range(0.0..=room.length);
            UserPosition::new(x, y)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub users: Vec<UserPosition>,
    pub assignment: Assignment,
    pub links: Vec<LinkReport>,
    pub throughput_bps: f64,
    pub mean_sinr_db_all: f64,
    /// Mean over users with a non-zero achievable rate; `None` if there are none.
    pub mean_sinr_db_served: Option<f64>,
    pub wavelength_usage: [usize; 4],
    pub surrogate_objective: f64,
    pub sum_sinr: f64,
}

/// Users per wavelength (R, Y, G, B); sums to `n`.
pub fn wavelength_usage(record: &TrialRecord) -> [usize; 4] {
    record.assignment.wavelength_usage()
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Places `n` users from `seed`, allocates them and evaluates every link.
pub fn run_trial(spec: &ScenarioSpec, n: usize, trial: usize, seed: u64) -> Result<TrialRecord> {
    let users = generate_users(&spec.room, n, seed);
    let instance = build_instance(&spec.room, &users, &spec.receiver)?.with_weights(spec.weights);
    let solution = match spec.allocator_mode {
        AllocatorMode::OptimalSurrogate => solve_bnb(&instance, ObjectiveMode::Surrogate)?,
        AllocatorMode::OptimalTrueSinr => solve_bnb(&instance, ObjectiveMode::TrueSinr)?,
        AllocatorMode::Greedy => baseline_greedy(&instance)?,
        AllocatorMode::Random => baseline_random(&instance, splitmix64(seed))?,
    };
    let gains = gain_matrix(&spec.room, &users, &spec.receiver)?;
    let links = link_reports(
        &spec.room,
        &spec.receiver,
        &gains,
        &solution.assignment,
        spec.target_ber,
    )?;
    let throughput_bps = links.iter().map(|l| l.achievable_rate).sum();
    let mean_sinr_db_all = mean(links.iter().map(|l| l.sinr_db)).unwrap_or(0.0);
    let mean_sinr_db_served = mean(
        links
            .iter()
            .filter(|l| l.achievable_rate > 0.0)
            .map(|l| l.sinr_db),
    );
    Ok(TrialRecord {
        n,
        trial,
        seed,
        wavelength_usage: solution.assignment.wavelength_usage(),
        users,
        assignment: solution.assignment,
        links,
        throughput_bps,
        mean_sinr_db_all,
        mean_sinr_db_served,
        surrogate_objective: solution.surrogate_objective,
        sum_sinr: solution.sum_sinr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub n: usize,
    pub mean_throughput_bps: f64,
    pub mean_sinr_db_all: f64,
    /// Mean over trials of the served-only average, skipping trials with no served user.
    pub mean_sinr_db_served: Option<f64>,
    pub trials: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    pub master_seed: u64,
    pub allocator_mode: AllocatorMode,
    pub points: Vec<TrendPoint>,
}

impl TrendResult {
    pub fn trials(&self) -> impl Iterator<Item = &TrialRecord> {
        self.points.iter().flat_map(|p| p.trials.iter())
    }
}

fn aggregate(n: usize, trials: Vec<TrialRecord>) -> TrendPoint {
    TrendPoint {
        n,
        mean_throughput_bps: mean(trials.iter().map(|t| t.throughput_bps)).unwrap_or(0.0),
        mean_sinr_db_all: mean(trials.iter().map(|t| t.mean_sinr_db_all)).unwrap_or(0.0),
        mean_sinr_db_served: mean(trials.iter().filter_map(|t| t.mean_sinr_db_served)),
        trials,
    }
}

/// Runs every `(n, trial)` combination; trials run in parallel and are
/// reduced in `(n, trial)` order.
pub fn run_trend(spec: &ScenarioSpec) -> Result<TrendResult> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = spec
        .user_counts
        .iter()
        .flat_map(|&n| (0..spec.trials_per_point).map(move |t| (n, t)))
        .collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(n, t)| run_trial(spec, n, t, trial_seed(spec.seed, n, t)))
        .collect::<Result<_>>()?;
    let mut records = records.into_iter();
    let points = spec
        .user_counts
        .iter()
        .map(|&n| aggregate(n, records.by_ref().take(spec.trials_per_point).collect()))
        .collect();
    Ok(TrendResult {
        master_seed: spec.seed,
        allocator_mode: spec.allocator_mode,
        points,
    })
}

/// Best standalone (interference-free) rate of a single user, over all pairs.
pub fn solo_rate(room: &RoomConfig, rx: &ReceiverModel, user: UserPosition, target_ber: f64) -> Result<f64> {
    let gains = gain_matrix(room, &[user], rx)?;
    let mut best = 0.0_f64;
    for a in 0..room.n_luminaires() {
        for w in Wavelength::ALL {
            let i_s = signal_photocurrent(rx, room.tx_power(a, w), gains.get(0, a));
            let i_bg = isolated_background_current(room, rx, &gains, 0, a, w);
            let r = link_report(rx, 0, Link::new(a, w), i_s, i_bg, 0.0, target_ber);
            best = best.max(r.achievable_rate);
        }
    }
    Ok(best)
}

/// Smallest power multiplier with which a lone user at the room centre
/// reaches the receiver's rate cap.
pub fn calibrated_power_multiplier(room: &RoomConfig, rx: &ReceiverModel, target_ber: f64) -> Result<f64> {
    let at = |k: f64| -> Result<f64> {
        let scaled = RoomConfig {
            power_multiplier: k,
            ..room.clone()
        };
        solo_rate(&scaled, rx, room.center(), target_ber)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while at(hi)? < rx.rate_cap {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Config("rate cap unreachable at any transmit power".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid)? >= rx.rate_cap {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
