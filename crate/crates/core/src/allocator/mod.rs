//! Joint access-point / wavelength allocation.
//!
//! An [`AllocationInstance`] holds every coefficient of the assignment model:
//! the squared signal photocurrent and noise variance of each (user, pair)
//! link and the squared interference photocurrent a user would suffer from a
//! co-channel link on another luminaire. Solvers return an
//! [`AllocationSolution`]; all of them agree on the objective evaluation
//! implemented here.

mod baseline;
mod bnb;
mod brute;
pub mod milp;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use baseline::{baseline_greedy, baseline_random};
pub use bnb::solve_bnb;
pub use brute::{brute_force, BRUTE_FORCE_MAX_USERS};
pub use milp::{formulate_milp, MilpModel};

use crate::error::{Error, Result};
use crate::linkbudget::{
    isolated_background_current, noise_variance, signal_photocurrent, Assignment, Link,
    ReceiverModel,
};
use crate::optics::{gain_matrix, RoomConfig, UserPosition, Wavelength};
use crate::scalar::Scalar;

/// Which objective the exact solvers maximise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    /// Weighted signal minus noise minus interference, all in A².
    Surrogate,
    /// Sum over users of signal / (noise + interference).
    TrueSinr,
}

/// Weights of the signal, noise and interference sums in the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", default, deny_unknown_fields)]
pub struct ObjectiveWeights<T> {
    pub signal: T,
    pub noise: T,
    pub interference: T,
}

impl<T: Scalar> Default for ObjectiveWeights<T> {
    fn default() -> Self {
        Self {
            signal: T::one(),
            noise: T::one(),
            interference: T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AllocationInstance<T> {
    pub n_users: usize,
    pub n_luminaires: usize,
    /// `signal[u][p]`, p indexing (luminaire, wavelength) pairs lexicographically.
    pub signal: Vec<Vec<T>>,
    /// `noise[u][p]`, full-bandwidth noise variance of that link.
    pub noise: Vec<Vec<T>>,
    /// `cross[u][a][w]`: interference user `u` receives from a link on
    /// luminaire `a`, wavelength `w`.
    pub cross: Vec<Vec<[T; 4]>>,
    #[serde(default)]
    pub weights: ObjectiveWeights<T>,
}

impl<T: Scalar> AllocationInstance<T> {
    pub fn n_pairs(&self) -> usize {
        self.n_luminaires * Wavelength::COUNT
    }

    pub fn pairs(&self) -> Vec<Link> {
        (0..self.n_pairs()).map(Link::from_pair_index).collect()
    }

    pub fn signal(&self, u: usize, p: usize) -> T {
        self.signal[u][p]
    }

    pub fn noise(&self, u: usize, p: usize) -> T {
        self.noise[u][p]
    }

    pub fn cross(&self, u: usize, a: usize, w: usize) -> T {
        self.cross[u][a][w]
    }

    /// Interference inflicted on user `u` served by `(a, w)` when user `u2`
    /// is served by `(a2, w)`.
    pub fn interference(&self, u: usize, a: usize, u2: usize, a2: usize, w: Wavelength) -> T {
        if u == u2 || a == a2 {
            T::zero()
        } else {
            self.cross[u][a2][w.index()]
        }
    }

    /// Weighted `S - N` of one link.
    pub fn link_value(&self, u: usize, p: usize) -> T {
        self.weights.signal * self.signal[u][p] - self.weights.noise * self.noise[u][p]
    }

    pub fn with_weights(mut self, weights: ObjectiveWeights<T>) -> Self {
        self.weights = weights;
        self
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let scale = |m: &Vec<Vec<T>>| -> Vec<Vec<T>> {
            m.iter().map(|r| r.iter().map(|&v| v * c).collect()).collect()
        };
        Self {
            n_users: self.n_users,
            n_luminaires: self.n_luminaires,
            signal: scale(&self.signal),
            noise: scale(&self.noise),
            cross: self
                .cross
                .iter()
                .map(|r| r.iter().map(|w| w.map(|v| v * c)).collect())
                .collect(),
            weights: self.weights,
        }
    }

    /// Copy with users reordered: new user `i` is old user `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            n_users: self.n_users,
            n_luminaires: self.n_luminaires,
            signal: perm.iter().map(|&i| self.signal[i].clone()).collect(),
            noise: perm.iter().map(|&i| self.noise[i].clone()).collect(),
            cross: perm.iter().map(|&i| self.cross[i].clone()).collect(),
            weights: self.weights,
        }
    }

    /// Structural checks, including feasibility of pair uniqueness.
    pub fn validate(&self) -> Result<()> {
        let p = self.n_pairs();
        if self.n_users == 0 {
            return Err(Error::NoUsers);
        }
        if self.n_users > p {
            return Err(Error::Infeasible {
                users: self.n_users,
                pairs: p,
            });
        }
        let rows_ok = self.signal.len() == self.n_users
            && self.noise.len() == self.n_users
            && self.cross.len() == self.n_users
            && self.signal.iter().all(|r| r.len() == p)
            && self.noise.iter().all(|r| r.len() == p)
            && self.cross.iter().all(|r| r.len() == self.n_luminaires);
        if !rows_ok {
            return Err(Error::Instance(format!(
                "coefficient arrays do not match {} users x {} luminaires",
                self.n_users, self.n_luminaires
            )));
        }
        let ok = |v: &T| *v >= T::zero() && v.is_finite();
        let all_ok = self.signal.iter().flatten().all(ok)
            && self.noise.iter().flatten().all(ok)
            && self.cross.iter().flatten().flatten().all(ok);
        if !all_ok {
            return Err(Error::Instance("coefficients must be finite and non-negative".into()));
        }
        let w = self.weights;
        if ![w.signal, w.noise, w.interference].iter().all(ok) {
            return Err(Error::Instance("objective weights must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Weighted surrogate objective of an assignment given as pair indices.
    pub fn surrogate(&self, pairs: &[usize]) -> T {
        let mut total = T::zero();
        for (u, &p) in pairs.iter().enumerate() {
            let own = Link::from_pair_index(p);
            let mut intf = T::zero();
            for (u2, &p2) in pairs.iter().enumerate() {
                let other = Link::from_pair_index(p2);
                if other.wavelength == own.wavelength {
                    intf = intf + self.interference(u, own.luminaire, u2, other.luminaire, own.wavelength);
                }
            }
            total = total + self.link_value(u, p) - self.weights.interference * intf;
        }
        total
    }

    /// Sum of per-user SINR under this instance's coefficients.
    pub fn sum_sinr(&self, pairs: &[usize]) -> T {
        self.user_sinr(pairs).into_iter().sum()
    }

    pub fn user_sinr(&self, pairs: &[usize]) -> Vec<T> {
        pairs
            .iter()
            .enumerate()
            .map(|(u, &p)| {
                let own = Link::from_pair_index(p);
                let mut intf = T::zero();
                for (u2, &p2) in pairs.iter().enumerate() {
                    let other = Link::from_pair_index(p2);
                    if other.wavelength == own.wavelength {
                        intf = intf + self.interference(u, own.luminaire, u2, other.luminaire, own.wavelength);
                    }
                }
                ratio(self.signal[u][p], self.noise[u][p] + intf)
            })
            .collect()
    }

    pub fn objective(&self, mode: ObjectiveMode, pairs: &[usize]) -> T {
        match mode {
            ObjectiveMode::Surrogate => self.surrogate(pairs),
            ObjectiveMode::TrueSinr => self.sum_sinr(pairs),
        }
    }

    /// Upper bound on the absolute size of the terms summed by an objective,
    /// used to scale floating-point comparison slack.
    pub(crate) fn magnitude(&self, mode: ObjectiveMode) -> T {
        let mut total = T::zero();
        for u in 0..self.n_users {
            let mut best = T::zero();
            for p in 0..self.n_pairs() {
                let w = p % Wavelength::COUNT;
                let v = match mode {
                    ObjectiveMode::Surrogate => {
                        let cross: T = (0..self.n_luminaires).map(|a| self.cross[u][a][w]).sum();
                        self.weights.signal * self.signal[u][p]
                            + self.weights.noise * self.noise[u][p]
                            + self.weights.interference * cross * T::lit(2.0)
                    }
                    ObjectiveMode::TrueSinr => ratio(self.signal[u][p], self.noise[u][p]),
                };
                best = best.max(v);
            }
            total = total + best;
        }
        total
    }

    fn finish(&self, pairs: &[usize], stats: SolverStats) -> Result<AllocationSolution<T>> {
        let links = pairs.iter().map(|&p| Link::from_pair_index(p)).collect();
        let assignment = Assignment::new(links, self.n_luminaires)?;
        if assignment.len() != self.n_users {
            return Err(Error::Assignment(format!(
                "solver served {} of {} users",
                assignment.len(),
                self.n_users
            )));
        }
        Ok(AllocationSolution {
            surrogate_objective: self.surrogate(pairs),
            sum_sinr: self.sum_sinr(pairs),
            assignment,
            stats,
        })
    }
}

pub(crate) fn ratio<T: Scalar>(num: T, den: T) -> T {
    if den > T::zero() {
        num / den
    } else if num > T::zero() {
        T::infinity()
    } else {
        T::zero()
    }
}

/// Precomputes the model coefficients for a set of users.
pub fn build_instance<T: Scalar>(
    room: &RoomConfig<T>,
    users: &[UserPosition<T>],
    rx: &ReceiverModel<T>,
) -> Result<AllocationInstance<T>> {
    let n_pairs = room.n_luminaires() * Wavelength::COUNT;
    if users.len() > n_pairs {
        return Err(Error::Infeasible {
            users: users.len(),
            pairs: n_pairs,
        });
    }
    let gains = gain_matrix(room, users, rx)?;
    let n_lum = room.n_luminaires();
    let mut signal = Vec::with_capacity(users.len());
    let mut noise = Vec::with_capacity(users.len());
    let mut cross = Vec::with_capacity(users.len());
    for u in 0..users.len() {
        let mut s_row = Vec::with_capacity(n_pairs);
        let mut n_row = Vec::with_capacity(n_pairs);
        let mut c_row = Vec::with_capacity(n_lum);
        for a in 0..n_lum {
            let mut c = [T::zero(); 4];
            for w in Wavelength::ALL {
                let i_s = signal_photocurrent(rx, room.tx_power(a, w), gains.get(u, a));
                let i_bg = isolated_background_current(room, rx, &gains, u, a, w);
                s_row.push(i_s * i_s);
                n_row.push(noise_variance(rx, i_s, i_bg, rx.bandwidth).total);
                c[w.index()] = i_s * i_s;
            }
            c_row.push(c);
        }
        signal.push(s_row);
        noise.push(n_row);
        cross.push(c_row);
    }
    Ok(AllocationInstance {
        n_users: users.len(),
        n_luminaires: n_lum,
        signal,
        noise,
        cross,
        weights: ObjectiveWeights::default(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes_explored: u64,
    pub nodes_pruned: u64,
    /// Not serialized so that solution files are reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AllocationSolution<T> {
    pub assignment: Assignment,
    pub surrogate_objective: T,
    pub sum_sinr: T,
    pub stats: SolverStats,
}

impl<T: Scalar> AllocationSolution<T> {
    pub fn pair_indices(&self) -> Vec<usize> {
        self.assignment.links().iter().map(|l| l.pair_index()).collect()
    }

    pub fn objective(&self, mode: ObjectiveMode) -> T {
        match mode {
            ObjectiveMode::Surrogate => self.surrogate_objective,
            ObjectiveMode::TrueSinr => self.sum_sinr,
        }
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn random_users(n: usize, seed: u64) -> Vec<UserPosition<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| UserPosition::at(rng.gen_range(0.0..=4.0), rng.gen_range(0.0..=8.0)))
            .collect()
    }

    pub fn random_instance(n: usize, seed: u64) -> AllocationInstance<f64> {
        let room = RoomConfig::default();
        build_instance(&room, &random_users(n, seed), &ReceiverModel::default()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn single_user_signal_term() {
        let room = RoomConfig::<f64>::default();
        let inst = build_instance(&room, &[UserPosition::at(1.0, 1.0)], &ReceiverModel::default()).unwrap();
        let m = crate::optics::lambertian_order(70.0_f64).unwrap();
        let i_s = 0.4 * 0.8 * (m + 1.0) * 1e-4 / (8.0 * std::f64::consts::PI);
        assert!(rel(inst.signal(0, Link::new(0, Wavelength::Red).pair_index()), i_s * i_s) < 1e-12);
        assert!((inst.signal(0, 0) - 4.39e-12).abs() < 0.01e-12);
        assert_eq!(inst.n_pairs(), 32);
    }

    #[test]
    fn same_luminaire_never_interferes() {
        let inst = random_instance(3, 9);
        for u in 0..3 {
            for u2 in 0..3 {
                for a in 0..8 {
                    for w in Wavelength::ALL {
                        assert_eq!(inst.interference(u, a, u2, a, w), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn interference_depends_only_on_victim_source_and_colour() {
        let inst = random_instance(3, 4);
        for u in 0..3 {
            for a2 in 0..8 {
                for w in Wavelength::ALL {
                    let reference = inst.signal(u, Link::new(a2, w).pair_index());
                    for a in (0..8).filter(|&a| a != a2) {
                        for u2 in (0..3).filter(|&u2| u2 != u) {
                            assert_eq!(inst.interference(u, a, u2, a2, w), reference);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn too_many_users_is_infeasible() {
        let room = RoomConfig::<f64>::default();
        let users = random_users(33, 1);
        assert!(matches!(
            build_instance(&room, &users, &ReceiverModel::default()),
            Err(Error::Infeasible { users: 33, pairs: 32 })
        ));
        assert!(build_instance(&room, &users[..32], &ReceiverModel::default()).is_ok());
    }

    #[test]
    fn surrogate_by_hand() {
        let inst = random_instance(2, 5);
        let p0 = Link::new(0, Wavelength::Green).pair_index();
        let p1 = Link::new(7, Wavelength::Green).pair_index();
        let g = Wavelength::Green.index();
        let expected = inst.signal[0][p0] - inst.noise[0][p0] - inst.cross[0][7][g]
            + inst.signal[1][p1]
            - inst.noise[1][p1]
            - inst.cross[1][0][g];
        assert!(rel(inst.surrogate(&[p0, p1]), expected) < 1e-12);
        let sinr0 = inst.signal[0][p0] / (inst.noise[0][p0] + inst.cross[0][7][g]);
        let sinr1 = inst.signal[1][p1] / (inst.noise[1][p1] + inst.cross[1][0][g]);
        assert!(rel(inst.sum_sinr(&[p0, p1]), sinr0 + sinr1) < 1e-12);
    }

    #[test]
    fn validate_rejects_bad_coefficients() {
        let mut inst = random_instance(2, 2);
        inst.validate().unwrap();
        inst.noise[1][3] = -1.0;
        assert!(matches!(inst.validate(), Err(Error::Instance(_))));
        let mut inst = random_instance(2, 2);
        inst.signal.pop();
        assert!(inst.validate().is_err());
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = random_instance(3, 11);
        let text = serde_json::to_string(&inst).unwrap();
        let back: AllocationInstance<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
    }
}
