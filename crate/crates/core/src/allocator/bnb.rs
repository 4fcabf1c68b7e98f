use std::collections::HashMap;
use std::rc::Rc;
use std::time::Instant;

use super::{baseline_greedy, ratio, AllocationInstance, AllocationSolution, ObjectiveMode, SolverStats};
use crate::error::{Error, Result};
use crate::optics::Wavelength;
use crate::scalar::Scalar;

/// Relative slack on bound comparisons; keeps every node that could hold an
/// assignment tying the incumbent up to rounding.
const PRUNE_SLACK: f64 = 1e-9;

/// Exact branch-and-bound over the allocation model.
///
/// Both objectives separate by wavelength once every user's wavelength is
/// fixed: users on different wavelengths never interact. The search is
/// therefore depth-first over users in index order, branching on the
/// wavelength; the luminaires of each wavelength group are then chosen by an
/// exhaustive sub-search whose result is memoised per (wavelength, group).
///
/// A node's bound is the exact optimum of every partial group (adding users
/// to a group can only add their own best link value and subtract
/// interference) plus, for each unassigned user, its best wavelength after
/// charging the cheapest possible interference with that group's members. In
/// surrogate mode the interference unassigned users must inflict on each
/// other is charged too: spreading `r` users over the wavelengths forces at
/// least a balanced split's worth of co-channel pairs.
///
/// Wavelengths with bit-identical coefficients are interchangeable, so only
/// assignments that open them in index order are searched. Among optimal
/// assignments the lexicographically smallest sequence of (luminaire,
/// wavelength) pairs is returned.
pub fn solve_bnb<T: Scalar>(
    inst: &AllocationInstance<T>,
    mode: ObjectiveMode,
) -> Result<AllocationSolution<T>> {
    inst.validate()?;
    if inst.n_users > 64 {
        return Err(Error::Instance("branch-and-bound supports at most 64 users".into()));
    }
    let start = Instant::now();
    let mut search = Search::new(inst, mode);
    let greedy = baseline_greedy(inst)?.pair_indices();
    search.best_value = inst.objective(mode, &greedy);
    search.best = greedy;
    search.descend(0);
    let Search { best, mut stats, .. } = search;
    stats.wall_time = start.elapsed();
    inst.finish(&best, stats)
}

/// Optimal luminaire maps of one wavelength group.
struct GroupOpt<T> {
    value: T,
    /// Every map within the slack of `value`; luminaire per member in
    /// ascending user order.
    maps: Vec<Vec<usize>>,
}

struct Search<'a, T> {
    inst: &'a AllocationInstance<T>,
    mode: ObjectiveMode,
    slack: T,
    /// Wavelength of each assigned user.
    colour: Vec<usize>,
    groups: [u64; Wavelength::COUNT],
    /// Best own value of user v on wavelength w, ignoring interference.
    solo: Vec<[T; Wavelength::COUNT]>,
    /// `floor[w][v][u]`: least mutual interference of `u` and `v` on `w`.
    floor: Vec<Vec<Vec<T>>>,
    /// `floor_any[v][u]`: minimum over wavelengths.
    floor_any: Vec<Vec<T>>,
    interchangeable_with: [Option<usize>; Wavelength::COUNT],
    cache: HashMap<(usize, u64), Rc<GroupOpt<T>>>,
    scratch: Vec<T>,
    best: Vec<usize>,
    best_value: T,
    stats: SolverStats,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn new(inst: &'a AllocationInstance<T>, mode: ObjectiveMode) -> Self {
        let n = inst.n_users;
        let n_lum = inst.n_luminaires;
        let own = |v: usize, p: usize| match mode {
            ObjectiveMode::Surrogate => inst.link_value(v, p),
            ObjectiveMode::TrueSinr => ratio(inst.signal(v, p), inst.noise(v, p)),
        };
        let solo = (0..n)
            .map(|v| {
                let mut best = [T::neg_infinity(); Wavelength::COUNT];
                for (w, slot) in best.iter_mut().enumerate() {
                    for a in 0..n_lum {
                        *slot = slot.max(own(v, a * Wavelength::COUNT + w));
                    }
                }
                best
            })
            .collect();
        let mut floor = vec![vec![vec![T::zero(); n]; n]; Wavelength::COUNT];
        let mut floor_any = vec![vec![T::zero(); n]; n];
        if mode == ObjectiveMode::Surrogate {
            for v in 0..n {
                for u in v + 1..n {
                    let mut any = T::infinity();
                    for (w, fw) in floor.iter_mut().enumerate() {
                        let mut m = T::infinity();
                        for a in 0..n_lum {
                            for b in (0..n_lum).filter(|&b| b != a) {
                                m = m.min(inst.cross(v, b, w) + inst.cross(u, a, w));
                            }
                        }
                        let m = if m.is_finite() {
                            inst.weights.interference * m
                        } else {
                            T::zero()
                        };
                        fw[v][u] = m;
                        fw[u][v] = m;
                        any = any.min(m);
                    }
                    floor_any[v][u] = any;
                    floor_any[u][v] = any;
                }
            }
        }
        let mut interchangeable_with = [None; Wavelength::COUNT];
        for (w, slot) in interchangeable_with.iter_mut().enumerate() {
            *slot = (0..w).rev().find(|&w0| same_columns(inst, w0, w));
        }
        Self {
            inst,
            mode,
            slack: T::lit(PRUNE_SLACK) * inst.magnitude(mode),
            colour: Vec::with_capacity(n),
            groups: [0; Wavelength::COUNT],
            solo,
            floor,
            floor_any,
            interchangeable_with,
            cache: HashMap::new(),
            scratch: Vec::with_capacity(n * n),
            best: Vec::new(),
            best_value: T::neg_infinity(),
            stats: SolverStats::default(),
        }
    }

    fn group(&mut self, w: usize, mask: u64) -> Rc<GroupOpt<T>> {
        if let Some(g) = self.cache.get(&(w, mask)) {
            return Rc::clone(g);
        }
        let members: Vec<usize> = (0..self.inst.n_users).filter(|&u| mask >> u & 1 == 1).collect();
        let g = Rc::new(solve_group(self.inst, self.mode, w, &members, self.slack));
        self.cache.insert((w, mask), Rc::clone(&g));
        g
    }

    fn allowed(&self, w: usize) -> bool {
        if self.groups[w].count_ones() as usize >= self.inst.n_luminaires {
            return false;
        }
        match self.interchangeable_with[w] {
            Some(w0) => self.groups[w] != 0 || self.groups[w0] != 0,
            None => true,
        }
    }

    /// Best value user `v` could add on wavelength `w` given the current groups.
    fn marginal(&self, v: usize, w: usize) -> T {
        let mut m = self.solo[v][w];
        if self.mode == ObjectiveMode::Surrogate {
            let mut g = self.groups[w];
            while g != 0 {
                let u = g.trailing_zeros() as usize;
                m = m - self.floor[w][v][u];
                g &= g - 1;
            }
        }
        m
    }

    fn bound(&mut self, k: usize) -> T {
        let mut total = T::zero();
        for w in 0..Wavelength::COUNT {
            if self.groups[w] != 0 {
                total = total + self.group(w, self.groups[w]).value;
            }
        }
        let n = self.inst.n_users;
        for v in k..n {
            let best = (0..Wavelength::COUNT)
                .filter(|&w| self.groups[w].count_ones() < self.inst.n_luminaires as u32)
                .map(|w| self.marginal(v, w))
                .fold(T::neg_infinity(), T::max);
            total = total + best;
        }
        if self.mode == ObjectiveMode::Surrogate {
            let forced = forced_pairs(n - k, Wavelength::COUNT);
            if forced > 0 {
                self.scratch.clear();
                for v in k..n {
                    for u in v + 1..n {
                        self.scratch.push(self.floor_any[v][u]);
                    }
                }
                let cheapest = &mut self.scratch[..];
                cheapest.select_nth_unstable_by(forced - 1, |a, b| {
                    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
                });
                let charge: T = cheapest[..forced].iter().copied().sum();
                total = total - charge;
            }
        }
        total
    }

    fn descend(&mut self, k: usize) {
        self.stats.nodes_explored += 1;
        if k == self.inst.n_users {
            self.leaf();
            return;
        }
        if self.bound(k) < self.best_value - self.slack {
            self.stats.nodes_pruned += 1;
            return;
        }
        let mut children: Vec<(T, usize)> = (0..Wavelength::COUNT)
            .filter(|&w| self.allowed(w))
            .map(|w| (self.marginal(k, w), w))
            .collect();
        children.sort_by(|x, y| {
            y.0.partial_cmp(&x.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(x.1.cmp(&y.1))
        });
        for (_, w) in children {
            self.groups[w] |= 1 << k;
            self.colour.push(w);
            self.descend(k + 1);
            self.colour.pop();
            self.groups[w] &= !(1 << k);
        }
    }

    /// Evaluates every combination of near-optimal group maps canonically.
    fn leaf(&mut self) {
        let mut total = T::zero();
        let mut parts: Vec<(Vec<usize>, Rc<GroupOpt<T>>)> = Vec::new();
        for w in 0..Wavelength::COUNT {
            let mask = self.groups[w];
            if mask == 0 {
                continue;
            }
            let g = self.group(w, mask);
            total = total + g.value;
            let members = (0..self.inst.n_users).filter(|&u| mask >> u & 1 == 1).collect();
            parts.push((members, g));
        }
        if !total.is_finite() || total < self.best_value - self.slack {
            return;
        }
        let mut pairs = vec![0usize; self.inst.n_users];
        let mut choice = vec![0usize; parts.len()];
        loop {
            for (gi, (members, g)) in parts.iter().enumerate() {
                let map = &g.maps[choice[gi]];
                for (&u, &a) in members.iter().zip(map) {
                    pairs[u] = a * Wavelength::COUNT + self.colour[u];
                }
            }
            let value = self.inst.objective(self.mode, &pairs);
            if value > self.best_value || (value == self.best_value && pairs < self.best) {
                self.best_value = value;
                self.best.clone_from(&pairs);
            }
            // Odometer over the per-group alternatives.
            let mut i = 0;
            loop {
                if i == parts.len() {
                    return;
                }
                choice[i] += 1;
                if choice[i] < parts[i].1.maps.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }
}

fn same_columns<T: Scalar>(inst: &AllocationInstance<T>, w0: usize, w1: usize) -> bool {
    (0..inst.n_users).all(|u| {
        (0..inst.n_luminaires).all(|a| {
            let p0 = a * Wavelength::COUNT + w0;
            let p1 = a * Wavelength::COUNT + w1;
            inst.signal(u, p0) == inst.signal(u, p1)
                && inst.noise(u, p0) == inst.noise(u, p1)
                && inst.cross(u, a, w0) == inst.cross(u, a, w1)
        })
    })
}

/// Fewest co-channel user pairs when `users` share `channels` wavelengths.
fn forced_pairs(users: usize, channels: usize) -> usize {
    let q = users / channels;
    let rem = users % channels;
    rem * (q + 1) * q / 2 + (channels - rem) * q * q.saturating_sub(1) / 2
}

/// Exhaustive search over distinct luminaires for the users sharing `w`.
fn solve_group<T: Scalar>(
    inst: &AllocationInstance<T>,
    mode: ObjectiveMode,
    w: usize,
    members: &[usize],
    slack: T,
) -> GroupOpt<T> {
    if members.len() > inst.n_luminaires {
        return GroupOpt {
            value: T::neg_infinity(),
            maps: Vec::new(),
        };
    }
    let own = |u: usize, a: usize| -> T {
        let p = a * Wavelength::COUNT + w;
        match mode {
            ObjectiveMode::Surrogate => inst.link_value(u, p),
            ObjectiveMode::TrueSinr => ratio(inst.signal(u, p), inst.noise(u, p)),
        }
    };
    let best_own: Vec<T> = members
        .iter()
        .map(|&u| (0..inst.n_luminaires).map(|a| own(u, a)).fold(T::neg_infinity(), T::max))
        .collect();
    let mut g = GroupSearch {
        inst,
        mode,
        w,
        members,
        slack,
        best_own,
        used: vec![false; inst.n_luminaires],
        map: Vec::with_capacity(members.len()),
        best: T::neg_infinity(),
        found: Vec::new(),
    };
    g.walk();
    let best = g.best;
    let mut found = g.found;
    found.retain(|(v, _)| *v >= best - slack);
    GroupOpt {
        value: best,
        maps: found.into_iter().map(|(_, m)| m).collect(),
    }
}

struct GroupSearch<'a, T> {
    inst: &'a AllocationInstance<T>,
    mode: ObjectiveMode,
    w: usize,
    members: &'a [usize],
    slack: T,
    best_own: Vec<T>,
    used: Vec<bool>,
    map: Vec<usize>,
    best: T,
    found: Vec<(T, Vec<usize>)>,
}

impl<T: Scalar> GroupSearch<'_, T> {
    /// Exact value of the (possibly partial) map over the members it covers.
    fn value(&self) -> T {
        let inst = self.inst;
        let mut total = T::zero();
        for (i, &a) in self.map.iter().enumerate() {
            let u = self.members[i];
            let p = a * Wavelength::COUNT + self.w;
            let mut intf = T::zero();
            for (j, &b) in self.map.iter().enumerate() {
                if j != i {
                    intf = intf + inst.cross(u, b, self.w);
                }
            }
            total = total
                + match self.mode {
                    ObjectiveMode::Surrogate => {
                        inst.link_value(u, p) - inst.weights.interference * intf
                    }
                    ObjectiveMode::TrueSinr => ratio(inst.signal(u, p), inst.noise(u, p) + intf),
                };
        }
        total
    }

    fn walk(&mut self) {
        let k = self.map.len();
        let partial = self.value();
        if k == self.members.len() {
            if partial >= self.best - self.slack {
                self.best = self.best.max(partial);
                self.found.push((partial, self.map.clone()));
            }
            return;
        }
        let rest: T = self.best_own[k..].iter().copied().sum();
        if partial + rest < self.best - self.slack {
            return;
        }
        for a in 0..self.inst.n_luminaires {
            if self.used[a] {
                continue;
            }
            self.used[a] = true;
            self.map.push(a);
            self.walk();
            self.map.pop();
            self.used[a] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::*;
    use crate::linkbudget::{Link, ReceiverModel};
    use crate::optics::{RoomConfig, UserPosition, Wavelength};

    #[test]
    fn forced_pair_counts() {
        assert_eq!(super::forced_pairs(0, 4), 0);
        assert_eq!(super::forced_pairs(4, 4), 0);
        assert_eq!(super::forced_pairs(5, 4), 1);
        assert_eq!(super::forced_pairs(7, 4), 3);
        assert_eq!(super::forced_pairs(8, 4), 4);
        assert_eq!(super::forced_pairs(10, 4), 8);
        // Brute force over all splits of 9 users into 4 groups.
        let mut best = usize::MAX;
        for a in 0..=9usize {
            for b in 0..=9 - a {
                for c in 0..=9 - a - b {
                    let d = 9 - a - b - c;
                    let pairs: usize = [a, b, c, d].iter().map(|&s| s * s.saturating_sub(1) / 2).sum();
                    best = best.min(pairs);
                }
            }
        }
        assert_eq!(super::forced_pairs(9, 4), best);
    }

    #[test]
    fn single_user_takes_best_pair() {
        let inst = random_instance(1, 3);
        let sol = solve_bnb(&inst, ObjectiveMode::Surrogate).unwrap();
        let best = (0..32)
            .max_by(|&a, &b| {
                inst.link_value(0, a)
                    .partial_cmp(&inst.link_value(0, b))
                    .unwrap()
                    .then(b.cmp(&a))
            })
            .unwrap();
        assert_eq!(sol.pair_indices(), vec![best]);
    }

    #[test]
    fn far_users_get_nearest_luminaires() {
        let room = RoomConfig::<f64>::default();
        let users = [UserPosition::at(1.0, 1.0), UserPosition::at(3.0, 7.0)];
        let inst = build_instance(&room, &users, &ReceiverModel::default()).unwrap();
        let sol = solve_bnb(&inst, ObjectiveMode::Surrogate).unwrap();
        assert_eq!(sol.assignment.get(0).luminaire, 0);
        assert_eq!(sol.assignment.get(1).luminaire, 7);
        for w in Wavelength::ALL {
            let shared = [Link::new(0, w).pair_index(), Link::new(7, w).pair_index()];
            assert!(sol.surrogate_objective >= inst.surrogate(&shared));
        }
    }

    #[test]
    fn green_and_blue_are_interchangeable() {
        let inst = random_instance(3, 5);
        assert!(super::same_columns(&inst, 2, 3));
        assert!(!super::same_columns(&inst, 0, 1));
    }

    #[test]
    fn every_user_served_once() {
        for n in [5, 9, 12] {
            let inst = random_instance(n, 77 + n as u64);
            let sol = solve_bnb(&inst, ObjectiveMode::Surrogate).unwrap();
            assert_eq!(sol.assignment.len(), n);
            sol.assignment.check(8).unwrap();
        }
    }

    #[test]
    fn matches_exhaustive_search() {
        for seed in 0..40u64 {
            let n = 1 + (seed % 4) as usize;
            let weights = [1.0, 1e3, 1e4][(seed % 3) as usize];
            let inst = random_instance(n, 500 + seed).with_weights(ObjectiveWeights {
                signal: 1.0,
                noise: 1.0,
                interference: weights,
            });
            for mode in [ObjectiveMode::Surrogate, ObjectiveMode::TrueSinr] {
                let fast = solve_bnb(&inst, mode).unwrap();
                let slow = brute_force(&inst, mode).unwrap();
                assert_eq!(fast.assignment, slow.assignment, "seed {seed} {mode:?}");
                assert_eq!(fast.objective(mode), slow.objective(mode));
            }
        }
    }

    #[test]
    fn deterministic() {
        let inst = random_instance(6, 21);
        let a = solve_bnb(&inst, ObjectiveMode::TrueSinr).unwrap();
        let b = solve_bnb(&inst, ObjectiveMode::TrueSinr).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.sum_sinr, b.sum_sinr);
        assert_eq!(a.stats.nodes_explored, b.stats.nodes_explored);
    }

    #[test]
    fn works_in_single_precision() {
        let room = RoomConfig::<f32>::default();
        let users = [UserPosition::at(1.0, 1.0), UserPosition::at(3.0, 7.0), UserPosition::at(2.0, 4.0)];
        let inst = build_instance(&room, &users, &ReceiverModel::default()).unwrap();
        let sol = solve_bnb(&inst, ObjectiveMode::Surrogate).unwrap();
        let oracle = brute_force(&inst, ObjectiveMode::Surrogate).unwrap();
        assert_eq!(sol.surrogate_objective, oracle.surrogate_objective);
        assert_eq!(sol.assignment, oracle.assignment);
    }
}
