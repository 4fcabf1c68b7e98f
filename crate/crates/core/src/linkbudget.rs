//! Photocurrents, receiver noise, co-channel interference, SINR, OOK bit error
//! rate and the achievable bit rate at a target BER.
//!
//! All electrical quantities are photocurrent based: signal and interference
//! enter as squared currents (A²) and noise as current variance (A²).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{gain_matrix, GainMatrix, RoomConfig, UserPosition, Wavelength};
use crate::scalar::Scalar;

/// Elementary charge, coulombs.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

/// Electrical bandwidth needed per bit/s of OOK traffic.
pub const OOK_BANDWIDTH_PER_BIT: f64 = 0.7;

/// BER at which achievable rates are evaluated.
pub const DEFAULT_TARGET_BER: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", default, deny_unknown_fields)]
pub struct ReceiverModel<T> {
    /// Photodetector responsivity, A/W.
    pub responsivity: T,
    /// Photodetector area, m².
    pub detector_area: T,
    /// Field of view half-angle, degrees.
    pub fov: T,
    /// Preamplifier input-referred noise current density, A/√Hz.
    pub noise_current_density: T,
    /// Electrical bandwidth, Hz.
    pub bandwidth: T,
    /// Maximum bit rate of one link, bit/s.
    pub rate_cap: T,
    /// Extra background photocurrent from ambient sources, A.
    pub ambient_current: T,
}

impl<T: Scalar> Default for ReceiverModel<T> {
    fn default() -> Self {
        Self {
            responsivity: T::lit(0.4),
            detector_area: T::lit(1e-4),
            fov: T::lit(90.0),
            noise_current_density: T::lit(1e-11),
            bandwidth: T::lit(7e9),
            rate_cap: T::lit(10e9),
            ambient_current: T::zero(),
        }
    }
}

impl<T: Scalar> ReceiverModel<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("responsivity", self.responsivity),
            ("detector_area", self.detector_area),
            ("fov", self.fov),
            ("noise_current_density", self.noise_current_density),
            ("bandwidth", self.bandwidth),
            ("rate_cap", self.rate_cap),
        ];
        for (name, v) in positive {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::Config(format!("receiver {name} must be positive, got {v}")));
            }
        }
        if self.fov > T::lit(180.0) {
            return Err(Error::Config(format!("receiver fov {} exceeds 180 degrees", self.fov)));
        }
        if !(self.ambient_current >= T::zero() && self.ambient_current.is_finite()) {
            return Err(Error::Config("ambient current must be non-negative".into()));
        }
        Ok(())
    }
}

/// Serving access point and wavelength of one user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    pub luminaire: usize,
    pub wavelength: Wavelength,
}

impl Link {
    pub fn new(luminaire: usize, wavelength: Wavelength) -> Self {
        Self {
            luminaire,
            wavelength,
        }
    }

    /// Position in the lexicographic (luminaire, wavelength) pair order.
    pub fn pair_index(self) -> usize {
        self.luminaire * Wavelength::COUNT + self.wavelength.index()
    }

    pub fn from_pair_index(p: usize) -> Self {
        Self::new(
            p / Wavelength::COUNT,
            Wavelength::from_index(p % Wavelength::COUNT).expect("in range"),
        )
    }
}

/// Injective user → (access point, wavelength) map; every user is served.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    links: Vec<Link>,
}

impl Assignment {
    pub fn new(links: Vec<Link>, n_luminaires: usize) -> Result<Self> {
        let a = Self { links };
        a.check(n_luminaires)?;
        Ok(a)
    }

    /// Verifies range and pair uniqueness.
    pub fn check(&self, n_luminaires: usize) -> Result<()> {
        let mut seen = vec![false; n_luminaires * Wavelength::COUNT];
        for (u, l) in self.links.iter().enumerate() {
            if l.luminaire >= n_luminaires {
                return Err(Error::Assignment(format!(
                    "user {u} served by luminaire {} but only {n_luminaires} exist",
                    l.luminaire
                )));
            }
            let p = l.pair_index();
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::Assignment(format!(
                    "pair (luminaire {}, {}) assigned to more than one user",
                    l.luminaire, l.wavelength
                )));
            }
        }
        Ok(())
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn get(&self, user: usize) -> Link {
        self.links[user]
    }

    /// Number of users on each wavelength, indexed in R, Y, G, B order.
    pub fn wavelength_usage(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for l in &self.links {
            counts[l.wavelength.index()] += 1;
        }
        counts
    }
}

/// Components of the receiver noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NoiseVariance<T> {
    pub background: T,
    pub signal_shot: T,
    pub preamp: T,
    pub total: T,
}

/// Per-user link evaluation, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LinkReport<T> {
    pub user: usize,
    pub luminaire: usize,
    pub wavelength: Wavelength,
    pub signal_sq: T,
    pub interference_sq: T,
    pub sigma_bn_sq: T,
    pub sigma_s_sq: T,
    pub sigma_pr_sq: T,
    pub noise_var: T,
    pub sinr: T,
    pub sinr_db: T,
    pub achievable_rate: T,
}

pub fn signal_photocurrent<T: Scalar>(rx: &ReceiverModel<T>, tx_power: T, gain: T) -> T {
    rx.responsivity * tx_power * gain
}

/// Background shot, signal shot and preamplifier noise over `bandwidth`.
pub fn noise_variance<T: Scalar>(
    rx: &ReceiverModel<T>,
    signal_current: T,
    background_current: T,
    bandwidth: T,
) -> NoiseVariance<T> {
    let two_q = T::lit(2.0 * ELECTRON_CHARGE);
    let preamp = rx.noise_current_density * rx.noise_current_density * bandwidth;
    let signal_shot = two_q * signal_current * bandwidth;
    let background = two_q * background_current * bandwidth;
    NoiseVariance {
        background,
        signal_shot,
        preamp,
        total: background + signal_shot + preamp,
    }
}

pub fn to_db<T: Scalar>(ratio: T) -> T {
    T::lit(10.0) * ratio.max(T::min_positive_value()).log10()
}

fn check_dims<T: Scalar>(
    room: &RoomConfig<T>,
    gains: &GainMatrix<T>,
    assignment: &Assignment,
) -> Result<()> {
    if gains.n_luminaires != room.n_luminaires() || gains.n_users != assignment.len() {
        return Err(Error::Assignment(format!(
            "assignment for {} users does not match a {}x{} gain matrix",
            assignment.len(),
            gains.n_users,
            gains.n_luminaires
        )));
    }
    assignment.check(room.n_luminaires())
}

/// Summed squared photocurrent from every other communication channel on the
/// user's wavelength.
pub fn interference_sq<T: Scalar>(
    room: &RoomConfig<T>,
    rx: &ReceiverModel<T>,
    gains: &GainMatrix<T>,
    assignment: &Assignment,
    user: usize,
) -> Result<T> {
    check_dims(room, gains, assignment)?;
    Ok(interference_unchecked(room, rx, gains, assignment, user))
}

fn interference_unchecked<T: Scalar>(
    room: &RoomConfig<T>,
    rx: &ReceiverModel<T>,
    gains: &GainMatrix<T>,
    assignment: &Assignment,
    user: usize,
) -> T {
    let own = assignment.get(user);
    let mut total = T::zero();
    for (other, l) in assignment.links().iter().enumerate() {
        if other == user || l.wavelength != own.wavelength || l.luminaire == own.luminaire {
            continue;
        }
        let i = signal_photocurrent(
            rx,
            room.tx_power(l.luminaire, l.wavelength),
            gains.get(user, l.luminaire),
        );
        total = total + i * i;
    }
    total
}

/// Photocurrent from luminaires that only illuminate on the user's wavelength,
/// plus the receiver's ambient current.
pub fn background_current<T: Scalar>(
    room: &RoomConfig<T>,
    rx: &ReceiverModel<T>,
    gains: &GainMatrix<T>,
    assignment: &Assignment,
    user: usize,
) -> Result<T> {
    check_dims(room, gains, assignment)?;
    Ok(background_unchecked(room, rx, gains, assignment, user))
}

fn background_unchecked<T: Scalar>(
    room: &RoomConfig<T>,
    rx: &ReceiverModel<T>,
    gains: &GainMatrix<T>,
    assignment: &Assignment,
    user: usize,
) -> T {
    let own = assignment.get(user);
    let w = own.wavelength;
    let mut carrying = vec![false; room.n_luminaires()];
    for l in assignment.links() {
        if l.wavelength == w {
            carrying[l.luminaire] = true;
        }
    }
    let mut total = rx.ambient_current;
    for (a, &busy) in carrying.iter().enumerate() {
        if !busy && a != own.luminaire {
            total = total + signal_photocurrent(rx, room.tx_power(a, w), gains.get(user, a));
        }
    }
    total
}

/// Photocurrent a user sees on `w` from every luminaire except `serving`,
/// i.e. the background when no other link shares the wavelength.
pub fn isolated_background_current<T: Scalar>(
    room: &RoomConfig<T>,
    rx: &ReceiverModel<T>,
    gains: &GainMatrix<T>,
    user: usize,
    serving: usize,
    w: Wavelength,
) -> T {
    let mut total = rx.ambient_current;
    for a in 0..room.n_luminaires() {
        if a != serving {
            total = total + signal_photocurrent(rx, room.tx_power(a, w), gains.get(user, a));
        }
    }
    total
}

/// Assembles a report from its physical ingredients at the receiver bandwidth.
pub fn link_report<T: Scalar>(
    rx: &ReceiverModel<T>,
    user: usize,
    link: Link,
    signal_current: T,
    background_current: T,
    interference_sq: T,
    target_ber: f64,
) -> LinkReport<T> {
    let noise = noise_variance(rx, signal_current, background_current, rx.bandwidth);
    let signal_sq = signal_current * signal_current;
    let denom = noise.total + interference_sq;
    let sinr = if denom > T::zero() {
        signal_sq / denom
    } else if signal_sq > T::zero() {
        T::infinity()
    } else {
        T::zero()
    };
    let mut report = LinkReport {
        user,
        luminaire: link.luminaire,
        wavelength: link.wavelength,
        signal_sq,
        interference_sq,
        sigma_bn_sq: noise.background,
        sigma_s_sq: noise.signal_shot,
        sigma_pr_sq: noise.preamp,
        noise_var: noise.total,
        sinr,
        sinr_db: to_db(sinr),
        achievable_rate: T::zero(),
    };
    report.achievable_rate = achievable_rate(&report, rx, target_ber);
    report
}

/// Link reports for an assignment given precomputed gains.
pub fn link_reports<T: Scalar>(
    room: &RoomConfig<T>,
    rx: &ReceiverModel<T>,
    gains: &GainMatrix<T>,
    assignment: &Assignment,
    target_ber: f64,
) -> Result<Vec<LinkReport<T>>> {
    check_dims(room, gains, assignment)?;
    Ok(assignment
        .links()
        .iter()
        .enumerate()
        .map(|(u, &l)| {
            let i_s = signal_photocurrent(rx, room.tx_power(l.luminaire, l.wavelength), gains.get(u, l.luminaire));
            let i_bg = background_unchecked(room, rx, gains, assignment, u);
            let intf = interference_unchecked(room, rx, gains, assignment, u);
            link_report(rx, u, l, i_s, i_bg, intf, target_ber)
        })
        .collect())
}

/// Interference-free reports of one user on every (luminaire, wavelength)
/// pair, in pair-index order, as if it were the only user in the room.
pub fn standalone_reports<T: Scalar>(
    room: &RoomConfig<T>,
    rx: &ReceiverModel<T>,
    gains: &GainMatrix<T>,
    user: usize,
    target_ber: f64,
) -> Result<Vec<LinkReport<T>>> {
    if gains.n_luminaires != room.n_luminaires() || user >= gains.n_users {
        return Err(Error::Assignment(format!(
            "user {user} of a {}x{} gain matrix for {} luminaires",
            gains.n_users,
            gains.n_luminaires,
            room.n_luminaires()
        )));
    }
    Ok((0..room.n_luminaires() * Wavelength::COUNT)
        .map(|p| {
            let l = Link::from_pair_index(p);
            let i_s = signal_photocurrent(rx, room.tx_power(l.luminaire, l.wavelength), gains.get(user, l.luminaire));
            let i_bg = isolated_background_current(room, rx, gains, user, l.luminaire, l.wavelength);
            link_report(rx, user, l, i_s, i_bg, T::zero(), target_ber)
        })
        .collect())
}

/// Per-user SINR reports for an assignment, evaluated at the full receiver
/// bandwidth with rates at [`DEFAULT_TARGET_BER`].
pub fn sinr<T: Scalar>(
    users: &[UserPosition<T>],
    assignment: &Assignment,
    room: &RoomConfig<T>,
    rx: &ReceiverModel<T>,
) -> Result<Vec<LinkReport<T>>> {
    let gains = gain_matrix(room, users, rx)?;
    link_reports(room, rx, &gains, assignment, DEFAULT_TARGET_BER)
}

/// Gaussian tail probability `Q(x)`.
pub fn q_function<T: Scalar>(x: T) -> T {
    T::lit(0.5) * (x / T::SQRT_2()).erfc()
}

/// Inverse of [`q_function`] on `(0, 0.5]`; returns 0 for `p >= 0.5` and
/// `+inf` for `p <= 0`.
pub fn q_inverse(p: f64) -> f64 {
    if p >= 0.5 {
        return 0.0;
    }
    if p <= 0.0 || p.is_nan() {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// SINR at which OOK reaches `target_ber`.
pub fn required_sinr(target_ber: f64) -> f64 {
    let x = q_inverse(target_ber);
    x * x
}

/// OOK bit error rate `Q(√SINR)`.
pub fn ook_ber<T: Scalar>(sinr: T) -> T {
    q_function(sinr.max(T::zero()).sqrt())
}

/// Largest bit rate up to the receiver's cap at which the link still meets
/// `target_ber`, with noise re-evaluated over the bandwidth the rate needs.
/// Returns 0 when interference alone prevents reaching the target.
pub fn achievable_rate<T: Scalar>(link: &LinkReport<T>, rx: &ReceiverModel<T>, target_ber: f64) -> T {
    let gamma = T::lit(required_sinr(target_ber));
    if !(link.signal_sq > T::zero()) {
        return T::zero();
    }
    let headroom = link.signal_sq / gamma - link.interference_sq;
    if !(headroom > T::zero()) {
        return T::zero();
    }
    let density = link.noise_var / rx.bandwidth;
    if !(density > T::zero()) {
        return rx.rate_cap;
    }
    let max_bandwidth = headroom / density;
    (max_bandwidth / T::lit(OOK_BANDWIDTH_PER_BIT)).min(rx.rate_cap)
}
