//! Room geometry and line-of-sight Lambertian channel gains.
//!
//! Coordinates: `x` runs along the room width, `y` along its length, `z` is
//! height above the ground. Angles are degrees at the API surface and radians
//! internally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkbudget::ReceiverModel;
use crate::scalar::{Scalar, Vec3};

/// Gains smaller than this are reported as exactly zero.
pub const GAIN_FLOOR: f64 = 1e-30;

/// One of the four laser-diode colours making up the white luminaire.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Wavelength {
    Red,
    Yellow,
    Green,
    Blue,
}

impl Wavelength {
    pub const ALL: [Wavelength; 4] = [
        Wavelength::Red,
        Wavelength::Yellow,
        Wavelength::Green,
        Wavelength::Blue,
    ];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Wavelength::Red => "red",
            Wavelength::Yellow => "yellow",
            Wavelength::Green => "green",
            Wavelength::Blue => "blue",
        }
    }
}

impl std::fmt::Display for Wavelength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A value for each wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PerWavelength<T> {
    pub red: T,
    pub yellow: T,
    pub green: T,
    pub blue: T,
}

impl<T: Copy> PerWavelength<T> {
    pub fn get(&self, w: Wavelength) -> T {
        match w {
            Wavelength::Red => self.red,
            Wavelength::Yellow => self.yellow,
            Wavelength::Green => self.green,
            Wavelength::Blue => self.blue,
        }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.red, self.yellow, self.green, self.blue]
    }
}

impl<T: Scalar> PerWavelength<T> {
    /// RYGB laser powers of one lighting unit, in watts.
    pub fn rygb_default() -> Self {
        Self {
            red: T::lit(0.8),
            yellow: T::lit(0.5),
            green: T::lit(0.3),
            blue: T::lit(0.3),
        }
    }
}

/// Ceiling lighting unit doubling as an access point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Luminaire<T> {
    pub position: Vec3<T>,
    /// Optical transmit power per wavelength, watts.
    pub tx_power: PerWavelength<T>,
    #[serde(default = "Vec3::down")]
    pub orientation: Vec3<T>,
    /// Half-power semi-angle, degrees.
    #[serde(default = "default_semiangle")]
    pub half_power_semiangle: T,
}

fn default_semiangle<T: Scalar>() -> T {
    T::lit(70.0)
}

impl<T: Scalar> Luminaire<T> {
    pub fn at(x: f64, y: f64, z: f64) -> Self {
        Self {
            position: Vec3::new(T::lit(x), T::lit(y), T::lit(z)),
            tx_power: PerWavelength::rygb_default(),
            orientation: Vec3::down(),
            half_power_semiangle: default_semiangle(),
        }
    }
}

/// Receiver location on the communication floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct UserPosition<T> {
    pub x: T,
    pub y: T,
    #[serde(default = "Vec3::up")]
    pub normal: Vec3<T>,
}

impl<T: Scalar> UserPosition<T> {
    pub fn new(x: T, y: T) -> Self {
        Self {
            x,
            y,
            normal: Vec3::up(),
        }
    }

    pub fn at(x: f64, y: f64) -> Self {
        Self::new(T::lit(x), T::lit(y))
    }

    pub fn position3d(&self, floor_height: T) -> Vec3<T> {
        Vec3::new(self.x, self.y, floor_height)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", default, deny_unknown_fields)]
pub struct RoomConfig<T> {
    pub width: T,
    pub length: T,
    pub height: T,
    /// Height of the communication plane above the ground.
    pub floor_height: T,
    pub luminaires: Vec<Luminaire<T>>,
    /// Scales every luminaire's transmit power; 1 keeps the tabulated values.
    pub power_multiplier: T,
}

impl<T: Scalar> Default for RoomConfig<T> {
    fn default() -> Self {
        let luminaires = [
            (1.0, 1.0),
            (1.0, 3.0),
            (1.0, 5.0),
            (1.0, 7.0),
            (3.0, 1.0),
            (3.0, 3.0),
            (3.0, 5.0),
            (3.0, 7.0),
        ]
        .into_iter()
        .map(|(x, y)| Luminaire::at(x, y, 3.0))
        .collect();
        Self {
            width: T::lit(4.0),
            length: T::lit(8.0),
            height: T::lit(3.0),
            floor_height: T::lit(1.0),
            luminaires,
            power_multiplier: T::one(),
        }
    }
}

impl<T: Scalar> RoomConfig<T> {
    pub fn n_luminaires(&self) -> usize {
        self.luminaires.len()
    }

    /// Effective optical power of luminaire `a` on wavelength `w`.
    pub fn tx_power(&self, a: usize, w: Wavelength) -> T {
        self.luminaires[a].tx_power.get(w) * self.power_multiplier
    }

    pub fn validate(&self) -> Result<()> {
        let (w, l, h, f) = (self.width, self.length, self.height, self.floor_height);
        if !(w > T::zero() && l > T::zero() && h > T::zero()) {
            return Err(Error::Config(format!(
                "room dimensions must be positive, got {w} x {l} x {h}"
            )));
        }
        if !(f >= T::zero() && f < h) {
            return Err(Error::Config(format!(
                "communication floor height {f} must lie in [0, {h})"
            )));
        }
        if !(self.power_multiplier >= T::zero() && self.power_multiplier.is_finite()) {
            return Err(Error::Config(format!(
                "power multiplier must be finite and non-negative, got {}",
                self.power_multiplier
            )));
        }
        if self.luminaires.is_empty() {
            return Err(Error::Config("at least one luminaire is required".into()));
        }
        for (i, lum) in self.luminaires.iter().enumerate() {
            let p = lum.position;
            let inside = p.x >= T::zero()
                && p.x <= w
                && p.y >= T::zero()
                && p.y <= l
                && p.z >= T::zero()
                && p.z <= h;
            if !inside {
                return Err(Error::Config(format!(
                    "luminaire {i} at ({}, {}, {}) lies outside the room",
                    p.x, p.y, p.z
                )));
            }
            if p.z <= f {
                return Err(Error::Config(format!(
                    "luminaire {i} at z = {} is not above the communication floor",
                    p.z
                )));
            }
            lambertian_order(lum.half_power_semiangle)?;
            if lum.orientation.normalized().is_none() {
                return Err(Error::Config(format!("luminaire {i} has a zero orientation")));
            }
            if lum
                .tx_power
                .to_array()
                .iter()
                .any(|&p| !(p >= T::zero() && p.is_finite()))
            {
                return Err(Error::Config(format!(
                    "luminaire {i} has a negative or non-finite transmit power"
                )));
            }
        }
        Ok(())
    }

    /// Checks that a user lies on the communication floor, naming the violated bound.
    pub fn check_user(&self, u: &UserPosition<T>) -> Result<()> {
        let bound = |v: T, hi: T, axis: &str, name: &str| -> Result<()> {
            if !v.is_finite() || v < T::zero() {
                Err(Error::OutOfRoom(format!("{axis} = {v} is below 0")))
            } else if v > hi {
                Err(Error::OutOfRoom(format!(
                    "{axis} = {v} exceeds room {name} {hi}"
                )))
            } else {
                Ok(())
            }
        };
        bound(u.x, self.width, "x", "width")?;
        bound(u.y, self.length, "y", "length")?;
        if u.normal.normalized().is_none() {
            return Err(Error::Config("receiver normal must be non-zero".into()));
        }
        Ok(())
    }

    pub fn center(&self) -> UserPosition<T> {
        let two = T::lit(2.0);
        UserPosition::new(self.width / two, self.length / two)
    }
}

/// Cosine of an angle in degrees, exact at 60° (the only angle strictly
/// inside (0°, 90°) with a rational degree measure and rational cosine).
pub fn cos_deg<T: Scalar>(deg: T) -> T {
    if deg == T::lit(60.0) {
        T::lit(0.5)
    } else {
        deg.to_radians().cos()
    }
}

/// Lambertian mode number `m = -ln 2 / ln cos(semi-angle)`.
pub fn lambertian_order<T: Scalar>(half_power_semiangle_deg: T) -> Result<T> {
    let deg = half_power_semiangle_deg;
    if !(deg > T::zero() && deg < T::lit(90.0)) {
        return Err(Error::SemiAngle(deg.as_f64()));
    }
    let c = cos_deg(deg);
    if c <= T::zero() {
        return Err(Error::SemiAngle(deg.as_f64()));
    }
    Ok(-T::LN_2() / c.ln())
}

/// Line-of-sight gain for explicit 3D poses.
///
/// `tx_dir` and `rx_normal` need not be normalized. Returns zero when the
/// receiver is behind the emitter, the emitter is outside the receiver's
/// field of view, or the result underflows [`GAIN_FLOOR`].
pub fn los_gain_between<T: Scalar>(
    tx_pos: Vec3<T>,
    tx_dir: Vec3<T>,
    order: T,
    rx_pos: Vec3<T>,
    rx_normal: Vec3<T>,
    detector_area: T,
    fov_deg: T,
) -> Result<T> {
    let ray = rx_pos - tx_pos;
    let d = ray.norm();
    if !(d > T::zero()) {
        return Err(Error::ZeroDistance);
    }
    let tx_dir = tx_dir
        .normalized()
        .ok_or_else(|| Error::Config("zero emitter orientation".into()))?;
    let rx_normal = rx_normal
        .normalized()
        .ok_or_else(|| Error::Config("zero receiver normal".into()))?;
    let cos_phi = tx_dir.dot(ray) / d;
    let cos_psi = rx_normal.dot(-ray) / d;
    if cos_phi <= T::zero() || cos_psi <= T::zero() || cos_psi < fov_deg.to_radians().cos() {
        return Ok(T::zero());
    }
    let two_pi = T::lit(2.0) * T::PI();
    let h = (order + T::one()) * detector_area * cos_phi.powf(order) * cos_psi / (two_pi * d * d);
    Ok(if h < T::lit(GAIN_FLOOR) { T::zero() } else { h })
}

/// Line-of-sight gain between a luminaire and a user on the communication floor.
pub fn los_gain<T: Scalar>(
    tx: &Luminaire<T>,
    rx: &UserPosition<T>,
    floor_height: T,
    detector_area: T,
    fov_deg: T,
) -> Result<T> {
    if tx.position.z <= floor_height {
        return Err(Error::TransmitterBelowPlane {
            tx_z: tx.position.z.as_f64(),
            floor: floor_height.as_f64(),
        });
    }
    if !(detector_area > T::zero()) {
        return Err(Error::Config(format!(
            "detector area must be positive, got {detector_area}"
        )));
    }
    let m = lambertian_order(tx.half_power_semiangle)?;
    los_gain_between(
        tx.position,
        tx.orientation,
        m,
        rx.position3d(floor_height),
        rx.normal,
        detector_area,
        fov_deg,
    )
}

/// Gains `H[user][luminaire]`, wavelength independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GainMatrix<T> {
    pub n_users: usize,
    pub n_luminaires: usize,
    data: Vec<T>,
}

impl<T: Scalar> GainMatrix<T> {
    pub fn get(&self, user: usize, luminaire: usize) -> T {
        self.data[user * self.n_luminaires + luminaire]
    }

    pub fn row(&self, user: usize) -> &[T] {
        &self.data[user * self.n_luminaires..(user + 1) * self.n_luminaires]
    }
}

pub fn gain_matrix<T: Scalar>(
    room: &RoomConfig<T>,
    users: &[UserPosition<T>],
    receiver: &ReceiverModel<T>,
) -> Result<GainMatrix<T>> {
    if users.is_empty() {
        return Err(Error::NoUsers);
    }
    let mut data = Vec::with_capacity(users.len() * room.n_luminaires());
    for u in users {
        room.check_user(u)?;
        for lum in &room.luminaires {
            data.push(los_gain(
                lum,
                u,
                room.floor_height,
                receiver.detector_area,
                receiver.fov,
            )?);
        }
    }
    Ok(GainMatrix {
        n_users: users.len(),
        n_luminaires: room.n_luminaires(),
        data,
    })
}
