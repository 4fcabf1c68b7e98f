use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("half-power semi-angle must lie strictly between 0 and 90 degrees, got {0}")]
    SemiAngle(f64),
    #[error("transmitter and receiver coincide; line-of-sight gain undefined")]
    ZeroDistance,
    #[error("transmitter at z = {tx_z} m is not above the communication plane at {floor} m")]
    TransmitterBelowPlane { tx_z: f64, floor: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("position outside the room: {0}")]
    OutOfRoom(String),
    #[error("at least one user is required")]
    NoUsers,
    #[error("invalid assignment: {0}")]
    Assignment(String),
    #[error("infeasible instance: {users} users but only {pairs} distinct (access point, wavelength) pairs")]
    Infeasible { users: usize, pairs: usize },
    #[error("exhaustive search is limited to {max} users, got {users}")]
    OracleScale { users: usize, max: usize },
    #[error("malformed instance: {0}")]
    Instance(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
