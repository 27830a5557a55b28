//! V2X transport: the UDP link to the local OBU and the simulated radio
//! channel between OBUs and RSUs.

mod radio;
mod udp;

pub use radio::{
    AirMessage, Delivery, DeliveryStats, RadioModel, RadioWorld, RxRecord, StationKind,
    StationNode, TransmitOutcome, DEFAULT_DELIVERY_PROB, DEFAULT_RANGE_M, DEFAULT_SEED,
};
pub use udp::{resolve_endpoint, udp_send, ObuLink, DEFAULT_OBU_PORT, MAX_DATAGRAM};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("cannot resolve OBU endpoint {endpoint}: {source}")]
    Resolve {
        endpoint: String,
        source: std::io::Error,
    },
    #[error("payload of {len} bytes exceeds one UDP datagram")]
    Oversized { len: usize },
    #[error("udp send to {endpoint} failed: {source}")]
    Io {
        endpoint: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("unknown station {0}")]
    UnknownStation(u32),
    #[error("station {0} is not an RSU")]
    NotRsu(u32),
    #[error("duplicate station id {0}")]
    DuplicateStation(u32),
    #[error("invalid radio model: {0}")]
    InvalidModel(String),
}
