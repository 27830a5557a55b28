//! The wired leg: encoded SDSMs go to the local OBU as raw UDP datagrams.

use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};

use super::TransportError;

pub const DEFAULT_OBU_PORT: u16 = 4750;
/// Largest UDP payload over IPv4.
pub const MAX_DATAGRAM: usize = 65_507;

/// Resolves `host:port`; a bare host gets [`DEFAULT_OBU_PORT`].
pub fn resolve_endpoint(endpoint: &str) -> Result<SocketAddr, TransportError> {
    let with_port;
    let target = if endpoint.contains(':') {
        endpoint
    } else {
        with_port = format!("{endpoint}:{DEFAULT_OBU_PORT}");
        &with_port
    };
    target
        .to_socket_addrs()
        .map_err(|source| TransportError::Resolve {
            endpoint: endpoint.to_string(),
            source,
        })?
        .next()
        .ok_or_else(|| TransportError::Resolve {
            endpoint: endpoint.to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no addresses"),
        })
}

/// A bound socket aimed at one OBU endpoint. Safe to share across threads;
/// `send` takes `&self`.
#[derive(Debug)]
pub struct ObuLink {
    socket: UdpSocket,
    endpoint: SocketAddr,
}

impl ObuLink {
    pub fn connect(endpoint: &str) -> Result<Self, TransportError> {
        let addr = resolve_endpoint(endpoint)?;
        let bind: SocketAddr = if addr.is_ipv4() {
            "0.0.0.0:0".parse().unwrap()
        } else {
            "[::]:0".parse().unwrap()
        };
        let socket = UdpSocket::bind(bind).map_err(|source| TransportError::Io {
            endpoint: addr.to_string(),
            source,
        })?;
        Ok(Self {
            socket,
            endpoint: addr,
        })
    }

    pub fn endpoint(&self) -> SocketAddr {
        self.endpoint
    }

    /// Sends one datagram. Fire-and-forget: no retry, no ack beyond the
    /// byte count the OS accepted.
    pub fn send(&self, payload: &[u8]) -> Result<usize, TransportError> {
        if payload.len() > MAX_DATAGRAM {
            return Err(TransportError::Oversized { len: payload.len() });
        }
        self.socket
            .send_to(payload, self.endpoint)
            .map_err(|source| TransportError::Io {
                endpoint: self.endpoint.to_string(),
                source,
            })
    }
}

/// One-shot send on a fresh socket.
pub fn udp_send(payload: &[u8], endpoint: &str) -> Result<usize, TransportError> {
    if payload.len() > MAX_DATAGRAM {
        return Err(TransportError::Oversized { len: payload.len() });
    }
    ObuLink::connect(endpoint)?.send(payload)
}
