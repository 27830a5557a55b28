//! Simulated over-the-air layer.
//!
//! Disk range model with Bernoulli loss. A transmission reaches every other
//! station within `min(max_range_m, sender.range_m)` with probability
//! `in_range_delivery_prob`; one latency sample per transmission is drawn
//! uniformly from `per_hop_latency_ms`. RSUs rebroadcast each unique message
//! once, and relayed copies are never relayed again.
//!
//! All randomness comes from a ChaCha8 stream seeded with `rng_seed`, drawn
//! in a fixed order (latency first, then one Bernoulli trial per in-range
//! station in world order), so a scenario replays identically everywhere.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::RadioError;
use crate::geo::{haversine_m, LatLon};
use crate::sdsm::{self, EncodeError, MessageKey, SensorDataSharingMessage};

pub const DEFAULT_RANGE_M: f64 = 1000.0;
pub const DEFAULT_DELIVERY_PROB: f64 = 0.98;
pub const DEFAULT_SEED: u64 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StationKind {
    Obu,
    Rsu,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RxRecord {
    pub key: MessageKey,
    pub from_station: u32,
    pub hop_count: u8,
    pub arrival_us: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationNode {
    pub station_id: u32,
    pub kind: StationKind,
    pub position: LatLon,
    pub range_m: f64,
    pub rx_log: Vec<RxRecord>,
}

impl StationNode {
    pub fn new(station_id: u32, kind: StationKind, position: LatLon) -> Self {
        Self {
            station_id,
            kind,
            position,
            range_m: DEFAULT_RANGE_M,
            rx_log: Vec::new(),
        }
    }

    pub fn with_range(mut self, range_m: f64) -> Self {
        self.range_m = range_m;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioModel {
    pub max_range_m: f64,
    pub in_range_delivery_prob: f64,
    /// `[min, max]` one-hop air latency in ms.
    pub per_hop_latency_ms: [f64; 2],
    pub rng_seed: u64,
}

impl Default for RadioModel {
    fn default() -> Self {
        Self {
            max_range_m: DEFAULT_RANGE_M,
            in_range_delivery_prob: DEFAULT_DELIVERY_PROB,
            per_hop_latency_ms: [10.0, 20.0],
            rng_seed: DEFAULT_SEED,
        }
    }
}

impl RadioModel {
    pub fn validate(&self) -> Result<(), RadioError> {
        if self.max_range_m.is_nan() || self.max_range_m <= 0.0 {
            return Err(RadioError::InvalidModel(format!(
                "max_range_m {} must be positive",
                self.max_range_m
            )));
        }
        if !(0.0..=1.0).contains(&self.in_range_delivery_prob) {
            return Err(RadioError::InvalidModel(format!(
                "in_range_delivery_prob {} outside [0,1]",
                self.in_range_delivery_prob
            )));
        }
        let [lo, hi] = self.per_hop_latency_ms;
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return Err(RadioError::InvalidModel(format!(
                "per_hop_latency_ms [{lo}, {hi}] must satisfy 0 <= min <= max"
            )));
        }
        Ok(())
    }

    /// Latency window in whole microseconds.
    pub fn latency_window_us(&self) -> (u64, u64) {
        let [lo, hi] = self.per_hop_latency_ms;
        ((lo * 1000.0).round() as u64, (hi * 1000.0).round() as u64)
    }
}

/// Delivery counters. `latency_samples_us` holds one entry per delivered
/// copy: arrival time minus the original send time.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DeliveryStats {
    pub sent: u64,
    pub delivered: u64,
    pub relayed: u64,
    pub duplicates_suppressed: u64,
    pub latency_samples_us: Vec<u64>,
}

impl DeliveryStats {
    pub fn merge(&mut self, other: &DeliveryStats) {
        self.sent += other.sent;
        self.delivered += other.delivered;
        self.relayed += other.relayed;
        self.duplicates_suppressed += other.duplicates_suppressed;
        self.latency_samples_us
            .extend_from_slice(&other.latency_samples_us);
    }
}

/// A message on the air.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AirMessage {
    pub key: MessageKey,
    pub payload: Vec<u8>,
    pub hop_count: u8,
    /// Time the originating station first transmitted it.
    pub origin_time_us: u64,
}

impl AirMessage {
    pub fn from_sdsm(msg: &SensorDataSharingMessage, now_us: u64) -> Result<Self, EncodeError> {
        Ok(Self {
            key: msg.key(),
            payload: sdsm::encode(msg)?,
            hop_count: 0,
            origin_time_us: now_us,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Delivery {
    pub station_id: u32,
    pub kind: StationKind,
    pub hop_count: u8,
    pub arrival_us: u64,
    /// False when the station already held a copy of this message.
    pub first_copy: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransmitOutcome {
    /// Air latency sampled for the first transmission this outcome covers.
    pub tx_latency_us: u64,
    pub stats: DeliveryStats,
    pub deliveries: Vec<Delivery>,
}

impl TransmitOutcome {
    fn absorb(&mut self, other: TransmitOutcome) {
        self.stats.merge(&other.stats);
        self.deliveries.extend(other.deliveries);
    }
}

/// The set of stations sharing one radio channel.
#[derive(Debug)]
pub struct RadioWorld {
    stations: Vec<StationNode>,
    radio: RadioModel,
    rng: ChaCha8Rng,
    seen: BTreeMap<u32, BTreeSet<MessageKey>>,
    relayed: BTreeMap<u32, BTreeSet<MessageKey>>,
    stats: DeliveryStats,
}

impl RadioWorld {
    pub fn new(stations: Vec<StationNode>, radio: RadioModel) -> Result<Self, RadioError> {
        radio.validate()?;
        let mut ids = BTreeSet::new();
        for s in &stations {
            if !ids.insert(s.station_id) {
                return Err(RadioError::DuplicateStation(s.station_id));
            }
            if s.range_m.is_nan() || s.range_m <= 0.0 {
                return Err(RadioError::InvalidModel(format!(
                    "station {} range_m {} must be positive",
                    s.station_id, s.range_m
                )));
            }
        }
        let rng = ChaCha8Rng::seed_from_u64(radio.rng_seed);
        Ok(Self {
            stations,
            radio,
            rng,
            seen: BTreeMap::new(),
            relayed: BTreeMap::new(),
            stats: DeliveryStats::default(),
        })
    }

    pub fn stations(&self) -> &[StationNode] {
        &self.stations
    }

    pub fn station(&self, id: u32) -> Option<&StationNode> {
        self.stations.iter().find(|s| s.station_id == id)
    }

    pub fn radio(&self) -> &RadioModel {
        &self.radio
    }

    /// Running totals across every transmission so far.
    pub fn stats(&self) -> &DeliveryStats {
        &self.stats
    }

    fn index_of(&self, id: u32) -> Result<usize, RadioError> {
        self.stations
            .iter()
            .position(|s| s.station_id == id)
            .ok_or(RadioError::UnknownStation(id))
    }

    pub fn set_position(&mut self, id: u32, position: LatLon) -> Result<(), RadioError> {
        let i = self.index_of(id)?;
        self.stations[i].position = position;
        Ok(())
    }

    fn sample_latency_us(&mut self) -> u64 {
        let (lo, hi) = self.radio.latency_window_us();
        self.rng.gen_range(lo..=hi)
    }

    /// One transmission from station index `from` at `now_us`.
    fn transmit(&mut self, from: usize, msg: &AirMessage, now_us: u64) -> TransmitOutcome {
        let latency = self.sample_latency_us();
        let arrival_us = now_us + latency;
        let sender = &self.stations[from];
        let sender_id = sender.station_id;
        let reach = self.radio.max_range_m.min(sender.range_m);
        let origin_pos = sender.position;
        let mut out = TransmitOutcome {
            tx_latency_us: latency,
            ..Default::default()
        };
        for i in 0..self.stations.len() {
            if i == from {
                continue;
            }
            let rx = &self.stations[i];
            // Relayed copies are not echoed back to their source.
            if msg.hop_count > 0 && rx.station_id == msg.key.source_id {
                continue;
            }
            if haversine_m(origin_pos, rx.position) > reach {
                continue;
            }
            if !self.rng.gen_bool(self.radio.in_range_delivery_prob) {
                continue;
            }
            let rx = &mut self.stations[i];
            rx.rx_log.push(RxRecord {
                key: msg.key,
                from_station: sender_id,
                hop_count: msg.hop_count,
                arrival_us,
            });
            let first_copy = self.seen.entry(rx.station_id).or_default().insert(msg.key);
            if !first_copy && rx.kind == StationKind::Obu {
                out.stats.duplicates_suppressed += 1;
            }
            out.stats.delivered += 1;
            out.stats
                .latency_samples_us
                .push(arrival_us.saturating_sub(msg.origin_time_us));
            out.deliveries.push(Delivery {
                station_id: rx.station_id,
                kind: rx.kind,
                hop_count: msg.hop_count,
                arrival_us,
                first_copy,
            });
        }
        out
    }

    /// Origin broadcast. Counts one `sent`; does not trigger relays.
    pub fn broadcast(
        &mut self,
        origin: u32,
        msg: &AirMessage,
        now_us: u64,
    ) -> Result<TransmitOutcome, RadioError> {
        let from = self.index_of(origin)?;
        self.seen.entry(origin).or_default().insert(msg.key);
        let mut out = self.transmit(from, msg, now_us);
        out.stats.sent += 1;
        self.stats.merge(&out.stats);
        Ok(out)
    }

    /// Rebroadcast by an RSU that received `msg`. Each RSU relays a given
    /// message key at most once; later arrivals are counted as suppressed
    /// duplicates. Copies that already took a hop are not relayed.
    pub fn rsu_relay(
        &mut self,
        rsu: u32,
        msg: &AirMessage,
        now_us: u64,
    ) -> Result<TransmitOutcome, RadioError> {
        let idx = self.index_of(rsu)?;
        if self.stations[idx].kind != StationKind::Rsu {
            return Err(RadioError::NotRsu(rsu));
        }
        if msg.hop_count > 0 {
            return Ok(TransmitOutcome::default());
        }
        let mut out = TransmitOutcome::default();
        if !self.relayed.entry(rsu).or_default().insert(msg.key) {
            out.stats.duplicates_suppressed += 1;
            self.stats.merge(&out.stats);
            return Ok(out);
        }
        let relayed = AirMessage {
            hop_count: msg.hop_count + 1,
            ..msg.clone()
        };
        out = self.transmit(idx, &relayed, now_us);
        out.stats.relayed += 1;
        self.stats.merge(&out.stats);
        Ok(out)
    }

    /// Origin broadcast followed by one relay from every RSU that heard it,
    /// in station order, each at its own arrival time.
    pub fn broadcast_with_relay(
        &mut self,
        origin: u32,
        msg: &AirMessage,
        now_us: u64,
    ) -> Result<TransmitOutcome, RadioError> {
        let mut out = self.broadcast(origin, msg, now_us)?;
        let rsu_hits: Vec<(u32, u64)> = out
            .deliveries
            .iter()
            .filter(|d| d.kind == StationKind::Rsu)
            .map(|d| (d.station_id, d.arrival_us))
            .collect();
        for (rsu, at) in rsu_hits {
            let relay = self.rsu_relay(rsu, msg, at)?;
            out.absorb(relay);
        }
        Ok(out)
    }
}
