//! Per-stage latency ledger and budget checks.
//!
//! Durations are whole microseconds so frame totals are exact sums and
//! every statistic is independent of aggregation order.

use serde::{Deserialize, Serialize};

pub const TOTAL_MAX_US: u64 = 160_000;
pub const TOTAL_TARGET_US: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Capture,
    Inference,
    SdsmGen,
    V2xTx,
    RxDecode,
    Alert,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Capture,
        Stage::Inference,
        Stage::SdsmGen,
        Stage::V2xTx,
        Stage::RxDecode,
        Stage::Alert,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Capture => "capture",
            Stage::Inference => "inference",
            Stage::SdsmGen => "sdsm_gen",
            Stage::V2xTx => "v2x_tx",
            Stage::RxDecode => "rx_decode",
            Stage::Alert => "alert",
        }
    }

    /// Hard per-stage ceiling.
    pub fn max_us(self) -> u64 {
        match self {
            Stage::Capture => 25_000,
            Stage::Inference => 65_000,
            Stage::SdsmGen => 15_000,
            Stage::V2xTx => 20_000,
            Stage::RxDecode => 20_000,
            Stage::Alert => 15_000,
        }
    }

    /// Typical operating window `(lo, hi)`; modeled samples come from here.
    pub fn typical_us(self) -> (u64, u64) {
        match self {
            Stage::Capture => (10_000, 10_000),
            Stage::Inference => (40_000, 50_000),
            Stage::SdsmGen => (8_000, 10_000),
            Stage::V2xTx => (10_000, 15_000),
            Stage::RxDecode => (10_000, 15_000),
            Stage::Alert => (5_000, 10_000),
        }
    }

    pub fn typical_midpoint_us(self) -> u64 {
        let (lo, hi) = self.typical_us();
        (lo + hi) / 2
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StageTimings {
    pub capture_us: u64,
    pub inference_us: u64,
    pub sdsm_gen_us: u64,
    pub v2x_tx_us: u64,
    pub rx_decode_us: u64,
    pub alert_us: u64,
    pub total_us: u64,
}

impl StageTimings {
    /// Builds from the six stage durations in [`Stage::ALL`] order.
    pub fn from_stages(stages: [u64; 6]) -> Self {
        let [capture_us, inference_us, sdsm_gen_us, v2x_tx_us, rx_decode_us, alert_us] = stages;
        Self {
            capture_us,
            inference_us,
            sdsm_gen_us,
            v2x_tx_us,
            rx_decode_us,
            alert_us,
            total_us: stages.iter().sum(),
        }
    }

    pub fn get(&self, stage: Stage) -> u64 {
        match stage {
            Stage::Capture => self.capture_us,
            Stage::Inference => self.inference_us,
            Stage::SdsmGen => self.sdsm_gen_us,
            Stage::V2xTx => self.v2x_tx_us,
            Stage::RxDecode => self.rx_decode_us,
            Stage::Alert => self.alert_us,
        }
    }

    pub fn stages(&self) -> [u64; 6] {
        Stage::ALL.map(|s| self.get(s))
    }

    pub fn is_consistent(&self) -> bool {
        self.stages().iter().sum::<u64>() == self.total_us
    }

    /// Every stage at the middle of its typical window.
    pub fn typical_midpoints() -> Self {
        Self::from_stages(Stage::ALL.map(Stage::typical_midpoint_us))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FrameTiming {
    pub frame_id: u64,
    /// True when the frame carried a broadcast through to a receiver alert.
    pub alert_path: bool,
    pub timings: StageTimings,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    StageMax {
        frame_id: u64,
        stage: Stage,
        value_us: u64,
        max_us: u64,
    },
    TotalMax {
        frame_id: u64,
        value_us: u64,
        max_us: u64,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BudgetReport {
    pub violations: Vec<Violation>,
    /// Median end-to-end total over alert-path frames, or over all frames
    /// when none completed the alert path.
    pub median_total_us: Option<u64>,
    pub median_under_target: bool,
}

/// Flags frames over the total ceiling and any stage over its own ceiling.
pub fn check_budgets(frames: &[FrameTiming]) -> BudgetReport {
    let mut violations = Vec::new();
    for f in frames {
        for stage in Stage::ALL {
            let v = f.timings.get(stage);
            if v > stage.max_us() {
                violations.push(Violation::StageMax {
                    frame_id: f.frame_id,
                    stage,
                    value_us: v,
                    max_us: stage.max_us(),
                });
            }
        }
        if f.timings.total_us > TOTAL_MAX_US {
            violations.push(Violation::TotalMax {
                frame_id: f.frame_id,
                value_us: f.timings.total_us,
                max_us: TOTAL_MAX_US,
            });
        }
    }
    let median_total_us = median(&end_to_end_totals(frames));
    BudgetReport {
        violations,
        median_total_us,
        median_under_target: median_total_us.is_some_and(|m| m < TOTAL_TARGET_US),
    }
}

pub(crate) fn end_to_end_totals(frames: &[FrameTiming]) -> Vec<u64> {
    let alert: Vec<u64> = frames
        .iter()
        .filter(|f| f.alert_path)
        .map(|f| f.timings.total_us)
        .collect();
    if alert.is_empty() {
        frames.iter().map(|f| f.timings.total_us).collect()
    } else {
        alert
    }
}

/// Lower-rounded mean of the two middle values for even counts.
pub fn median(samples: &[u64]) -> Option<u64> {
    if samples.is_empty() {
        return None;
    }
    let mut v = samples.to_vec();
    v.sort_unstable();
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LatencyStats {
    pub count: usize,
    pub min_us: u64,
    pub median_us: u64,
    /// Nearest-rank 95th percentile.
    pub p95_us: u64,
    pub max_us: u64,
}

impl LatencyStats {
    pub fn from_samples(samples: &[u64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut v = samples.to_vec();
        v.sort_unstable();
        let n = v.len();
        let rank = (95 * n).div_ceil(100).max(1);
        Some(Self {
            count: n,
            min_us: v[0],
            median_us: median(&v)?,
            p95_us: v[rank - 1],
            max_us: v[n - 1],
        })
    }
}
