// Two vehicles 1.5 km apart on a rural road. Without a roadside unit the
// warning never arrives; with one halfway along it is relayed across.

use std::error::Error;

use wildnet::geo::{destination, haversine_m, LatLon};
use wildnet::sdsm::MessageKey;
use wildnet::v2x::{AirMessage, RadioModel, RadioWorld, StationKind, StationNode};

fn world(with_rsu: bool) -> Result<RadioWorld, Box<dyn Error>> {
    let a = LatLon::new(35.8262, -82.5487);
    let b = destination(a, 0.0, 1500.0);
    let mut stations = vec![
        StationNode::new(1001, StationKind::Obu, a),
        StationNode::new(2002, StationKind::Obu, b),
    ];
    if with_rsu {
        stations.push(StationNode::new(
            3001,
            StationKind::Rsu,
            destination(a, 0.0, 800.0),
        ));
    }
    println!("A to B: {:.0} m", haversine_m(a, b));
    Ok(RadioWorld::new(stations, RadioModel::default())?)
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let msg = AirMessage {
        key: MessageKey {
            source_id: 1001,
            msg_count: 0,
            sdsm_time_ms: 1_745_500_000_000,
        },
        payload: vec![0; 38],
        hop_count: 0,
        origin_time_us: 0,
    };
    for with_rsu in [false, true] {
        let mut w = world(with_rsu)?;
        let out = w.broadcast_with_relay(1001, &msg, 0)?;
        let reached_b = out.deliveries.iter().any(|d| d.station_id == 2002);
        println!(
            "rsu {with_rsu}: sent {} relayed {} delivered {} -> B alerted: {reached_b}",
            out.stats.sent, out.stats.relayed, out.stats.delivered
        );
        for d in &out.deliveries {
            println!(
                "  station {} hop {} at {} us",
                d.station_id, d.hop_count, d.arrival_us
            );
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
