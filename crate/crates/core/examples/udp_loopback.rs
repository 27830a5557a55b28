// Send an encoded SDSM to a local "OBU" socket and decode what arrives.

use std::error::Error;
use std::net::UdpSocket;
use std::time::Duration;

use wildnet::sdsm::{decode, encode, SensorDataSharingMessage};
use wildnet::v2x::ObuLink;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/sdsm_deer.json");
    let msg: SensorDataSharingMessage = serde_json::from_str(&std::fs::read_to_string(fixture)?)?;

    let obu = UdpSocket::bind("127.0.0.1:0")?;
    obu.set_read_timeout(Some(Duration::from_secs(5)))?;
    let link = ObuLink::connect(&obu.local_addr()?.to_string())?;
    let sent = link.send(&encode(&msg)?)?;

    let mut buf = [0u8; 2048];
    let (n, from) = obu.recv_from(&mut buf)?;
    let got = decode(&buf[..n])?;
    println!("sent {sent} bytes, received {n} from {from}");
    println!("confidence_pct {}", got.objects[0].confidence_pct);
    assert_eq!(got, msg);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
