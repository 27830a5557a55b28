mod common;

use std::io::{BufRead, BufReader};
use std::net::UdpSocket;
use std::process::{Command, Output, Stdio};
use std::time::Duration;

use common::fixture;
use wildnet::sdsm::{encode, SensorDataSharingMessage};

fn wildnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wildnet"))
        .args(args)
        .env_remove("WILDNET_OBU_ENDPOINT")
        .output()
        .unwrap()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn simulate_is_deterministic_and_matches_golden() {
    let a = wildnet(&["simulate", &path("marshill_small.json"), "--seed", "7"]);
    let b = wildnet(&["simulate", &path("marshill_small.json"), "--seed", "7"]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let golden = std::fs::read(fixture("marshill_small_report.json")).unwrap();
    assert!(a.stdout == golden, "report differs from committed golden");
    let stderr = String::from_utf8_lossy(&a.stderr);
    assert!(stderr.contains("budget violations: 0"), "{stderr}");
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["frames"], 300);
}

#[test]
fn simulate_seed_changes_the_report() {
    let a = wildnet(&["simulate", &path("marshill_small.json"), "--seed", "7"]);
    let b = wildnet(&["simulate", &path("marshill_small.json"), "--seed", "8"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn simulate_exit_codes() {
    assert_eq!(
        wildnet(&["simulate", &path("inference_70ms.json")])
            .status
            .code(),
        Some(2)
    );
    let missing = wildnet(&["simulate", "/no/such/scenario.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(missing.stdout.is_empty());
    let bad = wildnet(&[
        "simulate",
        &path("loopback.json"),
        "--broadcast-conf",
        "0.4",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn simulate_writes_out_file_and_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = wildnet(&[
        "simulate",
        &path("loopback.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["broadcasts"], 1);
    let t = wildnet(&["simulate", &path("loopback.json"), "--format", "text"]);
    assert!(String::from_utf8_lossy(&t.stdout).contains("end_to_end"));
}

#[test]
fn codec_encode_decode_dump() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("m.bin");
    let json = dir.path().join("m.json");
    let (bin_s, json_s) = (bin.to_str().unwrap(), json.to_str().unwrap());
    assert_eq!(
        wildnet(&["codec", "encode", &path("sdsm_deer.json"), "-o", bin_s])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(std::fs::metadata(&bin).unwrap().len(), 38);
    assert_eq!(
        wildnet(&["codec", "decode", bin_s, "-o", json_s])
            .status
            .code(),
        Some(0)
    );
    let a: SensorDataSharingMessage =
        serde_json::from_str(&std::fs::read_to_string(fixture("sdsm_deer.json")).unwrap()).unwrap();
    let b: SensorDataSharingMessage =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(a, b);
    let canonical = serde_json::to_string_pretty(&a).unwrap() + "\n";
    assert_eq!(std::fs::read_to_string(&json).unwrap(), canonical);

    let dump = wildnet(&["codec", "dump", bin_s]);
    let text = String::from_utf8_lossy(&dump.stdout);
    assert!(text.contains("data bits: 297, pad bits: 7"), "{text}");

    let bytes = std::fs::read(&bin).unwrap();
    std::fs::write(&bin, &bytes[..30]).unwrap();
    let t = wildnet(&["codec", "decode", bin_s]);
    assert_eq!(t.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&t.stderr).contains("truncated"));
}

#[test]
fn eval_golden_perfect_and_errors() {
    let o = wildnet(&["eval", &path("eval_gt.jsonl"), &path("eval_pred.jsonl")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout == std::fs::read(fixture("eval_golden.json")).unwrap());

    let p = wildnet(&[
        "eval",
        &path("eval_gt.jsonl"),
        &path("eval_perfect_pred.jsonl"),
    ]);
    let v: serde_json::Value = serde_json::from_slice(&p.stdout).unwrap();
    for k in ["precision", "recall", "f1", "ap50", "map5095"] {
        assert_eq!(v[k], 1.0, "{k}");
    }

    let t = wildnet(&[
        "eval",
        &path("eval_gt.jsonl"),
        &path("eval_pred.jsonl"),
        "--table",
        "--bins",
    ]);
    let text = String::from_utf8_lossy(&t.stdout);
    assert!(
        text.contains("mAP@0.5:0.95") && text.contains("20-50") && text.contains("85.00%"),
        "{text}"
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("p.jsonl");
    std::fs::write(&bad, "{\"image_id\":\"mh_0001\",\"detections\":[]}\n{\"image_id\":\"ghost_7\",\"detections\":[]}\n").unwrap();
    let m = wildnet(&["eval", &path("eval_gt.jsonl"), bad.to_str().unwrap()]);
    assert_eq!(m.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&m.stderr).contains("ghost_7"));

    let empty = dir.path().join("g.jsonl");
    std::fs::write(&empty, "{\"image_id\":1,\"boxes\":[]}\n").unwrap();
    let z = wildnet(&["eval", empty.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(z.status.code(), Some(1));
}

#[test]
fn golden_eval_agrees_with_brute_force_oracle() {
    let gt = wildnet::eval::GroundTruthSet::from_path(fixture("eval_gt.jsonl")).unwrap();
    let preds = wildnet::eval::PredictionSet::from_path(fixture("eval_pred.jsonl")).unwrap();
    let golden: serde_json::Value =
        serde_json::from_slice(&std::fs::read(fixture("eval_golden.json")).unwrap()).unwrap();
    let ap50 = common::brute_force_ap(&gt, &preds, 0.5);
    let map = (0..10)
        .map(|k| common::brute_force_ap(&gt, &preds, (50 + 5 * k) as f64 / 100.0))
        .sum::<f64>()
        / 10.0;
    assert!((golden["ap50"].as_f64().unwrap() - ap50).abs() < 1e-9);
    assert!((golden["map5095"].as_f64().unwrap() - map).abs() < 1e-9);
}

#[test]
fn listen_prints_alerts_and_skips_garbage() {
    let probe = UdpSocket::bind("127.0.0.1:0").unwrap();
    let port = probe.local_addr().unwrap().port();
    drop(probe);
    let mut child = Command::new(env!("CARGO_BIN_EXE_wildnet"))
        .args([
            "listen",
            "--bind",
            "127.0.0.1",
            "--port",
            &port.to_string(),
            "--count",
            "2",
        ])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let msg: SensorDataSharingMessage =
        serde_json::from_str(&std::fs::read_to_string(fixture("sdsm_deer.json")).unwrap()).unwrap();
    let bytes = encode(&msg).unwrap();
    let tx = UdpSocket::bind("127.0.0.1:0").unwrap();
    let target = format!("127.0.0.1:{port}");
    let mut stdout = BufReader::new(child.stdout.take().unwrap());
    let (line_tx, line_rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || loop {
        let mut line = String::new();
        if stdout.read_line(&mut line).unwrap_or(0) == 0 {
            break;
        }
        let _ = line_tx.send(line);
    });
    // Resend until the listener is up.
    let mut first = None;
    for _ in 0..100 {
        tx.send_to(&bytes, &target).unwrap();
        if let Ok(l) = line_rx.recv_timeout(Duration::from_millis(100)) {
            first = Some(l);
            break;
        }
    }
    let first = first.expect("no alert printed");
    tx.send_to(b"not an sdsm", &target).unwrap();
    tx.send_to(&bytes, &target).unwrap();
    let second = line_rx.recv_timeout(Duration::from_secs(5)).unwrap();
    let status = child.wait().unwrap();
    let mut err = String::new();
    std::io::Read::read_to_string(&mut child.stderr.take().unwrap(), &mut err).unwrap();
    assert_eq!(status.code(), Some(0));
    for line in [first, second] {
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["message"]["objects"][0]["confidence_pct"], 82);
        assert!(v["received_unix_ms"].as_u64().unwrap() > 0);
    }
    assert!(err.contains("warning: skipped 11-byte datagram"), "{err}");
}
