macro_rules! example_test {
    ($name:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $name() {
            $name::run_example().expect(concat!($file, " should run"));
        }
    };
}

example_test!(preprocess_frame, "preprocess_frame.rs");
example_test!(track_confirmation, "track_confirmation.rs");
example_test!(sdsm_roundtrip, "sdsm_roundtrip.rs");
example_test!(rsu_relay, "rsu_relay.rs");
example_test!(udp_loopback, "udp_loopback.rs");
example_test!(simulate_marshill, "simulate_marshill.rs");
example_test!(evaluate_detections, "evaluate_detections.rs");
example_test!(latency_budget, "latency_budget.rs");
