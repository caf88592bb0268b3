use wsnsim_core::harness::{csv_file_name, run_matrix, write_outputs, SUMMARY_FILE};
use wsnsim_core::metrics::{read_csv, read_summary, CSV_HEADER};
use wsnsim_core::{parse_config, ProtocolKind, ScenarioConfig, SinkMode};

#[test]
fn matrix_writes_one_csv_per_run_and_one_summary() {
    let config = ScenarioConfig {
        rounds: 200,
        ..Default::default()
    };
    let modes = [SinkMode::StaticCenter, SinkMode::MobileTop];
    let out = run_matrix(&config, &ProtocolKind::ALL, &modes, &[3, 1, 2]).unwrap();
    assert_eq!(out.len(), 30);
    let seeds: Vec<u64> = out.iter().take(3).map(|o| o.summary.seed).collect();
    assert_eq!(seeds, vec![1, 2, 3]);

    let dir = tempfile::tempdir().unwrap();
    let written = write_outputs(&out, dir.path()).unwrap();
    assert_eq!(written.len(), 31);

    let summaries = read_summary(&dir.path().join(SUMMARY_FILE)).unwrap();
    assert_eq!(summaries.len(), 30);
    for (o, s) in out.iter().zip(&summaries) {
        assert_eq!(&o.summary, s);
        assert_eq!(s.config_fingerprint, config.fingerprint());
        let path = dir.path().join(csv_file_name(s));
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert!(!text.contains('\r'));
        let back = read_csv(&path).unwrap();
        assert_eq!(back.len(), 200);
        assert_eq!(
            back.rounds().last().unwrap().cumulative_packets_to_bs,
            s.total_throughput
        );
        for (a, b) in back.rounds().iter().zip(o.history.rounds()) {
            assert_eq!(a.packets_to_bs, b.packets_to_bs);
            assert!((a.energy_consumed - b.energy_consumed).abs() <= 1e-12 * b.energy_consumed.abs());
        }
    }
}

#[test]
fn fingerprint_tracks_model_parameters_only() {
    let a = parse_config(Some("rounds = 100\nprotocol = leach\n"), &[]).unwrap();
    let b = parse_config(Some("rounds = 100\nprotocol = deec\nseeds = 4-6\n"), &[]).unwrap();
    let c = parse_config(Some("rounds = 101\n"), &[]).unwrap();
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_ne!(a.fingerprint(), c.fingerprint());
}

#[test]
fn failing_run_names_its_combination() {
    let mut config = ScenarioConfig {
        rounds: 10,
        ..Default::default()
    };
    config.protocol.comm_range = -1.0;
    let err = run_matrix(&config, &[ProtocolKind::Campteen], &[SinkMode::StaticTop], &[7]);
    let msg = err.map(|_| ()).unwrap_err().to_string();
    assert!(
        msg.contains("campteen") && msg.contains("static_top") && msg.contains('7'),
        "{msg}"
    );
}
