use hybridrx::baseline::{awgn_ber_theory, LlrGrid};
use hybridrx::dsp::{Modulation, Profile};
use hybridrx::error::Error;
use hybridrx::impairments::ChannelProfile;
use hybridrx::pipeline::*;
use hybridrx::rx::{count_bit_errors, HybridConfig, ReceiverKind};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

fn small(num_ttis: usize) -> DatasetSpec {
    DatasetSpec {
        num_ttis,
        ..DatasetSpec::mini_train(Modulation::Qam16, 3.0, 21)
    }
}

#[test]
fn records_are_reproducible_and_distinct() {
    let spec = small(4);
    let a = generate_tti(&spec, 2).unwrap();
    let b = generate_tti(&spec, 2).unwrap();
    assert_eq!(a, b);
    let c = generate_tti(&spec, 3).unwrap();
    assert_ne!(a.labels, c.labels);
    assert!(generate_tti(&spec, 4).is_err());
    assert!((0.0..30.0).contains(&a.snr_db));
    assert_eq!(a.pa_seed, spec.pa_seeds[2]);
}

#[test]
fn desk_specs_follow_the_documented_scaling() {
    let t = DatasetSpec::mini_train(Modulation::Qam16, 3.0, 0);
    assert_eq!((t.num_ttis, t.pa_seeds.len(), t.snr_mode, t.snr_range_db), (2000, 30, SnrMode::Uniform, [0.0, 30.0]));
    let v = DatasetSpec::mini_val(Modulation::Qam16, 3.0, 1);
    assert_eq!(v.pa_seeds.len(), 10);
    assert_eq!(v.snr_grid(), (0..=15).map(|i| 2.0 * i as f64).collect::<Vec<_>>());
    check_disjoint(&t, &v).unwrap();
    assert!(check_disjoint(&t, &t).is_err());
    assert_eq!(t.profile, Profile::Mini);
}

#[test]
fn grid_mode_cycles_through_snr_points() {
    let spec = DatasetSpec {
        num_ttis: 20,
        ..DatasetSpec::mini_val(Modulation::Qam16, 3.0, 2)
    };
    let g = Generator::new(&spec).unwrap();
    assert_eq!(g.tti(0).unwrap().snr_db, 0.0);
    assert_eq!(g.tti(17).unwrap().snr_db, 2.0);
}

#[test]
fn nearly_linear_amplifier_matches_theory() {
    // 60 dB backoff through the fitted PA, no fading, known-channel LMMSE
    let snr = 10.0;
    let spec = DatasetSpec::evaluation(Modulation::Qam16, 60.0, snr, 250, 3);
    let rows = evaluate(&Receiver::LmmseKnown, &Dataset::generate(&spec).unwrap()).unwrap();
    let theory = awgn_ber_theory(snr, Modulation::Qam16);
    let row = rows[0];
    assert!(row.bit_count > 400_000);
    assert!((row.ber - theory).abs() < 4.0 * row.std_error(), "{} vs {theory}", row.ber);
}

#[test]
fn dataset_file_round_trip_and_hash() {
    let spec = DatasetSpec {
        channel: ChannelProfile::tdl_a(300e-9, 40.0, 5),
        ..small(6)
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.bin");
    let m1 = generate_dataset(&spec, &path).unwrap();
    let loaded = Dataset::load(&path).unwrap();
    assert_eq!(loaded, Dataset::generate(&spec).unwrap());
    assert_eq!(m1.count, 6);
    assert_eq!(m1.content_hash.len(), 64);
    let stored: Manifest = serde_json::from_str(&std::fs::read_to_string(manifest_path(&path)).unwrap()).unwrap();
    assert_eq!(stored, m1);

    let path2 = dir.path().join("again.bin");
    assert_eq!(generate_dataset(&spec, &path2).unwrap().content_hash, m1.content_hash);
    let other = DatasetSpec { master_seed: 22, ..spec };
    assert_ne!(generate_dataset(&other, &path2).unwrap().content_hash, m1.content_hash);

    let bytes = std::fs::read(&path).unwrap();
    assert!(matches!(Dataset::from_bytes(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
    assert!(matches!(Dataset::load(&dir.path().join("missing.bin")), Err(Error::Io { .. })));
}

#[test]
fn ber_accounting() {
    let spec = DatasetSpec {
        num_ttis: 32,
        ..DatasetSpec::mini_val(Modulation::Qam64, 3.0, 7)
    };
    let ds = Dataset::generate(&spec).unwrap();
    let rows = evaluate(&Receiver::LmmseEst, &ds).unwrap();
    assert_eq!(rows.iter().map(|r| r.bit_count).sum::<u64>(), ds.masked_bits());
    assert!(rows.windows(2).all(|w| w[0].snr_db < w[1].snr_db));

    let (mut oracle, mut coin) = (BerCounter::default(), BerCounter::default());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for r in &ds.records {
        let values = r.labels.iter().map(|&b| if b == 1 { 9.0 } else { -9.0 }).collect();
        let llr = LlrGrid { subcarriers: 36, symbols: 14, values };
        let (e, n) = count_bit_errors(&llr, &r.labels, &r.mask);
        oracle.add(r.snr_db, e, n);
        let values = r.labels.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let llr = LlrGrid { subcarriers: 36, symbols: 14, values };
        let (e, n) = count_bit_errors(&llr, &r.labels, &r.mask);
        coin.add(0.0, e, n);
    }
    assert!(oracle.finish().iter().all(|r| r.bit_errors == 0));
    let c = pooled(&coin.finish());
    assert!((c.ber - 0.5).abs() < 0.01, "{}", c.ber);
}

#[test]
fn known_channel_on_linear_chain_matches_theory() {
    let spec = DatasetSpec {
        pa: PaChoice::Linear,
        ..DatasetSpec::evaluation(Modulation::Qam64, 0.0, 18.0, 200, 8)
    };
    let row = evaluate(&Receiver::LmmseKnown, &Dataset::generate(&spec).unwrap()).unwrap()[0];
    let theory = awgn_ber_theory(18.0, Modulation::Qam64);
    assert!((row.ber - theory).abs() < 4.0 * row.std_error(), "{} vs {theory}", row.ber);
}

#[test]
fn short_training_is_deterministic_and_checkpointed() {
    let train_spec = small(24);
    let val_spec = DatasetSpec {
        num_ttis: 8,
        ..DatasetSpec::mini_val(Modulation::Qam16, 3.0, 22)
    };
    let (tr, va) = (Dataset::generate(&train_spec).unwrap(), Dataset::generate(&val_spec).unwrap());
    let cfg = HybridConfig {
        pre_fft_filters: vec![4],
        post_fft_filters: vec![8, 8],
        post_fft_dilations: vec![[1, 1], [2, 2]],
        ..HybridConfig::desk(ReceiverKind::Hybrid, train_spec.link(), 1)
    };
    let hyper = TrainHyper {
        epochs: 3,
        lr: 3e-3,
        ..TrainHyper::default()
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let a = train(&cfg, &tr, &va, &hyper, Some(d1.path())).unwrap();
    let b = train(&cfg, &tr, &va, &hyper, Some(d2.path())).unwrap();
    assert_eq!(a.metrics.len(), 8);
    assert_eq!(a.best_epoch, b.best_epoch);
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&d1, METRICS_FILE), read(&d2, METRICS_FILE));
    assert_eq!(read(&d1, CHECKPOINT_FILE), read(&d2, CHECKPOINT_FILE));
    let train_losses: Vec<f64> = a.metrics.iter().filter(|m| m.split == "train").map(|m| m.loss).collect();
    assert!(train_losses.last().unwrap() < &train_losses[0]);

    let overlapping = DatasetSpec {
        pa_seeds: vec![3],
        ..val_spec
    };
    let va2 = Dataset::generate(&overlapping).unwrap();
    assert!(matches!(train(&cfg, &tr, &va2, &hyper, None), Err(Error::Config(_))));
}

#[test]
fn non_finite_input_aborts_training() {
    let mut tr = Dataset::generate(&small(4)).unwrap();
    // Mid-frame sample: cyclic-prefix samples never reach the FFT bridge.
    let mid = tr.records[1].rx_frame.data.len() / 2;
    tr.records[1].rx_frame.data[mid] = Complex64::new(f64::NAN, 0.0);
    let va = Dataset::generate(&DatasetSpec {
        num_ttis: 2,
        ..DatasetSpec::mini_val(Modulation::Qam16, 3.0, 2)
    })
    .unwrap();
    let cfg = HybridConfig {
        post_fft_filters: vec![4],
        post_fft_dilations: vec![],
        ..HybridConfig::desk(ReceiverKind::DeepRx, tr.spec.link(), 0)
    };
    let err = train(&cfg, &tr, &va, &TrainHyper { epochs: 1, ..TrainHyper::default() }, None);
    assert!(matches!(err, Err(Error::Diverged { .. })), "{:?}", err.err());
}
