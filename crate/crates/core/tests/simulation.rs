use noma_core::beamforming::BeamformingMatrix;
use noma_core::channel::{Position, Scenario};
use noma_core::codec::MCS_TABLE;
use noma_core::receivers::ReceiverConfig;
use noma_core::simulation::{
    coverage, joint_coverage, run_sweep, snr_distribution, Stream, SweepSpec, TrialRecord,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_spec(n_users: usize, seed: u64) -> SweepSpec {
    SweepSpec {
        scenario: Scenario {
            n_users,
            ..Scenario::default()
        },
        beams: BeamformingMatrix::dft(4).unwrap(),
        receiver: ReceiverConfig::default(),
        mcs: vec![MCS_TABLE[0], MCS_TABLE[4]],
        alphas: vec![0.3, 0.6],
        frames_per_user: 20,
        symbols_per_block: 256,
        users: None,
        seed,
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn single_noiseless_user_has_full_coverage() {
    let spec = SweepSpec {
        scenario: Scenario {
            n_users: 1,
            additional_loss_db: 0.0,
            snr_ceiling_db: None,
            ..Scenario::default()
        },
        mcs: vec![MCS_TABLE[0]],
        alphas: vec![0.5],
        frames_per_user: 100,
        users: Some(vec![Position {
            distance_m: 40.0,
            azimuth_deg: 0.0,
        }]),
        ..small_spec(1, 3)
    };
    let report = run_sweep(&spec).unwrap();
    assert_eq!(report.cells.len(), 1);
    let c = &report.cells[0];
    assert_eq!(
        (c.coverage_bc, c.coverage_mc, c.joint_coverage),
        (100.0, 100.0, 100.0)
    );
    assert_eq!((c.n_users, c.n_frames), (1, 100));
}

#[test]
fn report_is_identical_across_runs_and_pool_sizes() {
    let spec = small_spec(12, 42);
    let a = in_pool(1, || run_sweep(&spec).unwrap()).to_json();
    let b = in_pool(1, || run_sweep(&spec).unwrap()).to_json();
    let c = in_pool(4, || run_sweep(&spec).unwrap()).to_json();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = in_pool(2, || run_sweep(&small_spec(12, 43)).unwrap()).to_json();
    assert_ne!(a, other);
}

#[test]
fn cells_are_consistent() {
    let spec = small_spec(30, 5);
    let report = run_sweep(&spec).unwrap();
    for &m in &spec.mcs {
        for &a in &spec.alphas {
            let cells: Vec<_> = report
                .cells
                .iter()
                .filter(|c| c.mcs == m.index && c.alpha == a)
                .collect();
            assert_eq!(cells.iter().map(|c| c.n_users).sum::<usize>(), 30);
            for c in cells {
                assert!(c.joint_coverage <= c.coverage_bc.min(c.coverage_mc));
                for v in [c.coverage_bc, c.coverage_mc, c.joint_coverage] {
                    assert!((0.0..=100.0).contains(&v));
                }
                assert_eq!(c.n_frames, c.n_users * spec.frames_per_user);
            }
        }
    }
    assert_eq!(report.records.len(), 30 * 4);
    assert!(report
        .records
        .iter()
        .all(|r| r.bc_errors <= r.frames && r.mc_errors <= r.frames));
    assert_eq!(report.deviations.len(), 4);
}

#[test]
fn invalid_grids_are_rejected() {
    let mut spec = small_spec(2, 1);
    spec.alphas = vec![];
    assert!(run_sweep(&spec).is_err());
    spec.alphas = vec![1.5];
    assert!(run_sweep(&spec).is_err());
    spec.alphas = vec![0.5];
    spec.frames_per_user = 0;
    assert!(run_sweep(&spec).is_err());
}

fn record(user_id: usize, frames: usize, bc_errors: usize, mc_errors: usize) -> TrialRecord {
    TrialRecord {
        user_id,
        group_k: 1,
        mcs_index: 0,
        alpha: 0.5,
        frames,
        bc_errors,
        mc_errors,
        snr_db: 10.0,
    }
}

/// Coverage against a direct count over a random record set.
#[test]
fn coverage_matches_hand_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let n = rng.random_range(1..40);
        let recs: Vec<_> = (0..n)
            .map(|i| record(i, 100, rng.random_range(0..4), rng.random_range(0..4)))
            .collect();
        let mut bc_out = 0;
        let mut mc_out = 0;
        let mut any_out = 0;
        for r in &recs {
            let b = r.bc_errors >= 2;
            let m = r.mc_errors >= 2;
            bc_out += b as usize;
            mc_out += m as usize;
            any_out += (b || m) as usize;
        }
        let pct = |k: usize| 100.0 * (n - k) as f64 / n as f64;
        assert_eq!(
            coverage(&recs, Stream::Broadcast, 0.01).unwrap(),
            pct(bc_out)
        );
        assert_eq!(
            coverage(&recs, Stream::Multicast, 0.01).unwrap(),
            pct(mc_out)
        );
        let j = joint_coverage(&recs, &recs, 0.01).unwrap();
        assert_eq!(j, pct(any_out));
        assert!(j <= pct(bc_out).min(pct(mc_out)));
    }
}

#[test]
fn joint_coverage_example_from_two_users() {
    let mut recs: Vec<_> = (0..10).map(|i| record(i, 100, 0, 0)).collect();
    recs[0].bc_errors = 5;
    recs[1].mc_errors = 5;
    assert_eq!(coverage(&recs, Stream::Broadcast, 0.01).unwrap(), 90.0);
    assert_eq!(coverage(&recs, Stream::Multicast, 0.01).unwrap(), 90.0);
    assert_eq!(joint_coverage(&recs, &recs, 0.01).unwrap(), 80.0);
}

#[test]
fn histogram_of_fixed_drop_matches_hand_cdf() {
    let d = snr_distribution(&[4.2, 4.9, 6.5, 7.0, 7.1]).unwrap();
    let got: Vec<(f64, f64, f64)> = d.bins.iter().map(|b| (b.bin_db, b.pdf, b.cdf)).collect();
    let expect = [
        (3.0, 0.0, 0.0),
        (4.0, 0.4, 0.4),
        (5.0, 0.0, 0.4),
        (6.0, 0.2, 0.6),
        (7.0, 0.4, 1.0),
        (8.0, 0.0, 1.0),
    ];
    assert_eq!(got.len(), expect.len());
    for (g, e) in got.iter().zip(expect) {
        assert_eq!(g.0, e.0);
        assert!((g.1 - e.1).abs() < 1e-12 && (g.2 - e.2).abs() < 1e-12);
    }
    assert!((d.mean_db - 5.94).abs() < 1e-12);
}

#[test]
fn uniform_snr_gives_flat_histogram() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 100_000;
    let samples: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..20.0)).collect();
    let d = snr_distribution(&samples).unwrap();
    let inner: Vec<_> = d
        .bins
        .iter()
        .filter(|b| (0.0..20.0).contains(&b.bin_db))
        .collect();
    assert_eq!(inner.len(), 20);
    let se = (0.05 * 0.95 / n as f64).sqrt();
    for b in inner {
        assert!((b.pdf - 0.05).abs() < 4.0 * se, "{} {}", b.bin_db, b.pdf);
    }
    assert!(d.bins.windows(2).all(|w| w[0].cdf <= w[1].cdf));
    assert_eq!(d.bins.last().unwrap().cdf, 1.0);
}
