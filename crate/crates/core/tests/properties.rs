mod common;

use common::*;
use noma_core::beamforming::BeamformingMatrix;
use noma_core::channel::path_loss_db;
use noma_core::codec::{crc, decode, encode, Payload, TransportFormat, MCS_TABLE};
use noma_core::linalg::min_eigenvalue;
use noma_core::mmse::PreEqualizer;
use noma_core::receivers::filters::{self, Observation};
use noma_core::simulation::{coverage, joint_coverage, snr_distribution, Stream, TrialRecord};
use noma_core::transmitter::StreamGains;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn records() -> impl Strategy<Value = Vec<TrialRecord>> {
    prop::collection::vec((1usize..200, 0usize..1000, 0usize..1000), 1..50).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (frames, b, m))| TrialRecord {
                user_id: i,
                group_k: 1,
                mcs_index: 0,
                alpha: 0.5,
                frames,
                bc_errors: b % (frames + 1),
                mc_errors: m % (frames + 1),
                snr_db: 0.0,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_coverage_is_below_each_stream(recs in records(), thr in 0.001f64..0.5) {
        let bc = coverage(&recs, Stream::Broadcast, thr).unwrap();
        let mc = coverage(&recs, Stream::Multicast, thr).unwrap();
        let j = joint_coverage(&recs, &recs, thr).unwrap();
        prop_assert!(j <= bc.min(mc));
        prop_assert!((0.0..=100.0).contains(&j));
        // Joint outage is the union, so it is bounded below too.
        prop_assert!(j >= bc + mc - 100.0 - 1e-9);
    }

    #[test]
    fn coverage_is_monotone_in_threshold(recs in records(), a in 0.001f64..0.5, b in 0.001f64..0.5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(coverage(&recs, Stream::Broadcast, lo).unwrap()
            <= coverage(&recs, Stream::Broadcast, hi).unwrap());
    }

    #[test]
    fn snr_cdf_is_monotone_and_complete(v in prop::collection::vec(-10.0f64..40.0, 1..300)) {
        let d = snr_distribution(&v).unwrap();
        prop_assert!(d.bins.windows(2).all(|w| w[0].cdf <= w[1].cdf + 1e-15));
        prop_assert!((d.bins.last().unwrap().cdf - 1.0).abs() < 1e-12);
        prop_assert!((d.bins.iter().map(|b| b.pdf).sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(d.bins[0].bin_db <= d.min_db - 1.0 + 1e-9);
        prop_assert!(d.bins.last().unwrap().bin_db >= d.max_db.floor());
    }

    #[test]
    fn noiseless_codec_roundtrip(seed in any::<u64>(), idx in 0usize..8, budget in 64usize..400) {
        let format = TransportFormat::for_symbol_budget(MCS_TABLE[idx], budget).unwrap();
        let p = Payload::random(format.payload_bits, &mut ChaCha8Rng::seed_from_u64(seed));
        let block = encode(&p, &format).unwrap();
        prop_assert_eq!(block.len(), format.n_symbols);
        prop_assert!(block.len() <= budget);
        prop_assert!(decode(&block.symbols, &format, 1e-3).unwrap().delivered(&p));
    }

    #[test]
    fn crc_detects_single_bit_errors(bits in prop::collection::vec(0u8..2, 1..300), pos in any::<prop::sample::Index>()) {
        let mut block = crc::append_crc(&bits);
        prop_assert!(crc::check_crc(&block));
        let i = pos.index(block.len());
        block[i] ^= 1;
        prop_assert!(!crc::check_crc(&block));
    }

    #[test]
    fn stream_gains_split_unit_power(alpha in 0.0f64..=1.0, n_t in 1usize..9) {
        let g = StreamGains::new(alpha, n_t).unwrap();
        let total = (g.multicast.powi(2) + g.broadcast.powi(2)) * n_t as f64;
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_loss_grows_with_distance(a in 10.0f64..5000.0, b in 10.0f64..5000.0) {
        prop_assert_eq!(a < b, path_loss_db(a) < path_loss_db(b));
    }

    #[test]
    fn dft_beams_are_unitary(n in 1usize..16) {
        prop_assert!(BeamformingMatrix::dft(n).unwrap().unitarity_defect() < 1e-12);
    }

    #[test]
    fn steered_beams_are_unitary(base in -60.0f64..-20.0, step in 10.0f64..25.0) {
        let angles: Vec<f64> = (0..4).map(|i| base + step * i as f64).collect();
        prop_assert!(BeamformingMatrix::steered(&angles).unwrap().unitarity_defect() < 1e-10);
    }

    #[test]
    fn pre_equalized_noise_is_psd(seed in any::<u64>(), log_s in -3.0f64..1.0) {
        let h = gaussian(4, 4, &mut ChaCha8Rng::seed_from_u64(seed));
        let eq = PreEqualizer::new(&h, 10f64.powf(log_s)).unwrap();
        prop_assert!(min_eigenvalue(eq.noise_covariance()) > -1e-12);
    }

    #[test]
    fn closed_forms_match_oracle(seed in any::<u64>()) {
        let c = random_case(4, &mut ChaCha8Rng::seed_from_u64(seed));
        let beams = BeamformingMatrix::from_matrix(c.b.clone()).unwrap();
        let g = StreamGains::from_amplitudes(c.g_mc, c.g_bc);
        let o = Obs::pre_eq(&c.h, c.sigma2);
        let obs = Observation::pre_equalized(&o.n);
        let w = filters::joint_filter(&obs, &beams, c.k, g).unwrap();
        prop_assert!(rel_err(&w, &oracle_joint(&o, &c.b, c.k, c.g_mc, c.g_bc)) < 1e-9);
        let w = filters::broadcast_filter_full(&obs, &beams, g).unwrap();
        prop_assert!(rel_err(&w, &oracle_broadcast_full(&o, &c.b, c.g_mc, c.g_bc)) < 1e-9);
    }

    /// Scaling the channel and the noise together leaves the SINR and
    /// therefore the normalized filter direction unchanged.
    #[test]
    fn filter_direction_is_scale_invariant(seed in any::<u64>(), s in 0.1f64..10.0) {
        let c = random_case(4, &mut ChaCha8Rng::seed_from_u64(seed));
        let beams = BeamformingMatrix::from_matrix(c.b.clone()).unwrap();
        let g = StreamGains::from_amplitudes(c.g_mc, c.g_bc);
        let a = filters::broadcast_filter_full(&Observation::direct(&c.h, c.sigma2), &beams, g).unwrap();
        let h2 = &c.h * real(s);
        let b = filters::broadcast_filter_full(&Observation::direct(&h2, c.sigma2 * s * s), &beams, g).unwrap();
        prop_assert!(rel_err(&(b * real(s)), &a) < 1e-9);
    }
}
