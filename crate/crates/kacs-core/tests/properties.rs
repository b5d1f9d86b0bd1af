//! Property tests for the structural invariants: encode/decode identities,
//! norm preservation, matching validity, permutation bijectivity, and
//! stream determinism under arbitrary inputs.

use kacs_core::bits::{round_to_d_bits, val};
use kacs_core::circuit::{apply_gate, apply_gate_inverse, random_continuous_params, KeyedPrp};
use kacs_core::coupling::build_partition_schedule;
use kacs_core::haar::haar_sphere_sample;
use kacs_core::matching::sample_matching;
use kacs_core::walk::run_walk;
use kacs_core::{Field, RngStream, StateVector};
use proptest::prelude::*;
use rand::RngCore;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `val` inverts `round_to_d_bits` exactly on d-bit dyadics.
    #[test]
    fn val_round_identity_on_dyadics(bits in 0u64..(1 << 20), d in 1u32..=20) {
        let bits = bits & ((1 << d) - 1);
        let x = val(bits, d).unwrap();
        prop_assert_eq!(round_to_d_bits(x, d).unwrap(), bits);
    }

    /// Truncation always lands within 2^-d below the input.
    #[test]
    fn round_to_d_bits_error(x in 0.0f64..1.0, d in 1u32..=52) {
        let b = round_to_d_bits(x, d).unwrap();
        let v = val(b, d).unwrap();
        prop_assert!(v <= x && x - v < 2f64.powi(-(d as i32)));
    }

    /// Sampled matchings are perfect matchings, for any even dimension.
    #[test]
    fn sampled_matchings_are_valid(w in 1usize..24, seed in 0u64..1000) {
        let w = 2 * w;
        let mut rng = RngStream::from_seed_u64(seed);
        let m = sample_matching(w, &mut rng).unwrap();
        let mut seen = vec![false; w];
        for &(i, j) in m.pairs() {
            prop_assert!(i != j && i < w && j < w);
            prop_assert!(!seen[i] && !seen[j]);
            seen[i] = true;
            seen[j] = true;
        }
        prop_assert!(seen.into_iter().all(|b| b));
    }

    /// Walks of any length preserve the norm on both fields.
    #[test]
    fn walk_norm_preserved(steps in 0usize..40, seed in 0u64..500, complex in any::<bool>()) {
        let field = if complex { Field::Complex } else { Field::Real };
        let rng = RngStream::from_seed_u64(seed);
        let s0 = haar_sphere_sample(16, field, &mut rng.substream(0)).unwrap();
        let (s, trace) = run_walk(&s0, steps, &rng.substream(1)).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        prop_assert_eq!(trace.len(), steps);
    }

    /// Gate then inverse gate is the identity (both fields, any tables).
    #[test]
    fn gate_inverse_round_trip(seed in 0u64..500, n in 2u32..=6, complex in any::<bool>()) {
        let field = if complex { Field::Complex } else { Field::Real };
        let rng = RngStream::from_seed_u64(seed);
        let params = random_continuous_params(n, field, &rng.substream(0)).unwrap();
        let s0 = haar_sphere_sample(1 << n, field, &mut rng.substream(1)).unwrap();
        let mut s = s0.clone();
        apply_gate(&mut s, &params).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        apply_gate_inverse(&mut s, &params).unwrap();
        prop_assert!(s.max_amp_distance(&s0) < 1e-12);
    }

    /// The Feistel construction is a permutation for every width and key.
    #[test]
    fn keyed_prp_bijective(n in 1u32..=10, key_byte in any::<u8>()) {
        let prp = KeyedPrp::new(n, &[key_byte; 32]).unwrap();
        let mut seen = vec![false; 1 << n];
        for x in 0..1u64 << n {
            let y = prp.forward(x);
            prop_assert!(!seen[y as usize]);
            seen[y as usize] = true;
            prop_assert_eq!(prp.inverse(y), x);
        }
    }

    /// Backward partitions only coarsen as the window start recedes, and
    /// the merge count matches the eliminated block count.
    #[test]
    fn schedule_merge_accounting(w in 2usize..10, steps in 0usize..12, seed in 0u64..200) {
        let w = 2 * w;
        let s = build_partition_schedule(w, 0, steps, &RngStream::from_seed_u64(seed)).unwrap();
        prop_assert_eq!(s.merge_count(), w - s.initial_partition().num_blocks());
        prop_assert!(s.final_partition().refines(s.initial_partition()));
    }

    /// Identical streams replay identically; sibling lanes differ.
    #[test]
    fn stream_determinism(seed in any::<u64>(), lane in 0u64..1024) {
        let root = RngStream::from_seed_u64(seed);
        let mut a = root.substream(lane);
        let mut b = root.substream(lane);
        let mut c = root.substream(lane + 1);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        prop_assert_eq!(&xs, &ys);
        prop_assert_ne!(&xs, &zs);
    }

    /// State containers round-trip bit-exactly.
    #[test]
    fn state_container_round_trip(seed in 0u64..500, complex in any::<bool>()) {
        let field = if complex { Field::Complex } else { Field::Real };
        let mut rng = RngStream::from_seed_u64(seed);
        let s = haar_sphere_sample(8, field, &mut rng).unwrap();
        let mut buf = Vec::new();
        kacs_core::circuit::write_state(&s, 10, &mut buf).unwrap();
        let (back, d) = kacs_core::circuit::read_state(buf.as_slice()).unwrap();
        prop_assert_eq!(back, s.clone());
        prop_assert_eq!(d, 10);
        let text = kacs_core::circuit::state_to_json(&s, 10).unwrap();
        let (back, _) = kacs_core::circuit::state_from_json(&text).unwrap();
        prop_assert_eq!(back, s);
    }
}

/// The complex walk restricted to trivial phases reduces to the real walk
/// (plain test; the invariant is deterministic given the seed).
#[test]
fn complex_walk_with_zero_phases_is_real_walk() {
    let mut rng = RngStream::from_seed_u64(77);
    for _ in 0..20 {
        let real0 = haar_sphere_sample(8, Field::Real, &mut rng).unwrap();
        let mut as_complex = StateVector::Complex(real0.to_complex_amps());
        let mut as_real = real0.clone();
        let m = sample_matching(8, &mut rng).unwrap();
        for &(i, j) in m.pairs() {
            let theta = rng.uniform_angle();
            as_real.rotate_pair(i, j, theta).unwrap();
            as_complex
                .rotate_pair_su2(
                    i,
                    j,
                    &kacs_core::haar::Su2Params { alpha: 0.0, beta: 0.0, theta },
                )
                .unwrap();
        }
        for (a, b) in as_real.as_real().unwrap().iter().zip(as_complex.as_complex().unwrap()) {
            assert!((b.re - a).abs() < 1e-13 && b.im.abs() < 1e-14);
        }
    }
}
