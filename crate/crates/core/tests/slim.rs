mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slimfl::slim::{
    backward, build_mask, checkpoint, forward, model_cost, Layout, SlimmableParams, WidthMask,
    BITS_PER_PARAM_REFERENCE, UL_MOBILENET_0_5X, UL_MOBILENET_1_0X,
};
use slimfl::{Error, Matrix};

fn random_batch(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-2.0..2.0)).collect();
    Matrix::from_vec(rows, cols, data)
}

fn random_params(layout: &Layout, seed: u64) -> SlimmableParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SlimmableParams::init(layout.clone(), &mut rng)
}

#[test]
fn forward_matches_extracted_subnetwork() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (input, hidden, classes) in [(5, vec![8], 3), (7, vec![6, 9], 4), (4, vec![3, 5, 2], 5)] {
        let layout = Layout::slim_mlp(input, &hidden, classes).unwrap();
        let params = random_params(&layout, rng.random());
        let x = random_batch(6, input, &mut rng);
        for r in [0.25, 0.5, 0.75, 1.0] {
            let mask = build_mask(&layout, r).unwrap();
            let got = forward(&params, &mask, &x).unwrap();
            let want = common::oracle_logits(&layout, params.values(), r, &x);
            for (i, row) in want.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    assert!((got.get(i, j) - v).abs() <= 1e-12, "r={r} ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn inactive_parameters_do_not_affect_output() {
    let layout = Layout::slim_mlp(6, &[10, 10], 3).unwrap();
    let params = random_params(&layout, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = random_batch(4, 6, &mut rng);
    let mask = build_mask(&layout, 0.5).unwrap();
    let mut scrambled = params.clone();
    for (v, &b) in scrambled.values_mut().iter_mut().zip(mask.bits()) {
        if !b {
            *v = rng.random_range(-50.0..50.0);
        }
    }
    assert_eq!(
        forward(&params, &mask, &x).unwrap().as_slice(),
        forward(&scrambled, &mask, &x).unwrap().as_slice()
    );
}

#[test]
fn backward_is_zero_outside_mask() {
    let layout = Layout::slim_mlp(5, &[8, 6], 4).unwrap();
    let params = random_params(&layout, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = random_batch(3, 5, &mut rng);
    let g_out = random_batch(3, 4, &mut rng);
    for r in [0.25, 0.5, 0.75] {
        let mask = build_mask(&layout, r).unwrap();
        let g = backward(&params, &mask, &x, &g_out).unwrap();
        for (v, &b) in g.iter().zip(mask.bits()) {
            if !b {
                assert_eq!(*v, 0.0);
            }
        }
        assert!(g.iter().any(|v| *v != 0.0));
    }
}

#[test]
fn reference_cost_constants() {
    assert_eq!(UL_MOBILENET_1_0X.params, 2 * UL_MOBILENET_0_5X.params);
    assert_eq!(UL_MOBILENET_1_0X.bits_per_round, 2 * UL_MOBILENET_0_5X.bits_per_round);
    let bpp = UL_MOBILENET_1_0X.bits_per_round as f64 / UL_MOBILENET_1_0X.params as f64;
    assert_eq!(bpp, BITS_PER_PARAM_REFERENCE);
    assert!((UL_MOBILENET_1_0X.tx_power_mw - 132.1).abs() < 1e-9);
    assert!((UL_MOBILENET_0_5X.tx_power_mw - 67.4).abs() < 1e-9);
}

#[test]
fn measured_cost_counts_mask_ones() {
    let layout = Layout::slim_mlp(784, &[64], 10).unwrap();
    let full = model_cost(&layout, &build_mask(&layout, 1.0).unwrap(), 32.0);
    let half = model_cost(&layout, &build_mask(&layout, 0.5).unwrap(), 32.0);
    assert_eq!(full.param_count, 784 * 64 + 64 + 64 * 10 + 10);
    assert_eq!(half.param_count, 784 * 32 + 32 + 32 * 10 + 10);
    assert_eq!(full.bits_per_round, 32 * full.param_count as u64);
    assert_eq!(full.flops_per_image, (2 * 784 * 64 + 64 + 2 * 64 * 10) as u64);
    assert_eq!(half.flops_per_image, (2 * 784 * 32 + 32 + 2 * 32 * 10) as u64);
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let layout = Layout::slim_mlp(9, &[7, 4], 3).unwrap();
    let params = random_params(&layout, 21);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    checkpoint::save(&params, &path).unwrap();
    let back = checkpoint::load(&path).unwrap();
    assert_eq!(back.layout(), params.layout());
    let a: Vec<u64> = params.values().iter().map(|v| v.to_bits()).collect();
    let b: Vec<u64> = back.values().iter().map(|v| v.to_bits()).collect();
    assert_eq!(a, b);
}

#[test]
fn checkpoint_rejects_damage() {
    let layout = Layout::slim_mlp(3, &[2], 2).unwrap();
    let bytes = checkpoint::encode(&random_params(&layout, 1));
    let cut = checkpoint::decode(&bytes[..bytes.len() - 3], "cut.ckpt").unwrap_err();
    assert!(matches!(cut, Error::Format { .. }), "{cut}");
    let mut long = bytes.clone();
    long.push(0);
    assert!(matches!(checkpoint::decode(&long, "long.ckpt"), Err(Error::Format { .. })));
    assert!(matches!(checkpoint::decode(&[], "empty.ckpt"), Err(Error::Format { .. })));
}

#[test]
fn invalid_ratios_are_rejected() {
    let layout = Layout::slim_mlp(3, &[4], 2).unwrap();
    for r in [0.0, -0.5, 1.5, f64::NAN] {
        assert!(matches!(build_mask(&layout, r), Err(Error::InvalidRatio(_))));
    }
}

fn layout_strategy() -> impl Strategy<Value = Layout> {
    (1usize..6, prop::collection::vec(1usize..12, 1..4), 2usize..5)
        .prop_map(|(i, h, c)| Layout::slim_mlp(i, &h, c).unwrap())
}

proptest! {
    #[test]
    fn masks_nest_and_partition(layout in layout_strategy(), a in 0.05f64..1.0, b in 0.05f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let m_lo = build_mask(&layout, lo).unwrap();
        let m_hi = build_mask(&layout, hi).unwrap();
        let full = build_mask(&layout, 1.0).unwrap();
        prop_assert!(m_lo.is_subset_of(&m_hi));
        let all = WidthMask::full(layout.param_count());
        prop_assert_eq!(full.bits(), all.bits());
        // the low mask and its complement split the full vector
        let comp = m_lo.complement_bits();
        for (x, y) in m_lo.bits().iter().zip(&comp) {
            prop_assert!(*x ^ *y);
        }
        let diff = m_hi.difference(&m_lo);
        let rebuilt: Vec<bool> = m_lo.bits().iter().zip(&diff).map(|(x, y)| *x || *y).collect();
        prop_assert_eq!(rebuilt.as_slice(), m_hi.bits());
        prop_assert!(m_lo.bits().iter().zip(&diff).all(|(x, y)| !(*x && *y)));
    }

    #[test]
    fn forward_equivalence_random(layout in layout_strategy(), r in 0.05f64..=1.0, seed in any::<u64>()) {
        let params = random_params(&layout, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let x = random_batch(3, layout.input_dim(), &mut rng);
        let mask = build_mask(&layout, r).unwrap();
        let got = forward(&params, &mask, &x).unwrap();
        let want = common::oracle_logits(&layout, params.values(), r, &x);
        for (i, row) in want.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                prop_assert!((got.get(i, j) - v).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn checkpoint_round_trip_random(layout in layout_strategy(), seed in any::<u64>()) {
        let params = random_params(&layout, seed);
        let back = checkpoint::decode(&checkpoint::encode(&params), "mem").unwrap();
        prop_assert_eq!(back, params);
    }
}
