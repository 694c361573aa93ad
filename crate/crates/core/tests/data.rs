mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slimfl::data::{
    class_entropy, dirichlet_partition, load_idx, parse_idx_images, parse_idx_labels,
    sample_batch, synth_dataset, write_idx, IdxImages,
};
use slimfl::rng::{stream_rng, Stream};
use slimfl::Error;

fn labels(n: usize, classes: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0..classes)).collect()
}

#[test]
fn fmnist_subset_loads() {
    let dir = common::repo_root().join("crates/core/data/fmnist");
    let train = load_idx(
        dir.join("train-images-idx3-ubyte"),
        dir.join("train-labels-idx1-ubyte"),
    )
    .unwrap();
    let test = load_idx(dir.join("t10k-images-idx3-ubyte"), dir.join("t10k-labels-idx1-ubyte")).unwrap();
    assert_eq!((train.len(), train.dim(), train.classes), (10_000, 784, 10));
    assert_eq!((test.len(), test.dim()), (2_000, 784));
    assert!(train.features.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
    assert!(train.histogram().iter().all(|&c| c > 500));
}

#[test]
fn idx_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let img = IdxImages { rows: 2, cols: 3, pixels: (0..18).map(|i| i * 14).collect() };
    let (ip, lp) = (dir.path().join("img"), dir.path().join("lab"));
    write_idx(&ip, &lp, &img, &[0, 2, 1]).unwrap();
    let ds = load_idx(&ip, &lp).unwrap();
    assert_eq!(ds.labels, vec![0, 2, 1]);
    assert_eq!(ds.classes, 3);
    assert_eq!(ds.features.get(1, 0), 84.0 / 255.0);
}

#[test]
fn idx_errors_name_the_field() {
    let field = |e: Error| match e {
        Error::Format { field, .. } => field,
        other => panic!("unexpected {other}"),
    };
    assert_eq!(field(parse_idx_images(&[0, 0, 8, 1, 0, 0, 0, 0], "x").unwrap_err()), "magic");
    assert_eq!(field(parse_idx_labels(&[0, 0, 8, 1], "y").unwrap_err()), "label count");
    let mut short = vec![0, 0, 8, 3];
    for w in [2u32, 2, 2] {
        short.extend_from_slice(&w.to_be_bytes());
    }
    short.extend_from_slice(&[1, 2, 3]);
    assert_eq!(field(parse_idx_images(&short, "z").unwrap_err()), "pixels");
    let mut labels = vec![0, 0, 8, 1, 0, 0, 0, 3];
    labels.extend_from_slice(&[1, 2]);
    assert_eq!(field(parse_idx_labels(&labels, "w").unwrap_err()), "labels");
}

#[test]
fn too_many_devices() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(matches!(
        dirichlet_partition(&[0, 1, 0], 2, 4, 1.0, &mut rng),
        Err(Error::TooManyDevices { devices: 4, samples: 3 })
    ));
    assert!(matches!(
        dirichlet_partition(&[0, 1, 0], 2, 2, 0.0, &mut rng),
        Err(Error::Config { .. })
    ));
    assert!(matches!(
        dirichlet_partition(&[0, 5], 2, 2, 1.0, &mut rng),
        Err(Error::InvalidLabel { label: 5, .. })
    ));
}

#[test]
fn partition_ignores_fading_stream() {
    let y = labels(2000, 10, 3);
    let seed = 99;
    let before = dirichlet_partition(&y, 10, 10, 0.5, &mut stream_rng(seed, Stream::Partition)).unwrap();
    let mut fading = stream_rng(seed, Stream::Fading { device: 0, round: 1 });
    let _: f64 = fading.random();
    let after = dirichlet_partition(&y, 10, 10, 0.5, &mut stream_rng(seed, Stream::Partition)).unwrap();
    assert_eq!(before, after);
    assert_ne!(
        slimfl::rng::stream_seed(seed, Stream::Partition),
        slimfl::rng::stream_seed(seed, Stream::Fading { device: 0, round: 1 })
    );
}

#[test]
fn small_alpha_gives_skewed_shards() {
    let y = labels(5000, 10, 4);
    let mean_entropy = |alpha: f64| {
        let mut total = 0.0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shards = dirichlet_partition(&y, 10, 10, alpha, &mut rng).unwrap();
            total += shards.iter().map(|s| class_entropy(&s.class_histogram)).sum::<f64>() / 10.0;
        }
        total / 20.0
    };
    let (low, high) = (mean_entropy(0.1), mean_entropy(10.0));
    assert!(low < high, "{low} vs {high}");
    assert!(high > 0.9 * 10f64.ln());
}

#[test]
fn entropy_values() {
    assert_eq!(class_entropy(&[5, 0, 0]), 0.0);
    assert!((class_entropy(&[3, 3, 3, 3]) - 4f64.ln()).abs() < 1e-15);
    assert_eq!(class_entropy(&[]), 0.0);
}

#[test]
fn synthetic_blobs_are_balanced() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ds = synth_dataset(4, 30, 6, 0.5, &mut rng);
    assert_eq!(ds.len(), 120);
    assert_eq!(ds.histogram(), vec![30; 4]);
    assert_eq!(ds.dim(), 6);
}

proptest! {
    #[test]
    fn partition_covers_every_sample_once(
        n in 20usize..400,
        classes in 1usize..8,
        k in 1usize..12,
        alpha in 0.01f64..20.0,
        seed in any::<u64>(),
    ) {
        let y = labels(n, classes, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shards = dirichlet_partition(&y, classes, k, alpha, &mut rng).unwrap();
        prop_assert_eq!(shards.len(), k);
        let mut all: Vec<usize> = shards.iter().flat_map(|s| s.indices.clone()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for (d, s) in shards.iter().enumerate() {
            prop_assert_eq!(s.device_id, d);
            prop_assert!(!s.indices.is_empty());
            prop_assert!(s.indices.windows(2).all(|w| w[0] < w[1]));
            let mut h = vec![0; classes];
            s.indices.iter().for_each(|&i| h[y[i]] += 1);
            prop_assert_eq!(&h, &s.class_histogram);
        }
    }

    #[test]
    fn batches_draw_without_replacement(pool_len in 1usize..200, bs in 1usize..100, seed in any::<u64>()) {
        let pool: Vec<usize> = (0..pool_len).map(|i| 3 * i).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = sample_batch(&pool, bs, &mut rng);
        prop_assert_eq!(b.len(), bs.min(pool_len));
        prop_assert!(b.iter().all(|i| pool.contains(i)));
        b.sort_unstable();
        b.dedup();
        prop_assert_eq!(b.len(), bs.min(pool_len));
    }
}
