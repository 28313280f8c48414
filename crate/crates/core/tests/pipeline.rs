//! Pipeline invariants that need real images (MNIST under
//! `$SYNCLASS_DATA` or `<workspace>/data`).

use std::path::PathBuf;

use synclass_core::datasets::{load_mnist_layout, Split};
use synclass_core::encode::{encode_dataset, prepare_image, DatasetKind, PipelineConfig, Setup};
use synclass_core::ldpc::{peg_construct, DegreeDistribution};
use synclass_core::transform::{scale_quant_table, CoeffMap, QuantTable, GRID};

fn data_root() -> PathBuf {
    std::env::var_os("SYNCLASS_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

#[test]
fn mnist_loads_with_canonical_shape() {
    let root = data_root().join("mnist");
    let train = load_mnist_layout(&root, Split::Train).unwrap_or_else(|e| {
        panic!(
            "MNIST not found under {} ({e}); see the README for dataset layout",
            root.display()
        )
    });
    assert_eq!(train.samples.len(), 60_000);
    assert_eq!(train.samples[0].rows, 28);
    assert_eq!(train.samples[0].cols, 28);
    assert_eq!(train.num_classes, 10);
    let val = load_mnist_layout(&root, Split::Validation).unwrap();
    assert_eq!(val.samples.len(), 10_000);
    assert!(val.samples.iter().all(|s| s.label < 10));
}

#[test]
fn dct_energy_concentrates_at_dc_on_natural_images() {
    let root = data_root().join("mnist");
    let train = load_mnist_layout(&root, Split::Train).unwrap();
    let table = scale_quant_table(&QuantTable::base_luminance(), 90).unwrap();
    // Mean |coefficient| per in-block position over 100 images.
    let mut sums = vec![0.0f64; 64];
    for sample in train.samples.iter().take(100) {
        let image = prepare_image(DatasetKind::Mnist, sample).unwrap();
        let map =
            CoeffMap::from_channel(&image.channels[0].real, &table, 90, true).unwrap();
        for (i, &c) in map.grid().iter().enumerate() {
            let (r, col) = (i / GRID, i % GRID);
            sums[(r % 8) * 8 + col % 8] += c.unsigned_abs() as f64;
        }
    }
    let dc = sums[0];
    for (pos, &ac) in sums.iter().enumerate().skip(1) {
        assert!(dc > ac, "position {pos} mean |coeff| {ac} exceeds DC {dc}");
    }
}

#[test]
fn setup2_encoding_is_pure() {
    let root = data_root().join("mnist");
    let mut train = load_mnist_layout(&root, Split::Train).unwrap();
    train.samples.truncate(32);
    let dist = DegreeDistribution::regular(3, 6).unwrap();
    let code = peg_construct(1024, 512, &dist, 1).unwrap();
    let config = PipelineConfig {
        setup: Setup::Setup2,
        qf: 50,
        ..PipelineConfig::default()
    };
    let a = encode_dataset(DatasetKind::Mnist, &train, &config, Some(&code)).unwrap();
    let b = encode_dataset(DatasetKind::Mnist, &train, &config, Some(&code)).unwrap();
    for (sa, sb) in a.samples.iter().zip(&b.samples) {
        assert_eq!(sa.sequence, sb.sequence);
    }
}
