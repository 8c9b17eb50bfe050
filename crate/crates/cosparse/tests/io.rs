use cosparse::pgm::{read_pgm, write_pgm};
use cosparse::tensor::{read_tensor, write_tensor, Payload, Tensor};
use cosparse::Error;
use cosparse_core::manifold::random_point;
use cosparse_core::{AnalysisOperator, Modality, ScalarField};
use proptest::prelude::*;

fn f32_row_norms(t: &Tensor) -> Vec<u32> {
    let Payload::F32(v) = t.payload() else { panic!("f32 payload") };
    let cols = t.dims()[1];
    v.chunks_exact(cols)
        .map(|row| row.iter().map(|x| x * x).sum::<f32>().sqrt().to_bits())
        .collect()
}

#[test]
fn operator_round_trip_keeps_row_norms() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("omega.csaf");
    let op = AnalysisOperator::new(Modality::Semantics, random_point(270, 25, 3).unwrap()).unwrap();
    let t = Tensor::from_operator(&op);
    write_tensor(&path, &t).unwrap();
    let back = read_tensor(&path).unwrap();
    assert_eq!(back.dims(), &[270, 25]);
    assert_eq!(f32_row_norms(&back), f32_row_norms(&t));
    let loaded = back.to_operator(Modality::Semantics).unwrap();
    assert!((loaded.matrix() - op.matrix()).amax() < 1e-6);
}

#[test]
fn off_manifold_operator_is_rejected_on_load() {
    let t = Tensor::f32(vec![2, 2], vec![1.0, 0.0, 0.0, 1.01]).unwrap();
    assert!(matches!(
        t.to_operator(Modality::Depth),
        Err(Error::Core(cosparse_core::Error::NotUnitNorm { row: 1, .. }))
    ));
}

#[test]
fn unwritable_path_is_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("x.csaf");
    let t = Tensor::f32(vec![1], vec![0.0]).unwrap();
    assert!(matches!(write_tensor(&path, &t), Err(Error::IoFailure { .. })));
    assert!(matches!(read_tensor(&path), Err(Error::IoFailure { .. })));
}

proptest! {
    #[test]
    fn tensor_round_trip_is_bit_exact(bits in prop::collection::vec(any::<u32>(), 25)) {
        let values: Vec<f32> = bits.iter().map(|&b| f32::from_bits(b)).map(|v| if v.is_finite() { v } else { 0.5 }).collect();
        let t = Tensor::f32(vec![5, 5], values.clone()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csaf");
        write_tensor(&path, &t).unwrap();
        let Payload::F32(back) = read_tensor(&path).unwrap().payload().clone() else { panic!("f32") };
        prop_assert!(back.iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn pgm_quantization_error_is_bounded(
        values in prop::collection::vec(0.0f64..=1.0, 12),
        wide in any::<bool>(),
    ) {
        let maxval: u16 = if wide { 65535 } else { 255 };
        let field = ScalarField::new(4, 3, values.clone()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.pgm");
        write_pgm(&path, &field, maxval).unwrap();
        let back = read_pgm(&path).unwrap();
        prop_assert_eq!((back.width(), back.height()), (4, 3));
        let bound = 1.0 / (2.0 * maxval as f64) + 1e-12;
        for (a, b) in back.values().iter().zip(&values) {
            prop_assert!((a - b).abs() <= bound);
        }
    }
}
