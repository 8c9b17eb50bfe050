use cosparse_core::eval::{label_accuracy, rmse};
use cosparse_core::field::{Grid, ScalarField, SemanticField};
use cosparse_core::manifold::{is_on_manifold, project_tangent, random_point, retract};
use cosparse_core::patches::{adjoint_scatter, extract, PatchLayout};
use cosparse_core::sparsity::{g_cost, ModalityWeights};
use cosparse_core::superres::hard_labels;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn field_pair() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (1usize..8, 1usize..8).prop_flat_map(|(w, h)| {
        (
            Just(w),
            Just(h),
            prop::collection::vec(-10.0f64..10.0, w * h),
            prop::collection::vec(-10.0f64..10.0, w * h),
        )
    })
}

proptest! {
    #[test]
    fn rmse_is_symmetric_and_scale_covariant((w, h, a, b) in field_pair(), c in -5.0f64..5.0) {
        let fa = ScalarField::new(w, h, a.clone()).unwrap();
        let fb = ScalarField::new(w, h, b.clone()).unwrap();
        let ab = rmse(&fa, &fb, None).unwrap();
        prop_assert!((ab - rmse(&fb, &fa, None).unwrap()).abs() <= 1e-12 * ab.max(1.0));
        let sa = ScalarField::new(w, h, a.iter().map(|v| c * v).collect()).unwrap();
        let sb = ScalarField::new(w, h, b.iter().map(|v| c * v).collect()).unwrap();
        let scaled = rmse(&sa, &sb, None).unwrap();
        prop_assert!((scaled - c.abs() * ab).abs() <= 1e-9 * ab.max(1.0));
    }

    #[test]
    fn argmax_survives_positive_rescaling(
        probs in prop::collection::vec(0.0f64..1.0, 12),
        scales in prop::collection::vec(0.01f64..1.0, 4),
    ) {
        let field = SemanticField::new(2, 2, 3, probs.clone()).unwrap();
        let scaled: Vec<f64> = probs.iter().enumerate().map(|(i, p)| p * scales[i / 3]).collect();
        let rescaled = SemanticField::new(2, 2, 3, scaled).unwrap();
        prop_assert_eq!(hard_labels(&field), hard_labels(&rescaled));
        prop_assert_eq!(label_accuracy(&rescaled, &field).unwrap().per_pixel, 1.0);
    }

    #[test]
    fn penalty_is_nonnegative_and_zero_only_at_zero(
        r in prop::collection::vec(-3.0f64..3.0, 15),
    ) {
        let w = ModalityWeights::default();
        let g = g_cost(&r[..5], &r[5..10], &r[10..], &w).unwrap();
        prop_assert!(g >= 0.0);
        let zero = [0.0; 5];
        prop_assert_eq!(g_cost(&zero, &zero, &zero, &w).unwrap(), 0.0);
        if r.iter().any(|v| v.abs() > 1e-3) {
            prop_assert!(g > 0.0);
        }
    }

    #[test]
    fn retraction_stays_on_manifold(seed in 0u64..1000, step in 0.0f64..20.0) {
        let p = random_point(12, 5, seed).unwrap();
        let g = DMatrix::from_fn(12, 5, |i, j| ((i * 31 + j * 17 + seed as usize) % 13) as f64 / 6.5 - 1.0);
        let t = project_tangent(&p, &g).unwrap();
        for i in 0..12 {
            prop_assert!(t.row(i).dot(&p.row(i)).abs() <= 1e-12);
        }
        match retract(&p, &t, step) {
            Ok(q) => prop_assert!(is_on_manifold(&q, 1e-12)),
            Err(e) => prop_assert!(false, "retraction of a tangent step failed: {e}"),
        }
    }

    #[test]
    fn patch_adjoint_identity(
        seed in 0u64..10_000,
        channels in 1usize..4,
        side in 1usize..5,
    ) {
        let (w, h) = (9, 8);
        let mut state = seed.wrapping_add(1);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let layout = PatchLayout::dense(w, h, side, channels).unwrap();
        let x: Vec<f64> = (0..w * h * channels).map(|_| next()).collect();
        let y = DMatrix::from_fn(layout.dim(), layout.len(), |_, _| next());
        let px = extract(Grid::new(w, h, channels, &x).unwrap(), &layout).unwrap();
        let lhs = px.data().dot(&y);
        let aty = adjoint_scatter(&y, &layout, w, h).unwrap();
        let rhs: f64 = x.iter().zip(&aty).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
    }
}
