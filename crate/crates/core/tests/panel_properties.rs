use proptest::prelude::*;
use slcf::linalg::{symmetric_eigenvalues, Matrix};
use slcf::panel::{
    fd_matrix, first_stage_design, transform, vtilde_matrix, within_matrix, DesignOptions,
    IndividualBlock, PanelDataset, TransformKind,
};

fn kinds() -> impl Strategy<Value = TransformKind> {
    prop_oneof![
        Just(TransformKind::FirstDifference),
        Just(TransformKind::Within)
    ]
}

/// Panels with 3..8 individuals of 2..5 periods, one exogenous column and one instrument.
fn panels() -> impl Strategy<Value = PanelDataset<f64>> {
    prop::collection::vec(
        (2usize..6).prop_flat_map(|t| prop::collection::vec(-5.0f64..5.0, 4 * t)),
        3..8,
    )
    .prop_map(|raw| {
        let blocks = raw
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let t = v.len() / 4;
                IndividualBlock::new(
                    format!("{i}"),
                    v[..t].to_vec(),
                    v[t..2 * t].to_vec(),
                    Matrix::column_vector(&v[2 * t..3 * t]),
                    Matrix::column_vector(&v[3 * t..]),
                )
            })
            .collect();
        PanelDataset::new(blocks).unwrap()
    })
}

fn shift(data: &PanelDataset<f64>, c: &[f64]) -> PanelDataset<f64> {
    let blocks = data
        .individuals()
        .iter()
        .zip(c)
        .map(|(b, &c)| IndividualBlock {
            y: b.y.iter().map(|v| v + c).collect(),
            x1: b.x1.iter().map(|v| v - c).collect(),
            x_exog: b.x_exog.map(|v| v + 2.0 * c),
            z: b.z.map(|v| v + 3.0 * c),
            ..b.clone()
        })
        .collect();
    PanelDataset::new(blocks).unwrap()
}

proptest! {
    #[test]
    fn within_is_a_rank_deficient_projection(t in 2usize..9) {
        let w = within_matrix::<f64>(t).unwrap();
        prop_assert!(w.asymmetry() < 1e-15);
        prop_assert!(w.matmul(&w).unwrap().max_abs_diff(&w) < 1e-12);
        let mut eig = symmetric_eigenvalues(&w).unwrap();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert!(eig[0].abs() < 1e-10);
        prop_assert!(eig[1..].iter().all(|e| (e - 1.0).abs() < 1e-10));
    }

    #[test]
    fn fd_weighting_is_d_d_transpose(t in 2usize..9) {
        let d = fd_matrix::<f64>(t).unwrap();
        let ddt = d.matmul(&d.transpose()).unwrap();
        prop_assert!(vtilde_matrix::<f64>(TransformKind::FirstDifference, t).unwrap().max_abs_diff(&ddt) < 1e-12);
        prop_assert_eq!(vtilde_matrix::<f64>(TransformKind::Within, t).unwrap(), Matrix::identity(t));
    }

    #[test]
    fn individual_constants_vanish(data in panels(), kind in kinds(), seed in 0u64..1000) {
        let c: Vec<f64> = (0..data.n()).map(|i| ((i as u64 * 31 + seed) as f64).sin() * 4.0).collect();
        let a = transform(&data, kind).unwrap();
        let b = transform(&shift(&data, &c), kind).unwrap();
        for (x, y) in a.blocks.iter().zip(&b.blocks) {
            for (p, q) in x.ty.iter().zip(&y.ty).chain(x.tx1.iter().zip(&y.tx1)) {
                prop_assert!((p - q).abs() < 1e-12);
            }
            prop_assert!(x.tx_exog.max_abs_diff(&y.tx_exog) < 1e-12);
            prop_assert!(x.tz.max_abs_diff(&y.tz) < 1e-12);
        }
    }

    #[test]
    fn transform_is_linear(data in panels(), kind in kinds(), s in -3.0f64..3.0) {
        let scaled = data.map_blocks(|b| IndividualBlock {
            y: b.y.iter().zip(&b.x1).map(|(y, x)| s * y + x).collect(),
            ..b.clone()
        }).unwrap();
        let a = transform(&data, kind).unwrap();
        let b = transform(&scaled, kind).unwrap();
        for (x, y) in a.blocks.iter().zip(&b.blocks) {
            for r in 0..x.rows() {
                prop_assert!((y.ty[r] - (s * x.ty[r] + x.tx1[r])).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn block_rows_and_design_rows_agree(data in panels(), kind in kinds()) {
        let tp = transform(&data, kind).unwrap();
        let design = first_stage_design(&data, kind, DesignOptions::default()).unwrap();
        prop_assert_eq!(design.target.len(), tp.total_rows());
        prop_assert_eq!(design.features.rows(), tp.total_rows());
        for (i, b) in tp.blocks.iter().enumerate() {
            prop_assert_eq!(b.rows(), kind.output_rows(data.individuals()[i].periods()));
            for (k, row) in design.block_rows[i].clone().enumerate() {
                prop_assert_eq!(design.index[row], (i, k));
                prop_assert_eq!(design.target[row], b.tx1[k]);
            }
        }
    }
}
