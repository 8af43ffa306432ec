use std::sync::Arc;

use proptest::prelude::*;

use simchar::format::{read_complex_with, write_complex};
use simchar::report::{emit_report, parse_report, Format};
use simchar::ConvergenceRow;
use simchar_core::complex::{fixtures, perturbed_subdivide, BuildOptions};

fn float() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => any::<f64>(),
        2 => -1e3..1e3f64,
        1 => Just(f64::NAN),
        1 => Just(f64::INFINITY),
        1 => Just(f64::NEG_INFINITY),
        1 => Just(-0.0),
    ]
}

fn floats() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(float(), 0..4)
}

fn text() -> impl Strategy<Value = String> {
    "[a-z0-9_(),]{1,12}"
}

prop_compose! {
    fn row()(
        head in (text(), any::<i64>(), any::<i64>(), any::<i64>(), float(), float(), prop::collection::vec(any::<i64>(), 0..4)),
        lists in (floats(), floats(), floats()),
        scalars in (float(), float(), float(), float(), float(), float()),
        tail in (text(), float(), float(), text(), prop::option::of(float())),
    ) -> ConvergenceRow {
        let (manifold, level, seed, top_simplices, mesh, fullness, betti) = head;
        let (spectral_gaps, log_det_coexact, det_h) = lists;
        let (partition, log_partition, class_sum, eigen_error, character_error, fitted_c) = scalars;
        let (model_check, stokes, hodge_residual, config_hash, wall_time) = tail;
        ConvergenceRow {
            manifold, level, seed, top_simplices, mesh, fullness, betti,
            spectral_gaps, log_det_coexact, det_h,
            partition, log_partition, class_sum, eigen_error, character_error, fitted_c,
            model_check, stokes, hodge_residual, config_hash, wall_time,
        }
    }
}

fn same(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a.to_bits() == b.to_bits()
}

fn same_rows(a: &ConvergenceRow, b: &ConvergenceRow) -> bool {
    let lists = |x: &[f64], y: &[f64]| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same(*p, *q));
    a.manifold == b.manifold
        && (a.level, a.seed, a.top_simplices) == (b.level, b.seed, b.top_simplices)
        && a.betti == b.betti
        && (a.model_check.as_str(), a.config_hash.as_str()) == (b.model_check.as_str(), b.config_hash.as_str())
        && lists(&a.spectral_gaps, &b.spectral_gaps)
        && lists(&a.log_det_coexact, &b.log_det_coexact)
        && lists(&a.det_h, &b.det_h)
        && lists(
            &[
                a.mesh,
                a.fullness,
                a.partition,
                a.log_partition,
                a.class_sum,
                a.eigen_error,
                a.character_error,
                a.fitted_c,
                a.stokes,
                a.hodge_residual,
            ],
            &[
                b.mesh,
                b.fullness,
                b.partition,
                b.log_partition,
                b.class_sum,
                b.eigen_error,
                b.character_error,
                b.fitted_c,
                b.stokes,
                b.hodge_residual,
            ],
        )
        && a.wall_time.is_some() == b.wall_time.is_some()
        && lists(&a.wall_time.into_iter().collect::<Vec<_>>(), &b.wall_time.into_iter().collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reports_round_trip(rows in prop::collection::vec(row(), 0..5), timings in any::<bool>(), jsonl in any::<bool>()) {
        let rows: Vec<ConvergenceRow> = rows.into_iter().map(|mut r| {
            if !timings {
                r.wall_time = None;
            } else if r.wall_time.is_none() {
                r.wall_time = Some(0.5);
            }
            r
        }).collect();
        let format = if jsonl { Format::Jsonl } else { Format::Csv };
        let header = ConvergenceRow::header(timings);
        let mut bytes = Vec::new();
        emit_report(&rows, Some(&header), format, &mut bytes).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        let back: Vec<ConvergenceRow> = parse_report(&text, format).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert!(same_rows(a, b), "{a:?}\n{b:?}");
        }
        let mut again = Vec::new();
        emit_report(&back, Some(&header), format, &mut again).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn complexes_round_trip(which in 0usize..4, seed in any::<u64>(), scale in 0.05..0.45f64) {
        let base = Arc::new([fixtures::cycle(4), fixtures::torus7(), fixtures::tetrahedron_boundary(), fixtures::rp2_6()][which].clone());
        let x = perturbed_subdivide(&base, seed, scale).unwrap();
        let text = write_complex(&x);
        let options = BuildOptions { allow_non_orientable: !x.is_oriented(), ..BuildOptions::default() };
        let y = read_complex_with(&text, &options).unwrap();
        prop_assert_eq!(x.coords(), y.coords());
        prop_assert_eq!(x.f_vector(), y.f_vector());
        prop_assert_eq!(x.top_signs(), y.top_signs());
        prop_assert_eq!(write_complex(&y), text);
    }
}
