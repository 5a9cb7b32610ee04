//! Floquet–Bloch fibers of doubly periodic fields, spectrum clouds, gap
//! detection and certificates for the abstract gap criterion.

mod certificate;
mod cloud;
mod periodic;

pub use certificate::{
    certificate_from_quasimodes, certify, CertificateEntry, GapCertificate, Hypothesis, Verdict, Violation,
    SMALLNESS_CAVEAT,
};
pub use cloud::{
    detect_gaps, detect_gaps_with, gap_count_scaling, spectrum_cloud, CloudOptions, GapCountTable, GapReport,
    SpectrumCloud, CLOUD_TOLERANCE, DEFAULT_BANDS, DEFAULT_THETA_COUNT,
};
pub use periodic::{bloch_grid, bloch_operator, canonical_theta, free_dispersion, PeriodicField};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Profile;
    use crate::spectral::{sparse_lowest_pairs, Grid1D, Grid2D};
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn torus(ns: usize, nt: usize) -> Grid2D {
        Grid2D::new(Grid1D::periodic(0.0, TAU, ns).unwrap(), Grid1D::periodic(0.0, TAU, nt).unwrap())
    }

    fn zero_field() -> PeriodicField {
        PeriodicField::new(0.0, Profile::constant(0.0)).unwrap()
    }

    #[test]
    fn field_free_torus_has_a_constant_ground_state() {
        let grid = torus(8, 10);
        let op = bloch_operator(&zero_field(), 1.0, [0.0, 0.0], &grid).unwrap();
        let pairs = sparse_lowest_pairs(&op, 1, -0.5, 1e-10 * op.norm_bound()).unwrap();
        assert!(pairs.values[0].abs() < 1e-10);
        let v = &pairs.vectors[0];
        let first = v[0];
        assert!(v.iter().all(|x| (x - first).norm() < 1e-8));
    }

    #[test]
    fn twisted_free_fiber_matches_plane_waves() {
        let grid = torus(9, 7);
        let h = 0.7;
        let theta = [1.1, 4.0];
        let op = bloch_operator(&zero_field(), h, theta, &grid).unwrap();
        let mut expected: Vec<f64> = (-4..=4)
            .flat_map(|a| (-3..=3).map(move |b| [a, b]))
            .map(|m| free_dispersion(h, &grid, [canonical_theta(theta[0]), canonical_theta(theta[1])], m))
            .collect();
        expected.sort_by(f64::total_cmp);
        let dense = op.dense_spectrum();
        for (x, y) in dense.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn fibers_are_periodic_in_theta_bit_for_bit() {
        let field = PeriodicField::sine();
        let grid = torus(6, 8);
        for &th in &[0.3, 1.7, 5.9] {
            let a = bloch_operator(&field, 0.3, [th, 0.4], &grid).unwrap();
            let b = bloch_operator(&field, 0.3, [th + TAU, 0.4], &grid).unwrap();
            let c = bloch_operator(&field, 0.3, [th, 0.4 + TAU], &grid).unwrap();
            assert!(a.entries().zip(b.entries()).all(|(x, y)| x == y));
            assert!(a.entries().zip(c.entries()).all(|(x, y)| x == y));
            assert_eq!(a.dense_spectrum(), b.dense_spectrum());
        }
    }

    #[test]
    fn nonzero_flux_is_a_gauge_error() {
        let field = PeriodicField::new(0.1, Profile::constant(1.0)).unwrap();
        assert!(matches!(
            bloch_operator(&field, 0.1, [0.0, 0.0], &torus(6, 6)),
            Err(crate::Error::Gauge(_))
        ));
        assert!((field.cell_flux() - 0.1 * TAU * TAU).abs() < 1e-12);
    }

    #[test]
    fn sine_field_and_gauge() {
        let field = PeriodicField::sine();
        assert!((field.b(0.3, 1.0) - 1f64.sin()).abs() < 1e-15);
        let d = 1e-5;
        let (s, t) = (0.4, 0.9);
        let a1 = |t: f64| field.a1_integral(s, s + d, t) / d;
        assert!(((a1(t + d) - a1(t - d)) / (2.0 * d) - field.b(s, t)).abs() < 1e-5);
        assert_eq!(field.omega_min().unwrap().0, 1.0);
        let json = r#"{"omega":{"type":"cosine-bump","base":1.0,"amplitude":0.5}}"#;
        let modulated = PeriodicField::from_json(json).unwrap();
        assert!((modulated.omega_min().unwrap().0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cloud_layout_and_free_dispersion() {
        let grid = torus(6, 6);
        let h = 0.5;
        let cloud = spectrum_cloud(&zero_field(), h, 4, 3, &grid).unwrap();
        assert_eq!(cloud.eigenvalues.iter().map(Vec::len).sum::<usize>(), 4 * 4 * 3);
        assert_eq!(cloud.theta_grid.len(), 16);
        for (theta, values) in cloud.theta_grid.iter().zip(&cloud.eigenvalues) {
            let mut all: Vec<f64> = (-3..=3)
                .flat_map(|a| (-3..=3).map(move |b| [a, b]))
                .map(|m| free_dispersion(h, &grid, *theta, m))
                .collect();
            all.sort_by(f64::total_cmp);
            for (x, y) in values.iter().zip(&all) {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
        assert!(spectrum_cloud(&zero_field(), h, 3, 3, &grid).is_err());
    }

    fn cloud_of(values: Vec<Vec<f64>>, n: usize) -> SpectrumCloud {
        SpectrumCloud::from_fibers(0.1, n, values).unwrap()
    }

    #[test]
    fn two_point_cloud_has_one_gap() {
        let mut cloud = cloud_of(vec![vec![1.0, 2.0, 10.0]], 1);
        cloud.lipschitz_bound = 0.0;
        let report = detect_gaps_with(&cloud, (0.5, 2.5), 0.01).unwrap();
        assert_eq!(report.count, 1);
        assert_eq!(report.gaps, vec![[1.0, 2.0]]);
        let inside = detect_gaps_with(&cloud, (1.2, 1.8), 0.01).unwrap();
        assert_eq!(inside.count, 0);
        assert!(detect_gaps_with(&cloud, (0.5, 11.0), 0.01).unwrap_err().is_parameter());
        let json = report.to_json().unwrap();
        assert!(json.contains("\"merge_tol\"") && json.contains("\"count\": 1"));
    }

    #[test]
    fn lipschitz_bound_covers_adjacent_drift() {
        let values: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64 * 0.01, 1.0 + (i % 4) as f64 * 0.02]).collect();
        let cloud = cloud_of(values, 4);
        let step = cloud.theta_step();
        let mut drift: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for (a, b) in [(i * 4 + j, ((i + 1) % 4) * 4 + j), (i * 4 + j, i * 4 + (j + 1) % 4)] {
                    for m in 0..2 {
                        drift = drift.max((cloud.eigenvalues[a][m] - cloud.eigenvalues[b][m]).abs());
                    }
                }
            }
        }
        assert!(drift <= cloud.lipschitz_bound / 2.0 * step + 1e-15);
    }

    proptest! {
        #[test]
        fn gaps_are_free_of_cloud_points_and_monotone(
            raw in proptest::collection::vec(0.0f64..10.0, 16 * 3),
            eta in 0.0f64..0.5,
            extra in 0.0f64..0.5,
        ) {
            let values: Vec<Vec<f64>> = raw.chunks(3).map(|c| c.to_vec()).collect();
            let mut cloud = cloud_of(values, 4);
            cloud.lipschitz_bound = 0.0;
            let ceiling = cloud.reliable_ceiling();
            prop_assume!(ceiling > 0.1);
            let window = (0.0, ceiling);
            let report = detect_gaps_with(&cloud, window, eta).unwrap();
            let points = cloud.sorted_values();
            for g in &report.gaps {
                prop_assert!(points.iter().all(|&p| !(p > g[0] && p < g[1])));
                prop_assert!(g[1] - g[0] > eta);
                prop_assert!(g[0] >= window.0 && g[1] <= window.1);
            }
            prop_assert!(report.gaps.windows(2).all(|w| w[0][1] <= w[1][0]));
            let wider = detect_gaps_with(&cloud, window, eta + extra).unwrap();
            prop_assert!(wider.count <= report.count);
            for g in &wider.gaps {
                prop_assert!(report.gaps.iter().any(|h| h[0] <= g[0] && g[1] <= h[1]));
            }
        }
    }

    fn sample_certificate() -> GapCertificate {
        let h: f64 = 0.01;
        let e = h.powf(4.0 / 3.0);
        GapCertificate {
            h,
            c: 0.1,
            m: 4.0 / 3.0,
            interval: [0.5 * e, 3.5 * e],
            entries: (1..=3)
                .map(|j| CertificateEntry {
                    mu: j as f64 * e,
                    residual_bound: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn zero_residual_certificate_is_valid() {
        let verdict = certify(&sample_certificate());
        assert!(verdict.valid, "{:?}", verdict.violations);
        assert_eq!(verdict.gaps_asserted, 2);
        assert!(verdict.caveat.contains("h_1"));
    }

    #[test]
    fn each_hypothesis_fails_under_its_violation() {
        let base = sample_certificate();
        let scale = base.scale();

        let mut residual = base.clone();
        residual.entries[1].residual_bound = scale;
        let v = certify(&residual);
        assert!(!v.valid && v.violations.len() == 1);
        assert_eq!(v.first_failure().unwrap().hypothesis, Hypothesis::Residual);
        assert_eq!(v.first_failure().unwrap().entry, Some(1));
        assert!(v.first_failure().unwrap().margin < 0.0);

        let mut spacing = base.clone();
        spacing.entries[2].mu = spacing.entries[1].mu + 0.5 * scale;
        let v = certify(&spacing);
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.first_failure().unwrap().hypothesis, Hypothesis::Spacing);
        assert_eq!(v.first_failure().unwrap().entry, Some(2));

        let mut lower = base.clone();
        lower.interval[0] = lower.entries[0].mu - 0.5 * scale;
        let v = certify(&lower);
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.first_failure().unwrap().hypothesis, Hypothesis::LowerDistance);

        let mut upper = base.clone();
        upper.interval[1] = upper.entries[2].mu + 0.5 * scale;
        let v = certify(&upper);
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.first_failure().unwrap().hypothesis, Hypothesis::UpperDistance);

        let mut outside = base;
        outside.entries[0].mu = 0.1 * outside.h.powf(4.0 / 3.0);
        assert!(certify(&outside).fails(Hypothesis::Structure));
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = sample_certificate();
        let json = cert.to_json().unwrap();
        assert!(json.contains("\"M\"") && json.contains("\"residual_bound\""));
        let back = GapCertificate::from_json(&json).unwrap();
        assert_eq!(back, cert);
        assert_eq!(certify(&back), certify(&cert));
    }

    #[test]
    fn count_scaling_rejects_low_windows() {
        let field = PeriodicField::sine();
        let err = gap_count_scaling(&field, 1, (0.5, 1.5), &[0.05], &CloudOptions::default()).unwrap_err();
        assert!(err.is_parameter());
    }
}
