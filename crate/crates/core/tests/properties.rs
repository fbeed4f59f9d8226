use num_complex::Complex64;
use proptest::prelude::*;
use sparsefar::config::{ExperimentConfig, Preset};
use sparsefar::forward::{MeasurementSet, ObservationSet, SourceQuadrature, WaveBand};
use sparsefar::geometry::{Amplitude, Region, SourceScene, Vec2};
use sparsefar::indicators::{
    sobel_normalized, subtract_mean, IndicatorField, IndicatorKind, MuSubtraction, SamplingGrid,
};
use sparsefar::io::{read_field_csv, write_field_csv, write_pgm};
use sparsefar::profile::JumpClass;
use sparsefar::recover::{corner_factor, vote_corners, DetectedLine, VoteParams};
use sparsefar::runner::{manifest, Artifact};

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

fn small_grid(p: usize, q: usize) -> SamplingGrid {
    SamplingGrid {
        x_lo: -1.0,
        x_hi: 1.0,
        y_lo: -1.0,
        y_hi: 1.0,
        p,
        q,
    }
}

fn rect_scene(lo: (f64, f64), size: (f64, f64), a: f64) -> SourceScene {
    SourceScene::single(
        Region::rect(Vec2::new(lo.0, lo.1), Vec2::new(lo.0 + size.0, lo.1 + size.1)),
        Amplitude::constant(a),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn far_field_is_linear_in_the_amplitude(
        a in -3.0..3.0f64, s in -3.0..3.0f64, theta in 0.0..6.3f64, k in 0.5..20.0f64,
    ) {
        let base = rect_scene((-0.4, -0.3), (0.9, 0.7), a);
        let q1 = SourceQuadrature::new(&base, 96).unwrap();
        let scaled = SourceScene::single(base.components[0].region.clone(), base.components[0].amplitude.scaled(s));
        let q2 = SourceQuadrature::new(&scaled, 96).unwrap();
        let x = Vec2::from_angle(theta);
        let (p1, m1) = q1.far_field_pair(x, k);
        let (p2, m2) = q2.far_field_pair(x, k);
        prop_assert!(close(p2, p1 * s, 1e-12));
        prop_assert!(close(m2, m1 * s, 1e-12));
    }

    #[test]
    fn real_sources_have_conjugate_symmetric_far_fields(
        a in 0.1..3.0f64, r in 0.2..1.0f64, theta in 0.0..6.3f64, k in 0.5..30.0f64,
    ) {
        let scene = SourceScene::single(Region::disk(Vec2::new(0.3, -0.2), r), Amplitude::constant(a));
        let q = SourceQuadrature::new(&scene, 96).unwrap();
        let (plus, minus) = q.far_field_pair(Vec2::from_angle(theta), k);
        prop_assert!(close(minus, plus.conj(), 1e-12));
    }

    #[test]
    fn translation_multiplies_by_a_phase(
        tx in -2.0..2.0f64, ty in -2.0..2.0f64, theta in 0.0..6.3f64, k in 0.5..20.0f64,
    ) {
        let scene = rect_scene((-0.5, -0.25), (1.0, 0.5), 1.0);
        let t = Vec2::new(tx, ty);
        let q0 = SourceQuadrature::new(&scene, 128).unwrap();
        let q1 = SourceQuadrature::new(&scene.translated(t), 128).unwrap();
        let x = Vec2::from_angle(theta);
        let (p0, m0) = q0.far_field_pair(x, k);
        let (p1, m1) = q1.far_field_pair(x, k);
        let phase = Complex64::from_polar(1.0, -k * x.dot(t));
        prop_assert!(close(p1, p0 * phase, 1e-9));
        prop_assert!(close(m1, m0 * phase.conj(), 1e-9));
    }

    #[test]
    fn concurrent_lines_give_one_exact_corner(
        px in -0.6..0.6f64, py in -0.6..0.6f64, n in 3usize..12, start in 0.0..1.0f64,
    ) {
        let grid = small_grid(201, 201);
        let p = Vec2::new(px, py);
        let lines: Vec<DetectedLine> = (0..n)
            .map(|l| {
                let xhat = Vec2::from_angle(start + l as f64 * std::f64::consts::PI / n as f64);
                DetectedLine {
                    direction: l,
                    xhat,
                    offset: xhat.dot(p),
                    class: JumpClass::Finite,
                    magnitude: 1.0,
                    jump: Complex64::new(1.0, 0.0),
                }
            })
            .collect();
        let (corners, warnings) = vote_corners(&lines, &grid, n, &VoteParams::default()).unwrap();
        prop_assert!(warnings.is_empty());
        prop_assert_eq!(corners.len(), 1);
        prop_assert_eq!(corners[0].votes, n);
        prop_assert!(corners[0].point.dist(p) < 1e-9);
    }

    #[test]
    fn corner_factor_ignores_the_sign_of_the_direction(
        t in 0.0..6.3f64, a1 in 0.0..6.3f64, gap in 0.1..3.0f64,
    ) {
        let (d1, d2) = (Vec2::from_angle(a1), Vec2::from_angle(a1 + gap));
        let x = Vec2::from_angle(t);
        let f = corner_factor(x, d1, d2);
        prop_assume!(f.is_finite() && f.abs() < 1e6);
        prop_assert!((corner_factor(-x, d1, d2) - f).abs() <= 1e-9 * (1.0 + f.abs()));
    }

    #[test]
    fn straight_boundary_has_no_corner_jump(t in 0.0..6.3f64, a in 0.0..6.3f64) {
        let d = Vec2::from_angle(a);
        let f = corner_factor(Vec2::from_angle(t), d, -d);
        prop_assume!(f.is_finite());
        prop_assert!(f.abs() <= 1e-9);
    }

    #[test]
    fn pgm_preserves_value_order(values in prop::collection::vec(-50.0..50.0f64, 12)) {
        let field = IndicatorField {
            grid: small_grid(4, 3),
            kind: IndicatorKind::Iminus,
            values: values.clone(),
            imag_residual: None,
        };
        let mut bytes = Vec::new();
        write_pgm(&field, &mut bytes).unwrap();
        let pixels = &bytes[bytes.len() - 12..];
        // image rows run from the largest q down
        let pixel = |i: usize| pixels[(2 - i / 4) * 4 + i % 4];
        for i in 0..12 {
            for j in 0..12 {
                if values[i] < values[j] {
                    prop_assert!(pixel(i) <= pixel(j));
                }
            }
        }
    }

    #[test]
    fn field_csv_round_trips(values in prop::collection::vec(prop::num::f64::NORMAL, 20)) {
        let field = IndicatorField {
            grid: small_grid(5, 4),
            kind: IndicatorKind::Iplus,
            values,
            imag_residual: None,
        };
        let mut text = Vec::new();
        write_field_csv(&field, &mut text).unwrap();
        let back = read_field_csv(text.as_slice(), field.grid, field.kind).unwrap();
        prop_assert_eq!(back.values, field.values);
    }

    #[test]
    fn subtracting_a_zero_mean_changes_nothing(
        vals in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 2 * 3 * 4),
    ) {
        let obs = ObservationSet::new(3, 2.0).unwrap();
        let mut ms = MeasurementSet::zeros(obs, WaveBand::new(2).unwrap());
        for (i, (re, im)) in vals.iter().enumerate() {
            ms.set(i / 8, (i / 4) % 2, i % 4, Complex64::new(*re, *im));
        }
        for mode in [MuSubtraction::Both, MuSubtraction::RealOnly] {
            let shifted = subtract_mean(&ms, 0.0, mode);
            prop_assert_eq!(shifted.values(), ms.values());
        }
    }

    #[test]
    fn sobel_output_is_normalized(
        vals in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 9 * 7),
    ) {
        let grid = small_grid(9, 7);
        let m: Vec<Complex64> = vals.iter().map(|(a, b)| Complex64::new(*a, *b)).collect();
        let out = sobel_normalized(&m, &grid);
        prop_assert!(out.iter().all(|v| (0.0..=1.0).contains(v)));
        for q in 0..7 {
            for p in 0..9 {
                if p == 0 || q == 0 || p == 8 || q == 6 {
                    prop_assert_eq!(out[grid.index(p, q)], 0.0);
                }
            }
        }
        let max = out.iter().cloned().fold(0.0, f64::max);
        prop_assert!(max == 0.0 || max == 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn manifest_records_every_setting(
        seed in any::<u64>(), l in 1usize..40, lambda in 1usize..40, delta in 0.0..1.0f64,
        preset in 0usize..4, nfiles in 0usize..5,
    ) {
        let mut c = ExperimentConfig::preset(Preset::ALL[preset]);
        c.seed = seed;
        c.l = Some(l);
        c.lambda = Some(lambda);
        c.delta = delta;
        let r = c.resolve().unwrap();
        let files: Vec<Artifact> = (0..nfiles)
            .map(|i| Artifact { path: format!("f{i}.csv"), bytes: vec![0; i] })
            .collect();
        let m = manifest(&r, &files);
        prop_assert_eq!(&m["preset"], Preset::ALL[preset].name());
        prop_assert_eq!(&m["L"], l);
        prop_assert_eq!(&m["Lambda"], lambda);
        prop_assert_eq!(&m["config"]["seed"], seed);
        prop_assert_eq!(m["config"]["delta"].as_f64(), Some(delta));
        prop_assert_eq!(&m["wavenumbers"]["count"], 2 * lambda);
        let listed = m["files"].as_array().unwrap();
        prop_assert_eq!(listed.len(), nfiles);
        for (f, a) in listed.iter().zip(&files) {
            prop_assert_eq!(&f["path"], a.path.as_str());
            prop_assert_eq!(&f["bytes"], a.bytes.len());
        }
        // the manifest must also be loadable as a config on its own
        let again = sparsefar::config::load_config(&m["config"].to_string()).unwrap();
        prop_assert_eq!(again, r.config);
    }
}
