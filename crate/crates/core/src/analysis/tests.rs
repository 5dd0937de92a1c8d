use super::*;

use alloc::vec;

use proptest::prelude::*;

use crate::exact::{canonical_picks, exact_affine_step, exact_for, exact_hat, exact_step, Regime};
use crate::signal::add_gaussian_noise;
use crate::Grid;

fn rp(alpha: f64, beta: f64) -> RegParams {
    RegParams::new(alpha, beta).unwrap()
}

fn step_spec() -> ShapeSpec {
    ShapeSpec::step(1.0, 1.0).unwrap()
}

fn hat_spec() -> ShapeSpec {
    ShapeSpec::hat(1.0, 1.0).unwrap()
}

fn data(spec: &ShapeSpec, n: usize) -> Signal {
    sample_shape(spec, spec.grid(n).unwrap()).unwrap()
}

fn segments_of(u: &Signal, f: &Signal) -> StructureDescription {
    let t = SegmentTolerances::for_data(f);
    segment_affine(u, t.slope_tol, t.jump_tol).unwrap()
}

fn tiles(s: &StructureDescription, g: &Grid) -> bool {
    let segs = &s.segments;
    segs[0].start == g.a()
        && segs[segs.len() - 1].end == g.b()
        && segs.windows(2).all(|w| w[0].end == w[1].start && w[0].start < w[0].end)
}

#[test]
fn np1j_sample_has_two_segments_and_one_jump() {
    let f = data(&step_spec(), 2000);
    let u = exact_step(1.0, 1.0, rp(0.1, 0.1)).unwrap().sample_u(*f.grid()).unwrap();
    let s = segments_of(&u, &f);
    assert_eq!(s.segments.len(), 2, "{s:?}");
    assert!(s.segments.iter().all(|seg| (seg.slope - 0.6).abs() < 1e-9));
    assert_eq!(s.jumps.len(), 1);
    assert!((s.jumps[0].location - 1.0).abs() < 1e-12);
    assert!((s.jumps[0].size - 0.2).abs() < 1e-9);
    assert!(s.kink_points.is_empty());
    assert!(tiles(&s, f.grid()));
}

#[test]
fn affine_signal_is_one_segment() {
    let g = Grid::new(-1.0, 3.0, 100).unwrap();
    let u = Signal::from_fn(g, |x| 0.3 - 2.0 * x).unwrap();
    let s = segment_affine(&u, 1e-3, 1e-2).unwrap();
    assert_eq!(s.segments.len(), 1);
    assert!(s.jumps.is_empty() && s.kink_points.is_empty());
    assert!((s.segments[0].slope + 2.0).abs() < 1e-12);
    assert!((s.segments[0].intercept - 0.3).abs() < 1e-12);
    assert!(tiles(&s, &g));
}

#[test]
fn cec_hat_has_plateau_slope_plateau_halves() {
    let f = data(&hat_spec(), 2000);
    let d = f.grid().delta();
    let u = exact_hat(1.0, 1.0, rp(0.05, 0.05)).unwrap().sample_u(*f.grid()).unwrap();
    let s = segments_of(&u, &f);
    // the middle plateau spans both halves
    let slopes: Vec<f64> = s.segments.iter().map(|seg| seg.slope).collect();
    assert_eq!(slopes.len(), 5, "{slopes:?}");
    for (got, want) in slopes.iter().zip([0.0, -1.0, 0.0, 1.0, 0.0]) {
        assert!((got - want).abs() < 1e-9, "{slopes:?}");
    }
    assert!(s.jumps.is_empty());
    let x1 = 0.1f64.sqrt();
    let expected = [x1, 1.0 - x1, 1.0 + x1, 2.0 - x1];
    assert_eq!(s.kink_points.len(), 4);
    for (k, e) in s.kink_points.iter().zip(expected) {
        assert!((k - e).abs() < d, "{k} vs {e}");
    }
}

#[test]
fn short_middle_piece_is_kept_as_a_segment() {
    // AEA with a middle piece about five cells wide
    let f = data(&hat_spec(), 512);
    let sol = exact_hat(1.0, 1.0, rp(0.08, 0.0536)).unwrap();
    let u = sol.sample_u(*f.grid()).unwrap();
    let s = segments_of(&u, &f);
    assert_eq!(s.segments.len(), 6, "{:?}", s.segments);
    assert_eq!(structure_label(ShapeKind::Hat, &f, &u).unwrap(), "AEA");
}

#[test]
fn kinks_of_a_sampled_polyline_are_recovered() {
    let g = Grid::new(0.0, 1.0, 300).unwrap();
    let u = Signal::from_fn(g, |x| if x < 0.4 { x } else if x < 0.7 { 0.4 - 2.0 * (x - 0.4) } else { -0.2 }).unwrap();
    let s = segment_affine(&u, 1e-3, 1e-2).unwrap();
    assert_eq!(s.segments.len(), 3);
    assert!((s.kink_points[0] - 0.4).abs() < 1e-9);
    assert!((s.kink_points[1] - 0.7).abs() < 1e-9);
}

#[test]
fn steps_below_the_threshold_do_not_split_a_segment() {
    let g = Grid::new(0.0, 1.0, 200).unwrap();
    let ramp = |step: f64| Signal::from_fn(g, |x| 0.5 * x + if x > 0.5 { step } else { 0.0 }).unwrap();
    let s = segment_affine(&ramp(0.008), 1e-3, 0.01).unwrap();
    assert_eq!(s.segments.len(), 1, "{s:?}");
    assert!(s.jumps.is_empty() && s.kink_points.is_empty());
    let s = segment_affine(&ramp(0.012), 1e-3, 0.01).unwrap();
    assert_eq!(s.segments.len(), 2);
    assert_eq!(s.jumps.len(), 1);
    assert!((s.jumps[0].size - 0.012).abs() < 1e-12);
}

#[test]
fn bad_tolerances_are_rejected() {
    let u = data(&step_spec(), 10);
    assert!(segment_affine(&u, 0.0, 1.0).is_err());
    assert!(segment_affine(&u, 1.0, f64::NAN).is_err());
}

#[test]
fn default_tolerances_scale_with_the_data() {
    let f = data(&step_spec(), 20);
    let t = SegmentTolerances::for_data(&f);
    assert!((t.slope_tol - 5e-4).abs() < 1e-18);
    assert!((t.jump_tol - 1e-2).abs() < 1e-18);
    let flat = Signal::zeros(*f.grid());
    assert!(SegmentTolerances::for_data(&flat).validated().is_ok());
}

#[test]
fn jump_inclusion_holds_for_exact_solutions() {
    let f = data(&step_spec(), 2000);
    let t = JumpInclusionTolerances::for_data(&f);
    let u = exact_step(1.0, 1.0, rp(0.1, 0.1)).unwrap().sample_u(*f.grid()).unwrap();
    assert!(check_jump_inclusion(&f, &u, t).unwrap());
    // u's one-sided values 0.4 and 0.6 lie inside f's 0 and 1
    let s = segments_of(&u, &f);
    let j = one_sided(&s)[0];
    assert!((j.1 - 0.4).abs() < 1e-9 && (j.2 - 0.6).abs() < 1e-9);

    let h = data(&hat_spec(), 2000);
    let th = JumpInclusionTolerances::for_data(&h);
    for (_, p) in canonical_picks(ShapeKind::Hat) {
        let u = exact_hat(1.0, 1.0, p).unwrap().sample_u(*h.grid()).unwrap();
        assert!(segments_of(&u, &h).jumps.is_empty());
        assert!(check_jump_inclusion(&h, &u, th).unwrap());
    }
}

#[test]
fn shifted_or_overshooting_jumps_violate_inclusion() {
    let f = data(&step_spec(), 400);
    let g = *f.grid();
    let t = JumpInclusionTolerances::for_data(&f);
    let sol = exact_step(1.0, 1.0, rp(0.1, 0.1)).unwrap();
    let shifted = Signal::from_fn(g, |x| sol.u.eval(x - 3.0 * g.delta())).unwrap();
    assert!(!check_jump_inclusion(&f, &shifted, t).unwrap());
    let overshoot = Signal::from_fn(g, |x| if x < 1.0 { -0.3 } else { 1.3 }).unwrap();
    assert!(!check_jump_inclusion(&f, &overshoot, t).unwrap());
    assert!(check_jump_inclusion(&f, &overshoot, JumpInclusionTolerances { value_tol: 0.31, ..t }).unwrap());
}

#[test]
fn exact_solutions_have_the_claimed_symmetries() {
    let sol = exact_step(1.0, 1.0, rp(0.1, 0.1)).unwrap();
    assert!(check_symmetry_poly(&sol.u, Symmetry::PointSymmetric(1.0)).unwrap() <= 1e-12);
    assert!(check_symmetry_poly(&sol.u, Symmetry::EvenAboutMid).unwrap() > 0.1);
    for (_, p) in canonical_picks(ShapeKind::Step) {
        let sol = exact_step(1.0, 1.0, p).unwrap();
        assert!(check_symmetry_poly(&sol.u, Symmetry::PointSymmetric(1.0)).unwrap() <= 1e-12, "{p:?}");
    }
    for (_, p) in canonical_picks(ShapeKind::Hat) {
        let sol = exact_hat(1.0, 1.0, p).unwrap();
        assert!(check_symmetry_poly(&sol.u, Symmetry::EvenAboutMid).unwrap() <= 1e-12, "{p:?}");
        let g = sol.shape.grid(101).unwrap();
        assert!(check_symmetry(&sol.sample_u(g).unwrap(), Symmetry::EvenAboutMid) <= 1e-12);
    }
}

#[test]
fn noise_is_not_symmetric() {
    let g = Grid::new(0.0, 2.0, 200).unwrap();
    let noise = add_gaussian_noise(&Signal::zeros(g), 0.1, 11).unwrap();
    let m = noise.max().max(-noise.min());
    let r = check_symmetry(&noise, Symmetry::EvenAboutMid);
    assert!(r > m && r <= 2.0 * m, "{r} vs {m}");
}

#[test]
fn moments_are_preserved() {
    let sol = exact_step(1.0, 1.0, rp(0.2, 0.05)).unwrap();
    let (m0, m1) = check_moment_preservation_poly(&sol.data(), &sol.u).unwrap();
    assert!(m0 <= 1e-12 && m1 <= 1e-12, "{m0} {m1}");
    for shape in [step_spec(), hat_spec()] {
        for (_, p) in canonical_picks(shape.kind) {
            let sol = exact_for(&shape, p).unwrap();
            let (m0, m1) = check_moment_preservation_poly(&sol.data(), &sol.u).unwrap();
            assert!(m0 <= 1e-12 && m1 <= 1e-12, "{p:?}: {m0} {m1}");
        }
    }

    let f = add_gaussian_noise(&data(&step_spec(), 300), 0.05, 3).unwrap();
    let s = solve_tgv2(&f, rp(0.05, 0.02), SolverOptions { tol: 1e-10, ..SolverOptions::default() }).unwrap();
    assert!(s.duality_gap <= 1e-8);
    let (m0, m1) = check_moment_preservation(&f, &s.u).unwrap();
    assert!(m0 <= 1e-5 && m1 <= 1e-5, "{m0} {m1}");

    let shifted = f.map(|_, v| v + 1.0).unwrap();
    let (m0, _) = check_moment_preservation(&f, &shifted).unwrap();
    assert!((m0 - 2.0).abs() < 1e-12);
}

#[test]
fn shift_equivariance_of_exact_and_numeric_pairs() {
    for (_, p) in canonical_picks(ShapeKind::Step) {
        let uf = exact_step(1.0, 1.0, p).unwrap().u;
        let ug = exact_affine_step(1.0, 1.0, 0.5, p).unwrap().u;
        assert!(check_shift_equivariance_poly(&uf, &ug, 0.5, 1.0).unwrap() <= 1e-12, "{p:?}");
    }

    let g = step_spec().grid(1000).unwrap();
    let f = data(&step_spec(), 1000);
    let gdata = sample_shape(&ShapeSpec::affine_step(1.0, 1.0, 0.5).unwrap(), g).unwrap();
    let p = rp(0.08, 0.01);
    let sf = solve_tgv2(&f, p, SolverOptions::default()).unwrap();
    let sg = solve_tgv2(&gdata, p, SolverOptions::default()).unwrap();
    assert!(check_shift_equivariance(&sf.u, &sg.u, 0.5, 1.0).unwrap() <= 5e-3);

    let dist = check_shift_equivariance(&sf.u, &sg.u, 0.0, 1.0).unwrap();
    assert_eq!(dist, sf.u.sup_distance(&sg.u).unwrap());
}

#[test]
fn even_data_does_not_gain_total_variation() {
    let h = data(&hat_spec(), 200);
    assert!(check_even_monotone_tv(&h, 0.3).unwrap());
    let d = h.grid().delta();
    let du: Vec<f64> = h.values().windows(2).map(|w| (w[1] - w[0]) / d).collect();
    let tv: f64 = du.iter().map(|x| x.abs()).sum();
    let tilted: f64 = du.iter().map(|x| (x + 0.3).abs()).sum();
    assert!(tv <= tilted);
    assert!(check_even_monotone_tv(&h, 0.0).unwrap());

    let step = data(&step_spec(), 200);
    assert!(matches!(check_even_monotone_tv(&step, 0.3), Err(Error::NotEven(_))));
}

#[test]
fn regime_map_checks_dimensions() {
    let labels = vec![vec!["A".to_string(); 3]; 2];
    assert!(RegimeMap::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0], labels.clone(), SweepMode::Analytic).is_ok());
    assert!(RegimeMap::new(vec![1.0, 2.0], vec![1.0, 2.0], labels, SweepMode::Analytic).is_err());
    assert!(sweep_regimes(&step_spec(), &[0.1, -0.1], &[0.1], SweepMode::Analytic).is_err());
}

/// Label from the step region list (L = h = 1), written out independently of
/// the classifier.
fn step_region(a: f64, b: f64) -> &'static str {
    if a < 0.125 && b >= 4.0 * a / 27.0 {
        "NP1J"
    } else if a >= 0.125 && b >= 1.0 / 54.0 {
        "NP1C"
    } else if b <= 32.0 * a * a / 27.0 && b < 1.0 / 54.0 {
        "NP2C"
    } else if b < 4.0 * a / 27.0 && b >= 36.0 * a * a / 27.0 {
        "NP2J"
    } else {
        INDETERMINATE
    }
}

/// Label from the hat region list (L = λ = 1).
fn hat_region(a: f64, b: f64) -> &'static str {
    let tail = a - 2.0 * a / 3.0 * (2.0 * a).sqrt();
    if a < 0.125 && b >= tail {
        "CEC"
    } else if b > 2.0 * a / 3.0 && b < tail {
        "AEA"
    } else if a >= 0.125 && b >= 1.0 / 12.0 {
        "C"
    } else {
        "A"
    }
}

#[test]
fn analytic_step_map_matches_the_region_list() {
    let alphas = linspace(0.01, 0.3, 20);
    let betas = linspace(0.001, 0.2, 20);
    let map = sweep_regimes(&step_spec(), &alphas, &betas, SweepMode::Analytic).unwrap();
    for (i, &b) in betas.iter().enumerate() {
        for (j, &a) in alphas.iter().enumerate() {
            assert_eq!(map.label(i, j), step_region(a, b), "({a}, {b})");
        }
    }
    let (i, j) = map.nearest_cell(0.125, 1.0 / 54.0);
    let near = map.neighbourhood_labels(i, j);
    for l in ["NP1C", "NP1J", "NP2C"] {
        assert!(near.iter().any(|x| x == l), "{near:?}");
    }
}

#[test]
fn analytic_hat_map_matches_the_region_list() {
    let alphas = linspace(0.01, 0.3, 20);
    let betas = linspace(0.005, 0.2, 20);
    let map = sweep_regimes(&hat_spec(), &alphas, &betas, SweepMode::Analytic).unwrap();
    for (i, &b) in betas.iter().enumerate() {
        for (j, &a) in alphas.iter().enumerate() {
            assert_eq!(map.label(i, j), hat_region(a, b), "({a}, {b})");
        }
    }
}

#[test]
fn numeric_labels_match_interior_picks() {
    let settings = NumericSettings::default();
    let picks = [
        (step_spec(), Regime::Step(crate::exact::RegimeF::NP1J), rp(0.1, 0.1)),
        (step_spec(), Regime::Step(crate::exact::RegimeF::NP1C), rp(0.2, 0.05)),
        (step_spec(), Regime::Step(crate::exact::RegimeF::NP2J), rp(0.08, 0.01)),
        (step_spec(), Regime::Step(crate::exact::RegimeF::NP2C), rp(0.2, 0.01)),
        (hat_spec(), Regime::Hat(crate::exact::RegimeH::CEC), rp(0.05, 0.05)),
        (hat_spec(), Regime::Hat(crate::exact::RegimeH::A), rp(0.2, 0.05)),
        (hat_spec(), Regime::Hat(crate::exact::RegimeH::C), rp(0.2, 0.15)),
    ];
    for (shape, regime, p) in picks {
        assert_eq!(classify(&shape, p).unwrap(), regime);
        assert_eq!(numeric_label(&shape, p, &settings).unwrap(), regime.label(), "{p:?}");
    }
}

#[test]
fn unconverged_solves_are_labelled_as_such() {
    let settings = NumericSettings {
        solver: SolverOptions { max_iters: 1, ..SolverOptions::default() },
        ..NumericSettings::default()
    };
    assert_eq!(numeric_label(&step_spec(), rp(0.01, 0.001), &settings).unwrap(), UNCONVERGED);
}

#[test]
fn agreement_skips_boundary_and_indeterminate_cells() {
    let alphas = vec![1.0, 2.0, 3.0];
    let betas = vec![1.0, 2.0, 3.0];
    let row = |a: &str, b: &str, c: &str| vec![a.to_string(), b.to_string(), c.to_string()];
    let analytic = RegimeMap::new(
        alphas.clone(),
        betas.clone(),
        vec![row("X", "X", "X"), row("X", "X", "Y"), row("X", "X", "X")],
        SweepMode::Analytic,
    )
    .unwrap();
    let numeric = RegimeMap::new(
        alphas,
        betas,
        vec![row("X", "Z", "X"), row("X", "X", "X"), row("X", "X", "X")],
        SweepMode::Numeric,
    )
    .unwrap();
    // every cell touching (1, 2) is excluded, leaving the three in column 0
    let a = agreement(&analytic, &numeric).unwrap();
    assert_eq!(a, Agreement { compared: 3, agreed: 3 });
    assert_eq!(analytic.adjacencies(), vec![("X".to_string(), "Y".to_string())]);
}

#[test]
fn linspace_hits_both_ends() {
    let v = linspace(0.01, 0.3, 20);
    assert_eq!(v.len(), 20);
    assert_eq!(v[0], 0.01);
    assert!((v[19] - 0.3).abs() < 1e-15);
    assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
}

/// Piecewise-affine samples with breaks at cell boundaries: `(u, segment
/// count)`. Consecutive slopes differ by at least `gap`, and jumps (when
/// present) are at least 0.5.
fn polyline(lengths: &[usize], slopes: &[f64], jumps: &[f64]) -> Signal {
    let n: usize = lengths.iter().sum();
    let g = Grid::new(0.0, 1.0, n).unwrap();
    let d = g.delta();
    let mut values = Vec::with_capacity(n);
    let mut level = 0.0;
    for (k, &len) in lengths.iter().enumerate() {
        if k > 0 {
            level += jumps[k - 1];
        }
        for _ in 0..len {
            values.push(level);
            level += slopes[k] * d;
        }
    }
    Signal::new(g, values).unwrap()
}

fn piece_strategy() -> impl Strategy<Value = (Vec<usize>, Vec<f64>, Vec<f64>)> {
    (1usize..6).prop_flat_map(|m| {
        (
            proptest::collection::vec(6usize..40, m),
            proptest::collection::vec((1usize..8, prop::bool::ANY), m),
            proptest::collection::vec(prop_oneof![Just(0.0), 0.5f64..2.0, -2.0f64..-0.5], m),
            -3.0f64..3.0,
        )
    })
    .prop_map(|(lengths, steps, jumps, first)| {
        // slopes differ by at least 0.5 from their predecessor
        let mut slopes = vec![first];
        for &(k, up) in &steps[1..] {
            let last = slopes[slopes.len() - 1];
            let delta = 0.5 * k as f64;
            slopes.push(if up { last + delta } else { last - delta });
        }
        (lengths, slopes, jumps)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn piecewise_affine_input_recovers_its_segment_count((lengths, slopes, jumps) in piece_strategy()) {
        let u = polyline(&lengths, &slopes, &jumps);
        let s = segment_affine(&u, 0.01, 0.1).unwrap();
        prop_assert_eq!(s.segments.len(), lengths.len(), "{:?}", s);
        let expected_jumps = jumps[..lengths.len() - 1].iter().filter(|&&j| j != 0.0).count();
        prop_assert_eq!(s.jumps.len(), expected_jumps);
        prop_assert!(tiles(&s, u.grid()));
        for (seg, want) in s.segments.iter().zip(&slopes) {
            prop_assert!((seg.slope - want).abs() < 1e-8);
        }
    }

    #[test]
    fn jump_inclusion_is_monotone_in_tolerance(seed in 0u64..500, shift in -0.4f64..0.4, tol in 0.0f64..0.3, extra in 0.0f64..0.5) {
        let f = data(&step_spec(), 200);
        let g = *f.grid();
        let u = Signal::from_fn(g, |x| if x < 1.0 { 0.2 + shift } else { 0.8 - shift }).unwrap();
        let u = add_gaussian_noise(&u, 0.001, seed).unwrap();
        let base = JumpInclusionTolerances::for_data(&f);
        let small = check_jump_inclusion(&f, &u, JumpInclusionTolerances { value_tol: tol, ..base }).unwrap();
        let large = check_jump_inclusion(&f, &u, JumpInclusionTolerances { value_tol: tol + extra, ..base }).unwrap();
        prop_assert!(!small || large);
    }

    #[test]
    fn even_signals_never_gain_variation_under_a_tilt(half in proptest::collection::vec(-5.0f64..5.0, 2..40), c in -10.0f64..10.0) {
        let mut values = half.clone();
        values.extend(half.iter().rev());
        let g = Grid::new(-1.0, 1.0, values.len()).unwrap();
        let u = Signal::new(g, values).unwrap();
        prop_assert!(check_even_monotone_tv(&u, c).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn numeric_labels_are_scale_invariant(pick in 0usize..7, t_up in prop::bool::ANY) {
        let t = if t_up { 2.0 } else { 0.5 };
        let picks = [
            (step_spec(), 0.1, 0.1),
            (step_spec(), 0.2, 0.05),
            (step_spec(), 0.08, 0.01),
            (step_spec(), 0.2, 0.01),
            (hat_spec(), 0.05, 0.05),
            (hat_spec(), 0.2, 0.05),
            (hat_spec(), 0.2, 0.15),
        ];
        let (shape, a, b) = picks[pick];
        let settings = NumericSettings { n: 256, ..NumericSettings::default() };
        let scaled = match shape.kind {
            ShapeKind::Hat => ShapeSpec::hat(1.0, t).unwrap(),
            _ => ShapeSpec::step(1.0, t).unwrap(),
        };
        let base = numeric_label(&shape, rp(a, b), &settings).unwrap();
        let other = numeric_label(&scaled, rp(t * a, t * b), &settings).unwrap();
        prop_assert_eq!(base, other);
        prop_assert!(base != UNCLASSIFIED);
    }
}
