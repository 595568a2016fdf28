use exobounds::dist::Cdf;
use exobounds::selection::{
    check_mean_independence, check_regression_dependence, check_t_independence, check_t_independence_general_x,
    check_u_independence, construct_extreme_propensity, count_direction_changes, is_monotone_nonconstant,
    roy_propensity, sawtooth, treatment_share, AffinePiece, ConditionalFamily, InducedCdf, PiecewiseAffine,
    PropensityScore, RoyModel, TSet, Verdict, DEFAULT_CHECK_TOL,
};
use proptest::prelude::*;

const TOL: f64 = DEFAULT_CHECK_TOL;

/// Sorted, well-separated knot positions on `[lo, hi]` from positive weights.
fn knots(lo: f64, hi: f64, weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut out = vec![lo];
    for w in &weights[..weights.len() - 1] {
        acc += w;
        out.push(lo + (hi - lo) * acc / total);
    }
    out.push(hi);
    out
}

/// A weakly monotone, nonconstant score on `[lo, hi]`, optionally with
/// constant unbounded tails.
fn monotone_score(lo: f64, hi: f64, weights: &[f64], raw: &[f64], increasing: bool, steps: bool, tails: bool) -> PropensityScore {
    let xs = knots(lo, hi, weights);
    let mut vals: Vec<f64> = raw.iter().take(xs.len()).copied().collect();
    vals.sort_by(f64::total_cmp);
    // force a visible rise
    vals[0] = (vals[0] - 0.05).max(0.0);
    let last = vals.len() - 1;
    vals[last] = (vals[last] + 0.05).min(1.0);
    if !increasing {
        vals.reverse();
    }
    let mut pieces: Vec<AffinePiece> = if steps {
        xs.windows(2)
            .zip(&vals)
            .map(|(w, &v)| AffinePiece::constant(w[0], w[1], v))
            .collect()
    } else {
        let pts: Vec<(f64, f64)> = xs.iter().copied().zip(vals.iter().copied()).collect();
        PiecewiseAffine::from_knots(&pts).unwrap().pieces().to_vec()
    };
    if steps {
        // the last step carries the extreme value so the score is nonconstant
        pieces.last_mut().unwrap().intercept = vals[last];
    }
    if tails {
        let first = pieces[0].left_value();
        let end = pieces[pieces.len() - 1].right_value();
        pieces.insert(0, AffinePiece::constant(f64::NEG_INFINITY, lo, first));
        pieces.push(AffinePiece::constant(hi, f64::INFINITY, end));
    }
    PropensityScore::new(pieces).unwrap()
}

fn interior_grid(dist: &Cdf) -> Vec<f64> {
    (1..20).map(|i| dist.quantile(i as f64 / 20.0).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn monotone_scores_fail_every_check(
        weights in prop::collection::vec(0.2f64..1.0, 2..6),
        raw in prop::collection::vec(0.0f64..1.0, 6),
        increasing in any::<bool>(),
        steps in any::<bool>(),
        which in 0usize..3,
    ) {
        let (dist, lo, hi, tails) = match which {
            0 => (Cdf::unit_uniform(), 0.0, 1.0, false),
            1 => (Cdf::uniform(1.0, 3.0).unwrap(), 1.0, 3.0, false),
            _ => (Cdf::normal(2.0, 1.0).unwrap(), 0.5, 3.5, true),
        };
        let p = monotone_score(lo, hi, &weights, &raw, increasing, steps, tails);
        prop_assert!(is_monotone_nonconstant(&p));
        for tau in interior_grid(&dist) {
            let r = check_t_independence(&p, &dist, &TSet::point(tau), TOL).unwrap();
            prop_assert_eq!(r.verdict, Verdict::Fail, "passed at tau = {}", tau);
        }
        let m = check_mean_independence(&p, &dist, TOL).unwrap();
        prop_assert_eq!(m.verdict, Verdict::Fail);
    }
}

/// On `[lo, hi)`, a continuous piecewise-linear shape with mean `share`
/// under the uniform distribution.
fn segment_with_mean(lo: f64, hi: f64, raw: &[f64], share: f64) -> Vec<AffinePiece> {
    let n = raw.len();
    let xs: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect();
    // trapezoid mean of the interpolant is exact
    let mean = raw.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() / (n - 1) as f64;
    let dev: Vec<f64> = raw.iter().map(|v| v - mean).collect();
    let room = dev
        .iter()
        .map(|&d| if d > 0.0 { (1.0 - share) / d } else if d < 0.0 { share / -d } else { f64::INFINITY })
        .fold(1.0, f64::min);
    let pts: Vec<(f64, f64)> = xs.iter().zip(&dev).map(|(&x, &d)| (x, share + room * d)).collect();
    PiecewiseAffine::from_knots(&pts).unwrap().pieces().to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn t_independent_scores_oscillate(
        cuts in prop::collection::vec(0.05f64..0.95, 1..6),
        shapes in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3..6), 7),
        share in 0.2f64..0.8,
    ) {
        let mut ts = cuts.clone();
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() < 0.02);
        let mut ends = vec![0.0];
        ends.extend(&ts);
        ends.push(1.0);
        let mut pieces = Vec::new();
        for (k, w) in ends.windows(2).enumerate() {
            let mut raw = shapes[k].clone();
            // guarantee the shape is not flat
            raw[0] = 0.0;
            raw[1] = 1.0;
            pieces.extend(segment_with_mean(w[0], w[1], &raw, share));
        }
        let p = PropensityScore::new(pieces).unwrap();
        let dist = Cdf::unit_uniform();
        prop_assert!((treatment_share(&p, &dist).unwrap() - share).abs() < 1e-12);
        let r = check_t_independence(&p, &dist, &TSet::Points(ts.clone()), TOL).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
        prop_assert!(count_direction_changes(&p) >= ts.len(), "K = {} < |T| = {}", count_direction_changes(&p), ts.len());
    }

    #[test]
    fn extreme_scores_pass_and_hit_both_bounds(
        a in 0.05f64..0.6,
        len in 0.1f64..0.35,
        share in 0.1f64..0.9,
    ) {
        let dist = Cdf::unit_uniform();
        let b = a + len;
        let p = construct_extreme_propensity(&dist, (a, b), share).unwrap();
        prop_assert!((treatment_share(&p, &dist).unwrap() - share).abs() < 1e-12);
        let outside: Vec<f64> = (0..=20)
            .map(|i| i as f64 / 20.0)
            .filter(|t| *t <= a || *t >= b)
            .chain([a, b])
            .collect();
        let r = check_t_independence(&p, &dist, &TSet::Points(outside), TOL).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
        let ones: f64 = p.pieces().iter().filter(|q| q.slope == 0.0 && q.intercept == 1.0).map(|q| q.hi - q.lo).sum();
        let zeros: f64 = p.pieces().iter().filter(|q| q.slope == 0.0 && q.intercept == 0.0).map(|q| q.hi - q.lo).sum();
        prop_assert!(ones > 0.0 && zeros > 0.0);
        // the threshold splits the gap in the ratio share : 1 - share
        prop_assert!((ones - share * len).abs() < 1e-12);
    }

    #[test]
    fn constant_scores_pass_everything(share in 0.01f64..0.99, t in 0.01f64..0.99) {
        let dist = Cdf::unit_uniform();
        let p = PropensityScore::constant(share, 0.0, 1.0).unwrap();
        prop_assert!(check_t_independence(&p, &dist, &TSet::point(t), TOL).unwrap().passed());
        prop_assert!(check_t_independence(&p, &dist, &TSet::interval(0.0, 1.0), TOL).unwrap().passed());
        prop_assert!(check_u_independence(&p, &dist, 0.0, 1.0, TOL).unwrap().passed());
        prop_assert!(check_mean_independence(&p, &dist, TOL).unwrap().passed());
        prop_assert_eq!(count_direction_changes(&p), 0);
        prop_assert!(!is_monotone_nonconstant(&p));
    }

    #[test]
    fn binary_reduction_matches_binary_check(
        raw in prop::collection::vec(0.0f64..1.0, 3..6),
        t in 0.1f64..0.9,
    ) {
        let dist = Cdf::unit_uniform();
        let pts: Vec<(f64, f64)> = raw.iter().enumerate().map(|(i, &v)| (i as f64 / (raw.len() - 1) as f64, v)).collect();
        let p = PropensityScore::from_function(PiecewiseAffine::from_knots(&pts).unwrap()).unwrap();
        let direct = check_t_independence(&p, &dist, &TSet::point(t), TOL).unwrap();
        let reduced = check_t_independence_general_x(|_| Ok(p.clone()), &[0.0], &dist, &TSet::point(t), TOL).unwrap();
        prop_assert_eq!(direct.verdict, reduced.verdict);
        prop_assert_eq!(direct.max_gap, reduced.max_gap);
        prop_assert_eq!(reduced.failing_x.is_empty(), direct.passed());
    }
}

#[test]
fn sawtooth_is_median_but_not_mean_independent() {
    let dist = Cdf::unit_uniform();
    let p = sawtooth();
    assert!(check_t_independence(&p, &dist, &TSet::point(0.5), TOL).unwrap().passed());
    let m = check_mean_independence(&p, &dist, TOL).unwrap();
    assert_eq!(m.verdict, Verdict::Fail);
    // E(Y p(Y)) / E(Y) = (7/24) / (1/2)
    assert!((m.max_gap - (7.0 / 12.0 - 0.5)).abs() < 1e-12);
    let treated = InducedCdf::new(&p, &dist, 1).unwrap();
    assert!((treated.mean() - 7.0 / 12.0).abs() < 1e-12);
    assert!((treated.evaluate(0.5) - 0.5).abs() < 1e-12);
    assert_eq!(count_direction_changes(&p), 1);
}

#[test]
fn direction_change_examples() {
    let tent = PropensityScore::new(vec![
        AffinePiece::through(0.0, 0.0, 0.25, 1.0),
        AffinePiece::through(0.25, 1.0, 0.5, 0.0),
        AffinePiece::through(0.5, 0.0, 0.75, 1.0),
        AffinePiece::through(0.75, 1.0, 1.0, 0.0),
    ])
    .unwrap();
    assert_eq!(count_direction_changes(&tent), 3);
    let double = PropensityScore::new(vec![
        AffinePiece::through(0.0, 0.0, 0.25, 1.0),
        AffinePiece::through(0.25, 0.0, 0.75, 1.0),
        AffinePiece::through(0.75, 0.0, 1.0, 1.0),
    ])
    .unwrap();
    let dist = Cdf::unit_uniform();
    assert!(check_t_independence(&double, &dist, &TSet::Points(vec![0.25, 0.75]), TOL).unwrap().passed());
    assert_eq!(count_direction_changes(&double), 2);
    // a removable discontinuity is not a direction change
    let split = PropensityScore::new(vec![
        AffinePiece::through(0.0, 0.2, 0.5, 0.5),
        AffinePiece::through(0.5, 0.5, 1.0, 0.8),
    ])
    .unwrap();
    assert!(is_monotone_nonconstant(&split));
}

#[test]
fn three_valued_treatment_reports_failing_threshold() {
    let dist = Cdf::unit_uniform();
    let above0 = PropensityScore::new(vec![
        AffinePiece::through(0.0, 0.25, 0.5, 0.75),
        AffinePiece::through(0.5, 0.25, 1.0, 0.75),
    ])
    .unwrap();
    let above1 = PropensityScore::new(vec![AffinePiece::through(0.0, 0.0, 1.0, 0.25)]).unwrap();
    let survival = |x: f64| Ok(if x < 0.5 { above0.clone() } else { above1.clone() });
    let r = check_t_independence_general_x(survival, &[0.0, 1.0], &dist, &TSet::point(0.5), TOL).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.failing_x, vec![1.0]);
}

#[test]
fn regression_dependence() {
    let u_grid: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    let x_grid: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.2).collect();
    let shifted = |shift: &dyn Fn(f64) -> f64| {
        let cdfs: Vec<Cdf> = u_grid.iter().map(|&u| Cdf::normal(shift(u), 1.0).unwrap()).collect();
        ConditionalFamily::from_cdfs(u_grid.clone(), x_grid.clone(), &cdfs).unwrap()
    };
    assert!(check_regression_dependence(&shifted(&|u| 2.0 * u)));
    assert!(check_regression_dependence(&shifted(&|u| -u)));
    let wavy = shifted(&|u| (4.0 * std::f64::consts::PI * u).sin());
    assert!(!check_regression_dependence(&wavy));
}

#[test]
fn roy_selection_on_gains() {
    // μ(y) = min(y - α, β - y): gains rise then fall in the baseline outcome
    let (alpha, beta) = (-1.0, 1.0);
    let mu = PiecewiseAffine::new(vec![
        AffinePiece { lo: f64::NEG_INFINITY, hi: 0.0, slope: 1.0, intercept: -alpha },
        AffinePiece { lo: 0.0, hi: f64::INFINITY, slope: -1.0, intercept: beta },
    ])
    .unwrap();
    let model = RoyModel::new(mu, Cdf::standard_normal()).unwrap();
    let p = roy_propensity(&model).unwrap();
    assert_eq!(count_direction_changes(&p), 1);
    assert!(!is_monotone_nonconstant(&p));
    let dist = Cdf::standard_normal();
    let share = treatment_share(&p, &dist).unwrap();
    assert!(share > 0.0 && share < 1.0);
}

#[test]
fn score_json_round_trip() {
    let p = sawtooth();
    let back = PropensityScore::from_json(&p.to_json().unwrap()).unwrap();
    for i in 0..=100 {
        let y = i as f64 / 100.0;
        assert!((p.evaluate(y).unwrap() - back.evaluate(y).unwrap()).abs() < 1e-12);
    }
}
