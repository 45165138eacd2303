use num_traits::{Signed, Zero};
use rand::Rng;

use shadow_simplex::geometry::local_delta;
use shadow_simplex::harness::{
    count_crossings, crossings_shifted, cube, diameter_path, fan_width_sq, pyramid, random, run_experiment,
    simplex, unit_square, ExperimentConfig, ExperimentKind, NormalFan,
};
use shadow_simplex::numeric::{dot, int, pow2, sub, Rational};
use shadow_simplex::sampler::{rationalize, sample_conditioned, sample_exponential, trial_rng};
use shadow_simplex::{Polyhedron, Vector};

/// Counts optimal-vertex changes along `[p, q]` by sorting every parameter at
/// which some pair of vertices ties and probing between consecutive ones.
fn sweep_changes(fan: &NormalFan, p: &[Rational], q: &[Rational]) -> usize {
    let verts: Vec<&Vector> = fan.vertices.iter().map(|v| &v.point).collect();
    let at = |t: &Rational| -> Vector { p.iter().zip(q).map(|(a, b)| a + (b - a) * t).collect() };
    let mut ts = vec![Rational::zero(), Rational::from_integer(1.into())];
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            let e = sub(verts[i], verts[j]);
            let (f0, f1) = (dot(p, &e), dot(q, &e));
            if f0 != f1 {
                let t = &f0 / (&f0 - &f1);
                if t.is_positive() && t < Rational::from_integer(1.into()) {
                    ts.push(t);
                }
            }
        }
    }
    ts.sort();
    ts.dedup();
    let argmax = |c: &Vector| -> usize {
        (0..verts.len())
            .max_by(|&a, &b| dot(c, verts[a]).cmp(&dot(c, verts[b])))
            .unwrap()
    };
    let owners: Vec<usize> = ts
        .windows(2)
        .map(|w| argmax(&at(&((&w[0] + &w[1]) / int(2)))))
        .collect();
    owners.windows(2).filter(|w| w[0] != w[1]).count()
}

fn random_point(n: usize, rng: &mut impl Rng) -> Vector {
    (0..n)
        .map(|_| Rational::new(rng.random_range(-40..=40).into(), rng.random_range(1..=7).into()))
        .collect()
}

#[test]
fn crossing_counter_matches_sweep() {
    let mut rng = trial_rng(11, 0);
    let mut polys: Vec<Polyhedron> = vec![unit_square(), cube(3), simplex(3), pyramid()];
    polys.extend((0..6).map(|_| random::bounded_polytope(3, 7, &mut rng)));
    let mut compared = 0;
    for p in polys {
        let fan = NormalFan::new(&p).unwrap();
        for _ in 0..40 {
            let a = random_point(p.dim(), &mut rng);
            let b = random_point(p.dim(), &mut rng);
            if let Some(k) = count_crossings(&fan, &a, &b) {
                assert_eq!(k, sweep_changes(&fan, &a, &b), "segment {a:?} -> {b:?}");
                compared += 1;
            }
        }
    }
    assert!(compared > 300);
}

#[test]
fn sampled_segments_match_sweep() {
    let p = cube(3);
    let fan = NormalFan::new(&p).unwrap();
    let d = vec![int(2), int(0), int(0)];
    for t in 0..200 {
        let mut rng = trial_rng(12, t);
        let x = sample_exponential(3, &mut rng).rationalize(&pow2(64));
        let q: Vector = x.iter().zip(&d).map(|(a, b)| a + b).collect();
        let k = count_crossings(&fan, &x, &q).expect("generic segment");
        assert_eq!(k, sweep_changes(&fan, &x, &q));
    }
}

#[test]
fn experiments_reproduce_bit_for_bit() {
    let p = cube(3);
    for kind in [
        ExperimentKind::Diameter,
        ExperimentKind::CrossingsShifted,
        ExperimentKind::CrossingsScaled,
        ExperimentKind::Phase2Stats,
    ] {
        let mut cfg = ExperimentConfig::new(kind, 24, 77);
        cfg.d = Some(vec![int(1), int(1), int(0)]);
        let a = run_experiment(&p, &cfg).unwrap();
        let b = run_experiment(&p, &cfg).unwrap();
        assert_eq!(a.summary, b.summary, "{kind:?}");
        assert_eq!(a.csv, b.csv);
        assert_eq!(a.csv.lines().count(), 25);
        assert!(a.pass, "{kind:?}: {}", a.summary);
    }
}

#[test]
fn shifted_report_counts_both_readings() {
    let fan = NormalFan::new(&unit_square()).unwrap();
    let c = vec![int(0), int(0)];
    let d = vec![int(2), int(0)];
    let r = crossings_shifted(&fan, &c, &d, &Rational::new(1.into(), 2.into()), 500, 3).unwrap();
    assert!((r.raw_mean - 2.0 * r.mean).abs() < 1e-12);
    assert!(r.pass());
}

#[test]
fn diameter_paths_on_random_polytopes_are_valid() {
    let mut rng = trial_rng(13, 0);
    for _ in 0..8 {
        let p = random::bounded_polytope(3, 7, &mut rng);
        let fan = NormalFan::new(&p).unwrap();
        let tau_sq = fan_width_sq(&p, &fan);
        let u = rng.random_range(0..fan.vertices.len());
        let v = fan.farthest_from(u);
        let (b1, b2) = (fan.vertices[u].bases[0].clone(), fan.vertices[v].bases[0].clone());
        let path = diameter_path(&p, &b1, &b2, &tau_sq, &mut rng).unwrap();
        assert!(path.is_valid(&p, &fan, &b1, &b2));
        for w in path.bases.windows(2) {
            assert_eq!(w[0].overlap(&w[1]), p.dim() - 1);
        }
    }
}

#[test]
fn fan_width_is_a_positive_fraction() {
    let mut rng = trial_rng(14, 0);
    for _ in 0..5 {
        let p = random::bounded_polytope(2, 6, &mut rng);
        let fan = NormalFan::new(&p).unwrap();
        let tau_sq = fan_width_sq(&p, &fan);
        assert!(tau_sq.is_positive() && tau_sq <= int(1));
        assert!(local_delta(&p).unwrap().is_positive());
    }
}

/// Regularized lower incomplete gamma P(3, x) by composite Simpson's rule.
fn gamma3_cdf(x: f64) -> f64 {
    let f = |t: f64| t * t * (-t).exp() / 2.0;
    let steps = 2000;
    let h = x / steps as f64;
    let mut s = f(0.0) + f(x);
    for i in 1..steps {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn conditioned_acceptance_rate_matches_gamma_cdf() {
    let mut rng = trial_rng(15, 0);
    let trials = 100_000;
    let attempts: usize = (0..trials)
        .map(|_| sample_conditioned(3, &mut rng, 6.0).unwrap().attempts as usize)
        .sum();
    let rate = trials as f64 / attempts as f64;
    let expected = gamma3_cdf(6.0);
    let sd = (expected * (1.0 - expected) / attempts as f64).sqrt();
    assert!((rate - expected).abs() < 4.0 * sd, "rate {rate} vs {expected}");
    for n in [2usize, 5, 10] {
        let attempts: usize = (0..trials)
            .map(|_| sample_conditioned(n, &mut rng, 2.0 * n as f64).unwrap().attempts as usize)
            .sum();
        assert!(trials as f64 / attempts as f64 >= 0.5);
    }
}

#[test]
fn rationalization_error_is_bounded() {
    let mut rng = trial_rng(16, 0);
    let denom = pow2(32);
    for n in [1usize, 3, 8] {
        for _ in 0..200 {
            let x = sample_exponential(n, &mut rng).x;
            let r = rationalize(&x, &denom);
            let err: f64 = x
                .iter()
                .zip(&r)
                .map(|(a, b)| (a - shadow_simplex::numeric::to_f64(b)).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(err <= (n as f64).sqrt() / 2f64.powi(32) + 1e-15);
        }
    }
}
