//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so every line is printed even
//! when a criterion fails. `cargo test --test acceptance -- 4 6` runs a subset.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;

use shadow_simplex::bounding::{bound_global, bound_local};
use shadow_simplex::feasibility::{phase1_global_delta, phase1_subdeterminant};
use shadow_simplex::geometry::{
    delta_from_subdeterminants, global_delta, local_delta, matching_cycle_checks, matching_width_certificate,
    MatchingInstance,
};
use shadow_simplex::harness::{
    brute_force_optimize, crossings_scaled, crossings_shifted, cube, diameter_path, fan_width_sq, pyramid, random,
    unit_square, CrossingReport, NormalFan,
};
use shadow_simplex::numeric::{dot, int, pow2, rational_from_f64, vec_i64, Rational};
use shadow_simplex::optimize::{initial_objective, phase2_optimize};
use shadow_simplex::pivot::shadow_simplex;
use shadow_simplex::sampler::{sample_conditioned, sample_exponential, trial_rng, Sampler};
use shadow_simplex::{Basis, Matrix, Polyhedron, Vector};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed.as_secs_f64() < limit_s as f64
}

fn random_objective(n: usize, rng: &mut impl Rng) -> Vector {
    loop {
        let d: Vector = (0..n).map(|_| int(rng.random_range(-5..=5))).collect();
        if d.iter().any(|x| !x.is_zero()) {
            return d;
        }
    }
}

fn rational_sample(n: usize, rng: &mut impl Rng) -> Vector {
    sample_exponential(n, rng).rationalize(&pow2(64))
}

/// Vertex set by direct subset enumeration with a linear solve.
fn vertex_set(p: &Polyhedron) -> BTreeSet<Vector> {
    let n = p.dim();
    let mut out = BTreeSet::new();
    for rows in (0..p.num_rows()).combinations(n) {
        let sub = Matrix::from_rows(rows.iter().map(|&i| p.row(i).to_vec()).collect()).unwrap();
        let rhs: Vector = rows.iter().map(|&i| p.rhs()[i].clone()).collect();
        if let Ok(x) = shadow_simplex::numeric::solve_square(&sub, &rhs) {
            if (0..p.num_rows()).all(|i| dot(p.row(i), &x) <= p.rhs()[i]) {
                out.insert(x);
            }
        }
    }
    out
}

/// Largest absolute subdeterminant of any size.
fn max_subdeterminant(a: &Matrix) -> BigInt {
    let mut best = BigInt::zero();
    for k in 1..=a.cols().min(a.rows()) {
        for rows in (0..a.rows()).combinations(k) {
            for cols in (0..a.cols()).combinations(k) {
                let sub = Matrix::from_rows(
                    rows.iter()
                        .map(|&i| cols.iter().map(|&j| a.row(i)[j].clone()).collect())
                        .collect(),
                )
                .unwrap();
                let d = sub.determinant().unwrap().abs().to_integer();
                best = best.max(d);
            }
        }
    }
    best
}

fn c1_solver_correctness() -> Verdict {
    let started = Instant::now();
    let mut rng = trial_rng(101, 0);
    let mut wrong = Vec::new();
    for t in 0..200 {
        let n = 2 + t % 2;
        let m = rng.random_range(n + 2..=10);
        let p = random::bounded_polytope(n, m, &mut rng);
        let start = p.feasible_bases()[0].0.clone();
        let d = random_objective(n, &mut rng);
        let delta_sq = local_delta(&p).unwrap();
        let best = brute_force_optimize(&p, &d).unwrap().value;
        match phase2_optimize(&p, &delta_sq, &start, &d, &mut rng) {
            Ok(out) => {
                let got = dot(&d, &p.feasible_vertex(&out.basis).unwrap());
                if got != best {
                    wrong.push(format!("#{t}: {got} < {best}"));
                }
            }
            Err(e) => wrong.push(format!("#{t}: {e}")),
        }
    }
    let elapsed = started.elapsed();
    verdict(
        wrong.is_empty() && within(elapsed, 60),
        format!("200 instances, {} wrong {:?}, {:.1}s", wrong.len(), wrong.first(), elapsed.as_secs_f64()),
    )
}

fn run_degenerate(p: &Polyhedron, start: &Basis, d: &[Rational]) -> Result<(), String> {
    let c = initial_objective(p, start).map_err(|e| e.to_string())?;
    let (_, trace) = shadow_simplex(p, &c, d, start).map_err(|e| e.to_string())?;
    if let Some(r) = trace.records.iter().find(|r| !p.is_feasible_basis(&r.basis)) {
        return Err(format!("infeasible basis {:?}", r.basis));
    }
    if !trace.lambdas_increasing() {
        return Err("λ not strictly increasing".into());
    }
    Ok(())
}

fn c2_degeneracy() -> Verdict {
    let mut rng = trial_rng(202, 0);
    let mut runs = 0;
    let mut failures = Vec::new();
    let py = pyramid();
    for (b, _) in py.feasible_bases() {
        for _ in 0..3 {
            let d = rational_sample(3, &mut rng);
            runs += 1;
            if let Err(e) = run_degenerate(&py, &b, &d) {
                failures.push(format!("pyramid {b:?}: {e}"));
            }
        }
    }
    let mut degenerate_starts = 0;
    for t in 0..50 {
        let n = 2 + t % 2;
        let p = random::degenerate_polytope(n, n + 4, &mut rng);
        let fan = NormalFan::new(&p).unwrap();
        // start at an overdetermined vertex when there is one
        let v = fan
            .vertices
            .iter()
            .find(|v| v.tight.len() > n)
            .unwrap_or(&fan.vertices[0]);
        degenerate_starts += (v.tight.len() > n) as usize;
        let d = rational_sample(n, &mut rng);
        runs += 1;
        if let Err(e) = run_degenerate(&p, &v.bases[0], &d) {
            failures.push(format!("random #{t}: {e}"));
        }
    }
    verdict(
        failures.is_empty() && degenerate_starts == 50,
        format!(
            "{runs} runs, {degenerate_starts}/50 degenerate starts, failures {:?}",
            failures.first()
        ),
    )
}

fn c3_sampler_moments() -> Verdict {
    const N_SAMPLES: usize = 100_000;
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [1usize, 2, 5, 10] {
        let mut s = Sampler::new(300 + n as u64);
        let mean = (0..N_SAMPLES).map(|_| s.exponential(n).norm).sum::<f64>() / N_SAMPLES as f64;
        let tol = 4.0 * (n as f64).sqrt() / (N_SAMPLES as f64).sqrt();
        let mut attempts = 0;
        for _ in 0..N_SAMPLES {
            attempts += sample_conditioned(n, s.rng(), 2.0 * n as f64).unwrap().attempts;
        }
        let rate = N_SAMPLES as f64 / attempts as f64;
        let ok = (mean - n as f64).abs() <= tol && rate >= 0.5;
        pass &= ok;
        lines.push(format!("n={n} mean={mean:.4} (±{tol:.4}) rate={rate:.3}"));
    }
    verdict(pass, lines.join("; "))
}

fn crossing_line(name: &str, r: &CrossingReport) -> String {
    format!(
        "{name}: {:.3}±{:.3} vs {:.3}{}",
        r.mean,
        r.stderr,
        r.bound,
        if r.pass() { "" } else { " FAIL" }
    )
}

fn fans() -> Vec<(&'static str, Polyhedron, NormalFan, Rational)> {
    [("square", unit_square()), ("cube3", cube(3))]
        .into_iter()
        .map(|(name, p)| {
            let fan = NormalFan::new(&p).unwrap();
            let tau_sq = fan_width_sq(&p, &fan);
            (name, p, fan, tau_sq)
        })
        .collect()
}

fn c4_shifted() -> Verdict {
    let started = Instant::now();
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, p, fan, tau_sq) in fans() {
        let n = p.dim();
        pass &= tau_sq == int(n as i64).recip();
        let c = vec![Rational::zero(); n];
        for dist in [1i64, 2] {
            let mut d = c.clone();
            d[0] = int(dist);
            let r = crossings_shifted(&fan, &c, &d, &tau_sq, 10_000, 400 + dist as u64).unwrap();
            pass &= r.pass();
            lines.push(crossing_line(&format!("{name} |d-c|={dist}"), &r));
        }
    }
    let elapsed = started.elapsed();
    pass &= within(elapsed, 120);
    lines.push(format!("{:.1}s", elapsed.as_secs_f64()));
    verdict(pass, lines.join("; "))
}

fn c5_scaled() -> Verdict {
    let mut pass = true;
    let mut lines = Vec::new();
    let alphas = [
        ("1/2", Rational::new(1.into(), 2.into())),
        ("1/e", rational_from_f64((-1f64).exp(), &pow2(64))),
    ];
    for (name, p, fan, tau_sq) in fans() {
        // from the origin the segment stays on one ray, so also try an offset center
        let origin = vec![Rational::zero(); p.dim()];
        let offset: Vector = (0..p.dim()).map(|i| Rational::new(1.into(), (i as i64 + 2).into())).collect();
        for (cname, c) in [("c=0", origin), ("c≠0", offset)] {
            for (aname, alpha) in &alphas {
                let r = crossings_scaled(&fan, &c, alpha, &tau_sq, 10_000, 500).unwrap();
                pass &= r.pass();
                lines.push(crossing_line(&format!("{name} {cname} α={aname}"), &r));
            }
        }
    }
    verdict(pass, lines.join("; "))
}

fn c6_diameter() -> Verdict {
    let p = cube(3);
    let fan = NormalFan::new(&p).unwrap();
    let tau_sq = fan_width_sq(&p, &fan);
    let u = fan.vertex_index(&vec_i64(&[0, 0, 0])).unwrap();
    let v = fan.vertex_index(&vec_i64(&[1, 1, 1])).unwrap();
    let (b1, b2) = (fan.vertices[u].bases[0].clone(), fan.vertices[v].bases[0].clone());
    let mut lengths = Vec::new();
    let mut invalid = 0;
    let mut errors = Vec::new();
    for seed in 0..100 {
        let mut rng = trial_rng(600 + seed, 0);
        match diameter_path(&p, &b1, &b2, &tau_sq, &mut rng) {
            Ok(path) => {
                invalid += !path.is_valid(&p, &fan, &b1, &b2) as usize;
                lengths.push(path.length() as f64);
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    let (mean, stderr) = shadow_simplex::harness::mean_stderr(&lengths);
    let bound = shadow_simplex::harness::diameter_bound(3, &tau_sq);
    verdict(
        invalid == 0 && errors.is_empty() && mean <= bound + 3.0 * stderr,
        format!(
            "τ²={tau_sq}, mean length {mean:.3}±{stderr:.3} vs {bound:.2}, invalid {invalid}, errors {:?}",
            errors.first()
        ),
    )
}

fn c7_delta_consistency() -> Verdict {
    let mut rng = trial_rng(707, 0);
    let mut bad = Vec::new();
    let mut done = 0;
    while done < 100 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(n..=n + 3);
        let rows: Vec<Vector> = (0..m)
            .map(|_| (0..n).map(|_| int(rng.random_range(-2..=2))).collect())
            .collect();
        let b: Vector = (0..m).map(|_| int(rng.random_range(0..=3))).collect();
        let Ok(p) = Polyhedron::new(Matrix::from_rows(rows).unwrap(), b) else {
            continue;
        };
        done += 1;
        let sd = delta_from_subdeterminants(p.matrix()).unwrap().delta;
        let g = global_delta(p.matrix());
        let l = local_delta(&p).unwrap();
        if !(&sd * &sd <= g && g <= l) {
            bad.push(format!("sd²={} g²={g} l²={l}", &sd * &sd));
        }
    }
    verdict(bad.is_empty(), format!("100 matrices, {} violations {:?}", bad.len(), bad.first()))
}

fn original_vertices(pp: &Polyhedron, original_rows: usize) -> BTreeSet<Vector> {
    vertex_set(pp)
        .into_iter()
        .filter(|x| (original_rows..pp.num_rows()).all(|j| dot(pp.row(j), x) < pp.rhs()[j]))
        .collect()
}

fn c8_bounding() -> Verdict {
    let mut rng = trial_rng(808, 0);
    let mut bad = Vec::new();
    for t in 0..50 {
        let n = 2 + t % 2;
        let p = random::unbounded_pointed(n, n + 2, &mut rng);
        let verts = vertex_set(&p);
        let delta_sq = local_delta(&p).unwrap();
        let start = p.feasible_bases()[0].0.clone();
        let (pl, rl) = bound_local(&p, &start, &delta_sq).unwrap();
        let (pg, rg) = bound_global(&p, &delta_sq).unwrap();
        let checks = [
            ("local bounded", pl.is_bounded()),
            ("local vertices", original_vertices(&pl, rl.original_rows) == verts),
            ("local delta", local_delta(&pl).unwrap() >= rl.delta_sq_after),
            ("global bounded", pg.is_bounded()),
            ("global vertices", original_vertices(&pg, rg.original_rows) == verts),
            ("global delta", global_delta(pg.matrix()) == global_delta(p.matrix())),
        ];
        for (name, ok) in checks {
            if !ok {
                bad.push(format!("#{t} {name}"));
            }
        }
    }
    verdict(bad.is_empty(), format!("50 instances, failures {bad:?}"))
}

fn c9_feasibility() -> Verdict {
    let mut rng = trial_rng(909, 0);
    let (mut feasible, mut infeasible) = (0, 0);
    let mut bad = Vec::new();
    while feasible + infeasible < 100 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(n + 1..=8);
        let p = random::integral_system(n, m, 2, &mut rng);
        let truth = !vertex_set(&p).is_empty();
        if (truth && feasible == 50) || (!truth && infeasible == 50) {
            continue;
        }
        if truth {
            feasible += 1;
        } else {
            infeasible += 1;
        }
        let big_delta = max_subdeterminant(p.matrix());
        let a = phase1_subdeterminant(&p, &big_delta, &mut rng);
        let g = phase1_global_delta(&p, &global_delta(p.matrix()), &mut rng);
        for (name, out) in [("subdet", a), ("global", g)] {
            match out {
                Ok(o) if o.is_feasible() == truth => {
                    if let Some(b) = o.basis() {
                        if !p.is_feasible_basis(b) {
                            bad.push(format!("{name}: infeasible basis"));
                        }
                    }
                }
                Ok(o) => bad.push(format!("{name}: said {} expected {truth}", o.is_feasible())),
                Err(e) => bad.push(format!("{name}: {e}")),
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("{feasible} feasible, {infeasible} infeasible, mismatches {} {:?}", bad.len(), bad.first()),
    )
}

fn c10_matching() -> Verdict {
    let started = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for k in [4usize, 6] {
        let g = shadow_simplex::geometry::MatchingInstance::complete(k);
        let (mut ok, mut total) = (0, 0);
        let mut first_bad = None;
        for m in g.perfect_matchings() {
            let gm: MatchingInstance = g.with_matching(m.clone());
            let cert = matching_width_certificate(&gm).unwrap();
            let cycles = matching_cycle_checks(&gm, &cert.w);
            let good = cert.matched_edges_ok
                && cert.unmatched_edges_ok
                && cycles.iter().all(|c| c.holds())
                && cert.tau_bound_holds(g.edges.len());
            total += 1;
            if good {
                ok += 1;
            } else if first_bad.is_none() {
                first_bad = Some(format!("M={m:?} w={:?}", cert.w));
            }
        }
        pass &= ok == total;
        lines.push(format!("K{k}: {ok}/{total} matchings certified{}", match first_bad {
            Some(s) => format!(" (first failure {s})"),
            None => String::new(),
        }));
    }
    pass &= within(started.elapsed(), 10);
    verdict(pass, lines.join("; "))
}

type Criterion = (usize, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 10] = [
    (1, "solver matches brute force", c1_solver_correctness),
    (2, "degenerate pivots stay feasible", c2_degeneracy),
    (3, "sampler moments", c3_sampler_moments),
    (4, "shifted crossing bound", c4_shifted),
    (5, "scaled crossing bound", c5_scaled),
    (6, "diameter paths", c6_diameter),
    (7, "delta certification order", c7_delta_consistency),
    (8, "bounding transforms", c8_bounding),
    (9, "phase-1 verdicts", c9_feasibility),
    (10, "matching width certificate", c10_matching),
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for (k, name, _) in CRITERIA {
            println!("criterion_{k:02}_{}: test", name.replace([' ', '-'], "_"));
        }
        return;
    }
    let only: Vec<usize> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (k, name, f) in CRITERIA {
        if !only.is_empty() && !only.contains(&k) {
            continue;
        }
        let started = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        println!(
            "criterion {k:>2} [{}] {name} ({:.1}s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass {
            failed.push(k);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
