//! Brute-force oracles, instance generators and Monte Carlo experiments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{
    delta_from_subdeterminants, global_delta, inv_sqrt_upper, local_delta, width_certificate_of_cone, Basis,
    Polyhedron,
};
use crate::io::Instance;
use crate::numeric::{self, dot, format_rational, int, pow2, to_f64, Matrix, Rational, Vector};
use crate::optimize::{optimize_with_halving, pivot_bound, Phase2Options};
use crate::pivot::{follow_segment_chain, PivotTrace};
use crate::sampler::{sample_conditioned, sample_exponential, trial_rng};

/// A vertex with every row tight at it and every feasible basis defining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexInfo {
    pub point: Vector,
    pub tight: Vec<usize>,
    pub bases: Vec<Basis>,
}

pub fn enumerate_vertices(p: &Polyhedron) -> Vec<VertexInfo> {
    let mut index: BTreeMap<Vector, usize> = BTreeMap::new();
    let mut out: Vec<VertexInfo> = Vec::new();
    for (basis, x) in p.feasible_bases() {
        match index.get(&x) {
            Some(&k) => out[k].bases.push(basis),
            None => {
                index.insert(x.clone(), out.len());
                out.push(VertexInfo {
                    tight: p.tight_rows(&x),
                    point: x,
                    bases: vec![basis],
                });
            }
        }
    }
    out
}

/// Optimal value and every vertex attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimumSet {
    pub value: Rational,
    pub vertices: Vec<Vector>,
}

pub fn brute_force_optimize(p: &Polyhedron, c: &[Rational]) -> Result<OptimumSet> {
    if !p.is_bounded() {
        return Err(Error::Unbounded);
    }
    let verts = enumerate_vertices(p);
    let value = verts
        .iter()
        .map(|v| dot(c, &v.point))
        .max()
        .ok_or(Error::NoFeasibleBasis)?;
    let vertices = verts
        .into_iter()
        .filter(|v| dot(c, &v.point) == value)
        .map(|v| v.point)
        .collect();
    Ok(OptimumSet { value, vertices })
}

/// Vertices and edges of a polytope; edge `(u, v)` is also the common facet of
/// the normal cones of `u` and `v`, with normal `v − u`.
#[derive(Clone, Debug)]
pub struct NormalFan {
    pub dim: usize,
    pub vertices: Vec<VertexInfo>,
    pub edges: Vec<(usize, usize)>,
}

impl NormalFan {
    pub fn new(p: &Polyhedron) -> Result<Self> {
        if !p.is_bounded() {
            return Err(Error::Unbounded);
        }
        let vertices = enumerate_vertices(p);
        if vertices.is_empty() {
            return Err(Error::NoFeasibleBasis);
        }
        let n = p.dim();
        let edges = (0..vertices.len())
            .tuple_combinations()
            .filter(|&(u, v)| {
                let common: Vec<&[Rational]> = vertices[u]
                    .tight
                    .iter()
                    .filter(|i| vertices[v].tight.contains(i))
                    .map(|&i| p.row(i))
                    .collect();
                numeric::rank_of_rows(&common) == n - 1
            })
            .collect();
        Ok(NormalFan {
            dim: n,
            vertices,
            edges,
        })
    }

    pub fn vertex_index(&self, x: &[Rational]) -> Option<usize> {
        self.vertices.iter().position(|v| v.point == x)
    }

    pub fn vertex_of_basis(&self, b: &Basis) -> Option<usize> {
        self.vertices.iter().position(|v| v.bases.contains(b))
    }

    pub fn are_adjacent(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Indices of the vertices maximizing `c`.
    pub fn optimal_set(&self, c: &[Rational]) -> Vec<usize> {
        let vals: Vec<Rational> = self.vertices.iter().map(|v| dot(c, &v.point)).collect();
        let best = vals.iter().max().cloned().unwrap_or_else(Rational::zero);
        (0..vals.len()).filter(|&i| vals[i] == best).collect()
    }

    /// Vertex farthest (Euclidean) from vertex `u`; first on ties.
    pub fn farthest_from(&self, u: usize) -> usize {
        let mut best = (Rational::zero(), u);
        for (k, v) in self.vertices.iter().enumerate() {
            let dist = numeric::norm_sq(&numeric::sub(&v.point, &self.vertices[u].point));
            if dist > best.0 {
                best = (dist, k);
            }
        }
        best.1
    }
}

/// Certified τ² for the whole fan.
///
/// Each normal cone is `{c : ⟨c, v − w⟩ ≥ 0 for every neighbour w}`; the
/// center is the sum of the cone's (approximately) normalized generators, and
/// the squared radius is the smallest squared distance from the unit center
/// to a facet hyperplane.
pub fn fan_width_sq(p: &Polyhedron, fan: &NormalFan) -> Rational {
    let mut best: Option<Rational> = None;
    for (k, v) in fan.vertices.iter().enumerate() {
        let mut u = vec![Rational::zero(); fan.dim];
        for &i in &v.tight {
            let s = inv_sqrt_upper(&p.row_norm_sq(i), numeric::DEFAULT_DENOM_BITS);
            numeric::axpy(&mut u, &s, p.row(i));
        }
        let uu = numeric::norm_sq(&u);
        for &(a, b) in &fan.edges {
            let other = match (a == k, b == k) {
                (true, _) => b,
                (_, true) => a,
                _ => continue,
            };
            let e = numeric::sub(&v.point, &fan.vertices[other].point);
            let ue = dot(&u, &e);
            let r = &ue * &ue / (&uu * numeric::norm_sq(&e));
            if best.as_ref().is_none_or(|b| &r < b) {
                best = Some(r);
            }
        }
    }
    best.unwrap_or_else(Rational::one)
}

/// Crossings of the segment `[p, q]` with the facets of the fan, or `None`
/// when the segment meets a lower-dimensional face (a measure-zero event).
pub fn count_crossings(fan: &NormalFan, p: &[Rational], q: &[Rational]) -> Option<usize> {
    if p == q {
        return Some(0);
    }
    let both_optimal = |c: &[Rational], u: usize, v: usize| -> (bool, usize) {
        let opt = fan.optimal_set(c);
        (opt.contains(&u) && opt.contains(&v), opt.len())
    };
    let dir = numeric::sub(q, p);
    let mut count = 0;
    for &(u, v) in &fan.edges {
        let e = numeric::sub(&fan.vertices[v].point, &fan.vertices[u].point);
        let f0 = dot(p, &e);
        let f1 = dot(q, &e);
        if f0.is_zero() || f1.is_zero() {
            let at = if f0.is_zero() { p } else { q };
            if both_optimal(at, u, v).0 {
                return None;
            }
            continue;
        }
        if f0.is_positive() == f1.is_positive() {
            continue;
        }
        let t = &f0 / (&f0 - &f1);
        let mut c = p.to_vec();
        numeric::axpy(&mut c, &t, &dir);
        match both_optimal(&c, u, v) {
            (true, 2) => count += 1,
            (true, _) => return None,
            (false, _) => {}
        }
    }
    Some(count)
}

/// Cap on resampling a single trial.
const MAX_RESAMPLES: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct CrossingReport {
    /// Crossings per trial.
    pub counts: Vec<usize>,
    /// Facet incidences per trial; every crossing touches two cones.
    pub raw_incidences: Vec<usize>,
    pub mean: f64,
    pub raw_mean: f64,
    pub stderr: f64,
    pub bound: f64,
    pub resamples: usize,
}

impl CrossingReport {
    fn from_counts(counts: Vec<usize>, resamples: usize, bound: f64) -> Self {
        let raw: Vec<usize> = counts.iter().map(|c| 2 * c).collect();
        let (mean, stderr) = mean_stderr(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
        CrossingReport {
            raw_mean: 2.0 * mean,
            raw_incidences: raw,
            counts,
            mean,
            stderr,
            bound,
            resamples,
        }
    }

    /// `mean ≤ bound + 3·stderr`
    pub fn pass(&self) -> bool {
        self.mean <= self.bound + 3.0 * self.stderr
    }

    pub fn to_json(&self) -> Value {
        json!({
            "trials": self.counts.len(),
            "mean": self.mean,
            "raw_mean": self.raw_mean,
            "stderr": self.stderr,
            "bound": self.bound,
            "resamples": self.resamples,
            "pass": self.pass(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("trial,crossings,raw_incidences\n");
        for (t, (c, r)) in self.counts.iter().zip(&self.raw_incidences).enumerate() {
            s.push_str(&format!("{t},{c},{r}\n"));
        }
        s
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn run_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials as u64).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials as u64).map(f).collect()
    }
}

fn sample_rational(n: usize, rng: &mut impl Rng) -> Vector {
    sample_exponential(n, rng).rationalize(&pow2(numeric::DEFAULT_DENOM_BITS))
}

fn crossing_trials<F>(fan: &NormalFan, trials: usize, seed: u64, segment: F) -> Result<(Vec<usize>, usize)>
where
    F: Fn(&Vector) -> (Vector, Vector) + Sync + Send,
{
    let results = run_trials(trials, |t| {
        let mut rng = trial_rng(seed, t);
        for resample in 0..MAX_RESAMPLES {
            let x = sample_rational(fan.dim, &mut rng);
            let (p, q) = segment(&x);
            if let Some(c) = count_crossings(fan, &p, &q) {
                return Ok((c, resample));
            }
        }
        Err(Error::RetriesExhausted(MAX_RESAMPLES))
    });
    let mut counts = Vec::with_capacity(trials);
    let mut resamples = 0;
    for r in results {
        let (c, k) = r?;
        counts.push(c);
        resamples += k;
    }
    Ok((counts, resamples))
}

/// Crossings of `[c + X, d + X]` with X exponential; bound `‖d − c‖/τ`.
pub fn crossings_shifted(
    fan: &NormalFan,
    c: &[Rational],
    d: &[Rational],
    tau_sq: &Rational,
    trials: usize,
    seed: u64,
) -> Result<CrossingReport> {
    check_trials(trials)?;
    let (counts, resamples) = crossing_trials(fan, trials, seed, |x| (numeric::add(c, x), numeric::add(d, x)))?;
    let bound = (to_f64(&numeric::norm_sq(&numeric::sub(d, c))) / to_f64(tau_sq)).sqrt();
    Ok(CrossingReport::from_counts(counts, resamples, bound))
}

/// Crossings of `[c + αX, c + X]`; bound `(2n/τ)·ln(1/α)`.
pub fn crossings_scaled(
    fan: &NormalFan,
    c: &[Rational],
    alpha: &Rational,
    tau_sq: &Rational,
    trials: usize,
    seed: u64,
) -> Result<CrossingReport> {
    check_trials(trials)?;
    if !alpha.is_positive() || *alpha >= Rational::one() {
        return Err(Error::BadParams("alpha must lie in (0, 1)".into()));
    }
    let (counts, resamples) = crossing_trials(fan, trials, seed, |x| {
        let mut p = c.to_vec();
        numeric::axpy(&mut p, alpha, x);
        (p, numeric::add(c, x))
    })?;
    let n = fan.dim as f64;
    let bound = 2.0 * n / to_f64(tau_sq).sqrt() * (1.0 / to_f64(alpha)).ln();
    Ok(CrossingReport::from_counts(counts, resamples, bound))
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(Error::BadParams("trial count must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `8n/τ·(1 + ln(1/τ))`
pub fn diameter_bound(n: usize, tau_sq: &Rational) -> f64 {
    let tau = to_f64(tau_sq).sqrt();
    8.0 * n as f64 / tau * (1.0 + (1.0 / tau).ln())
}

#[derive(Clone, Debug)]
pub struct DiameterPath {
    /// Start basis followed by the basis after each pivot.
    pub bases: Vec<Basis>,
    /// Distinct consecutive vertices visited.
    pub vertices: Vec<Vector>,
    pub trace: PivotTrace,
    pub retries: usize,
    pub bound: f64,
}

impl DiameterPath {
    /// Number of edges walked.
    pub fn length(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Endpoints are the vertices of `v1`, `v2` and every step is an edge.
    pub fn is_valid(&self, p: &Polyhedron, fan: &NormalFan, v1: &Basis, v2: &Basis) -> bool {
        let (Ok(a), Ok(b)) = (p.feasible_vertex(v1), p.feasible_vertex(v2)) else {
            return false;
        };
        if self.vertices.first() != Some(&a) || self.vertices.last() != Some(&b) {
            return false;
        }
        self.vertices.windows(2).all(|w| {
            match (fan.vertex_index(&w[0]), fan.vertex_index(&w[1])) {
                (Some(u), Some(v)) => fan.are_adjacent(u, v),
                _ => false,
            }
        })
    }
}

/// Walk from vertex `v1` to vertex `v2` along
/// `[s c₁, s c₁ + X], [s c₁ + X, s c₂ + X], [s c₂ + X, s c₂]` where `cᵢ` are
/// certified interior points of the two normal cones and `s = 4n/‖c₂ − c₁‖`.
pub fn diameter_path<R: Rng + ?Sized>(
    p: &Polyhedron,
    v1: &Basis,
    v2: &Basis,
    tau_sq: &Rational,
    rng: &mut R,
) -> Result<DiameterPath> {
    let n = p.dim();
    let start = p.feasible_vertex(v1)?;
    let end = p.feasible_vertex(v2)?;
    let bound = diameter_bound(n, tau_sq);
    if start == end {
        return Ok(DiameterPath {
            bases: vec![v1.clone()],
            vertices: vec![start],
            trace: PivotTrace::default(),
            retries: 0,
            bound,
        });
    }
    let rows = |b: &Basis| -> Vec<Vector> { b.indices().iter().map(|&i| p.row(i).to_vec()).collect() };
    let c1 = width_certificate_of_cone(&rows(v1))?.center;
    let c2 = width_certificate_of_cone(&rows(v2))?.center;
    let gap = numeric::norm_sq(&numeric::sub(&c2, &c1));
    let s = int(4 * n as i64) * inv_sqrt_upper(&gap, numeric::DEFAULT_DENOM_BITS);
    let sc1 = numeric::scale(&c1, &s);
    let sc2 = numeric::scale(&c2, &s);
    let denom = pow2(numeric::DEFAULT_DENOM_BITS);
    let max_retries = Phase2Options::default().max_retries;
    for retries in 0..=max_retries {
        let x = sample_conditioned(n, rng, 2.0 * n as f64)?.rationalize(&denom);
        let waypoints = vec![sc1.clone(), numeric::add(&sc1, &x), numeric::add(&sc2, &x), sc2.clone()];
        let trace = match follow_segment_chain(p, &waypoints, v1) {
            Ok((_, t)) => t,
            Err(Error::DegenerateSegment(_)) => continue,
            Err(e) => return Err(e),
        };
        let mut bases = vec![v1.clone()];
        bases.extend(trace.records.iter().map(|r| r.basis.clone()));
        let mut vertices: Vec<Vector> = Vec::new();
        for b in &bases {
            let x = p.feasible_vertex(b)?;
            if vertices.last() != Some(&x) {
                vertices.push(x);
            }
        }
        if vertices.last() != Some(&end) {
            return Err(Error::Internal("diameter path ended at the wrong vertex".into()));
        }
        return Ok(DiameterPath {
            bases,
            vertices,
            trace,
            retries,
            bound,
        });
    }
    Err(Error::RetriesExhausted(max_retries + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    Cube,
    Simplex,
    Pyramid,
    TuInterval,
    RandomDelta,
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cube" => InstanceKind::Cube,
            "simplex" => InstanceKind::Simplex,
            "pyramid" => InstanceKind::Pyramid,
            "tu-interval" => InstanceKind::TuInterval,
            "random-delta" => InstanceKind::RandomDelta,
            other => return Err(Error::BadParams(format!("unknown instance kind {other:?}"))),
        })
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceKind::Cube => "cube",
            InstanceKind::Simplex => "simplex",
            InstanceKind::Pyramid => "pyramid",
            InstanceKind::TuInterval => "tu-interval",
            InstanceKind::RandomDelta => "random-delta",
        })
    }
}

#[derive(Clone, Debug)]
pub struct GenParams {
    pub n: usize,
    /// Row count for random instances.
    pub m: Option<usize>,
    /// Largest absolute entry for random integral instances.
    pub max_entry: i64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n: 3,
            m: None,
            max_entry: 2,
        }
    }
}

/// Ground-truth quantities are only computed below this many row subsets.
const META_LIMIT: usize = 50_000;

fn binomial(m: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(m - i) / (i + 1))
}

pub fn cube(n: usize) -> Polyhedron {
    let mut rows = Vec::with_capacity(2 * n);
    let mut b = Vec::with_capacity(2 * n);
    for sign in [1i64, -1] {
        for i in 0..n {
            let mut r = vec![Rational::zero(); n];
            r[i] = int(sign);
            rows.push(r);
            b.push(if sign > 0 { Rational::one() } else { Rational::zero() });
        }
    }
    Polyhedron::new(Matrix::from_rows(rows).expect("square rows"), b).expect("cube is pointed")
}

pub fn unit_square() -> Polyhedron {
    cube(2)
}

/// `x ≥ 0`, `Σx ≤ 1`.
pub fn simplex(n: usize) -> Polyhedron {
    let mut rows: Vec<Vector> = (0..n)
        .map(|i| {
            let mut r = vec![Rational::zero(); n];
            r[i] = int(-1);
            r
        })
        .collect();
    rows.push(vec![Rational::one(); n]);
    let mut b = vec![Rational::zero(); n];
    b.push(Rational::one());
    Polyhedron::new(Matrix::from_rows(rows).expect("rows"), b).expect("simplex is pointed")
}

/// Square pyramid with a degenerate apex (four tight rows at `(0, 0, 1)`).
pub fn pyramid() -> Polyhedron {
    Polyhedron::from_i64(
        &[&[0, 0, -1], &[1, 0, 1], &[0, 1, 1], &[-1, 0, 1], &[0, -1, 1]],
        &[0, 1, 1, 1, 1],
    )
    .expect("pyramid")
}

/// Every interval row `x_i + … + x_j ≤ 1` plus `x ≥ 0`.
pub fn tu_interval(n: usize) -> Polyhedron {
    let mut rows = Vec::new();
    for i in 0..n {
        for j in i..n {
            rows.push((0..n).map(|k| if (i..=j).contains(&k) { int(1) } else { int(0) }).collect());
        }
    }
    let m_int = rows.len();
    for i in 0..n {
        let mut r = vec![Rational::zero(); n];
        r[i] = int(-1);
        rows.push(r);
    }
    let mut b = vec![Rational::one(); m_int];
    b.extend(std::iter::repeat_n(Rational::zero(), n));
    Polyhedron::new(Matrix::from_rows(rows).expect("rows"), b).expect("interval system is pointed")
}

pub fn generate_instance<R: Rng + ?Sized>(kind: InstanceKind, params: &GenParams, rng: &mut R) -> Result<Instance> {
    let n = params.n;
    if n == 0 || (kind == InstanceKind::Cube && n > 12) {
        return Err(Error::BadParams(format!("dimension {n} not supported for {kind}")));
    }
    let poly = match kind {
        InstanceKind::Cube => cube(n),
        InstanceKind::Simplex => simplex(n),
        InstanceKind::Pyramid => pyramid(),
        InstanceKind::TuInterval => tu_interval(n),
        InstanceKind::RandomDelta => {
            let m = params.m.unwrap_or(2 * n + 2);
            if m < n + 1 || params.max_entry < 1 {
                return Err(Error::BadParams("random-delta needs m > n and max_entry ≥ 1".into()));
            }
            random::integral_polytope(n, m, params.max_entry, rng)
        }
    };
    let mut inst = Instance::new(poly.clone())
        .with_meta("kind", json!(kind.to_string()))
        .with_meta("n", json!(poly.dim()))
        .with_meta("m", json!(poly.num_rows()));
    if binomial(poly.num_rows(), poly.dim()) <= META_LIMIT {
        let fan = NormalFan::new(&poly);
        if let Ok(fan) = &fan {
            inst = inst
                .with_meta("vertices", json!(fan.vertices.len()))
                .with_meta("tau_sq", json!(format_rational(&fan_width_sq(&poly, fan))));
        }
        if let Ok(d) = local_delta(&poly) {
            inst = inst.with_meta("delta_sq", json!(format_rational(&d)));
        }
        inst = inst.with_meta("global_delta_sq", json!(format_rational(&global_delta(poly.matrix()))));
        if let Ok(sd) = delta_from_subdeterminants(poly.matrix()) {
            inst = inst.with_meta("subdeterminant_delta", json!(format_rational(&sd.delta)));
        }
    }
    Ok(inst)
}

/// Random instance families used by the tests and the experiment driver.
pub mod random {
    use super::*;

    fn small_rational<R: Rng + ?Sized>(rng: &mut R, num: i64, max_den: i64) -> Rational {
        Rational::new(rng.random_range(-num..=num).into(), rng.random_range(1..=max_den).into())
    }

    fn random_row<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
        loop {
            let r: Vector = (0..n).map(|_| small_rational(rng, 5, 3)).collect();
            if !numeric::is_zero_vec(&r) {
                return r;
            }
        }
    }

    /// Bounded polytope with the origin in its interior.
    pub fn bounded_polytope<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Polyhedron {
        assert!(m > n, "a polytope needs more than n rows");
        loop {
            let rows: Vec<Vector> = (0..m).map(|_| random_row(n, rng)).collect();
            let b: Vector = (0..m)
                .map(|_| Rational::new(rng.random_range(1..=6).into(), rng.random_range(1..=2).into()))
                .collect();
            if let Ok(p) = Polyhedron::new(Matrix::from_rows(rows).expect("rows"), b) {
                if p.is_bounded() {
                    return p;
                }
            }
        }
    }

    /// Bounded polytope plus rows that duplicate tight constraints at a vertex.
    pub fn degenerate_polytope<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Polyhedron {
        let extra = 1 + (m > n + 2) as usize;
        let base = bounded_polytope(n, m - extra, rng);
        let verts = enumerate_vertices(&base);
        let v = &verts[rng.random_range(0..verts.len())];
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for k in 0..extra {
            let (row, b) = if k == 0 {
                // scaled copy of one tight row
                let i = v.tight[rng.random_range(0..v.tight.len())];
                let s = int(rng.random_range(2..=3));
                (numeric::scale(base.row(i), &s), &base.rhs()[i] * &s)
            } else {
                // positive combination of the tight rows
                let mut row = vec![Rational::zero(); n];
                let mut b = Rational::zero();
                for &i in &v.tight {
                    let w = int(rng.random_range(1..=3));
                    numeric::axpy(&mut row, &w, base.row(i));
                    b += &w * &base.rhs()[i];
                }
                (row, b)
            };
            if !numeric::is_zero_vec(&row) {
                rows.push(row);
                rhs.push(b);
            }
        }
        base.with_rows(&rows, &rhs).expect("same dimension")
    }

    /// Pointed polyhedron with a nontrivial recession cone; origin feasible.
    pub fn unbounded_pointed<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Polyhedron {
        assert!(m >= n);
        loop {
            let r: Vector = (0..n).map(|_| int(rng.random_range(-2..=2))).collect();
            if numeric::is_zero_vec(&r) {
                continue;
            }
            let rows: Vec<Vector> = (0..m)
                .map(|_| {
                    let a = random_row(n, rng);
                    if dot(&a, &r).is_positive() {
                        a.iter().map(|x| -x).collect()
                    } else {
                        a
                    }
                })
                .collect();
            let b: Vector = (0..m).map(|_| int(rng.random_range(0..=4))).collect();
            if let Ok(p) = Polyhedron::new(Matrix::from_rows(rows).expect("rows"), b) {
                if !p.is_bounded() && !p.feasible_bases().is_empty() {
                    return p;
                }
            }
        }
    }

    /// Integral rows with entries in `[−k, k]`, right-hand sides in `[−3, 3]`;
    /// may be empty or unbounded.
    pub fn integral_system<R: Rng + ?Sized>(n: usize, m: usize, k: i64, rng: &mut R) -> Polyhedron {
        loop {
            let rows: Vec<Vector> = (0..m)
                .map(|_| (0..n).map(|_| int(rng.random_range(-k..=k))).collect())
                .collect();
            let b: Vector = (0..m).map(|_| int(rng.random_range(-3..=3))).collect();
            if let Ok(p) = Polyhedron::new(Matrix::from_rows(rows).expect("rows"), b) {
                return p;
            }
        }
    }

    /// Integral rows, positive right-hand sides, bounded.
    pub fn integral_polytope<R: Rng + ?Sized>(n: usize, m: usize, k: i64, rng: &mut R) -> Polyhedron {
        loop {
            let rows: Vec<Vector> = (0..m)
                .map(|_| (0..n).map(|_| int(rng.random_range(-k..=k))).collect())
                .collect();
            let b: Vector = (0..m).map(|_| int(rng.random_range(1..=4))).collect();
            if let Ok(p) = Polyhedron::new(Matrix::from_rows(rows).expect("rows"), b) {
                if p.is_bounded() {
                    return p;
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Diameter,
    CrossingsShifted,
    CrossingsScaled,
    Phase2Stats,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "diameter" => ExperimentKind::Diameter,
            "crossings-shifted" => ExperimentKind::CrossingsShifted,
            "crossings-scaled" => ExperimentKind::CrossingsScaled,
            "phase2-stats" => ExperimentKind::Phase2Stats,
            other => return Err(Error::BadParams(format!("unknown experiment {other:?}"))),
        })
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub trials: usize,
    pub seed: u64,
    /// Segment start (crossings) or unused.
    pub c: Option<Vector>,
    /// Segment end for shifted crossings.
    pub d: Option<Vector>,
    pub alpha: Option<Rational>,
    /// Overrides the certified fan width.
    pub tau_sq: Option<Rational>,
    /// Overrides the enumerated local δ² for phase-2 statistics.
    pub delta_sq: Option<Rational>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, trials: usize, seed: u64) -> Self {
        ExperimentConfig {
            kind,
            trials,
            seed,
            c: None,
            d: None,
            alpha: None,
            tau_sq: None,
            delta_sq: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub summary: Value,
    pub csv: String,
    pub pass: bool,
}

pub fn run_experiment(p: &Polyhedron, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    check_trials(cfg.trials)?;
    let n = p.dim();
    let fan = NormalFan::new(p)?;
    let tau_sq = cfg.tau_sq.clone().unwrap_or_else(|| fan_width_sq(p, &fan));
    let zero = vec![Rational::zero(); n];
    match cfg.kind {
        ExperimentKind::CrossingsShifted => {
            let c = cfg.c.clone().unwrap_or_else(|| zero.clone());
            let d = cfg.d.clone().ok_or_else(|| Error::BadParams("crossings-shifted needs --d".into()))?;
            let r = crossings_shifted(&fan, &c, &d, &tau_sq, cfg.trials, cfg.seed)?;
            Ok(ExperimentReport {
                summary: with_tau(r.to_json(), &tau_sq),
                csv: r.to_csv(),
                pass: r.pass(),
            })
        }
        ExperimentKind::CrossingsScaled => {
            let c = cfg.c.clone().unwrap_or(zero);
            let alpha = cfg.alpha.clone().unwrap_or_else(|| Rational::new(1.into(), 2.into()));
            let r = crossings_scaled(&fan, &c, &alpha, &tau_sq, cfg.trials, cfg.seed)?;
            Ok(ExperimentReport {
                summary: with_tau(r.to_json(), &tau_sq),
                csv: r.to_csv(),
                pass: r.pass(),
            })
        }
        ExperimentKind::Diameter => {
            let u = 0;
            let v = fan.farthest_from(u);
            let b1 = fan.vertices[u].bases[0].clone();
            let b2 = fan.vertices[v].bases[0].clone();
            let results = run_trials(cfg.trials, |t| {
                let mut rng = trial_rng(cfg.seed, t);
                diameter_path(p, &b1, &b2, &tau_sq, &mut rng)
            });
            let mut csv = String::from("trial,length,pivots,valid\n");
            let mut lengths = Vec::new();
            let mut all_valid = true;
            for (t, r) in results.into_iter().enumerate() {
                let path = r?;
                let valid = path.is_valid(p, &fan, &b1, &b2);
                all_valid &= valid;
                csv.push_str(&format!("{t},{},{},{valid}\n", path.length(), path.trace.pivots()));
                lengths.push(path.length() as f64);
            }
            let (mean, stderr) = mean_stderr(&lengths);
            let bound = diameter_bound(n, &tau_sq);
            let pass = all_valid && mean <= bound + 3.0 * stderr;
            Ok(ExperimentReport {
                summary: with_tau(
                    json!({
                        "trials": cfg.trials,
                        "from": numeric::vec_to_f64(&fan.vertices[u].point),
                        "to": numeric::vec_to_f64(&fan.vertices[v].point),
                        "mean": mean,
                        "stderr": stderr,
                        "bound": bound,
                        "all_valid": all_valid,
                        "pass": pass,
                    }),
                    &tau_sq,
                ),
                csv,
                pass,
            })
        }
        ExperimentKind::Phase2Stats => {
            let delta_sq = match &cfg.delta_sq {
                Some(d) => d.clone(),
                None => local_delta(p)?,
            };
            let start = fan.vertices[0].bases[0].clone();
            let results = run_trials(cfg.trials, |t| -> Result<(usize, bool, f64)> {
                let mut rng = trial_rng(cfg.seed, t);
                let d = sample_rational(n, &mut rng);
                let out = optimize_with_halving(p, &delta_sq, &start, &d, &mut rng, &Phase2Options::default(), 64)?;
                let value = dot(&d, &p.feasible_vertex(&out.outcome.basis)?);
                let best = brute_force_optimize(p, &d)?.value;
                let c = numeric::vec_to_f64(&crate::optimize::initial_objective(p, &start)?);
                let dist = c
                    .iter()
                    .zip(numeric::vec_to_f64(&d))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                Ok((out.outcome.pivots(), value == best, dist))
            });
            let mut csv = String::from("trial,pivots,correct\n");
            let mut pivots = Vec::new();
            let mut all_correct = true;
            for (t, r) in results.into_iter().enumerate() {
                let (k, ok, _) = r?;
                all_correct &= ok;
                csv.push_str(&format!("{t},{k},{ok}\n"));
                pivots.push(k as f64);
            }
            let (mean, stderr) = mean_stderr(&pivots);
            // d is rescaled to norm 2 and c has norm at most n
            let bound = n as f64 * pivot_bound(n, to_f64(&delta_sq).sqrt(), 2.0 + n as f64);
            let pass = all_correct && mean <= bound + 3.0 * stderr;
            Ok(ExperimentReport {
                summary: json!({
                    "trials": cfg.trials,
                    "delta_sq": format_rational(&delta_sq),
                    "mean_pivots": mean,
                    "stderr": stderr,
                    "bound": bound,
                    "all_correct": all_correct,
                    "pass": pass,
                }),
                csv,
                pass,
            })
        }
    }
}

fn with_tau(mut v: Value, tau_sq: &Rational) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("tau_sq".into(), json!(format_rational(tau_sq)));
    }
    v
}
