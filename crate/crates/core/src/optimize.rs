//! Phase 2: randomized three-segment shadow path with facet recursion.
//!
//! From a feasible basis B the path runs `c → c+X → d+X → d̃` where
//! `c = Σ aᵢ/‖aᵢ‖` over B and `d̃ = d + δ/(2k³)·X`. The basis reached is
//! optimal for `d̃`; some row with a large coefficient in the decomposition of
//! `d̃` is tight at an optimum for `d`, so the search recurses on that facet.
//!
//! Facets are expressed in a rational orthogonal frame. The frame is not
//! normalized, so a projected polyhedron carries diagonal weights giving the
//! inner product on its rows (see [`Polyhedron::weights`]).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{cone_coefficients, inv_sqrt_upper, normal_cone_membership, Basis, Polyhedron};
use crate::numeric::{self, dot, int, pow2, sqrt_lower, Matrix, Rational, Vector};
use crate::pivot::{follow_segment_chain, PivotTrace};
use crate::sampler::sample_conditioned;

#[derive(Clone, Debug)]
pub struct Phase2Options {
    /// Fresh samples tried after a degenerate segment.
    pub max_retries: usize,
    /// Use X = 0 (deterministic; for tests).
    pub force_zero_x: bool,
    /// Binary digits kept when rationalizing samples and norms.
    pub denom_bits: u32,
}

impl Default for Phase2Options {
    fn default() -> Self {
        Phase2Options {
            max_retries: 16,
            force_zero_x: false,
            denom_bits: numeric::DEFAULT_DENOM_BITS,
        }
    }
}

/// One level of the recursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionFrame {
    pub dim: usize,
    /// Original rows fixed so far, including the one chosen at this level.
    pub fixed: Vec<usize>,
    pub pivots: usize,
    pub retries: usize,
}

#[derive(Clone, Debug)]
pub struct Phase2Outcome {
    pub basis: Basis,
    pub frames: Vec<RecursionFrame>,
    pub traces: Vec<PivotTrace>,
}

impl Phase2Outcome {
    pub fn pivots(&self) -> usize {
        self.frames.iter().map(|f| f.pivots).sum()
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }
}

/// `Σ_{i∈B} aᵢ/‖aᵢ‖` with each `1/‖aᵢ‖` rounded up to a dyadic rational
/// (exact when the norm is rational). Lies strictly inside `cone(B)`.
pub fn initial_objective(p: &Polyhedron, b: &Basis) -> Result<Vector> {
    initial_objective_bits(p, b, numeric::DEFAULT_DENOM_BITS)
}

fn initial_objective_bits(p: &Polyhedron, b: &Basis, bits: u32) -> Result<Vector> {
    p.feasible_vertex(b)?;
    let mut c = vec![Rational::zero(); p.dim()];
    for &i in b.indices() {
        let s = inv_sqrt_upper(&p.row_norm_sq(i), bits);
        numeric::axpy(&mut c, &s, p.row(i));
    }
    Ok(c)
}

/// Picks `i*` with `λ_{i*} > 1/n`: largest λ, ties to the smallest index.
pub fn snap_choose_index(lambdas: &[(usize, Rational)], n: usize) -> Result<usize> {
    let keys: Vec<(usize, Rational)> = lambdas.iter().map(|(i, l)| (*i, l * l.abs())).collect();
    choose_by_signed_square(&keys, n)
}

/// Same as [`snap_choose_index`] with keys `sign(λ)·λ²`.
fn choose_by_signed_square(keys: &[(usize, Rational)], n: usize) -> Result<usize> {
    let threshold = int((n * n) as i64).recip();
    keys.iter()
        .filter(|(_, k)| *k > threshold)
        .min_by(|(i, a), (j, b)| b.cmp(a).then(i.cmp(j)))
        .map(|(i, _)| *i)
        .ok_or(Error::NoLargeCoefficient)
}

/// Facet `{x ∈ P : ⟨a_{i*}, x⟩ = b_{i*}}` in coordinates `x = origin + Σ tₗ qₗ`.
#[derive(Clone, Debug)]
pub struct FacetProjection {
    pub poly: Polyhedron,
    /// Parent row of each row of `poly`. Rows that project to zero are dropped.
    pub row_map: Vec<usize>,
    pub origin: Vector,
    /// Orthogonal (not normalized) frame of the facet's direction space.
    pub frame: Vec<Vector>,
}

impl FacetProjection {
    /// Facet coordinates → parent coordinates.
    pub fn lift(&self, t: &[Rational]) -> Vector {
        let mut x = self.origin.clone();
        for (tl, q) in t.iter().zip(&self.frame) {
            numeric::axpy(&mut x, tl, q);
        }
        x
    }

    /// Objective on the facet; agrees with `c` up to a constant.
    pub fn restrict(&self, c: &[Rational]) -> Vector {
        self.frame.iter().map(|q| dot(c, q)).collect()
    }

    /// Position of a parent row in the projected system.
    pub fn child_row(&self, parent: usize) -> Option<usize> {
        self.row_map.iter().position(|&r| r == parent)
    }
}

fn primitive(v: &[Rational]) -> Vector {
    let l = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Rational::from_integer(x / &g)).collect()
}

pub fn project_facet(p: &Polyhedron, istar: usize) -> Result<FacetProjection> {
    let n = p.dim();
    if n < 2 {
        return Err(Error::BadParams("cannot project a 1-dimensional polyhedron".into()));
    }
    let a = p.row(istar);
    let w: Vector = match p.weights() {
        Some(w) => w.to_vec(),
        None => vec![Rational::one(); n],
    };
    // Riesz image of a under the primal metric diag(1/w)
    let wa: Vector = a.iter().zip(&w).map(|(x, y)| x * y).collect();
    let awa = dot(a, &wa);
    if awa.is_zero() {
        return Err(Error::ZeroRow(istar));
    }
    let primal = |x: &[Rational], y: &[Rational]| -> Rational {
        x.iter()
            .zip(y)
            .zip(&w)
            .fold(Rational::zero(), |acc, ((u, v), wk)| acc + u * v / wk)
    };
    let origin = numeric::scale(&wa, &(&p.rhs()[istar] / &awa));
    let mut frame: Vec<Vector> = Vec::with_capacity(n - 1);
    for k in 0..n {
        if frame.len() == n - 1 {
            break;
        }
        let mut v = numeric::scale(&wa, &(-&a[k] / &awa));
        v[k] += Rational::one();
        for q in &frame {
            let coef = primal(&v, q) / primal(q, q);
            numeric::axpy(&mut v, &-coef, q);
        }
        if !numeric::is_zero_vec(&v) {
            frame.push(primitive(&v));
        }
    }
    let weights: Vector = frame.iter().map(|q| primal(q, q).recip()).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut row_map = Vec::new();
    for j in 0..p.num_rows() {
        if j == istar {
            continue;
        }
        let r: Vector = frame.iter().map(|q| dot(p.row(j), q)).collect();
        if numeric::is_zero_vec(&r) {
            continue;
        }
        rhs.push(&p.rhs()[j] - dot(p.row(j), &origin));
        rows.push(r);
        row_map.push(j);
    }
    let poly = Polyhedron::with_weights(Matrix::from_rows(rows)?, rhs, weights)?;
    Ok(FacetProjection {
        poly,
        row_map,
        origin,
        frame,
    })
}

/// Optimal basis for `d`, starting from the feasible basis `b`.
///
/// `delta_sq` is the (squared) local δ-distance assumed for `p`. When it is
/// too optimistic the answer may fail the final optimality check, reported as
/// `DeltaOverestimated`.
pub fn phase2_optimize<R: Rng + ?Sized>(
    p: &Polyhedron,
    delta_sq: &Rational,
    b: &Basis,
    d: &[Rational],
    rng: &mut R,
) -> Result<Phase2Outcome> {
    phase2_optimize_with(p, delta_sq, b, d, rng, &Phase2Options::default())
}

pub fn phase2_optimize_with<R: Rng + ?Sized>(
    p: &Polyhedron,
    delta_sq: &Rational,
    b: &Basis,
    d: &[Rational],
    rng: &mut R,
    opts: &Phase2Options,
) -> Result<Phase2Outcome> {
    if d.len() != p.dim() {
        return Err(crate::error::NumericError::DimensionMismatch.into());
    }
    if !delta_sq.is_positive() || *delta_sq > Rational::one() {
        return Err(Error::BadParams("delta_sq must lie in (0, 1]".into()));
    }
    p.feasible_vertex(b)?;
    let mut out = Phase2Outcome {
        basis: b.clone(),
        frames: Vec::new(),
        traces: Vec::new(),
    };
    let to_root: Vec<usize> = (0..p.num_rows()).collect();
    let basis = match solve_level(p, delta_sq, b, d, rng, opts, &to_root, &[], &mut out) {
        Err(Error::NoLargeCoefficient) => return Err(Error::DeltaOverestimated),
        other => other?,
    };
    if !p.is_feasible_basis(&basis) || !normal_cone_membership(p, &basis, d)? {
        return Err(Error::DeltaOverestimated);
    }
    out.basis = basis;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn solve_level<R: Rng + ?Sized>(
    p: &Polyhedron,
    delta_sq: &Rational,
    b: &Basis,
    d: &[Rational],
    rng: &mut R,
    opts: &Phase2Options,
    to_root: &[usize],
    fixed: &[usize],
    out: &mut Phase2Outcome,
) -> Result<Basis> {
    let k = p.dim();
    if numeric::is_zero_vec(d) {
        return Ok(b.clone());
    }
    let bits = opts.denom_bits;
    let denom = pow2(bits);
    let c = initial_objective_bits(p, b, bits)?;
    let d_s = numeric::scale(d, &(int(2) * inv_sqrt_upper(&p.norm_sq(d), bits)));
    let kk = int(k as i64);
    let step = sqrt_lower(delta_sq, bits) / (int(2) * &kk * &kk * &kk);
    let inv_sqrt_w: Vec<f64> = match p.weights() {
        Some(w) => w.iter().map(|x| 1.0 / numeric::to_f64(x).sqrt()).collect(),
        None => vec![1.0; k],
    };

    let mut retries = 0;
    let (reached, d_tilde, trace) = loop {
        let x: Vector = if opts.force_zero_x {
            vec![Rational::zero(); k]
        } else {
            let s = sample_conditioned(k, rng, 2.0 * k as f64)?;
            let z: Vec<f64> = s.x.iter().zip(&inv_sqrt_w).map(|(a, b)| a * b).collect();
            crate::sampler::rationalize(&z, &denom)
        };
        let mut d_tilde = d_s.clone();
        numeric::axpy(&mut d_tilde, &step, &x);
        let waypoints = vec![c.clone(), numeric::add(&c, &x), numeric::add(&d_s, &x), d_tilde.clone()];
        match follow_segment_chain(p, &waypoints, b) {
            Ok((reached, t)) => break (reached, d_tilde, t),
            Err(Error::DegenerateSegment(_)) if !opts.force_zero_x && retries < opts.max_retries => {
                retries += 1;
            }
            Err(Error::DegenerateSegment(_)) => return Err(Error::RetriesExhausted(retries + 1)),
            Err(e) => return Err(e),
        }
    };

    let mu = cone_coefficients(p, &reached, &d_tilde)?;
    let keys: Vec<(usize, Rational)> = reached
        .indices()
        .iter()
        .zip(&mu)
        .map(|(&i, m)| {
            let sq = m * m * p.row_norm_sq(i);
            (i, if m.is_negative() { -sq } else { sq })
        })
        .collect();
    let istar = choose_by_signed_square(&keys, k)?;
    let mut fixed_now = fixed.to_vec();
    fixed_now.push(to_root[istar]);
    out.frames.push(RecursionFrame {
        dim: k,
        fixed: fixed_now.clone(),
        pivots: trace.pivots(),
        retries,
    });
    out.traces.push(trace);
    if k == 1 {
        return Ok(Basis::new(vec![istar]));
    }

    let proj = project_facet(p, istar)?;
    let sub_b = Basis::new(
        reached
            .indices()
            .iter()
            .filter(|&&i| i != istar)
            .map(|&i| proj.child_row(i).ok_or_else(|| Error::Internal("basis row vanished on facet".into())))
            .collect::<Result<Vec<_>>>()?,
    );
    let sub_d = proj.restrict(d);
    let sub_root: Vec<usize> = proj.row_map.iter().map(|&r| to_root[r]).collect();
    let sub = solve_level(&proj.poly, delta_sq, &sub_b, &sub_d, rng, opts, &sub_root, &fixed_now, out)?;
    let mut idx: Vec<usize> = sub.indices().iter().map(|&j| proj.row_map[j]).collect();
    idx.push(istar);
    Ok(Basis::new(idx))
}

/// Retries with δ halved (δ² quartered) while the result fails verification.
#[derive(Clone, Debug)]
pub struct HalvingOutcome {
    pub outcome: Phase2Outcome,
    pub delta_sq: Rational,
    pub halvings: usize,
}

pub fn optimize_with_halving<R: Rng + ?Sized>(
    p: &Polyhedron,
    delta_sq: &Rational,
    b: &Basis,
    d: &[Rational],
    rng: &mut R,
    opts: &Phase2Options,
    max_halvings: usize,
) -> Result<HalvingOutcome> {
    let mut ds = delta_sq.clone().min(Rational::one());
    for halvings in 0..=max_halvings {
        match phase2_optimize_with(p, &ds, b, d, rng, opts) {
            Ok(outcome) => {
                return Ok(HalvingOutcome {
                    outcome,
                    delta_sq: ds,
                    halvings,
                })
            }
            Err(Error::DeltaOverestimated) => ds /= int(4),
            Err(e) => return Err(e),
        }
    }
    Err(Error::DeltaOverestimated)
}

/// Explicit per-level bound on the expected number of pivots,
/// `2(2n²/δ·ln(2n/δ) + n‖d−c‖/δ + 2n²/δ·ln(2n³/δ))`, in floating point.
pub fn pivot_bound(n: usize, delta: f64, dist: f64) -> f64 {
    let n = n as f64;
    2.0 * (2.0 * n * n / delta * (2.0 * n / delta).ln()
        + n * dist / delta
        + 2.0 * n * n / delta * (2.0 * n.powi(3) / delta).ln())
}
