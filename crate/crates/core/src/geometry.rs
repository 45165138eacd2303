//! Polyhedra `{x : Ax ≤ b}`, bases, δ-distance and width certification.
//!
//! Norms are irrational in general, so every δ, τ and norm is carried as an
//! exact squared rational. Row normalization `aᵢ/‖aᵢ‖` is never formed; the
//! formulas are rearranged to only need `‖aᵢ‖²`.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::error::{Error, NumericError, Result};
use crate::numeric::{
    self, dot, format_rational, int, solve_square, sqrt_upper, Matrix, Rational, Vector,
};

/// Sorted set of row indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Basis(Vec<usize>);

impl Basis {
    pub fn new(mut idx: Vec<usize>) -> Self {
        idx.sort_unstable();
        idx.dedup();
        Basis(idx)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Number of rows shared with `other`.
    pub fn overlap(&self, other: &Basis) -> usize {
        self.0.iter().filter(|i| other.contains(**i)).count()
    }
}

impl From<&[usize]> for Basis {
    fn from(v: &[usize]) -> Self {
        Basis::new(v.to_vec())
    }
}

/// `P = {x ∈ ℝⁿ : Ax ≤ b}` with `A` of full column rank.
///
/// `weights` is an optional diagonal inner product on row vectors
/// (`⟨r, s⟩ = Σ wₖ rₖ sₖ`). It is `None` for ordinary Euclidean instances and
/// is set on facet projections, whose rows are expressed in a rational frame
/// that is orthogonal but not orthonormal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyhedron {
    a: Matrix,
    b: Vector,
    weights: Option<Vector>,
}

impl Polyhedron {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(NumericError::DimensionMismatch.into());
        }
        if a.cols() == 0 {
            return Err(Error::BadParams("dimension must be positive".into()));
        }
        if a.rank() != a.cols() {
            return Err(Error::NotPointed);
        }
        Ok(Polyhedron {
            a,
            b,
            weights: None,
        })
    }

    /// Instance in a weighted frame; weights must be positive.
    pub fn with_weights(a: Matrix, b: Vector, weights: Vector) -> Result<Self> {
        if weights.len() != a.cols() || weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::BadParams("weights must be positive, one per column".into()));
        }
        let mut p = Self::new(a, b)?;
        if weights.iter().any(|w| !w.is_one()) {
            p.weights = Some(weights);
        }
        Ok(p)
    }

    pub fn from_i64(a: &[&[i64]], b: &[i64]) -> Result<Self> {
        Self::new(Matrix::from_i64(a), numeric::vec_i64(b))
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn num_rows(&self) -> usize {
        self.a.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.b
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        self.a.row(i)
    }

    pub fn weights(&self) -> Option<&[Rational]> {
        self.weights.as_deref()
    }

    /// Inner product of two row-space vectors (objectives, constraint normals).
    pub fn inner(&self, u: &[Rational], v: &[Rational]) -> Rational {
        weighted_dot(self.weights(), u, v)
    }

    pub fn norm_sq(&self, u: &[Rational]) -> Rational {
        self.inner(u, u)
    }

    pub fn row_norm_sq(&self, i: usize) -> Rational {
        self.norm_sq(self.row(i))
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        (0..self.num_rows()).all(|i| dot(self.row(i), x) <= self.b[i])
    }

    pub fn tight_rows(&self, x: &[Rational]) -> Vec<usize> {
        (0..self.num_rows())
            .filter(|&i| dot(self.row(i), x) == self.b[i])
            .collect()
    }

    /// Point `A_B⁻¹ b_B`.
    pub fn basis_point(&self, basis: &Basis) -> Result<Vector> {
        if basis.len() != self.dim() {
            return Err(NumericError::DimensionMismatch.into());
        }
        let ab = self.a.select_rows(basis.indices());
        let bb: Vector = basis.indices().iter().map(|&i| self.b[i].clone()).collect();
        solve_square(&ab, &bb).map_err(|e| match e {
            NumericError::SingularMatrix => NumericError::SingularBasis.into(),
            other => other.into(),
        })
    }

    pub fn is_feasible_basis(&self, basis: &Basis) -> bool {
        self.basis_point(basis).is_ok_and(|x| self.contains(&x))
    }

    /// Vertex of a feasible basis, or `InfeasibleBasis`.
    pub fn feasible_vertex(&self, basis: &Basis) -> Result<Vector> {
        let x = self.basis_point(basis)?;
        if self.contains(&x) {
            Ok(x)
        } else {
            Err(Error::InfeasibleBasis)
        }
    }

    /// Sub-system on the given rows (in the given order).
    pub fn select_rows(&self, idx: &[usize]) -> Result<Polyhedron> {
        let a = self.a.select_rows(idx);
        let b = idx.iter().map(|&i| self.b[i].clone()).collect();
        let mut p = Polyhedron::new(a, b)?;
        p.weights = self.weights.clone();
        Ok(p)
    }

    /// Copy with extra rows appended.
    pub fn with_rows(&self, rows: &[Vector], rhs: &[Rational]) -> Result<Polyhedron> {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        for (r, v) in rows.iter().zip(rhs) {
            a.push_row(r.clone())?;
            b.push(v.clone());
        }
        let mut p = Polyhedron::new(a, b)?;
        p.weights = self.weights.clone();
        Ok(p)
    }

    /// All feasible bases, by brute force over row subsets of size n.
    pub fn feasible_bases(&self) -> Vec<(Basis, Vector)> {
        (0..self.num_rows())
            .combinations(self.dim())
            .filter_map(|idx| {
                let basis = Basis::new(idx);
                let x = self.basis_point(&basis).ok()?;
                self.contains(&x).then_some((basis, x))
            })
            .collect()
    }

    /// Recession cone `{x : Ax ≤ 0}` is `{0}`.
    ///
    /// Any nonzero recession direction of a pointed cone is a conic
    /// combination of extreme rays, and every extreme ray is cut out by n−1
    /// independent rows.
    pub fn is_bounded(&self) -> bool {
        let n = self.dim();
        let m = self.num_rows();
        for idx in (0..m).combinations(n - 1) {
            let sub = if idx.is_empty() {
                Matrix::zeros(0, n)
            } else {
                self.a.select_rows(&idx)
            };
            let ns = if idx.is_empty() {
                (0..n)
                    .map(|k| {
                        let mut e = vec![Rational::zero(); n];
                        e[k] = Rational::one();
                        e
                    })
                    .collect()
            } else {
                numeric::null_space(&sub)
            };
            if ns.len() != 1 {
                if idx.is_empty() {
                    // n == 1: directions ±e₁
                } else {
                    continue;
                }
            }
            for r in &ns {
                for sign in [1i64, -1] {
                    let dir = numeric::scale(r, &int(sign));
                    if (0..m).all(|i| !dot(self.row(i), &dir).is_positive()) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Unperturbed optimal value check: `c ∈ cone{aᵢ : i ∈ B}`.
    pub fn objective_value(&self, basis: &Basis, c: &[Rational]) -> Result<Rational> {
        Ok(dot(c, &self.basis_point(basis)?))
    }
}

pub(crate) fn weighted_dot(w: Option<&[Rational]>, u: &[Rational], v: &[Rational]) -> Rational {
    match w {
        None => dot(u, v),
        Some(w) => u
            .iter()
            .zip(v)
            .zip(w)
            .fold(Rational::zero(), |acc, ((x, y), wk)| acc + x * y * wk),
    }
}

fn gram(rows: &[&[Rational]], w: Option<&[Rational]>) -> Matrix {
    let k = rows.len();
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = weighted_dot(w, rows[i], rows[j]);
            g[(j, i)] = v.clone();
            g[(i, j)] = v;
        }
    }
    g
}

/// δ² of an independent family, measured inside its own span.
///
/// With Gram matrix `G`, the squared distance of `vᵢ` to the span of the
/// others is `1/(G⁻¹)ᵢᵢ`, so `δᵢ² = 1/(Gᵢᵢ·(G⁻¹)ᵢᵢ)`. For n rows in ℝⁿ this
/// is `1/max‖uⱼ‖²` over the columns of the inverse of the normalized row
/// matrix.
pub(crate) fn delta_sq_weighted(rows: &[&[Rational]], w: Option<&[Rational]>) -> Result<Rational> {
    if rows.is_empty() {
        return Ok(Rational::one());
    }
    let g = gram(rows, w);
    let ginv = g.inverse().map_err(|_| Error::DependentRows)?;
    let mut best: Option<Rational> = None;
    for i in 0..rows.len() {
        let d = (&g[(i, i)] * &ginv[(i, i)]).recip();
        if best.as_ref().is_none_or(|b| &d < b) {
            best = Some(d);
        }
    }
    Ok(best.expect("nonempty"))
}

/// δ² of a basis given by its (unnormalized) rows.
pub fn delta_of_basis(rows: &[Vector]) -> Result<Rational> {
    let refs: Vec<&[Rational]> = rows.iter().map(Vec::as_slice).collect();
    delta_sq_weighted(&refs, None)
}

/// Smallest δ² over all feasible bases of `P` (local δ-distance).
pub fn local_delta(p: &Polyhedron) -> Result<Rational> {
    local_delta_with_witness(p).map(|(d, _)| d)
}

pub fn local_delta_with_witness(p: &Polyhedron) -> Result<(Rational, Basis)> {
    let mut best: Option<(Rational, Basis)> = None;
    for (basis, _) in p.feasible_bases() {
        let rows: Vec<&[Rational]> = basis.indices().iter().map(|&i| p.row(i)).collect();
        let d = delta_sq_weighted(&rows, p.weights())?;
        if best.as_ref().is_none_or(|(b, _)| &d < b) {
            best = Some((d, basis));
        }
    }
    best.ok_or(Error::NoFeasibleBasis)
}

/// Smallest δ² over every linearly independent subset of rows (global δ-distance).
pub fn global_delta(a: &Matrix) -> Rational {
    global_delta_weighted(a, None).0
}

pub(crate) fn global_delta_weighted(a: &Matrix, w: Option<&[Rational]>) -> (Rational, Vec<usize>) {
    let mut best = (Rational::one(), Vec::new());
    let rows: Vec<usize> = (0..a.rows()).filter(|&i| !numeric::is_zero_vec(a.row(i))).collect();
    for k in 2..=a.cols() {
        for idx in rows.iter().copied().combinations(k) {
            let sub: Vec<&[Rational]> = idx.iter().map(|&i| a.row(i)).collect();
            if let Ok(d) = delta_sq_weighted(&sub, w) {
                if d < best.0 {
                    best = (d, idx);
                }
            }
        }
    }
    best
}

/// Ball `center + radius·B₂ⁿ` certified to lie inside a simplicial cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidthCertificate {
    pub center: Vector,
    pub radius_sq: Rational,
    pub delta_sq: Rational,
    pub witness_basis: Vec<usize>,
}

impl WidthCertificate {
    /// For every dual vector `vᵢ*` (columns of the inverse generator matrix):
    /// `⟨vᵢ*, center⟩ ≥ ‖vᵢ*‖·radius`, checked exactly in squared form.
    pub fn verify(&self, generators: &[Vector]) -> Result<bool> {
        let m = Matrix::from_rows(generators.to_vec())?;
        let duals = numeric::inverse_columns(&m).map_err(|_| Error::DependentRows)?;
        Ok(duals.iter().all(|u| {
            let proj = dot(u, &self.center);
            !proj.is_negative() && &proj * &proj >= numeric::norm_sq(u) * &self.radius_sq
        }))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "delta_sq": format_rational(&self.delta_sq),
            "tau_sq": format_rational(&self.radius_sq),
            "center": self.center.iter().map(format_rational).collect::<Vec<_>>(),
            "witness_basis": self.witness_basis,
        })
    }
}

/// Rational `s ≥ 1/√r` at `bits` binary digits, exact when `r` is a square.
pub(crate) fn inv_sqrt_upper(r: &Rational, bits: u32) -> Rational {
    sqrt_upper(&r.recip(), bits)
}

pub(crate) fn inv_sqrt_lower(r: &Rational, bits: u32) -> Rational {
    numeric::sqrt_lower(&r.recip(), bits)
}

/// Certificate that `cone(v₁,…,vₙ)` is δ/n-wide: center `v̄ = Σ vᵢ/(n‖vᵢ‖)`
/// and radius `δ/n`.
///
/// `1/‖vᵢ‖` is rounded up to a dyadic rational when it is irrational; the
/// rounding only moves `v̄` deeper into the cone, so the δ/n ball stays
/// certified.
pub fn width_certificate_of_cone(generators: &[Vector]) -> Result<WidthCertificate> {
    let n = generators.len();
    if n == 0 || generators.iter().any(|g| g.len() != n) {
        return Err(NumericError::DimensionMismatch.into());
    }
    let delta_sq = delta_of_basis(generators)?;
    let mut center = vec![Rational::zero(); n];
    let inv_n = int(n as i64).recip();
    for g in generators {
        let s = inv_sqrt_upper(&numeric::norm_sq(g), numeric::DEFAULT_DENOM_BITS);
        numeric::axpy(&mut center, &(&s * &inv_n), g);
    }
    let radius_sq = &delta_sq * &inv_n * &inv_n;
    let cert = WidthCertificate {
        center,
        radius_sq,
        delta_sq,
        witness_basis: (0..n).collect(),
    };
    if !cert.verify(generators)? {
        return Err(Error::Internal("width certificate failed its own check".into()));
    }
    Ok(cert)
}

/// Lower bounds from the subdeterminants of an integral matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdeterminantBound {
    /// Largest absolute entry.
    pub delta_1: BigInt,
    /// Largest absolute (n−1)×(n−1) minor.
    pub delta_n1: BigInt,
    /// `1/(n Δ₁ Δ_{n−1})`, a global δ lower bound.
    pub delta: Rational,
    /// `1/(n² Δ₁ Δ_{n−1})`, a width lower bound for every polyhedron with this matrix.
    pub tau: Rational,
}

/// Largest absolute k×k minor over every k; exponential in the size of `a`.
pub fn max_subdeterminant(a: &Matrix) -> Result<BigInt> {
    if !a.is_integral() {
        return Err(Error::NonIntegralMatrix);
    }
    let mut best = BigInt::zero();
    for k in 1..=a.rows().min(a.cols()) {
        for rows in (0..a.rows()).combinations(k) {
            for cols in (0..a.cols()).combinations(k) {
                let sub = Matrix::from_rows(
                    rows.iter()
                        .map(|&i| cols.iter().map(|&j| a[(i, j)].clone()).collect())
                        .collect(),
                )?;
                let d = sub.determinant()?.abs().to_integer();
                if d > best {
                    best = d;
                }
            }
        }
    }
    Ok(best)
}

pub fn delta_from_subdeterminants(a: &Matrix) -> Result<SubdeterminantBound> {
    if !a.is_integral() {
        return Err(Error::NonIntegralMatrix);
    }
    let n = a.cols();
    let abs_int = |r: &Rational| r.abs().to_integer();
    let delta_1 = (0..a.rows())
        .flat_map(|i| a.row(i).iter().map(abs_int).collect::<Vec<_>>())
        .max()
        .unwrap_or_default();
    let delta_n1 = if n == 1 {
        BigInt::one()
    } else {
        let mut best = BigInt::zero();
        for rows in (0..a.rows()).combinations(n - 1) {
            for cols in (0..n).combinations(n - 1) {
                let sub = Matrix::from_rows(
                    rows.iter()
                        .map(|&i| cols.iter().map(|&j| a[(i, j)].clone()).collect())
                        .collect(),
                )?;
                let d = abs_int(&sub.determinant()?);
                if d > best {
                    best = d;
                }
            }
        }
        best
    };
    if delta_1.is_zero() || delta_n1.is_zero() {
        return Err(Error::ZeroSubdeterminants);
    }
    let prod = Rational::from_integer(&delta_1 * &delta_n1);
    let nn = int(n as i64);
    Ok(SubdeterminantBound {
        delta: (&nn * &prod).recip(),
        tau: (&nn * &nn * &prod).recip(),
        delta_1,
        delta_n1,
    })
}

/// `c ∈ cone{aᵢ : i ∈ B}`: solve `A_Bᵀ λ = c` and test `λ ≥ 0`.
pub fn normal_cone_membership(p: &Polyhedron, basis: &Basis, c: &[Rational]) -> Result<bool> {
    Ok(cone_coefficients(p, basis, c)?.iter().all(|l| !l.is_negative()))
}

/// Coefficients λ with `Σ λᵢ aᵢ = c` over the basis rows (in basis order).
pub fn cone_coefficients(p: &Polyhedron, basis: &Basis, c: &[Rational]) -> Result<Vector> {
    let abt = p.matrix().select_rows(basis.indices()).transpose();
    solve_square(&abt, c).map_err(|e| match e {
        NumericError::SingularMatrix => NumericError::SingularBasis.into(),
        other => other.into(),
    })
}

/// Undirected graph on `2k` vertices with a designated perfect matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingInstance {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    /// Indices into `edges`.
    pub matching: Vec<usize>,
}

impl MatchingInstance {
    pub fn complete(num_vertices: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..num_vertices).tuple_combinations().collect();
        let matching = (0..num_vertices / 2)
            .map(|k| {
                edges
                    .iter()
                    .position(|&e| e == (2 * k, 2 * k + 1))
                    .expect("complete graph edge")
            })
            .collect();
        MatchingInstance {
            num_vertices,
            edges,
            matching,
        }
    }

    pub fn cycle(num_vertices: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..num_vertices)
            .map(|i| {
                let j = (i + 1) % num_vertices;
                (i.min(j), i.max(j))
            })
            .collect();
        let matching = (0..num_vertices).step_by(2).collect();
        MatchingInstance {
            num_vertices,
            edges,
            matching,
        }
    }

    pub fn with_matching(&self, matching: Vec<usize>) -> Self {
        MatchingInstance {
            matching,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.num_vertices.is_multiple_of(2) {
            return Err(Error::NotPerfectMatching("odd vertex count".into()));
        }
        if self.matching.len() != self.num_vertices / 2 {
            return Err(Error::NotPerfectMatching("wrong number of edges".into()));
        }
        let mut covered = vec![false; self.num_vertices];
        for &e in &self.matching {
            let &(u, v) = self
                .edges
                .get(e)
                .ok_or_else(|| Error::NotPerfectMatching(format!("edge index {e} out of range")))?;
            for x in [u, v] {
                if x >= self.num_vertices || covered[x] {
                    return Err(Error::NotPerfectMatching(format!("vertex {x} covered twice")));
                }
                covered[x] = true;
            }
        }
        Ok(())
    }

    /// Every perfect matching of the graph, as sorted edge-index lists.
    pub fn perfect_matchings(&self) -> Vec<Vec<usize>> {
        let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (idx, &(u, v)) in self.edges.iter().enumerate() {
            adj.entry(u).or_default().push((v, idx));
            adj.entry(v).or_default().push((u, idx));
        }
        let mut out = Vec::new();
        let mut used = vec![false; self.num_vertices];
        let mut chosen = Vec::new();
        fn rec(
            adj: &BTreeMap<usize, Vec<(usize, usize)>>,
            used: &mut Vec<bool>,
            chosen: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            let Some(u) = used.iter().position(|x| !x) else {
                let mut m = chosen.clone();
                m.sort_unstable();
                out.push(m);
                return;
            };
            used[u] = true;
            for &(v, e) in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if !used[v] {
                    used[v] = true;
                    chosen.push(e);
                    rec(adj, used, chosen, out);
                    chosen.pop();
                    used[v] = false;
                }
            }
            used[u] = false;
        }
        rec(&adj, &mut used, &mut chosen, &mut out);
        out
    }
}

/// Odd-set width certificate for a vertex `χ_M` of the perfect matching polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingCertificate {
    /// `w = Σ_{U∈𝒰} −χ_{δ(U)}`, one entry per edge.
    pub w: Vec<i64>,
    pub odd_sets: Vec<BTreeSet<usize>>,
    pub w_norm_sq: i64,
    /// Radius of the ball around `w` (squared); always 4.
    pub radius_sq: Rational,
    /// `4/‖w‖²`.
    pub tau_sq: Rational,
    /// `w(e) = −2` on every matching edge.
    pub matched_edges_ok: bool,
    /// `w(e) ∈ {−4, −6}` on every other edge.
    pub unmatched_edges_ok: bool,
}

impl MatchingCertificate {
    pub fn tau_bound_holds(&self, num_edges: usize) -> bool {
        // 4/‖w‖² ≥ 1/(9|E|)
        self.tau_sq >= int(9 * num_edges as i64).recip()
    }
}

/// Builds `w` from the 3-element odd sets `{u_k, v_k, w}` with
/// `w ∈ {u_{k+1}, v_{k+1}}` (indices mod the matching size).
pub fn matching_width_certificate(g: &MatchingInstance) -> Result<MatchingCertificate> {
    g.validate()?;
    let k = g.matching.len();
    let pairs: Vec<(usize, usize)> = g.matching.iter().map(|&e| g.edges[e]).collect();
    let mut odd_sets = Vec::with_capacity(2 * k);
    for (idx, &(u, v)) in pairs.iter().enumerate() {
        let (nu, nv) = pairs[(idx + 1) % k];
        for w in [nu, nv] {
            odd_sets.push(BTreeSet::from([u, v, w]));
        }
    }
    let w: Vec<i64> = g
        .edges
        .iter()
        .map(|&(x, y)| {
            -(odd_sets
                .iter()
                .filter(|s| s.contains(&x) != s.contains(&y))
                .count() as i64)
        })
        .collect();
    let w_norm_sq: i64 = w.iter().map(|x| x * x).sum();
    let in_matching: BTreeSet<usize> = g.matching.iter().copied().collect();
    let matched_edges_ok = g.matching.iter().all(|&e| w[e] == -2);
    let unmatched_edges_ok = (0..g.edges.len())
        .filter(|e| !in_matching.contains(e))
        .all(|e| w[e] == -4 || w[e] == -6);
    Ok(MatchingCertificate {
        radius_sq: int(4),
        tau_sq: Rational::new(BigInt::from(4), BigInt::from(w_norm_sq.max(1))),
        w,
        odd_sets,
        w_norm_sq,
        matched_edges_ok,
        unmatched_edges_ok,
    })
}

/// One neighbour `χ_N` of `χ_M` (symmetric difference is a single cycle `C`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleCheck {
    pub other: Vec<usize>,
    pub cycle_len: usize,
    /// `⟨χ_{C∩M} − χ_{C∖M}, w⟩`
    pub inner: i64,
}

impl CycleCheck {
    pub fn holds(&self) -> bool {
        self.inner >= self.cycle_len as i64
    }
}

/// Checks `⟨v, w⟩ ≥ |C|` against every matching adjacent to `M`.
pub fn matching_cycle_checks(g: &MatchingInstance, w: &[i64]) -> Vec<CycleCheck> {
    let m: BTreeSet<usize> = g.matching.iter().copied().collect();
    g.perfect_matchings()
        .into_iter()
        .filter_map(|other| {
            let n: BTreeSet<usize> = other.iter().copied().collect();
            let diff: Vec<usize> = m.symmetric_difference(&n).copied().collect();
            if diff.is_empty() || !is_single_cycle(&g.edges, &diff) {
                return None;
            }
            let inner = diff
                .iter()
                .map(|&e| if m.contains(&e) { w[e] } else { -w[e] })
                .sum();
            Some(CycleCheck {
                other,
                cycle_len: diff.len(),
                inner,
            })
        })
        .collect()
}

fn is_single_cycle(edges: &[(usize, usize)], subset: &[usize]) -> bool {
    let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in subset {
        let (u, v) = edges[e];
        *deg.entry(u).or_default() += 1;
        *deg.entry(v).or_default() += 1;
    }
    if deg.values().any(|&d| d != 2) {
        return false;
    }
    // connectivity: walk from the first edge
    let mut seen = BTreeSet::new();
    let mut stack = vec![edges[subset[0]].0];
    while let Some(x) = stack.pop() {
        if !seen.insert(x) {
            continue;
        }
        for &e in subset {
            let (u, v) = edges[e];
            if u == x {
                stack.push(v);
            } else if v == x {
                stack.push(u);
            }
        }
    }
    seen.len() == deg.len()
}
