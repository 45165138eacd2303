//! LP-equivalent polytopes for unbounded pointed polyhedra.
//!
//! Both transforms add constraints that are strictly slack at every vertex of
//! the input, using the vertex-norm bound `‖x‖ ≤ n·b_max/δ`. Square roots are
//! replaced by rational upper bounds, which only loosens the new rows.

use num_traits::{One, Zero};
use serde_json::json;

use crate::error::Result;
use crate::geometry::{inv_sqrt_lower, Basis, Polyhedron};
use crate::numeric::{self, format_rational, int, sqrt_upper, Rational, Vector, DEFAULT_DENOM_BITS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundingReport {
    pub original_rows: usize,
    pub added_rows: Vec<Vector>,
    pub added_rhs: Vec<Rational>,
    /// δ² the new system is claimed to satisfy.
    pub delta_sq_after: Rational,
    pub b_max_sq: Rational,
}

impl BoundingReport {
    pub fn to_json(&self) -> serde_json::Value {
        let fmt = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>();
        json!({
            "original_rows": self.original_rows,
            "added_rows": self.added_rows.iter().map(|r| fmt(r)).collect::<Vec<_>>(),
            "added_rhs": fmt(&self.added_rhs),
            "delta_sq_after": format_rational(&self.delta_sq_after),
            "b_max_sq": format_rational(&self.b_max_sq),
        })
    }
}

/// `max bᵢ²/‖aᵢ‖²` over the nonzero rows.
pub fn compute_b_max(p: &Polyhedron) -> Rational {
    (0..p.num_rows())
        .filter_map(|i| {
            let nrm = p.row_norm_sq(i);
            (!nrm.is_zero()).then(|| &p.rhs()[i] * &p.rhs()[i] / nrm)
        })
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Rational upper bound on `n·b_max/δ`, plus one.
///
/// The extra unit keeps the new rows strictly slack in the cases where the
/// Cauchy–Schwarz step is tight (n = 1, or all of b zero).
fn vertex_norm_bound(n: usize, b_max_sq: &Rational, delta_sq: &Rational, scale_sq: &Rational) -> Rational {
    let nn = int((n * n) as i64);
    sqrt_upper(&(nn * b_max_sq * scale_sq / delta_sq), DEFAULT_DENOM_BITS) + Rational::one()
}

/// Adds one row `⟨w, x⟩ ≤ n·b_max/δ` with `w = −(1/n)·Σ_{i∈I} aᵢ/‖aᵢ‖`.
pub fn bound_local(p: &Polyhedron, basis: &Basis, delta_sq: &Rational) -> Result<(Polyhedron, BoundingReport)> {
    p.feasible_vertex(basis)?;
    let n = p.dim();
    let inv_n = int(n as i64).recip();
    let mut w = vec![Rational::zero(); n];
    for &i in basis.indices() {
        let s = inv_sqrt_lower(&p.row_norm_sq(i), DEFAULT_DENOM_BITS);
        numeric::axpy(&mut w, &(-&s * &inv_n), p.row(i));
    }
    let b_max_sq = compute_b_max(p);
    let rhs = vertex_norm_bound(n, &b_max_sq, delta_sq, &Rational::one());
    let out = p.with_rows(std::slice::from_ref(&w), std::slice::from_ref(&rhs))?;
    let nn4 = int(4 * (n * n) as i64);
    Ok((
        out,
        BoundingReport {
            original_rows: p.num_rows(),
            added_rows: vec![w],
            added_rhs: vec![rhs],
            delta_sq_after: delta_sq * delta_sq / nn4,
            b_max_sq,
        },
    ))
}

/// Adds `−⟨aᵢ, x⟩ ≤ n‖aᵢ‖·b_max/δ + 1` for every row.
pub fn bound_global(p: &Polyhedron, delta_sq: &Rational) -> Result<(Polyhedron, BoundingReport)> {
    let n = p.dim();
    let b_max_sq = compute_b_max(p);
    let mut rows = Vec::with_capacity(p.num_rows());
    let mut rhs = Vec::with_capacity(p.num_rows());
    for i in 0..p.num_rows() {
        rows.push(p.row(i).iter().map(|v| -v).collect::<Vector>());
        rhs.push(vertex_norm_bound(n, &b_max_sq, delta_sq, &p.row_norm_sq(i)));
    }
    let out = p.with_rows(&rows, &rhs)?;
    Ok((
        out,
        BoundingReport {
            original_rows: p.num_rows(),
            added_rows: rows,
            added_rhs: rhs,
            delta_sq_after: delta_sq.clone(),
            b_max_sq,
        },
    ))
}
