//! Phase 1: find a feasible basis or show that `Ax ≤ b` is empty.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde_json::json;

use crate::bounding::bound_global;
use crate::error::{Error, Result};
use crate::geometry::{Basis, Polyhedron};
use crate::numeric::{self, dot, format_rational, int, Matrix, Rational, Vector};
use crate::optimize::{optimize_with_halving, Phase2Options};
use crate::pivot::shadow_simplex;

/// Halvings of δ tried before giving up.
const MAX_HALVINGS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RayCast {
    pub basis: Basis,
    pub vertex: Vector,
    /// Number of moves made.
    pub casts: usize,
}

/// Walks from a feasible point to a vertex by moving along directions that
/// keep the current tight rows tight, until n independent rows are tight.
pub fn ray_cast_to_basis(p: &Polyhedron, x0: &[Rational]) -> Result<RayCast> {
    let n = p.dim();
    if x0.len() != n {
        return Err(crate::error::NumericError::DimensionMismatch.into());
    }
    if !p.contains(x0) {
        return Err(Error::InfeasiblePoint);
    }
    let mut x = x0.to_vec();
    let mut casts = 0;
    loop {
        let mut tight: Vec<usize> = Vec::new();
        for i in p.tight_rows(&x) {
            let mut cand: Vec<&[Rational]> = tight.iter().map(|&j| p.row(j)).collect();
            cand.push(p.row(i));
            if numeric::rank_of_rows(&cand) == cand.len() {
                tight.push(i);
            }
            if tight.len() == n {
                break;
            }
        }
        if tight.len() == n {
            return Ok(RayCast {
                basis: Basis::new(tight),
                vertex: x,
                casts,
            });
        }
        let dir = if tight.is_empty() {
            let mut e = vec![Rational::zero(); n];
            e[0] = Rational::one();
            e
        } else {
            let sub = p.matrix().select_rows(&tight);
            numeric::null_space(&sub).into_iter().next().ok_or(Error::NotPointed)?
        };
        let mut moved = false;
        for sign in [1i64, -1] {
            let r = numeric::scale(&dir, &int(sign));
            let mut step: Option<Rational> = None;
            for j in 0..p.num_rows() {
                let ar = dot(p.row(j), &r);
                if ar.is_positive() {
                    let t = (&p.rhs()[j] - dot(p.row(j), &x)) / ar;
                    if step.as_ref().is_none_or(|s| &t < s) {
                        step = Some(t);
                    }
                }
            }
            if let Some(t) = step {
                numeric::axpy(&mut x, &t, &r);
                moved = true;
                break;
            }
        }
        if !moved {
            return Err(Error::NotPointed);
        }
        casts += 1;
    }
}

/// Why a system was declared empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfeasibilityWitness {
    /// Optimal value of `min s` in the auxiliary program.
    Auxiliary { s: Rational },
    /// `min{⟨aᵢ, x⟩ : x ∈ P_I} = γ > bᵢ` in the round adding row `row`.
    Round { row: usize, gamma: Rational, rhs: Rational },
}

impl InfeasibilityWitness {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            InfeasibilityWitness::Auxiliary { s } => json!({"s": format_rational(s)}),
            InfeasibilityWitness::Round { row, gamma, rhs } => json!({
                "i": row,
                "gamma": format_rational(gamma),
                "b_i": format_rational(rhs),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Phase1Verdict {
    Feasible(RayCast),
    Infeasible(InfeasibilityWitness),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phase1Outcome {
    pub verdict: Phase1Verdict,
    pub rounds: usize,
    pub pivots: usize,
}

impl Phase1Outcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self.verdict, Phase1Verdict::Feasible(_))
    }

    pub fn basis(&self) -> Option<&Basis> {
        match &self.verdict {
            Phase1Verdict::Feasible(r) => Some(&r.basis),
            Phase1Verdict::Infeasible(_) => None,
        }
    }
}

/// Auxiliary program `min s` s.t. `⟨aᵢ, x⟩ − s ≤ bᵢ`, `s ≥ 0`, solved with
/// δ = 1/(n²Δ²) for an integral matrix whose subdeterminants are at most Δ.
pub fn phase1_subdeterminant<R: Rng + ?Sized>(p: &Polyhedron, delta_bound: &BigInt, rng: &mut R) -> Result<Phase1Outcome> {
    if !p.matrix().is_integral() {
        return Err(Error::NonIntegralMatrix);
    }
    if !delta_bound.is_positive() {
        return Err(Error::BadParams("subdeterminant bound must be positive".into()));
    }
    let n = p.dim();
    let m = p.num_rows();
    let mut rows: Vec<Vector> = (0..m)
        .map(|i| {
            let mut r = p.row(i).to_vec();
            r.push(int(-1));
            r
        })
        .collect();
    let mut rhs = p.rhs().to_vec();
    let mut last = vec![Rational::zero(); n + 1];
    last[n] = int(-1);
    rows.push(last);
    rhs.push(Rational::zero());
    let aux = Polyhedron::new(Matrix::from_rows(rows)?, rhs)?;

    let min_b = p.rhs().iter().cloned().min().unwrap_or_else(Rational::zero);
    let mut start = vec![Rational::zero(); n + 1];
    start[n] = if min_b.is_negative() { -min_b } else { Rational::zero() };
    let cast = ray_cast_to_basis(&aux, &start)?;

    let d_big = Rational::from_integer(delta_bound.clone());
    let nn = int(n as i64);
    let delta = (&nn * &nn * &d_big * &d_big).recip();
    let delta_sq = &delta * &delta;
    let (bounded, _) = bound_global(&aux, &delta_sq)?;
    let mut objective = vec![Rational::zero(); n + 1];
    objective[n] = int(-1);
    let opt = optimize_with_halving(
        &bounded,
        &delta_sq,
        &cast.basis,
        &objective,
        rng,
        &Phase2Options::default(),
        MAX_HALVINGS,
    )?;
    let x_aux = bounded.feasible_vertex(&opt.outcome.basis)?;
    let pivots = opt.outcome.pivots();
    let s = x_aux[n].clone();
    if s.is_zero() {
        let cast = ray_cast_to_basis(p, &x_aux[..n])?;
        Ok(Phase1Outcome {
            verdict: Phase1Verdict::Feasible(cast),
            rounds: 1,
            pivots,
        })
    } else {
        Ok(Phase1Outcome {
            verdict: Phase1Verdict::Infeasible(InfeasibilityWitness::Auxiliary { s }),
            rounds: 1,
            pivots,
        })
    }
}

/// First n independent rows, in input order.
fn gauss_basis(p: &Polyhedron) -> Result<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..p.num_rows() {
        let mut cand: Vec<&[Rational]> = chosen.iter().map(|&j| p.row(j)).collect();
        cand.push(p.row(i));
        if numeric::rank_of_rows(&cand) == cand.len() {
            chosen.push(i);
            if chosen.len() == p.dim() {
                return Ok(chosen);
            }
        }
    }
    Err(Error::NotPointed)
}

fn to_local(rows: &[usize], global: &Basis) -> Basis {
    Basis::new(
        global
            .indices()
            .iter()
            .map(|g| rows.iter().position(|r| r == g).expect("row in subsystem"))
            .collect(),
    )
}

fn to_global(rows: &[usize], local: &Basis) -> Basis {
    Basis::new(local.indices().iter().map(|&l| rows[l]).collect())
}

/// Adds the rows of `p` one at a time, keeping a feasible basis of the rows
/// seen so far; each round minimizes the next row over the current system.
pub fn phase1_global_delta<R: Rng + ?Sized>(p: &Polyhedron, delta_sq: &Rational, rng: &mut R) -> Result<Phase1Outcome> {
    let start = gauss_basis(p)?;
    let mut rows: Vec<usize> = start.clone();
    let mut basis = Basis::new(start.clone());
    let mut rounds = 0;
    let mut pivots = 0;
    for i in 0..p.num_rows() {
        if start.contains(&i) {
            continue;
        }
        rounds += 1;
        let sub = p.select_rows(&rows)?;
        let local = to_local(&rows, &basis);
        let (bounded, _) = bound_global(&sub, delta_sq)?;
        let d: Vector = p.row(i).iter().map(|v| -v).collect();
        let opt = optimize_with_halving(&bounded, delta_sq, &local, &d, rng, &Phase2Options::default(), MAX_HALVINGS)?;
        pivots += opt.outcome.pivots();
        let x = bounded.feasible_vertex(&opt.outcome.basis)?;
        let gamma = dot(p.row(i), &x);
        let b_i = p.rhs()[i].clone();

        let point = if gamma <= b_i {
            x
        } else if opt.outcome.basis.indices().iter().all(|&j| j < rows.len()) {
            return Ok(Phase1Outcome {
                verdict: Phase1Verdict::Infeasible(InfeasibilityWitness::Round { row: i, gamma, rhs: b_i }),
                rounds,
                pivots,
            });
        } else {
            // The bounded copy's optimum sits on an added row: either the
            // minimum over P_I is unbounded or it equals γ.
            match follow_to_ray(&sub, &local, p.row(i), &b_i, rng)? {
                RayOrOptimum::Ray(point) => point,
                RayOrOptimum::Optimum(gamma) => {
                    return Ok(Phase1Outcome {
                        verdict: Phase1Verdict::Infeasible(InfeasibilityWitness::Round { row: i, gamma, rhs: b_i }),
                        rounds,
                        pivots,
                    })
                }
            }
        };
        rows.push(i);
        let next = p.select_rows(&rows)?;
        let cast = ray_cast_to_basis(&next, &point)?;
        basis = to_global(&rows, &cast.basis);
    }
    let vertex = p.feasible_vertex(&basis)?;
    Ok(Phase1Outcome {
        verdict: Phase1Verdict::Feasible(RayCast {
            basis,
            vertex,
            casts: 0,
        }),
        rounds,
        pivots,
    })
}

enum RayOrOptimum {
    /// A point of `P_I` satisfying the new row.
    Ray(Vector),
    Optimum(Rational),
}

/// Shadow path on the unbounded `P_I` from an interior objective of `basis`
/// towards `−aᵢ`; on an unbounded edge, walk along it until `⟨aᵢ, x⟩ ≤ bᵢ`.
fn follow_to_ray<R: Rng + ?Sized>(
    sub: &Polyhedron,
    basis: &Basis,
    a: &[Rational],
    b: &Rational,
    rng: &mut R,
) -> Result<RayOrOptimum> {
    let d: Vector = a.iter().map(|v| -v).collect();
    let denom = numeric::pow2(32);
    for _ in 0..Phase2Options::default().max_retries {
        let mut c = vec![Rational::zero(); sub.dim()];
        for &j in basis.indices() {
            let w = Rational::one() + numeric::rational_from_f64(rng.random::<f64>(), &denom);
            numeric::axpy(&mut c, &w, sub.row(j));
        }
        match shadow_simplex(sub, &c, &d, basis) {
            Ok((opt, _)) => {
                let x = sub.feasible_vertex(&opt)?;
                return Ok(RayOrOptimum::Optimum(dot(a, &x)));
            }
            Err(Error::UnboundedDirection(ray)) => {
                // ⟨a, r⟩ < 0 along the ray, since −a improves on it
                let ar = dot(a, &ray.direction);
                if !ar.is_negative() {
                    return Err(Error::Internal("unbounded edge does not decrease the new row".into()));
                }
                let excess = dot(a, &ray.vertex) - b;
                let t = if excess.is_positive() { excess / -ar } else { Rational::zero() };
                let mut x = ray.vertex.clone();
                numeric::axpy(&mut x, &t, &ray.direction);
                return Ok(RayOrOptimum::Ray(x));
            }
            Err(Error::DegenerateSegment(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetriesExhausted(Phase2Options::default().max_retries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{ratio, vec_i64};
    use crate::sampler::trial_rng;

    fn unit_square() -> Polyhedron {
        Polyhedron::from_i64(&[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]], &[1, 1, 0, 0]).unwrap()
    }

    fn square_vertices() -> Vec<Vector> {
        unit_square().feasible_bases().into_iter().map(|(_, x)| x).collect()
    }

    #[test]
    fn ray_cast_examples() {
        let sq = unit_square();
        let r = ray_cast_to_basis(&sq, &vec_i64(&[1, 1])).unwrap();
        assert_eq!((r.casts, r.basis.clone()), (0, Basis::new(vec![0, 1])));

        let r = ray_cast_to_basis(&sq, &[ratio(1, 2), ratio(1, 2)]).unwrap();
        assert_eq!(r.casts, 2);
        assert!(square_vertices().contains(&r.vertex));
        assert_eq!(sq.feasible_vertex(&r.basis).unwrap(), r.vertex);

        let r = ray_cast_to_basis(&sq, &[int(1), ratio(1, 2)]).unwrap();
        assert_eq!(r.casts, 1);
        assert!(square_vertices().contains(&r.vertex));

        assert_eq!(ray_cast_to_basis(&sq, &vec_i64(&[2, 0])), Err(Error::InfeasiblePoint));
    }

    #[test]
    fn subdeterminant_phase1() {
        let mut rng = trial_rng(1, 0);
        let out = phase1_subdeterminant(&unit_square(), &BigInt::from(1), &mut rng).unwrap();
        assert!(out.is_feasible());
        assert!(unit_square().is_feasible_basis(out.basis().unwrap()));

        let empty = Polyhedron::from_i64(&[&[1], &[-1]], &[-1, -1]).unwrap();
        let out = phase1_subdeterminant(&empty, &BigInt::from(1), &mut rng).unwrap();
        assert_eq!(
            out.verdict,
            Phase1Verdict::Infeasible(InfeasibilityWitness::Auxiliary { s: int(1) })
        );

        // shifted square away from the origin
        let p = Polyhedron::from_i64(&[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]], &[5, 4, -3, -2]).unwrap();
        let out = phase1_subdeterminant(&p, &BigInt::from(1), &mut rng).unwrap();
        assert!(p.is_feasible_basis(out.basis().unwrap()));
    }

    #[test]
    fn global_phase1() {
        let mut rng = trial_rng(2, 0);
        let sq = Polyhedron::from_i64(&[&[1, 0], &[0, 1]], &[1, 1]).unwrap();
        let out = phase1_global_delta(&sq, &int(1), &mut rng).unwrap();
        assert_eq!(out.rounds, 0);
        assert_eq!(out.basis(), Some(&Basis::new(vec![0, 1])));

        let out = phase1_global_delta(&unit_square(), &int(1), &mut rng).unwrap();
        assert_eq!(out.rounds, 2);
        assert!(unit_square().is_feasible_basis(out.basis().unwrap()));

        // x ≥ 1, y ≥ 1, x + y ≤ 1
        let tri = Polyhedron::from_i64(&[&[-1, 0], &[0, -1], &[1, 1]], &[-1, -1, 1]).unwrap();
        let out = phase1_global_delta(&tri, &ratio(1, 2), &mut rng).unwrap();
        assert_eq!(
            out.verdict,
            Phase1Verdict::Infeasible(InfeasibilityWitness::Round { row: 2, gamma: int(2), rhs: int(1) })
        );
    }

    #[test]
    fn global_phase1_through_unbounded_round() {
        // first two rows form a cone opening towards −x; the third cuts it far away
        let p = Polyhedron::from_i64(&[&[1, 1], &[1, -1], &[-1, 0]], &[0, 0, 10]).unwrap();
        let mut rng = trial_rng(3, 0);
        let out = phase1_global_delta(&p, &ratio(1, 2), &mut rng).unwrap();
        assert!(p.is_feasible_basis(out.basis().unwrap()));
        let q = Polyhedron::from_i64(&[&[1, 1], &[1, -1], &[-1, 0]], &[0, 0, -1]).unwrap();
        let out = phase1_global_delta(&q, &ratio(1, 2), &mut rng).unwrap();
        assert!(!out.is_feasible());
        // cone x ≥ |y| cut by x ≥ 5: the bounded copy stops short of x = 5
        let r = Polyhedron::from_i64(&[&[-1, 1], &[-1, -1], &[-1, 0]], &[0, 0, -5]).unwrap();
        let out = phase1_global_delta(&r, &ratio(1, 2), &mut rng).unwrap();
        let basis = out.basis().unwrap();
        assert!(r.is_feasible_basis(basis));
        assert_eq!(r.feasible_vertex(basis).unwrap()[0], int(5));
    }
}
