//! The shadow simplex pivot loop: follow `c_λ = (1−λ)c + λd` through the
//! normal fan, resolving degeneracy with the symbolic right-hand side
//! `b + (ε, ε², …, εᵐ)`.
//!
//! The tableau is kept column-eliminated (`A' = A·U` with the basis rows equal
//! to the identity), so objective coefficients in the transformed frame are
//! exactly the cone coefficients of the current basis.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use serde_json::json;

use crate::error::{Error, Result, UnboundedRay};
use crate::geometry::{normal_cone_membership, Basis, Polyhedron};
use crate::numeric::{format_rational, gauss_column_transform, Matrix, Rational, Vector};
use crate::perturbation::{dot_eps, perturbed_rhs, EpsPoly};

/// One pivot: the parameter where the current basis stopped being optimal,
/// the row that left and the row that entered (original row numbering).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotRecord {
    /// Index of the segment within a waypoint chain.
    pub leg: usize,
    pub lambda: Rational,
    pub leave: usize,
    pub enter: usize,
    pub basis: Basis,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PivotTrace {
    pub records: Vec<PivotRecord>,
    /// Rough count of scalar arithmetic operations.
    pub ops: u64,
}

impl PivotTrace {
    pub fn pivots(&self) -> usize {
        self.records.len()
    }

    pub fn leg_pivots(&self, leg: usize) -> usize {
        self.records.iter().filter(|r| r.leg == leg).count()
    }

    pub fn extend(&mut self, other: PivotTrace) {
        self.records.extend(other.records);
        self.ops += other.ops;
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            let v = json!({
                "lambda": format_rational(&r.lambda),
                "leave": r.leave,
                "enter": r.enter,
            });
            s.push_str(&v.to_string());
            s.push('\n');
        }
        s
    }

    /// λ values of one leg are strictly increasing, except that the first may
    /// equal the start parameter 0.
    pub fn lambdas_increasing(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[0].leg != w[1].leg || w[0].lambda < w[1].lambda)
    }
}

/// Rows permuted so that the basis occupies the last n positions.
#[derive(Clone, Debug)]
pub struct Reordered {
    pub poly: Polyhedron,
    /// Basis as positions in the permuted system.
    pub basis: Basis,
    /// `perm[p]` is the original row at position `p`.
    pub perm: Vec<usize>,
}

pub fn reorder_for_perturbation(p: &Polyhedron, b: &Basis) -> Result<Reordered> {
    p.feasible_vertex(b)?;
    let m = p.num_rows();
    let perm: Vec<usize> = (0..m)
        .filter(|i| !b.contains(*i))
        .chain(b.indices().iter().copied())
        .collect();
    let poly = p.select_rows(&perm)?;
    let n = b.len();
    Ok(Reordered {
        poly,
        basis: Basis::new((m - n..m).collect()),
        perm,
    })
}

/// Pivot loop state. Owns a column-eliminated copy of the (reordered) system.
#[derive(Clone, Debug)]
pub struct PivotState {
    n: usize,
    /// `A·U`, rows in permuted order.
    at: Matrix,
    u: Matrix,
    rhs: Vec<EpsPoly>,
    /// `basis_pos[k]` = permuted row sitting at basis slot k.
    basis_pos: Vec<usize>,
    in_basis: Vec<bool>,
    perm: Vec<usize>,
    original: Polyhedron,
}

impl PivotState {
    /// Starts at a feasible basis of `p`. The perturbation is fixed here and
    /// reused for every segment followed from this state.
    pub fn new(p: &Polyhedron, b0: &Basis) -> Result<Self> {
        if b0.len() != p.dim() {
            return Err(Error::InfeasibleStart);
        }
        let re = match reorder_for_perturbation(p, b0) {
            Ok(r) => r,
            Err(Error::InfeasibleBasis) | Err(Error::Numeric(_)) => {
                return Err(Error::InfeasibleStart)
            }
            Err(e) => return Err(e),
        };
        let basis_pos = re.basis.indices().to_vec();
        let (at, u) = gauss_column_transform(re.poly.matrix(), &basis_pos)?;
        let mut in_basis = vec![false; p.num_rows()];
        for &k in &basis_pos {
            in_basis[k] = true;
        }
        Ok(PivotState {
            n: p.dim(),
            at,
            u,
            rhs: perturbed_rhs(re.poly.rhs()),
            basis_pos,
            in_basis,
            perm: re.perm,
            original: p.clone(),
        })
    }

    /// Current basis in original row numbering.
    pub fn basis(&self) -> Basis {
        Basis::new(self.basis_pos.iter().map(|&k| self.perm[k]).collect())
    }

    /// Unperturbed vertex `U·b_B`.
    pub fn vertex(&self) -> Vector {
        let y: Vector = self.basis_pos.iter().map(|&k| self.rhs[k].constant_term()).collect();
        self.u.mul_vec(&y).expect("square")
    }

    /// Perturbed vertex coordinates in the eliminated frame.
    pub fn perturbed_point(&self) -> Vec<EpsPoly> {
        self.basis_pos.iter().map(|&k| self.rhs[k].clone()).collect()
    }

    /// Cone coefficients of `c` with respect to the current basis, by slot.
    pub fn coefficients(&self, c: &[Rational]) -> Vector {
        self.u.tmul_vec(c).expect("dimension")
    }

    /// Follows `[c, d]` from the current basis, which must be optimal for `c`.
    pub fn follow(&mut self, c: &[Rational], d: &[Rational], leg: usize, trace: &mut PivotTrace) -> Result<()> {
        let n = self.n;
        let m = self.at.rows();
        if c.len() != n || d.len() != n {
            return Err(crate::error::NumericError::DimensionMismatch.into());
        }
        let mut cc = self.coefficients(c);
        let mut dd = self.coefficients(d);
        trace.ops += 2 * (n * n) as u64;
        if cc.iter().any(Signed::is_negative) {
            return Err(Error::InfeasibleStart);
        }
        let mut last: Option<Rational> = None;
        loop {
            // leaving slot: first coefficient of c_λ to hit zero
            let mut best: Option<(Rational, usize)> = None;
            let mut tie = false;
            for k in 0..n {
                if cc[k] > dd[k] {
                    let lam = &cc[k] / (&cc[k] - &dd[k]);
                    match &best {
                        Some((b, _)) if lam == *b => tie = true,
                        Some((b, _)) if lam > *b => {}
                        _ => {
                            best = Some((lam, k));
                            tie = false;
                        }
                    }
                }
            }
            trace.ops += 3 * n as u64;
            let Some((lambda, istar)) = best else {
                return Ok(());
            };
            if lambda >= Rational::from_integer(1.into()) {
                return Ok(());
            }
            if tie {
                return Err(Error::DegenerateSegment(lambda));
            }
            if let Some(prev) = &last {
                if lambda <= *prev {
                    return Err(Error::DegenerateSegment(lambda));
                }
            }

            // entering row: lexicographic min-ratio test on the perturbed system
            let y = self.perturbed_point();
            let mut enter: Option<(EpsPoly, usize)> = None;
            for j in 0..m {
                if self.in_basis[j] {
                    continue;
                }
                let a = &self.at[(j, istar)];
                if !a.is_negative() {
                    continue;
                }
                let slack = dot_eps(self.at.row(j), &y).sub(&self.rhs[j]);
                let ratio = slack.scale(&a.recip());
                match &enter {
                    None => enter = Some((ratio, j)),
                    Some((r, _)) => match ratio.cmp(r) {
                        Ordering::Less => enter = Some((ratio, j)),
                        Ordering::Equal => {
                            return Err(Error::Internal(
                                "tie in the perturbed ratio test".into(),
                            ))
                        }
                        Ordering::Greater => {}
                    },
                }
            }
            trace.ops += (m * n) as u64;
            let Some((_, jstar)) = enter else {
                let direction: Vector = self.u.column(istar).iter().map(|v| -v).collect();
                return Err(Error::UnboundedDirection(Box::new(UnboundedRay {
                    basis: self.basis().indices().to_vec(),
                    vertex: self.vertex(),
                    direction,
                    lambda,
                })));
            };

            let leave = self.perm[self.basis_pos[istar]];
            self.pivot(istar, jstar, &mut cc, &mut dd);
            trace.ops += (2 * m * n) as u64;
            trace.records.push(PivotRecord {
                leg,
                lambda: lambda.clone(),
                leave,
                enter: self.perm[jstar],
                basis: self.basis(),
            });
            last = Some(lambda);
        }
    }

    /// Rank-1 column update: row `jstar` replaces the row in slot `istar`.
    fn pivot(&mut self, istar: usize, jstar: usize, cc: &mut [Rational], dd: &mut [Rational]) {
        let n = self.n;
        let r: Vector = self.at.row(jstar).to_vec();
        let piv_inv = r[istar].recip();
        let update = |mat: &mut Matrix| {
            for row in 0..mat.rows() {
                let v = &mat[(row, istar)] * &piv_inv;
                for k in 0..n {
                    if k != istar && !r[k].is_zero() {
                        let delta = &r[k] * &v;
                        mat[(row, k)] -= delta;
                    }
                }
                mat[(row, istar)] = v;
            }
        };
        update(&mut self.at);
        update(&mut self.u);
        for obj in [cc, dd] {
            let v = &obj[istar] * &piv_inv;
            for k in 0..n {
                if k != istar {
                    obj[k] -= &r[k] * &v;
                }
            }
            obj[istar] = v;
        }
        self.in_basis[self.basis_pos[istar]] = false;
        self.in_basis[jstar] = true;
        self.basis_pos[istar] = jstar;
    }

    pub fn polyhedron(&self) -> &Polyhedron {
        &self.original
    }
}

/// Follows `[c, d]` starting from `b0`, which must be feasible and optimal for `c`.
pub fn shadow_simplex(
    p: &Polyhedron,
    c: &[Rational],
    d: &[Rational],
    b0: &Basis,
) -> Result<(Basis, PivotTrace)> {
    follow_segment_chain(p, &[c.to_vec(), d.to_vec()], b0)
}

/// Runs the pivot loop over consecutive waypoint pairs with one shared
/// perturbation; legs are numbered from 0.
pub fn follow_segment_chain(
    p: &Polyhedron,
    waypoints: &[Vector],
    b0: &Basis,
) -> Result<(Basis, PivotTrace)> {
    let Some(first) = waypoints.first() else {
        return Err(Error::BadParams("empty waypoint list".into()));
    };
    if !matches!(normal_cone_membership(p, b0, first), Ok(true)) {
        return Err(Error::InfeasibleStart);
    }
    let mut state = PivotState::new(p, b0)?;
    let mut trace = PivotTrace {
        ops: (p.num_rows() * p.dim() * p.dim()) as u64,
        ..Default::default()
    };
    for (leg, w) in waypoints.windows(2).enumerate() {
        state.follow(&w[0], &w[1], leg, &mut trace)?;
    }
    Ok((state.basis(), trace))
}

/// `(1−λ)c + λd`
pub fn interpolate(c: &[Rational], d: &[Rational], lambda: &Rational) -> Vector {
    let one_minus = Rational::from_integer(1.into()) - lambda;
    c.iter()
        .zip(d)
        .map(|(x, y)| &one_minus * x + lambda * y)
        .collect()
}
