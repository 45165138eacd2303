//! Polynomials in a formal infinitesimal ε > 0, ordered lexicographically.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::numeric::{format_rational, Rational};

/// Sparse polynomial `Σ cₖ εᵈᵏ`, degrees strictly increasing, no zero
/// coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EpsPoly {
    terms: Vec<(u32, Rational)>,
}

impl EpsPoly {
    pub fn zero() -> Self {
        EpsPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(degree: u32, c: Rational) -> Self {
        if c.is_zero() {
            EpsPoly::zero()
        } else {
            EpsPoly {
                terms: vec![(degree, c)],
            }
        }
    }

    /// Builds from arbitrary (degree, coefficient) pairs, merging duplicates.
    pub fn from_terms(mut terms: Vec<(u32, Rational)>) -> Self {
        terms.sort_by_key(|(d, _)| *d);
        let mut out: Vec<(u32, Rational)> = Vec::with_capacity(terms.len());
        for (d, c) in terms {
            match out.last_mut() {
                Some((ld, lc)) if *ld == d => *lc += c,
                _ => out.push((d, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        EpsPoly { terms: out }
    }

    pub fn terms(&self) -> &[(u32, Rational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.last().map(|(d, _)| *d)
    }

    /// Constant term, i.e. the value at ε = 0.
    pub fn constant_term(&self) -> Rational {
        match self.terms.first() {
            Some((0, c)) => c.clone(),
            _ => Rational::zero(),
        }
    }

    /// Sign for all sufficiently small ε > 0: sign of the lowest-degree coefficient.
    pub fn signum(&self) -> Ordering {
        match self.terms.first() {
            None => Ordering::Equal,
            Some((_, c)) if c.is_positive() => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    pub fn add(&self, other: &EpsPoly) -> EpsPoly {
        self.combine(other, true)
    }

    pub fn sub(&self, other: &EpsPoly) -> EpsPoly {
        self.combine(other, false)
    }

    pub fn neg(&self) -> EpsPoly {
        EpsPoly {
            terms: self.terms.iter().map(|(d, c)| (*d, -c)).collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> EpsPoly {
        if r.is_zero() {
            return EpsPoly::zero();
        }
        EpsPoly {
            terms: self.terms.iter().map(|(d, c)| (*d, c * r)).collect(),
        }
    }

    /// `self + r·x`
    pub fn axpy(&self, r: &Rational, x: &EpsPoly) -> EpsPoly {
        self.add(&x.scale(r))
    }

    fn combine(&self, other: &EpsPoly, plus: bool) -> EpsPoly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
            let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
            if take_a {
                out.push(a[i].clone());
                i += 1;
            } else if take_b {
                let c = if plus { b[j].1.clone() } else { -&b[j].1 };
                out.push((b[j].0, c));
                j += 1;
            } else {
                let c = if plus { &a[i].1 + &b[j].1 } else { &a[i].1 - &b[j].1 };
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        EpsPoly { terms: out }
    }
}

/// Lexicographic order: `p < q` iff `p(ε) < q(ε)` for all small ε > 0.
pub fn lex_compare(p: &EpsPoly, q: &EpsPoly) -> Ordering {
    p.sub(q).signum()
}

impl Ord for EpsPoly {
    fn cmp(&self, other: &Self) -> Ordering {
        lex_compare(self, other)
    }
}

impl PartialOrd for EpsPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Rational> for EpsPoly {
    fn from(c: Rational) -> Self {
        EpsPoly::constant(c)
    }
}

impl fmt::Display for EpsPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (d, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            match d {
                0 => write!(f, "{}", format_rational(c))?,
                _ => write!(f, "{}*e^{}", format_rational(c), d)?,
            }
        }
        Ok(())
    }
}

/// Σ rᵢ·xᵢ over EpsPoly vectors.
pub fn dot_eps(r: &[Rational], x: &[EpsPoly]) -> EpsPoly {
    r.iter()
        .zip(x)
        .fold(EpsPoly::zero(), |acc, (ri, xi)| acc.axpy(ri, xi))
}

/// `bᵢ + εⁱ⁺¹` for each position i (0-based).
pub fn perturbed_rhs(b: &[Rational]) -> Vec<EpsPoly> {
    b.iter()
        .enumerate()
        .map(|(i, bi)| {
            EpsPoly::constant(bi.clone()).add(&EpsPoly::monomial(i as u32 + 1, Rational::one()))
        })
        .collect()
}
