use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;

use super::{GroupKind, VariableGroups};
use crate::error::{Error, Result};
use crate::rng::unit_complex;

/// One monomial `coeff * prod x_v^exponents[v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub exponents: Vec<u32>,
}

/// A sparse polynomial over a fixed variable count, kept in canonical form:
/// terms sorted by exponent vector, no repeated exponents, no zero
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        Self::from_terms(nvars, [(c, vec![0; nvars])])
    }

    pub fn variable(nvars: usize, v: usize) -> Self {
        assert!(v < nvars, "variable index {v} out of range");
        let mut exps = vec![0; nvars];
        exps[v] = 1;
        Self::from_terms(nvars, [(Complex64::new(1.0, 0.0), exps)])
    }

    /// Builds the canonical form of `sum coeff * x^exps`, combining repeated
    /// exponent vectors.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Complex64, Vec<u32>)>,
    {
        let mut acc: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (c, e) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            *acc.entry(e).or_default() += c;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(exponents, coeff)| Term { coeff, exponents })
            .collect();
        Self { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<Complex64> {
        match self.terms.as_slice() {
            [] => Some(Complex64::new(0.0, 0.0)),
            [t] if t.exponents.iter().all(|&e| e == 0) => Some(t.coeff),
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.exponents.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|t| (t.coeff * c, t.exponents.clone())),
        )
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(self.nvars, Complex64::new(1.0, 0.0));
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Value at `x`, summed term by term.
    pub fn evaluate(&self, x: &[Complex64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|t| t.coeff * monomial(&t.exponents, x))
            .sum()
    }

    /// Value and gradient at `x`. The gradient is written into `grad`, which
    /// must have length `nvars`.
    pub fn evaluate_with_gradient(&self, x: &[Complex64], grad: &mut [Complex64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.nvars);
        debug_assert_eq!(grad.len(), self.nvars);
        grad.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
        let mut value = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            value += t.coeff * monomial(&t.exponents, x);
            for (k, &ek) in t.exponents.iter().enumerate() {
                if ek == 0 {
                    continue;
                }
                let mut d = t.coeff * f64::from(ek);
                for (v, &ev) in t.exponents.iter().enumerate() {
                    let e = if v == k { ev - 1 } else { ev };
                    if e > 0 {
                        d *= x[v].powu(e);
                    }
                }
                grad[k] += d;
            }
        }
        value
    }

    /// Largest term magnitude `|c x^a|` at `x`; the scale used by relative
    /// vanishing tests.
    pub fn term_scale(&self, x: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.coeff * monomial(&t.exponents, x)).norm())
            .fold(0.0, f64::max)
    }

    /// Degree of each term in the variables of group `j`.
    fn group_degrees<'a>(
        &'a self,
        groups: &'a VariableGroups,
        j: usize,
    ) -> impl Iterator<Item = u32> + 'a {
        let range = groups.range(j);
        self.terms
            .iter()
            .map(move |t| t.exponents[range.clone()].iter().sum())
    }
}

fn monomial(exps: &[u32], x: &[Complex64]) -> Complex64 {
    let mut m = Complex64::new(1.0, 0.0);
    for (xv, &e) in x.iter().zip(exps) {
        if e > 0 {
            m *= xv.powu(e);
        }
    }
    m
}

/// The common group-degree vector of `poly`.
///
/// Projective groups must agree across terms; an affine group reports its
/// largest degree.
pub fn multidegree_of(poly: &Polynomial, groups: &VariableGroups) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(groups.len());
    for (j, group) in groups.groups().iter().enumerate() {
        let mut degs = poly.group_degrees(groups, j);
        let d = match group.kind {
            GroupKind::Affine => degs.max().unwrap_or(0),
            GroupKind::Projective => {
                let first = degs.next().unwrap_or(0);
                if let Some(other) = degs.find(|&d| d != first) {
                    return Err(Error::NotMultihomogeneous {
                        group: j,
                        detail: format!("terms of degree {first} and {other}"),
                    });
                }
                first
            }
        };
        out.push(d);
    }
    Ok(out)
}

/// A general linear form in group `group` with coefficients drawn uniformly
/// from the complex unit circle. Affine groups also get a constant term.
pub fn random_linear<R: Rng + ?Sized>(
    group: usize,
    groups: &VariableGroups,
    rng: &mut R,
) -> Polynomial {
    let n = groups.total_vars();
    let mut terms: Vec<(Complex64, Vec<u32>)> = groups
        .range(group)
        .map(|v| {
            let mut e = vec![0; n];
            e[v] = 1;
            (unit_complex(rng), e)
        })
        .collect();
    if groups.group(group).kind == GroupKind::Affine {
        terms.push((unit_complex(rng), vec![0; n]));
    }
    Polynomial::from_terms(n, terms)
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        Polynomial::from_terms(
            self.nvars,
            self.terms
                .iter()
                .chain(&rhs.terms)
                .map(|t| (t.coeff, t.exponents.clone())),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: -t.coeff,
                    exponents: t.exponents.clone(),
                })
                .collect(),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let e = a
                    .exponents
                    .iter()
                    .zip(&b.exponents)
                    .map(|(x, y)| x + y)
                    .collect();
                out.push((a.coeff * b.coeff, e));
            }
        }
        Polynomial::from_terms(self.nvars, out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}+{}*I)", t.coeff.re, t.coeff.im)?;
            for (v, &e) in t.exponents.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*v{v}")?,
                    _ => write!(f, "*v{v}^{e}")?,
                }
            }
        }
        Ok(())
    }
}
