//! Multihomogeneous polynomial systems over named variable groups.

mod parse;
mod point;
mod poly;

use std::ops::Range;

use num_complex::Complex64;

pub use parse::{parse_equations, parse_variables};
pub use point::MultiprojectivePoint;
pub use poly::{multidegree_of, random_linear, Polynomial, Term};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// `n + 1` homogeneous coordinates of `P^n`.
    Projective,
    /// `n` coordinates of `C^n`.
    Affine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableGroup {
    pub names: Vec<String>,
    pub kind: GroupKind,
}

impl VariableGroup {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Dimension of the space the group coordinatizes.
    pub fn dim(&self) -> usize {
        match self.kind {
            GroupKind::Projective => self.names.len() - 1,
            GroupKind::Affine => self.names.len(),
        }
    }
}

/// Ordered variable groups. Variables are numbered globally in declaration
/// order, group by group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableGroups {
    groups: Vec<VariableGroup>,
    offsets: Vec<usize>,
}

impl VariableGroups {
    pub fn new(groups: Vec<VariableGroup>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Config("no variable groups declared".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for (j, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::Config(format!("variable group {j} is empty")));
            }
            if g.kind == GroupKind::Projective && g.len() < 2 {
                return Err(Error::Config(format!(
                    "projective group {j} needs at least two variables"
                )));
            }
            for name in &g.names {
                if !seen.insert(name.as_str()) {
                    return Err(Error::Config(format!("duplicate variable {name}")));
                }
            }
        }
        let mut offsets = Vec::with_capacity(groups.len() + 1);
        let mut acc = 0;
        for g in &groups {
            offsets.push(acc);
            acc += g.len();
        }
        offsets.push(acc);
        Ok(Self { groups, offsets })
    }

    pub fn groups(&self) -> &[VariableGroup] {
        &self.groups
    }

    pub fn group(&self, j: usize) -> &VariableGroup {
        &self.groups[j]
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Global indices of group `j`'s variables.
    pub fn range(&self, j: usize) -> Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    pub fn total_vars(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Per-group dimensions `n_j`.
    pub fn dims(&self) -> Vec<usize> {
        self.groups.iter().map(VariableGroup::dim).collect()
    }

    /// Dimension of the ambient product space.
    pub fn ambient_dim(&self) -> usize {
        self.groups.iter().map(VariableGroup::dim).sum()
    }

    pub fn projective_count(&self) -> usize {
        self.groups
            .iter()
            .filter(|g| g.kind == GroupKind::Projective)
            .count()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.groups
            .iter()
            .flat_map(|g| g.names.iter())
            .position(|n| n == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.groups.iter().flat_map(|g| g.names.iter().map(String::as_str))
    }
}

/// An ordered list of multihomogeneous polynomials with their degree matrix
/// (rows are polynomials, columns are groups).
#[derive(Debug, Clone)]
pub struct PolySystem {
    groups: VariableGroups,
    names: Vec<String>,
    polys: Vec<Polynomial>,
    degrees: Vec<Vec<u32>>,
}

impl PolySystem {
    pub fn new(groups: VariableGroups, names: Vec<String>, polys: Vec<Polynomial>) -> Result<Self> {
        assert_eq!(names.len(), polys.len());
        let mut degrees = Vec::with_capacity(polys.len());
        for (name, p) in names.iter().zip(&polys) {
            if p.nvars() != groups.total_vars() {
                return Err(Error::Dimension {
                    expected: groups.total_vars(),
                    got: p.nvars(),
                });
            }
            let d = multidegree_of(p, &groups).map_err(|e| match e {
                Error::NotMultihomogeneous { group, detail } => Error::NotMultihomogeneous {
                    group,
                    detail: format!("{name}: {detail}"),
                },
                other => other,
            })?;
            degrees.push(d);
        }
        Ok(Self {
            groups,
            names,
            polys,
            degrees,
        })
    }

    pub fn groups(&self) -> &VariableGroups {
        &self.groups
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn degrees(&self) -> &[Vec<u32>] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    fn flat(&self, p: &MultiprojectivePoint) -> Result<Vec<Complex64>> {
        p.check_shape(&self.groups)?;
        Ok(p.to_flat())
    }

    pub fn evaluate(&self, p: &MultiprojectivePoint) -> Result<Vec<Complex64>> {
        let x = self.flat(p)?;
        Ok(self.polys.iter().map(|f| f.evaluate(&x)).collect())
    }

    /// Analytic Jacobian, one row per polynomial and one column per variable.
    pub fn jacobian(&self, p: &MultiprojectivePoint) -> Result<ComplexMatrix> {
        let x = self.flat(p)?;
        let n = x.len();
        let mut jac = ComplexMatrix::zeros(self.polys.len(), n);
        for (i, f) in self.polys.iter().enumerate() {
            f.evaluate_with_gradient(&x, jac.row_mut(i));
        }
        Ok(jac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn twisted() -> PolySystem {
        let g = parse_variables("hom_variable_group x_0, x_1, x_2, x_3;").unwrap();
        parse_equations(
            "function f1, f2, f3;\nf1 = x_1^2 - x_0*x_2; f2 = x_2^2 - x_1*x_3; f3 = x_0*x_3 - x_1*x_2;",
            &g,
        )
        .unwrap()
    }

    fn pt(sys: &PolySystem, v: &[Complex64]) -> MultiprojectivePoint {
        MultiprojectivePoint::from_flat(sys.groups(), v).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let sys = twisted();
        let ones = pt(&sys, &[c(1.0, 0.0); 4]);
        assert_eq!(sys.evaluate(&ones).unwrap()[0], c(0.0, 0.0));
        let p = pt(&sys, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(sys.evaluate(&p).unwrap()[0], c(1.0, 0.0));
        let row = sys.jacobian(&p).unwrap();
        assert_eq!(
            row.row(0),
            &[c(-3.0, 0.0), c(4.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]
        );
    }

    #[test]
    fn bilinear_at_isotropic_point_vanishes() {
        let g = parse_variables("hom_variable_group x_0,x_1;\nhom_variable_group y_0,y_1;")
            .unwrap();
        let sys = parse_equations("function f1; f1 = x_0*y_0 + x_1*y_1;", &g).unwrap();
        let p = MultiprojectivePoint::new(vec![
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(1.0, 0.0), c(0.0, 1.0)],
        ]);
        assert!(sys.evaluate(&p).unwrap()[0].norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let sys = twisted();
        let bad = MultiprojectivePoint::new(vec![vec![c(1.0, 0.0); 3]]);
        assert!(matches!(sys.evaluate(&bad), Err(Error::Dimension { .. })));
        assert!(matches!(sys.jacobian(&bad), Err(Error::Dimension { .. })));
    }

    #[test]
    fn group_validation() {
        let single = VariableGroups::new(vec![VariableGroup {
            names: vec!["x".into()],
            kind: GroupKind::Projective,
        }]);
        assert!(single.is_err());
        assert!(VariableGroups::new(vec![]).is_err());
    }

    #[test]
    fn euler_identity_per_group() {
        let g = parse_variables("hom_variable_group x_0,x_1,x_2;\nhom_variable_group y_0,y_1;")
            .unwrap();
        let sys = parse_equations(
            "function f; f = x_0^2*y_1 - (1.5+2*I)*x_1*x_2*y_0 + x_2^2*y_0;",
            &g,
        )
        .unwrap();
        let x = [c(0.3, 0.1), c(-0.7, 0.4), c(1.1, -0.2), c(0.5, 0.5), c(-0.9, 0.3)];
        let p = pt(&sys, &x);
        let jac = sys.jacobian(&p).unwrap();
        let val = sys.evaluate(&p).unwrap()[0];
        for (j, &d) in sys.degrees()[0].iter().enumerate() {
            let lhs: Complex64 = g.range(j).map(|v| x[v] * jac.get(0, v)).sum();
            assert!((lhs - val * f64::from(d)).norm() < 1e-12);
        }
    }
}
