//! Witness-set bookkeeping.
//!
//! A witness set for an equidimensional `X` in a product of projective
//! spaces is indexed by a [`SliceType`] `e`: `e_j` generic linear forms in
//! group `j`, with `Σ e_j = dim X`. The number of points of `X` on the slice
//! is the coefficient of the multidegree attached to `e`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{lu_solve, ComplexMatrix};
use crate::persist::fresh_point_id;
use crate::polysys::{random_linear, MultiprojectivePoint, Polynomial, VariableGroups};
use crate::tracker::{PatchSet, TrackSettings};

/// Number of linear forms per group; `0 <= e_j <= n_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SliceType(pub Vec<usize>);

impl SliceType {
    pub fn new(e: Vec<usize>, groups: &VariableGroups) -> Result<Self> {
        if e.len() != groups.len() {
            return Err(Error::Dimension {
                expected: groups.len(),
                got: e.len(),
            });
        }
        if let Some(j) = (0..e.len()).find(|&j| e[j] > groups.group(j).dim()) {
            return Err(Error::Config(format!(
                "slice type {e:?} exceeds dimension of group {j}"
            )));
        }
        Ok(Self(e))
    }

    /// The type of the root slice, `(n_1, ..., n_k)`.
    pub fn full(groups: &VariableGroups) -> Self {
        Self(groups.dims())
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    /// `e - u_j`, when `e_j >= 1`.
    pub fn minus(&self, j: usize) -> Option<Self> {
        let mut e = self.0.clone();
        e[j] = e[j].checked_sub(1)?;
        Some(Self(e))
    }
}

impl fmt::Display for SliceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Every `e` with `Σ e_j = dim` and `0 <= e_j <= n_j`, in decreasing
/// lexicographic order.
pub fn valid_slice_types(groups: &VariableGroups, dim: usize) -> Vec<SliceType> {
    fn rec(dims: &[usize], left: usize, acc: &mut Vec<usize>, out: &mut Vec<SliceType>) {
        match dims.split_first() {
            None => {
                if left == 0 {
                    out.push(SliceType(acc.clone()));
                }
            }
            Some((&n, rest)) => {
                for v in (0..=n.min(left)).rev() {
                    acc.push(v);
                    rec(rest, left - v, acc, out);
                    acc.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(&groups.dims(), dim, &mut Vec::new(), &mut out);
    out
}

/// Generic linear forms tagged with their group, in the order drawn.
#[derive(Debug, Clone, Default)]
pub struct Slice {
    pub linears: Vec<(usize, Polynomial)>,
}

impl Slice {
    pub fn slice_type(&self, ngroups: usize) -> SliceType {
        let mut e = vec![0; ngroups];
        for (j, _) in &self.linears {
            e[*j] += 1;
        }
        SliceType(e)
    }

    /// The first `e_j` linears of each group `j`, preserving order.
    pub fn truncated(&self, e: &SliceType) -> Slice {
        let mut left = e.0.clone();
        let linears = self
            .linears
            .iter()
            .filter(|(j, _)| {
                if left[*j] > 0 {
                    left[*j] -= 1;
                    true
                } else {
                    false
                }
            })
            .cloned()
            .collect();
        Slice { linears }
    }

    /// The last linear of group `j`, the one regeneration removes.
    pub fn last_of_group(&self, j: usize) -> Option<&Polynomial> {
        self.linears
            .iter()
            .rev()
            .find(|(g, _)| *g == j)
            .map(|(_, p)| p)
    }

    pub fn polys(&self) -> impl Iterator<Item = &Polynomial> {
        self.linears.iter().map(|(_, p)| p)
    }
}

/// Fresh random linear forms, `e_j` per group.
pub fn make_slice<R: Rng + ?Sized>(e: &SliceType, groups: &VariableGroups, rng: &mut R) -> Slice {
    let mut linears = Vec::new();
    for (j, &k) in e.0.iter().enumerate() {
        for _ in 0..k {
            linears.push((j, random_linear(j, groups, rng)));
        }
    }
    Slice { linears }
}

#[derive(Debug, Clone)]
pub struct WitnessPoint {
    pub point: MultiprojectivePoint,
    /// 12-digit identifier of this point.
    pub point_id: String,
    pub parent_id: Option<String>,
}

/// One node of the regeneration tree: the witness points of the part of
/// `V(f_1, ..., f_prefix_count)` sliced by `slice`.
#[derive(Debug, Clone)]
pub struct WitnessNode {
    pub prefix_count: usize,
    pub slice_type: SliceType,
    pub slice: Slice,
    pub points: Vec<WitnessPoint>,
}

/// Resample limit for the root linear system.
const ROOT_ATTEMPTS: usize = 3;

/// The single witness point of the whole ambient space on a full generic
/// slice, from one dense linear solve (slice plus patches).
pub fn root_witness<R: Rng + ?Sized>(
    groups: &VariableGroups,
    rng: &mut R,
    settings: &TrackSettings,
) -> Result<WitnessNode> {
    let e = SliceType::full(groups);
    let n = groups.total_vars();
    for _ in 0..ROOT_ATTEMPTS {
        let slice = make_slice(&e, groups, rng);
        let patches = PatchSet::random(groups, rng);
        let mut a = ComplexMatrix::zeros(n, n);
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        let mut row = 0;
        for p in slice.polys() {
            for t in p.terms() {
                match t.exponents.iter().position(|&x| x == 1) {
                    Some(v) => a.set(row, v, t.coeff),
                    None => b[row] = -t.coeff,
                }
            }
            row += 1;
        }
        for patch in patches.patches() {
            for (k, v) in groups.range(patch.group).enumerate() {
                a.set(row, v, patch.coeffs[k]);
            }
            b[row] = Complex64::new(1.0, 0.0);
            row += 1;
        }
        debug_assert_eq!(row, n);
        let Ok(x) = lu_solve(&a, &b) else { continue };
        let point = MultiprojectivePoint::from_flat(groups, &x)?;
        let Ok(point) = point.normalized(groups) else { continue };
        let flat = point.to_flat();
        let residual = slice
            .polys()
            .map(|p| p.evaluate(&flat).norm())
            .fold(0.0, f64::max);
        if residual > settings.final_tol.min(1e-12) {
            continue;
        }
        return Ok(WitnessNode {
            prefix_count: 0,
            slice_type: e,
            slice,
            points: vec![WitnessPoint {
                point,
                point_id: fresh_point_id(rng),
                parent_id: None,
            }],
        });
    }
    Err(Error::DegenerateRoot(ROOT_ATTEMPTS))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub count: usize,
    pub e: SliceType,
}

/// Nonzero multidegree coefficients, one row per realized slice type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultidegreeTable {
    pub rows: Vec<TableRow>,
}

impl MultidegreeTable {
    /// Exponents of `T` for a row: `n_j - e_j`.
    pub fn monomial_exponents(row: &TableRow, groups: &VariableGroups) -> Vec<usize> {
        groups
            .dims()
            .iter()
            .zip(&row.e.0)
            .map(|(n, e)| n - e)
            .collect()
    }

    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.count).sum()
    }

    pub fn count(&self, e: &[usize]) -> usize {
        self.rows
            .iter()
            .find(|r| r.e.0 == e)
            .map_or(0, |r| r.count)
    }

    /// The multidegree polynomial, e.g. `3*T0^2*T1 + T0^3`.
    pub fn polynomial(&self, groups: &VariableGroups) -> String {
        if self.rows.is_empty() {
            return "0".into();
        }
        let terms: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let mut parts = Vec::new();
                if r.count != 1 {
                    parts.push(r.count.to_string());
                }
                for (j, &a) in Self::monomial_exponents(r, groups).iter().enumerate() {
                    match a {
                        0 => {}
                        1 => parts.push(format!("T{j}")),
                        _ => parts.push(format!("T{j}^{a}")),
                    }
                }
                if parts.is_empty() {
                    "1".into()
                } else {
                    parts.join("*")
                }
            })
            .collect();
        terms.join(" + ")
    }
}

/// Aggregates leaf point counts by slice type. Zero rows are omitted and
/// rows are in decreasing lexicographic order of `e`.
pub fn multidegree_table(leaves: &[WitnessNode], _groups: &VariableGroups) -> MultidegreeTable {
    let mut counts: BTreeMap<SliceType, usize> = BTreeMap::new();
    for node in leaves {
        *counts.entry(node.slice_type.clone()).or_default() += node.points.len();
    }
    MultidegreeTable {
        rows: counts
            .into_iter()
            .rev()
            .filter(|(_, c)| *c > 0)
            .map(|(e, count)| TableRow { count, e })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::{multidegree_of, parse_equations, parse_variables};
    use crate::rng::stream;

    fn p3p1() -> VariableGroups {
        parse_variables("hom_variable_group x_0,x_1,x_2,x_3;\nhom_variable_group y_0,y_1;").unwrap()
    }

    #[test]
    fn slice_type_enumeration() {
        let st = |v: Vec<Vec<usize>>| v.into_iter().map(SliceType).collect::<Vec<_>>();
        assert_eq!(valid_slice_types(&p3p1(), 1), st(vec![vec![1, 0], vec![0, 1]]));
        let p3 = parse_variables("hom_variable_group a,b,c,d;").unwrap();
        assert_eq!(valid_slice_types(&p3, 1), st(vec![vec![1]]));
        let p1p1 = parse_variables("hom_variable_group a,b;\nhom_variable_group c,d;").unwrap();
        assert!(valid_slice_types(&p1p1, 3).is_empty());
        assert_eq!(valid_slice_types(&p1p1, 2), st(vec![vec![1, 1]]));
    }

    #[test]
    fn slice_construction() {
        let g = p3p1();
        let mut rng = stream(3, &[]);
        let s = make_slice(&SliceType(vec![1, 0]), &g, &mut rng);
        assert_eq!(s.linears.len(), 1);
        assert_eq!(s.linears[0].0, 0);
        assert!(make_slice(&SliceType(vec![0, 0]), &g, &mut rng).linears.is_empty());
        let full = make_slice(&SliceType(vec![3, 1]), &g, &mut rng);
        assert_eq!(full.linears.len(), 4);
        for (j, l) in &full.linears {
            let mut unit = vec![0, 0];
            unit[*j] = 1;
            assert_eq!(multidegree_of(l, &g).unwrap(), unit);
        }
        assert_eq!(full.slice_type(2), SliceType(vec![3, 1]));
        let t = full.truncated(&SliceType(vec![2, 1]));
        assert_eq!(t.slice_type(2), SliceType(vec![2, 1]));
        assert_eq!(t.linears[0].1, full.linears[0].1);
        assert_eq!(full.last_of_group(0), Some(&full.linears[2].1));
    }

    #[test]
    fn root_witness_solves_slice() {
        let s = TrackSettings::default();
        let p3 = parse_variables("hom_variable_group x_0, x_1, x_2, x_3;").unwrap();
        let root = root_witness(&p3, &mut stream(1, &[]), &s).unwrap();
        assert_eq!(root.points.len(), 1);
        assert_eq!(root.slice.linears.len(), 3);
        let x = root.points[0].point.to_flat();
        for l in root.slice.polys() {
            assert!(l.evaluate(&x).norm() < 1e-12);
        }
        assert_eq!(root.points[0].point_id.len(), 12);

        // Generic: the root point is not on the twisted cubic's quadrics.
        let sys = parse_equations(
            "function f1; f1 = x_1^2 - x_0*x_2;",
            &p3,
        )
        .unwrap();
        let f1 = &sys.polys()[0];
        assert!(f1.evaluate(&x).norm() > 1e-8 * f1.term_scale(&x));

        let g = p3p1();
        let root = root_witness(&g, &mut stream(2, &[]), &s).unwrap();
        assert_eq!(root.slice_type, SliceType(vec![3, 1]));
        let x = root.points[0].point.to_flat();
        assert_eq!(x.len(), 6);
        for l in root.slice.polys() {
            assert!(l.evaluate(&x).norm() < 1e-12);
        }
    }

    #[test]
    fn table_aggregation_and_polynomial() {
        let g = p3p1();
        let node = |e: Vec<usize>, k: usize| WitnessNode {
            prefix_count: 3,
            slice_type: SliceType(e),
            slice: Slice::default(),
            points: (0..k)
                .map(|i| WitnessPoint {
                    point: MultiprojectivePoint::new(vec![]),
                    point_id: format!("{i:012}"),
                    parent_id: None,
                })
                .collect(),
        };
        let t = multidegree_table(&[node(vec![0, 1], 1), node(vec![1, 0], 2), node(vec![1, 0], 1)], &g);
        assert_eq!(
            t.rows,
            vec![
                TableRow { count: 3, e: SliceType(vec![1, 0]) },
                TableRow { count: 1, e: SliceType(vec![0, 1]) },
            ]
        );
        assert_eq!(t.polynomial(&g), "3*T0^2*T1 + T0^3");
        assert!(multidegree_table(&[], &g).rows.is_empty());
        assert!(multidegree_table(&[node(vec![1, 0], 0)], &g).rows.is_empty());
    }
}
