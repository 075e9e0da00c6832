use num_complex::Complex64;

use super::{GroupKind, VariableGroups};
use crate::error::{Error, Result};

/// A point of a product of projective (and affine) spaces, stored as one
/// coordinate block per variable group.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiprojectivePoint {
    blocks: Vec<Vec<Complex64>>,
}

impl MultiprojectivePoint {
    pub fn new(blocks: Vec<Vec<Complex64>>) -> Self {
        Self { blocks }
    }

    /// Splits a flat coordinate vector into group blocks.
    pub fn from_flat(groups: &VariableGroups, x: &[Complex64]) -> Result<Self> {
        if x.len() != groups.total_vars() {
            return Err(Error::Dimension {
                expected: groups.total_vars(),
                got: x.len(),
            });
        }
        Ok(Self {
            blocks: (0..groups.len()).map(|j| x[groups.range(j)].to_vec()).collect(),
        })
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &[Complex64] {
        &self.blocks[j]
    }

    pub fn to_flat(&self) -> Vec<Complex64> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub(crate) fn check_shape(&self, groups: &VariableGroups) -> Result<()> {
        if self.blocks.len() != groups.len() {
            return Err(Error::Dimension {
                expected: groups.len(),
                got: self.blocks.len(),
            });
        }
        for (j, b) in self.blocks.iter().enumerate() {
            if b.len() != groups.group(j).len() {
                return Err(Error::Dimension {
                    expected: groups.group(j).len(),
                    got: b.len(),
                });
            }
        }
        Ok(())
    }

    /// Canonical representative: every projective block is divided by its
    /// largest-magnitude coordinate, which therefore becomes exactly `1`.
    /// Affine blocks are left untouched.
    pub fn normalized(&self, groups: &VariableGroups) -> Result<Self> {
        self.check_shape(groups)?;
        let mut blocks = self.blocks.clone();
        for (j, b) in blocks.iter_mut().enumerate() {
            if groups.group(j).kind == GroupKind::Affine {
                continue;
            }
            let k = pivot(b);
            let p = b[k];
            if p.norm() == 0.0 {
                return Err(Error::Config(format!("projective block {j} is zero")));
            }
            for z in b.iter_mut() {
                *z /= p;
            }
            b[k] = Complex64::new(1.0, 0.0);
        }
        Ok(Self { blocks })
    }

    /// Coordinatewise distance to `other` as projective points: block `j` of
    /// `other` is rescaled to agree with this point on this point's pivot
    /// coordinate before comparing.
    pub fn projective_distance(&self, other: &Self, groups: &VariableGroups) -> f64 {
        let mut worst = 0.0f64;
        for (j, (a, b)) in self.blocks.iter().zip(&other.blocks).enumerate() {
            let (sa, sb) = if groups.group(j).kind == GroupKind::Projective {
                let k = pivot(a);
                if b[k].norm() == 0.0 {
                    return f64::INFINITY;
                }
                (a[k].inv(), b[k].inv())
            } else {
                (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
            };
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x * sa - y * sb).norm());
            }
        }
        worst
    }
}

fn pivot(b: &[Complex64]) -> usize {
    b.iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bm), (i, z)| {
            let m = z.norm();
            if m > bm {
                (i, m)
            } else {
                (bi, bm)
            }
        })
        .0
}
