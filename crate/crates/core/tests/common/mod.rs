#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use multiregen_core::polysys::Polynomial;
use multiregen_core::rng::{stream, unit_complex};
use multiregen_core::{parse_variables, PolySystem, VariableGroups};
use rand::Rng;

pub const TWISTED_CUBIC_INPUT: &str = "## The text in inputFile.py to run the twisted cubic example.
degrees = [[2], [2], [2]]\t\t# The degrees of the three polynomials.
verbose = 1\t\t# Change to zero to display nothing.
algebraicTorusVariableGroups = [0]\t# List of variable groups where
# returned solutions have nonzero coordinates
maxProcesses = 1 # Change to N to use N processes in parallel
";

pub const TWISTED_CUBIC_VARIABLES: &str = "# The text in bertiniInput_variables for the twisted cubic example.
# Use variable_group to work with affine coordinates and 
#  multiple lines to work with several variable groups. 
hom_variable_group x_0, x_1, x_2, x_3;
";

pub const TWISTED_CUBIC_EQUATIONS: &str = "# The text in bertiniInput_equations. 
# It follows the same syntax as Bertini.
function f1, f2, f3;
f1 = x_1^2 - x_0*x_2; f2 = x_2^2 - x_1*x_3; f3 = x_0*x_3 - x_1*x_2;
";

pub const TWISTED_CUBIC_TRACKING: &str = "# The text in bertiniInput_trackingOptions is to achieve 
#  tighter convergence tolerance for the endgame. 
FinalTol: 1e-12;
";

pub const P3P1_INPUT: &str = "degrees = [[1, 1], [1, 1], [1, 1]]\nverbose = 1\nmaxProcesses = 1\n";

pub const P3P1_VARIABLES: &str = "hom_variable_group x_0, x_1, x_2, x_3;\nhom_variable_group y_0, y_1;\n";

pub const P3P1_EQUATIONS: &str = "function f1, f2, f3;
f1 = x_0*y_0 + x_1*y_1;
f2 = x_1*y_0 + x_2*y_1;
f3 = x_2*y_0 + x_3*y_1;
";

pub fn write_inputs(dir: &Path, input: &str, variables: &str, equations: &str, tracking: Option<&str>) {
    fs::write(dir.join("inputFile"), input).unwrap();
    fs::write(dir.join("bertiniInput_variables"), variables).unwrap();
    fs::write(dir.join("bertiniInput_equations"), equations).unwrap();
    if let Some(t) = tracking {
        fs::write(dir.join("bertiniInput_trackingOptions"), t).unwrap();
    }
}

pub fn twisted_cubic_dir(dir: &Path) {
    write_inputs(
        dir,
        TWISTED_CUBIC_INPUT,
        TWISTED_CUBIC_VARIABLES,
        TWISTED_CUBIC_EQUATIONS,
        Some(TWISTED_CUBIC_TRACKING),
    );
}

pub fn p3p1_dir(dir: &Path) {
    write_inputs(dir, P3P1_INPUT, P3P1_VARIABLES, P3P1_EQUATIONS, None);
}

/// Coefficients of `prod_i (sum_j d_ij T_j)` modulo `T_j^(n_j + 1)`, keyed by
/// the slice type `e = n - a` of each surviving monomial `T^a`.
pub fn truncated_product_oracle(degrees: &[Vec<u32>], dims: &[usize]) -> BTreeMap<Vec<usize>, u64> {
    let k = dims.len();
    let mut poly: BTreeMap<Vec<usize>, u64> = BTreeMap::from([(vec![0; k], 1)]);
    for row in degrees {
        let mut next = BTreeMap::new();
        for (a, c) in &poly {
            for j in 0..k {
                if row[j] == 0 || a[j] + 1 > dims[j] {
                    continue;
                }
                let mut b = a.clone();
                b[j] += 1;
                *next.entry(b).or_insert(0) += c * row[j] as u64;
            }
        }
        poly = next;
    }
    poly.into_iter()
        .filter(|(_, c)| *c > 0)
        .map(|(a, c)| (dims.iter().zip(&a).map(|(n, x)| n - x).collect(), c))
        .collect()
}

/// All exponent vectors of total degree `d` in `n` variables.
pub fn monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for a in 0..=d {
        for mut rest in monomials(n - 1, d - a) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

/// A dense multihomogeneous polynomial of multidegree `d` with unit-modulus
/// coefficients.
pub fn dense_poly<R: Rng>(groups: &VariableGroups, d: &[u32], rng: &mut R) -> Polynomial {
    let mut exps: Vec<Vec<u32>> = vec![Vec::new()];
    for (j, g) in groups.groups().iter().enumerate() {
        let block = monomials(g.len(), d[j]);
        exps = exps
            .iter()
            .flat_map(|pre| {
                block.iter().map(move |b| {
                    let mut e = pre.clone();
                    e.extend(b);
                    e
                })
            })
            .collect();
    }
    let n = groups.total_vars();
    Polynomial::from_terms(n, exps.into_iter().map(|e| (unit_complex(rng), e)))
}

fn from_rows(groups: VariableGroups, rows: &[Vec<u32>], seed: u64) -> PolySystem {
    let mut rng = stream(seed, &[0xc0ffee]);
    let polys = rows.iter().map(|d| dense_poly(&groups, d, &mut rng)).collect();
    let names = (0..rows.len()).map(|i| format!("f{}", i + 1)).collect();
    PolySystem::new(groups, names, polys).unwrap()
}

pub fn projective_space(n: usize) -> VariableGroups {
    let names: Vec<String> = (0..=n).map(|i| format!("x_{i}")).collect();
    parse_variables(&format!("hom_variable_group {};", names.join(", "))).unwrap()
}

pub fn product_space(n1: usize, n2: usize) -> VariableGroups {
    let x: Vec<String> = (0..=n1).map(|i| format!("x_{i}")).collect();
    let y: Vec<String> = (0..=n2).map(|i| format!("y_{i}")).collect();
    parse_variables(&format!(
        "hom_variable_group {};\nhom_variable_group {};",
        x.join(", "),
        y.join(", ")
    ))
    .unwrap()
}

/// `n` dense equations of degrees at most 3 on P^n, `n <= 3`.
pub fn random_bezout_system(seed: u64) -> (PolySystem, Vec<u32>) {
    let mut rng = stream(seed, &[0xbe2]);
    let n = rng.random_range(1..=3usize);
    let degrees: Vec<u32> = (0..n).map(|_| rng.random_range(1..=3)).collect();
    let rows: Vec<Vec<u32>> = degrees.iter().map(|&d| vec![d]).collect();
    (from_rows(projective_space(n), &rows, seed), degrees)
}

/// A random complete intersection on P^2 x P^1 or P^3 x P^1.
pub fn random_multihomogeneous_system(seed: u64) -> PolySystem {
    let mut rng = stream(seed, &[0x3417]);
    let n1 = rng.random_range(2..=3usize);
    let groups = product_space(n1, 1);
    let count = rng.random_range(1..=n1 + 1);
    let rows: Vec<Vec<u32>> = (0..count)
        .map(|_| loop {
            let d = vec![rng.random_range(0..=2u32), rng.random_range(0..=2u32)];
            if d.iter().sum::<u32>() > 0 {
                break d;
            }
        })
        .collect();
    from_rows(groups, &rows, seed)
}
