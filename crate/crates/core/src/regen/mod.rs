//! Multiregeneration: equation-by-equation witness sets.
//!
//! Starting from the single root point of the ambient space on a full slice,
//! each polynomial `f_p` is imposed in turn. Points already on `V(f_p)` pass
//! through unchanged. Every other point regenerates: for each group `j` in
//! which `f_p` has positive degree, the last linear of group `j` is moved to
//! each of `m_{p,j}` fresh linears (stage A), and the product of all fresh
//! linears is then deformed into `f_p` (stage B). Stage-B endpoints are
//! witness points of the next node, whose slice has one fewer linear in
//! group `j`.
//!
//! All slices of a run are truncations of one fixed family of linears, and
//! the fresh linears and `γ` constants depend only on the depth, so the start
//! systems of different parents fit together and every path can be tracked
//! independently.

mod scheduler;

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{inf_norm, newton_correct, ComplexMatrix};
use crate::polysys::{random_linear, GroupKind, MultiprojectivePoint, PolySystem, Polynomial, VariableGroups};
use crate::rng::{label, stream, unit_complex};
use crate::tracker::{track_path_checked, Homotopy, MovingEquation, PatchSet, TrackOutcome, TrackSettings, TrackStatus};
use crate::witness::{root_witness, Slice, SliceType, WitnessNode, WitnessPoint};

pub use crate::witness::MultidegreeTable;
pub use scheduler::run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Deepest pending work first, so leaf solutions appear early.
    #[default]
    DepthFirst,
    BreadthFirst,
}

#[derive(Debug, Clone)]
pub struct RegenConfig {
    pub degrees: Vec<Vec<u32>>,
    pub torus_groups: Vec<usize>,
    pub strategy: Strategy,
    pub max_processes: usize,
    pub master_seed: u64,
    pub membership_tol: f64,
    pub dedup_tol: f64,
    pub track: TrackSettings,
    /// Checkpoint directory; nothing is written when absent.
    pub run_dir: Option<PathBuf>,
}

impl RegenConfig {
    /// Defaults for `sys`, taking the degree matrix from the system itself.
    pub fn for_system(sys: &PolySystem, master_seed: u64) -> Self {
        Self {
            degrees: sys.degrees().to_vec(),
            torus_groups: Vec::new(),
            strategy: Strategy::DepthFirst,
            max_processes: 1,
            master_seed,
            membership_tol: 1e-8,
            dedup_tol: 1e-8,
            track: TrackSettings::default(),
            run_dir: None,
        }
    }

    pub fn validate(&self, sys: &PolySystem) -> Result<()> {
        crate::input::check_degrees(sys, &self.degrees)?;
        if self.max_processes == 0 {
            return Err(Error::Config("max_processes must be at least 1".into()));
        }
        if let Some(j) = self.torus_groups.iter().find(|&&j| j >= sys.groups().len()) {
            return Err(Error::Config(format!("torus group {j} out of range")));
        }
        for (name, v) in [("membership_tol", self.membership_tol), ("dedup_tol", self.dedup_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        self.track.validate()
    }
}

/// Path counts and their outcomes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PathCounts {
    pub tracked: usize,
    pub regular: usize,
    pub singular: usize,
    pub diverged: usize,
    pub failed: usize,
}

impl PathCounts {
    fn record(&mut self, status: TrackStatus) {
        self.tracked += 1;
        match status {
            TrackStatus::RegularSuccess => self.regular += 1,
            TrackStatus::SingularEndpoint => self.singular += 1,
            TrackStatus::Diverged => self.diverged += 1,
            TrackStatus::StepFailure => self.failed += 1,
        }
    }
}

/// What happened while imposing one polynomial.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DepthStats {
    pub membership_inside: usize,
    pub membership_outside: usize,
    pub stage_a: PathCounts,
    pub stage_b: PathCounts,
    /// Regular stage-B endpoints that failed re-verification.
    pub rejected: usize,
    pub duplicates: usize,
    pub torus_dropped: usize,
    /// Points added to the next level by regeneration.
    pub regenerated: usize,
    /// Points per slice type after this depth.
    pub points: BTreeMap<SliceType, usize>,
}

#[derive(Debug, Clone)]
pub struct RegenOutput {
    pub table: MultidegreeTable,
    /// All nodes, root first, ordered by level then slice type.
    pub nodes: Vec<WitnessNode>,
    /// One entry per polynomial.
    pub stats: Vec<DepthStats>,
    /// Some path ended in a step failure, so counts may be short.
    pub partial: bool,
    pub master_seed: u64,
}

impl RegenOutput {
    pub fn leaves(&self) -> impl Iterator<Item = &WitnessNode> {
        let last = self.stats.len();
        self.nodes.iter().filter(move |n| n.prefix_count == last)
    }

    pub fn node(&self, level: usize, e: &[usize]) -> Option<&WitnessNode> {
        self.nodes
            .iter()
            .find(|n| n.prefix_count == level && n.slice_type.0 == e)
    }
}

/// Relative vanishing test of `g` at a normalized point, against the larger
/// of its largest term and its largest coefficient.
pub fn is_member(g: &Polynomial, point: &MultiprojectivePoint, tol: f64) -> bool {
    let x = point.to_flat();
    let coeff = g.terms().iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
    g.evaluate(&x).norm() <= tol * g.term_scale(&x).max(coeff)
}

/// Splits `node` into the points on `V(g)` and the rest. Both halves keep the
/// node's slice; the inside half is one level deeper.
pub fn membership_filter(g: &Polynomial, node: &WitnessNode, tol: f64) -> (WitnessNode, WitnessNode) {
    let (inside, outside): (Vec<_>, Vec<_>) = node
        .points
        .iter()
        .cloned()
        .partition(|wp| is_member(g, &wp.point, tol));
    let with = |prefix_count, points| WitnessNode {
        prefix_count,
        slice_type: node.slice_type.clone(),
        slice: node.slice.clone(),
        points,
    };
    (with(node.prefix_count + 1, inside), with(node.prefix_count, outside))
}

/// Keeps the first of every cluster of points within `tol` projectively.
pub fn dedup(points: Vec<WitnessPoint>, groups: &VariableGroups, tol: f64) -> Vec<WitnessPoint> {
    let mut out: Vec<WitnessPoint> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| q.point.projective_distance(&p.point, groups) < tol) {
            out.push(p);
        }
    }
    out
}

/// True when some coordinate of a torus group is (numerically) zero.
pub fn touches_torus_boundary(point: &MultiprojectivePoint, torus_groups: &[usize], tol: f64) -> bool {
    torus_groups
        .iter()
        .any(|&j| point.block(j).iter().any(|z| z.norm() <= tol))
}

/// Drops points with a vanishing coordinate in any of `torus_groups`.
pub fn torus_filter(points: Vec<WitnessPoint>, torus_groups: &[usize], tol: f64) -> Vec<WitnessPoint> {
    points
        .into_iter()
        .filter(|p| !touches_torus_boundary(&p.point, torus_groups, tol))
        .collect()
}

/// Fresh linears, their product and the `γ` constants for one polynomial.
#[derive(Debug, Clone)]
struct Level {
    /// `linears[j][s]` for `s < m_{p,j}`.
    linears: Vec<Vec<Polynomial>>,
    gamma_a: Vec<Vec<Complex64>>,
    product: Polynomial,
    gamma_b: Complex64,
}

/// One regeneration branch: point `parent` of node `(level, e)` moved along
/// group `j` to fresh linear `s` (1-based).
#[derive(Debug, Clone)]
pub(crate) struct BranchTask {
    pub level: usize,
    pub e: SliceType,
    pub j: usize,
    pub s: usize,
    pub parent: WitnessPoint,
}

#[derive(Debug, Clone)]
pub(crate) struct BranchResult {
    pub task: BranchTask,
    pub stage_a: TrackOutcome,
    pub stage_b: Option<TrackOutcome>,
    /// Verified, normalized witness point of node `(level + 1, e - u_j)`.
    pub accepted: Option<MultiprojectivePoint>,
    pub rejected: bool,
}

/// The random data of a run and the per-path operations that use it.
#[derive(Debug, Clone)]
pub struct Engine {
    groups: VariableGroups,
    polys: Vec<Polynomial>,
    degrees: Vec<Vec<u32>>,
    config: RegenConfig,
    root: WitnessNode,
    patches: PatchSet,
    levels: Vec<Level>,
    /// Randomized prefixes keyed by `(p, c)`: `c` combinations of `f_0..f_{p-1}`.
    prefixes: HashMap<(usize, usize), Vec<Polynomial>>,
}

impl Engine {
    pub fn new(sys: &PolySystem, config: RegenConfig) -> Result<Self> {
        config.validate(sys)?;
        let groups = sys.groups().clone();
        let seed = config.master_seed;
        let root = root_witness(&groups, &mut stream(seed, &[label::ROOT]), &config.track)?;
        let patches = PatchSet::random(&groups, &mut stream(seed, &[label::PATCH]));
        let nvars = groups.total_vars();

        let levels = (0..sys.len())
            .map(|p| {
                let mut rl = stream(seed, &[label::REGEN_LINEAR, p as u64]);
                let mut ga = stream(seed, &[label::GAMMA_A, p as u64]);
                let mut gb = stream(seed, &[label::GAMMA_B, p as u64]);
                let linears: Vec<Vec<Polynomial>> = (0..groups.len())
                    .map(|j| {
                        (0..sys.degrees()[p][j])
                            .map(|_| random_linear(j, &groups, &mut rl))
                            .collect()
                    })
                    .collect();
                let gamma_a = linears
                    .iter()
                    .map(|ls| ls.iter().map(|_| unit_complex(&mut ga)).collect())
                    .collect();
                let product = linears
                    .iter()
                    .flatten()
                    .fold(Polynomial::constant(nvars, Complex64::new(1.0, 0.0)), |acc, l| &acc * l);
                Level {
                    linears,
                    gamma_a,
                    product,
                    gamma_b: unit_complex(&mut gb),
                }
            })
            .collect();

        let ambient = groups.ambient_dim();
        let mut prefixes = HashMap::new();
        for p in 1..sys.len() {
            for c in 1..p.min(ambient + 1) {
                let mut rng = stream(seed, &[label::RANDOMIZE, p as u64, c as u64]);
                prefixes.insert(
                    (p, c),
                    randomized_prefix(&sys.polys()[..p], &sys.degrees()[..p], &groups, c, &mut rng),
                );
            }
        }

        Ok(Self {
            groups,
            polys: sys.polys().to_vec(),
            degrees: sys.degrees().to_vec(),
            config,
            root,
            patches,
            levels,
            prefixes,
        })
    }

    pub fn groups(&self) -> &VariableGroups {
        &self.groups
    }

    pub fn config(&self) -> &RegenConfig {
        &self.config
    }

    pub fn root(&self) -> &WitnessNode {
        &self.root
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    /// The slice of type `e`: the first `e_j` linears of group `j` of the
    /// root slice.
    pub fn slice(&self, e: &SliceType) -> Slice {
        self.root.slice.truncated(e)
    }

    /// Equations cutting out the level-`p` components of codimension `c`.
    fn prefix(&self, p: usize, c: usize) -> Vec<Polynomial> {
        if c == 0 {
            Vec::new()
        } else if c >= p {
            self.polys[..p].to_vec()
        } else {
            self.prefixes[&(p, c)].clone()
        }
    }

    fn codim(&self, e: &SliceType) -> usize {
        self.groups.ambient_dim() - e.sum()
    }

    /// `(j, s)` pairs along which a point of node `(level, e)` regenerates;
    /// `s` is 1-based.
    pub(crate) fn branches(&self, level: usize, e: &SliceType) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.groups.len() {
            if e.0[j] == 0 {
                continue;
            }
            for s in 1..=self.degrees[level][j] as usize {
                out.push((j, s));
            }
        }
        out
    }

    fn stage_a(&self, t: &BranchTask, statics: &[Polynomial]) -> Result<Homotopy> {
        let slice = self.slice(&t.e);
        let start = slice
            .last_of_group(t.j)
            .ok_or_else(|| Error::Config(format!("slice {} has no linear in group {}", t.e, t.j)))?;
        let level = &self.levels[t.level];
        Homotopy::new(
            statics.to_vec(),
            vec![MovingEquation {
                start: start.clone(),
                target: level.linears[t.j][t.s - 1].clone(),
                gamma: level.gamma_a[t.j][t.s - 1],
            }],
            self.groups.clone(),
        )
    }

    fn stage_b(&self, level: usize, statics: &[Polynomial]) -> Result<Homotopy> {
        let l = &self.levels[level];
        Homotopy::new(
            statics.to_vec(),
            vec![MovingEquation {
                start: l.product.clone(),
                target: self.polys[level].clone(),
                gamma: l.gamma_b,
            }],
            self.groups.clone(),
        )
    }

    /// Tracks both stages of one branch and verifies the endpoint.
    pub(crate) fn execute(&self, task: BranchTask) -> Result<BranchResult> {
        let reduced = task
            .e
            .minus(task.j)
            .ok_or_else(|| Error::Config(format!("cannot remove a linear of group {} from {}", task.j, task.e)))?;
        let mut statics = self.prefix(task.level, self.codim(&task.e));
        statics.extend(self.slice(&reduced).polys().cloned());

        let ha = self.stage_a(&task, &statics)?;
        let stage_a = track_path_checked(&ha, &self.patches, &task.parent.point, &self.config.track)?;
        let mut result = BranchResult {
            task,
            stage_a,
            stage_b: None,
            accepted: None,
            rejected: false,
        };
        let Some(mid) = result.stage_a.endpoint.clone().filter(|_| result.stage_a.status == TrackStatus::RegularSuccess)
        else {
            return Ok(result);
        };

        let level = result.task.level;
        let hb = self.stage_b(level, &statics)?;
        let stage_b = track_path_checked(&hb, &self.patches, &mid, &self.config.track)?;
        if stage_b.status == TrackStatus::RegularSuccess {
            let end = stage_b.endpoint.as_ref().expect("regular endpoint");
            let mut target = statics;
            target.push(self.polys[level].clone());
            match self.polish_and_verify(level, &reduced, &target, end) {
                Some(p) => result.accepted = Some(p),
                None => result.rejected = true,
            }
        }
        result.stage_b = Some(stage_b);
        Ok(result)
    }

    /// Newton-polishes `x` in the chart where each projective block's largest
    /// coordinate is `1`, then checks `f_0..f_level` and the slice of type
    /// `e` at the final tolerance.
    fn polish_and_verify(
        &self,
        level: usize,
        e: &SliceType,
        square: &[Polynomial],
        x: &MultiprojectivePoint,
    ) -> Option<MultiprojectivePoint> {
        let groups = &self.groups;
        let normalized = x.normalized(groups).ok()?;
        let flat = normalized.to_flat();
        let pivots: Vec<usize> = (0..groups.len())
            .filter(|&j| groups.group(j).kind == GroupKind::Projective)
            .map(|j| {
                let r = groups.range(j);
                r.start + normalized.block(j).iter().position(|z| *z == Complex64::new(1.0, 0.0)).unwrap_or(0)
            })
            .collect();
        let n = groups.total_vars();
        let f = |y: &[Complex64]| -> Vec<Complex64> {
            let mut out: Vec<Complex64> = square.iter().map(|p| p.evaluate(y)).collect();
            out.extend(pivots.iter().map(|&k| y[k] - 1.0));
            out
        };
        let jac = |y: &[Complex64]| -> ComplexMatrix {
            let mut m = ComplexMatrix::zeros(square.len() + pivots.len(), n);
            for (i, p) in square.iter().enumerate() {
                p.evaluate_with_gradient(y, m.row_mut(i));
            }
            for (i, &k) in pivots.iter().enumerate() {
                m.set(square.len() + i, k, Complex64::new(1.0, 0.0));
            }
            m
        };
        let before = inf_norm(&f(&flat));
        let rep = newton_correct(f, jac, &flat, 0.0, 2);
        let best = if !rep.singular && rep.residual_norm < before {
            rep.final_point
        } else {
            flat
        };
        let point = MultiprojectivePoint::from_flat(groups, &best).ok()?.normalized(groups).ok()?;
        (self.verification_residual(level, e, &point) <= self.config.track.final_tol).then_some(point)
    }

    /// Largest residual of `f_0..f_level` and the slice of type `e` at `x`.
    pub fn verification_residual(&self, level: usize, e: &SliceType, x: &MultiprojectivePoint) -> f64 {
        let flat = x.to_flat();
        self.polys[..=level]
            .iter()
            .chain(self.slice(e).polys())
            .map(|p| p.evaluate(&flat).norm())
            .fold(0.0, f64::max)
    }

    /// Imposes `f_{node.prefix_count}` on one node without persistence:
    /// returns the pass-through node followed by the regenerated children,
    /// each deduplicated. Children with no points are omitted.
    pub fn regenerate_step(&self, node: &WitnessNode) -> Result<Vec<WitnessNode>> {
        let level = node.prefix_count;
        let g = &self.polys[level];
        let (inside, outside) = membership_filter(g, node, self.config.membership_tol);
        let mut out = vec![inside];
        let mut children: BTreeMap<SliceType, Vec<WitnessPoint>> = BTreeMap::new();
        for wp in &outside.points {
            for (j, s) in self.branches(level, &node.slice_type) {
                let r = self.execute(BranchTask {
                    level,
                    e: node.slice_type.clone(),
                    j,
                    s,
                    parent: wp.clone(),
                })?;
                if let Some(point) = r.accepted {
                    children.entry(node.slice_type.minus(j).unwrap()).or_default().push(WitnessPoint {
                        point,
                        point_id: String::new(),
                        parent_id: Some(wp.point_id.clone()),
                    });
                }
            }
        }
        for (e, pts) in children.into_iter().rev() {
            let points = dedup(pts, &self.groups, self.config.dedup_tol);
            out.push(WitnessNode {
                prefix_count: level + 1,
                slice: self.slice(&e),
                slice_type: e,
                points,
            });
        }
        Ok(out)
    }
}

/// `c` random combinations of `polys`, each first lifted to the common
/// multidegree by random linear factors in the projective groups.
fn randomized_prefix<R: rand::Rng + ?Sized>(
    polys: &[Polynomial],
    degrees: &[Vec<u32>],
    groups: &VariableGroups,
    c: usize,
    rng: &mut R,
) -> Vec<Polynomial> {
    let k = groups.len();
    let top: Vec<u32> = (0..k)
        .map(|j| degrees.iter().map(|d| d[j]).max().unwrap_or(0))
        .collect();
    let lifted: Vec<Polynomial> = polys
        .iter()
        .zip(degrees)
        .map(|(f, d)| {
            let mut m = f.clone();
            for j in 0..k {
                if groups.group(j).kind == GroupKind::Projective {
                    for _ in d[j]..top[j] {
                        m = &m * &random_linear(j, groups, rng);
                    }
                }
            }
            m
        })
        .collect();
    let nvars = groups.total_vars();
    (0..c)
        .map(|_| {
            lifted
                .iter()
                .fold(Polynomial::zero(nvars), |acc, f| &acc + &f.scale(unit_complex(rng)))
        })
        .collect()
}
