//! Predictor-corrector path tracking.
//!
//! A [`Homotopy`] is tracked from `t = 1` (solved) to `t = 0` (target) on an
//! affine chart fixed by one random [`Patch`] per projective group. Each step
//! is an Euler prediction followed by a few Newton corrections; the step size
//! halves on failure and grows after a run of successes. At `t = 0` the
//! endpoint is sharpened by Newton and classified by residual and the
//! smallest singular value of the Jacobian.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{inf_norm, lu_solve, newton_correct, singular_values, ComplexMatrix};
use crate::polysys::{multidegree_of, GroupKind, MultiprojectivePoint, Polynomial, VariableGroups};
use crate::rng::unit_complex;

/// Consecutive accepted steps before the step size grows.
pub const SUCCESSES_BEFORE_INCREASE: usize = 5;

/// Newton iterations spent sharpening an endpoint.
pub const REFINE_MAX_ITER: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TrackSettings {
    pub initial_step: f64,
    pub min_step: f64,
    pub step_increase: f64,
    pub step_decrease: f64,
    pub corrector_tol: f64,
    pub corrector_max_iter: usize,
    /// Residual an endpoint must reach; settable as `FinalTol`.
    pub final_tol: f64,
    pub max_steps: usize,
    pub infinity_threshold: f64,
    /// `σ_min < singular_threshold · ‖J‖₂` marks a singular endpoint.
    pub singular_threshold: f64,
}

impl Default for TrackSettings {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            min_step: 1e-10,
            step_increase: 2.0,
            step_decrease: 0.5,
            corrector_tol: 1e-7,
            corrector_max_iter: 3,
            final_tol: 1e-10,
            max_steps: 10_000,
            infinity_threshold: 1e8,
            singular_threshold: 1e-8,
        }
    }
}

impl TrackSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.min_step
            && self.min_step < self.initial_step
            && self.initial_step <= 1.0
            && self.corrector_tol > 0.0
            && self.final_tol > 0.0
            && self.step_increase >= 1.0
            && 0.0 < self.step_decrease
            && self.step_decrease < 1.0
            && self.corrector_max_iter >= 1
            && self.singular_threshold > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid tracking settings {self:?}")))
        }
    }
}

/// `t·γ·start + (1 − t)·target`.
#[derive(Debug, Clone)]
pub struct MovingEquation {
    pub start: Polynomial,
    pub target: Polynomial,
    pub gamma: Complex64,
}

#[derive(Debug, Clone)]
pub struct Homotopy {
    pub static_eqs: Vec<Polynomial>,
    pub moving: Vec<MovingEquation>,
    pub groups: VariableGroups,
}

impl Homotopy {
    /// Checks that every moving pair keeps its multidegree and that the
    /// system is square once one patch per projective group is added.
    pub fn new(
        static_eqs: Vec<Polynomial>,
        moving: Vec<MovingEquation>,
        groups: VariableGroups,
    ) -> Result<Self> {
        for m in &moving {
            let a = multidegree_of(&m.start, &groups)?;
            let b = multidegree_of(&m.target, &groups)?;
            if a != b {
                return Err(Error::Config(format!(
                    "moving equation changes multidegree {a:?} -> {b:?}"
                )));
            }
        }
        let h = Self {
            static_eqs,
            moving,
            groups,
        };
        h.check_square()?;
        Ok(h)
    }

    fn equation_count(&self) -> usize {
        self.static_eqs.len() + self.moving.len() + self.groups.projective_count()
    }

    fn check_square(&self) -> Result<()> {
        let (equations, variables) = (self.equation_count(), self.groups.total_vars());
        if equations != variables {
            return Err(Error::NotSquare {
                equations,
                variables,
            });
        }
        Ok(())
    }
}

/// `⟨coeffs, x_group⟩ = 1`.
#[derive(Debug, Clone)]
pub struct Patch {
    pub group: usize,
    pub coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct PatchSet {
    patches: Vec<Patch>,
}

impl PatchSet {
    /// One unit-modulus random patch per projective group.
    pub fn random<R: Rng + ?Sized>(groups: &VariableGroups, rng: &mut R) -> Self {
        let patches = groups
            .groups()
            .iter()
            .enumerate()
            .filter(|(_, g)| g.kind == GroupKind::Projective)
            .map(|(j, g)| Patch {
                group: j,
                coeffs: (0..g.len()).map(|_| unit_complex(rng)).collect(),
            })
            .collect();
        Self { patches }
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    /// Rescales every projective block onto its patch. Fails when a block is
    /// (numerically) on the patch's hyperplane at infinity.
    pub fn to_chart(&self, groups: &VariableGroups, p: &MultiprojectivePoint) -> Result<Vec<Complex64>> {
        p.check_shape(groups)?;
        let mut blocks: Vec<Vec<Complex64>> = p.blocks().to_vec();
        for patch in &self.patches {
            let b = &mut blocks[patch.group];
            let s: Complex64 = patch.coeffs.iter().zip(b.iter()).map(|(a, x)| a * x).sum();
            if s.norm() < 1e-14 * inf_norm(b) || s.norm() == 0.0 {
                return Err(Error::Config("point lies at infinity of the patch".into()));
            }
            for z in b.iter_mut() {
                *z /= s;
            }
        }
        Ok(blocks.into_iter().flatten().collect())
    }
}

/// `H(·, t)` with patches appended: rows are static equations, moving
/// equations, then one patch row per projective group.
#[derive(Debug, Clone, Copy)]
pub struct PatchedSystem<'a> {
    h: &'a Homotopy,
    patches: &'a PatchSet,
    t: f64,
}

pub fn make_patched_system<'a>(
    h: &'a Homotopy,
    t: f64,
    patches: &'a PatchSet,
) -> Result<PatchedSystem<'a>> {
    h.check_square()?;
    if patches.patches.len() != h.groups.projective_count() {
        return Err(Error::NotSquare {
            equations: h.static_eqs.len() + h.moving.len() + patches.patches.len(),
            variables: h.groups.total_vars(),
        });
    }
    Ok(PatchedSystem { h, patches, t })
}

impl<'a> PatchedSystem<'a> {
    pub fn at(self, t: f64) -> Self {
        Self { t, ..self }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.h.groups.total_vars()
    }

    pub fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        let t = self.t;
        let mut out = Vec::with_capacity(self.dim());
        out.extend(self.h.static_eqs.iter().map(|f| f.evaluate(x)));
        out.extend(
            self.h
                .moving
                .iter()
                .map(|m| m.gamma * t * m.start.evaluate(x) + (1.0 - t) * m.target.evaluate(x)),
        );
        for p in &self.patches.patches {
            let r = self.h.groups.range(p.group);
            let s: Complex64 = p.coeffs.iter().zip(&x[r]).map(|(a, b)| a * b).sum();
            out.push(s - 1.0);
        }
        out
    }

    /// Jacobian with respect to `x`.
    pub fn jacobian(&self, x: &[Complex64]) -> ComplexMatrix {
        let n = self.dim();
        let t = self.t;
        let mut jac = ComplexMatrix::zeros(n, n);
        let mut row = 0;
        for f in &self.h.static_eqs {
            f.evaluate_with_gradient(x, jac.row_mut(row));
            row += 1;
        }
        let mut gs = vec![Complex64::new(0.0, 0.0); n];
        let mut gt = vec![Complex64::new(0.0, 0.0); n];
        for m in &self.h.moving {
            m.start.evaluate_with_gradient(x, &mut gs);
            m.target.evaluate_with_gradient(x, &mut gt);
            let a = m.gamma * t;
            for ((dst, s), g) in jac.row_mut(row).iter_mut().zip(&gs).zip(&gt) {
                *dst = a * s + (1.0 - t) * g;
            }
            row += 1;
        }
        for p in &self.patches.patches {
            let r = self.h.groups.range(p.group);
            jac.row_mut(row)[r].copy_from_slice(&p.coeffs);
            row += 1;
        }
        jac
    }

    /// `∂H/∂t`: `γ·start − target` on moving rows, zero elsewhere.
    pub fn dt(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        let off = self.h.static_eqs.len();
        for (i, m) in self.h.moving.iter().enumerate() {
            out[off + i] = m.gamma * m.start.evaluate(x) - m.target.evaluate(x);
        }
        out
    }

    /// `1 / max(1, largest term magnitude)` per row at `x`. Scaling rows by
    /// these leaves Newton iterates unchanged but makes residual tests
    /// relative when the chart coordinates are large.
    pub fn row_weights(&self, x: &[Complex64]) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.dim());
        w.extend(self.h.static_eqs.iter().map(|f| f.term_scale(x)));
        w.extend(
            self.h
                .moving
                .iter()
                .map(|m| m.start.term_scale(x).max(m.target.term_scale(x))),
        );
        for p in &self.patches.patches {
            let r = self.h.groups.range(p.group);
            w.push(p.coeffs.iter().zip(&x[r]).map(|(a, b)| (a * b).norm()).fold(0.0, f64::max));
        }
        w.into_iter().map(|s| 1.0 / s.max(1.0)).collect()
    }
}

fn weighted(mut v: Vec<Complex64>, w: &[f64]) -> Vec<Complex64> {
    for (vi, wi) in v.iter_mut().zip(w) {
        *vi *= *wi;
    }
    v
}

fn weighted_rows(mut m: ComplexMatrix, w: &[f64]) -> ComplexMatrix {
    for (i, wi) in w.iter().enumerate() {
        for z in m.row_mut(i) {
            *z *= *wi;
        }
    }
    m
}

/// Largest first Newton update accepted, relative to the predictor move.
const MAX_CORRECTION_RATIO: f64 = 0.5;
/// Required shrink factor between consecutive Newton updates.
const CONTRACTION: f64 = 0.5;

/// Newton correction of a predicted point. Rejects the step unless the
/// updates contract and the first update is small next to the predictor
/// move, which keeps the corrector from settling on a neighbouring path.
fn correct(there: PatchedSystem<'_>, from: &[Complex64], pred: Vec<Complex64>, s: &TrackSettings) -> Option<Vec<Complex64>> {
    let w = there.row_weights(&pred);
    let moved: f64 = inf_norm(&from.iter().zip(&pred).map(|(a, b)| a - b).collect::<Vec<_>>());
    let floor = 1e-12 * (1.0 + inf_norm(&pred));
    let mut x = pred;
    let mut fx = weighted(there.eval(&x), &w);
    let mut last = f64::INFINITY;
    for k in 0..s.corrector_max_iter {
        if k > 0 && inf_norm(&fx) <= s.corrector_tol {
            return Some(x);
        }
        let dx = lu_solve(&weighted_rows(there.jacobian(&x), &w), &fx).ok()?;
        let size = inf_norm(&dx);
        let limit = if k == 0 { MAX_CORRECTION_RATIO * moved } else { CONTRACTION * last };
        if size > limit.max(floor) {
            return None;
        }
        last = size;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi -= di;
        }
        fx = weighted(there.eval(&x), &w);
    }
    (inf_norm(&fx) <= s.corrector_tol).then_some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrackStatus {
    RegularSuccess,
    SingularEndpoint,
    Diverged,
    StepFailure,
}

impl TrackStatus {
    pub fn label(self) -> &'static str {
        match self {
            TrackStatus::RegularSuccess => "regular",
            TrackStatus::SingularEndpoint => "singular",
            TrackStatus::Diverged => "diverged",
            TrackStatus::StepFailure => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrackOutcome {
    pub status: TrackStatus,
    /// Chart coordinates of the endpoint, present for regular and singular
    /// endpoints.
    pub endpoint: Option<MultiprojectivePoint>,
    pub residual: f64,
    pub sigma_min: f64,
    pub steps: usize,
}

impl TrackOutcome {
    fn failed(status: TrackStatus, residual: f64, steps: usize) -> Self {
        Self {
            status,
            endpoint: None,
            residual,
            sigma_min: f64::NAN,
            steps,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Refined {
    pub point: Vec<Complex64>,
    pub residual: f64,
    /// The Jacobian became singular or `final_tol` was not reached.
    pub flagged: bool,
}

/// Newton-sharpens `x` to `final_tol`, keeping the best iterate seen.
pub fn refine_endpoint<F, J>(f: F, jac: J, x: &[Complex64], final_tol: f64) -> Refined
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
    J: Fn(&[Complex64]) -> ComplexMatrix,
{
    let r0 = inf_norm(&f(x));
    if r0 <= final_tol {
        // One more step rarely hurts a regular root and tightens the residual.
        let rep = newton_correct(&f, &jac, x, 0.0, 1);
        if !rep.singular && rep.residual_norm < r0 {
            return Refined {
                point: rep.final_point,
                residual: rep.residual_norm,
                flagged: false,
            };
        }
        return Refined {
            point: x.to_vec(),
            residual: r0,
            flagged: false,
        };
    }
    let mut best = (x.to_vec(), r0);
    let mut cur = x.to_vec();
    let mut singular = false;
    for _ in 0..REFINE_MAX_ITER {
        let rep = newton_correct(&f, &jac, &cur, final_tol, 1);
        if rep.singular {
            singular = true;
            break;
        }
        cur = rep.final_point;
        if rep.residual_norm < best.1 {
            best = (cur.clone(), rep.residual_norm);
        }
        if rep.residual_norm <= final_tol {
            break;
        }
    }
    let flagged = singular || best.1 > final_tol;
    Refined {
        point: best.0,
        residual: best.1,
        flagged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointClass {
    pub status: TrackStatus,
    pub residual: f64,
    pub sigma_min: f64,
}

/// Regular iff the residual meets `final_tol` and the Jacobian is well
/// conditioned; singular iff only the residual meets it.
pub fn classify_endpoint<F, J>(f: F, jac: J, x: &[Complex64], s: &TrackSettings) -> EndpointClass
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
    J: Fn(&[Complex64]) -> ComplexMatrix,
{
    let residual = inf_norm(&f(x));
    let sv = singular_values(&jac(x));
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let sigma_min = sv.last().copied().unwrap_or(0.0);
    let status = if residual.is_nan() || residual > s.final_tol {
        TrackStatus::StepFailure
    } else if sigma_min >= s.singular_threshold * sigma_max && sigma_max > 0.0 {
        TrackStatus::RegularSuccess
    } else {
        TrackStatus::SingularEndpoint
    };
    EndpointClass {
        status,
        residual,
        sigma_min,
    }
}

fn diverged(groups: &VariableGroups, x: &[Complex64], threshold: f64) -> bool {
    (0..groups.len()).any(|j| {
        let m = inf_norm(&x[groups.range(j)]);
        m.is_nan() || m > threshold
    })
}

impl Homotopy {
    /// The same deformation run from `t = 0` back to `t = 1`.
    pub fn reversed(&self) -> Homotopy {
        Homotopy {
            static_eqs: self.static_eqs.clone(),
            moving: self
                .moving
                .iter()
                .map(|m| MovingEquation {
                    start: m.target.clone(),
                    target: m.start.clone(),
                    gamma: m.gamma.inv(),
                })
                .collect(),
            groups: self.groups.clone(),
        }
    }
}

/// Retracks allowed by [`track_path_checked`] after a failed round trip.
pub const ROUND_TRIP_RETRIES: usize = 3;

/// [`track_path`], then back again from a regular endpoint. If the return
/// trip misses `start`, the forward path jumped to a neighbouring path and
/// is retracked with a quarter of the step size.
pub fn track_path_checked(
    h: &Homotopy,
    patches: &PatchSet,
    start: &MultiprojectivePoint,
    s: &TrackSettings,
) -> Result<TrackOutcome> {
    let back = h.reversed();
    let x0 = match patches.to_chart(&h.groups, start) {
        Ok(x) => x,
        Err(_) => return track_path(h, patches, start, s),
    };
    let mut settings = s.clone();
    let mut total = 0;
    for attempt in 0..=ROUND_TRIP_RETRIES {
        let mut out = track_path(h, patches, start, &settings)?;
        total += out.steps;
        let Some(end) = out.endpoint.as_ref().filter(|_| out.status == TrackStatus::RegularSuccess) else {
            out.steps = total;
            return Ok(out);
        };
        let ret = track_path(&back, patches, end, &settings)?;
        total += ret.steps;
        let home = ret.endpoint.as_ref().map(|p| {
            let y = p.to_flat();
            let d: Vec<Complex64> = y.iter().zip(&x0).map(|(a, b)| a - b).collect();
            inf_norm(&d) <= 1e-6 * (1.0 + inf_norm(&x0))
        });
        if ret.status == TrackStatus::RegularSuccess && home == Some(true) {
            out.steps = total;
            return Ok(out);
        }
        if attempt == ROUND_TRIP_RETRIES {
            log::warn!("path still fails its round trip after {ROUND_TRIP_RETRIES} retracks");
            return Ok(TrackOutcome::failed(TrackStatus::StepFailure, out.residual, total));
        }
        settings.initial_step *= 0.25;
    }
    unreachable!()
}

/// Tracks one path of `h` from `start` at `t = 1` to `t = 0`.
pub fn track_path(
    h: &Homotopy,
    patches: &PatchSet,
    start: &MultiprojectivePoint,
    s: &TrackSettings,
) -> Result<TrackOutcome> {
    let sys = make_patched_system(h, 1.0, patches)?;
    let groups = &h.groups;
    let x0 = match patches.to_chart(groups, start) {
        Ok(x) => x,
        Err(Error::Config(_)) => return Ok(TrackOutcome::failed(TrackStatus::StepFailure, f64::NAN, 0)),
        Err(e) => return Err(e),
    };

    let polish = newton_correct(
        |x| sys.eval(x),
        |x| sys.jacobian(x),
        &x0,
        s.corrector_tol * 1e-3,
        s.corrector_max_iter,
    );
    if polish.singular || polish.residual_norm.is_nan() || polish.residual_norm > s.corrector_tol {
        return Ok(TrackOutcome::failed(
            TrackStatus::StepFailure,
            polish.residual_norm,
            0,
        ));
    }

    let mut x = polish.final_point;
    let mut t = 1.0f64;
    let mut step = s.initial_step;
    let mut successes = 0;
    let mut steps = 0;

    while t > 0.0 {
        if steps >= s.max_steps {
            return Ok(TrackOutcome::failed(TrackStatus::StepFailure, f64::NAN, steps));
        }
        steps += 1;
        let h_step = step.min(t);
        // Snap to the endpoint when the remainder is below the minimum step.
        let t_next = if t - h_step < s.min_step { 0.0 } else { t - h_step };
        let dt = t - t_next;

        let here = sys.at(t);
        let accepted = lu_solve(&here.jacobian(&x), &here.dt(&x))
            .ok()
            .and_then(|v| {
                let pred: Vec<Complex64> = x.iter().zip(&v).map(|(xi, vi)| xi + vi * dt).collect();
                correct(sys.at(t_next), &x, pred, s)
            });

        match accepted {
            Some(next) => {
                x = next;
                t = t_next;
                if diverged(groups, &x, s.infinity_threshold) {
                    return Ok(TrackOutcome::failed(TrackStatus::Diverged, f64::NAN, steps));
                }
                successes += 1;
                if successes >= SUCCESSES_BEFORE_INCREASE {
                    step = (step * s.step_increase).min(s.initial_step);
                    successes = 0;
                }
            }
            None => {
                successes = 0;
                step *= s.step_decrease;
                if step < s.min_step {
                    return Ok(TrackOutcome::failed(TrackStatus::StepFailure, f64::NAN, steps));
                }
            }
        }
    }

    let end = sys.at(0.0);
    // Residuals at the endpoint are relative to the term sizes there.
    let w = end.row_weights(&x);
    let f = |y: &[Complex64]| weighted(end.eval(y), &w);
    let jac = |y: &[Complex64]| weighted_rows(end.jacobian(y), &w);
    let refined = refine_endpoint(f, jac, &x, s.final_tol);
    if diverged(groups, &refined.point, s.infinity_threshold) {
        return Ok(TrackOutcome::failed(TrackStatus::Diverged, refined.residual, steps));
    }
    let class = classify_endpoint(f, jac, &refined.point, s);
    let endpoint = match class.status {
        TrackStatus::RegularSuccess | TrackStatus::SingularEndpoint => {
            Some(MultiprojectivePoint::from_flat(groups, &refined.point)?)
        }
        _ => None,
    };
    Ok(TrackOutcome {
        status: class.status,
        endpoint,
        residual: class.residual,
        sigma_min: class.sigma_min,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::{parse_equations, parse_variables, random_linear};
    use crate::rng::stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one() -> Complex64 {
        c(1.0, 0.0)
    }

    fn poly(vars: &str, eq: &str) -> (VariableGroups, Polynomial) {
        let g = parse_variables(vars).unwrap();
        let sys = parse_equations(&format!("function f; f = {eq};"), &g).unwrap();
        (g, sys.polys()[0].clone())
    }

    #[test]
    fn patched_system_interpolates() {
        let (g, l) = poly("hom_variable_group x, y;", "x - 2*y");
        let (_, r) = poly("hom_variable_group x, y;", "x + 3*y");
        let gamma = unit_complex(&mut stream(4, &[]));
        let h = Homotopy::new(
            vec![],
            vec![MovingEquation {
                start: l.clone(),
                target: r.clone(),
                gamma,
            }],
            g.clone(),
        )
        .unwrap();
        let patches = PatchSet::random(&g, &mut stream(5, &[]));
        let x = [c(0.3, 0.2), c(-1.1, 0.4)];
        let s1 = make_patched_system(&h, 1.0, &patches).unwrap();
        assert!((s1.eval(&x)[0] - gamma * l.evaluate(&x)).norm() < 1e-15);
        let s0 = s1.at(0.0);
        assert_eq!(s0.eval(&x)[0], r.evaluate(&x));

        let mut h1 = h.clone();
        h1.moving[0].gamma = one();
        let half = make_patched_system(&h1, 0.5, &patches).unwrap();
        let mid = (l.evaluate(&x) + r.evaluate(&x)) / 2.0;
        assert!((half.eval(&x)[0] - mid).norm() < 1e-15);
    }

    #[test]
    fn non_square_rejected() {
        let (g, l) = poly("hom_variable_group x, y, z;", "x - 2*y");
        let e = Homotopy::new(
            vec![],
            vec![MovingEquation {
                start: l.clone(),
                target: l,
                gamma: one(),
            }],
            g,
        );
        assert!(matches!(e, Err(Error::NotSquare { .. })));
    }

    #[test]
    fn degree_changing_pair_rejected() {
        let (g, l) = poly("hom_variable_group x, y;", "x - 2*y");
        let (_, q) = poly("hom_variable_group x, y;", "x^2 - y^2");
        assert!(Homotopy::new(
            vec![],
            vec![MovingEquation {
                start: l,
                target: q,
                gamma: one()
            }],
            g
        )
        .is_err());
    }

    #[test]
    fn linear_root_motion_affine() {
        let (g, a) = poly("variable_group x;", "x - 1");
        let (_, b) = poly("variable_group x;", "x - 2");
        let h = Homotopy::new(
            vec![],
            vec![MovingEquation {
                start: a,
                target: b,
                gamma: one(),
            }],
            g.clone(),
        )
        .unwrap();
        let patches = PatchSet::random(&g, &mut stream(0, &[]));
        let start = MultiprojectivePoint::new(vec![vec![one()]]);
        let out = track_path(&h, &patches, &start, &TrackSettings::default()).unwrap();
        assert_eq!(out.status, TrackStatus::RegularSuccess);
        assert!((out.endpoint.unwrap().block(0)[0] - 2.0).norm() < 1e-10);
    }

    /// Moves a generic line across the unit circle; the endpoint must be one
    /// of the two closed-form intersections of the circle with the new line.
    #[test]
    fn slice_move_on_circle() {
        let vars = "variable_group x, y;";
        let (g, circle) = poly(vars, "x^2 + y^2 - 1");
        // start line: y = 0.3 ; target line: x - 0.5 y = 0.2
        let (_, l0) = poly(vars, "y - 0.3");
        let (_, l1) = poly(vars, "x - 0.5*y - 0.2");
        let gamma = unit_complex(&mut stream(9, &[]));
        let h = Homotopy::new(
            vec![circle.clone()],
            vec![MovingEquation {
                start: l0,
                target: l1.clone(),
                gamma,
            }],
            g.clone(),
        )
        .unwrap();
        let patches = PatchSet::random(&g, &mut stream(1, &[]));
        let x0 = (1.0f64 - 0.09).sqrt();
        let start = MultiprojectivePoint::new(vec![vec![c(x0, 0.0), c(0.3, 0.0)]]);
        let s = TrackSettings::default();
        let out = track_path(&h, &patches, &start, &s).unwrap();
        assert_eq!(out.status, TrackStatus::RegularSuccess);
        let end = out.endpoint.unwrap().to_flat();
        assert!(out.residual < s.final_tol);
        // x = 0.2 + 0.5 y, (0.2 + 0.5y)^2 + y^2 = 1 -> 1.25 y^2 + 0.2 y - 0.96 = 0
        let disc: f64 = 0.04 + 4.0 * 1.25 * 0.96;
        let roots = [(-0.2 + disc.sqrt()) / 2.5, (-0.2 - disc.sqrt()) / 2.5];
        let hit = roots.iter().any(|&y| {
            (end[1] - y).norm() < 1e-9 && (end[0] - (0.2 + 0.5 * y)).norm() < 1e-9
        });
        assert!(hit, "{end:?}");
        assert!(circle.evaluate(&end).norm() < s.final_tol);
        assert!(l1.evaluate(&end).norm() < s.final_tol);
    }

    /// `t(x - 1) + (1 - t)` has the root `x = 2 - 1/t`, which escapes to
    /// infinity as `t -> 0`. Built directly since the pair changes degree.
    #[test]
    fn escaping_root_diverges() {
        let (g, a) = poly("variable_group x;", "x - 1");
        let b = Polynomial::constant(1, one());
        let h = Homotopy {
            static_eqs: vec![],
            moving: vec![MovingEquation {
                start: a,
                target: b,
                gamma: one(),
            }],
            groups: g.clone(),
        };
        let patches = PatchSet::random(&g, &mut stream(2, &[]));
        let start = MultiprojectivePoint::new(vec![vec![one()]]);
        let s = TrackSettings {
            max_steps: 100_000,
            ..TrackSettings::default()
        };
        let out = track_path(&h, &patches, &start, &s).unwrap();
        assert_eq!(out.status, TrackStatus::Diverged, "{out:?}");
    }

    #[test]
    fn refine_examples() {
        let f = |x: &[Complex64]| vec![x[0] * x[0] - 2.0];
        let j = |x: &[Complex64]| ComplexMatrix::from_rows(&[vec![x[0] * 2.0]]);
        let r = refine_endpoint(f, j, &[c(1.41, 0.0)], 1e-12);
        assert!((r.point[0] - 2f64.sqrt()).norm() < 1e-12);
        assert!(!r.flagged);

        let f1 = |x: &[Complex64]| vec![x[0] - 3.0];
        let j1 = |_: &[Complex64]| ComplexMatrix::from_rows(&[vec![one()]]);
        let r = refine_endpoint(f1, j1, &[c(3.0, 0.0)], 1e-12);
        assert_eq!(r.point[0], c(3.0, 0.0));
        assert_eq!(r.residual, 0.0);

        let f2 = |x: &[Complex64]| vec![x[0] * x[0]];
        let j2 = |x: &[Complex64]| ComplexMatrix::from_rows(&[vec![x[0] * 2.0]]);
        let r = refine_endpoint(f2, j2, &[c(1e-4, 0.0)], 1e-30);
        assert!(r.flagged);
    }

    #[test]
    fn classify_examples() {
        let s = TrackSettings::default();
        let f = |x: &[Complex64]| vec![x[0] * x[0] - 1.0];
        let j = |x: &[Complex64]| ComplexMatrix::from_rows(&[vec![x[0] * 2.0]]);
        assert_eq!(
            classify_endpoint(f, j, &[one()], &s).status,
            TrackStatus::RegularSuccess
        );
        let f2 = |x: &[Complex64]| vec![x[0] * x[0]];
        let j2 = |x: &[Complex64]| ComplexMatrix::from_rows(&[vec![x[0] * 2.0]]);
        assert_eq!(
            classify_endpoint(f2, j2, &[c(0.0, 0.0)], &s).status,
            TrackStatus::SingularEndpoint
        );
        assert_eq!(
            classify_endpoint(f, j, &[c(2.0, 0.0)], &s).status,
            TrackStatus::StepFailure
        );
    }

    /// Conic through a slice move in P^2: the homotopy stays homogeneous in
    /// x for every t, and two step schedules reach the same endpoint.
    #[test]
    fn homogeneity_and_schedule_independence() {
        let vars = "hom_variable_group x, y, z;";
        let (g, conic) = poly(vars, "x^2 + (0.3+I)*y^2 - 2*z^2 + x*y");
        let mut rng = stream(13, &[]);
        let l0 = random_linear(0, &g, &mut rng);
        let l1 = random_linear(0, &g, &mut rng);
        let h = Homotopy::new(
            vec![conic.clone()],
            vec![MovingEquation {
                start: l0.clone(),
                target: l1,
                gamma: unit_complex(&mut rng),
            }],
            g.clone(),
        )
        .unwrap();
        let patches = PatchSet::random(&g, &mut rng);
        let sys = make_patched_system(&h, 0.37, &patches).unwrap();
        let x = [c(0.2, 0.4), c(-0.5, 0.1), c(0.9, -0.3)];
        let lam = c(0.7, -1.3);
        let xs: Vec<Complex64> = x.iter().map(|z| z * lam).collect();
        let a = sys.eval(&x);
        let b = sys.eval(&xs);
        assert!((b[0] - lam * lam * a[0]).norm() < 1e-12 * a[0].norm().max(1.0));
        assert!((b[1] - lam * a[1]).norm() < 1e-12 * a[1].norm().max(1.0));

        // A start point on conic ∩ l0: solve l0 for z given x, y on a line.
        let start = conic_line_point(&conic, &l0);
        let s1 = TrackSettings::default();
        let s2 = TrackSettings {
            initial_step: 0.05,
            ..s1.clone()
        };
        let e1 = track_path(&h, &patches, &start, &s1).unwrap();
        let e2 = track_path(&h, &patches, &start, &s2).unwrap();
        assert_eq!(e1.status, TrackStatus::RegularSuccess);
        assert_eq!(e2.status, TrackStatus::RegularSuccess);
        let p1 = e1.endpoint.unwrap().normalized(&g).unwrap();
        let p2 = e2.endpoint.unwrap().normalized(&g).unwrap();
        assert!(p1.projective_distance(&p2, &g) < 1e-8);
    }

    /// An intersection point of a conic and a line in P^2, by parametrizing
    /// the line and solving the quadratic.
    fn conic_line_point(conic: &Polynomial, line: &Polynomial) -> MultiprojectivePoint {
        let coef = |v: usize| {
            line.terms()
                .iter()
                .find(|t| t.exponents[v] == 1)
                .unwrap()
                .coeff
        };
        let (a, b, cz) = (coef(0), coef(1), coef(2));
        // points p(s) = (1, s, -(a + b s)/c)
        let at = |s: Complex64| vec![one(), s, -(a + b * s) / cz];
        let q = |s: Complex64| conic.evaluate(&at(s));
        // quadratic through three samples
        let (f0, f1, fm) = (q(c(0.0, 0.0)), q(one()), q(-one()));
        let qa = (f1 + fm) / 2.0 - f0;
        let qb = (f1 - fm) / 2.0;
        let disc = (qb * qb - 4.0 * qa * f0).sqrt();
        let s = (-qb + disc) / (2.0 * qa);
        MultiprojectivePoint::new(vec![at(s)])
    }
}
