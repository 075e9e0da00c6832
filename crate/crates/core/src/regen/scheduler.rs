use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::thread;

use crossbeam_channel::unbounded;
use log::{debug, info, warn};

use super::{
    is_member, touches_torus_boundary, BranchResult, BranchTask, DepthStats, Engine, RegenConfig, RegenOutput,
    Strategy,
};
use crate::error::Result;
use crate::persist::{fresh_point_id, NodeId, SolutionRecord, SolutionStore};
use crate::polysys::{MultiprojectivePoint, PolySystem};
use crate::rng::{label, stream};
use crate::tracker::TrackStatus;
use crate::witness::{multidegree_table, SliceType, WitnessNode, WitnessPoint};

enum Work {
    /// Membership test of one point of node `(level, e)` against `f_level`.
    Expand { level: usize, e: SliceType, wp: WitnessPoint },
    Branch(BranchTask),
}

impl Work {
    fn level(&self) -> usize {
        match self {
            Work::Expand { level, .. } => *level,
            Work::Branch(t) => t.level,
        }
    }
}

struct Queued {
    key: (i64, i64),
    work: Work,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

struct Scheduler<'a> {
    engine: &'a Engine,
    store: Option<SolutionStore>,
    heap: BinaryHeap<Queued>,
    seq: i64,
    nodes: BTreeMap<(usize, SliceType), Vec<WitnessPoint>>,
    used_ids: HashSet<String>,
    stats: Vec<DepthStats>,
    partial: bool,
}

fn id_key(id: &str) -> u64 {
    id.parse().unwrap_or_default()
}

impl<'a> Scheduler<'a> {
    fn push(&mut self, work: Work) {
        self.seq += 1;
        let level = work.level() as i64;
        // Branches of a level run before the expansions they feed, which sit
        // one level deeper.
        let key = match self.engine.config().strategy {
            Strategy::DepthFirst => (level, self.seq),
            Strategy::BreadthFirst => (-level, -self.seq),
        };
        self.heap.push(Queued { key, work });
    }

    fn draw_id(&mut self, kind: u64, parent: &str, j: usize, s: usize) -> String {
        let mut rng = stream(
            self.engine.config().master_seed,
            &[kind, id_key(parent), j as u64, s as u64],
        );
        loop {
            let id = fresh_point_id(&mut rng);
            if self.used_ids.insert(id.clone()) {
                return id;
            }
        }
    }

    fn node_id(&self, level: usize, e: &SliceType, j: usize, s: usize, parent: &str, me: String) -> NodeId {
        NodeId {
            depth: level - 1,
            gens: vec![1; level],
            dim: e.0.clone(),
            var_group: j,
            regen_linear: s,
            parent_point_id: parent.to_string(),
            point_id: me,
        }
    }

    /// Adds `point` to node `(level, e)` unless it is a duplicate or, at the
    /// last level, leaves the torus; persists it and queues its expansion.
    fn register(
        &mut self,
        level: usize,
        e: SliceType,
        point: MultiprojectivePoint,
        parent: &str,
        j: usize,
        s: usize,
    ) -> Result<bool> {
        let engine = self.engine;
        let cfg = engine.config();
        let groups = engine.groups();
        let depth = &mut self.stats[level - 1];
        let leaf = level == engine.polys().len();
        if leaf && touches_torus_boundary(&point, &cfg.torus_groups, cfg.membership_tol) {
            depth.torus_dropped += 1;
            return Ok(false);
        }
        let bucket = self.nodes.entry((level, e.clone())).or_default();
        if bucket
            .iter()
            .any(|q| q.point.projective_distance(&point, groups) < cfg.dedup_tol)
        {
            depth.duplicates += 1;
            debug!("duplicate point at depth {} dim {e}", level - 1);
            return Ok(false);
        }
        let id = self.draw_id(label::POINT_ID, parent, j, s);
        if let Some(store) = &self.store {
            store.save_solution(&SolutionRecord {
                id: self.node_id(level, &e, j, s, parent, id.clone()),
                coordinates: point.to_flat(),
            })?;
        }
        let wp = WitnessPoint {
            point,
            point_id: id,
            parent_id: Some(parent.to_string()),
        };
        self.nodes.get_mut(&(level, e.clone())).unwrap().push(wp.clone());
        *self.stats[level - 1].points.entry(e.clone()).or_default() += 1;
        if level < self.engine.polys().len() {
            self.push(Work::Expand { level, e, wp });
        }
        Ok(true)
    }

    fn expand(&mut self, level: usize, e: SliceType, wp: WitnessPoint) -> Result<()> {
        let engine = self.engine;
        let g = &engine.polys()[level];
        if is_member(g, &wp.point, self.engine.config().membership_tol) {
            self.stats[level].membership_inside += 1;
            return self.register(level + 1, e, wp.point, &wp.point_id, 0, 0).map(|_| ());
        }
        self.stats[level].membership_outside += 1;
        let branches = self.engine.branches(level, &e);
        if branches.is_empty() {
            debug!("point {} of depth {level} has no branch to regenerate along", wp.point_id);
        }
        for (j, s) in branches {
            self.push(Work::Branch(BranchTask {
                level,
                e: e.clone(),
                j,
                s,
                parent: wp.clone(),
            }));
        }
        Ok(())
    }

    fn log_failure(&mut self, r: &BranchResult, stage: u64, status: TrackStatus, coords: Vec<num_complex::Complex64>) -> Result<()> {
        let t = &r.task;
        let id = self.draw_id(label::FAILURE_ID + stage, &t.parent.point_id, t.j + 1, t.s);
        let dim = if stage == 0 { t.e.clone() } else { t.e.minus(t.j).unwrap() };
        if status == TrackStatus::StepFailure {
            warn!(
                "path from point {} failed in stage {} (group {}, linear {})",
                t.parent.point_id,
                if stage == 0 { "A" } else { "B" },
                t.j + 1,
                t.s
            );
        }
        if let Some(store) = &self.store {
            let rec = SolutionRecord {
                id: self.node_id(t.level + 1, &dim, t.j + 1, t.s, &t.parent.point_id, id),
                coordinates: coords,
            };
            store.save_failure(&rec, status.label())?;
        }
        Ok(())
    }

    fn handle(&mut self, r: BranchResult) -> Result<()> {
        let level = r.task.level;
        let engine = self.engine;
        let groups = engine.groups();
        self.stats[level].stage_a.record(r.stage_a.status);
        if r.stage_a.status != TrackStatus::RegularSuccess {
            let coords = match &r.stage_a.endpoint {
                Some(p) => p.normalized(groups).map(|p| p.to_flat()).unwrap_or_else(|_| p.to_flat()),
                None => r.task.parent.point.to_flat(),
            };
            self.partial |= r.stage_a.status == TrackStatus::StepFailure;
            self.log_failure(&r, 0, r.stage_a.status, coords)?;
            return Ok(());
        }
        let Some(b) = &r.stage_b else { return Ok(()) };
        self.stats[level].stage_b.record(b.status);
        if b.status != TrackStatus::RegularSuccess {
            let coords = match &b.endpoint {
                Some(p) => p.normalized(groups).map(|p| p.to_flat()).unwrap_or_else(|_| p.to_flat()),
                None => r.stage_a.endpoint.as_ref().map(|p| p.to_flat()).unwrap_or_default(),
            };
            self.partial |= b.status == TrackStatus::StepFailure;
            self.log_failure(&r, 1, b.status, coords)?;
            return Ok(());
        }
        if r.rejected {
            self.stats[level].rejected += 1;
            debug!("stage-B endpoint from {} failed verification", r.task.parent.point_id);
            return Ok(());
        }
        if let Some(point) = r.accepted.clone() {
            let e = r.task.e.minus(r.task.j).unwrap();
            if self.register(level + 1, e, point, &r.task.parent.point_id, r.task.j + 1, r.task.s)? {
                self.stats[level].regenerated += 1;
            }
        }
        Ok(())
    }

    fn run_inline(&mut self) -> Result<()> {
        while let Some(q) = self.heap.pop() {
            match q.work {
                Work::Expand { level, e, wp } => self.expand(level, e, wp)?,
                Work::Branch(t) => {
                    let r = self.engine.execute(t)?;
                    self.handle(r)?;
                }
            }
        }
        Ok(())
    }

    fn run_pool(&mut self, workers: usize) -> Result<()> {
        let engine = self.engine;
        thread::scope(|scope| {
            let (task_tx, task_rx) = unbounded::<BranchTask>();
            let (res_tx, res_rx) = unbounded::<Result<BranchResult>>();
            for _ in 0..workers {
                let rx = task_rx.clone();
                let tx = res_tx.clone();
                scope.spawn(move || {
                    for t in rx {
                        if tx.send(engine.execute(t)).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(res_tx);
            let mut in_flight = 0usize;
            loop {
                while in_flight < workers {
                    let Some(q) = self.heap.pop() else { break };
                    match q.work {
                        Work::Expand { level, e, wp } => self.expand(level, e, wp)?,
                        Work::Branch(t) => {
                            task_tx.send(t).expect("workers alive");
                            in_flight += 1;
                        }
                    }
                }
                if in_flight == 0 {
                    break;
                }
                let r = res_rx.recv().expect("workers alive")?;
                in_flight -= 1;
                self.handle(r)?;
            }
            Ok(())
        })
    }
}

/// Runs the full multiregeneration of `sys`.
pub fn run(sys: &PolySystem, config: RegenConfig) -> Result<RegenOutput> {
    let workers = config.max_processes;
    let store = match &config.run_dir {
        Some(dir) => Some(SolutionStore::create(dir)?),
        None => None,
    };
    let engine = Engine::new(sys, config)?;
    info!(
        "multiregeneration of {} polynomials in {} variable groups, seed {}",
        sys.len(),
        sys.groups().len(),
        engine.config().master_seed
    );
    let root = engine.root().clone();
    let root_wp = root.points[0].clone();
    let full = root.slice_type.clone();

    let mut sched = Scheduler {
        engine: &engine,
        store,
        heap: BinaryHeap::new(),
        seq: 0,
        nodes: BTreeMap::new(),
        used_ids: HashSet::from([root_wp.point_id.clone()]),
        stats: vec![DepthStats::default(); sys.len()],
        partial: false,
    };
    if !sys.is_empty() {
        sched.push(Work::Expand {
            level: 0,
            e: full,
            wp: root_wp,
        });
    }
    if workers <= 1 {
        sched.run_inline()?;
    } else {
        sched.run_pool(workers)?;
    }

    let mut nodes = vec![root];
    for ((level, e), points) in sched.nodes.into_iter() {
        nodes.push(WitnessNode {
            prefix_count: level,
            slice: engine.slice(&e),
            slice_type: e,
            points,
        });
    }
    // Level ascending, slice type descending.
    nodes.sort_by(|a, b| {
        a.prefix_count
            .cmp(&b.prefix_count)
            .then_with(|| b.slice_type.cmp(&a.slice_type))
    });
    let leaves: Vec<WitnessNode> = nodes
        .iter()
        .filter(|n| n.prefix_count == sys.len())
        .cloned()
        .collect();
    let table = multidegree_table(&leaves, sys.groups());
    for (p, st) in sched.stats.iter().enumerate() {
        info!(
            "depth {p}: {} inside, {} outside, {} stage-A paths, {} stage-B paths, {} regenerated",
            st.membership_inside, st.membership_outside, st.stage_a.tracked, st.stage_b.tracked, st.regenerated
        );
    }
    Ok(RegenOutput {
        table,
        nodes,
        stats: sched.stats,
        partial: sched.partial,
        master_seed: engine.config().master_seed,
    })
}
