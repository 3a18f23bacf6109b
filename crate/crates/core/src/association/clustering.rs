use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

use super::{dbscan, normalize_weights, AssignmentScores, Gating, JointAssociationEvent, MeasurementFrame};

/// Settings of the cluster-based event generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    /// DBSCAN radii; each one yields its own partition of the frame.
    pub epsilons: Vec<f64>,
    pub min_pts: usize,
    /// Maximum number of events kept after merging all partitions.
    pub cap: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self { epsilons: vec![0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0], min_pts: 1, cap: 10_000 }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || !self.epsilons.iter().all(|e| *e > 0.0 && e.is_finite()) {
            return Err(domain("cluster radii must be a non-empty list of positive numbers"));
        }
        if self.min_pts == 0 {
            return Err(domain("min_pts must be at least 1"));
        }
        if self.cap == 0 {
            return Err(domain("cluster event cap must be positive"));
        }
        Ok(())
    }
}

/// A group of measurements that moves as one unit, with its admissible
/// labels sorted by decreasing score.
struct Cell {
    members: Vec<usize>,
    options: Vec<(u8, f64)>,
}

/// Events in which each DBSCAN cluster goes wholly to one target or to
/// clutter, merged over all radii in `params`.
///
/// A cluster may go to target `n` when `n`'s gate contains the cluster
/// centroid, or, if no gate does, any gate containing one of its members.
/// Within one partition the best `params.cap` combinations are generated
/// in order of decreasing score; the merged set is deduplicated, sorted by
/// score (ties by assignment) and truncated to `params.cap`. Weights are
/// normalized over the returned set.
pub fn cluster_partitions(
    frame: &MeasurementFrame,
    gating: &Gating,
    params: &ClusterParams,
    scores: &AssignmentScores,
) -> Result<Vec<JointAssociationEvent>> {
    params.validate()?;
    let n_targets = gating.targets.len();
    if scores.n_targets() != n_targets {
        return Err(domain("scores and gating disagree on target count"));
    }
    let cell_sets: Vec<Vec<Cell>> = params
        .epsilons
        .iter()
        .map(|&eps| partition_cells(frame, gating, scores, eps, params.min_pts))
        .collect();
    // Every partition lists its events best first and an assignment scores
    // the same in every partition, so merging the lists gives the union in
    // score order.
    let mut streams: Vec<KBest> = cell_sets.iter().map(|cells| KBest::new(cells, frame.len())).collect();
    let mut heads: BinaryHeap<Head> = BinaryHeap::new();
    for (s, stream) in streams.iter_mut().enumerate() {
        if let Some((assignment, score)) = stream.next() {
            heads.push(Head { score, assignment, stream: s });
        }
    }
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut events: Vec<JointAssociationEvent> = Vec::new();
    while let Some(Head { score, assignment, stream }) = heads.pop() {
        // keep going past the cap only while scores tie with the last kept
        if events.len() >= params.cap && events.last().is_some_and(|e| e.log_weight > score) {
            break;
        }
        if let Some((a, sc)) = streams[stream].next() {
            heads.push(Head { score: sc, assignment: a, stream });
        }
        if seen.insert(assignment.clone()) {
            let mut e = JointAssociationEvent::from_assignment(assignment, n_targets);
            e.log_weight = score;
            events.push(e);
        }
    }
    events.sort_by(|a, b| {
        b.log_weight
            .partial_cmp(&a.log_weight)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.assignment.cmp(&b.assignment))
    });
    events.truncate(params.cap);
    normalize_weights(&mut events)?;
    Ok(events)
}

fn partition_cells(
    frame: &MeasurementFrame,
    gating: &Gating,
    scores: &AssignmentScores,
    eps: f64,
    min_pts: usize,
) -> Vec<Cell> {
    let labels = dbscan(&frame.points, eps, min_pts);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (j, l) in labels.iter().enumerate() {
        match l {
            Some(id) => {
                if groups.len() <= *id {
                    groups.resize(id + 1, Vec::new());
                }
                groups[*id].push(j);
            }
            None => groups.push(vec![j]),
        }
    }
    groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|members| {
            let centroid = members.iter().map(|&j| frame.points[j]).sum::<crate::linalg::Vec2>()
                / members.len() as f64;
            let mut allowed = gating.targets_containing(&centroid);
            if allowed.is_empty() {
                for &j in &members {
                    allowed.extend(gating.targets_containing(&frame.points[j]));
                }
                allowed.sort_unstable();
                allowed.dedup();
            }
            let score = |label: u8| members.iter().map(|&j| scores.score(j, label)).sum::<f64>();
            let mut options: Vec<(u8, f64)> = std::iter::once(0)
                .chain(allowed)
                .map(|l| (l, score(l)))
                .collect();
            if options.iter().any(|(_, s)| s.is_finite()) {
                options.retain(|(_, s)| s.is_finite());
            } else {
                options.truncate(1);
            }
            options.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
            Cell { members, options }
        })
        .collect()
}

struct Candidate {
    score: f64,
    /// Option index per active cell.
    choice: Vec<u8>,
    /// Position of the last incremented active cell.
    last: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .partial_cmp(&other.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.choice.cmp(&self.choice))
    }
}

struct Head {
    score: f64,
    assignment: Vec<u8>,
    stream: usize,
}

impl PartialEq for Head {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Head {}
impl PartialOrd for Head {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Head {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .partial_cmp(&other.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.assignment.cmp(&self.assignment))
            .then_with(|| other.stream.cmp(&self.stream))
    }
}

/// Combinations of one option per cell, in order of decreasing score.
///
/// Scores are additive over cells and options are sorted within each
/// cell, so a best-first walk works. Cells with a choice are ordered by
/// the loss of their first step down; each combination is then reached
/// from exactly one parent through one of three moves on the last moved
/// cell `L`: step `L` further down, step `L + 1` down, or hand the single
/// step of `L` over to `L + 1`. None of them raises the score, and each
/// yielded item adds at most three heap entries.
struct KBest<'a> {
    cells: &'a [Cell],
    active: Vec<usize>,
    base: Vec<u8>,
    root: Option<f64>,
    heap: BinaryHeap<Candidate>,
}

impl<'a> KBest<'a> {
    fn new(cells: &'a [Cell], n_measurements: usize) -> Self {
        let mut active: Vec<usize> = (0..cells.len()).filter(|&c| cells[c].options.len() > 1).collect();
        let first_loss = |c: usize| cells[c].options[0].1 - cells[c].options[1].1;
        active.sort_by(|&a, &b| first_loss(a).partial_cmp(&first_loss(b)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        let mut base = vec![0u8; n_measurements];
        let mut root = 0.0;
        for cell in cells {
            root += cell.options[0].1;
            for &j in &cell.members {
                base[j] = cell.options[0].0;
            }
        }
        let mut heap = BinaryHeap::new();
        if !active.is_empty() {
            let mut first = vec![0u8; active.len()];
            first[0] = 1;
            let c = &cells[active[0]];
            heap.push(Candidate { score: root + c.options[1].1 - c.options[0].1, choice: first, last: 0 });
        }
        Self { cells, active, base, root: Some(root), heap }
    }

    fn opt(&self, a: usize, i: u8) -> f64 {
        self.cells[self.active[a]].options[i as usize].1
    }

    fn assignment(&self, choice: &[u8]) -> Vec<u8> {
        let mut assignment = self.base.clone();
        for (a, &i) in choice.iter().enumerate() {
            if i > 0 {
                let cell = &self.cells[self.active[a]];
                for &j in &cell.members {
                    assignment[j] = cell.options[i as usize].0;
                }
            }
        }
        assignment
    }
}

impl Iterator for KBest<'_> {
    type Item = (Vec<u8>, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if let Some(root) = self.root.take() {
            return Some((self.base.clone(), root));
        }
        let Candidate { score, choice, last: l } = self.heap.pop()?;
        let item = (self.assignment(&choice), score);
        let i = choice[l];
        if (i as usize) + 1 < self.cells[self.active[l]].options.len() {
            let mut next = choice.clone();
            next[l] += 1;
            let s = score + self.opt(l, i + 1) - self.opt(l, i);
            self.heap.push(Candidate { score: s, choice: next, last: l });
        }
        if l + 1 < self.active.len() {
            let step = self.opt(l + 1, 1) - self.opt(l + 1, 0);
            if i == 1 {
                let mut next = choice.clone();
                next[l] = 0;
                next[l + 1] = 1;
                let s = score + step + self.opt(l, 0) - self.opt(l, 1);
                self.heap.push(Candidate { score: s, choice: next, last: l + 1 });
            }
            let mut next = choice;
            next[l + 1] = 1;
            self.heap.push(Candidate { score: score + step, choice: next, last: l + 1 });
        }
        Some(item)
    }
}

#[cfg(test)]
fn k_best(cells: &[Cell], n_measurements: usize, k: usize) -> Vec<(Vec<u8>, f64)> {
    KBest::new(cells, n_measurements).take(k).collect()
}
