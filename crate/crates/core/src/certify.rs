//! Exhaustive fiber-connectivity certification.
//!
//! The ideal of the claw-tree model is generated in degree `m` exactly when
//! every fiber is connected under moves of degree at most `m`. Two multisets
//! `M != M'` of degree `d` in one fiber are one such move apart iff they
//! share at least `d - m` flows, so each fiber is checked by pairwise
//! intersection counts and a union-find.

use std::collections::VecDeque;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::fiber::{
    compatible, enumerate_fiber_indices, partition_fibers, signature, ColumnSignature, FiberView, FlowMultiset,
    FlowTable, DEFAULT_FIBER_CAP, DEFAULT_SWEEP_CAP,
};
use crate::flow::DEFAULT_FLOW_CAP;
use crate::group::Group;
use crate::moves::Move;

pub mod oracle;

/// Union-find whose roots are always the smallest member of their set.
#[derive(Debug, Clone)]
pub(crate) struct MinUnionFind {
    parent: Vec<usize>,
}

impl MinUnionFind {
    pub(crate) fn new(len: usize) -> Self {
        MinUnionFind {
            parent: (0..len).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            let up = self.parent[self.parent[x]];
            self.parent[x] = up;
            x = up;
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Number of common entries of two sorted slices, counted with multiplicity.
#[inline]
pub(crate) fn common_count(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Component label of every member: the position of the smallest member of
/// its component. Members must be in canonical (ascending) order for the
/// representative to be the canonical minimum.
pub(crate) fn component_representatives<'a, F>(len: usize, member: F, degree: usize, m: usize) -> Vec<usize>
where
    F: Fn(usize) -> &'a [u32],
{
    if m >= degree {
        return vec![0; len];
    }
    let need = degree - m;
    let mut uf = MinUnionFind::new(len);
    let mut components = len;
    for a in 0..len {
        let ma = member(a);
        for b in a + 1..len {
            if common_count(ma, member(b)) >= need && uf.union(a, b) {
                components -= 1;
                if components == 1 {
                    return vec![0; len];
                }
            }
        }
    }
    (0..len).map(|x| uf.find(x)).collect()
}

/// Component decomposition of one fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// For each input position, the position of the canonical minimum of its
    /// component.
    pub representative: Vec<usize>,
    /// Component representatives in ascending canonical order.
    pub roots: Vec<usize>,
}

impl Components {
    fn from_reps(representative: Vec<usize>) -> Self {
        let mut roots: Vec<usize> = representative.clone();
        roots.sort_unstable();
        roots.dedup();
        Components { representative, roots }
    }

    pub fn count(&self) -> usize {
        self.roots.len()
    }

    pub fn is_connected(&self) -> bool {
        self.roots.len() <= 1
    }
}

/// Connected components of a fiber under moves of degree at most `m`.
pub fn fiber_connected_under(fiber: &[FlowMultiset], m: usize) -> Result<Components> {
    if m < 2 {
        return Err(FlowError::Precondition(format!(
            "move bound must be at least 2, got {m}"
        )));
    }
    let Some(first) = fiber.first() else {
        return Ok(Components::from_reps(Vec::new()));
    };
    let sig = signature(first);
    for other in &fiber[1..] {
        if first.check_same_shape(other).is_err() || other.degree() != first.degree() || signature(other) != sig {
            return Err(FlowError::InvalidFiber(format!(
                "{other} has a different signature than {first}"
            )));
        }
    }
    let table = FlowTable::new(first.group(), first.n())?;
    // canonical order so representatives are canonical minima
    let mut order: Vec<usize> = (0..fiber.len()).collect();
    order.sort_by(|&a, &b| fiber[a].cmp(&fiber[b]));
    let indices: Vec<Vec<u32>> = order
        .iter()
        .map(|&k| table.indices_of(&fiber[k]))
        .collect::<Result<_>>()?;
    let reps_sorted = component_representatives(indices.len(), |k| &indices[k], first.degree(), m);
    let mut representative = vec![0; fiber.len()];
    for (sorted_pos, &orig) in order.iter().enumerate() {
        representative[orig] = order[reps_sorted[sorted_pos]];
    }
    Ok(Components::from_reps(representative))
}

/// Two multisets of one fiber lying in different components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub degree: usize,
    pub signature: Vec<Vec<u32>>,
    pub fiber_size: usize,
    pub components: usize,
    pub first: Vec<Vec<u32>>,
    pub second: Vec<Vec<u32>>,
}

impl Witness {
    pub fn multisets(&self, group: &Group, n: usize) -> Result<(FlowMultiset, FlowMultiset)> {
        Ok((
            FlowMultiset::from_codes(group, n, &self.first)?,
            FlowMultiset::from_codes(group, n, &self.second)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Disconnected,
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub degree: usize,
    pub fiber_count: usize,
    pub multiset_count: usize,
    pub disconnected_count: usize,
    pub largest_fiber: usize,
}

/// Where a sweep stopped because a cap was reached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapDiagnostic {
    pub degree: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub format: u32,
    pub group: Group,
    pub n: usize,
    pub d_max: usize,
    pub m: usize,
    pub degrees: Vec<DegreeSummary>,
    pub witnesses: Vec<Witness>,
    pub verdict: Verdict,
    pub statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<CapDiagnostic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl CertificationReport {
    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub flow_cap: u128,
    pub sweep_cap: u128,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Keep sweeping after the first disconnected degree and record every
    /// witness.
    pub all_witnesses: bool,
    /// Record wall time in the report. Off by default so reports are
    /// reproducible byte for byte.
    pub timing: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            flow_cap: DEFAULT_FLOW_CAP,
            sweep_cap: DEFAULT_SWEEP_CAP,
            threads: None,
            all_witnesses: false,
            timing: false,
        }
    }
}

pub(crate) fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| FlowError::InternalInvariant(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

struct FiberOutcome {
    size: usize,
    components: usize,
    second: usize,
}

fn check_fiber(view: &FiberView<'_>, m: usize) -> FiberOutcome {
    let reps = component_representatives(view.len(), |k| view.member(k), view.degree(), m);
    let mut roots = reps.clone();
    roots.sort_unstable();
    roots.dedup();
    FiberOutcome {
        size: view.len(),
        components: roots.len(),
        second: roots.get(1).copied().unwrap_or(0),
    }
}

/// Checks every fiber of degree `2..=d_max` for connectivity under moves of
/// degree at most `m`.
pub fn certify_degree(group: &Group, n: usize, d_max: usize, m: usize) -> Result<CertificationReport> {
    certify_degree_with(group, n, d_max, m, &CertifyOptions::default())
}

pub fn certify_degree_with(
    group: &Group,
    n: usize,
    d_max: usize,
    m: usize,
    opts: &CertifyOptions,
) -> Result<CertificationReport> {
    if m < 2 {
        return Err(FlowError::Precondition(format!(
            "move bound must be at least 2, got {m}"
        )));
    }
    if d_max < m {
        return Err(FlowError::Precondition(format!(
            "d_max = {d_max} is smaller than m = {m}"
        )));
    }
    if n == 0 {
        return Err(FlowError::Precondition("n must be at least 1".into()));
    }
    let start = Instant::now();
    let table = FlowTable::with_cap(group, n, opts.flow_cap)?;

    let mut degrees = Vec::new();
    let mut witnesses = Vec::new();
    let mut cap = None;

    for d in 2..=d_max {
        let partition = match with_pool(opts.threads, || partition_fibers(table.clone(), d, opts.sweep_cap))? {
            Ok(p) => p,
            Err(e @ FlowError::Capacity { .. }) => {
                cap = Some(CapDiagnostic {
                    degree: d,
                    message: e.to_string(),
                });
                break;
            }
            Err(e) => return Err(e),
        };
        let outcomes: Vec<FiberOutcome> = with_pool(opts.threads, || {
            (0..partition.fiber_count())
                .into_par_iter()
                .map(|k| check_fiber(&partition.fiber(k), m))
                .collect()
        })?;

        let mut summary = DegreeSummary {
            degree: d,
            fiber_count: partition.fiber_count(),
            multiset_count: partition.multiset_count(),
            disconnected_count: 0,
            largest_fiber: 0,
        };
        for (k, out) in outcomes.iter().enumerate() {
            summary.largest_fiber = summary.largest_fiber.max(out.size);
            if out.components > 1 {
                summary.disconnected_count += 1;
                if opts.all_witnesses || witnesses.is_empty() {
                    let view = partition.fiber(k);
                    witnesses.push(Witness {
                        degree: d,
                        signature: view.signature().rows(),
                        fiber_size: out.size,
                        components: out.components,
                        first: table.multiset(view.member(0)).codes(),
                        second: table.multiset(view.member(out.second)).codes(),
                    });
                }
            }
        }
        let stop = summary.disconnected_count > 0 && !opts.all_witnesses;
        degrees.push(summary);
        if stop {
            break;
        }
    }

    let verdict = if !witnesses.is_empty() {
        Verdict::Disconnected
    } else if cap.is_some() {
        Verdict::Incomplete
    } else {
        Verdict::Verified
    };
    let statement = match verdict {
        Verdict::Verified => format!(
            "verified up to degree {d_max} for n = {n}: every fiber of degree 2..={d_max} over {group} is connected under moves of degree <= {m}"
        ),
        Verdict::Disconnected => format!(
            "not generated in degree {m} for n = {n}: a fiber of degree {} over {group} is disconnected under moves of degree <= {m}",
            witnesses[0].degree
        ),
        Verdict::Incomplete => format!(
            "incomplete: connected up to degree {} for n = {n} over {group}; capacity reached at degree {}",
            degrees.last().map_or(1, |s| s.degree),
            cap.as_ref().map_or(0, |c| c.degree)
        ),
    };

    Ok(CertificationReport {
        format: 1,
        group: group.clone(),
        n,
        d_max,
        m,
        degrees,
        witnesses,
        verdict,
        statement,
        cap,
        elapsed_ms: opts.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

/// Result of a lower-bound search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndispensableSearch {
    pub format: u32,
    pub group: Group,
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    /// Highest degree whose fibers were all checked.
    pub searched_up_to: usize,
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<CapDiagnostic>,
}

/// Scans degrees upwards for the first fiber that moves of degree at most `m`
/// leave disconnected.
pub fn find_indispensable(group: &Group, n: usize, m: usize, max_degree: usize) -> Result<IndispensableSearch> {
    find_indispensable_with(group, n, m, max_degree, &CertifyOptions::default())
}

pub fn find_indispensable_with(
    group: &Group,
    n: usize,
    m: usize,
    max_degree: usize,
    opts: &CertifyOptions,
) -> Result<IndispensableSearch> {
    let opts = CertifyOptions {
        all_witnesses: false,
        ..opts.clone()
    };
    let report = certify_degree_with(group, n, max_degree.max(m), m, &opts)?;
    let witness = report.witnesses.first().cloned();
    let searched_up_to = match (&witness, &report.cap) {
        (Some(w), _) => w.degree,
        (None, Some(c)) => c.degree - 1,
        (None, None) => report.d_max,
    };
    Ok(IndispensableSearch {
        format: 1,
        group: group.clone(),
        n,
        m,
        max_degree: report.d_max,
        searched_up_to,
        witness,
        cap: report.cap,
    })
}

/// A shortest sequence of moves between two compatible multisets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovePath {
    /// Multisets visited, starting at the source and ending at the target.
    pub steps: Vec<FlowMultiset>,
    pub moves: Vec<Move>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathOutcome {
    Connected(MovePath),
    NotConnected { fiber_size: usize, reachable: usize },
}

/// Breadth-first search in the fiber graph of `from` under moves of degree
/// at most `m`.
pub fn find_move_path(from: &FlowMultiset, to: &FlowMultiset, m: usize) -> Result<PathOutcome> {
    find_move_path_capped(from, to, m, DEFAULT_FIBER_CAP)
}

pub fn find_move_path_capped(from: &FlowMultiset, to: &FlowMultiset, m: usize, fiber_cap: u128) -> Result<PathOutcome> {
    if m == 0 {
        return Err(FlowError::Precondition("move bound must be positive".into()));
    }
    if !compatible(from, to)? {
        return Err(FlowError::Incompatible);
    }
    if from == to {
        return Ok(PathOutcome::Connected(MovePath {
            steps: vec![from.clone()],
            moves: Vec::new(),
        }));
    }
    let table = FlowTable::new(from.group(), from.n())?;
    let sig: ColumnSignature = signature(from);
    let members = enumerate_fiber_indices(&table, &sig, fiber_cap)?;
    let src_idx = table.indices_of(from)?;
    let dst_idx = table.indices_of(to)?;
    let locate = |m: &[u32]| {
        members
            .binary_search_by(|x| x.as_slice().cmp(m))
            .map_err(|_| FlowError::InternalInvariant("multiset missing from its own fiber".into()))
    };
    let (src, dst) = (locate(&src_idx)?, locate(&dst_idx)?);
    let d = from.degree();
    let need = d.saturating_sub(m);

    let mut prev = vec![usize::MAX; members.len()];
    prev[src] = src;
    let mut queue = VecDeque::from([src]);
    let mut reached = 1;
    while let Some(cur) = queue.pop_front() {
        if cur == dst {
            break;
        }
        for next in 0..members.len() {
            if prev[next] == usize::MAX && common_count(&members[cur], &members[next]) >= need {
                prev[next] = cur;
                reached += 1;
                queue.push_back(next);
            }
        }
    }
    if prev[dst] == usize::MAX {
        return Ok(PathOutcome::NotConnected {
            fiber_size: members.len(),
            reachable: reached,
        });
    }
    let mut chain = vec![dst];
    while *chain.last().unwrap() != src {
        chain.push(prev[*chain.last().unwrap()]);
    }
    chain.reverse();
    let steps: Vec<FlowMultiset> = chain.iter().map(|&k| table.multiset(&members[k])).collect();
    let moves = steps
        .windows(2)
        .map(|w| Move::between(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(PathOutcome::Connected(MovePath { steps, moves }))
}
