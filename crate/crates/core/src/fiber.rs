//! Multisets of flows, column signatures and fiber enumeration.
//!
//! A fiber is an equivalence class of the compatibility relation: every
//! multiset of a fixed degree whose per-index element counts agree. Fibers are
//! keyed by their [`ColumnSignature`], an `n x |G|` count matrix.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::flow::{enumerate_flows_capped, vertex_embedding, Flow, LatticePoint, DEFAULT_FLOW_CAP};
use crate::group::{Group, GroupElem};

/// Default cap on the number of multisets in one `(G, n, d)` sweep.
pub const DEFAULT_SWEEP_CAP: u128 = 1 << 27;
/// Default cap on the size of a single enumerated fiber.
pub const DEFAULT_FIBER_CAP: u128 = 1 << 22;

/// A canonically sorted multiset of flows sharing `(group, n)`.
///
/// Multisets order by their sorted flow lists (shape breaks ties).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlowMultiset {
    group: Group,
    n: usize,
    flows: Vec<Flow>,
}

impl FlowMultiset {
    pub fn new(group: &Group, n: usize, mut flows: Vec<Flow>) -> Result<Self> {
        if let Some(bad) = flows.iter().find(|f| f.n() != n) {
            return Err(FlowError::Shape(format!(
                "flow {bad} has length {}, expected {n}",
                bad.n()
            )));
        }
        flows.sort_unstable();
        Ok(FlowMultiset {
            group: group.clone(),
            n,
            flows,
        })
    }

    /// Parses rows of element codes, validating each row as a flow.
    pub fn from_codes<R: AsRef<[u32]>>(group: &Group, n: usize, rows: &[R]) -> Result<Self> {
        let flows = rows
            .iter()
            .map(|r| Flow::from_codes(group, r.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        FlowMultiset::new(group, n, flows)
    }

    pub(crate) fn from_sorted_unchecked(group: &Group, n: usize, flows: Vec<Flow>) -> Self {
        debug_assert!(flows.windows(2).all(|w| w[0] <= w[1]));
        FlowMultiset {
            group: group.clone(),
            n,
            flows,
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.flows.len()
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn codes(&self) -> Vec<Vec<u32>> {
        self.flows.iter().map(Flow::codes).collect()
    }

    pub(crate) fn check_same_shape(&self, other: &FlowMultiset) -> Result<()> {
        if self.group != other.group || self.n != other.n {
            return Err(FlowError::Shape(format!(
                "multisets over ({}, n={}) and ({}, n={})",
                self.group, self.n, other.group, other.n
            )));
        }
        Ok(())
    }

    /// Number of flows shared with `other`, counted with multiplicity.
    pub fn intersection_size(&self, other: &FlowMultiset) -> usize {
        sorted_intersection_len(&self.flows, &other.flows)
    }

    /// Whether `other` is a sub-multiset of `self`.
    pub fn contains(&self, other: &FlowMultiset) -> bool {
        sorted_intersection_len(&self.flows, &other.flows) == other.flows.len()
    }

    /// `self - other`, or `None` when `other` is not contained in `self`.
    pub fn difference(&self, other: &FlowMultiset) -> Option<FlowMultiset> {
        let mut out = Vec::with_capacity(self.flows.len());
        let mut j = 0;
        for f in &self.flows {
            if j < other.flows.len() && other.flows[j] == *f {
                j += 1;
            } else if j < other.flows.len() && other.flows[j] < *f {
                return None;
            } else {
                out.push(f.clone());
            }
        }
        (j == other.flows.len()).then(|| FlowMultiset::from_sorted_unchecked(&self.group, self.n, out))
    }

    /// Multiset sum of `self` and `other`.
    pub fn union(&self, other: &FlowMultiset) -> FlowMultiset {
        let mut flows = Vec::with_capacity(self.flows.len() + other.flows.len());
        let (mut i, mut j) = (0, 0);
        while i < self.flows.len() || j < other.flows.len() {
            if j == other.flows.len() || (i < self.flows.len() && self.flows[i] <= other.flows[j]) {
                flows.push(self.flows[i].clone());
                i += 1;
            } else {
                flows.push(other.flows[j].clone());
                j += 1;
            }
        }
        FlowMultiset::from_sorted_unchecked(&self.group, self.n, flows)
    }

    /// Adds one flow, keeping canonical order.
    pub fn with_flow(&self, f: Flow) -> Result<FlowMultiset> {
        if f.n() != self.n {
            return Err(FlowError::Shape(format!(
                "flow {f} has length {}, expected {}",
                f.n(),
                self.n
            )));
        }
        let pos = self.flows.partition_point(|g| *g <= f);
        let mut flows = self.flows.clone();
        flows.insert(pos, f);
        Ok(FlowMultiset::from_sorted_unchecked(&self.group, self.n, flows))
    }
}

impl Ord for FlowMultiset {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.flows
            .cmp(&other.flows)
            .then_with(|| self.n.cmp(&other.n))
            .then_with(|| self.group.factors().cmp(other.group.factors()))
    }
}

impl PartialOrd for FlowMultiset {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FlowMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, flow) in self.flows.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{flow}")?;
        }
        write!(f, "}}")
    }
}

fn sorted_intersection_len<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    common
}

/// Per-index element counts of a multiset: an `n x |G|` matrix, row-major.
///
/// Signatures order lexicographically by their count rows; this is the fiber
/// key order used by sweeps and reports.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnSignature {
    n: usize,
    order: usize,
    counts: Vec<u32>,
}

impl ColumnSignature {
    /// Builds a signature from an explicit count matrix, checking that every
    /// row has the same total.
    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(FlowError::Shape("signature needs at least one index".into()));
        };
        let order = first.len();
        if order < 2 {
            return Err(FlowError::Shape("signature rows need at least two entries".into()));
        }
        let d: u32 = first.iter().sum();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != order {
                return Err(FlowError::Shape(format!("signature row {i} has {} entries", row.len())));
            }
            if row.iter().sum::<u32>() != d {
                return Err(FlowError::InvalidFiber(format!(
                    "signature row {i} does not sum to {d}"
                )));
            }
        }
        Ok(ColumnSignature {
            n: rows.len(),
            order,
            counts: rows.concat(),
        })
    }

    fn from_flat(n: usize, order: usize, counts: Vec<u32>) -> Self {
        ColumnSignature { n, order, counts }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group_order(&self) -> usize {
        self.order
    }

    /// The common row total.
    pub fn degree(&self) -> usize {
        self.counts[..self.order].iter().sum::<u32>() as usize
    }

    pub fn count(&self, index: usize, elem: GroupElem) -> u32 {
        self.counts[index * self.order + elem.code() as usize]
    }

    pub fn row(&self, index: usize) -> &[u32] {
        &self.counts[index * self.order..(index + 1) * self.order]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.counts.chunks(self.order).map(<[u32]>::to_vec).collect()
    }

    pub fn as_flat(&self) -> &[u32] {
        &self.counts
    }
}

/// Count matrix of a multiset.
pub fn signature(m: &FlowMultiset) -> ColumnSignature {
    let order = m.group.order() as usize;
    let mut counts = vec![0u32; m.n * order];
    for f in &m.flows {
        for (i, v) in f.values().iter().enumerate() {
            counts[i * order + v.code() as usize] += 1;
        }
    }
    ColumnSignature::from_flat(m.n, order, counts)
}

/// Sum of the vertex embeddings of the members.
pub fn embedding_sum(m: &FlowMultiset) -> LatticePoint {
    let mut acc = LatticePoint::zeros(m.n, m.group.order() as usize);
    for f in &m.flows {
        acc.add_assign(&vertex_embedding(&m.group, f));
    }
    acc
}

/// Two multisets are compatible when their column signatures agree.
pub fn compatible(a: &FlowMultiset, b: &FlowMultiset) -> Result<bool> {
    a.check_same_shape(b)?;
    Ok(a.degree() == b.degree() && signature(a) == signature(b))
}

/// Indices at which the per-index element multisets of `a` and `b` differ.
pub fn differing_indices(a: &FlowMultiset, b: &FlowMultiset) -> Result<Vec<usize>> {
    a.check_same_shape(b)?;
    let (sa, sb) = (signature(a), signature(b));
    Ok((0..a.n).filter(|&i| sa.row(i) != sb.row(i)).collect())
}

/// All flows of `(group, n)` with O(1) lookup of a flow's rank.
#[derive(Debug, Clone)]
pub struct FlowTable {
    group: Group,
    n: usize,
    flows: Vec<Flow>,
}

impl FlowTable {
    pub fn new(group: &Group, n: usize) -> Result<Self> {
        Self::with_cap(group, n, DEFAULT_FLOW_CAP)
    }

    pub fn with_cap(group: &Group, n: usize, cap: u128) -> Result<Self> {
        Ok(FlowTable {
            group: group.clone(),
            n,
            flows: enumerate_flows_capped(group, n, cap)?,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn flow(&self, idx: u32) -> &Flow {
        &self.flows[idx as usize]
    }

    /// Rank of `f` in lexicographic order: its first `n - 1` codes read as
    /// base-`|G|` digits.
    pub fn index_of(&self, f: &Flow) -> Option<u32> {
        if f.n() != self.n {
            return None;
        }
        let order = self.group.order() as u64;
        let mut idx = 0u64;
        for v in &f.values()[..self.n - 1] {
            idx = idx * order + u64::from(v.code());
        }
        (idx < self.flows.len() as u64 && self.flows[idx as usize] == *f).then_some(idx as u32)
    }

    /// Sorted member indices of a multiset.
    pub fn indices_of(&self, m: &FlowMultiset) -> Result<Vec<u32>> {
        if *m.group() != self.group || m.n() != self.n {
            return Err(FlowError::Shape("multiset does not match flow table".into()));
        }
        m.flows()
            .iter()
            .map(|f| {
                self.index_of(f)
                    .ok_or_else(|| FlowError::InternalInvariant(format!("{f} missing from table")))
            })
            .collect()
    }

    pub fn multiset(&self, indices: &[u32]) -> FlowMultiset {
        FlowMultiset::from_sorted_unchecked(
            &self.group,
            self.n,
            indices.iter().map(|&i| self.flows[i as usize].clone()).collect(),
        )
    }
}

/// Number of degree-`d` multisets over `f` flows, `C(f + d - 1, d)`,
/// saturating at `u128::MAX`.
pub fn multiset_count(f: u128, d: usize) -> u128 {
    let mut acc: u128 = 1;
    for k in 1..=d as u128 {
        acc = match acc.checked_mul(f + k - 1) {
            Some(x) => x / k,
            None => return u128::MAX,
        };
    }
    acc
}

/// Every degree-`d` multiset with the given signature, in canonical order.
pub fn enumerate_fiber(sig: &ColumnSignature, group: &Group, n: usize) -> Result<Vec<FlowMultiset>> {
    let table = FlowTable::new(group, n)?;
    Ok(enumerate_fiber_indices(&table, sig, DEFAULT_FIBER_CAP)?
        .iter()
        .map(|m| table.multiset(m))
        .collect())
}

/// Depth-first fiber enumeration over table indices.
///
/// Flows are tried in canonical order with multiplicity and a flow is only
/// taken while every one of its entries still has remaining count. Since
/// members are chosen in ascending order their first entries never decrease,
/// so the next member's first entry must be the smallest element still owed
/// at index 0.
pub fn enumerate_fiber_indices(table: &FlowTable, sig: &ColumnSignature, cap: u128) -> Result<Vec<Vec<u32>>> {
    let order = table.group.order() as usize;
    if sig.n != table.n || sig.order != order {
        return Err(FlowError::Shape(format!(
            "signature is {}x{}, expected {}x{}",
            sig.n, sig.order, table.n, order
        )));
    }
    let d = sig.degree();
    if let Some(i) = (0..sig.n).find(|&i| sig.row(i).iter().sum::<u32>() as usize != d) {
        return Err(FlowError::InvalidFiber(format!(
            "signature row {i} does not sum to {d}"
        )));
    }

    // Flows grouped by first entry; enumeration order keeps each group a
    // contiguous index range.
    let per_first = table.len() / order;

    struct Search<'a> {
        table: &'a FlowTable,
        order: usize,
        per_first: usize,
        d: usize,
        cap: u128,
        remaining: Vec<u32>,
        stack: Vec<u32>,
        out: Vec<Vec<u32>>,
    }

    impl Search<'_> {
        fn fits(&self, f: &Flow) -> bool {
            f.values()
                .iter()
                .enumerate()
                .all(|(i, v)| self.remaining[i * self.order + v.code() as usize] > 0)
        }

        fn apply(&mut self, f: &Flow, delta: i32) {
            for (i, v) in f.values().iter().enumerate() {
                let c = &mut self.remaining[i * self.order + v.code() as usize];
                *c = (*c as i32 + delta) as u32;
            }
        }

        fn run(&mut self, start: u32) -> Result<()> {
            if self.stack.len() == self.d {
                if self.out.len() as u128 >= self.cap {
                    return Err(FlowError::capacity(
                        "fiber members",
                        self.out.len() as u128 + 1,
                        self.cap,
                    ));
                }
                self.out.push(self.stack.clone());
                return Ok(());
            }
            let Some(first) = (0..self.order).find(|&g| self.remaining[g] > 0) else {
                return Ok(());
            };
            let lo = (first * self.per_first).max(start as usize);
            let hi = (first + 1) * self.per_first;
            for idx in lo..hi {
                let f = &self.table.flows[idx];
                if !self.fits(f) {
                    continue;
                }
                let f = f.clone();
                self.apply(&f, -1);
                self.stack.push(idx as u32);
                let r = self.run(idx as u32);
                self.stack.pop();
                self.apply(&f, 1);
                r?;
            }
            Ok(())
        }
    }

    let mut search = Search {
        table,
        order,
        per_first,
        d,
        cap,
        remaining: sig.counts.clone(),
        stack: Vec::with_capacity(d),
        out: Vec::new(),
    };
    if d == 0 {
        return Ok(vec![Vec::new()]);
    }
    search.run(0)?;
    Ok(search.out)
}

/// Borrowed view of one fiber inside a [`FiberPartition`].
#[derive(Debug, Clone, Copy)]
pub struct FiberView<'a> {
    key: &'a [u8],
    members: &'a [u32],
    degree: usize,
    n: usize,
    order: usize,
}

impl<'a> FiberView<'a> {
    pub fn len(&self) -> usize {
        self.members.len() / self.degree
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Sorted table indices of member `k`.
    pub fn member(&self, k: usize) -> &'a [u32] {
        &self.members[k * self.degree..(k + 1) * self.degree]
    }

    pub fn members(&self) -> impl Iterator<Item = &'a [u32]> + 'a {
        self.members.chunks(self.degree)
    }

    pub fn signature(&self) -> ColumnSignature {
        ColumnSignature::from_flat(self.n, self.order, self.key.iter().map(|&c| u32::from(c)).collect())
    }
}

/// All degree-`d` multisets of `(G, n)`, partitioned into fibers ordered by
/// signature. Members inside a fiber are in canonical order.
#[derive(Debug, Clone)]
pub struct FiberPartition {
    table: FlowTable,
    degree: usize,
    key_width: usize,
    keys: Vec<u8>,
    members: Vec<u32>,
    // fiber k spans members [bounds[k], bounds[k + 1]) counted in multisets
    bounds: Vec<usize>,
}

impl FiberPartition {
    pub fn table(&self) -> &FlowTable {
        &self.table
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn fiber_count(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn multiset_count(&self) -> usize {
        self.members.len() / self.degree.max(1)
    }

    pub fn fiber(&self, k: usize) -> FiberView<'_> {
        let (lo, hi) = (self.bounds[k], self.bounds[k + 1]);
        FiberView {
            key: &self.keys[k * self.key_width..(k + 1) * self.key_width],
            members: &self.members[lo * self.degree..hi * self.degree],
            degree: self.degree,
            n: self.table.n,
            order: self.table.group.order() as usize,
        }
    }

    /// Fibers one at a time, ascending by signature.
    pub fn iter(&self) -> impl Iterator<Item = FiberView<'_>> + '_ {
        (0..self.fiber_count()).map(move |k| self.fiber(k))
    }

    /// Materialized fibers as `(signature, multisets)` pairs.
    pub fn fibers(&self) -> Vec<(ColumnSignature, Vec<FlowMultiset>)> {
        self.iter()
            .map(|v| (v.signature(), v.members().map(|m| self.table.multiset(m)).collect()))
            .collect()
    }
}

/// Partitions every degree-`d` multiset of `(G, n)` into fibers, with the
/// default caps.
pub fn enumerate_all_fibers(group: &Group, n: usize, d: usize) -> Result<FiberPartition> {
    let table = FlowTable::new(group, n)?;
    partition_fibers(table, d, DEFAULT_SWEEP_CAP)
}

/// Partitions every degree-`d` multiset over `table` into fibers.
pub fn partition_fibers(table: FlowTable, d: usize, cap: u128) -> Result<FiberPartition> {
    if d == 0 {
        return Err(FlowError::Precondition("degree must be at least 1".into()));
    }
    if d > u8::MAX as usize {
        return Err(FlowError::Precondition(format!("degree {d} exceeds {}", u8::MAX)));
    }
    let f = table.len();
    let total = multiset_count(f as u128, d);
    if total > cap {
        return Err(FlowError::capacity(
            format!("degree-{d} multisets of {} on n={}", table.group, table.n),
            total,
            cap,
        ));
    }
    let total = total as usize;
    let order = table.group.order() as usize;
    let width = table.n * order;

    // Each flow as its list of key positions.
    let positions: Vec<Vec<usize>> = table
        .flows
        .iter()
        .map(|fl| {
            fl.values()
                .iter()
                .enumerate()
                .map(|(i, v)| i * order + v.code() as usize)
                .collect()
        })
        .collect();

    let mut members = Vec::with_capacity(total * d);
    let mut keys = Vec::with_capacity(total * width);
    let mut stack: Vec<u32> = vec![0; d];
    let mut running = vec![0u8; width];
    // Lexicographic odometer over non-decreasing index tuples with an
    // incrementally maintained count key.
    for &p in &positions[0] {
        running[p] += d as u8;
    }
    loop {
        members.extend_from_slice(&stack);
        keys.extend_from_slice(&running);
        let mut pos = d;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            if (stack[pos] as usize) + 1 < f {
                break;
            }
        }
        if (stack[pos] as usize) + 1 >= f {
            break;
        }
        let next = stack[pos] + 1;
        for slot in &mut stack[pos..] {
            for &p in &positions[*slot as usize] {
                running[p] -= 1;
            }
            *slot = next;
            for &p in &positions[next as usize] {
                running[p] += 1;
            }
        }
    }
    debug_assert_eq!(members.len(), total * d);

    let mut perm: Vec<u32> = (0..total as u32).collect();
    let key_of = |k: u32| &keys[k as usize * width..(k as usize + 1) * width];
    perm.par_sort_by(|&a, &b| key_of(a).cmp(key_of(b)));

    let mut sorted_members = Vec::with_capacity(members.len());
    let mut fiber_keys = Vec::new();
    let mut bounds = vec![0usize];
    for (rank, &k) in perm.iter().enumerate() {
        if rank > 0 && key_of(perm[rank - 1]) != key_of(k) {
            bounds.push(rank);
        }
        if rank == 0 || key_of(perm[rank - 1]) != key_of(k) {
            fiber_keys.extend_from_slice(key_of(k));
        }
        sorted_members.extend_from_slice(&members[k as usize * d..(k as usize + 1) * d]);
    }
    bounds.push(total);

    Ok(FiberPartition {
        table,
        degree: d,
        key_width: width,
        keys: fiber_keys,
        members: sorted_members,
        bounds,
    })
}

/// Fiber document: `{"format":1,"signature":[[...]],"multisets":[[[...]]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberDoc {
    pub format: u32,
    pub group: Group,
    pub n: usize,
    pub signature: Vec<Vec<u32>>,
    pub multisets: Vec<Vec<Vec<u32>>>,
}

impl FiberDoc {
    pub fn new(signature: &ColumnSignature, group: &Group, n: usize, members: &[FlowMultiset]) -> Self {
        FiberDoc {
            format: 1,
            group: group.clone(),
            n,
            signature: signature.rows(),
            multisets: members.iter().map(FlowMultiset::codes).collect(),
        }
    }
}
