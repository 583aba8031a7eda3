//! Exchange moves on multisets of flows.
//!
//! Index sets are 0-based throughout.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::fiber::{compatible, FlowMultiset};
use crate::flow::Flow;
use crate::group::{Group, GroupElem};

/// Swaps the values of `f` and `g` on `indices`.
///
/// Only valid when both flows have the same partial sum over `indices`;
/// otherwise the outputs would not sum to zero.
pub fn exchange_pair(group: &Group, f: &Flow, g: &Flow, indices: &BTreeSet<usize>) -> Result<(Flow, Flow)> {
    if f.n() != g.n() {
        return Err(FlowError::Shape(format!("flows have lengths {} and {}", f.n(), g.n())));
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= f.n()) {
        return Err(FlowError::Shape(format!("index {i} out of range for n={}", f.n())));
    }
    let left = group.sum(indices.iter().map(|&i| f.get(i)))?;
    let right = group.sum(indices.iter().map(|&i| g.get(i)))?;
    if left != right {
        return Err(FlowError::InvalidExchange {
            left: left.code(),
            right: right.code(),
        });
    }
    let mut fv = f.values().to_vec();
    let mut gv = g.values().to_vec();
    for &i in indices {
        std::mem::swap(&mut fv[i], &mut gv[i]);
    }
    Ok((Flow::new(group, fv)?, Flow::new(group, gv)?))
}

/// A replacement of the sub-multiset `removed` by the compatible `inserted`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Move {
    removed: FlowMultiset,
    inserted: FlowMultiset,
}

impl Move {
    pub fn new(removed: FlowMultiset, inserted: FlowMultiset) -> Result<Self> {
        removed.check_same_shape(&inserted)?;
        if removed.degree() != inserted.degree() {
            return Err(FlowError::InvalidMove(format!(
                "removes {} flows but inserts {}",
                removed.degree(),
                inserted.degree()
            )));
        }
        if !compatible(&removed, &inserted)? {
            return Err(FlowError::InvalidMove(
                "inserted multiset is not compatible with removed".into(),
            ));
        }
        Ok(Move { removed, inserted })
    }

    /// The move taking `from` to `to`: removes `from - to`, inserts `to - from`.
    pub fn between(from: &FlowMultiset, to: &FlowMultiset) -> Result<Self> {
        from.check_same_shape(to)?;
        let common = common_part(from, to);
        let removed = from.difference(&common).ok_or(FlowError::Containment)?;
        let inserted = to.difference(&common).ok_or(FlowError::Containment)?;
        Move::new(removed, inserted)
    }

    pub fn removed(&self) -> &FlowMultiset {
        &self.removed
    }

    pub fn inserted(&self) -> &FlowMultiset {
        &self.inserted
    }

    pub fn degree(&self) -> usize {
        self.removed.degree()
    }

    /// The same move with the two sides swapped.
    pub fn inverse(&self) -> Move {
        Move {
            removed: self.inserted.clone(),
            inserted: self.removed.clone(),
        }
    }

    pub fn to_doc(&self) -> MoveDoc {
        MoveDoc {
            removed: self.removed.codes(),
            inserted: self.inserted.codes(),
        }
    }
}

fn common_part(a: &FlowMultiset, b: &FlowMultiset) -> FlowMultiset {
    let (x, y) = (a.flows(), b.flows());
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(x[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    FlowMultiset::from_sorted_unchecked(a.group(), a.n(), out)
}

/// `(M - removed) + inserted`.
pub fn apply_move(m: &FlowMultiset, mv: &Move) -> Result<FlowMultiset> {
    m.check_same_shape(&mv.removed)?;
    let rest = m.difference(&mv.removed).ok_or(FlowError::Containment)?;
    Ok(rest.union(&mv.inserted))
}

/// Exchange of the flows at positions `first` and `second` of a multiset on
/// an index set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairExchange {
    pub first: usize,
    pub second: usize,
    pub indices: BTreeSet<usize>,
}

impl PairExchange {
    pub fn new(first: usize, second: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        PairExchange {
            first,
            second,
            indices: indices.into_iter().collect(),
        }
    }

    /// The degree-2 move this exchange performs on `m`.
    pub fn to_move(&self, m: &FlowMultiset) -> Result<Move> {
        if self.first == self.second || self.first >= m.degree() || self.second >= m.degree() {
            return Err(FlowError::Precondition(format!(
                "positions ({}, {}) invalid for a multiset of degree {}",
                self.first,
                self.second,
                m.degree()
            )));
        }
        let (f, g) = (&m.flows()[self.first], &m.flows()[self.second]);
        let (f2, g2) = exchange_pair(m.group(), f, g, &self.indices)?;
        Move::new(
            FlowMultiset::new(m.group(), m.n(), vec![f.clone(), g.clone()])?,
            FlowMultiset::new(m.group(), m.n(), vec![f2, g2])?,
        )
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// First subset of `pool` (by size, then lexicographically by position) whose
/// `weights` sum to `target` in `Z_p`.
fn smallest_subset_with_sum(pool: &[usize], weights: &[u32], target: u32, p: u32) -> Option<Vec<usize>> {
    let len = pool.len();
    for size in 0..=len {
        let mut pick: Vec<usize> = (0..size).collect();
        loop {
            let s = pick.iter().map(|&k| weights[pool[k]]).sum::<u32>() % p;
            if s == target {
                return Some(pick.iter().map(|&k| pool[k]).collect());
            }
            // next combination in lexicographic order
            let Some(pos) = (0..size).rev().find(|&i| pick[i] < len - size + i) else {
                break;
            };
            pick[pos] += 1;
            for i in pos + 1..size {
                pick[i] = pick[i - 1] + 1;
            }
        }
    }
    None
}

/// Finds `I'' ⊆ I` such that `f` and `g` can be exchanged on `I' ∪ I''`.
///
/// Requires `G = Z_p` with `p` prime, `f(i) != g(i)` on all of `I`,
/// `|I| >= p - 1` and `I ∩ I' = ∅`. Such a subset always exists inside any
/// `p - 1` indices of `I`; the search tries the first `p - 1` indices of `I`
/// (ascending) and only widens to all of `I` if that window fails.
pub fn find_exchange_subset(
    group: &Group,
    f: &Flow,
    g: &Flow,
    differing: &BTreeSet<usize>,
    extra: &BTreeSet<usize>,
) -> Result<BTreeSet<usize>> {
    let p = match group.factors() {
        [p] if is_prime(*p) => *p,
        other => {
            return Err(FlowError::Precondition(format!(
                "group must be Z_p for a prime p, got factors {other:?}"
            )))
        }
    };
    let n = f.n();
    if g.n() != n {
        return Err(FlowError::Shape(format!("flows have lengths {n} and {}", g.n())));
    }
    if let Some(&i) = differing.iter().chain(extra).find(|&&i| i >= n) {
        return Err(FlowError::Precondition(format!("index {i} out of range for n={n}")));
    }
    if let Some(&i) = differing.iter().find(|&&i| f.get(i) == g.get(i)) {
        return Err(FlowError::Precondition(format!("flows agree at index {i}")));
    }
    if differing.len() < (p - 1) as usize {
        return Err(FlowError::Precondition(format!(
            "|I| = {} is smaller than p - 1 = {}",
            differing.len(),
            p - 1
        )));
    }
    if let Some(&i) = differing.intersection(extra).next() {
        return Err(FlowError::Precondition(format!("index {i} lies in both I and I'")));
    }

    let diffs: Vec<u32> = (0..n)
        .map(|i| group.sub(f.get(i), g.get(i)).map(GroupElem::code))
        .collect::<Result<_>>()?;
    let carried = extra.iter().map(|&i| diffs[i]).sum::<u32>() % p;
    let target = (p - carried) % p;

    let all: Vec<usize> = differing.iter().copied().collect();
    let window = &all[..(p - 1) as usize];
    let found = smallest_subset_with_sum(window, &diffs, target, p)
        .or_else(|| smallest_subset_with_sum(&all, &diffs, target, p));
    match found {
        Some(subset) => Ok(subset.into_iter().collect()),
        None => Err(FlowError::InternalInvariant(format!(
            "no subset of {all:?} reaches difference sum {target} in Z_{p}"
        ))),
    }
}

/// A function `[n] -> {0} ∪ [colors]`; zero means uncolored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    colors: u32,
    values: Vec<u32>,
}

impl Coloring {
    pub fn new(colors: u32, values: Vec<u32>) -> Result<Self> {
        if let Some(&v) = values.iter().find(|&&v| v > colors) {
            return Err(FlowError::Precondition(format!(
                "color {v} exceeds number of colors {colors}"
            )));
        }
        Ok(Coloring { colors, values })
    }

    pub fn colors(&self) -> u32 {
        self.colors
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> BTreeSet<usize> {
        (0..self.values.len()).filter(|&k| self.values[k] != 0).collect()
    }
}

/// Transformation of two colorings at positions `k1`, `k2`.
///
/// Requires `f1(k1) = 0`, `f2(k2) = 0` and `f1(k2) = f2(k1)`. The outputs
/// swap the two colorings' values at `k1` and `k2` and agree with the inputs
/// elsewhere.
pub fn transform_colorings(f1: &Coloring, f2: &Coloring, k1: usize, k2: usize) -> Result<(Coloring, Coloring)> {
    let n = f1.len();
    if f2.len() != n || f1.colors != f2.colors {
        return Err(FlowError::InvalidTransformation(
            "colorings have different shapes".into(),
        ));
    }
    if k1 >= n || k2 >= n {
        return Err(FlowError::InvalidTransformation(format!(
            "positions ({k1}, {k2}) out of range"
        )));
    }
    if f1.values[k1] != 0 {
        return Err(FlowError::InvalidTransformation(format!(
            "{k1} is in the support of the first coloring"
        )));
    }
    if f2.values[k2] != 0 {
        return Err(FlowError::InvalidTransformation(format!(
            "{k2} is in the support of the second coloring"
        )));
    }
    if f1.values[k2] != f2.values[k1] {
        return Err(FlowError::InvalidTransformation(format!(
            "f1({k2}) = {} differs from f2({k1}) = {}",
            f1.values[k2], f2.values[k1]
        )));
    }
    let mut a = f1.values.clone();
    let mut b = f2.values.clone();
    for k in [k1, k2] {
        a[k] = f2.values[k];
        b[k] = f1.values[k];
    }
    Ok((
        Coloring {
            colors: f1.colors,
            values: a,
        },
        Coloring {
            colors: f1.colors,
            values: b,
        },
    ))
}

/// Move document: `{"out": [[codes]], "in": [[codes]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveDoc {
    #[serde(rename = "out")]
    pub removed: Vec<Vec<u32>>,
    #[serde(rename = "in")]
    pub inserted: Vec<Vec<u32>>,
}

impl MoveDoc {
    pub fn to_move(&self, group: &Group, n: usize) -> Result<Move> {
        Move::new(
            FlowMultiset::from_codes(group, n, &self.removed)?,
            FlowMultiset::from_codes(group, n, &self.inserted)?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::signature;

    fn z(m: u32) -> Group {
        Group::cyclic(m).unwrap()
    }

    fn flow(g: &Group, codes: &[u32]) -> Flow {
        Flow::from_codes(g, codes).unwrap()
    }

    fn ms(g: &Group, rows: &[&[u32]]) -> FlowMultiset {
        FlowMultiset::from_codes(g, rows[0].len(), rows).unwrap()
    }

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn exchange_pair_walkthrough() {
        let z2 = z(2);
        let f = flow(&z2, &[1, 1, 1, 1, 1, 1]);
        let g = flow(&z2, &[0, 0, 0, 0, 0, 0]);
        let (f2, g2) = exchange_pair(&z2, &f, &g, &set(&[0, 2, 4, 5])).unwrap();
        assert_eq!(f2.codes(), vec![0, 1, 0, 1, 0, 0]);
        assert_eq!(g2.codes(), vec![1, 0, 1, 0, 1, 1]);
    }

    #[test]
    fn exchange_pair_edge_cases() {
        let z3 = z(3);
        let f = flow(&z3, &[1, 2, 0]);
        let g = flow(&z3, &[0, 0, 0]);
        assert_eq!(exchange_pair(&z3, &f, &g, &set(&[])).unwrap(), (f.clone(), g.clone()));
        assert_eq!(
            exchange_pair(&z3, &f, &g, &set(&[0])),
            Err(FlowError::InvalidExchange { left: 1, right: 0 })
        );
        assert!(matches!(
            exchange_pair(&z3, &f, &g, &set(&[3])),
            Err(FlowError::Shape(_))
        ));
    }

    #[test]
    fn apply_move_walkthrough() {
        let z2 = z(2);
        let m1 = ms(&z2, &[&[1, 1, 1, 1, 1, 1], &[0, 0, 0, 0, 0, 0], &[1, 1, 1, 1, 0, 0]]);
        let mv = Move::new(
            ms(&z2, &[&[1, 1, 1, 1, 1, 1], &[0, 0, 0, 0, 0, 0]]),
            ms(&z2, &[&[0, 1, 0, 1, 0, 0], &[1, 0, 1, 0, 1, 1]]),
        )
        .unwrap();
        let tilde = apply_move(&m1, &mv).unwrap();
        assert_eq!(
            tilde,
            ms(&z2, &[&[0, 1, 0, 1, 0, 0], &[1, 0, 1, 0, 1, 1], &[1, 1, 1, 1, 0, 0]])
        );
        assert_eq!(signature(&tilde), signature(&m1));
        assert_eq!(apply_move(&tilde, &mv.inverse()).unwrap(), m1);

        // canonical order puts (0,..,0) first and (1,..,1) last
        let via_pair = PairExchange::new(2, 0, [0, 2, 4, 5]).to_move(&m1).unwrap();
        assert_eq!(via_pair, mv);
    }

    #[test]
    fn apply_identity_move() {
        let z2 = z(2);
        let m = ms(&z2, &[&[0, 1, 1], &[1, 1, 0]]);
        let mv = Move::new(ms(&z2, &[&[0, 1, 1]]), ms(&z2, &[&[0, 1, 1]])).unwrap();
        assert_eq!(apply_move(&m, &mv).unwrap(), m);
    }

    #[test]
    fn cubic_relation_move() {
        let z3 = z(3);
        let m = ms(&z3, &[&[0, 1, 1, 1], &[1, 0, 0, 2], &[2, 0, 1, 0], &[1, 1, 1, 0]]);
        let mv = Move::new(
            ms(&z3, &[&[0, 1, 1, 1], &[1, 0, 0, 2], &[2, 0, 1, 0]]),
            ms(&z3, &[&[2, 0, 0, 1], &[0, 0, 1, 2], &[1, 1, 1, 0]]),
        )
        .unwrap();
        assert_eq!(mv.degree(), 3);
        let out = apply_move(&m, &mv).unwrap();
        assert_eq!(
            out,
            ms(&z3, &[&[2, 0, 0, 1], &[0, 0, 1, 2], &[1, 1, 1, 0], &[1, 1, 1, 0]])
        );
        assert_eq!(signature(&out), signature(&m));
    }

    #[test]
    fn move_errors() {
        let z2 = z(2);
        assert!(matches!(
            Move::new(ms(&z2, &[&[0, 0, 0]]), ms(&z2, &[&[0, 1, 1]])),
            Err(FlowError::InvalidMove(_))
        ));
        assert!(matches!(
            Move::new(ms(&z2, &[&[0, 0, 0]]), ms(&z2, &[&[0, 0, 0], &[0, 0, 0]])),
            Err(FlowError::InvalidMove(_))
        ));
        let mv = Move::new(ms(&z2, &[&[1, 1, 0]]), ms(&z2, &[&[1, 1, 0]])).unwrap();
        assert_eq!(apply_move(&ms(&z2, &[&[0, 0, 0]]), &mv), Err(FlowError::Containment));
        assert!(PairExchange::new(0, 0, [0])
            .to_move(&ms(&z2, &[&[0, 0, 0], &[0, 1, 1]]))
            .is_err());
    }

    #[test]
    fn move_between_recovers_difference() {
        let z2 = z(2);
        let a = ms(&z2, &[&[0, 1, 0, 1, 0, 0], &[1, 0, 1, 0, 1, 1], &[1, 1, 1, 1, 0, 0]]);
        let b = ms(&z2, &[&[0, 1, 0, 1, 0, 0], &[1, 1, 1, 0, 1, 0], &[1, 0, 1, 1, 0, 1]]);
        let mv = Move::between(&a, &b).unwrap();
        assert_eq!(mv.degree(), 2);
        assert_eq!(apply_move(&a, &mv).unwrap(), b);
    }

    #[test]
    fn move_doc_json() {
        let z2 = z(2);
        let mv = Move::new(
            ms(&z2, &[&[1, 1, 1, 1, 1, 1], &[0, 0, 0, 0, 0, 0]]),
            ms(&z2, &[&[0, 1, 0, 1, 0, 0], &[1, 0, 1, 0, 1, 1]]),
        )
        .unwrap();
        let s = serde_json::to_string(&mv.to_doc()).unwrap();
        assert_eq!(
            s,
            r#"{"out":[[0,0,0,0,0,0],[1,1,1,1,1,1]],"in":[[0,1,0,1,0,0],[1,0,1,0,1,1]]}"#
        );
        let back: MoveDoc = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_move(&z2, 6).unwrap(), mv);
    }

    #[test]
    fn find_subset_examples() {
        let z3 = z(3);
        let f = flow(&z3, &[1, 1, 2, 2]);
        let g = flow(&z3, &[0, 0, 1, 2]);
        let sub = find_exchange_subset(&z3, &f, &g, &set(&[0, 1]), &set(&[2])).unwrap();
        assert_eq!(sub, set(&[0, 1]));
        let mut all: BTreeSet<usize> = sub.clone();
        all.insert(2);
        assert!(exchange_pair(&z3, &f, &g, &all).is_ok());

        // zero carried difference needs nothing
        let sub = find_exchange_subset(&z3, &f, &g, &set(&[0, 1]), &set(&[3])).unwrap();
        assert!(sub.is_empty());

        let z2 = z(2);
        let f = flow(&z2, &[1, 1, 0, 0]);
        let g = flow(&z2, &[0, 0, 0, 0]);
        let sub = find_exchange_subset(&z2, &f, &g, &set(&[0]), &set(&[1])).unwrap();
        assert_eq!(sub, set(&[0]));
    }

    /// Independent oracle: every subset of I, smallest first.
    fn oracle_exists(group: &Group, f: &Flow, g: &Flow, differing: &[usize], extra: &BTreeSet<usize>) -> bool {
        (0u32..1 << differing.len()).any(|mask| {
            let mut idx = extra.clone();
            for (k, &i) in differing.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    idx.insert(i);
                }
            }
            exchange_pair(group, f, g, &idx).is_ok()
        })
    }

    #[test]
    fn find_subset_agrees_with_oracle_z5() {
        let z5 = z(5);
        let f = flow(&z5, &[1, 2, 3, 4, 0, 0]);
        let g = flow(&z5, &[0, 0, 0, 0, 3, 2]);
        for extra in [set(&[4]), set(&[5]), set(&[4, 5]), set(&[])] {
            let sub = find_exchange_subset(&z5, &f, &g, &set(&[0, 1, 2, 3]), &extra).unwrap();
            assert!(sub.len() <= 4);
            assert!(oracle_exists(&z5, &f, &g, &[0, 1, 2, 3], &extra));
            let all: BTreeSet<usize> = sub.union(&extra).copied().collect();
            assert!(exchange_pair(&z5, &f, &g, &all).is_ok());
        }
    }

    #[test]
    fn find_subset_preconditions() {
        let z3 = z(3);
        let f = flow(&z3, &[1, 1, 2, 2]);
        let g = flow(&z3, &[0, 0, 1, 2]);
        // agree at index 3
        assert!(matches!(
            find_exchange_subset(&z3, &f, &g, &set(&[0, 3]), &set(&[])),
            Err(FlowError::Precondition(_))
        ));
        // too small
        assert!(matches!(
            find_exchange_subset(&z3, &f, &g, &set(&[0]), &set(&[])),
            Err(FlowError::Precondition(_))
        ));
        // overlapping
        assert!(matches!(
            find_exchange_subset(&z3, &f, &g, &set(&[0, 1]), &set(&[1])),
            Err(FlowError::Precondition(_))
        ));
        // not prime cyclic
        let z4 = z(4);
        let f4 = flow(&z4, &[1, 3]);
        assert!(matches!(
            find_exchange_subset(&z4, &f4, &Flow::zero(2), &set(&[0, 1, 2]), &set(&[])),
            Err(FlowError::Precondition(_))
        ));
    }

    #[test]
    fn smallest_subset_order() {
        // weights all 1 in Z_5, target 2: first pair lexicographically
        let w = vec![1, 1, 1, 1];
        assert_eq!(smallest_subset_with_sum(&[0, 1, 2, 3], &w, 2, 5), Some(vec![0, 1]));
        assert_eq!(smallest_subset_with_sum(&[0, 1, 2, 3], &w, 0, 5), Some(vec![]));
        assert_eq!(smallest_subset_with_sum(&[0, 1], &w, 3, 5), None);
    }

    #[test]
    fn coloring_transform_examples() {
        let f1 = Coloring::new(1, vec![1, 0]).unwrap();
        let f2 = Coloring::new(1, vec![0, 1]).unwrap();
        let (a, b) = transform_colorings(&f1, &f2, 1, 0).unwrap();
        assert_eq!(a.values(), &[0, 1]);
        assert_eq!(b.values(), &[1, 0]);

        let f1 = Coloring::new(2, vec![1, 0, 2]).unwrap();
        let f2 = Coloring::new(2, vec![0, 1, 2]).unwrap();
        let (a, b) = transform_colorings(&f1, &f2, 1, 0).unwrap();
        assert_eq!(a.values(), &[0, 1, 2]);
        assert_eq!(b.values(), &[1, 0, 2]);

        assert!(matches!(
            transform_colorings(&f1, &f2, 0, 0),
            Err(FlowError::InvalidTransformation(_))
        ));
        assert!(Coloring::new(1, vec![2]).is_err());
        assert_eq!(f1.support(), set(&[0, 2]));
    }
}
