//! Group-based flows, their enumeration and the vertex embedding.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::group::{Automorphism, Group, GroupElem};

/// Default cap on the number of flows produced by [`enumerate_flows`].
pub const DEFAULT_FLOW_CAP: u128 = 1 << 24;

/// An n-tuple of group elements summing to zero.
///
/// The group itself is not stored; operations take it as context. Flows order
/// lexicographically by element codes, which is the canonical order used for
/// multisets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Flow {
    values: Vec<GroupElem>,
}

impl Flow {
    /// Validates `values` against `group` and the zero-sum condition.
    pub fn new(group: &Group, values: Vec<GroupElem>) -> Result<Self> {
        if values.is_empty() {
            return Err(FlowError::Shape("a flow needs at least one index".into()));
        }
        let sum = group.sum(values.iter().copied())?;
        if !sum.is_zero() {
            return Err(FlowError::NotAFlow { sum: sum.code() });
        }
        Ok(Flow { values })
    }

    pub fn from_codes(group: &Group, codes: &[u32]) -> Result<Self> {
        Flow::new(group, codes.iter().map(|&c| GroupElem(c)).collect())
    }

    /// The trivial flow on `n` indices.
    pub fn zero(n: usize) -> Self {
        Flow {
            values: vec![GroupElem::ZERO; n],
        }
    }

    #[cfg(test)]
    pub(crate) fn from_values_unchecked(values: Vec<GroupElem>) -> Self {
        Flow { values }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[GroupElem] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize) -> GroupElem {
        self.values[i]
    }

    pub fn codes(&self) -> Vec<u32> {
        self.values.iter().map(|g| g.code()).collect()
    }

    /// Indices where the flow is nonzero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.values[i].is_zero()).collect()
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Number of flows on `n` indices, `|G|^(n-1)`, saturating at `u128::MAX`.
pub fn flow_count(group: &Group, n: usize) -> u128 {
    let mut total: u128 = 1;
    for _ in 1..n {
        total = total.saturating_mul(u128::from(group.order()));
    }
    total
}

/// All flows on `n` indices in ascending lexicographic order, with the
/// default capacity cap.
pub fn enumerate_flows(group: &Group, n: usize) -> Result<Vec<Flow>> {
    enumerate_flows_capped(group, n, DEFAULT_FLOW_CAP)
}

/// All flows on `n` indices: the first `n - 1` entries range over the group
/// lexicographically and the last entry is solved from the zero-sum condition.
pub fn enumerate_flows_capped(group: &Group, n: usize, cap: u128) -> Result<Vec<Flow>> {
    if n == 0 {
        return Err(FlowError::Shape("n must be at least 1".into()));
    }
    let total = flow_count(group, n);
    if total > cap {
        return Err(FlowError::capacity(format!("flows of {group} on n={n}"), total, cap));
    }
    let order = group.order();
    let mut out = Vec::with_capacity(total as usize);
    let mut prefix = vec![GroupElem::ZERO; n - 1];
    loop {
        let partial = prefix
            .iter()
            .fold(GroupElem::ZERO, |acc, &x| group.add_unchecked(acc, x));
        let mut values = prefix.clone();
        values.push(group.neg_unchecked(partial));
        out.push(Flow { values });

        // odometer increment, last position fastest
        let mut pos = prefix.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if prefix[pos].0 + 1 < order {
                prefix[pos].0 += 1;
                break;
            }
            prefix[pos] = GroupElem::ZERO;
        }
    }
}

/// A point of `M^n = Z^(n|G|)`, stored as `n` blocks of `|G|` coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    block: usize,
    coords: Vec<u32>,
}

impl LatticePoint {
    pub fn zeros(n: usize, block: usize) -> Self {
        LatticePoint {
            block,
            coords: vec![0; n * block],
        }
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn block_len(&self) -> usize {
        self.block
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[u32]> {
        self.coords.chunks(self.block)
    }

    pub fn add_assign(&mut self, other: &LatticePoint) {
        assert_eq!(
            self.coords.len(),
            other.coords.len(),
            "lattice point dimension mismatch"
        );
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a += b;
        }
    }

    /// Space-separated integers, as used by the matrix export.
    pub fn to_row(&self) -> String {
        let parts: Vec<String> = self.coords.iter().map(u32::to_string).collect();
        parts.join(" ")
    }
}

/// `f -> sum_i e_(i, f(i))`: block `i` holds a single 1 at the position of
/// `f(i)` in the group's element order.
pub fn vertex_embedding(group: &Group, f: &Flow) -> LatticePoint {
    let block = group.order() as usize;
    let mut p = LatticePoint::zeros(f.n(), block);
    for (i, v) in f.values.iter().enumerate() {
        p.coords[i * block + v.code() as usize] = 1;
    }
    p
}

fn check_same_n(f: &Flow, h: &Flow) -> Result<()> {
    if f.n() != h.n() {
        return Err(FlowError::Shape(format!("flows have lengths {} and {}", f.n(), h.n())));
    }
    Ok(())
}

/// Coordinatewise sum of two flows (the action of the group of flows).
pub fn translate(group: &Group, f: &Flow, h: &Flow) -> Result<Flow> {
    check_same_n(f, h)?;
    let values = f
        .values
        .iter()
        .zip(&h.values)
        .map(|(&a, &b)| group.add(a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(Flow { values })
}

/// Coordinatewise inverse.
pub fn negate(group: &Group, f: &Flow) -> Result<Flow> {
    let values = f.values.iter().map(|&a| group.neg(a)).collect::<Result<Vec<_>>>()?;
    Ok(Flow { values })
}

/// Moves the value at position `i` to position `sigma[i]`.
pub fn permute(f: &Flow, sigma: &[usize]) -> Result<Flow> {
    let n = f.n();
    if sigma.len() != n {
        return Err(FlowError::InvalidPermutation(format!(
            "permutation has length {}, flow has length {n}",
            sigma.len()
        )));
    }
    let mut values = vec![None; n];
    for (i, &target) in sigma.iter().enumerate() {
        if target >= n {
            return Err(FlowError::InvalidPermutation(format!("image {target} out of range")));
        }
        if values[target].replace(f.values[i]).is_some() {
            return Err(FlowError::InvalidPermutation(format!("image {target} repeated")));
        }
    }
    Ok(Flow {
        values: values.into_iter().map(Option::unwrap).collect(),
    })
}

/// Applies a group automorphism entrywise.
pub fn automorph(f: &Flow, aut: &Automorphism) -> Flow {
    Flow {
        values: f.values.iter().map(|&v| aut.apply(v)).collect(),
    }
}
