//! Finite abelian groups presented as products of cyclic factors.
//!
//! Elements are stored as mixed-radix integer codes, least-significant factor
//! first: for factors `[m0, m1, ...]` the residue tuple `(r0, r1, ...)` has
//! code `r0 + m0 * (r1 + m1 * (...))`. Code 0 is the identity, and element
//! order everywhere in the crate is ascending code order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};

/// An element of a [`Group`], identified by its mixed-radix code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElem(pub u32);

impl GroupElem {
    pub const ZERO: GroupElem = GroupElem(0);

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite abelian group `Z_{m0} x Z_{m1} x ...`, kept exactly as given.
///
/// No invariant-factor normalization happens: `[2, 3]` and `[6]` are different
/// values even though the groups are isomorphic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Group {
    factors: Vec<u32>,
    #[serde(skip)]
    order: u32,
}

#[derive(Deserialize)]
struct GroupRepr {
    factors: Vec<u32>,
}

impl<'de> Deserialize<'de> for Group {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = GroupRepr::deserialize(de)?;
        Group::new(&repr.factors).map_err(serde::de::Error::custom)
    }
}

impl Group {
    /// Builds the product of cyclic groups with the given moduli.
    pub fn new(factors: &[u32]) -> Result<Self> {
        if factors.is_empty() {
            return Err(FlowError::InvalidGroup("factor list is empty".into()));
        }
        let mut order: u64 = 1;
        for &m in factors {
            if m < 2 {
                return Err(FlowError::InvalidGroup(format!("factor {m} is smaller than 2")));
            }
            order *= u64::from(m);
            if order > u64::from(u32::MAX) {
                return Err(FlowError::InvalidGroup("group order does not fit in 32 bits".into()));
            }
        }
        Ok(Group {
            factors: factors.to_vec(),
            order: order as u32,
        })
    }

    /// The cyclic group `Z_m`.
    pub fn cyclic(m: u32) -> Result<Self> {
        Group::new(&[m])
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_cyclic_factor(&self) -> bool {
        self.factors.len() == 1
    }

    pub fn identity(&self) -> GroupElem {
        GroupElem::ZERO
    }

    /// Checks that `code` is a valid element code and wraps it.
    pub fn elem(&self, code: u32) -> Result<GroupElem> {
        if code < self.order {
            Ok(GroupElem(code))
        } else {
            Err(FlowError::InvalidElement {
                code,
                order: self.order,
            })
        }
    }

    fn check(&self, a: GroupElem) -> Result<()> {
        self.elem(a.0).map(|_| ())
    }

    /// Encodes a residue tuple. Residues are reduced modulo their factor.
    pub fn encode(&self, residues: &[u32]) -> Result<GroupElem> {
        if residues.len() != self.factors.len() {
            return Err(FlowError::Shape(format!(
                "expected {} residues, got {}",
                self.factors.len(),
                residues.len()
            )));
        }
        let mut code = 0u32;
        for (&r, &m) in residues.iter().zip(&self.factors).rev() {
            code = code * m + r % m;
        }
        Ok(GroupElem(code))
    }

    pub fn decode(&self, a: GroupElem) -> Result<Vec<u32>> {
        self.check(a)?;
        let mut code = a.0;
        Ok(self
            .factors
            .iter()
            .map(|&m| {
                let r = code % m;
                code /= m;
                r
            })
            .collect())
    }

    /// Group law without range checks; callers guarantee valid codes.
    #[inline]
    pub(crate) fn add_unchecked(&self, a: GroupElem, b: GroupElem) -> GroupElem {
        if let [m] = self.factors[..] {
            let s = u64::from(a.0) + u64::from(b.0);
            let m = u64::from(m);
            return GroupElem((if s >= m { s - m } else { s }) as u32);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut code = 0u32;
        let mut radix = 1u32;
        for &m in &self.factors {
            let r = ((u64::from(x % m) + u64::from(y % m)) % u64::from(m)) as u32;
            code += r * radix;
            radix *= m;
            x /= m;
            y /= m;
        }
        GroupElem(code)
    }

    #[inline]
    pub(crate) fn neg_unchecked(&self, a: GroupElem) -> GroupElem {
        if let [m] = self.factors[..] {
            return GroupElem(if a.0 == 0 { 0 } else { m - a.0 });
        }
        let mut x = a.0;
        let mut code = 0u32;
        let mut radix = 1u32;
        for &m in &self.factors {
            let r = x % m;
            code += ((m - r) % m) * radix;
            radix *= m;
            x /= m;
        }
        GroupElem(code)
    }

    pub fn add(&self, a: GroupElem, b: GroupElem) -> Result<GroupElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub fn neg(&self, a: GroupElem) -> Result<GroupElem> {
        self.check(a)?;
        Ok(self.neg_unchecked(a))
    }

    pub fn sub(&self, a: GroupElem, b: GroupElem) -> Result<GroupElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, self.neg_unchecked(b)))
    }

    /// Sum of a sequence of elements.
    pub fn sum<I: IntoIterator<Item = GroupElem>>(&self, items: I) -> Result<GroupElem> {
        items.into_iter().try_fold(GroupElem::ZERO, |acc, x| self.add(acc, x))
    }

    /// `k * a` for a non-negative integer `k`.
    pub fn scale(&self, k: u32, a: GroupElem) -> Result<GroupElem> {
        let residues = self.decode(a)?;
        let scaled: Vec<u32> = residues
            .iter()
            .zip(&self.factors)
            .map(|(&r, &m)| ((u64::from(r) * u64::from(k)) % u64::from(m)) as u32)
            .collect();
        self.encode(&scaled)
    }

    /// All elements in ascending code order, identity first.
    pub fn elements(&self) -> Vec<GroupElem> {
        (0..self.order).map(GroupElem).collect()
    }

    /// Automorphisms of a cyclic group `Z_m`: multiplication by each unit,
    /// ascending by unit, so the identity comes first.
    pub fn automorphisms(&self) -> Result<Vec<Automorphism>> {
        let [m] = self.factors[..] else {
            return Err(FlowError::NotImplemented(format!(
                "automorphisms of non-cyclic presentation {:?}",
                self.factors
            )));
        };
        Ok((1..m)
            .filter(|&u| gcd(u, m) == 1)
            .map(|u| Automorphism {
                images: (0..m)
                    .map(|x| GroupElem(((u64::from(x) * u64::from(u)) % u64::from(m)) as u32))
                    .collect(),
            })
            .collect())
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|m| format!("Z{m}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A group automorphism given as the image of every element code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Automorphism {
    images: Vec<GroupElem>,
}

impl Automorphism {
    /// Builds an automorphism from an explicit image table, checking that it
    /// is a bijection that respects addition.
    pub fn from_images(group: &Group, images: Vec<GroupElem>) -> Result<Self> {
        let order = group.order() as usize;
        if images.len() != order {
            return Err(FlowError::Shape(format!(
                "automorphism table has {} entries, group order is {order}",
                images.len()
            )));
        }
        let mut seen = vec![false; order];
        for &img in &images {
            group.check(img)?;
            if std::mem::replace(&mut seen[img.0 as usize], true) {
                return Err(FlowError::InvalidPermutation(
                    "automorphism table is not injective".into(),
                ));
            }
        }
        let aut = Automorphism { images };
        for a in group.elements() {
            for b in group.elements() {
                if aut.apply(group.add_unchecked(a, b)) != group.add_unchecked(aut.apply(a), aut.apply(b)) {
                    return Err(FlowError::InvalidPermutation("table is not additive".into()));
                }
            }
        }
        Ok(aut)
    }

    #[inline]
    pub fn apply(&self, a: GroupElem) -> GroupElem {
        self.images[a.0 as usize]
    }

    pub fn images(&self) -> &[GroupElem] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, g)| g.0 as usize == i)
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism {
            images: other.images.iter().map(|&g| self.apply(g)).collect(),
        }
    }
}
