//! Internal groups: finite products of cyclic groups, the d-torus and
//! Euclidean space, together with their Haar measures.

use std::fmt;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::TOLERANCE;

/// Largest finite group that [`InternalGroup::enumerate`] will list.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq)]
pub enum GroupKind {
    /// Z/b_1 x ... x Z/b_k. An empty list is the trivial group.
    CyclicProduct(Vec<u64>),
    /// (R/Z)^d
    Torus(usize),
    /// R^d
    Euclidean(usize),
}

/// A concrete locally compact abelian group with a fixed Haar measure.
///
/// Cyclic products use exact integer arithmetic. Torus and Euclidean
/// elements are `f64` vectors compared with `tolerance`.
#[derive(Clone, Debug, PartialEq)]
pub struct InternalGroup {
    kind: GroupKind,
    tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum GroupElement {
    Residues(Vec<u64>),
    Torus(Vec<f64>),
    Euclidean(Vec<f64>),
}

impl GroupElement {
    pub fn residues(&self) -> Option<&[u64]> {
        match self {
            GroupElement::Residues(r) => Some(r),
            _ => None,
        }
    }

    /// Real coordinates of a torus or Euclidean element.
    pub fn reals(&self) -> Option<&[f64]> {
        match self {
            GroupElement::Torus(x) | GroupElement::Euclidean(x) => Some(x),
            GroupElement::Residues(_) => None,
        }
    }

    /// First real coordinate; convenience for one-dimensional groups.
    pub fn real(&self) -> Option<f64> {
        self.reals().and_then(|x| x.first().copied())
    }

    fn kind_name(&self) -> &'static str {
        match self {
            GroupElement::Residues(_) => "cyclic-product element",
            GroupElement::Torus(_) => "torus element",
            GroupElement::Euclidean(_) => "euclidean element",
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn tuple<T: fmt::Display>(f: &mut fmt::Formatter<'_>, xs: &[T]) -> fmt::Result {
            if xs.len() == 1 {
                return write!(f, "{}", xs[0]);
            }
            write!(f, "(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        }
        match self {
            GroupElement::Residues(r) => tuple(f, r),
            GroupElement::Torus(x) | GroupElement::Euclidean(x) => tuple(f, x),
        }
    }
}

fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Signed distance from `x` to the nearest integer.
pub(crate) fn circle_offset(x: f64) -> f64 {
    x - x.round()
}

impl InternalGroup {
    pub fn cyclic_product(moduli: Vec<u64>) -> Result<Self> {
        if let Some(&b) = moduli.iter().find(|&&b| b < 2) {
            return Err(Error::InvalidGroup(format!("modulus {b} must be at least 2")));
        }
        let order = moduli
            .iter()
            .try_fold(1u128, |acc, &b| acc.checked_mul(b as u128));
        if order.is_none() || order > Some(u64::MAX as u128) {
            return Err(Error::InvalidGroup("group order overflows u64".into()));
        }
        Ok(InternalGroup {
            kind: GroupKind::CyclicProduct(moduli),
            tolerance: 0.0,
        })
    }

    pub fn cyclic(modulus: u64) -> Result<Self> {
        Self::cyclic_product(vec![modulus])
    }

    pub fn torus(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGroup("torus dimension must be positive".into()));
        }
        Ok(InternalGroup {
            kind: GroupKind::Torus(dim),
            tolerance: TOLERANCE,
        })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGroup("euclidean dimension must be positive".into()));
        }
        Ok(InternalGroup {
            kind: GroupKind::Euclidean(dim),
            tolerance: TOLERANCE,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if tolerance.is_nan() || tolerance < 0.0 {
            return Err(Error::InvalidGroup("tolerance must be nonnegative".into()));
        }
        if matches!(self.kind, GroupKind::CyclicProduct(_)) && tolerance != 0.0 {
            return Err(Error::InvalidGroup("cyclic products are exact".into()));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn moduli(&self) -> Option<&[u64]> {
        match &self.kind {
            GroupKind::CyclicProduct(m) => Some(m),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            GroupKind::CyclicProduct(m) => m.len(),
            GroupKind::Torus(d) | GroupKind::Euclidean(d) => *d,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, GroupKind::CyclicProduct(_))
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.kind, GroupKind::Torus(_))
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, GroupKind::Euclidean(_))
    }

    /// Number of elements, for finite groups.
    pub fn order(&self) -> Option<u64> {
        self.moduli().map(|m| m.iter().product())
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GroupKind::CyclicProduct(m) => format!("cyclic-product{m:?}"),
            GroupKind::Torus(d) => format!("torus({d})"),
            GroupKind::Euclidean(d) => format!("euclidean({d})"),
        }
    }

    fn mismatch(&self, e: &GroupElement) -> Error {
        Error::GroupMismatch {
            expected: self.name(),
            found: e.kind_name().to_string(),
        }
    }

    /// Checks that `e` is a canonical element of this group.
    pub fn check(&self, e: &GroupElement) -> Result<()> {
        match (&self.kind, e) {
            (GroupKind::CyclicProduct(m), GroupElement::Residues(r)) => {
                if r.len() != m.len() {
                    return Err(self.mismatch(e));
                }
                if r.iter().zip(m).any(|(x, b)| x >= b) {
                    return Err(Error::InvalidElement(format!("{e} is not reduced")));
                }
                Ok(())
            }
            (GroupKind::Torus(d), GroupElement::Torus(x))
            | (GroupKind::Euclidean(d), GroupElement::Euclidean(x)) => {
                if x.len() != *d {
                    return Err(self.mismatch(e));
                }
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidElement(format!("{e} is not finite")));
                }
                if self.is_torus() && x.iter().any(|v| !(0.0..1.0).contains(v)) {
                    return Err(Error::InvalidElement(format!("{e} is not reduced mod 1")));
                }
                Ok(())
            }
            _ => Err(self.mismatch(e)),
        }
    }

    /// Builds the canonical element with the given integer coordinates
    /// (cyclic products; reduced mod each modulus).
    pub fn residues(&self, coords: &[i64]) -> Result<GroupElement> {
        let m = self
            .moduli()
            .ok_or_else(|| Error::InvalidElement(format!("{} has no residues", self.name())))?;
        if coords.len() != m.len() {
            return Err(Error::InvalidElement(format!(
                "expected {} residues, got {}",
                m.len(),
                coords.len()
            )));
        }
        Ok(GroupElement::Residues(
            coords
                .iter()
                .zip(m)
                .map(|(&c, &b)| c.rem_euclid(b as i64) as u64)
                .collect(),
        ))
    }

    /// Builds the canonical element with the given real coordinates
    /// (torus: reduced mod 1).
    pub fn point(&self, coords: &[f64]) -> Result<GroupElement> {
        if coords.len() != self.dim() || self.is_finite() {
            return Err(Error::InvalidElement(format!(
                "{} cannot hold real point {coords:?}",
                self.name()
            )));
        }
        match self.kind {
            GroupKind::Torus(_) => Ok(GroupElement::Torus(coords.iter().map(|&x| wrap_unit(x)).collect())),
            _ => Ok(GroupElement::Euclidean(coords.to_vec())),
        }
    }

    pub fn zero(&self) -> GroupElement {
        match &self.kind {
            GroupKind::CyclicProduct(m) => GroupElement::Residues(vec![0; m.len()]),
            GroupKind::Torus(d) => GroupElement::Torus(vec![0.0; *d]),
            GroupKind::Euclidean(d) => GroupElement::Euclidean(vec![0.0; *d]),
        }
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (GroupElement::Residues(x), GroupElement::Residues(y)) => {
                let m = self.moduli().unwrap_or_default();
                GroupElement::Residues(
                    x.iter()
                        .zip(y)
                        .zip(m)
                        .map(|((p, q), b)| ((*p as u128 + *q as u128) % *b as u128) as u64)
                        .collect(),
                )
            }
            (GroupElement::Torus(x), GroupElement::Torus(y)) => {
                GroupElement::Torus(x.iter().zip(y).map(|(p, q)| wrap_unit(p + q)).collect())
            }
            (GroupElement::Euclidean(x), GroupElement::Euclidean(y)) => {
                GroupElement::Euclidean(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            _ => unreachable!("checked above"),
        })
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(match a {
            GroupElement::Residues(x) => {
                let m = self.moduli().unwrap_or_default();
                GroupElement::Residues(x.iter().zip(m).map(|(p, b)| (b - p) % b).collect())
            }
            GroupElement::Torus(x) => GroupElement::Torus(x.iter().map(|p| wrap_unit(-p)).collect()),
            GroupElement::Euclidean(x) => GroupElement::Euclidean(x.iter().map(|p| -p).collect()),
        })
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    /// The `n`-fold sum of `a` (negative `n` uses the inverse).
    pub fn times(&self, a: &GroupElement, n: i64) -> Result<GroupElement> {
        self.check(a)?;
        Ok(match a {
            GroupElement::Residues(x) => {
                let m = self.moduli().unwrap_or_default();
                GroupElement::Residues(
                    x.iter()
                        .zip(m)
                        .map(|(&p, &b)| {
                            let r = (n as i128).rem_euclid(b as i128) as u128;
                            ((r * p as u128) % b as u128) as u64
                        })
                        .collect(),
                )
            }
            GroupElement::Torus(x) => {
                GroupElement::Torus(x.iter().map(|&p| wrap_unit(mul_mod1(p, n))).collect())
            }
            GroupElement::Euclidean(x) => {
                GroupElement::Euclidean(x.iter().map(|&p| p * n as f64).collect())
            }
        })
    }

    /// Equality of canonical elements: exact for residues, within the
    /// tolerance (circular distance on the torus) otherwise.
    pub fn approx_eq(&self, a: &GroupElement, b: &GroupElement) -> bool {
        match (a, b) {
            (GroupElement::Residues(x), GroupElement::Residues(y)) => x == y,
            (GroupElement::Torus(x), GroupElement::Torus(y)) => x
                .iter()
                .zip(y)
                .all(|(p, q)| circle_offset(p - q).abs() <= self.tolerance),
            (GroupElement::Euclidean(x), GroupElement::Euclidean(y)) => {
                x.len() == y.len() && x.iter().zip(y).all(|(p, q)| (p - q).abs() <= self.tolerance)
            }
            _ => false,
        }
    }

    /// Order of a cyclic-product element.
    pub fn element_order(&self, a: &GroupElement) -> Result<u64> {
        self.check(a)?;
        let (GroupElement::Residues(x), Some(m)) = (a, self.moduli()) else {
            return Err(Error::NotFinite(self.name()));
        };
        Ok(x.iter()
            .zip(m)
            .fold(1u64, |acc, (&p, &b)| acc.lcm(&(b / p.gcd(&b)))))
    }

    /// Mixed-radix index of a cyclic-product element; the last coordinate
    /// varies fastest, so ranks follow lexicographic order.
    pub fn rank(&self, a: &GroupElement) -> Result<u64> {
        self.check(a)?;
        match a {
            GroupElement::Residues(x) => Ok(self.rank_of(x)),
            _ => Err(Error::NotFinite(self.name())),
        }
    }

    pub(crate) fn rank_of(&self, x: &[u64]) -> u64 {
        let m = self.moduli().unwrap_or_default();
        x.iter().zip(m).fold(0u64, |acc, (&p, &b)| acc * b + p)
    }

    pub fn unrank(&self, mut r: u64) -> Result<GroupElement> {
        let m = self.moduli().ok_or_else(|| Error::NotFinite(self.name()))?;
        let order = self.order().unwrap_or(1);
        if r >= order {
            return Err(Error::InvalidElement(format!("rank {r} out of range for order {order}")));
        }
        let mut x = vec![0; m.len()];
        for (slot, &b) in x.iter_mut().zip(m).rev() {
            *slot = r % b;
            r /= b;
        }
        Ok(GroupElement::Residues(x))
    }

    /// Every element of a finite group, in lexicographic residue order.
    pub fn enumerate(&self) -> Result<Vec<GroupElement>> {
        let order = self.order().ok_or_else(|| Error::NotFinite(self.name()))?;
        if order as u128 > ENUMERATION_LIMIT {
            return Err(Error::BudgetExceeded {
                what: format!("enumerating {}", self.name()),
                requested: order as u128,
                limit: ENUMERATION_LIMIT,
            });
        }
        (0..order).map(|r| self.unrank(r)).collect()
    }

    /// Draws a Haar-uniform element using `rng`.
    pub fn sample_haar_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GroupElement> {
        match &self.kind {
            GroupKind::CyclicProduct(m) => Ok(GroupElement::Residues(
                m.iter().map(|&b| rng.random_range(0..b)).collect(),
            )),
            GroupKind::Torus(d) => Ok(GroupElement::Torus(
                (0..*d).map(|_| rng.random::<f64>()).collect(),
            )),
            GroupKind::Euclidean(_) => Err(Error::NoHaarMeasure(self.name())),
        }
    }

    /// Haar-uniform element, deterministic in `seed`.
    pub fn sample_haar(&self, seed: u64) -> Result<GroupElement> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_haar_with(&mut rng)
    }
}

/// `n * p mod 1` with one rounding of the integer-fraction split of `n`.
fn mul_mod1(p: f64, n: i64) -> f64 {
    // split n so each partial product stays well inside f64 precision
    let hi = n >> 26;
    let lo = n - (hi << 26);
    let a = (p * (1i64 << 26) as f64).rem_euclid(1.0) * hi as f64;
    let b = p * lo as f64;
    (a.rem_euclid(1.0) + b.rem_euclid(1.0)).rem_euclid(1.0)
}
