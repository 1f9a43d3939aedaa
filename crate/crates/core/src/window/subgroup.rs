use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::group::{circle_offset, GroupElement, GroupKind, InternalGroup};

/// Subgroups small enough to be listed explicitly after normalization.
const EXPLICIT_LIMIT: u64 = 1 << 20;

#[derive(Clone, Debug)]
enum Repr {
    /// Sorted ranks of the elements (finite groups).
    Elements(Vec<u64>),
    /// `∏_c step_c·Z/b_c` (finite groups, coordinatewise).
    Steps(Vec<u64>),
    /// `{k/q : 0 ≤ k < q}` in the circle.
    Rotations(u64),
    /// `{0}` in a Euclidean group.
    Trivial,
    Full,
}

/// A subgroup of an internal group: period groups, Haar period groups and
/// quotient kernels.
#[derive(Clone, Debug)]
pub struct Subgroup {
    group: InternalGroup,
    repr: Repr,
}

impl Subgroup {
    pub fn trivial(group: &InternalGroup) -> Self {
        let repr = match group.kind() {
            GroupKind::CyclicProduct(_) => Repr::Elements(vec![0]),
            GroupKind::Torus(1) => Repr::Rotations(1),
            _ => Repr::Trivial,
        };
        Subgroup {
            group: group.clone(),
            repr,
        }
    }

    pub fn full(group: &InternalGroup) -> Self {
        Subgroup {
            group: group.clone(),
            repr: Repr::Full,
        }
        .normalized()
    }

    /// The finite rotation group of order `q` in torus(1).
    pub fn rotations(group: &InternalGroup, q: u64) -> Result<Self> {
        if !matches!(group.kind(), GroupKind::Torus(1)) || q == 0 {
            return Err(Error::NotSubgroup(format!("rotations of order {q} in {}", group.name())));
        }
        Ok(Subgroup {
            group: group.clone(),
            repr: Repr::Rotations(q),
        })
    }

    /// `∏_c step_c·Z/b_c` for steps dividing the moduli.
    pub fn coordinate_steps(group: &InternalGroup, steps: Vec<u64>) -> Result<Self> {
        let m = group.moduli().ok_or_else(|| Error::NotFinite(group.name()))?;
        if steps.len() != m.len() || steps.iter().zip(m).any(|(&d, &b)| d == 0 || b % d != 0) {
            return Err(Error::NotSubgroup(format!("steps {steps:?} do not divide {m:?}")));
        }
        Ok(Subgroup {
            group: group.clone(),
            repr: Repr::Steps(steps),
        }
        .normalized())
    }

    /// Validates that `elements` form a subgroup of a finite group.
    pub fn from_elements(group: &InternalGroup, elements: &[GroupElement]) -> Result<Self> {
        if !group.is_finite() {
            return Err(Error::NotFinite(group.name()));
        }
        let mut ranks = BTreeSet::new();
        for e in elements {
            ranks.insert(group.rank(e)?);
        }
        if !ranks.contains(&0) {
            return Err(Error::NotSubgroup("does not contain zero".into()));
        }
        let members: Vec<GroupElement> = ranks.iter().map(|&r| group.unrank(r)).collect::<Result<_>>()?;
        for a in &members {
            for b in &members {
                let s = group.add(a, b)?;
                if !ranks.contains(&group.rank(&s)?) {
                    return Err(Error::NotSubgroup(format!("{a} + {b} = {s} is missing")));
                }
            }
        }
        Ok(Subgroup {
            group: group.clone(),
            repr: Repr::Elements(ranks.into_iter().collect()),
        })
    }

    /// The subgroup generated by `generators` in a finite group.
    pub fn generated_by(group: &InternalGroup, generators: &[GroupElement]) -> Result<Self> {
        let order = group.order().ok_or_else(|| Error::NotFinite(group.name()))?;
        if order > EXPLICIT_LIMIT {
            return Err(Error::BudgetExceeded {
                what: "subgroup closure".into(),
                requested: order as u128,
                limit: EXPLICIT_LIMIT as u128,
            });
        }
        let mut seen = BTreeSet::from([0u64]);
        let mut frontier = vec![group.zero()];
        while let Some(x) = frontier.pop() {
            for g in generators {
                let y = group.add(&x, g)?;
                if seen.insert(group.rank(&y)?) {
                    frontier.push(y);
                }
            }
        }
        Ok(Subgroup {
            group: group.clone(),
            repr: Repr::Elements(seen.into_iter().collect()),
        })
    }

    fn normalized(self) -> Self {
        let Some(order) = self.order() else { return self };
        if !self.group.is_finite() || order > EXPLICIT_LIMIT {
            return self;
        }
        match &self.repr {
            Repr::Elements(_) => self,
            _ => {
                let ranks = (0..self.group.order().unwrap_or(1))
                    .filter(|&r| {
                        self.group
                            .unrank(r)
                            .map(|e| self.contains(&e))
                            .unwrap_or(false)
                    })
                    .collect();
                Subgroup {
                    group: self.group,
                    repr: Repr::Elements(ranks),
                }
            }
        }
    }

    pub fn group(&self) -> &InternalGroup {
        &self.group
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        if self.group.check(e).is_err() {
            return false;
        }
        match (&self.repr, e) {
            (Repr::Full, _) => true,
            (Repr::Elements(ranks), _) => self
                .group
                .rank(e)
                .map(|r| ranks.binary_search(&r).is_ok())
                .unwrap_or(false),
            (Repr::Steps(steps), GroupElement::Residues(x)) => {
                x.iter().zip(steps).all(|(v, d)| v % d == 0)
            }
            (Repr::Rotations(q), GroupElement::Torus(x)) => {
                circle_offset(x[0] * *q as f64).abs() <= self.group.tolerance() * *q as f64
            }
            (Repr::Trivial, _) => self.group.approx_eq(e, &self.group.zero()),
            _ => false,
        }
    }

    /// Number of elements; `None` for continuum subgroups.
    pub fn order(&self) -> Option<u64> {
        match &self.repr {
            Repr::Elements(r) => Some(r.len() as u64),
            Repr::Steps(steps) => {
                let m = self.group.moduli()?;
                Some(m.iter().zip(steps).map(|(b, d)| b / d).product())
            }
            Repr::Rotations(q) => Some(*q),
            Repr::Trivial => Some(1),
            Repr::Full => self.group.order(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == Some(1)
    }

    pub fn is_full(&self) -> bool {
        match &self.repr {
            Repr::Full => true,
            _ => self.group.order().is_some() && self.order() == self.group.order(),
        }
    }

    /// Order of the rotation group, for circle subgroups.
    pub fn rotation_order(&self) -> Option<u64> {
        match &self.repr {
            Repr::Rotations(q) => Some(*q),
            _ => None,
        }
    }

    /// Lists the elements of a finite subgroup.
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        match &self.repr {
            Repr::Elements(ranks) => ranks.iter().map(|&r| self.group.unrank(r)).collect(),
            Repr::Rotations(q) => (0..*q)
                .map(|k| self.group.point(&[k as f64 / *q as f64]))
                .collect(),
            Repr::Trivial => Ok(vec![self.group.zero()]),
            Repr::Steps(_) | Repr::Full => {
                let order = self.order().ok_or_else(|| {
                    Error::Unsupported(format!("{} is a continuum", self.group.name()))
                })?;
                if order > EXPLICIT_LIMIT {
                    return Err(Error::BudgetExceeded {
                        what: "listing subgroup".into(),
                        requested: order as u128,
                        limit: EXPLICIT_LIMIT as u128,
                    });
                }
                Ok(self
                    .group
                    .enumerate()?
                    .into_iter()
                    .filter(|e| self.contains(e))
                    .collect())
            }
        }
    }

    /// A generating set, greedily chosen from the element list.
    pub fn generators(&self) -> Result<Vec<GroupElement>> {
        match &self.repr {
            Repr::Rotations(q) if *q > 1 => Ok(vec![self.group.point(&[1.0 / *q as f64])?]),
            Repr::Rotations(_) | Repr::Trivial => Ok(Vec::new()),
            Repr::Full if !self.group.is_finite() => Err(Error::Unsupported(format!(
                "{} is not finitely generated as listed",
                self.group.name()
            ))),
            _ => {
                let mut gens = Vec::new();
                let mut span = Subgroup::trivial(&self.group);
                for e in self.elements()? {
                    if !span.contains(&e) {
                        gens.push(e);
                        span = Subgroup::generated_by(&self.group, &gens)?;
                    }
                }
                Ok(gens)
            }
        }
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        if self.group != other.group {
            return false;
        }
        match (&self.repr, &other.repr) {
            (_, Repr::Full) => true,
            (Repr::Full, _) => other.is_full(),
            (Repr::Rotations(a), Repr::Rotations(b)) => b % a == 0,
            (Repr::Trivial, _) => true,
            (Repr::Steps(a), Repr::Steps(b)) => a.iter().zip(b).all(|(x, y)| x % y == 0),
            _ => match self.elements() {
                Ok(els) => els.iter().all(|e| other.contains(e)),
                Err(_) => false,
            },
        }
    }

    /// Elements rendered with `Display`, for reports.
    pub fn labels(&self) -> Vec<String> {
        match self.elements() {
            Ok(els) => els.iter().map(|e| e.to_string()).collect(),
            Err(_) => vec![format!("{}", self)],
        }
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.order() == other.order() && self.is_subgroup_of(other) && other.is_subgroup_of(self)
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Full => write!(f, "full {}", self.group.name()),
            Repr::Trivial => write!(f, "{{0}}"),
            Repr::Rotations(q) => write!(f, "(1/{q})Z/Z"),
            Repr::Steps(s) => write!(f, "steps{s:?} in {}", self.group.name()),
            Repr::Elements(_) => {
                let labels = self.labels();
                write!(f, "{{{}}}", labels.join(", "))
            }
        }
    }
}
