//! Window algebra: measures, translates, overlaps, period groups, Haar
//! regularization and the interior/closure/boundary of supported windows.
//!
//! Three representations are closed under the operations used here:
//! explicit subsets of a finite group, forbidden-residue cylinders, and
//! finite interval unions on the circle or the line.

mod finite;
mod intervals;
mod subgroup;

use std::fmt;

pub use finite::{Constraint, Cylinder, FiniteSet, EXPLICIT_ORDER_LIMIT};
pub use intervals::{Interval, IntervalUnion};
pub use subgroup::Subgroup;

use crate::error::{Error, Result};
use crate::group::{GroupElement, InternalGroup};
use crate::measure::Measure;

#[derive(Clone, Debug)]
pub enum Window {
    Finite(FiniteSet),
    Cylinder(Cylinder),
    Intervals(IntervalUnion),
}

/// Interior, closure and boundary of a window.
#[derive(Clone, Debug)]
pub struct TopoParts {
    pub interior: Window,
    pub closure: Window,
    pub boundary: Window,
}

impl Window {
    pub fn finite(group: &InternalGroup, elements: &[GroupElement]) -> Result<Self> {
        Ok(Window::Finite(FiniteSet::new(group, elements)?))
    }

    pub fn cylinder(group: &InternalGroup, forbidden: &[Vec<u64>]) -> Result<Self> {
        Ok(Window::Cylinder(Cylinder::per_coordinate(group, forbidden)?))
    }

    pub fn intervals(group: &InternalGroup, pieces: &[Interval]) -> Result<Self> {
        Ok(Window::Intervals(IntervalUnion::new(group, pieces)?))
    }

    pub fn empty(group: &InternalGroup) -> Result<Self> {
        if group.is_finite() {
            Self::finite(group, &[])
        } else {
            Ok(Window::Intervals(IntervalUnion::empty(group)?))
        }
    }

    /// The whole group (finite groups and the circle).
    pub fn full(group: &InternalGroup) -> Result<Self> {
        if group.is_finite() {
            Ok(Window::Finite(FiniteSet::full(group)?))
        } else {
            Ok(Window::Intervals(IntervalUnion::full_circle(group)?))
        }
    }

    pub fn group(&self) -> &InternalGroup {
        match self {
            Window::Finite(w) => w.group(),
            Window::Cylinder(w) => w.group(),
            Window::Intervals(w) => w.group(),
        }
    }

    fn same_group(&self, h: &GroupElement) -> Result<()> {
        self.group().check(h)
    }

    pub fn contains(&self, h: &GroupElement) -> bool {
        match self {
            Window::Finite(w) => w.contains(h),
            Window::Cylinder(w) => w.contains(h),
            Window::Intervals(w) => w.contains(h),
        }
    }

    pub fn is_empty(&self) -> Result<bool> {
        match self {
            Window::Finite(w) => Ok(w.is_empty()),
            Window::Cylinder(w) => w.is_empty(),
            Window::Intervals(w) => Ok(w.is_empty()),
        }
    }

    /// Normalized Haar measure (Lebesgue on R); exact for finite groups.
    pub fn measure(&self) -> Result<Measure> {
        match self {
            Window::Finite(w) => Ok(w.measure()),
            Window::Cylinder(w) => w.measure(),
            Window::Intervals(w) => Ok(Measure::Approx(w.measure())),
        }
    }

    pub fn translate(&self, h: &GroupElement) -> Result<Window> {
        self.same_group(h)?;
        Ok(match self {
            Window::Finite(w) => Window::Finite(w.translate(h)?),
            Window::Cylinder(w) => Window::Cylinder(w.translate(h)?),
            Window::Intervals(w) => Window::Intervals(w.translate(h.real().unwrap_or(0.0))),
        })
    }

    /// Explicit membership table, for windows in finite groups.
    pub fn to_finite(&self) -> Result<FiniteSet> {
        match self {
            Window::Finite(w) => Ok(w.clone()),
            Window::Cylinder(w) => w.to_finite(),
            Window::Intervals(w) => Err(Error::NotFinite(w.group().name())),
        }
    }

    pub fn intersection(&self, other: &Window) -> Result<Window> {
        match (self, other) {
            (Window::Cylinder(a), Window::Cylinder(b)) => Ok(Window::Cylinder(a.intersection(b)?)),
            (Window::Intervals(a), Window::Intervals(b)) => Ok(Window::Intervals(a.intersection(b)?)),
            (Window::Intervals(_), _) | (_, Window::Intervals(_)) => Err(Error::GroupMismatch {
                expected: self.group().name(),
                found: other.group().name(),
            }),
            _ => Ok(Window::Finite(self.to_finite()?.combine(&other.to_finite()?, |a, b| a && b)?)),
        }
    }

    /// `m_H(W ∩ (W + h))`.
    pub fn overlap_measure(&self, h: &GroupElement) -> Result<Measure> {
        self.same_group(h)?;
        match self {
            Window::Finite(w) => Ok(Measure::ratio(
                w.overlap_count(h)? as u128,
                w.members().len() as u128,
            )),
            _ => self.intersection(&self.translate(h)?)?.measure(),
        }
    }

    /// `m_H((W + h) △ W)`.
    pub fn symdiff_measure(&self, h: &GroupElement) -> Result<Measure> {
        self.same_group(h)?;
        match self {
            Window::Intervals(w) => {
                let t = w.translate(h.real().unwrap_or(0.0));
                Ok(Measure::Approx(t.symmetric_difference(w)?.measure()))
            }
            _ => {
                let m = self.measure()?;
                let o = self.overlap_measure(h)?;
                let d = &m - &o;
                Ok(&d + &d)
            }
        }
    }

    /// The period group `H_W = {h : h + W = W}`.
    pub fn periods(&self) -> Result<Subgroup> {
        match self {
            Window::Finite(w) => w.periods(),
            Window::Cylinder(w) => w.periods(),
            Window::Intervals(w) => {
                if w.group().is_torus() {
                    match w.circle_periods()? {
                        None => Ok(Subgroup::full(w.group())),
                        Some(q) => Subgroup::rotations(w.group(), q),
                    }
                } else if w.is_empty() {
                    Ok(Subgroup::full(w.group()))
                } else {
                    // R has no nontrivial compact subgroup
                    Ok(Subgroup::trivial(w.group()))
                }
            }
        }
    }

    /// The Haar period group `{h : m_H((h + W) △ W) = 0}`.
    pub fn haar_periods(&self) -> Result<Subgroup> {
        match self {
            Window::Finite(w) => w.haar_periods(),
            // every point of a finite group has positive mass
            Window::Cylinder(w) => w.periods(),
            Window::Intervals(w) => {
                if w.group().is_torus() {
                    match w.circle_haar_periods()? {
                        None => Ok(Subgroup::full(w.group())),
                        Some(q) => Subgroup::rotations(w.group(), q),
                    }
                } else if w.measure() <= w.group().tolerance() {
                    Ok(Subgroup::full(w.group()))
                } else {
                    Ok(Subgroup::trivial(w.group()))
                }
            }
        }
    }

    /// Haar regularization: the support of Haar measure restricted to W.
    pub fn regularize(&self) -> Window {
        match self {
            Window::Intervals(w) => Window::Intervals(w.regularize()),
            other => other.clone(),
        }
    }

    pub fn topo_parts(&self) -> Result<TopoParts> {
        match self {
            Window::Intervals(w) => Ok(TopoParts {
                interior: Window::Intervals(w.interior()),
                closure: Window::Intervals(w.closure()),
                boundary: Window::Intervals(w.boundary()),
            }),
            // discrete topology
            other => Ok(TopoParts {
                interior: other.clone(),
                closure: other.clone(),
                boundary: Window::empty(other.group())?,
            }),
        }
    }

    pub fn interior(&self) -> Window {
        match self {
            Window::Intervals(w) => Window::Intervals(w.interior()),
            other => other.clone(),
        }
    }

    pub fn closure(&self) -> Window {
        match self {
            Window::Intervals(w) => Window::Intervals(w.closure()),
            other => other.clone(),
        }
    }

    /// Set equality (breakpoints compared within tolerance).
    pub fn same_set(&self, other: &Window) -> Result<bool> {
        match (self, other) {
            (Window::Intervals(a), Window::Intervals(b)) => Ok(a.same_set(b)),
            (Window::Intervals(_), _) | (_, Window::Intervals(_)) => Ok(false),
            _ => Ok(self.to_finite()? == other.to_finite()?),
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Finite(w) => {
                let labels: Vec<String> = w.elements().iter().map(|e| e.to_string()).collect();
                write!(f, "{{{}}}", labels.join(", "))
            }
            Window::Cylinder(w) => {
                let parts: Vec<String> = w
                    .constraints()
                    .iter()
                    .map(|c| format!("h{} mod {} ∉ {:?}", c.coord, c.modulus, c.forbidden))
                    .collect();
                write!(f, "{{h : {}}}", parts.join(", "))
            }
            Window::Intervals(w) => write!(f, "{w}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(m: u64) -> InternalGroup {
        InternalGroup::cyclic(m).unwrap()
    }

    fn circle() -> InternalGroup {
        InternalGroup::torus(1).unwrap()
    }

    fn line() -> InternalGroup {
        InternalGroup::euclidean(1).unwrap()
    }

    fn pt(g: &InternalGroup, x: f64) -> GroupElement {
        g.point(&[x]).unwrap()
    }

    #[test]
    fn measures() {
        let g = InternalGroup::cyclic_product(vec![2, 3]).unwrap();
        assert_eq!(Window::cylinder(&g, &[vec![0], vec![0]]).unwrap().measure().unwrap().to_string(), "1/3");
        assert!(Window::empty(&g).unwrap().measure().unwrap().is_zero());
        let w = Window::intervals(&circle(), &[Interval::closed(0.0, 0.25)]).unwrap();
        assert!((w.measure().unwrap().to_f64() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn overlap_examples() {
        let g = z(2);
        let w = Window::finite(&g, &[g.residues(&[1]).unwrap()]).unwrap();
        assert_eq!(w.overlap_measure(&g.residues(&[0]).unwrap()).unwrap().to_string(), "1/2");
        assert!(w.overlap_measure(&g.residues(&[1]).unwrap()).unwrap().is_zero());
        assert_eq!(w.symdiff_measure(&g.residues(&[1]).unwrap()).unwrap().to_string(), "1");

        let c = circle();
        let w = Window::intervals(&c, &[Interval::half_open(0.0, 0.4)]).unwrap();
        assert!((w.overlap_measure(&pt(&c, 0.3)).unwrap().to_f64() - 0.1).abs() < 1e-12);
        let w = Window::intervals(&c, &[Interval::half_open(0.0, 0.5)]).unwrap();
        assert!((w.symdiff_measure(&pt(&c, 0.5)).unwrap().to_f64() - 1.0).abs() < 1e-12);
        assert!(w.symdiff_measure(&c.zero()).unwrap().is_zero());
    }

    #[test]
    fn period_examples() {
        let g = z(4);
        let w = Window::finite(&g, &[g.residues(&[0]).unwrap(), g.residues(&[2]).unwrap()]).unwrap();
        assert_eq!(w.periods().unwrap().labels(), ["0", "2"]);
        let w = Window::intervals(&line(), &[Interval::half_open(0.0, 0.2)]).unwrap();
        assert!(w.periods().unwrap().is_trivial());
        let g = InternalGroup::cyclic_product(vec![2, 3]).unwrap();
        assert!(Window::full(&g).unwrap().periods().unwrap().is_full());
    }

    #[test]
    fn haar_period_examples() {
        let l = line();
        let w = Window::intervals(&l, &[Interval::half_open(0.0, 0.3), Interval::point(0.7)]).unwrap();
        let hp = w.haar_periods().unwrap();
        assert!(hp.is_trivial());
        let core = Window::intervals(&l, &[Interval::half_open(0.0, 0.3)]).unwrap();
        assert_eq!(hp, core.periods().unwrap());
        assert!(Window::empty(&l).unwrap().haar_periods().unwrap().is_full());
        assert!(Window::intervals(&l, &[Interval::point(0.7)]).unwrap().haar_periods().unwrap().is_full());
    }

    #[test]
    fn regularize_examples() {
        let g = z(5);
        let w = Window::finite(&g, &[g.residues(&[3]).unwrap()]).unwrap();
        assert!(w.regularize().same_set(&w).unwrap());
        let w = Window::intervals(&line(), &[Interval::closed(0.0, 1.0), Interval::point(2.0)]).unwrap();
        let want = Window::intervals(&line(), &[Interval::closed(0.0, 1.0)]).unwrap();
        assert!(w.regularize().same_set(&want).unwrap());
    }

    #[test]
    fn topology_examples() {
        let g = z(3);
        let w = Window::finite(&g, &[g.residues(&[1]).unwrap()]).unwrap();
        let parts = w.topo_parts().unwrap();
        assert!(parts.interior.same_set(&w).unwrap());
        assert!(parts.closure.same_set(&w).unwrap());
        assert!(parts.boundary.is_empty().unwrap());

        let c = circle();
        let w = Window::intervals(&c, &[Interval::closed(0.0, 0.5)]).unwrap();
        let parts = w.topo_parts().unwrap();
        assert!(parts
            .interior
            .same_set(&Window::intervals(&c, &[Interval::open(0.0, 0.5)]).unwrap())
            .unwrap());
        assert!(parts.closure.same_set(&w).unwrap());
        assert!(parts
            .boundary
            .same_set(&Window::intervals(&c, &[Interval::point(0.0), Interval::point(0.5)]).unwrap())
            .unwrap());
    }

    #[test]
    fn mixed_representations_intersect() {
        let g = InternalGroup::cyclic_product(vec![2, 3]).unwrap();
        let cyl = Window::cylinder(&g, &[vec![0], vec![0]]).unwrap();
        let fin = Window::finite(&g, &[g.residues(&[1, 1]).unwrap(), g.residues(&[0, 1]).unwrap()]).unwrap();
        let both = cyl.intersection(&fin).unwrap();
        assert_eq!(both.measure().unwrap().to_string(), "1/6");
        assert!(cyl.intersection(&Window::empty(&circle()).unwrap()).is_err());
    }
}
