//! Finite unions of intervals and points on the circle R/Z or the line R.
//!
//! A set is stored as sorted breakpoints with an explicit membership flag
//! at every breakpoint and on every open gap between consecutive
//! breakpoints. Interior, closure, boundary and Haar regularization are
//! then local rewrites of the flags.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{circle_offset, GroupElement, GroupKind, InternalGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Line {
    Circle,
    Real,
}

/// One piece of an interval union. Degenerate `lo == hi` with both ends
/// closed is a single point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn half_open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: false }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn point(x: f64) -> Self {
        Interval::closed(x, x)
    }

    fn contains(&self, x: f64) -> bool {
        (x > self.lo || (self.lo_closed && x == self.lo)) && (x < self.hi || (self.hi_closed && x == self.hi))
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            return write!(f, "{{{}}}", self.lo);
        }
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

#[derive(Clone, Debug)]
pub struct IntervalUnion {
    group: InternalGroup,
    points: Vec<f64>,
    at_point: Vec<bool>,
    // Real: gaps[0] = (-inf, p0), gaps[i] = (p_{i-1}, p_i), gaps[m] = (p_{m-1}, inf).
    // Circle: gaps[i] = (p_i, p_{i+1 mod m}); with no breakpoints gaps[0] is the circle.
    gaps: Vec<bool>,
}

impl IntervalUnion {
    pub fn new(group: &InternalGroup, intervals: &[Interval]) -> Result<Self> {
        let line = line_of(group)?;
        let mut pieces = Vec::new();
        for iv in intervals {
            if !(iv.lo.is_finite() && iv.hi.is_finite()) {
                return Err(Error::InvalidWindow(format!("{iv} has non-finite endpoints")));
            }
            if iv.lo > iv.hi {
                return Err(Error::InvalidWindow(format!("{iv} has lo > hi")));
            }
            if line == Line::Circle && (iv.lo < 0.0 || iv.hi > 1.0) {
                return Err(Error::InvalidWindow(format!("{iv} leaves [0, 1]")));
            }
            if !iv.is_empty() {
                pieces.push(*iv);
            }
        }
        let mut candidates: Vec<f64> = pieces.iter().flat_map(|iv| [iv.lo, iv.hi]).collect();
        if line == Line::Circle {
            for c in candidates.iter_mut() {
                if *c >= 1.0 {
                    *c = 0.0;
                }
            }
        }
        let eval = |x: f64| match line {
            Line::Real => pieces.iter().any(|iv| iv.contains(x)),
            Line::Circle => pieces.iter().any(|iv| iv.contains(x) || iv.contains(x + 1.0)),
        };
        Ok(Self::build(group.clone(), candidates, eval))
    }

    pub fn empty(group: &InternalGroup) -> Result<Self> {
        Self::new(group, &[])
    }

    /// The whole circle; only meaningful for torus(1).
    pub fn full_circle(group: &InternalGroup) -> Result<Self> {
        if line_of(group)? != Line::Circle {
            return Err(Error::InvalidWindow("R has no bounded full window".into()));
        }
        Ok(IntervalUnion {
            group: group.clone(),
            points: Vec::new(),
            at_point: Vec::new(),
            gaps: vec![true],
        })
    }

    fn line(&self) -> Line {
        match self.group.kind() {
            GroupKind::Torus(_) => Line::Circle,
            _ => Line::Real,
        }
    }

    fn tol(&self) -> f64 {
        self.group.tolerance()
    }

    pub fn group(&self) -> &InternalGroup {
        &self.group
    }

    /// Builds the canonical set whose membership is `eval`, assuming `eval`
    /// is constant between consecutive candidate breakpoints.
    fn build(group: InternalGroup, mut candidates: Vec<f64>, eval: impl Fn(f64) -> bool) -> Self {
        let tol = group.tolerance();
        let line = match group.kind() {
            GroupKind::Torus(_) => Line::Circle,
            _ => Line::Real,
        };
        if line == Line::Circle {
            for c in candidates.iter_mut() {
                *c = c.rem_euclid(1.0);
                if *c >= 1.0 - tol {
                    *c = 0.0;
                }
            }
        }
        candidates.sort_by(|a, b| a.total_cmp(b));
        let mut points: Vec<f64> = Vec::with_capacity(candidates.len());
        for c in candidates {
            if points.last().is_none_or(|&l| c - l > tol) {
                points.push(c);
            }
        }
        let m = points.len();
        let at_point: Vec<bool> = points.iter().map(|&p| eval(p)).collect();
        let gaps: Vec<bool> = match line {
            Line::Real => {
                if m == 0 {
                    vec![false]
                } else {
                    let mut g = Vec::with_capacity(m + 1);
                    g.push(eval(points[0] - 1.0));
                    for w in points.windows(2) {
                        g.push(eval(0.5 * (w[0] + w[1])));
                    }
                    g.push(eval(points[m - 1] + 1.0));
                    g
                }
            }
            Line::Circle => {
                if m == 0 {
                    vec![eval(0.5)]
                } else {
                    (0..m)
                        .map(|i| {
                            let a = points[i];
                            let b = if i + 1 < m { points[i + 1] } else { points[0] + 1.0 };
                            eval((0.5 * (a + b)).rem_euclid(1.0))
                        })
                        .collect()
                }
            }
        };
        let mut out = IntervalUnion { group, points, at_point, gaps };
        out.canonicalize();
        out
    }

    fn neighbours(&self, i: usize) -> (bool, bool) {
        let m = self.points.len();
        match self.line() {
            Line::Real => (self.gaps[i], self.gaps[i + 1]),
            Line::Circle => (self.gaps[(i + m - 1) % m], self.gaps[i]),
        }
    }

    /// Drops breakpoints whose flag agrees with both adjacent gaps.
    fn canonicalize(&mut self) {
        let mut i = 0;
        while i < self.points.len() {
            let (l, r) = self.neighbours(i);
            if l == r && r == self.at_point[i] {
                self.points.remove(i);
                self.at_point.remove(i);
                match self.line() {
                    Line::Real => {
                        self.gaps.remove(i + 1);
                    }
                    Line::Circle => {
                        if self.points.is_empty() {
                            self.gaps = vec![r];
                        } else {
                            self.gaps.remove(i);
                        }
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    /// Membership, snapping `x` to a breakpoint within tolerance.
    pub fn contains_value(&self, x: f64) -> bool {
        let x = match self.line() {
            Line::Circle => x.rem_euclid(1.0),
            Line::Real => x,
        };
        let tol = self.tol();
        let m = self.points.len();
        if m == 0 {
            return self.gaps[0];
        }
        let idx = self.points.partition_point(|&p| p < x);
        // nearest breakpoints on either side, with wraparound on the circle
        let dist = |p: f64| match self.line() {
            Line::Circle => circle_offset(p - x).abs(),
            Line::Real => (p - x).abs(),
        };
        for j in [idx, idx.wrapping_sub(1), 0, m - 1] {
            if j < m && dist(self.points[j]) <= tol {
                return self.at_point[j];
            }
        }
        match self.line() {
            Line::Real => self.gaps[idx],
            Line::Circle => {
                if idx == 0 {
                    self.gaps[m - 1]
                } else {
                    self.gaps[idx - 1]
                }
            }
        }
    }

    pub fn contains(&self, h: &GroupElement) -> bool {
        h.real().is_some_and(|x| self.contains_value(x))
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && !self.gaps[0]
    }

    pub fn is_full(&self) -> bool {
        self.points.is_empty() && self.gaps[0]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.points
    }

    /// Lebesgue (normalized Haar on the circle) measure.
    pub fn measure(&self) -> f64 {
        let m = self.points.len();
        if m == 0 {
            return if self.gaps[0] { 1.0 } else { 0.0 };
        }
        match self.line() {
            Line::Real => (1..m)
                .filter(|&i| self.gaps[i])
                .map(|i| self.points[i] - self.points[i - 1])
                .sum(),
            Line::Circle => (0..m)
                .filter(|&i| self.gaps[i])
                .map(|i| {
                    let b = if i + 1 < m { self.points[i + 1] } else { self.points[0] + 1.0 };
                    b - self.points[i]
                })
                .sum(),
        }
    }

    /// Smallest closed interval containing the set (R only).
    pub fn hull(&self) -> Option<(f64, f64)> {
        if self.line() != Line::Real || self.points.is_empty() {
            return None;
        }
        Some((self.points[0], *self.points.last().expect("nonempty")))
    }

    pub fn translate(&self, t: f64) -> Self {
        let mut out = self.clone();
        match self.line() {
            Line::Real => out.points.iter_mut().for_each(|p| *p += t),
            Line::Circle => {
                let m = self.points.len();
                if m == 0 {
                    return out;
                }
                let mut triples: Vec<(f64, bool, bool)> = (0..m)
                    .map(|i| {
                        let mut p = (self.points[i] + t).rem_euclid(1.0);
                        if p >= 1.0 {
                            p = 0.0;
                        }
                        (p, self.at_point[i], self.gaps[i])
                    })
                    .collect();
                triples.sort_by(|a, b| a.0.total_cmp(&b.0));
                out.points = triples.iter().map(|t| t.0).collect();
                out.at_point = triples.iter().map(|t| t.1).collect();
                out.gaps = triples.iter().map(|t| t.2).collect();
            }
        }
        out
    }

    /// Pointwise boolean combination of two sets on the same line.
    pub fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                expected: self.group.name(),
                found: other.group.name(),
            });
        }
        let candidates: Vec<f64> = self.points.iter().chain(&other.points).copied().collect();
        Ok(Self::build(self.group.clone(), candidates, |x| {
            op(self.contains_value(x), other.contains_value(x))
        }))
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a || b)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a != b)
    }

    fn map_flags(&self, f: impl Fn(bool, bool, bool) -> bool, gap: impl Fn(bool) -> bool) -> Self {
        let mut out = self.clone();
        for i in 0..self.points.len() {
            let (l, r) = self.neighbours(i);
            out.at_point[i] = f(l, self.at_point[i], r);
        }
        out.gaps = self.gaps.iter().map(|&g| gap(g)).collect();
        out.canonicalize();
        out
    }

    pub fn interior(&self) -> Self {
        self.map_flags(|l, p, r| l && p && r, |g| g)
    }

    pub fn closure(&self) -> Self {
        self.map_flags(|l, p, r| l || p || r, |g| g)
    }

    pub fn boundary(&self) -> Self {
        self.map_flags(|l, p, r| (l || p || r) && !(l && p && r), |_| false)
    }

    /// Support of Lebesgue measure restricted to the set: a breakpoint
    /// survives iff an adjacent gap has positive measure.
    pub fn regularize(&self) -> Self {
        self.map_flags(|l, _, r| l || r, |g| g)
    }

    /// Set equality up to the breakpoint tolerance.
    pub fn same_set(&self, other: &Self) -> bool {
        if self.group != other.group || self.points.len() != other.points.len() {
            return false;
        }
        let m = self.points.len();
        if m == 0 {
            return self.gaps[0] == other.gaps[0];
        }
        let tol = self.tol();
        match self.line() {
            Line::Real => {
                self.at_point == other.at_point
                    && self.gaps == other.gaps
                    && self.points.iter().zip(&other.points).all(|(a, b)| (a - b).abs() <= tol)
            }
            Line::Circle => {
                // align the sorted lists, allowing one rotation across 0
                let Some(shift) = (0..m).find(|&j| circle_offset(self.points[j] - other.points[0]).abs() <= tol)
                else {
                    return false;
                };
                (0..m).all(|i| {
                    let j = (i + shift) % m;
                    circle_offset(self.points[j] - other.points[i]).abs() <= tol
                        && self.at_point[j] == other.at_point[i]
                        && self.gaps[j] == other.gaps[i]
                })
            }
        }
    }

    /// Breakpoints at which the adjacent gaps differ; they carry all the
    /// measure-theoretic information of the set.
    fn essential_points(&self) -> Vec<f64> {
        (0..self.points.len())
            .filter(|&i| {
                let (l, r) = self.neighbours(i);
                l != r
            })
            .map(|i| self.points[i])
            .collect()
    }

    /// Translations on the circle that fix the set exactly, as `k/q`.
    pub fn circle_periods(&self) -> Result<Option<u64>> {
        self.rotation_group(&self.points, |t| self.translate(t).same_set(self))
    }

    /// Translations on the circle that fix the set up to a null set.
    pub fn circle_haar_periods(&self) -> Result<Option<u64>> {
        let ess = self.essential_points();
        self.rotation_group(&ess, |t| {
            self.translate(t)
                .symmetric_difference(self)
                .map(|d| d.measure() <= self.tol())
                .unwrap_or(false)
        })
    }

    /// `None` means every rotation works (the candidate list was empty).
    fn rotation_group(&self, anchors: &[f64], fixes: impl Fn(f64) -> bool) -> Result<Option<u64>> {
        if self.line() != Line::Circle {
            return Err(Error::Unsupported("rotation periods need the circle".into()));
        }
        if anchors.is_empty() {
            return Ok(None);
        }
        let base = anchors[0];
        let periods: Vec<f64> = anchors
            .iter()
            .map(|&p| (p - base).rem_euclid(1.0))
            .filter(|&t| fixes(t))
            .collect();
        let q = periods.len() as u64;
        let tol = self.tol();
        // a finite subgroup of the circle is {k/q}
        for &t in &periods {
            if circle_offset(t * q as f64).abs() > tol * q as f64 * 4.0 {
                return Err(Error::InvalidWindow(format!(
                    "period {t} is not a multiple of 1/{q}; tolerance too loose"
                )));
            }
        }
        Ok(Some(q.max(1)))
    }

    /// Image under the covering map `x ↦ q·x mod 1` of the circle.
    pub fn circle_multiply(&self, q: u64) -> Result<Self> {
        if self.line() != Line::Circle || q == 0 {
            return Err(Error::Unsupported("multiplication map needs the circle and q ≥ 1".into()));
        }
        let candidates: Vec<f64> = self.points.iter().map(|&p| p * q as f64).collect();
        Ok(Self::build(self.group.clone(), candidates, |y| {
            (0..q).any(|k| self.contains_value((y + k as f64) / q as f64))
        }))
    }

    /// Canonical interval list. On the circle, pieces crossing 0 are split
    /// at 0 so every piece lies in `[0, 1)`.
    pub fn intervals(&self) -> Vec<Interval> {
        let m = self.points.len();
        // atoms: (position, is_point, member)
        let mut atoms: Vec<(f64, bool, bool)> = Vec::new();
        match self.line() {
            Line::Real => {
                for i in 0..m {
                    if i > 0 {
                        atoms.push((self.points[i - 1], false, self.gaps[i]));
                    }
                    atoms.push((self.points[i], true, self.at_point[i]));
                }
            }
            Line::Circle => {
                if m == 0 {
                    return if self.gaps[0] { vec![Interval::half_open(0.0, 1.0)] } else { Vec::new() };
                }
                if self.points[0] > 0.0 {
                    atoms.push((0.0, true, self.gaps[m - 1]));
                    atoms.push((0.0, false, self.gaps[m - 1]));
                }
                for i in 0..m {
                    atoms.push((self.points[i], true, self.at_point[i]));
                    atoms.push((self.points[i], false, self.gaps[i]));
                }
            }
        }
        let end_of = |k: usize| -> f64 {
            // right end of atom k: a gap ends at the next breakpoint
            let (pos, is_point, _) = atoms[k];
            if is_point {
                pos
            } else {
                atoms.get(k + 1).map(|a| a.0).unwrap_or(1.0)
            }
        };
        let mut out = Vec::new();
        let mut k = 0;
        while k < atoms.len() {
            if !atoms[k].2 {
                k += 1;
                continue;
            }
            let start = k;
            while k + 1 < atoms.len() && atoms[k + 1].2 {
                k += 1;
            }
            let (lo, lo_closed) = (atoms[start].0, atoms[start].1);
            let hi = end_of(k);
            let hi_closed = atoms[k].1;
            out.push(Interval { lo, hi, lo_closed, hi_closed });
            k += 1;
        }
        out
    }
}

fn line_of(group: &InternalGroup) -> Result<Line> {
    match group.kind() {
        GroupKind::Torus(1) => Ok(Line::Circle),
        GroupKind::Euclidean(1) => Ok(Line::Real),
        _ => Err(Error::Unsupported(format!(
            "interval windows need torus(1) or euclidean(1), got {}",
            group.name()
        ))),
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.intervals();
        if parts.is_empty() {
            return write!(f, "∅");
        }
        let s: Vec<String> = parts.iter().map(|iv| iv.to_string()).collect();
        write!(f, "{}", s.join(" ∪ "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> InternalGroup {
        InternalGroup::torus(1).unwrap()
    }

    fn line() -> InternalGroup {
        InternalGroup::euclidean(1).unwrap()
    }

    #[test]
    fn translate_wraps_and_splits_at_zero() {
        let w = IntervalUnion::new(&circle(), &[Interval::half_open(0.1, 0.3)]).unwrap();
        let t = w.translate(0.85);
        let iv = t.intervals();
        assert_eq!(iv.len(), 2);
        assert!((iv[0].lo - 0.0).abs() < 1e-12 && (iv[0].hi - 0.15).abs() < 1e-12);
        assert!(iv[0].lo_closed && !iv[0].hi_closed);
        assert!((iv[1].lo - 0.95).abs() < 1e-12 && (iv[1].hi - 1.0).abs() < 1e-12);
        // point-sampling oracle for the wraparound
        for k in 0..1000 {
            let x = k as f64 / 1000.0 + 0.0005;
            let pre = (x - 0.85).rem_euclid(1.0);
            assert_eq!(t.contains_value(x), (0.1..0.3).contains(&pre), "x = {x}");
        }
        assert!((t.measure() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn topology_of_half_open_interval() {
        let w = IntervalUnion::new(&circle(), &[Interval::half_open(0.0, 0.5)]).unwrap();
        assert_eq!(w.interior().intervals(), vec![Interval::open(0.0, 0.5)]);
        assert_eq!(w.closure().intervals(), vec![Interval::closed(0.0, 0.5)]);
        assert_eq!(
            w.boundary().intervals(),
            vec![Interval::point(0.0), Interval::point(0.5)]
        );
    }

    #[test]
    fn regularization_drops_isolated_points() {
        let w = IntervalUnion::new(&line(), &[Interval::closed(0.0, 1.0), Interval::point(2.0)]).unwrap();
        assert_eq!(w.regularize().intervals(), vec![Interval::closed(0.0, 1.0)]);
        let w = IntervalUnion::new(&circle(), &[Interval::closed(0.0, 0.5)]).unwrap();
        assert!(w.regularize().same_set(&w));
    }

    #[test]
    fn interval_touching_one_covers_zero() {
        let w = IntervalUnion::new(&circle(), &[Interval::closed(0.9, 1.0)]).unwrap();
        assert!(w.contains_value(0.0));
        assert!(w.contains_value(0.95));
        assert!(!w.contains_value(0.05));
        // [0.9, 1] ∪ [0, 0.1) is a single arc across 0
        let v = IntervalUnion::new(&circle(), &[Interval::closed(0.9, 1.0), Interval::half_open(0.0, 0.1)]).unwrap();
        assert_eq!(v.breakpoints().len(), 2);
        assert!((v.measure() - 0.2).abs() < 1e-12);
        assert!(v.interior().contains_value(0.0));
    }

    #[test]
    fn circle_periods_are_detected() {
        let w = IntervalUnion::new(
            &circle(),
            &[Interval::half_open(0.0, 0.1), Interval::half_open(0.5, 0.6)],
        )
        .unwrap();
        assert_eq!(w.circle_periods().unwrap(), Some(2));
        let w = IntervalUnion::new(
            &circle(),
            &[Interval::half_open(0.0, 0.1), Interval::half_open(0.5, 0.6), Interval::point(0.3)],
        )
        .unwrap();
        assert_eq!(w.circle_periods().unwrap(), Some(1));
        assert_eq!(w.circle_haar_periods().unwrap(), Some(2));
    }

    #[test]
    fn multiply_map_identifies_periodic_copies() {
        let w = IntervalUnion::new(
            &circle(),
            &[Interval::half_open(0.0, 0.1), Interval::half_open(0.5, 0.6)],
        )
        .unwrap();
        let img = w.circle_multiply(2).unwrap();
        let want = IntervalUnion::new(&circle(), &[Interval::half_open(0.0, 0.2)]).unwrap();
        assert!(img.same_set(&want), "{img}");
    }

    #[test]
    fn rejects_out_of_range_circle_pieces() {
        assert!(IntervalUnion::new(&circle(), &[Interval::closed(0.5, 1.5)]).is_err());
        assert!(IntervalUnion::new(&line(), &[Interval::closed(1.0, 0.5)]).is_err());
    }
}
