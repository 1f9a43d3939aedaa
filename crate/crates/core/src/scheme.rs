//! Cut-and-project schemes (G, H, L) with G = Z or G = R.
//!
//! For G = Z the lattice is `{(n, n·s) : n ∈ Z}` for a generator `s` of a
//! compact internal group (cyclic product or circle). Its fundamental domain
//! is `{0} × H`, so the point density is exactly 1. For G = R the internal
//! group is R and the lattice is spanned by two basis rows `(g, h)`.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{circle_offset, GroupElement, GroupKind, InternalGroup};
use crate::measure::Measure;

/// Default cap on the number of lattice points materialized at once.
pub const DEFAULT_POINT_BUDGET: usize = 20_000_000;

/// Denominator bound used when rejecting (near-)rational slopes.
const RATIONALITY_PROBE: i64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Physical {
    Integers,
    Reals,
}

/// A coordinate in the physical group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum GCoord {
    Int(i64),
    Real(f64),
}

impl GCoord {
    pub fn as_f64(self) -> f64 {
        match self {
            GCoord::Int(n) => n as f64,
            GCoord::Real(x) => x,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            GCoord::Int(n) => Some(n),
            GCoord::Real(_) => None,
        }
    }

    pub fn shifted(self, by: GCoord) -> GCoord {
        match (self, by) {
            (GCoord::Int(a), GCoord::Int(b)) => GCoord::Int(a + b),
            (a, b) => GCoord::Real(a.as_f64() + b.as_f64()),
        }
    }

    pub fn neg(self) -> GCoord {
        match self {
            GCoord::Int(a) => GCoord::Int(-a),
            GCoord::Real(x) => GCoord::Real(-x),
        }
    }
}

impl PartialOrd for GCoord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (GCoord::Int(a), GCoord::Int(b)) => a.partial_cmp(b),
            _ => self.as_f64().partial_cmp(&other.as_f64()),
        }
    }
}

impl fmt::Display for GCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GCoord::Int(n) => write!(f, "{n}"),
            GCoord::Real(x) => write!(f, "{x}"),
        }
    }
}

/// A half-open interval `[start, end)` of the physical group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Region {
    Int { start: i64, end: i64 },
    Real { start: f64, end: f64 },
}

impl Region {
    pub fn integers(start: i64, end: i64) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidRegion(format!("[{start}, {end}) has start > end")));
        }
        Ok(Region::Int { start, end })
    }

    pub fn reals(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || start > end {
            return Err(Error::InvalidRegion(format!("[{start}, {end}) is not a valid interval")));
        }
        Ok(Region::Real { start, end })
    }

    /// The n-th averaging set: `[0, n)` in Z, `[-n, n)` in R.
    pub fn van_hove(physical: Physical, n: u64) -> Region {
        match physical {
            Physical::Integers => Region::Int { start: 0, end: n as i64 },
            Physical::Reals => Region::Real {
                start: -(n as f64),
                end: n as f64,
            },
        }
    }

    pub fn start(&self) -> GCoord {
        match *self {
            Region::Int { start, .. } => GCoord::Int(start),
            Region::Real { start, .. } => GCoord::Real(start),
        }
    }

    pub fn end(&self) -> GCoord {
        match *self {
            Region::Int { end, .. } => GCoord::Int(end),
            Region::Real { end, .. } => GCoord::Real(end),
        }
    }

    /// Haar measure in G: counting measure on Z, Lebesgue on R.
    pub fn volume(&self) -> f64 {
        match *self {
            Region::Int { start, end } => (end - start) as f64,
            Region::Real { start, end } => end - start,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.volume() <= 0.0
    }

    pub fn contains(&self, g: GCoord) -> bool {
        match (*self, g) {
            (Region::Int { start, end }, GCoord::Int(n)) => start <= n && n < end,
            _ => {
                let x = g.as_f64();
                self.start().as_f64() <= x && x < self.end().as_f64()
            }
        }
    }

    /// True if `other` lies inside `self`.
    pub fn covers(&self, other: &Region) -> bool {
        other.is_empty()
            || (self.start().as_f64() <= other.start().as_f64()
                && other.end().as_f64() <= self.end().as_f64())
    }

    pub fn shifted(&self, by: GCoord) -> Region {
        match (*self, by) {
            (Region::Int { start, end }, GCoord::Int(d)) => Region::Int {
                start: start + d,
                end: end + d,
            },
            _ => Region::Real {
                start: self.start().as_f64() + by.as_f64(),
                end: self.end().as_f64() + by.as_f64(),
            },
        }
    }

    fn matches(&self, physical: Physical) -> bool {
        matches!(
            (self, physical),
            (Region::Int { .. }, Physical::Integers) | (Region::Real { .. }, Physical::Reals)
        )
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start(), self.end())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StarMap {
    /// G = Z: `n ↦ n·generator`.
    Generator(GroupElement),
    /// G = R, H = R: lattice spanned by the rows `(g, h)`.
    Basis([[f64; 2]; 2]),
}

/// A lattice point `ℓ = (ℓ_G, ℓ_H)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticePoint {
    pub g: GCoord,
    pub h: GroupElement,
}

#[derive(Clone, Debug)]
pub struct Scheme {
    physical: Physical,
    internal: InternalGroup,
    star: StarMap,
    density: Measure,
    point_budget: usize,
}

fn near_rational(x: f64, tol: f64) -> Option<i64> {
    (1..=RATIONALITY_PROBE).find(|&q| circle_offset(q as f64 * x).abs() <= tol * q as f64)
}

impl Scheme {
    /// `Z × H` with `H` a cyclic product and star map `n ↦ n·generator`.
    ///
    /// The star image is dense exactly when the generator's order equals the
    /// group order.
    pub fn integers_cyclic(internal: InternalGroup, generator: GroupElement) -> Result<Self> {
        let order = internal.order().ok_or_else(|| Error::NotFinite(internal.name()))?;
        internal.check(&generator)?;
        let gen_order = internal.element_order(&generator)?;
        if gen_order != order {
            return Err(Error::NotDense {
                group: internal.name(),
                reason: format!("generator {generator} has order {gen_order}, group order is {order}"),
            });
        }
        Ok(Scheme {
            physical: Physical::Integers,
            internal,
            star: StarMap::Generator(generator),
            density: Measure::one(),
            point_budget: DEFAULT_POINT_BUDGET,
        })
    }

    /// `Z × (R/Z)` with star map `n ↦ nβ mod 1` (rotation coding).
    ///
    /// Slopes within tolerance of a rational `p/q` with `q ≤ 1000` are
    /// rejected as non-dense.
    pub fn integers_rotation(internal: InternalGroup, rotation: GroupElement) -> Result<Self> {
        if !matches!(internal.kind(), GroupKind::Torus(1)) {
            return Err(Error::Unsupported(format!(
                "rotation schemes need torus(1), got {}",
                internal.name()
            )));
        }
        internal.check(&rotation)?;
        let beta = rotation.real().unwrap_or(0.0);
        if let Some(q) = near_rational(beta, internal.tolerance()) {
            return Err(Error::NotDense {
                group: internal.name(),
                reason: format!("rotation {beta} is rational with denominator {q}"),
            });
        }
        Ok(Scheme {
            physical: Physical::Integers,
            internal,
            star: StarMap::Generator(rotation),
            density: Measure::one(),
            point_budget: DEFAULT_POINT_BUDGET,
        })
    }

    /// `R × R` with the lattice spanned by the rows of `basis`.
    pub fn reals(basis: [[f64; 2]; 2]) -> Result<Self> {
        let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
        if !det.is_finite() || det.abs() < 1e-12 {
            return Err(Error::DegenerateBasis(format!("determinant {det}")));
        }
        let internal = InternalGroup::euclidean(1)?;
        let tol = internal.tolerance();
        // injectivity of π^G and density of π^H both need irrational ratios
        for (axis, name) in [(0usize, "physical"), (1, "internal")] {
            let (a, b) = (basis[0][axis], basis[1][axis]);
            let ratio_rational = if a == 0.0 || b == 0.0 {
                Some(1)
            } else {
                near_rational(a / b, tol)
            };
            if let Some(q) = ratio_rational {
                return Err(if axis == 0 {
                    Error::InvalidScheme(format!(
                        "{name} projection of the lattice is not injective (ratio with denominator {q})"
                    ))
                } else {
                    Error::NotDense {
                        group: internal.name(),
                        reason: format!("{name} components are commensurate (denominator {q})"),
                    }
                });
            }
        }
        Ok(Scheme {
            physical: Physical::Reals,
            internal,
            star: StarMap::Basis(basis),
            density: Measure::Approx(1.0 / det.abs()),
            point_budget: DEFAULT_POINT_BUDGET,
        })
    }

    /// The Fibonacci scheme: basis rows `(1, 1)` and `(φ, -1/φ)`.
    pub fn fibonacci() -> Self {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        Scheme::reals([[1.0, 1.0], [phi, -1.0 / phi]]).expect("golden basis is valid")
    }

    pub fn with_point_budget(mut self, budget: usize) -> Self {
        self.point_budget = budget;
        self
    }

    pub fn physical(&self) -> Physical {
        self.physical
    }

    pub fn internal(&self) -> &InternalGroup {
        &self.internal
    }

    pub fn star_map(&self) -> &StarMap {
        &self.star
    }

    pub fn point_budget(&self) -> usize {
        self.point_budget
    }

    /// Point density `dens(L) = 1 / m_{G×H}(fundamental domain)`.
    pub fn lattice_density(&self) -> Measure {
        self.density.clone()
    }

    pub fn generator(&self) -> Option<&GroupElement> {
        match &self.star {
            StarMap::Generator(g) => Some(g),
            StarMap::Basis(_) => None,
        }
    }

    pub fn basis(&self) -> Option<[[f64; 2]; 2]> {
        match &self.star {
            StarMap::Basis(b) => Some(*b),
            StarMap::Generator(_) => None,
        }
    }

    /// Star image of the integer `n` (G = Z only).
    pub fn star(&self, n: i64) -> Result<GroupElement> {
        match &self.star {
            StarMap::Generator(s) => self.internal.times(s, n),
            StarMap::Basis(_) => Err(Error::Unsupported("star(n) needs G = Z".into())),
        }
    }

    /// The lattice vector `m·b_1 + n·b_2` (G = R only).
    pub fn lattice_vector(&self, m: i64, n: i64) -> Result<LatticePoint> {
        let b = self
            .basis()
            .ok_or_else(|| Error::Unsupported("lattice_vector needs G = R".into()))?;
        let (mf, nf) = (m as f64, n as f64);
        Ok(LatticePoint {
            g: GCoord::Real(mf * b[0][0] + nf * b[1][0]),
            h: GroupElement::Euclidean(vec![mf * b[0][1] + nf * b[1][1]]),
        })
    }

    /// Lattice coefficients `(s, t)` with `(g, h) = s·b_1 + t·b_2` (G = R).
    pub(crate) fn coefficients(&self, g: f64, h: f64) -> Option<(f64, f64)> {
        let b = self.basis()?;
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        Some(((g * b[1][1] - h * b[1][0]) / det, (h * b[0][0] - g * b[0][1]) / det))
    }

    /// Membership test for `L`.
    pub fn is_lattice_point(&self, p: &LatticePoint) -> bool {
        match (&self.star, p.g) {
            (StarMap::Generator(_), GCoord::Int(n)) => self
                .star(n)
                .map(|h| self.internal.approx_eq(&h, &p.h))
                .unwrap_or(false),
            (StarMap::Basis(_), GCoord::Real(g)) => {
                let Some(h) = p.h.real() else { return false };
                let Some((s, t)) = self.coefficients(g, h) else { return false };
                (s - s.round()).abs() < 1e-6 && (t - t.round()).abs() < 1e-6
            }
            _ => false,
        }
    }

    fn check_region(&self, region: &Region) -> Result<()> {
        if !region.matches(self.physical) {
            return Err(Error::InvalidRegion(format!(
                "{region} does not live in the physical group {:?}",
                self.physical
            )));
        }
        Ok(())
    }

    fn check_budget(&self, requested: f64) -> Result<()> {
        if requested > self.point_budget as f64 {
            return Err(Error::BudgetExceeded {
                what: "lattice points".into(),
                requested: requested.ceil() as u128,
                limit: self.point_budget as u128,
            });
        }
        Ok(())
    }

    /// All lattice points with `ℓ_G ∈ region`, sorted by `ℓ_G`.
    ///
    /// For G = R the internal group is unbounded, so use
    /// [`Scheme::lattice_points_in_box`] instead.
    pub fn lattice_points_in(&self, region: &Region) -> Result<Vec<LatticePoint>> {
        self.check_region(region)?;
        match (&self.star, *region) {
            (StarMap::Generator(s), Region::Int { start, end }) => {
                self.check_budget(region.volume())?;
                if start >= end {
                    return Ok(Vec::new());
                }
                let mut out = Vec::with_capacity((end - start) as usize);
                if self.internal.is_finite() {
                    let mut h = self.internal.times(s, start)?;
                    for n in start..end {
                        out.push(LatticePoint { g: GCoord::Int(n), h: h.clone() });
                        h = self.internal.add(&h, s)?;
                    }
                } else {
                    for n in start..end {
                        out.push(LatticePoint {
                            g: GCoord::Int(n),
                            h: self.internal.times(s, n)?,
                        });
                    }
                }
                Ok(out)
            }
            _ => Err(Error::Unsupported(
                "G = R lattices need an internal bound; use lattice_points_in_box".into(),
            )),
        }
    }

    /// Lattice points with `ℓ_G ∈ region` and `ℓ_H ∈ [h_lo, h_hi]` (G = R).
    pub fn lattice_points_in_box(&self, region: &Region, h_lo: f64, h_hi: f64) -> Result<Vec<LatticePoint>> {
        self.check_region(region)?;
        let b = self
            .basis()
            .ok_or_else(|| Error::Unsupported("lattice_points_in_box needs G = R".into()))?;
        if region.is_empty() || h_lo > h_hi {
            return Ok(Vec::new());
        }
        let (g_lo, g_hi) = (region.start().as_f64(), region.end().as_f64());
        let expected = self.density.to_f64() * (g_hi - g_lo + 2.0) * (h_hi - h_lo + 2.0);
        self.check_budget(expected)?;

        // range of the first coefficient over the box corners
        let mut s_min = f64::INFINITY;
        let mut s_max = f64::NEG_INFINITY;
        for g in [g_lo, g_hi] {
            for h in [h_lo, h_hi] {
                let (s, _) = self.coefficients(g, h).expect("basis present");
                s_min = s_min.min(s);
                s_max = s_max.max(s);
            }
        }
        let mut out = Vec::new();
        for m in (s_min.floor() as i64 - 1)..=(s_max.ceil() as i64 + 1) {
            let mf = m as f64;
            // second coefficient from the G constraint (b[1][0] != 0 by validation)
            let t1 = (g_lo - mf * b[0][0]) / b[1][0];
            let t2 = (g_hi - mf * b[0][0]) / b[1][0];
            let (lo, hi) = (t1.min(t2), t1.max(t2));
            for n in (lo.floor() as i64 - 1)..=(hi.ceil() as i64 + 1) {
                let p = self.lattice_vector(m, n)?;
                let h = p.h.real().unwrap_or(f64::NAN);
                if region.contains(p.g) && h_lo <= h && h <= h_hi {
                    out.push(p);
                }
            }
        }
        out.sort_by(|a, b| a.g.partial_cmp(&b.g).unwrap_or(Ordering::Equal));
        Ok(out)
    }

    /// Order of the torus `X̂ = (G × H)/L` when it is finite (G = Z, finite H).
    pub fn torus_order(&self) -> Option<u64> {
        match self.physical {
            Physical::Integers => self.internal.order(),
            Physical::Reals => None,
        }
    }
}
