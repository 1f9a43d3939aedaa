//! Quotient schemes `(G, H/H₀, L′)` by compact subgroups of the internal
//! group, quotient windows, and the maximal equicontinuous factor
//! descriptor `X̂ / π^X̂(H_{int W})`.
//!
//! For G = Z with a finite internal group, the star image is dense and so
//! `H` is cyclic, generated by `s = star(1)`. Writing `h = a·s`, the map
//! `h ↦ a mod M` with `M = |H|/|H₀|` is a surjection onto `Z/M` with kernel
//! exactly `H₀`, and the quotient lattice is `{(n, n mod M)}`. For the
//! circle, the kernel `{k/q}` is factored out by `x ↦ qx`.

use serde::Serialize;

use crate::configuration::{generate, TorusPoint};
use crate::error::{Error, Result};
use crate::group::{GroupElement, InternalGroup};
use crate::scheme::{GCoord, Physical, Region, Scheme};
use crate::window::{FiniteSet, Subgroup, Window, EXPLICIT_ORDER_LIMIT};

/// The projection `φ : H → H/H₀`.
#[derive(Clone, Debug)]
pub enum Projection {
    Identity,
    /// `φ(h) = dlog(h) mod modulus`, with `dlog` tabulated by rank.
    DiscreteLog { dlog: Vec<u64>, modulus: u64 },
    /// `x ↦ q·x mod 1` on the circle.
    Multiply(u64),
    /// Onto the trivial group.
    Zero,
}

#[derive(Clone, Debug)]
pub struct QuotientScheme {
    pub base: Scheme,
    pub kernel: Subgroup,
    pub quotient: Scheme,
    pub phi: Projection,
}

fn trivial_scheme() -> Result<Scheme> {
    let g = InternalGroup::cyclic_product(Vec::new())?;
    let zero = g.zero();
    Scheme::integers_cyclic(g, zero)
}

/// Builds `(G, H/H₀, L′)`.
pub fn quotient_scheme(scheme: &Scheme, kernel: &Subgroup) -> Result<QuotientScheme> {
    let group = scheme.internal();
    if kernel.group() != group {
        return Err(Error::GroupMismatch {
            expected: group.name(),
            found: kernel.group().name(),
        });
    }
    let done = |quotient: Scheme, phi: Projection| {
        Ok(QuotientScheme {
            base: scheme.clone(),
            kernel: kernel.clone(),
            quotient,
            phi,
        })
    };
    if kernel.is_trivial() {
        return done(scheme.clone(), Projection::Identity);
    }
    if scheme.physical() != Physical::Integers {
        return Err(Error::Unsupported("R has no nontrivial compact subgroup to factor out".into()));
    }
    if kernel.is_full() {
        return done(trivial_scheme()?, Projection::Zero);
    }
    if group.is_finite() {
        let n = group.order().expect("finite");
        if n > EXPLICIT_ORDER_LIMIT {
            return Err(Error::BudgetExceeded {
                what: "discrete-log table".into(),
                requested: n as u128,
                limit: EXPLICIT_ORDER_LIMIT as u128,
            });
        }
        let k = kernel.order().expect("finite subgroup");
        let modulus = n / k;
        let s = scheme.generator().expect("G = Z").clone();
        let mut dlog = vec![0u64; n as usize];
        let mut h = group.zero();
        for a in 0..n {
            dlog[group.rank(&h)? as usize] = a;
            h = group.add(&h, &s)?;
        }
        let qg = InternalGroup::cyclic(modulus)?;
        let quotient = Scheme::integers_cyclic(qg.clone(), qg.residues(&[1])?)?;
        return done(quotient, Projection::DiscreteLog { dlog, modulus });
    }
    let q = kernel
        .rotation_order()
        .ok_or_else(|| Error::Unsupported(format!("quotient of {} by {kernel}", group.name())))?;
    let beta = scheme.generator().expect("G = Z").real().unwrap_or(0.0);
    let rotated = group.point(&[beta * q as f64])?;
    let quotient = Scheme::integers_rotation(group.clone(), rotated)?;
    done(quotient, Projection::Multiply(q))
}

impl QuotientScheme {
    /// `φ(h)`.
    pub fn project(&self, h: &GroupElement) -> Result<GroupElement> {
        let group = self.base.internal();
        group.check(h)?;
        let qg = self.quotient.internal();
        match &self.phi {
            Projection::Identity => Ok(h.clone()),
            Projection::DiscreteLog { dlog, modulus } => {
                qg.residues(&[(dlog[group.rank(h)? as usize] % modulus) as i64])
            }
            Projection::Multiply(q) => qg.times(h, *q as i64),
            Projection::Zero => Ok(qg.zero()),
        }
    }

    /// `φ(x)` for a torus point, through its canonical representative.
    pub fn project_point(&self, x: &TorusPoint) -> Result<TorusPoint> {
        let c = x.canonical(&self.base)?;
        Ok(TorusPoint {
            g: c.g,
            h: self.project(&c.h)?,
        })
    }

    /// `W′ = φ(W)`.
    pub fn quotient_window(&self, w: &Window) -> Result<Window> {
        if w.group() != self.base.internal() {
            return Err(Error::GroupMismatch {
                expected: self.base.internal().name(),
                found: w.group().name(),
            });
        }
        let qg = self.quotient.internal();
        match (&self.phi, w) {
            (Projection::Identity, _) => Ok(w.clone()),
            (Projection::Zero, _) => {
                if w.is_empty()? {
                    Window::empty(qg)
                } else {
                    Window::full(qg)
                }
            }
            (Projection::Multiply(q), Window::Intervals(iu)) => Ok(Window::Intervals(iu.circle_multiply(*q)?)),
            (Projection::DiscreteLog { dlog, modulus }, _) => {
                let fin = w.to_finite()?;
                let mut members = vec![false; *modulus as usize];
                for (r, &inside) in fin.members().iter().enumerate() {
                    if inside {
                        members[(dlog[r] % modulus) as usize] = true;
                    }
                }
                Ok(Window::Finite(FiniteSet::from_members(qg, members)?))
            }
            _ => Err(Error::Unsupported(format!("quotient window of {w}"))),
        }
    }
}

/// Result of comparing base and quotient projected configurations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionCheck {
    pub agree: bool,
    pub base_points: usize,
    pub quotient_points: usize,
    /// Smallest G-coordinate in exactly one of the two supports.
    pub first_mismatch: Option<GCoord>,
}

/// Checks `ν_{W′}^G(φ(x) + L′) = ν_W^G(x + L)` on a region.
///
/// Refused unless `H₀ ⊆ H_W`, since otherwise the identity is not expected.
pub fn verify_projection_identity(qs: &QuotientScheme, w: &Window, x: &TorusPoint, region: &Region) -> Result<ProjectionCheck> {
    if !qs.kernel.is_subgroup_of(&w.periods()?) {
        return Err(Error::Refused(format!(
            "kernel {} is not contained in the period group of the window",
            qs.kernel
        )));
    }
    let base = generate(&qs.base, w, x, region)?.support();
    let wq = qs.quotient_window(w)?;
    let quot = generate(&qs.quotient, &wq, &qs.project_point(x)?, region)?.support();
    let first_mismatch = first_difference(&base, &quot);
    Ok(ProjectionCheck {
        agree: first_mismatch.is_none(),
        base_points: base.len(),
        quotient_points: quot.len(),
        first_mismatch,
    })
}

fn first_difference(a: &[GCoord], b: &[GCoord]) -> Option<GCoord> {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            i += 1;
            j += 1;
        } else if a[i] < b[j] {
            return Some(a[i]);
        } else {
            return Some(b[j]);
        }
    }
    a.get(i).or(b.get(j)).copied()
}

/// Descriptor of the maximal equicontinuous factor `X̂ / π^X̂(H_{int W})`.
#[derive(Clone, Debug)]
pub struct MefDescriptor {
    /// Name of the factor group.
    pub group: String,
    /// Order of the factor when finite.
    pub order: Option<u64>,
    /// `H_{int W}`, the kernel used.
    pub kernel: Subgroup,
    /// `H_W`, reported alongside.
    pub window_periods: Subgroup,
    /// Whether `H_{int W} = H_W`.
    pub periods_agree: bool,
    /// The interior is empty, so the factor is a point.
    pub trivial: bool,
}

pub fn mef_descriptor(scheme: &Scheme, w: &Window) -> Result<MefDescriptor> {
    if w.group() != scheme.internal() {
        return Err(Error::GroupMismatch {
            expected: scheme.internal().name(),
            found: w.group().name(),
        });
    }
    let interior = w.interior();
    let kernel = interior.periods()?;
    let window_periods = w.periods()?;
    let periods_agree = kernel == window_periods;
    let trivial = interior.is_empty()?;
    let (group, order) = if trivial {
        ("trivial".to_string(), Some(1))
    } else {
        match scheme.physical() {
            Physical::Reals => ("torus(2)".to_string(), None),
            Physical::Integers => {
                let qs = quotient_scheme(scheme, &kernel)?;
                let qg = qs.quotient.internal();
                (qg.name(), qg.order())
            }
        }
    };
    Ok(MefDescriptor {
        group,
        order,
        kernel,
        window_periods,
        periods_agree,
        trivial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::Interval;

    fn cyclic_scheme(m: u64) -> Scheme {
        let g = InternalGroup::cyclic(m).unwrap();
        Scheme::integers_cyclic(g.clone(), g.residues(&[1]).unwrap()).unwrap()
    }

    fn els(g: &InternalGroup, v: &[i64]) -> Vec<GroupElement> {
        v.iter().map(|&a| g.residues(&[a]).unwrap()).collect()
    }

    #[test]
    fn quotient_of_z4() {
        let s = cyclic_scheme(4);
        let g = s.internal().clone();
        let h0 = Subgroup::from_elements(&g, &els(&g, &[0, 2])).unwrap();
        let qs = quotient_scheme(&s, &h0).unwrap();
        assert_eq!(qs.quotient.internal().order(), Some(2));
        for n in 0..8 {
            assert_eq!(qs.quotient.star(n).unwrap(), qs.quotient.internal().residues(&[n % 2]).unwrap());
            assert_eq!(qs.project(&s.star(n).unwrap()).unwrap(), qs.quotient.star(n).unwrap());
        }
        let w = Window::finite(&g, &els(&g, &[0, 2])).unwrap();
        let wq = qs.quotient_window(&w).unwrap();
        assert_eq!(wq.to_finite().unwrap().elements(), els(qs.quotient.internal(), &[0]));
        assert!(wq.periods().unwrap().is_trivial());
        assert!(qs.quotient_window(&Window::full(&g).unwrap()).unwrap().periods().unwrap().is_full());
    }

    #[test]
    fn trivial_kernel_is_identity() {
        let s = cyclic_scheme(6);
        let qs = quotient_scheme(&s, &Subgroup::trivial(s.internal())).unwrap();
        assert_eq!(qs.quotient.internal(), s.internal());
        let w = Window::finite(s.internal(), &els(s.internal(), &[1, 4])).unwrap();
        let qq = quotient_scheme(&qs.quotient, &Subgroup::trivial(qs.quotient.internal())).unwrap();
        assert!(qq.quotient_window(&qs.quotient_window(&w).unwrap()).unwrap().same_set(&w).unwrap());
    }

    #[test]
    fn coordinate_quotient() {
        let g = InternalGroup::cyclic_product(vec![2, 3]).unwrap();
        let s = Scheme::integers_cyclic(g.clone(), g.residues(&[1, 1]).unwrap()).unwrap();
        let h0 = Subgroup::from_elements(
            &g,
            &[g.residues(&[0, 0]).unwrap(), g.residues(&[0, 1]).unwrap(), g.residues(&[0, 2]).unwrap()],
        )
        .unwrap();
        let qs = quotient_scheme(&s, &h0).unwrap();
        assert_eq!(qs.quotient.internal().name(), "cyclic-product[2]");
        for h in g.enumerate().unwrap() {
            // oracle: the quotient is the projection to the first coordinate
            let first = h.residues().unwrap()[0] as i64;
            assert_eq!(qs.project(&h).unwrap(), qs.quotient.internal().residues(&[first]).unwrap());
        }
        let w = Window::cylinder(&g, &[vec![0], vec![0]]).unwrap();
        let wq = qs.quotient_window(&w).unwrap();
        assert_eq!(wq.measure().unwrap().to_string(), "1/2");
        assert_eq!(w.measure().unwrap().to_string(), "1/3");
        let x = TorusPoint::internal(g.zero());
        assert!(matches!(
            verify_projection_identity(&qs, &w, &x, &Region::integers(0, 10).unwrap()),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn projection_identity_z4() {
        let s = cyclic_scheme(4);
        let g = s.internal().clone();
        let w = Window::finite(&g, &els(&g, &[0, 2])).unwrap();
        let qs = quotient_scheme(&s, &w.periods().unwrap()).unwrap();
        for h in g.enumerate().unwrap() {
            let rep = verify_projection_identity(&qs, &w, &TorusPoint::internal(h), &Region::integers(0, 100).unwrap())
                .unwrap();
            assert!(rep.agree);
            assert_eq!(rep.base_points, 50);
        }
    }

    #[test]
    fn corrupted_star_map_is_caught() {
        let s = cyclic_scheme(6);
        let g = s.internal().clone();
        let w = Window::finite(&g, &els(&g, &[0, 1, 3, 4])).unwrap();
        let mut qs = quotient_scheme(&s, &w.periods().unwrap()).unwrap();
        let qg = qs.quotient.internal().clone();
        qs.quotient = Scheme::integers_cyclic(qg.clone(), qg.residues(&[2]).unwrap()).unwrap();
        let rep = verify_projection_identity(&qs, &w, &TorusPoint::internal(g.zero()), &Region::integers(0, 100).unwrap())
            .unwrap();
        assert!(!rep.agree);
        assert_eq!(rep.first_mismatch, Some(GCoord::Int(1)));
    }

    #[test]
    fn circle_quotient() {
        let c = InternalGroup::torus(1).unwrap();
        let beta = 2f64.sqrt() - 1.0;
        let s = Scheme::integers_rotation(c.clone(), c.point(&[beta]).unwrap()).unwrap();
        let w = Window::intervals(&c, &[Interval::half_open(0.0, 0.2), Interval::half_open(0.5, 0.7)]).unwrap();
        let h0 = w.periods().unwrap();
        assert_eq!(h0.rotation_order(), Some(2));
        let qs = quotient_scheme(&s, &h0).unwrap();
        let wq = qs.quotient_window(&w).unwrap();
        assert!((wq.measure().unwrap().to_f64() - 0.4).abs() < 1e-9);
        for x0 in [0.0, 0.13, 0.77] {
            let x = TorusPoint::internal(c.point(&[x0]).unwrap());
            let rep = verify_projection_identity(&qs, &w, &x, &Region::integers(0, 1000).unwrap()).unwrap();
            assert!(rep.agree, "{x0}: {rep:?}");
        }
    }

    #[test]
    fn mef_examples() {
        let s = cyclic_scheme(4);
        let g = s.internal().clone();
        let w = Window::finite(&g, &els(&g, &[0, 2])).unwrap();
        let d = mef_descriptor(&s, &w).unwrap();
        assert_eq!(d.order, Some(2));
        assert!(d.periods_agree && !d.trivial);

        let c = InternalGroup::torus(1).unwrap();
        let beta = (5f64.sqrt() - 1.0) / 2.0;
        let s = Scheme::integers_rotation(c.clone(), c.point(&[beta]).unwrap()).unwrap();
        let w = Window::intervals(&c, &[Interval::half_open(0.0, beta)]).unwrap();
        let d = mef_descriptor(&s, &w).unwrap();
        assert!(d.kernel.is_trivial() && d.periods_agree && !d.trivial);
        assert_eq!(d.group, "torus(1)");

        let dust = Window::intervals(&c, &[Interval::point(0.25), Interval::point(0.5)]).unwrap();
        let d = mef_descriptor(&s, &dust).unwrap();
        assert!(d.trivial);
        assert_eq!(d.order, Some(1));
        assert!(!d.periods_agree);
    }
}
