//! Autocorrelation coefficients `η(ℓ) = dens(L)·m_H(W ∩ (W + ℓ_H))` and
//! their empirical counterparts on finite patches.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::scheme::{GCoord, LatticePoint, Physical, Region, Scheme};
use crate::window::Window;

/// Matching tolerance for real G-coordinates in pair counts.
pub const PAIR_TOLERANCE: f64 = 1e-7;

/// `dens(L)·m_H(W ∩ (W + ℓ_H))`; exact for finite internal groups.
pub fn autocorr_exact(scheme: &Scheme, w: &Window, ell: &LatticePoint) -> Result<Measure> {
    if !scheme.is_lattice_point(ell) {
        return Err(Error::NotOnLattice(format!("({}, {})", ell.g, ell.h)));
    }
    Ok(&scheme.lattice_density() * &w.overlap_measure(&ell.h)?)
}

/// `card(supp ∩ (ℓ_G + supp) ∩ A_n) / m_G(A_n)` for a projected patch.
pub fn autocorr_empirical(gcfg: &Configuration, ell_g: GCoord, n: u64) -> Result<Measure> {
    let region = gcfg.region();
    let physical = match region {
        Region::Int { .. } => Physical::Integers,
        Region::Real { .. } => Physical::Reals,
    };
    let a_n = Region::van_hove(physical, n);
    if a_n.is_empty() {
        return Err(Error::InvalidRegion("empty averaging set".into()));
    }
    if !region.covers(&a_n) || !region.covers(&a_n.shifted(ell_g.neg())) {
        return Err(Error::InsufficientPatch(format!(
            "{region} does not cover {a_n} and its shift by {}",
            ell_g.neg()
        )));
    }
    let support = gcfg.support();
    let inside: Vec<GCoord> = support.iter().copied().filter(|g| a_n.contains(*g)).collect();
    let count = match ell_g {
        GCoord::Int(d) => {
            // two-pointer over sorted supports: g ∈ inside with g − d ∈ support
            let (mut i, mut j, mut c) = (0usize, 0usize, 0u64);
            while i < inside.len() && j < support.len() {
                let want = inside[i].as_int().unwrap_or(0) - d;
                let have = support[j].as_int().unwrap_or(0);
                match have.cmp(&want) {
                    std::cmp::Ordering::Less => j += 1,
                    std::cmp::Ordering::Greater => i += 1,
                    std::cmp::Ordering::Equal => {
                        c += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
            c
        }
        GCoord::Real(d) => {
            let (mut i, mut j, mut c) = (0usize, 0usize, 0u64);
            while i < inside.len() && j < support.len() {
                let want = inside[i].as_f64() - d;
                let have = support[j].as_f64();
                if (have - want).abs() <= PAIR_TOLERANCE {
                    c += 1;
                    i += 1;
                    j += 1;
                } else if have < want {
                    j += 1;
                } else {
                    i += 1;
                }
            }
            c
        }
    };
    Ok(match a_n {
        Region::Int { start, end } => Measure::ratio(count as u128, (end - start) as u128),
        Region::Real { .. } => Measure::Approx(count as f64 / a_n.volume()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AutocorrRow {
    pub ell: LatticePoint,
    pub eta_exact: Measure,
    pub eta_empirical: Measure,
    pub abs_error: Measure,
}

#[derive(Clone, Debug, Serialize)]
pub struct AutocorrTable {
    pub density: Measure,
    pub scale: u64,
    pub rows: Vec<AutocorrRow>,
    pub max_abs_error: Measure,
}

/// Exact and empirical `η(ℓ)` for every lattice point with `|ℓ_G| ≤ max_range`.
///
/// For G = R only lattice points with `|ℓ_H|` at most the window diameter
/// are listed; all others have `W ∩ (W + ℓ_H) = ∅`.
pub fn autocorr_spectrum(scheme: &Scheme, w: &Window, gcfg: &Configuration, max_range: u64, n: u64) -> Result<AutocorrTable> {
    let ells: Vec<LatticePoint> = match scheme.physical() {
        Physical::Integers => {
            let r = max_range as i64;
            scheme.lattice_points_in(&Region::integers(-r, r + 1)?)?
        }
        Physical::Reals => {
            let Window::Intervals(iu) = w else {
                return Err(Error::Unsupported("G = R needs an interval window".into()));
            };
            match iu.hull() {
                None => Vec::new(),
                Some((lo, hi)) => {
                    let r = max_range as f64;
                    let d = hi - lo;
                    scheme
                        .lattice_points_in_box(&Region::reals(-r, r)?, -d, d)?
                        .into_iter()
                        .chain(scheme.lattice_points_in_box(&Region::reals(r, r + 1.0)?, -d, d)?)
                        .filter(|p| p.g.as_f64() <= r)
                        .collect()
                }
            }
        }
    };
    let rows: Vec<AutocorrRow> = ells
        .into_par_iter()
        .map(|ell| {
            let eta_exact = autocorr_exact(scheme, w, &ell)?;
            let eta_empirical = autocorr_empirical(gcfg, ell.g, n)?;
            let abs_error = eta_exact.abs_diff(&eta_empirical);
            Ok(AutocorrRow {
                ell,
                eta_exact,
                eta_empirical,
                abs_error,
            })
        })
        .collect::<Result<_>>()?;
    let max_abs_error = rows
        .iter()
        .map(|r| r.abs_error.clone())
        .fold(Measure::zero(), |a, b| if b > a { b } else { a });
    Ok(AutocorrTable {
        density: scheme.lattice_density(),
        scale: n,
        rows,
        max_abs_error,
    })
}

impl AutocorrTable {
    /// CSV with columns `ell_G, eta_exact, eta_empirical, abs_error`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["ell_G", "eta_exact", "eta_empirical", "abs_error"])?;
        for r in &self.rows {
            wtr.write_record([
                r.ell.g.to_string(),
                r.eta_exact.to_string(),
                r.eta_empirical.to_string(),
                r.abs_error.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configuration::{generate, TorusPoint};
    use crate::group::InternalGroup;
    use crate::window::Interval;

    fn bfree(moduli: &[u64]) -> (Scheme, Window) {
        let g = InternalGroup::cyclic_product(moduli.to_vec()).unwrap();
        let ones = vec![1i64; moduli.len()];
        let s = Scheme::integers_cyclic(g.clone(), g.residues(&ones).unwrap()).unwrap();
        let w = Window::cylinder(&g, &vec![vec![0]; moduli.len()]).unwrap();
        (s, w)
    }

    fn ell(s: &Scheme, n: i64) -> LatticePoint {
        LatticePoint {
            g: GCoord::Int(n),
            h: s.star(n).unwrap(),
        }
    }

    #[test]
    fn odd_integer_autocorrelation() {
        let (s, w) = bfree(&[2]);
        assert_eq!(autocorr_exact(&s, &w, &ell(&s, 2)).unwrap().to_string(), "1/2");
        assert!(autocorr_exact(&s, &w, &ell(&s, 1)).unwrap().is_zero());
        let off = LatticePoint {
            g: GCoord::Int(1),
            h: s.internal().zero(),
        };
        assert!(matches!(autocorr_exact(&s, &w, &off), Err(Error::NotOnLattice(_))));
    }

    #[test]
    fn two_three_free() {
        let (s, w) = bfree(&[2, 3]);
        assert_eq!(autocorr_exact(&s, &w, &ell(&s, 6)).unwrap().to_string(), "1/3");
        assert!(autocorr_exact(&s, &w, &ell(&s, 3)).unwrap().is_zero());
        assert_eq!(autocorr_exact(&s, &w, &ell(&s, 0)).unwrap(), w.measure().unwrap());

        let x = TorusPoint::internal(s.internal().zero());
        let cfg = generate(&s, &w, &x, &Region::integers(-60, 6060).unwrap()).unwrap().projected();
        assert_eq!(autocorr_empirical(&cfg, GCoord::Int(6), 6000).unwrap().to_string(), "1/3");
        assert_eq!(
            autocorr_empirical(&cfg, GCoord::Int(0), 6000).unwrap(),
            cfg.density_over(&Region::integers(0, 6000).unwrap()).unwrap()
        );
        let table = autocorr_spectrum(&s, &w, &cfg, 12, 6000).unwrap();
        assert_eq!(table.rows.len(), 25);
        assert!(table.max_abs_error.is_zero());
        for r in &table.rows {
            let mirror = table.rows.iter().find(|q| q.ell.g == r.ell.g.neg()).unwrap();
            assert_eq!(r.eta_exact, mirror.eta_exact);
            assert!(r.eta_exact <= table.rows[12].eta_exact);
        }
        assert!(matches!(
            autocorr_empirical(&cfg, GCoord::Int(100), 6000),
            Err(Error::InsufficientPatch(_))
        ));
    }

    #[test]
    fn squarefree_truncation_spectrum() {
        let (s, w) = bfree(&[4, 9, 25]);
        let x = TorusPoint::internal(s.internal().zero());
        let cfg = generate(&s, &w, &x, &Region::integers(-30, 100_030).unwrap()).unwrap().projected();
        let table = autocorr_spectrum(&s, &w, &cfg, 30, 100_000).unwrap();
        for r in &table.rows {
            let den = r.eta_exact.as_exact().unwrap().denom().clone();
            assert_eq!(900u32 % den.to_string().parse::<u32>().unwrap(), 0);
            // oracle: density of pairs over one full period of the sieve
            let n = r.ell.g.as_int().unwrap();
            let free = |k: i64| [4i64, 9, 25].iter().all(|b| k.rem_euclid(*b) != 0);
            let hits = (0..900).filter(|&k| free(k) && free(k - n)).count();
            assert_eq!(r.eta_exact, Measure::ratio(hits as u128, 900));
        }
        assert!(table.max_abs_error.to_f64() <= 1e-2);
    }

    #[test]
    fn fibonacci_autocorrelation() {
        let s = Scheme::fibonacci();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let g = s.internal().clone();
        let w = Window::intervals(&g, &[Interval::half_open(-1.0 / phi, phi - 1.0)]).unwrap();
        let x = TorusPoint::internal(g.point(&[0.0]).unwrap());
        let cfg = generate(&s, &w, &x, &Region::reals(-9100.0, 9100.0).unwrap()).unwrap().projected();
        assert!(cfg.len() >= 10_000);
        let table = autocorr_spectrum(&s, &w, &cfg, 5, 9000).unwrap();
        assert!(!table.rows.is_empty());
        for r in &table.rows {
            // oracle: interval overlap length
            let width = 1.0 / phi + phi - 1.0;
            let lh = r.ell.h.real().unwrap().abs();
            let want = (width - lh).max(0.0) / 5f64.sqrt();
            assert!((r.eta_exact.to_f64() - want).abs() < 1e-9);
        }
        assert!(table.max_abs_error.to_f64() <= 5e-2);
        let empty = Window::empty(&g).unwrap();
        assert!(autocorr_spectrum(&s, &empty, &cfg, 5, 9000).unwrap().rows.is_empty());
    }

    #[test]
    fn csv_columns() {
        let (s, w) = bfree(&[2]);
        let x = TorusPoint::internal(s.internal().zero());
        let cfg = generate(&s, &w, &x, &Region::integers(-2, 12).unwrap()).unwrap().projected();
        let table = autocorr_spectrum(&s, &w, &cfg, 2, 10).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("ell_G,eta_exact,eta_empirical,abs_error\n-2,1/2,1/2,0\n"));
    }
}
