//! Weak model set configurations: generation on regions, densities, the
//! observed minimal window, torus-parameter reconstruction, continuity
//! points and Mirsky sampling.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, InternalGroup};
use crate::measure::Measure;
use crate::scheme::{GCoord, Physical, Region, Scheme};
use crate::window::{IntervalUnion, Window};

/// A representative `x = (x_G, x_H)` of a torus point `x + L`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusPoint {
    pub g: GCoord,
    pub h: GroupElement,
}

impl TorusPoint {
    /// `(0, h)`: for G = Z this is already in the fundamental domain `{0} × H`.
    pub fn internal(h: GroupElement) -> Self {
        let g = match h {
            GroupElement::Euclidean(_) => GCoord::Real(0.0),
            _ => GCoord::Int(0),
        };
        TorusPoint { g, h }
    }

    /// The canonical representative of `x + L`.
    ///
    /// G = Z: `(0, x_H − s(x_G))`. G = R: lattice coordinates reduced to
    /// `[0, 1)`.
    pub fn canonical(&self, scheme: &Scheme) -> Result<TorusPoint> {
        let group = scheme.internal();
        group.check(&self.h)?;
        match (scheme.physical(), self.g) {
            (Physical::Integers, GCoord::Int(n)) => Ok(TorusPoint {
                g: GCoord::Int(0),
                h: group.sub(&self.h, &scheme.star(n)?)?,
            }),
            (Physical::Reals, GCoord::Real(g)) => {
                let h = self.h.real().unwrap_or(0.0);
                let (s, t) = scheme.coefficients(g, h).expect("G = R schemes carry a basis");
                let (m, n) = (s.floor() as i64, t.floor() as i64);
                let shift = scheme.lattice_vector(m, n)?;
                let hs = shift.h.real().unwrap_or(0.0);
                Ok(TorusPoint {
                    g: GCoord::Real(g - shift.g.as_f64()),
                    h: GroupElement::Euclidean(vec![h - hs]),
                })
            }
            _ => Err(Error::InvalidElement(format!(
                "torus point with G-coordinate {} does not fit {:?}",
                self.g,
                scheme.physical()
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    /// Points of G × H.
    Full,
    /// Points of G only.
    Projected,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigPoint {
    pub g: GCoord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<GroupElement>,
}

/// A finite patch of `ν_W(x̂)` (full) or `ν_W^G(x̂)` (projected).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Configuration {
    region: Region,
    flavor: Flavor,
    points: Vec<ConfigPoint>,
}

fn check_window(scheme: &Scheme, w: &Window) -> Result<()> {
    if w.group() != scheme.internal() {
        return Err(Error::GroupMismatch {
            expected: scheme.internal().name(),
            found: w.group().name(),
        });
    }
    Ok(())
}

/// `ν_W(x̂)` restricted to `region`: the points `x + ℓ` with `(x + ℓ)_G` in
/// the region and `(x + ℓ)_H ∈ W`, sorted by G-coordinate.
pub fn generate(scheme: &Scheme, w: &Window, x: &TorusPoint, region: &Region) -> Result<Configuration> {
    check_window(scheme, w)?;
    let group = scheme.internal();
    group.check(&x.h)?;
    let mut points = Vec::new();
    match scheme.physical() {
        Physical::Integers => {
            let x = x.canonical(scheme)?;
            for p in scheme.lattice_points_in(region)? {
                let h = group.add(&x.h, &p.h)?;
                if w.contains(&h) {
                    points.push(ConfigPoint { g: p.g, h: Some(h) });
                }
            }
        }
        Physical::Reals => {
            let Window::Intervals(iu) = w else {
                return Err(Error::Unsupported("G = R needs an interval window".into()));
            };
            let Some((lo, hi)) = iu.hull() else {
                return Ok(Configuration::empty(*region, Flavor::Full));
            };
            let (xg, xh) = (x.g.as_f64(), x.h.real().unwrap_or(0.0));
            let shifted = Region::reals(region.start().as_f64() - xg, region.end().as_f64() - xg)?;
            for p in scheme.lattice_points_in_box(&shifted, lo - xh - 1e-9, hi - xh + 1e-9)? {
                let g = GCoord::Real(p.g.as_f64() + xg);
                let h = group.add(&x.h, &p.h)?;
                if region.contains(g) && w.contains(&h) {
                    points.push(ConfigPoint { g, h: Some(h) });
                }
            }
        }
    }
    Ok(Configuration {
        region: *region,
        flavor: Flavor::Full,
        points,
    })
}

impl Configuration {
    pub fn empty(region: Region, flavor: Flavor) -> Self {
        Configuration {
            region,
            flavor,
            points: Vec::new(),
        }
    }

    /// A projected configuration from a sorted-or-not list of G-coordinates.
    pub fn from_support(region: Region, mut support: Vec<GCoord>) -> Result<Self> {
        if let Some(g) = support.iter().find(|g| !region.contains(**g)) {
            return Err(Error::InvalidRegion(format!("point {g} lies outside {region}")));
        }
        support.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        if support.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidRegion("repeated G-coordinate".into()));
        }
        Ok(Configuration {
            region,
            flavor: Flavor::Projected,
            points: support.into_iter().map(|g| ConfigPoint { g, h: None }).collect(),
        })
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn points(&self) -> &[ConfigPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn support(&self) -> Vec<GCoord> {
        self.points.iter().map(|p| p.g).collect()
    }

    /// `ν_W^G`: drops the internal coordinates.
    pub fn projected(&self) -> Configuration {
        Configuration {
            region: self.region,
            flavor: Flavor::Projected,
            points: self.points.iter().map(|p| ConfigPoint { g: p.g, h: None }).collect(),
        }
    }

    /// Restriction to a sub-region.
    pub fn restrict(&self, region: &Region) -> Configuration {
        Configuration {
            region: *region,
            flavor: self.flavor,
            points: self.points.iter().filter(|p| region.contains(p.g)).cloned().collect(),
        }
    }

    pub fn count_in(&self, region: &Region) -> usize {
        self.points.iter().filter(|p| region.contains(p.g)).count()
    }

    pub fn contains_g(&self, g: GCoord) -> bool {
        self.points
            .binary_search_by(|p| p.g.partial_cmp(&g).expect("finite coordinates"))
            .is_ok()
    }

    /// `σ_h ν`: every point `(g, h')` moves to `(g, h' + h)`.
    pub fn translate_internal(&self, group: &InternalGroup, h: &GroupElement) -> Result<Configuration> {
        group.check(h)?;
        let mut points = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let hp = p.h.as_ref().ok_or(Error::ProjectedFlavor)?;
            points.push(ConfigPoint {
                g: p.g,
                h: Some(group.add(hp, h)?),
            });
        }
        Ok(Configuration {
            region: self.region,
            flavor: self.flavor,
            points,
        })
    }

    /// Number of points in `region` divided by its volume.
    pub fn density_over(&self, region: &Region) -> Result<Measure> {
        if !self.region.covers(region) {
            return Err(Error::InsufficientPatch(format!("{region} is not inside {}", self.region)));
        }
        if region.is_empty() {
            return Err(Error::InvalidRegion("density over an empty region".into()));
        }
        let count = self.count_in(region);
        Ok(match *region {
            Region::Int { start, end } => Measure::ratio(count as u128, (end - start) as u128),
            Region::Real { .. } => Measure::Approx(count as f64 / region.volume()),
        })
    }

    /// The observed internal support `{h : (g, h) ∈ ν}`, deduplicated and
    /// sorted (finite groups by rank, continuous groups by value with
    /// points within tolerance merged).
    pub fn minimal_window(&self, group: &InternalGroup) -> Result<Vec<GroupElement>> {
        let mut hs = Vec::with_capacity(self.points.len());
        for p in &self.points {
            hs.push(p.h.clone().ok_or(Error::ProjectedFlavor)?);
        }
        if group.is_finite() {
            let mut ranked: Vec<(u64, GroupElement)> = hs
                .into_iter()
                .map(|h| Ok((group.rank(&h)?, h)))
                .collect::<Result<_>>()?;
            ranked.sort_by_key(|(r, _)| *r);
            ranked.dedup_by_key(|(r, _)| *r);
            return Ok(ranked.into_iter().map(|(_, h)| h).collect());
        }
        hs.sort_by(|a, b| {
            a.real()
                .unwrap_or(0.0)
                .partial_cmp(&b.real().unwrap_or(0.0))
                .expect("finite coordinates")
        });
        let mut out: Vec<GroupElement> = Vec::new();
        for h in hs {
            if out.last().is_none_or(|last| !group.approx_eq(last, &h)) {
                out.push(h);
            }
        }
        if out.len() > 1 && group.approx_eq(&out[0], &out[out.len() - 1]) {
            out.pop();
        }
        Ok(out)
    }

    /// CSV with column `g`, plus `h0, h1, ...` for full configurations.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let dim = self
            .points
            .iter()
            .find_map(|p| p.h.as_ref())
            .map(|h| h.residues().map(|r| r.len()).or(h.reals().map(|r| r.len())).unwrap_or(0))
            .unwrap_or(0);
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["g".to_string()];
        if self.flavor == Flavor::Full {
            header.extend((0..dim).map(|i| format!("h{i}")));
        }
        wtr.write_record(&header)?;
        for p in &self.points {
            let mut row = vec![p.g.to_string()];
            if self.flavor == Flavor::Full {
                match &p.h {
                    Some(GroupElement::Residues(r)) => row.extend(r.iter().map(|v| v.to_string())),
                    Some(GroupElement::Torus(x)) | Some(GroupElement::Euclidean(x)) => {
                        row.extend(x.iter().map(|v| v.to_string()))
                    }
                    None => {}
                }
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Reads the `g` column of a CSV as a projected configuration on `region`.
    pub fn read_projected_csv<R: Read>(input: R, region: Region) -> Result<Configuration> {
        let mut rdr = csv::Reader::from_reader(input);
        let col = rdr
            .headers()?
            .iter()
            .position(|c| c == "g")
            .ok_or_else(|| Error::Config("CSV has no `g` column".into()))?;
        let mut support = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = rec.get(col).unwrap_or("").trim();
            let g = match region {
                Region::Int { .. } => GCoord::Int(
                    field
                        .parse()
                        .map_err(|_| Error::Config(format!("`{field}` is not an integer")))?,
                ),
                Region::Real { .. } => GCoord::Real(
                    field
                        .parse()
                        .map_err(|_| Error::Config(format!("`{field}` is not a number")))?,
                ),
            };
            support.push(g);
        }
        Configuration::from_support(region, support)
    }
}

/// Densities of `ν_W(x̂)` over the averaging sets `A_n` for each scale.
///
/// Exact rationals for G = Z.
pub fn empirical_density(scheme: &Scheme, w: &Window, x: &TorusPoint, scales: &[u64]) -> Result<Vec<(u64, Measure)>> {
    let Some(&max) = scales.iter().max() else {
        return Ok(Vec::new());
    };
    if scales.contains(&0) {
        return Err(Error::InvalidRegion("scale 0 has an empty averaging set".into()));
    }
    let cfg = generate(scheme, w, x, &Region::van_hove(scheme.physical(), max))?;
    scales
        .iter()
        .map(|&n| Ok((n, cfg.density_over(&Region::van_hove(scheme.physical(), n))?)))
        .collect()
}

/// Empirical density against the upper bound `dens(L)·m_H(closure W)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub scale: u64,
    pub empirical: Measure,
    pub bound: Measure,
    /// `bound − empirical`.
    pub gap: Measure,
    pub maximal: bool,
}

/// Compares the density of `cfg` over `A_n` with `dens(L)·m_H(closure W)`.
///
/// `cfg` may come from any window; the bound always refers to `w`.
pub fn density_report(scheme: &Scheme, w: &Window, cfg: &Configuration, n: u64, tol: f64) -> Result<DensityReport> {
    check_window(scheme, w)?;
    let empirical = cfg.density_over(&Region::van_hove(scheme.physical(), n))?;
    let bound = &scheme.lattice_density() * &w.closure().measure()?;
    let gap = &bound - &empirical;
    let maximal = match gap.as_exact() {
        Some(_) if tol == 0.0 => gap.is_zero(),
        _ => gap.to_f64().abs() <= tol,
    };
    Ok(DensityReport {
        scale: n,
        empirical,
        bound,
        gap,
        maximal,
    })
}

/// Whether `ν_W(x̂)` attains the maximal density at scale `n`.
pub fn is_maximal_density(scheme: &Scheme, w: &Window, x: &TorusPoint, n: u64, tol: f64) -> Result<DensityReport> {
    let cfg = generate(scheme, w, x, &Region::van_hove(scheme.physical(), n))?;
    density_report(scheme, w, &cfg, n, tol)
}

/// Torus parameters compatible with a projected configuration.
#[derive(Clone, Debug)]
pub enum TorusParameters {
    /// Canonical representatives `(0, h)` (finite internal group).
    Finite(Vec<TorusPoint>),
    /// The set of `x_H` in the circle (G = Z, H = torus(1)).
    Circle(IntervalUnion),
}

impl TorusParameters {
    /// Number of parameters; `None` for a circle set of positive measure.
    pub fn count(&self) -> Option<usize> {
        match self {
            TorusParameters::Finite(v) => Some(v.len()),
            TorusParameters::Circle(iu) => {
                if iu.measure() > iu.group().tolerance() {
                    None
                } else {
                    Some(iu.breakpoints().len())
                }
            }
        }
    }
}

/// All `x̂` with `star(g) + x_H ∈ closure(W)` for every support point `g`.
///
/// Finite internal groups are searched exhaustively; on the circle the
/// answer is the exact intersection of translated closures.
pub fn torus_parameters(scheme: &Scheme, w: &Window, gcfg: &Configuration) -> Result<TorusParameters> {
    check_window(scheme, w)?;
    if gcfg.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    if scheme.physical() != Physical::Integers {
        return Err(Error::Unsupported("torus parameters need G = Z".into()));
    }
    let group = scheme.internal();
    let mut stars = Vec::with_capacity(gcfg.len());
    for g in gcfg.support() {
        let n = g
            .as_int()
            .ok_or_else(|| Error::InvalidRegion(format!("{g} is not an integer")))?;
        stars.push(scheme.star(n)?);
    }
    if group.is_finite() {
        let closure = w.closure().to_finite()?;
        let members = closure.members();
        let mut candidates: Vec<GroupElement> = group.enumerate()?;
        for s in &stars {
            candidates.retain(|h| {
                let y = group.add(s, h).expect("same group");
                members[group.rank(&y).expect("canonical") as usize]
            });
            if candidates.is_empty() {
                break;
            }
        }
        return Ok(TorusParameters::Finite(candidates.into_iter().map(TorusPoint::internal).collect()));
    }
    let Window::Intervals(iu) = w.closure() else {
        return Err(Error::Unsupported(format!("torus parameters on {}", group.name())));
    };
    let mut acc = IntervalUnion::full_circle(group)?;
    for s in &stars {
        acc = acc.intersection(&iu.translate(-s.real().unwrap_or(0.0)))?;
        if acc.is_empty() {
            break;
        }
    }
    Ok(TorusParameters::Circle(acc))
}

/// Outcome of the continuity-point search.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Continuity {
    /// No lattice translate within the radius meets the boundary.
    Yes,
    /// `x_H + ℓ_H` lies on `∂W` for the lattice point with `ℓ_G = witness`.
    No { witness: GCoord, boundary_point: f64 },
}

/// Searches lattice points with `|ℓ_G| ≤ radius` for `x_H + ℓ_H ∈ ∂W`.
pub fn is_continuity_point(scheme: &Scheme, w: &Window, x: &TorusPoint, radius: u64) -> Result<Continuity> {
    check_window(scheme, w)?;
    let group = scheme.internal();
    if group.is_finite() {
        return Ok(Continuity::Yes);
    }
    let Window::Intervals(iu) = w else {
        return Err(Error::Unsupported(format!("boundary of {w}")));
    };
    let boundary: Vec<f64> = iu.boundary().breakpoints().to_vec();
    let tol = group.tolerance();
    match scheme.physical() {
        Physical::Integers => {
            let x = x.canonical(scheme)?;
            let r = radius as i64;
            // scan by increasing |n| so the witness is the nearest one
            for step in 0..=r {
                for n in if step == 0 { vec![0] } else { vec![step, -step] } {
                    let y = group.add(&x.h, &scheme.star(n)?)?;
                    let yv = y.real().unwrap_or(0.0);
                    if let Some(&b) = boundary
                        .iter()
                        .find(|&&b| group.approx_eq(&y, &GroupElement::Torus(vec![b])) || (yv - b).abs() <= tol)
                    {
                        return Ok(Continuity::No {
                            witness: GCoord::Int(n),
                            boundary_point: b,
                        });
                    }
                }
            }
            Ok(Continuity::Yes)
        }
        Physical::Reals => {
            let (xg, xh) = (x.g.as_f64(), x.h.real().unwrap_or(0.0));
            let r = radius as f64;
            let region = Region::reals(-r, r + f64::EPSILON * r.max(1.0))?;
            let mut best: Option<(f64, f64)> = None;
            for &b in &boundary {
                for p in scheme.lattice_points_in_box(&region, b - xh - tol, b - xh + tol)? {
                    let g = p.g.as_f64();
                    if best.is_none_or(|(bg, _)| g.abs() < bg.abs()) {
                        best = Some((g, b));
                    }
                }
            }
            Ok(match best {
                None => Continuity::Yes,
                Some((g, b)) => Continuity::No {
                    witness: GCoord::Real(g + xg),
                    boundary_point: b,
                },
            })
        }
    }
}

/// The seed used for the `index`-th Mirsky sample.
fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-random torus parameters for a scheme with compact internal group.
pub fn sample_torus_points(scheme: &Scheme, count: usize, seed: u64) -> Result<Vec<TorusPoint>> {
    let group = scheme.internal();
    if group.is_euclidean() {
        return Err(Error::NoHaarMeasure(group.name()));
    }
    (0..count as u64)
        .into_par_iter()
        .map(|i| Ok(TorusPoint::internal(group.sample_haar_with(&mut sample_rng(seed, i))?)))
        .collect()
}

/// `count` configurations at Haar-uniform torus parameters; deterministic
/// per seed regardless of thread count.
pub fn sample_mirsky(scheme: &Scheme, w: &Window, count: usize, region: &Region, seed: u64) -> Result<Vec<Configuration>> {
    check_window(scheme, w)?;
    sample_torus_points(scheme, count, seed)?
        .par_iter()
        .map(|x| generate(scheme, w, x, region))
        .collect()
}

/// Fraction of configurations whose support contains every point of `pattern`.
pub fn pattern_frequency(samples: &[Configuration], pattern: &[GCoord]) -> (usize, f64) {
    let hits = samples
        .iter()
        .filter(|c| pattern.iter().all(|&g| c.contains_g(g)))
        .count();
    let freq = if samples.is_empty() {
        0.0
    } else {
        hits as f64 / samples.len() as f64
    };
    (hits, freq)
}

/// Haar probability that every point of `pattern` lies in the support:
/// `m_H(∩_g (W − star(g)))` (G = Z).
pub fn pattern_prediction(scheme: &Scheme, w: &Window, pattern: &[GCoord]) -> Result<Measure> {
    check_window(scheme, w)?;
    let group = scheme.internal();
    let mut acc: Option<Window> = None;
    for g in pattern {
        let n = g
            .as_int()
            .ok_or_else(|| Error::Unsupported("pattern predictions need G = Z".into()))?;
        let shifted = w.translate(&group.neg(&scheme.star(n)?)?)?;
        acc = Some(match acc {
            None => shifted,
            Some(a) => a.intersection(&shifted)?,
        });
    }
    match acc {
        None => Ok(Measure::one()),
        Some(a) => a.measure(),
    }
}
