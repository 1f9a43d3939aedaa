//! TOML experiment files: scheme, window and command parameters.
//!
//! ```toml
//! schema_version = 1
//!
//! [scheme]
//! physical = "integers"
//! internal = { kind = "cyclic-product", moduli = [4] }
//! generator = [1]
//!
//! [window]
//! kind = "finite"
//! elements = [[0], [2]]
//!
//! [params]
//! region = [0, 100]
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::bfree::{build_bfree, BfreeSystem};
use crate::configuration::TorusPoint;
use crate::error::{Error, Result};
use crate::group::{GroupElement, InternalGroup};
use crate::scheme::{GCoord, Physical, Region, Scheme};
use crate::window::{Interval, Subgroup, Window};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: Option<u32>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub scheme: Option<SchemeSpec>,
    pub window: Option<WindowSpec>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupSpec {
    CyclicProduct { moduli: Vec<u64> },
    Torus { dim: usize },
    Euclidean { dim: usize },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BfreeSpec {
    pub set: Vec<u64>,
    pub truncate: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    /// "integers" or "reals".
    pub physical: Option<String>,
    pub internal: Option<GroupSpec>,
    /// Residues of `star(1)` (cyclic products).
    pub generator: Option<Vec<i64>>,
    /// `star(1)` on the circle.
    pub rotation: Option<f64>,
    /// Lattice basis rows `(g, h)` (G = R).
    pub basis: Option<[[f64; 2]; 2]>,
    /// "fibonacci" or "golden-rotation".
    pub preset: Option<String>,
    /// Build scheme and window from a B-free set.
    pub bfree: Option<BfreeSpec>,
    pub point_budget: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "yes")]
    pub lo_closed: bool,
    #[serde(default)]
    pub hi_closed: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WindowSpec {
    Finite { elements: Vec<Vec<i64>> },
    Cylinder { forbidden: Vec<Vec<u64>> },
    Intervals { intervals: Vec<IntervalSpec> },
    Full,
    Empty,
    /// The window of `scheme.bfree`.
    Bfree,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Scales {
    List(Vec<u64>),
    Range { start: u64, stop: u64, step: u64 },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// `[start, end)` in G.
    pub region: Option<[f64; 2]>,
    /// Internal coordinates of the torus parameter.
    pub x: Option<Vec<f64>>,
    /// Physical coordinate of the torus parameter.
    pub x_g: Option<f64>,
    pub scales: Option<Scales>,
    pub scale: Option<u64>,
    pub max_range: Option<u64>,
    pub tolerance: Option<f64>,
    pub radius: Option<u64>,
    pub count: Option<usize>,
    /// Quotient kernel elements; defaults to the window's period group.
    pub kernel: Option<Vec<Vec<i64>>>,
    /// Rotation order of a circle kernel.
    pub kernel_rotations: Option<u64>,
    /// Projected configuration CSV for reconstruction.
    pub input: Option<String>,
    /// Patterns (lists of G-coordinates) for Mirsky frequencies.
    pub patterns: Option<Vec<Vec<i64>>>,
    pub flavor: Option<String>,
    pub entropy_n: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(v) = cfg.schema_version {
            if v != SCHEMA_VERSION {
                return Err(Error::Config(format!("schema_version {v} is not supported (expected {SCHEMA_VERSION})")));
            }
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn scheme_spec(&self) -> Result<&SchemeSpec> {
        self.scheme.as_ref().ok_or_else(|| Error::Config("missing [scheme] table".into()))
    }

    pub fn bfree(&self) -> Result<Option<BfreeSystem>> {
        match self.scheme.as_ref().and_then(|s| s.bfree.as_ref()) {
            None => Ok(None),
            Some(b) => Ok(Some(build_bfree(&b.set, b.truncate.unwrap_or(b.set.len()))?)),
        }
    }

    pub fn build_scheme(&self) -> Result<Scheme> {
        let spec = self.scheme_spec()?;
        let scheme = if let Some(sys) = self.bfree()? {
            sys.scheme().clone()
        } else if let Some(preset) = &spec.preset {
            match preset.as_str() {
                "fibonacci" => Scheme::fibonacci(),
                "golden-rotation" => {
                    let c = InternalGroup::torus(1)?;
                    let beta = (5f64.sqrt() - 1.0) / 2.0;
                    Scheme::integers_rotation(c.clone(), c.point(&[beta])?)?
                }
                other => return Err(Error::Config(format!("unknown preset `{other}`"))),
            }
        } else {
            let physical = match spec.physical.as_deref() {
                Some("integers") | None => Physical::Integers,
                Some("reals") => Physical::Reals,
                Some(other) => return Err(Error::Config(format!("unknown physical group `{other}`"))),
            };
            match physical {
                Physical::Reals => {
                    let basis = spec
                        .basis
                        .ok_or_else(|| Error::Config("G = R needs `basis`".into()))?;
                    Scheme::reals(basis)?
                }
                Physical::Integers => {
                    let group = self.internal_group()?;
                    if group.is_finite() {
                        let gen = spec
                            .generator
                            .as_ref()
                            .ok_or_else(|| Error::Config("cyclic products need `generator`".into()))?;
                        let s = group.residues(gen)?;
                        Scheme::integers_cyclic(group, s)?
                    } else {
                        let beta = spec
                            .rotation
                            .ok_or_else(|| Error::Config("torus schemes need `rotation`".into()))?;
                        let s = group.point(&[beta])?;
                        Scheme::integers_rotation(group, s)?
                    }
                }
            }
        };
        Ok(match spec.point_budget {
            Some(b) => scheme.with_point_budget(b),
            None => scheme,
        })
    }

    fn internal_group(&self) -> Result<InternalGroup> {
        let spec = self.scheme_spec()?;
        match spec.internal.as_ref() {
            Some(GroupSpec::CyclicProduct { moduli }) => InternalGroup::cyclic_product(moduli.clone()),
            Some(GroupSpec::Torus { dim }) => InternalGroup::torus(*dim),
            Some(GroupSpec::Euclidean { dim }) => InternalGroup::euclidean(*dim),
            None => Err(Error::Config("missing `scheme.internal`".into())),
        }
    }

    pub fn build_window(&self, scheme: &Scheme) -> Result<Window> {
        let group = scheme.internal();
        let spec = self
            .window
            .as_ref()
            .ok_or_else(|| Error::Config("missing [window] table".into()))?;
        match spec {
            WindowSpec::Finite { elements } => {
                let els = elements
                    .iter()
                    .map(|e| group.residues(e))
                    .collect::<Result<Vec<_>>>()?;
                Window::finite(group, &els)
            }
            WindowSpec::Cylinder { forbidden } => Window::cylinder(group, forbidden),
            WindowSpec::Intervals { intervals } => {
                let ivs: Vec<Interval> = intervals
                    .iter()
                    .map(|i| Interval {
                        lo: i.lo,
                        hi: i.hi,
                        lo_closed: i.lo_closed,
                        hi_closed: i.hi_closed,
                    })
                    .collect();
                Window::intervals(group, &ivs)
            }
            WindowSpec::Full => Window::full(group),
            WindowSpec::Empty => Window::empty(group),
            WindowSpec::Bfree => Ok(self
                .bfree()?
                .ok_or_else(|| Error::Config("window kind `bfree` needs `scheme.bfree`".into()))?
                .window()
                .clone()),
        }
    }

    pub fn element(&self, group: &InternalGroup, coords: &[f64]) -> Result<GroupElement> {
        if group.is_finite() {
            let ints: Vec<i64> = coords.iter().map(|&c| c as i64).collect();
            if ints.iter().zip(coords).any(|(&i, &c)| i as f64 != c) {
                return Err(Error::Config(format!("{coords:?} are not integers")));
            }
            group.residues(&ints)
        } else {
            group.point(coords)
        }
    }

    pub fn torus_point(&self, scheme: &Scheme) -> Result<TorusPoint> {
        let group = scheme.internal();
        let h = match &self.params.x {
            Some(x) => self.element(group, x)?,
            None => group.zero(),
        };
        let g = match (scheme.physical(), self.params.x_g) {
            (Physical::Integers, None) => GCoord::Int(0),
            (Physical::Integers, Some(v)) => {
                if v.fract() != 0.0 {
                    return Err(Error::Config(format!("x_g = {v} is not an integer")));
                }
                GCoord::Int(v as i64)
            }
            (Physical::Reals, v) => GCoord::Real(v.unwrap_or(0.0)),
        };
        Ok(TorusPoint { g, h })
    }

    pub fn region(&self, scheme: &Scheme) -> Result<Region> {
        let [a, b] = self
            .params
            .region
            .ok_or_else(|| Error::Config("missing `params.region`".into()))?;
        match scheme.physical() {
            Physical::Integers => {
                if a.fract() != 0.0 || b.fract() != 0.0 {
                    return Err(Error::Config(format!("region [{a}, {b}) needs integer endpoints")));
                }
                Region::integers(a as i64, b as i64)
            }
            Physical::Reals => Region::reals(a, b),
        }
    }

    pub fn scales(&self) -> Result<Vec<u64>> {
        match &self.params.scales {
            Some(Scales::List(v)) => Ok(v.clone()),
            Some(Scales::Range { start, stop, step }) => {
                if *step == 0 {
                    return Err(Error::Config("scale step must be positive".into()));
                }
                Ok((*start..=*stop).step_by(*step as usize).collect())
            }
            None => Err(Error::Config("missing `params.scales`".into())),
        }
    }

    /// The quotient kernel, or `None` to use the window's period group.
    pub fn kernel(&self, scheme: &Scheme) -> Result<Option<Subgroup>> {
        let group = scheme.internal();
        if let Some(q) = self.params.kernel_rotations {
            return Ok(Some(Subgroup::rotations(group, q)?));
        }
        match &self.params.kernel {
            None => Ok(None),
            Some(els) => {
                let els = els
                    .iter()
                    .map(|e| group.residues(e))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Some(Subgroup::from_elements(group, &els)?))
            }
        }
    }
}
