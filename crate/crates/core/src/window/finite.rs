//! Windows in finite cyclic-product groups: explicit element sets and
//! cylinder sets cut out by forbidden residues.

use std::collections::BTreeSet;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::group::{GroupElement, InternalGroup};
use crate::measure::Measure;
use crate::window::subgroup::Subgroup;

/// Largest group order for which explicit membership tables are built.
pub const EXPLICIT_ORDER_LIMIT: u64 = 1 << 26;

/// Largest per-coordinate period scanned when measuring a cylinder.
const CYLINDER_SCAN_LIMIT: u64 = 1 << 26;

fn explicit_order(group: &InternalGroup) -> Result<u64> {
    let order = group.order().ok_or_else(|| Error::NotFinite(group.name()))?;
    if order > EXPLICIT_ORDER_LIMIT {
        return Err(Error::BudgetExceeded {
            what: format!("membership table for {}", group.name()),
            requested: order as u128,
            limit: EXPLICIT_ORDER_LIMIT as u128,
        });
    }
    Ok(order)
}

/// Rank of `x + shift` for every rank `x`, walking the group as an odometer.
fn translation_table(group: &InternalGroup, shift: &[u64]) -> Vec<u64> {
    let moduli = group.moduli().unwrap_or_default();
    let order = group.order().unwrap_or(1) as usize;
    let mut digits = vec![0u64; moduli.len()];
    let mut table = Vec::with_capacity(order);
    for _ in 0..order {
        let shifted = digits
            .iter()
            .zip(shift)
            .zip(moduli)
            .fold(0u64, |acc, ((&d, &s), &b)| acc * b + (d + s) % b);
        table.push(shifted);
        for (d, &b) in digits.iter_mut().zip(moduli).rev() {
            *d += 1;
            if *d < b {
                break;
            }
            *d = 0;
        }
    }
    table
}

/// An explicit subset of a finite group, stored as a membership table
/// indexed by lexicographic rank.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSet {
    group: InternalGroup,
    members: Vec<bool>,
}

impl FiniteSet {
    pub fn new(group: &InternalGroup, elements: &[GroupElement]) -> Result<Self> {
        let order = explicit_order(group)?;
        let mut members = vec![false; order as usize];
        for e in elements {
            members[group.rank(e)? as usize] = true;
        }
        Ok(FiniteSet {
            group: group.clone(),
            members,
        })
    }

    pub fn from_members(group: &InternalGroup, members: Vec<bool>) -> Result<Self> {
        let order = explicit_order(group)?;
        if members.len() as u64 != order {
            return Err(Error::InvalidWindow(format!(
                "membership table has {} entries, group order is {order}",
                members.len()
            )));
        }
        Ok(FiniteSet {
            group: group.clone(),
            members,
        })
    }

    pub fn full(group: &InternalGroup) -> Result<Self> {
        let order = explicit_order(group)?;
        Self::from_members(group, vec![true; order as usize])
    }

    pub fn group(&self) -> &InternalGroup {
        &self.group
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&b| b)
    }

    pub fn contains(&self, h: &GroupElement) -> bool {
        self.group
            .rank(h)
            .map(|r| self.members[r as usize])
            .unwrap_or(false)
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.ranks()
            .map(|r| self.group.unrank(r).expect("rank in range"))
            .collect()
    }

    fn ranks(&self) -> impl Iterator<Item = u64> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(r, _)| r as u64)
    }

    pub fn measure(&self) -> Measure {
        Measure::ratio(self.len() as u128, self.members.len() as u128)
    }

    pub fn translate(&self, h: &GroupElement) -> Result<Self> {
        self.group.check(h)?;
        let shift = h.residues().unwrap_or_default();
        let table = translation_table(&self.group, shift);
        let mut members = vec![false; self.members.len()];
        for (r, &m) in self.members.iter().enumerate() {
            if m {
                members[table[r] as usize] = true;
            }
        }
        Ok(FiniteSet {
            group: self.group.clone(),
            members,
        })
    }

    pub fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                expected: self.group.name(),
                found: other.group.name(),
            });
        }
        Ok(FiniteSet {
            group: self.group.clone(),
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    /// `|W ∩ (W + h)|`, counted without materializing the translate.
    pub fn overlap_count(&self, h: &GroupElement) -> Result<u64> {
        self.group.check(h)?;
        let table = translation_table(&self.group, h.residues().unwrap_or_default());
        Ok(self
            .ranks()
            .filter(|&r| self.members[table[r as usize] as usize])
            .count() as u64)
    }

    /// `{h : h + W = W}` by checking each candidate `w - w_0` pointwise.
    pub fn periods(&self) -> Result<Subgroup> {
        let Some(w0) = self.ranks().next() else {
            return Ok(Subgroup::full(&self.group));
        };
        let base = self.group.unrank(w0)?;
        let mut found: Vec<GroupElement> = Vec::new();
        for r in self.ranks() {
            let w = self.group.unrank(r)?;
            let h = self.group.sub(&w, &base)?;
            let table = translation_table(&self.group, h.residues().unwrap_or_default());
            if self.ranks().all(|x| self.members[table[x as usize] as usize]) {
                found.push(h);
            }
        }
        Subgroup::from_elements(&self.group, &found)
    }

    /// `{h : m((h + W) △ W) = 0}`, testing the symmetric-difference count.
    pub fn haar_periods(&self) -> Result<Subgroup> {
        if self.is_empty() {
            return Ok(Subgroup::full(&self.group));
        }
        let size = self.len() as u64;
        // a Haar period must carry w_0 into W; below 4096 elements test every h
        let base = self.group.unrank(self.ranks().next().unwrap_or(0))?;
        let candidates: Vec<GroupElement> = if self.members.len() <= 4096 {
            (0..self.members.len() as u64)
                .map(|r| self.group.unrank(r))
                .collect::<Result<_>>()?
        } else {
            self.elements()
                .iter()
                .map(|w| self.group.sub(w, &base))
                .collect::<Result<_>>()?
        };
        let mut found = Vec::new();
        for h in candidates {
            // |(W+h) △ W| = 2(|W| - |W ∩ (W+h)|)
            if 2 * (size - self.overlap_count(&h)?) == 0 {
                found.push(h);
            }
        }
        Subgroup::from_elements(&self.group, &found)
    }
}

/// One forbidden-residue constraint: `h[coord] mod modulus ∉ forbidden`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Constraint {
    pub coord: usize,
    pub modulus: u64,
    pub forbidden: BTreeSet<u64>,
}

/// `{h : h[c] mod m ∉ F for every constraint (c, m, F)}`.
///
/// With one constraint `(i, b_i, {0})` per coordinate this is the
/// B-free window in `∏ Z/b_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder {
    group: InternalGroup,
    constraints: Vec<Constraint>,
}

impl Cylinder {
    pub fn new(group: &InternalGroup, constraints: Vec<Constraint>) -> Result<Self> {
        let moduli = group.moduli().ok_or_else(|| Error::NotFinite(group.name()))?;
        for c in &constraints {
            let Some(&b) = moduli.get(c.coord) else {
                return Err(Error::InvalidWindow(format!("coordinate {} out of range", c.coord)));
            };
            if c.modulus == 0 || b % c.modulus != 0 {
                return Err(Error::InvalidWindow(format!(
                    "modulus {} does not divide {b} at coordinate {}",
                    c.modulus, c.coord
                )));
            }
            if let Some(f) = c.forbidden.iter().find(|&&f| f >= c.modulus) {
                return Err(Error::InvalidWindow(format!("residue {f} not reduced mod {}", c.modulus)));
            }
            if c.forbidden.len() as u64 == c.modulus {
                return Err(Error::InvalidWindow(format!(
                    "constraint forbids every residue mod {}",
                    c.modulus
                )));
            }
        }
        let mut out = Cylinder {
            group: group.clone(),
            constraints,
        };
        out.normalize();
        Ok(out)
    }

    /// Forbidden residue sets given per coordinate, each modulo the full
    /// coordinate modulus.
    pub fn per_coordinate(group: &InternalGroup, forbidden: &[Vec<u64>]) -> Result<Self> {
        let moduli = group.moduli().ok_or_else(|| Error::NotFinite(group.name()))?;
        if forbidden.len() != moduli.len() {
            return Err(Error::InvalidWindow(format!(
                "expected {} forbidden sets, got {}",
                moduli.len(),
                forbidden.len()
            )));
        }
        let constraints = forbidden
            .iter()
            .zip(moduli)
            .enumerate()
            .map(|(coord, (f, &b))| Constraint {
                coord,
                modulus: b,
                forbidden: f.iter().copied().collect(),
            })
            .collect();
        Self::new(group, constraints)
    }

    fn normalize(&mut self) {
        let mut merged: Vec<Constraint> = Vec::new();
        let mut sorted = std::mem::take(&mut self.constraints);
        sorted.sort();
        for c in sorted {
            if c.forbidden.is_empty() {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.coord == c.coord && last.modulus == c.modulus => {
                    last.forbidden.extend(c.forbidden);
                }
                _ => merged.push(c),
            }
        }
        self.constraints = merged;
    }

    pub fn group(&self) -> &InternalGroup {
        &self.group
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn contains(&self, h: &GroupElement) -> bool {
        let Some(x) = h.residues() else { return false };
        if self.group.check(h).is_err() {
            return false;
        }
        self.constraints
            .iter()
            .all(|c| !c.forbidden.contains(&(x[c.coord] % c.modulus)))
    }

    /// For each coordinate: (period `L_c` of its constraints, allowed-residue
    /// table mod `L_c`).
    fn coordinate_tables(&self) -> Result<Vec<(u64, Vec<bool>)>> {
        let moduli = self.group.moduli().unwrap_or_default();
        (0..moduli.len())
            .map(|coord| {
                let cs: Vec<&Constraint> = self.constraints.iter().filter(|c| c.coord == coord).collect();
                let period = cs.iter().fold(1u64, |acc, c| acc.lcm(&c.modulus));
                if period > CYLINDER_SCAN_LIMIT {
                    return Err(Error::BudgetExceeded {
                        what: format!("cylinder scan at coordinate {coord}"),
                        requested: period as u128,
                        limit: CYLINDER_SCAN_LIMIT as u128,
                    });
                }
                let allowed = (0..period)
                    .map(|r| cs.iter().all(|c| !c.forbidden.contains(&(r % c.modulus))))
                    .collect();
                Ok((period, allowed))
            })
            .collect()
    }

    /// Exact Haar measure: coordinates are independent under the product
    /// measure, and each factor is an allowed-residue frequency.
    pub fn measure(&self) -> Result<Measure> {
        let mut m = Measure::one();
        for (period, allowed) in self.coordinate_tables()? {
            let count = allowed.iter().filter(|&&a| a).count() as u128;
            m = &m * &Measure::ratio(count, period as u128);
        }
        Ok(m)
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self
            .coordinate_tables()?
            .iter()
            .any(|(_, allowed)| !allowed.iter().any(|&a| a)))
    }

    pub fn translate(&self, h: &GroupElement) -> Result<Self> {
        self.group.check(h)?;
        let x = h.residues().unwrap_or_default();
        let constraints = self
            .constraints
            .iter()
            .map(|c| Constraint {
                coord: c.coord,
                modulus: c.modulus,
                forbidden: c
                    .forbidden
                    .iter()
                    .map(|&f| (f + x[c.coord] % c.modulus) % c.modulus)
                    .collect(),
            })
            .collect();
        let mut out = Cylinder {
            group: self.group.clone(),
            constraints,
        };
        out.normalize();
        Ok(out)
    }

    /// Intersections of cylinders are cylinders: concatenate constraints.
    pub fn intersection(&self, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                expected: self.group.name(),
                found: other.group.name(),
            });
        }
        let mut out = Cylinder {
            group: self.group.clone(),
            constraints: self.constraints.iter().chain(&other.constraints).cloned().collect(),
        };
        out.normalize();
        Ok(out)
    }

    pub fn to_finite(&self) -> Result<FiniteSet> {
        let order = explicit_order(&self.group)?;
        let members = (0..order)
            .map(|r| self.group.unrank(r).map(|e| self.contains(&e)))
            .collect::<Result<Vec<bool>>>()?;
        FiniteSet::from_members(&self.group, members)
    }

    /// Period group, coordinate by coordinate: the set is a product of
    /// per-coordinate residue patterns, so a shift is a period iff each
    /// coordinate shift is a period of its pattern.
    pub fn periods(&self) -> Result<Subgroup> {
        let tables = self.coordinate_tables()?;
        if tables.iter().any(|(_, allowed)| !allowed.iter().any(|&a| a)) {
            return Ok(Subgroup::full(&self.group));
        }
        let steps = tables
            .iter()
            .map(|(period, allowed)| {
                let p = *period;
                // smallest divisor d of p with allowed(r + d) == allowed(r)
                (1..=p)
                    .filter(|d| p % d == 0)
                    .find(|&d| (0..p).all(|r| allowed[r as usize] == allowed[((r + d) % p) as usize]))
                    .unwrap_or(p)
            })
            .collect();
        Subgroup::coordinate_steps(&self.group, steps)
    }
}
