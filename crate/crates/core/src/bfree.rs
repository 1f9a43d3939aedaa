//! B-free systems: the integers with no divisor in B, realized as a weak
//! model set over a finite truncation of the internal group, with exact
//! densities, a sieve, structural flags and hereditary word counts.
//!
//! For a truncation `B_k = {b_1, ..., b_k}` with pairwise coprime moduli the
//! internal group is `∏ Z/b_i` with star map `n ↦ (n mod b_i)`. Otherwise
//! the closure of that star image is cyclic of order `lcm(B_k)`, so the
//! internal group is `Z/lcm(B_k)` and the window forbids `h ≡ 0 mod b_i`.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::InternalGroup;
use crate::measure::Measure;
use crate::scheme::Scheme;
use crate::window::{Constraint, Cylinder, Window};

/// Largest period `lcm(B_k)` scanned by the word counter.
pub const PHASE_LIMIT: u64 = 1 << 24;
/// Exact hereditary word counts are attempted up to this length.
pub const EXACT_WORD_LENGTH: usize = 30;
/// Cap on `Σ 2^{ones}` over distinct patterns for exact counting.
pub const SUBSET_BUDGET: u128 = 1 << 28;

#[derive(Clone, Debug)]
pub struct BfreeSystem {
    set: Vec<u64>,
    truncation: usize,
    scheme: Scheme,
    window: Window,
}

/// Checks that no element of `set` divides another.
pub fn check_primitive(set: &[u64]) -> Result<()> {
    for (i, &a) in set.iter().enumerate() {
        if a < 2 {
            return Err(Error::InvalidGroup(format!("B contains {a}; elements must be at least 2")));
        }
        for (j, &b) in set.iter().enumerate() {
            if i != j && b % a == 0 {
                return Err(Error::NonPrimitive { divisor: a, multiple: b });
            }
        }
    }
    Ok(())
}

fn pairwise_coprime(set: &[u64]) -> bool {
    set.iter()
        .enumerate()
        .all(|(i, a)| set[i + 1..].iter().all(|b| a.gcd(b) == 1))
}

fn lcm_of(set: &[u64]) -> Result<u64> {
    let mut l: u64 = 1;
    for &b in set {
        let g = l.gcd(&b);
        l = (l / g).checked_mul(b).ok_or_else(|| Error::BudgetExceeded {
            what: "lcm of the truncated set".into(),
            requested: u128::MAX,
            limit: u64::MAX as u128,
        })?;
    }
    Ok(l)
}

/// The B-free system of the first `k` elements of a primitive set `B`.
pub fn build_bfree(set: &[u64], k: usize) -> Result<BfreeSystem> {
    check_primitive(set)?;
    if k == 0 || k > set.len() {
        return Err(Error::InvalidGroup(format!("truncation {k} outside 1..={}", set.len())));
    }
    let trunc = &set[..k];
    let (group, constraints) = if pairwise_coprime(trunc) {
        let g = InternalGroup::cyclic_product(trunc.to_vec())?;
        let cs = trunc
            .iter()
            .enumerate()
            .map(|(coord, &b)| Constraint {
                coord,
                modulus: b,
                forbidden: [0].into(),
            })
            .collect();
        (g, cs)
    } else {
        let g = InternalGroup::cyclic(lcm_of(trunc)?)?;
        let cs = trunc
            .iter()
            .map(|&b| Constraint {
                coord: 0,
                modulus: b,
                forbidden: [0].into(),
            })
            .collect();
        (g, cs)
    };
    let ones = vec![1i64; group.moduli().map(|m| m.len()).unwrap_or(0)];
    let generator = group.residues(&ones)?;
    let scheme = Scheme::integers_cyclic(group.clone(), generator)?;
    let window = Window::Cylinder(Cylinder::new(&group, constraints)?);
    Ok(BfreeSystem {
        set: set.to_vec(),
        truncation: k,
        scheme,
        window,
    })
}

impl BfreeSystem {
    /// The full set B as given.
    pub fn set(&self) -> &[u64] {
        &self.set
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `B_k`.
    pub fn truncated(&self) -> &[u64] {
        &self.set[..self.truncation]
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// `lcm(B_k)`, the period of the B_k-free set.
    pub fn period(&self) -> Result<u64> {
        lcm_of(self.truncated())
    }
}

/// Density of the B_k-free integers.
///
/// Product `∏(1 − 1/b)` for pairwise coprime sets, otherwise
/// inclusion–exclusion `Σ_S (−1)^{|S|}/lcm(S)` with terms merged by lcm.
pub fn bfree_density_exact(sys: &BfreeSystem) -> Result<Measure> {
    let trunc = sys.truncated();
    if pairwise_coprime(trunc) {
        let mut d = BigRational::one();
        for &b in trunc {
            d *= BigRational::new(BigInt::from(b - 1), BigInt::from(b));
        }
        return Ok(Measure::Exact(d));
    }
    // lcm → signed multiplicity
    let mut terms: BTreeMap<u64, i64> = BTreeMap::new();
    terms.insert(1, 1);
    for &b in trunc {
        let mut next = terms.clone();
        for (&d, &c) in &terms {
            let l = lcm_of(&[d, b])?;
            *next.entry(l).or_insert(0) -= c;
        }
        next.retain(|_, c| *c != 0);
        terms = next;
    }
    let mut sum = BigRational::zero();
    for (d, c) in terms {
        sum += BigRational::new(BigInt::from(c), BigInt::from(d));
    }
    Ok(Measure::Exact(sum))
}

/// B-free indicator on `[start, end)`: entry `i` is true iff no `b ∈ set`
/// divides `start + i`.
pub fn sieve(set: &[u64], start: i64, end: i64) -> Vec<bool> {
    let len = (end - start).max(0) as usize;
    let mut free = vec![true; len];
    for &b in set {
        let b = b as i64;
        let mut n = start + (-start).rem_euclid(b);
        while n < end {
            free[(n - start) as usize] = false;
            n += b;
        }
    }
    free
}

#[derive(Clone, Debug, Serialize)]
pub struct HaarRegularityReport {
    /// The truncated window equals its Haar regularization.
    pub haar_regular: bool,
    /// Largest subset of `B_k` found of the form `c·A` with `A` pairwise
    /// coprime.
    pub scaled_coprime_subset: Vec<u64>,
    /// Common factor `c` of that subset.
    pub scale: u64,
    /// Raised when the subset has at least three elements (any two elements
    /// are trivially a scaled coprime pair).
    pub coprime_flag: bool,
    /// False if the clique search hit its node budget.
    pub exhaustive: bool,
}

const CLIQUE_NODE_BUDGET: u64 = 1_000_000;

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out
}

/// Maximum clique by branch and bound; returns (clique, finished).
fn max_clique(adj: &[Vec<bool>]) -> (Vec<usize>, bool) {
    fn go(adj: &[Vec<bool>], current: &mut Vec<usize>, cand: Vec<usize>, best: &mut Vec<usize>, nodes: &mut u64) -> bool {
        *nodes += 1;
        if *nodes > CLIQUE_NODE_BUDGET {
            return false;
        }
        if cand.is_empty() {
            if current.len() > best.len() {
                *best = current.clone();
            }
            return true;
        }
        if current.len() + cand.len() <= best.len() {
            return true;
        }
        for (i, &v) in cand.iter().enumerate() {
            if current.len() + cand.len() - i <= best.len() {
                break;
            }
            let next: Vec<usize> = cand[i + 1..].iter().copied().filter(|&u| adj[v][u]).collect();
            current.push(v);
            let ok = go(adj, current, next, best, nodes);
            current.pop();
            if !ok {
                return false;
            }
        }
        if current.len() > best.len() {
            *best = current.clone();
        }
        true
    }
    let mut best = Vec::new();
    let mut nodes = 0;
    let done = go(adj, &mut Vec::new(), (0..adj.len()).collect(), &mut best, &mut nodes);
    (best, done)
}

pub fn haar_regularity_report(sys: &BfreeSystem) -> Result<HaarRegularityReport> {
    let w = sys.window();
    let haar_regular = w.regularize().same_set(w)?;
    let trunc = sys.truncated();
    let mut scales: Vec<u64> = trunc.iter().flat_map(|&b| divisors(b)).collect();
    scales.sort_unstable();
    scales.dedup();
    let mut best: (Vec<u64>, u64) = (Vec::new(), 1);
    let mut exhaustive = true;
    for c in scales {
        let members: Vec<u64> = trunc.iter().copied().filter(|b| b % c == 0).collect();
        if members.len() <= best.0.len() {
            continue;
        }
        let q: Vec<u64> = members.iter().map(|b| b / c).collect();
        let adj: Vec<Vec<bool>> = (0..q.len())
            .map(|i| (0..q.len()).map(|j| i != j && q[i].gcd(&q[j]) == 1).collect())
            .collect();
        let (clique, done) = max_clique(&adj);
        exhaustive &= done;
        if clique.len() > best.0.len() {
            let mut set: Vec<u64> = clique.iter().map(|&i| members[i]).collect();
            set.sort_unstable();
            best = (set, c);
        }
    }
    Ok(HaarRegularityReport {
        haar_regular,
        coprime_flag: best.0.len() >= 3,
        scaled_coprime_subset: best.0,
        scale: best.1,
        exhaustive,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyEstimate {
    pub n: usize,
    /// Number of words of length `n` in the hereditary closure (exact), or
    /// the upper bound `Σ 2^{ones}` over distinct patterns.
    pub word_count: u128,
    /// `log2(word_count) / n`.
    pub rate: f64,
    pub exact: bool,
    /// Distinct length-`n` patterns of the B_k-free sequence.
    pub patterns: usize,
}

/// Distinct length-`n` windows of the `lcm(B_k)`-periodic B_k-free
/// sequence, as bit masks (bit `i` = position `i`).
pub fn bfree_patterns(sys: &BfreeSystem, n: usize) -> Result<Vec<u64>> {
    if n == 0 || n > 64 {
        return Err(Error::BudgetExceeded {
            what: "pattern length".into(),
            requested: n as u128,
            limit: 64,
        });
    }
    let period = sys.period()?;
    if period > PHASE_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "phases of the B-free sequence".into(),
            requested: period as u128,
            limit: PHASE_LIMIT as u128,
        });
    }
    let seq = sieve(sys.truncated(), 0, period as i64 + n as i64);
    let mut masks: HashSet<u64> = HashSet::new();
    for phase in 0..period as usize {
        let mut m = 0u64;
        for (i, &bit) in seq[phase..phase + n].iter().enumerate() {
            if bit {
                m |= 1 << i;
            }
        }
        masks.insert(m);
    }
    let mut out: Vec<u64> = masks.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// Words of length `n` in the hereditary closure of the B_k-free subshift.
///
/// Exact (distinct submasks hashed) for `n ≤ 30` within the subset budget;
/// otherwise the labeled upper bound `Σ 2^{ones}`.
pub fn hereditary_entropy_estimate(sys: &BfreeSystem, n: usize) -> Result<EntropyEstimate> {
    let patterns = bfree_patterns(sys, n)?;
    let bound: u128 = patterns.iter().map(|m| 1u128 << m.count_ones()).sum();
    let (word_count, exact) = if n <= EXACT_WORD_LENGTH && bound <= SUBSET_BUDGET {
        let mut words: HashSet<u64> = HashSet::with_capacity(bound.min(1 << 24) as usize);
        for &p in &patterns {
            // all submasks of p, including 0
            let mut s = p;
            loop {
                words.insert(s);
                if s == 0 {
                    break;
                }
                s = (s - 1) & p;
            }
        }
        (words.len() as u128, true)
    } else {
        (bound, false)
    };
    Ok(EntropyEstimate {
        n,
        word_count,
        rate: (word_count as f64).log2() / n as f64,
        exact,
        patterns: patterns.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_measures() {
        let sys = build_bfree(&[2, 3], 2).unwrap();
        assert_eq!(sys.window().measure().unwrap().to_string(), "1/3");
        let sys = build_bfree(&[4, 9, 25, 49], 4).unwrap();
        let want = Measure::Exact(BigRational::new(
            BigInt::from(3 * 8 * 24 * 48),
            BigInt::from(4 * 9 * 25 * 49),
        ));
        assert_eq!(sys.window().measure().unwrap(), want);
        assert_eq!(bfree_density_exact(&sys).unwrap(), want);
    }

    #[test]
    fn primitivity() {
        assert_eq!(
            build_bfree(&[2, 4], 2).unwrap_err(),
            Error::NonPrimitive { divisor: 2, multiple: 4 }
        );
        assert!(build_bfree(&[6, 10, 15], 3).is_ok());
    }

    #[test]
    fn densities() {
        assert_eq!(bfree_density_exact(&build_bfree(&[2, 3], 2).unwrap()).unwrap().to_string(), "1/3");
        assert_eq!(bfree_density_exact(&build_bfree(&[2], 1).unwrap()).unwrap().to_string(), "1/2");
        let sys = build_bfree(&[6, 10, 15], 3).unwrap();
        let d = bfree_density_exact(&sys).unwrap();
        // oracle: sieve over one period
        let free = sieve(&[6, 10, 15], 0, 30).iter().filter(|&&b| b).count();
        assert_eq!(d, Measure::ratio(free as u128, 30));
        assert_eq!(sys.window().measure().unwrap(), d);
    }

    #[test]
    fn sieve_matches_divisibility() {
        let set = [4, 9, 25];
        let got = sieve(&set, -20, 50);
        for (i, &b) in got.iter().enumerate() {
            let n = -20 + i as i64;
            assert_eq!(b, set.iter().all(|&d| n % d as i64 != 0), "{n}");
        }
    }

    #[test]
    fn regularity_flags() {
        let r = haar_regularity_report(&build_bfree(&[4, 9, 25, 49], 4).unwrap()).unwrap();
        assert!(r.haar_regular && r.coprime_flag && r.exhaustive);
        assert_eq!(r.scaled_coprime_subset, [4, 9, 25, 49]);
        let r = haar_regularity_report(&build_bfree(&[6, 10, 15], 3).unwrap()).unwrap();
        assert!(r.haar_regular && !r.coprime_flag);
        assert_eq!(r.scaled_coprime_subset.len(), 2);
        let r = haar_regularity_report(&build_bfree(&[12, 20, 28, 9], 4).unwrap()).unwrap();
        assert!(r.coprime_flag);
        assert_eq!((r.scale, r.scaled_coprime_subset.clone()), (4, vec![12, 20, 28]));
    }

    #[test]
    fn small_word_counts() {
        let sys = build_bfree(&[2], 1).unwrap();
        assert_eq!(hereditary_entropy_estimate(&sys, 4).unwrap().word_count, 7);
        assert_eq!(hereditary_entropy_estimate(&sys, 1).unwrap().word_count, 2);
        let sys = build_bfree(&[2, 3], 2).unwrap();
        let e = hereditary_entropy_estimate(&sys, 30).unwrap();
        assert!(e.exact);
        assert!((e.rate - 1.0 / 3.0).abs() <= 0.1, "{}", e.rate);
        let far = hereditary_entropy_estimate(&sys, 40).unwrap();
        assert!(!far.exact);
        assert!(hereditary_entropy_estimate(&sys, 65).is_err());
    }

    #[test]
    fn adding_constraints_never_helps() {
        let set = [2, 3, 5, 7, 11];
        let mut last_d = 1.0;
        let mut last_rate = f64::INFINITY;
        for k in 1..=set.len() {
            let sys = build_bfree(&set, k).unwrap();
            let d = bfree_density_exact(&sys).unwrap().to_f64();
            assert!(d <= last_d);
            last_d = d;
            let rate = hereditary_entropy_estimate(&sys, 16).unwrap().rate;
            assert!(rate <= last_rate + 1e-12);
            last_rate = rate;
        }
    }
}
