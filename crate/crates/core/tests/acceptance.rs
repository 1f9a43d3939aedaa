//! Acceptance suite: ten end-to-end checks, one PASS/FAIL line each.
//! Runs without the libtest harness so the lines always print.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use weakmodel::bfree::{build_bfree, hereditary_entropy_estimate, sieve};
use weakmodel::configuration::{
    empirical_density, generate, is_continuity_point, pattern_frequency, pattern_prediction, sample_mirsky,
    torus_parameters, Continuity, TorusParameters, TorusPoint,
};
use weakmodel::diffraction::{autocorr_empirical, autocorr_exact, autocorr_spectrum};
use weakmodel::quotient::{quotient_scheme, verify_projection_identity};
use weakmodel::window::FiniteSet;
use weakmodel::{GCoord, GroupElement, InternalGroup, Interval, LatticePoint, Measure, Region, Scheme, Subgroup, Window};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let primes = primes_up_to(1000);
    let squares: Vec<u64> = primes.iter().map(|p| p * p).collect();
    let n = 1_000_000i64;
    let free = sieve(&squares, 1, n + 1).iter().filter(|&&b| b).count();
    let density = free as f64 / n as f64;
    let euler: f64 = primes.iter().map(|&p| 1.0 - 1.0 / (p * p) as f64).product();
    let elapsed = start.elapsed().as_secs_f64();
    ensure((density - euler).abs() <= 1e-3, || format!("density {density} vs Euler product {euler}"))?;
    ensure(elapsed < 10.0, || format!("took {elapsed:.2} s"))?;
    Ok(format!("density {density:.6}, product {euler:.6}, {elapsed:.2} s"))
}

fn criterion_2() -> Outcome {
    let sys = build_bfree(&[2, 3, 5], 3).map_err(|e| e.to_string())?;
    let s = sys.scheme();
    let w = sys.window();
    let want = Measure::ratio(4, 15);
    ensure(&s.lattice_density() * &w.measure().unwrap() == want, || "dens·m(W) ≠ 4/15".into())?;
    for x in s.internal().enumerate().unwrap() {
        let rows = empirical_density(s, w, &TorusPoint::internal(x.clone()), &[30, 300, 3000]).map_err(|e| e.to_string())?;
        for (n, d) in rows {
            ensure(d.as_exact() == want.as_exact(), || format!("x = {x}, n = {n}: density {d}"))?;
        }
    }
    Ok("4/15 exactly at n = 30, 300, 3000 for all 30 torus parameters".into())
}

/// Cyclic schemes of order ≤ 64 with a random dense generator.
fn random_scheme(rng: &mut ChaCha8Rng) -> Scheme {
    loop {
        let m: u64 = rng.random_range(2..=64);
        let g = InternalGroup::cyclic(m).unwrap();
        let a: i64 = rng.random_range(1..m as i64);
        if let Ok(s) = Scheme::integers_cyclic(g.clone(), g.residues(&[a]).unwrap()) {
            return s;
        }
    }
}

/// A random window saturated by a random subgroup, so periods are common.
fn random_periodic_window(g: &InternalGroup, rng: &mut ChaCha8Rng) -> Window {
    let order = g.order().unwrap();
    let gen = g.unrank(rng.random_range(0..order)).unwrap();
    let h0 = Subgroup::generated_by(g, &[gen]).unwrap();
    let h0_elements = h0.elements().unwrap();
    let mut members = vec![false; order as usize];
    for r in 0..order {
        if rng.random_bool(0.4) {
            let e = g.unrank(r).unwrap();
            for k in &h0_elements {
                members[g.rank(&g.add(&e, k).unwrap()).unwrap() as usize] = true;
            }
        }
    }
    Window::Finite(FiniteSet::from_members(g, members).unwrap())
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let region = Region::integers(0, 1000).unwrap();
    let mut checks = 0;
    for case in 0..50 {
        let s = random_scheme(&mut rng);
        let g = s.internal().clone();
        let w = random_periodic_window(&g, &mut rng);
        let x = g.unrank(rng.random_range(0..g.order().unwrap())).unwrap();
        let base = generate(&s, &w, &TorusPoint::internal(x.clone()), &region).unwrap().projected();
        for h in w.periods().unwrap().elements().unwrap() {
            let moved = TorusPoint::internal(g.add(&x, &h).unwrap());
            let other = generate(&s, &w, &moved, &region).unwrap().projected();
            ensure(other == base, || format!("case {case}: {} with W = {w}, h = {h}", g.name()))?;
            checks += 1;
        }
    }
    Ok(format!("50 cases, {checks} period translations, all identical"))
}

fn criterion_4() -> Outcome {
    let g = InternalGroup::cyclic(4).unwrap();
    let s = Scheme::integers_cyclic(g.clone(), g.residues(&[1]).unwrap()).unwrap();
    let w = Window::finite(&g, &[g.residues(&[0]).unwrap(), g.residues(&[2]).unwrap()]).unwrap();
    let qs = quotient_scheme(&s, &w.periods().unwrap()).map_err(|e| e.to_string())?;
    let region = Region::integers(0, 1000).unwrap();
    for x in g.enumerate().unwrap() {
        let rep = verify_projection_identity(&qs, &w, &TorusPoint::internal(x.clone()), &region).map_err(|e| e.to_string())?;
        ensure(rep.agree, || format!("x = {x}: first mismatch {:?}", rep.first_mismatch))?;
    }
    Ok(format!("quotient {} agrees for all 4 parameters", qs.quotient.internal().name()))
}

fn criterion_5() -> Outcome {
    let sys = build_bfree(&[2, 3], 2).unwrap();
    let (s, w) = (sys.scheme(), sys.window());
    let g = s.internal();
    let region = Region::integers(0, 36).unwrap();
    for x in g.enumerate().unwrap() {
        let cfg = generate(s, w, &TorusPoint::internal(x.clone()), &region).unwrap().projected();
        let TorusParameters::Finite(found) = torus_parameters(s, w, &cfg).map_err(|e| e.to_string())? else {
            return Err("expected a finite parameter set".into());
        };
        ensure(found == vec![TorusPoint::internal(x.clone())], || format!("x = {x}: got {found:?}"))?;
    }
    let z4 = InternalGroup::cyclic(4).unwrap();
    let s4 = Scheme::integers_cyclic(z4.clone(), z4.residues(&[1]).unwrap()).unwrap();
    let w4 = Window::finite(&z4, &[z4.residues(&[0]).unwrap(), z4.residues(&[2]).unwrap()]).unwrap();
    let periods = w4.periods().unwrap();
    for x in z4.enumerate().unwrap() {
        let cfg = generate(&s4, &w4, &TorusPoint::internal(x.clone()), &region).unwrap().projected();
        let TorusParameters::Finite(found) = torus_parameters(&s4, &w4, &cfg).unwrap() else {
            return Err("expected a finite parameter set".into());
        };
        let coset: Vec<GroupElement> = {
            let mut c: Vec<GroupElement> = periods
                .elements()
                .unwrap()
                .iter()
                .map(|p| z4.add(&x, p).unwrap())
                .collect();
            c.sort_by_key(|e| z4.rank(e).unwrap());
            c
        };
        let got: Vec<GroupElement> = found.into_iter().map(|t| t.h).collect();
        ensure(got == coset, || format!("x = {x}: got {got:?}, want {coset:?}"))?;
    }
    Ok("6 singletons for B = {2,3}; 2-element cosets for {0,2} ⊂ Z/4".into())
}

/// Moduli lists (nondecreasing, entries ≥ 2) with product ≤ `limit`.
fn factorizations(limit: u64) -> Vec<Vec<u64>> {
    fn go(prefix: &mut Vec<u64>, product: u64, min: u64, limit: u64, out: &mut Vec<Vec<u64>>) {
        for m in min..=limit / product {
            prefix.push(m);
            out.push(prefix.clone());
            go(prefix, product * m, m, limit, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), 1, 2, limit, &mut out);
    out
}

fn haar_identity(w: &Window) -> bool {
    w.haar_periods().unwrap() == w.regularize().periods().unwrap()
}

fn criterion_6() -> Outcome {
    let groups = factorizations(16);
    let mut exhaustive = 0u64;
    for moduli in &groups {
        let g = InternalGroup::cyclic_product(moduli.clone()).unwrap();
        let n = g.order().unwrap() as usize;
        let bad = (0u64..1 << n).into_par_iter().find_any(|&mask| {
            let members = (0..n).map(|i| mask >> i & 1 == 1).collect();
            !haar_identity(&Window::Finite(FiniteSet::from_members(&g, members).unwrap()))
        });
        ensure(bad.is_none(), || format!("{}: mask {bad:?}", g.name()))?;
        exhaustive += 1 << n;
    }
    let big = factorizations(64);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cases: Vec<(Vec<u64>, u64)> = (0..1000)
        .map(|_| (big[rng.random_range(0..big.len())].clone(), rng.random()))
        .collect();
    let bad = cases.par_iter().find_any(|(moduli, seed)| {
        let g = InternalGroup::cyclic_product(moduli.clone()).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(*seed);
        let w = if r.random_bool(0.5) {
            random_periodic_window(&g, &mut r)
        } else {
            let members = (0..g.order().unwrap()).map(|_| r.random_bool(0.5)).collect();
            Window::Finite(FiniteSet::from_members(&g, members).unwrap())
        };
        !haar_identity(&w)
    });
    ensure(bad.is_none(), || format!("random case {bad:?}"))?;
    Ok(format!("{exhaustive} windows over {} groups of order ≤ 16, 1000 random over order ≤ 64", groups.len()))
}

fn criterion_7() -> Outcome {
    let sys = build_bfree(&[2, 3], 2).unwrap();
    let (s, w) = (sys.scheme(), sys.window());
    let g = s.internal();
    for x in g.enumerate().unwrap() {
        let patch = generate(s, w, &TorusPoint::internal(x.clone()), &Region::integers(-30, 6030).unwrap())
            .unwrap()
            .projected();
        for n in [60u64, 600, 6000] {
            for d in -30i64..=30 {
                let ell = LatticePoint { g: GCoord::Int(d), h: s.star(d).unwrap() };
                let exact = autocorr_exact(s, w, &ell).unwrap();
                let emp = autocorr_empirical(&patch, GCoord::Int(d), n).unwrap();
                ensure(emp.as_exact() == exact.as_exact(), || format!("x = {x}, n = {n}, ℓ = {d}: {emp} vs {exact}"))?;
            }
        }
    }
    let fib = Scheme::fibonacci();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let line = fib.internal().clone();
    let fw = Window::intervals(&line, &[Interval::half_open(-1.0 / phi, phi - 1.0)]).unwrap();
    let x = TorusPoint::internal(line.point(&[0.0]).unwrap());
    let n = 9050u64;
    let patch = generate(&fib, &fw, &x, &Region::reals(-(n as f64) - 12.0, n as f64 + 12.0).unwrap())
        .unwrap()
        .projected();
    let inside = patch.count_in(&Region::reals(-(n as f64), n as f64).unwrap());
    ensure(inside >= 10_000, || format!("only {inside} points in the averaging set"))?;
    let table = autocorr_spectrum(&fib, &fw, &patch, 10, n).unwrap();
    let dev = table.max_abs_error.to_f64();
    ensure(dev <= 5e-2, || format!("Fibonacci max deviation {dev}"))?;
    Ok(format!(
        "B = {{2,3}} exact for |ℓ_G| ≤ 30; Fibonacci {inside} points, {} vectors, max deviation {dev:.2e}",
        table.rows.len()
    ))
}

fn criterion_8() -> Outcome {
    let sys = build_bfree(&[2, 3], 2).unwrap();
    let (s, w) = (sys.scheme(), sys.window());
    let count = 10_000;
    let samples = sample_mirsky(s, w, count, &Region::integers(0, 3).unwrap(), 8).unwrap();
    let mut lines = Vec::new();
    for pattern in [vec![0i64], vec![0, 2], vec![0, 1]] {
        let pts: Vec<GCoord> = pattern.iter().map(|&g| GCoord::Int(g)).collect();
        let (_, freq) = pattern_frequency(&samples, &pts);
        let q = pattern_prediction(s, w, &pts).unwrap().to_f64();
        let sigma = (q * (1.0 - q) / count as f64).sqrt();
        ensure((freq - q).abs() <= 3.0 * sigma, || format!("pattern {pattern:?}: {freq} vs {q} (σ = {sigma})"))?;
        lines.push(format!("{pattern:?}: {freq:.4} vs {q:.4}"));
    }
    ensure(
        pattern_prediction(s, w, &[GCoord::Int(0)]).unwrap() == Measure::ratio(1, 3),
        || "single-point prediction is not 1/3".into(),
    )?;
    Ok(lines.join(", "))
}

/// Words of length `n` below some window of the {2,3}-free sequence, by
/// brute force over all 2^n words.
fn enumerated_words(n: usize) -> u64 {
    let free = |k: usize| !k.is_multiple_of(2) && !k.is_multiple_of(3);
    let patterns: Vec<u64> = (0..6)
        .map(|phase| (0..n).filter(|&i| free(phase + i)).fold(0u64, |m, i| m | 1 << i))
        .collect();
    (0u64..1 << n).filter(|w| patterns.iter().any(|p| w & !p == 0)).count() as u64
}

fn criterion_9() -> Outcome {
    let sys = build_bfree(&[2, 3], 2).unwrap();
    for n in 1..=12 {
        let est = hereditary_entropy_estimate(&sys, n).unwrap();
        let brute = enumerated_words(n);
        ensure(est.exact && est.word_count == brute as u128, || {
            format!("n = {n}: {} vs enumeration {brute}", est.word_count)
        })?;
    }
    let est = hereditary_entropy_estimate(&sys, 30).unwrap();
    ensure(est.exact, || "n = 30 count is not exact".into())?;
    ensure((est.rate - 1.0 / 3.0).abs() <= 0.1, || format!("rate {}", est.rate))?;
    Ok(format!("n = 30: {} words, rate {:.4}; n ≤ 12 match enumeration", est.word_count, est.rate))
}

fn criterion_10() -> Outcome {
    let mut finite_points = 0;
    for set in [vec![2u64, 3], vec![4, 9], vec![2, 3, 5]] {
        let sys = build_bfree(&set, set.len()).unwrap();
        for x in sys.scheme().internal().enumerate().unwrap() {
            let c = is_continuity_point(sys.scheme(), sys.window(), &TorusPoint::internal(x), 1000).unwrap();
            ensure(c == Continuity::Yes, || format!("B = {set:?}: {c:?}"))?;
            finite_points += 1;
        }
    }
    let c = InternalGroup::torus(1).unwrap();
    let beta = (5f64.sqrt() - 1.0) / 2.0;
    let s = Scheme::integers_rotation(c.clone(), c.point(&[beta]).unwrap()).unwrap();
    let w = Window::intervals(&c, &[Interval::half_open(0.0, beta)]).unwrap();
    let radius = 10_000;
    let mut positives = 0;
    for k in [0i64, 1, -1, 17, -250, 999, 9_999, -10_000] {
        for b in [0.0, beta] {
            // x_H = b − kβ puts the k-th orbit point on the boundary
            let xh = c.sub(&c.point(&[b]).unwrap(), &s.star(k).unwrap()).unwrap();
            let got = is_continuity_point(&s, &w, &TorusPoint::internal(xh), radius).unwrap();
            // the scan returns the smallest |n| on the boundary, which may precede k
            // when two orbit points coincide with the two endpoints
            let Continuity::No { witness: GCoord::Int(n), .. } = got else {
                return Err(format!("boundary orbit k = {k}, b = {b}: {got:?}"));
            };
            let landed = (b - k as f64 * beta + n as f64 * beta).rem_euclid(1.0);
            let dist = [0.0, beta, 1.0].iter().map(|e| (landed - e).abs()).fold(f64::MAX, f64::min);
            ensure(n.abs() <= k.abs() && dist < 1e-6, || format!("k = {k}, b = {b}: witness {n} lands at {landed}"))?;
            positives += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..50 {
        let xh = c.point(&[rng.random::<f64>()]).unwrap();
        let got = is_continuity_point(&s, &w, &TorusPoint::internal(xh.clone()), radius).unwrap();
        ensure(got == Continuity::Yes, || format!("generic x = {xh}: {got:?}"))?;
    }
    Ok(format!("{finite_points} finite parameters all continuous; {positives} boundary-orbit hits, 50 generic misses"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("squarefree density vs Euler product", criterion_1),
        ("exact density 4/15 for B = {2,3,5}", criterion_2),
        ("window-period invariance", criterion_3),
        ("quotient projection identity on Z/4", criterion_4),
        ("torus-parameter reconstruction", criterion_5),
        ("Haar periods equal periods of the regularization", criterion_6),
        ("autocorrelation coefficients", criterion_7),
        ("Mirsky pattern frequencies", criterion_8),
        ("hereditary entropy at n = 30", criterion_9),
        ("continuity points", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2} s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
