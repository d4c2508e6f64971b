//! Exhaustive search for the root subsets (R1, R1p) that shape the tilde
//! Stokes factors, plus the on-disk cache keyed by n.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::stokes::{RootPair, RootSetData, SteinbergSection, StokesParams};
use crate::structural::StructuralSet;

/// Largest n the search accepts.
pub const MAX_SEARCH_N: usize = 6;

const IDENTITY_TOL: f64 = 1e-9;
const POINT_SEED: u64 = 0x5eed_0001;

/// Which of the defining constraints a candidate violates first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// Characteristic polynomial has the Stokes-parameter pattern.
    CharPoly,
    /// σ₀ maps the section to itself, reversing s.
    SigmaClosure,
    /// θ₀ maps the section to itself, conjugate-reversing s.
    ThetaClosure,
    /// δ-shifted roots agree with Coxeter conjugation along both chains.
    CyclicChain,
}

#[derive(Debug, Clone)]
pub struct Survivor {
    pub r1: Vec<RootPair>,
    pub r1p: Vec<RootPair>,
    /// Number of pairs not attached to their Stokes ray; zero for the
    /// orientation used throughout.
    pub orientation_defect: usize,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub roots: RootSetData,
    pub survivors: Vec<Survivor>,
    pub candidates: usize,
    pub rejected: Vec<(Constraint, usize)>,
}

/// Stokes-ray angle of the base sector (second = false) or of the next one.
fn ray_angle(n: usize, second: bool) -> f64 {
    let dim = (n + 1) as f64;
    let first = if n % 2 == 1 { -PI / dim } else { -PI / (2.0 * dim) };
    if second { first - PI / dim } else { first }
}

/// Pairs (i, j) whose exponent difference (ω^i − ω^j)·e^{−iθ} is a positive real
/// on the ray θ of the sector.
pub fn on_ray(n: usize, pair: RootPair, second: bool) -> bool {
    let dim = (n + 1) as f64;
    let w = |k: usize| C64::from_polar(1.0, 2.0 * PI * k as f64 / dim);
    let z = (w(pair.0) - w(pair.1)) * C64::from_polar(1.0, -ray_angle(n, second));
    z.im.abs() < 1e-9 * z.norm() && z.re > 0.0
}

fn orientation_defect(n: usize, r1: &[RootPair], r1p: &[RootPair]) -> usize {
    r1.iter().filter(|&&p| !on_ray(n, p, false)).count() + r1p.iter().filter(|&&p| !on_ray(n, p, true)).count()
}

fn sample_points(n: usize) -> Vec<StokesParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(POINT_SEED + n as u64);
    (0..2 * (n + 2))
        .map(|_| StokesParams((0..n).map(|_| C64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))).collect()))
        .collect()
}

/// The candidate with index `idx`: one pair per difference class d = 1..n,
/// starting row chosen by the base-(n+1) digits, chain chosen by the bits.
fn candidate(n: usize, idx: u64) -> (Vec<RootPair>, Vec<RootPair>) {
    let dim = (n + 1) as u64;
    let mut rows = idx >> n;
    let mask = idx & ((1 << n) - 1);
    let (mut r1, mut r1p) = (Vec::new(), Vec::new());
    for d in 1..=n {
        let i = (rows % dim) as usize;
        rows /= dim;
        let pair = (i, (i + d) % (n + 1));
        if mask >> (d - 1) & 1 == 1 {
            r1p.push(pair);
        } else {
            r1.push(pair);
        }
    }
    r1.sort_unstable();
    r1p.sort_unstable();
    (r1, r1p)
}

fn first_violation(sec: &SteinbergSection, points: &[StokesParams]) -> Result<Option<Constraint>> {
    for s in points {
        let back = sec.params_of(&sec.build_m(s)?)?;
        if back.max_abs_diff(s) > IDENTITY_TOL {
            return Ok(Some(Constraint::CharPoly));
        }
    }
    for s in points {
        let image = sec.sigma0(&sec.build_m(s)?)?;
        if image.max_abs_diff(&sec.build_m(&s.reversed())?) > IDENTITY_TOL {
            return Ok(Some(Constraint::SigmaClosure));
        }
    }
    for s in points {
        let image = sec.theta0(&sec.build_m(s)?)?;
        if image.max_abs_diff(&sec.build_m(&s.conj_reversed())?) > IDENTITY_TOL {
            return Ok(Some(Constraint::ThetaClosure));
        }
    }
    for s in points {
        if sec.route_residual(s)? > IDENTITY_TOL {
            return Ok(Some(Constraint::CyclicChain));
        }
    }
    Ok(None)
}

#[derive(Default)]
struct Tally {
    survivors: Vec<u64>,
    rejected: BTreeMap<Constraint, usize>,
}

impl Tally {
    fn add(&mut self, idx: u64, verdict: Option<Constraint>) {
        match verdict {
            None => self.survivors.push(idx),
            Some(c) => *self.rejected.entry(c).or_insert(0) += 1,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.survivors.extend(other.survivors);
        for (c, k) in other.rejected {
            *self.rejected.entry(c).or_insert(0) += k;
        }
        self
    }
}

/// Run the full search and keep every survivor.
pub fn search(n: usize, budget: Duration) -> Result<SearchOutcome> {
    if n == 0 || n > MAX_SEARCH_N {
        return Err(Error::InvalidDimension(format!("root search supports 1 ≤ n ≤ {MAX_SEARCH_N}, got {n}")));
    }
    let structs = StructuralSet::new(n)?;
    let points = sample_points(n);
    let total = ((n as u64 + 1).pow(n as u32)) << n;
    let start = Instant::now();
    let timed_out = AtomicBool::new(false);

    let tally = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            if timed_out.load(Ordering::Relaxed) {
                return None;
            }
            if start.elapsed() > budget {
                timed_out.store(true, Ordering::Relaxed);
                return None;
            }
            let (r1, r1p) = candidate(n, idx);
            let sec = SteinbergSection {
                roots: RootSetData { n, r1, r1p, survivor_count: 0 },
                structs: structs.clone(),
            };
            // singular evaluation counts as a characteristic-polynomial failure
            let v = first_violation(&sec, &points).unwrap_or(Some(Constraint::CharPoly));
            Some((idx, v))
        })
        .fold(Tally::default, |mut t, (idx, v)| {
            t.add(idx, v);
            t
        })
        .reduce(Tally::default, Tally::merge);

    if timed_out.load(Ordering::Relaxed) {
        return Err(Error::SearchFailure { n, reason: format!("time budget of {budget:?} exhausted") });
    }

    let mut survivors: Vec<Survivor> = tally
        .survivors
        .iter()
        .map(|&idx| {
            let (r1, r1p) = candidate(n, idx);
            let orientation_defect = orientation_defect(n, &r1, &r1p);
            Survivor { r1, r1p, orientation_defect }
        })
        .collect();
    survivors.sort_by(|a, b| {
        (a.orientation_defect, &a.r1, &a.r1p).cmp(&(b.orientation_defect, &b.r1, &b.r1p))
    });
    let best = survivors
        .first()
        .ok_or_else(|| Error::SearchFailure { n, reason: "no candidate satisfies all constraints".into() })?;
    let roots = RootSetData { n, r1: best.r1.clone(), r1p: best.r1p.clone(), survivor_count: survivors.len() };
    Ok(SearchOutcome { roots, survivors, candidates: total as usize, rejected: tally.rejected.into_iter().collect() })
}

pub fn derive_root_sets(n: usize, budget: Duration) -> Result<RootSetData> {
    Ok(search(n, budget)?.roots)
}

/// `$UCGL_ROOT_CACHE`, or `ucgl-roots` under the system temp directory.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os("UCGL_ROOT_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ucgl-roots"))
}

pub fn cache_file(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("roots_n{n}.json"))
}

pub fn write_root_file(path: &Path, roots: &RootSetData) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    // write-then-rename so concurrent readers never see a partial file
    static SEQ: AtomicUsize = AtomicUsize::new(0);
    let tmp = path.with_extension(format!("tmp{}-{}", std::process::id(), SEQ.fetch_add(1, Ordering::Relaxed)));
    std::fs::write(&tmp, serde_json::to_string_pretty(roots)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_root_file(path: &Path) -> Result<RootSetData> {
    let roots: RootSetData = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    roots.validate()?;
    Ok(roots)
}

/// Read the cached root sets for n, deriving and caching them on a miss or
/// an unreadable file.
pub fn load_or_derive(n: usize, budget: Duration, cache_dir: &Path) -> Result<RootSetData> {
    let path = cache_file(cache_dir, n);
    if let Ok(roots) = read_root_file(&path) {
        if roots.n == n {
            return Ok(roots);
        }
    }
    let roots = derive_root_sets(n, budget)?;
    write_root_file(&path, &roots)?;
    Ok(roots)
}

/// Convenience: section for n with root sets from the cache directory.
pub fn section(n: usize, budget: Duration, cache_dir: &Path) -> Result<SteinbergSection> {
    SteinbergSection::new(load_or_derive(n, budget, cache_dir)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n1_result_and_rejection_of_the_transpose() {
        let out = search(1, Duration::from_secs(30)).unwrap();
        assert_eq!(out.roots.r1, vec![]);
        assert_eq!(out.roots.r1p, vec![(1, 0)]);
        assert_eq!(out.roots.survivor_count, 2);

        let sec = SteinbergSection::new(RootSetData { n: 1, r1: vec![(0, 1)], r1p: vec![], survivor_count: 0 }).unwrap();
        assert_eq!(first_violation(&sec, &sample_points(1)).unwrap(), Some(Constraint::ThetaClosure));
    }

    #[test]
    fn candidates_cover_each_difference_class_once() {
        let n = 3;
        for idx in 0..((4u64.pow(3)) << 3) {
            let (r1, r1p) = candidate(n, idx);
            let rs = RootSetData { n, r1, r1p, survivor_count: 0 };
            rs.validate().unwrap();
        }
    }

    #[test]
    fn ray_rule_for_n2() {
        assert!(on_ray(2, (0, 1), false));
        assert!(on_ray(2, (2, 1), true));
        assert!(!on_ray(2, (1, 0), false));
    }

    #[test]
    fn rejects_out_of_range_dimension() {
        assert!(matches!(search(0, Duration::from_secs(1)), Err(Error::InvalidDimension(_))));
        assert!(matches!(search(7, Duration::from_secs(1)), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn zero_budget_is_a_search_failure() {
        assert!(matches!(search(3, Duration::ZERO), Err(Error::SearchFailure { n: 3, .. })));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = load_or_derive(2, Duration::from_secs(30), dir.path()).unwrap();
        assert!(cache_file(dir.path(), 2).exists());
        let b = load_or_derive(2, Duration::from_secs(30), dir.path()).unwrap();
        assert_eq!(a, b);
    }
}
