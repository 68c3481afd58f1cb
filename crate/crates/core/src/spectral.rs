//! Dimension bounds for a bounded first-quadrant spectral sequence, and a
//! seeded page-by-page simulator working with dimensions and ranks only.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// `E_2^{s,t}`, zero unless `s <= M` and `t <= N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralPage {
    m: usize,
    n: usize,
    dims: BTreeMap<(usize, usize), usize>,
}

impl SpectralPage {
    pub fn new(m: usize, n: usize, entries: impl IntoIterator<Item = ((usize, usize), usize)>) -> Result<Self> {
        let mut dims = BTreeMap::new();
        for ((s, t), d) in entries {
            if s > m || t > n {
                return Err(Error::InvalidInput(format!("entry ({s},{t}) lies outside s <= {m}, t <= {n}")));
            }
            if d > 0 {
                dims.insert((s, t), d);
            }
        }
        Ok(SpectralPage { m, n, dims })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, s: i64, t: i64) -> usize {
        if s < 0 || t < 0 {
            return 0;
        }
        self.dims.get(&(s as usize, t as usize)).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.dims.iter().map(|(&k, &v)| (k, v))
    }

    /// Highest total degree that can be nonzero.
    pub fn top_degree(&self) -> usize {
        self.m + self.n
    }

    /// `sum (-1)^{s+t} E_2^{s,t}`.
    pub fn euler_characteristic(&self) -> i64 {
        self.dims.iter().map(|(&(s, t), &d)| if (s + t) % 2 == 0 { d as i64 } else { -(d as i64) }).sum()
    }
}

/// `E_2^{n,0} + sum_{0 <= i <= n-1} E_2^{i, n-i}`.
pub fn bound_upper(page: &SpectralPage, n: usize) -> usize {
    let n = n as i64;
    page.get(n, 0) + (0..n).map(|i| page.get(i, n - i)).sum::<usize>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeReport {
    pub edge: usize,
    pub bound: usize,
    pub slack: i64,
    pub passed: bool,
}

/// `E_2^{n,0} <= H^n + sum_{2 <= i <= N+1} E_2^{n-i, i-1}`. The sum runs to
/// `N + 1` because `d_r` into row 0 can be nonzero for every `r <= N + 1`.
pub fn bound_edge(page: &SpectralPage, n: usize, hn: usize) -> EdgeReport {
    let n = n as i64;
    let top = page.n as i64 + 1;
    let sum: usize = (2..=top).map(|i| page.get(n - i, i - 1)).sum();
    let edge = page.get(n, 0);
    let bound = hn + sum;
    EdgeReport { edge, bound, slack: bound as i64 - edge as i64, passed: edge <= bound }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub seed: u64,
    /// Dimension tables for pages `2..=N+2` (the last is `E_∞`).
    pub pages: Vec<BTreeMap<(usize, usize), usize>>,
    /// `rank d_r^{s,t}` for every nonzero differential, keyed by `(r, s, t)`.
    pub ranks: BTreeMap<(usize, usize, usize), usize>,
    /// `H^0 .. H^{M+N}`.
    pub abutment: Vec<usize>,
}

/// Run pages `r = 2..=N+1` choosing each rank with `choose(r, (s, t), max)`,
/// which must return a value in `0..=max`. Differentials on a page are visited
/// in increasing `(s, t)`; `max` accounts for classes already used on that page.
pub fn simulate_with(page: &SpectralPage, mut choose: impl FnMut(usize, (usize, usize), usize) -> usize) -> Simulation {
    let mut cur: BTreeMap<(usize, usize), usize> = page.dims.clone();
    let mut pages = vec![cur.clone()];
    let mut ranks = BTreeMap::new();
    for r in 2..=page.n + 1 {
        let mut used: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let sources: Vec<(usize, usize)> = cur.keys().copied().collect();
        for (s, t) in sources {
            if t + 1 < r {
                continue;
            }
            let target = (s + r, t + 1 - r);
            let Some(&tdim) = cur.get(&target) else { continue };
            let src_free = cur[&(s, t)] - used.get(&(s, t)).copied().unwrap_or(0);
            let tgt_free = tdim - used.get(&target).copied().unwrap_or(0);
            let max = src_free.min(tgt_free);
            if max == 0 {
                continue;
            }
            let k = choose(r, (s, t), max);
            assert!(k <= max, "rank chooser returned {k} > {max}");
            if k > 0 {
                *used.entry((s, t)).or_default() += k;
                *used.entry(target).or_default() += k;
                ranks.insert((r, s, t), k);
            }
        }
        for (pos, k) in used {
            let d = cur.get_mut(&pos).unwrap();
            *d -= k;
            if *d == 0 {
                cur.remove(&pos);
            }
        }
        pages.push(cur.clone());
    }
    let mut abutment = vec![0; page.top_degree() + 1];
    for (&(s, t), &d) in &cur {
        abutment[s + t] += d;
    }
    Simulation { seed: 0, pages, ranks, abutment }
}

/// Uniformly random admissible ranks from a seeded generator.
pub fn simulate(page: &SpectralPage, seed: u64) -> Simulation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sim = simulate_with(page, |_, _, max| rng.gen_range(0..=max));
    sim.seed = seed;
    sim
}

/// Random page with `M, N <= max_bound` and entries `<= max_entry`.
pub fn random_page(rng: &mut impl Rng, max_bound: usize, max_entry: usize) -> SpectralPage {
    let m = rng.gen_range(0..=max_bound);
    let n = rng.gen_range(0..=max_bound);
    let mut entries = Vec::new();
    for s in 0..=m {
        for t in 0..=n {
            entries.push(((s, t), rng.gen_range(0..=max_entry)));
        }
    }
    SpectralPage::new(m, n, entries).expect("entries within bounds")
}
