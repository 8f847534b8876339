//! The proper coefficient γ*: Goodman–Kruskal γ maximized over all numberings of
//! the nominal variable(s).
//!
//! Nominal x against real y is solved exactly by a subset DP over the H matrix
//! in O(k·2^k). For nominal against nominal every numbering of the smaller
//! variable is enumerated and the other one is optimized by the same DP, which
//! yields the exact maximum over all k!·l! pairs of numberings at a fraction of
//! the cost. The plain full enumeration is kept as [`enumerate_numberings`]; it
//! serves the independence test and the test oracles.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;

use crate::concordance::{count_pairs_cross, PairCounts};
use crate::crosstab::CrossCounts;
use crate::error::{Error, Result};
use crate::numbering::{all_numberings, next_permutation, permutations, Numbering};
use crate::sample::{PairedSample, SampleKind};
use crate::table::{ContingencyTable, TableMode};

/// Scalar type of concordance weights: exact pair counts or probabilities.
pub trait Weight:
    Copy
    + Default
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Debug
    + Send
    + Sync
{
    /// Equality used for maximization ties.
    fn same(a: Self, b: Self) -> bool;
    fn as_f64(self) -> f64;
}

impl Weight for u64 {
    fn same(a: Self, b: Self) -> bool {
        a == b
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Weight for f64 {
    fn same(a: Self, b: Self) -> bool {
        (a - b).abs() <= 1e-13 * a.abs().max(b.abs()).max(1.0)
    }

    fn as_f64(self) -> f64 {
        self
    }
}

/// `H[a][b]` is the weight of pairs with the lower `y` in category `a` and the
/// higher `y` in category `b`; the diagonal is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HMatrix<W = u64> {
    k: usize,
    h: Vec<W>,
}

impl<W: Weight> HMatrix<W> {
    pub fn new(k: usize, mut h: Vec<W>) -> Result<Self> {
        if h.len() != k * k {
            return Err(Error::DimensionMismatch {
                expected: k * k,
                got: h.len(),
            });
        }
        if h.iter().any(|v| !(*v >= W::default())) {
            return Err(Error::invalid("H entries must be nonnegative"));
        }
        for i in 0..k {
            h[i * k + i] = W::default();
        }
        Ok(HMatrix { k, h })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> W {
        self.h[a * self.k + b]
    }

    /// Total weight T of pairs untied in both coordinates.
    pub fn total(&self) -> W {
        self.h.iter().fold(W::default(), |s, &v| s + v)
    }

    /// Concordant weight when categories are ranked by `order`.
    pub fn concordant(&self, order: &[usize]) -> W {
        let mut c = W::default();
        for (r, &a) in order.iter().enumerate() {
            for &b in &order[r + 1..] {
                c = c + self.get(a, b);
            }
        }
        c
    }
}

impl HMatrix<u64> {
    /// Rows of `cc` are the categories; columns are ordered `y` levels.
    pub fn from_cross(cc: &CrossCounts) -> Self {
        Self::from_rows(cc.rows(), cc.cols(), |i, j| cc.get(i, j))
    }
}

impl<W: Weight> HMatrix<W> {
    pub(crate) fn from_rows(k: usize, m: usize, cell: impl Fn(usize, usize) -> W) -> Self {
        // above[b][j]: weight of category b strictly above level j
        let mut above = vec![W::default(); k * m];
        for b in 0..k {
            let mut acc = W::default();
            for j in (0..m).rev() {
                above[b * m + j] = acc;
                acc = acc + cell(b, j);
            }
        }
        let mut h = vec![W::default(); k * k];
        for a in 0..k {
            for j in 0..m {
                let n = cell(a, j);
                if n == W::default() {
                    continue;
                }
                for b in 0..k {
                    if b != a {
                        h[a * k + b] = h[a * k + b] + n * above[b * m + j];
                    }
                }
            }
        }
        HMatrix { k, h }
    }
}

/// H matrix of a nominal-real sample.
pub fn build_h_matrix(sample: &PairedSample) -> Result<HMatrix> {
    if sample.kind() != SampleKind::NominalReal {
        return Err(Error::invalid("the H matrix is defined for nominal-real samples"));
    }
    Ok(HMatrix::from_cross(&CrossCounts::from_sample(sample)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DpSolution<W> {
    pub concordant: W,
    /// Categories from lowest to highest rank; lexicographically smallest optimum.
    pub order: Vec<usize>,
    /// Number of optimal orders (saturating).
    pub count: u64,
}

/// Default largest k accepted by the subset DP (about 16·2^k bytes of memory).
pub const DEFAULT_MAX_K_DP: usize = 30;

/// Maximum concordant weight over all orders of the H categories.
pub fn dp_max_concordant<W: Weight>(h: &HMatrix<W>, max_k: usize) -> Result<DpSolution<W>> {
    let k = h.k();
    if k > max_k {
        return Err(Error::budget(format!(
            "subset search over {k} categories exceeds the limit of {max_k}; \
             merge rare categories or raise the limit"
        )));
    }
    Ok(dp_unchecked(h))
}

fn dp_unchecked<W: Weight>(h: &HMatrix<W>) -> DpSolution<W> {
    let k = h.k();
    if k == 0 {
        return DpSolution {
            concordant: W::default(),
            order: Vec::new(),
            count: 1,
        };
    }
    let zero = W::default();
    // row[x](S) = Σ_{m∈S} H[x][m], split into low and high halves of the mask.
    let lo_bits = k / 2;
    let hi_bits = k - lo_bits;
    let lo_mask = (1usize << lo_bits) - 1;
    let mut lo = vec![zero; k << lo_bits];
    let mut hi = vec![zero; k << hi_bits];
    for x in 0..k {
        let l = &mut lo[x << lo_bits..(x + 1) << lo_bits];
        for s in 1usize..1 << lo_bits {
            l[s] = l[s & (s - 1)] + h.get(x, s.trailing_zeros() as usize);
        }
        let u = &mut hi[x << hi_bits..(x + 1) << hi_bits];
        for s in 1usize..1 << hi_bits {
            u[s] = u[s & (s - 1)] + h.get(x, lo_bits + s.trailing_zeros() as usize);
        }
    }
    let row = |x: usize, s: usize| lo[(x << lo_bits) | (s & lo_mask)] + hi[(x << hi_bits) | (s >> lo_bits)];

    // g[S]: best concordant weight among the elements of S when S holds the top |S| ranks
    // and its lowest-ranked element precedes all the others.
    let full = (1usize << k) - 1;
    let mut g = vec![zero; full + 1];
    let mut cnt = vec![0u64; full + 1];
    cnt[0] = 1;
    for s in 1..=full {
        let mut best = zero;
        let mut first = true;
        let mut bits = s;
        while bits != 0 {
            let x = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let v = row(x, s) + g[s ^ (1 << x)];
            if first || v > best {
                best = v;
                first = false;
            }
        }
        let mut c = 0u64;
        let mut bits = s;
        while bits != 0 {
            let x = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s ^ (1 << x);
            if W::same(row(x, s) + g[rest], best) {
                c = c.saturating_add(cnt[rest]);
            }
        }
        g[s] = best;
        cnt[s] = c;
    }

    let mut order = Vec::with_capacity(k);
    let mut s = full;
    while s != 0 {
        let x = (0..k)
            .find(|&x| s & (1 << x) != 0 && W::same(row(x, s) + g[s ^ (1 << x)], g[s]))
            .expect("an optimal choice exists");
        order.push(x);
        s ^= 1 << x;
    }
    DpSolution {
        concordant: g[full],
        order,
        count: cnt[full],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaStarResult<W = u64> {
    pub value: f64,
    /// Lexicographically smallest optimal numbering (x order first, then y order).
    pub argmax: Numbering,
    pub argmax_count: u64,
    pub concordant: W,
    pub untied: W,
}

/// Search budgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Largest k for nominal-real samples.
    pub max_k_real: usize,
    /// Largest k and l for nominal-nominal samples.
    pub max_categories_nominal: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_k_real: DEFAULT_MAX_K_DP,
            max_categories_nominal: 8,
        }
    }
}

impl SearchLimits {
    pub(crate) fn check(&self, rows: usize, cols: usize, y_nominal: bool) -> Result<()> {
        if y_nominal {
            let m = self.max_categories_nominal;
            if rows > m || cols > m {
                return Err(Error::budget(format!(
                    "a {rows}x{cols} nominal-nominal search exceeds the limit of {m} categories per \
                     variable; merge categories or raise the limit"
                )));
            }
        } else if rows > self.max_k_real {
            return Err(Error::budget(format!(
                "{rows} x categories exceed the limit of {}; merge rare categories or raise the limit",
                self.max_k_real
            )));
        }
        Ok(())
    }
}

/// The estimator γ̂*.
pub fn gamma_star_estimate(sample: &PairedSample) -> Result<GammaStarResult> {
    gamma_star_with_limits(sample, &SearchLimits::default())
}

pub fn gamma_star_with_limits(sample: &PairedSample, limits: &SearchLimits) -> Result<GammaStarResult> {
    gamma_star_cross(&CrossCounts::from_sample(sample), limits)
}

/// γ̂* of a counts-mode table.
pub fn gamma_star_table(table: &ContingencyTable, limits: &SearchLimits) -> Result<GammaStarResult> {
    gamma_star_cross(&CrossCounts::from_table(table)?, limits)
}

pub fn gamma_star_cross(cc: &CrossCounts, limits: &SearchLimits) -> Result<GammaStarResult> {
    limits.check(cc.rows(), cc.cols(), cc.y_nominal())?;
    let (rows, cols) = (cc.rows(), cc.cols());
    let cell = |i: usize, j: usize| cc.get(i, j);
    let best = if cc.y_nominal() {
        search_both(rows, cols, &cell)
    } else {
        let h = HMatrix::from_cross(cc);
        let dp = dp_unchecked(&h);
        Best {
            concordant: dp.concordant,
            untied: h.total(),
            numbering: Numbering::from_parts(dp.order, None),
            count: dp.count,
        }
    };
    finish(best)
}

/// γ* of a joint distribution given as a probability (or counts) table.
pub fn population_gamma_star(table: &ContingencyTable) -> Result<GammaStarResult<f64>> {
    let limits = SearchLimits::default();
    limits.check(table.k(), table.l(), true)?;
    if table.mode() != TableMode::Probabilities {
        return population_gamma_star(&table.normalize()?);
    }
    let l = table.l();
    let p = table.cells();
    finish(search_both(table.k(), l, &|i, j| p[i * l + j]))
}

/// γ* for a nominal x against a continuous y given its population H matrix,
/// `H[a][b] = P(X = a, X' = b, Y < Y')` for independent copies.
pub fn population_gamma_star_h(h: &HMatrix<f64>) -> Result<GammaStarResult<f64>> {
    let dp = dp_max_concordant(h, DEFAULT_MAX_K_DP)?;
    finish(Best {
        concordant: dp.concordant,
        untied: h.total(),
        numbering: Numbering::from_parts(dp.order, None),
        count: dp.count,
    })
}

struct Best<W> {
    concordant: W,
    untied: W,
    numbering: Numbering,
    count: u64,
}

fn finish<W: Weight>(b: Best<W>) -> Result<GammaStarResult<W>> {
    let t = b.untied.as_f64();
    if !(t > 0.0) {
        return Err(Error::degenerate("gamma undefined: all pairs tied"));
    }
    let value = ((2.0 * b.concordant.as_f64() - t) / t).clamp(0.0, 1.0);
    Ok(GammaStarResult {
        value,
        argmax: b.numbering,
        argmax_count: b.count,
        concordant: b.concordant,
        untied: b.untied,
    })
}

/// Enumerates numberings of the smaller variable and solves the other by DP.
fn search_both<W: Weight>(rows: usize, cols: usize, cell: &(dyn Fn(usize, usize) -> W + Sync)) -> Best<W> {
    let enumerate_x = rows <= cols;
    let outer = if enumerate_x { rows } else { cols };

    // For a fixed outer order, the inner H matrix counts pairs strictly ordered
    // by the outer variable, indexed by the inner categories.
    let solve = |perm: &[usize]| -> (DpSolution<W>, W) {
        let h = if enumerate_x {
            HMatrix::from_rows(cols, rows, |b, r| cell(perm[r], b))
        } else {
            HMatrix::from_rows(rows, cols, |a, r| cell(a, perm[r]))
        };
        let t = h.total();
        (dp_unchecked(&h), t)
    };

    let firsts: Vec<usize> = (0..outer.max(1)).collect();
    let partial: Vec<Option<Best<W>>> = firsts
        .par_iter()
        .map(|&first| {
            if outer == 0 {
                return None;
            }
            let mut perm: Vec<usize> = std::iter::once(first)
                .chain((0..outer).filter(|&v| v != first))
                .collect();
            let mut best: Option<Best<W>> = None;
            loop {
                let (dp, t) = solve(&perm);
                let numbering = if enumerate_x {
                    Numbering::from_parts(perm.clone(), Some(dp.order))
                } else {
                    Numbering::from_parts(dp.order, Some(perm.clone()))
                };
                merge(
                    &mut best,
                    Best {
                        concordant: dp.concordant,
                        untied: t,
                        numbering,
                        count: dp.count,
                    },
                );
                if !next_permutation(&mut perm[1..]) {
                    break;
                }
            }
            best
        })
        .collect();
    let mut best = None;
    for b in partial.into_iter().flatten() {
        merge(&mut best, b);
    }
    best.expect("at least one numbering")
}

fn merge<W: Weight>(best: &mut Option<Best<W>>, cand: Best<W>) {
    match best {
        None => *best = Some(cand),
        Some(b) => {
            if W::same(cand.concordant, b.concordant) {
                b.count = b.count.saturating_add(cand.count);
                if cand.numbering < b.numbering {
                    b.numbering = cand.numbering;
                }
            } else if cand.concordant > b.concordant {
                *best = Some(cand);
            }
        }
    }
}

/// Pair counts under every numbering, in lexicographic numbering order
/// (k! numberings for a real y, k!·l! for a nominal y).
pub fn enumerate_numberings(cc: &CrossCounts) -> Vec<(Numbering, PairCounts)> {
    let l = cc.y_nominal().then_some(cc.cols());
    all_numberings(cc.rows(), l)
        .into_par_iter()
        .map(|nb| {
            let pc = count_pairs_cross(cc, nb.x_order(), nb.y_order());
            (nb, pc)
        })
        .collect()
}

/// Brute-force γ̂*: full enumeration with the O(kl) counter.
pub fn gamma_star_brute_force(cc: &CrossCounts) -> Result<GammaStarResult> {
    let all = enumerate_numberings(cc);
    let mut best: Option<Best<u64>> = None;
    for (nb, pc) in all {
        merge(
            &mut best,
            Best {
                concordant: pc.concordant,
                untied: pc.untied(),
                numbering: nb,
                count: 1,
            },
        );
    }
    finish(best.expect("at least one numbering"))
}

/// Largest concordant count over all orders by plain enumeration; test helper.
#[doc(hidden)]
pub fn brute_force_concordant<W: Weight>(h: &HMatrix<W>) -> (W, Vec<usize>, u64) {
    let mut best: Option<(W, Vec<usize>, u64)> = None;
    for p in permutations(h.k()) {
        let c = h.concordant(&p);
        match &mut best {
            None => best = Some((c, p, 1)),
            Some((bc, _, n)) if W::same(c, *bc) => *n += 1,
            Some(b) if c > b.0 => *b = (c, p, 1),
            _ => {}
        }
    }
    best.expect("at least one permutation")
}
