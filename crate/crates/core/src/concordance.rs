//! Concordant, discordant and tied pair counts, and the plain γ̂, τ̂, ν̂ statistics
//! for one fixed numbering.

use crate::crosstab::CrossCounts;
use crate::error::{Error, Result};
use crate::numbering::Numbering;
use crate::table::ContingencyTable;

/// Classification of all `n(n-1)/2` unordered pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub concordant: u64,
    pub discordant: u64,
    pub ties_x_only: u64,
    pub ties_y_only: u64,
    pub ties_both: u64,
}

impl PairCounts {
    pub fn total_pairs(&self) -> u64 {
        self.concordant + self.discordant + self.ties_x_only + self.ties_y_only + self.ties_both
    }

    /// Pairs untied in both coordinates.
    pub fn untied(&self) -> u64 {
        self.concordant + self.discordant
    }

    pub fn ties(&self) -> u64 {
        self.ties_x_only + self.ties_y_only + self.ties_both
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaComponents {
    pub tau_hat: f64,
    pub nu_hat: f64,
    pub gamma_hat: f64,
}

/// Quadratic oracle: compares every unordered pair directly.
pub fn count_pairs_reference(x: &[f64], y: &[f64]) -> Result<PairCounts> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::invalid("pair counting needs at least 2 observations"));
    }
    let mut pc = PairCounts::default();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i].partial_cmp(&x[j]).expect("finite");
            let dy = y[i].partial_cmp(&y[j]).expect("finite");
            use std::cmp::Ordering::Equal;
            match (dx, dy) {
                (Equal, Equal) => pc.ties_both += 1,
                (Equal, _) => pc.ties_x_only += 1,
                (_, Equal) => pc.ties_y_only += 1,
                (a, b) if a == b => pc.concordant += 1,
                _ => pc.discordant += 1,
            }
        }
    }
    Ok(pc)
}

/// O(kl) counting on a counts-mode table under `numbering`.
pub fn count_pairs_table(table: &ContingencyTable, numbering: &Numbering) -> Result<PairCounts> {
    let cc = CrossCounts::from_table(table)?;
    check_dims(&cc, numbering)?;
    Ok(count_pairs_cross(&cc, numbering.x_order(), numbering.y_order()))
}

/// Same recursion on a cross-tabulation; `y_order = None` keeps the column order.
pub fn count_pairs_cross(cc: &CrossCounts, x_order: &[usize], y_order: Option<&[usize]>) -> PairCounts {
    let t = cc.reordered(x_order, y_order);
    let (k, l) = (t.rows(), t.cols());

    // below[j] accumulates column totals of the rows strictly below the current one;
    // se/sw are the south-east / south-west sums read off its prefix sums.
    let mut below = vec![0u64; l];
    let (mut conc, mut disc, mut both) = (0u64, 0u64, 0u64);
    for i in (0..k).rev() {
        let below_total: u64 = below.iter().sum();
        let mut west = 0u64;
        for j in 0..l {
            let n = t.get(i, j);
            let se = below_total - west - below[j];
            conc += n * se;
            disc += n * west;
            both += n * n.saturating_sub(1) / 2;
            west += below[j];
        }
        for (b, j) in below.iter_mut().zip(0..l) {
            *b += t.get(i, j);
        }
    }
    let pairs2 = |v: u64| v * v.saturating_sub(1) / 2;
    let same_x: u64 = t.row_sums().into_iter().map(pairs2).sum();
    let same_y: u64 = t.col_sums().into_iter().map(pairs2).sum();
    PairCounts {
        concordant: conc,
        discordant: disc,
        ties_x_only: same_x - both,
        ties_y_only: same_y - both,
        ties_both: both,
    }
}

pub fn gamma_components(pc: &PairCounts) -> Result<GammaComponents> {
    let p = pc.total_pairs();
    if p == 0 {
        return Err(Error::invalid("no pairs to classify"));
    }
    let untied = pc.untied();
    if untied == 0 {
        return Err(Error::degenerate("gamma undefined: all pairs tied"));
    }
    let diff = pc.concordant as f64 - pc.discordant as f64;
    Ok(GammaComponents {
        tau_hat: diff / p as f64,
        nu_hat: pc.ties() as f64 / p as f64,
        gamma_hat: diff / untied as f64,
    })
}

fn check_dims(cc: &CrossCounts, numbering: &Numbering) -> Result<()> {
    if numbering.k() != cc.rows() {
        return Err(Error::DimensionMismatch {
            expected: cc.rows(),
            got: numbering.k(),
        });
    }
    match numbering.l() {
        Some(l) if l != cc.cols() => Err(Error::DimensionMismatch {
            expected: cc.cols(),
            got: l,
        }),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::TableMode;
    use proptest::prelude::*;

    fn pc(c: u64, d: u64, tx: u64, ty: u64, tb: u64) -> PairCounts {
        PairCounts {
            concordant: c,
            discordant: d,
            ties_x_only: tx,
            ties_y_only: ty,
            ties_both: tb,
        }
    }

    #[test]
    fn reference_examples() {
        let r = count_pairs_reference(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(r, pc(3, 0, 0, 0, 0));
        let r = count_pairs_reference(&[1.0, 1.0, 2.0], &[10.0, 20.0, 5.0]).unwrap();
        assert_eq!(r, pc(0, 2, 1, 0, 0));
        let r = count_pairs_reference(&[1.0, 2.0], &[7.0, 7.0]).unwrap();
        assert_eq!(r, pc(0, 0, 0, 1, 0));
        assert!(count_pairs_reference(&[1.0], &[1.0]).is_err());
        assert!(count_pairs_reference(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn table_examples() {
        let diag = ContingencyTable::from_matrix(&[vec![2.0, 0.0], vec![0.0, 2.0]], TableMode::Counts)
            .unwrap();
        let id = Numbering::identity(2, Some(2));
        let r = count_pairs_table(&diag, &id).unwrap();
        assert_eq!((r.concordant, r.discordant), (4, 0));
        let anti = ContingencyTable::from_matrix(&[vec![0.0, 2.0], vec![2.0, 0.0]], TableMode::Counts)
            .unwrap();
        let r = count_pairs_table(&anti, &id).unwrap();
        assert_eq!((r.concordant, r.discordant), (0, 4));
        assert!(count_pairs_table(&diag, &Numbering::identity(3, Some(2))).is_err());
    }

    #[test]
    fn components() {
        let g = gamma_components(&pc(3, 0, 0, 0, 0)).unwrap();
        assert_eq!((g.tau_hat, g.nu_hat, g.gamma_hat), (1.0, 0.0, 1.0));
        let g = gamma_components(&pc(0, 2, 1, 0, 0)).unwrap();
        assert!((g.tau_hat + 2.0 / 3.0).abs() < 1e-15);
        assert!((g.nu_hat - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.gamma_hat, -1.0);
        assert!(matches!(
            gamma_components(&pc(0, 0, 1, 0, 0)),
            Err(Error::Degenerate(_))
        ));
    }

    fn expand(cc: &CrossCounts, x_order: &[usize], y_order: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let xr = crate::numbering::Numbering::new(x_order.to_vec(), None).unwrap().x_ranks();
        let yr = crate::numbering::Numbering::new(y_order.to_vec(), None).unwrap().x_ranks();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for i in 0..cc.rows() {
            for j in 0..cc.cols() {
                for _ in 0..cc.get(i, j) {
                    x.push(xr[i] as f64);
                    y.push(yr[j] as f64);
                }
            }
        }
        (x, y)
    }

    fn shuffled(n: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..n).collect::<Vec<_>>()).prop_shuffle()
    }

    fn random_cross() -> impl Strategy<Value = (CrossCounts, Vec<usize>, Vec<usize>)> {
        (1usize..=5, 1usize..=5).prop_flat_map(|(k, l)| {
            (
                proptest::collection::vec(0u64..5, k * l),
                shuffled(k),
                shuffled(l),
            )
                .prop_map(move |(c, xo, yo)| (CrossCounts::new(k, l, c, true).unwrap(), xo, yo))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn table_recursion_matches_reference((cc, xo, yo) in random_cross()) {
            prop_assume!(cc.total() >= 2);
            let fast = count_pairs_cross(&cc, &xo, Some(&yo));
            let (x, y) = expand(&cc, &xo, &yo);
            let slow = count_pairs_reference(&x, &y).unwrap();
            prop_assert_eq!(fast, slow);
            let n = cc.total();
            prop_assert_eq!(fast.total_pairs(), n * (n - 1) / 2);
        }

        #[test]
        fn reversal_swaps_concordance((cc, xo, yo) in random_cross()) {
            let a = count_pairs_cross(&cc, &xo, Some(&yo));
            let rev: Vec<usize> = xo.iter().rev().copied().collect();
            let b = count_pairs_cross(&cc, &rev, Some(&yo));
            prop_assert_eq!((a.concordant, a.discordant), (b.discordant, b.concordant));
            let id = count_pairs_cross(&cc, &(0..cc.rows()).collect::<Vec<_>>(), None);
            prop_assert_eq!(a.untied(), id.untied());
            if a.untied() > 0 {
                let ga = gamma_components(&a).unwrap().gamma_hat;
                let gb = gamma_components(&b).unwrap().gamma_hat;
                prop_assert!((ga + gb).abs() < 1e-15);
            }
        }

        #[test]
        fn gamma_invariant_under_increasing_maps(
            xs in proptest::collection::vec(0u8..4, 3..40),
            seed in proptest::collection::vec(-3.0f64..3.0, 40),
        ) {
            let x: Vec<f64> = xs.iter().map(|&v| v as f64).collect();
            let y: Vec<f64> = seed[..x.len()].to_vec();
            let base = count_pairs_reference(&x, &y).unwrap();
            for f in [|v: f64| v * v * v, f64::exp] {
                let yt: Vec<f64> = y.iter().map(|&v| f(v)).collect();
                prop_assert_eq!(count_pairs_reference(&x, &yt).unwrap(), base);
            }
        }
    }
}
