//! Numberings: assignments of distinct ranks to the categories of a nominal variable.
//!
//! A numbering is stored as an *order*: `x_order[r]` is the category index
//! (into the lexicographically sorted labels) that receives rank `r`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Numbering {
    x_order: Vec<usize>,
    y_order: Option<Vec<usize>>,
}

impl Numbering {
    pub fn new(x_order: Vec<usize>, y_order: Option<Vec<usize>>) -> Result<Self> {
        check_permutation(&x_order, "x")?;
        if let Some(y) = &y_order {
            check_permutation(y, "y")?;
        }
        Ok(Numbering { x_order, y_order })
    }

    /// Ranks follow the sorted label order.
    pub fn identity(k: usize, l: Option<usize>) -> Self {
        Numbering {
            x_order: (0..k).collect(),
            y_order: l.map(|l| (0..l).collect()),
        }
    }

    pub(crate) fn from_parts(x_order: Vec<usize>, y_order: Option<Vec<usize>>) -> Self {
        debug_assert!(check_permutation(&x_order, "x").is_ok());
        Numbering { x_order, y_order }
    }

    /// Categories listed from lowest to highest rank.
    pub fn x_order(&self) -> &[usize] {
        &self.x_order
    }

    pub fn y_order(&self) -> Option<&[usize]> {
        self.y_order.as_deref()
    }

    /// `ranks[c]` is the rank of category `c`.
    pub fn x_ranks(&self) -> Vec<usize> {
        invert(&self.x_order)
    }

    pub fn y_ranks(&self) -> Option<Vec<usize>> {
        self.y_order.as_deref().map(invert)
    }

    /// The rank-reversing numbering of x; negates γ.
    pub fn complement_x(&self) -> Self {
        let mut x = self.x_order.clone();
        x.reverse();
        Numbering {
            x_order: x,
            y_order: self.y_order.clone(),
        }
    }

    pub fn k(&self) -> usize {
        self.x_order.len()
    }

    pub fn l(&self) -> Option<usize> {
        self.y_order.as_ref().map(Vec::len)
    }
}

fn invert(order: &[usize]) -> Vec<usize> {
    let mut ranks = vec![0; order.len()];
    for (r, &c) in order.iter().enumerate() {
        ranks[c] = r;
    }
    ranks
}

fn check_permutation(p: &[usize], axis: &str) -> Result<()> {
    let mut seen = vec![false; p.len()];
    for &c in p {
        if c >= p.len() || std::mem::replace(&mut seen[c], true) {
            return Err(Error::invalid(format!("{axis} order {p:?} is not a permutation")));
        }
    }
    Ok(())
}

/// `n!`, or `None` on overflow.
pub fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, v| acc.checked_mul(v))
}

/// Rearranges `p` into its lexicographic successor; returns false at the last one.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&v| v > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Permutations {
    Permutations {
        next: Some((0..n).collect()),
    }
}

pub struct Permutations {
    next: Option<Vec<usize>>,
}

impl Iterator for Permutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(cur)
    }
}

/// Every numbering of a k (×l) problem, x-major in lexicographic order.
pub fn all_numberings(k: usize, l: Option<usize>) -> Vec<Numbering> {
    let xs: Vec<Vec<usize>> = permutations(k).collect();
    match l {
        None => xs.into_iter().map(|x| Numbering::from_parts(x, None)).collect(),
        Some(l) => {
            let ys: Vec<Vec<usize>> = permutations(l).collect();
            xs.iter()
                .flat_map(|x| {
                    ys.iter()
                        .map(move |y| Numbering::from_parts(x.clone(), Some(y.clone())))
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_permutations() {
        let all: Vec<_> = permutations(3).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
        assert_eq!(permutations(0).count(), 1);
        assert_eq!(permutations(6).count(), 720);
        assert_eq!(all_numberings(3, Some(2)).len(), 12);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), Some(1));
        assert_eq!(factorial(8), Some(40320));
        assert_eq!(factorial(21), None);
    }

    #[test]
    fn ranks_invert_orders() {
        let n = Numbering::new(vec![2, 0, 1], Some(vec![1, 0])).unwrap();
        assert_eq!(n.x_ranks(), vec![1, 2, 0]);
        assert_eq!(n.y_ranks(), Some(vec![1, 0]));
        assert_eq!(n.complement_x().x_order(), &[1, 0, 2]);
        assert!(Numbering::new(vec![0, 0], None).is_err());
        assert!(Numbering::new(vec![0, 2], None).is_err());
    }
}
