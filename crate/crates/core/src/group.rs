//! Finite groups given by multiplication tables.

use crate::error::{Error, Result};

/// Tables up to this order get an exhaustive associativity check.
const EXHAUSTIVE_ASSOCIATIVITY_ORDER: usize = 256;

/// A finite group on `0..order` with identity `0`; `mul[a][b]` is `a * b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupTable {
    mul: Vec<Vec<usize>>,
}

impl FiniteGroupTable {
    pub fn new(mul: Vec<Vec<usize>>) -> Result<Self> {
        let order = mul.len();
        if order == 0 {
            return Err(Error::Argument("group table is empty".into()));
        }
        for (a, row) in mul.iter().enumerate() {
            if row.len() != order {
                return Err(Error::Argument(format!(
                    "row {a} has {} entries, expected {order}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= order) {
                return Err(Error::Argument(format!("row {a} has entry {bad} >= {order}")));
            }
        }
        for a in 0..order {
            if mul[0][a] != a || mul[a][0] != a {
                return Err(Error::Argument(format!("element 0 is not an identity at {a}")));
            }
        }
        for a in 0..order {
            let mut row_seen = vec![false; order];
            let mut col_seen = vec![false; order];
            for b in 0..order {
                row_seen[mul[a][b]] = true;
                col_seen[mul[b][a]] = true;
            }
            if row_seen.contains(&false) || col_seen.contains(&false) {
                return Err(Error::Argument(format!(
                    "element {a} does not act bijectively (not a Latin square)"
                )));
            }
        }
        let table = FiniteGroupTable { mul };
        if order <= EXHAUSTIVE_ASSOCIATIVITY_ORDER {
            for a in 0..order {
                for b in 0..order {
                    for c in 0..order {
                        if table.op(table.op(a, b), c) != table.op(a, table.op(b, c)) {
                            return Err(Error::Argument(format!(
                                "table is not associative at ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(table)
    }

    /// Dihedral group of order `2n`: index `i + n*j` stands for `r^i s^j`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("dihedral group needs n >= 2, got {n}")));
        }
        let order = 2 * n;
        let mut mul = vec![vec![0; order]; order];
        for (x, row) in mul.iter_mut().enumerate() {
            let (a, b) = (x % n, x / n);
            for (y, entry) in row.iter_mut().enumerate() {
                let (c, d) = (y % n, y / n);
                let rot = if b == 0 { (a + c) % n } else { (a + n - c) % n };
                *entry = rot + n * ((b + d) % 2);
            }
        }
        FiniteGroupTable::new(mul)
    }

    /// Symmetric group on `k` letters; elements are permutations in
    /// lexicographic order, composed right to left.
    pub fn symmetric(k: usize) -> Result<Self> {
        if k == 0 || k > 6 {
            return Err(Error::Argument(format!("symmetric group degree {k} not in 1..=6")));
        }
        let perms = permutations(k);
        let index = |p: &Vec<usize>| perms.binary_search(p).expect("closed under composition");
        let mul = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| index(&(0..k).map(|i| s[t[i]]).collect()))
                    .collect()
            })
            .collect();
        FiniteGroupTable::new(mul)
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn op(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    /// Checks that `elements` is a subgroup and returns it sorted and deduplicated.
    pub fn subgroup(&self, elements: &[usize]) -> Result<Vec<usize>> {
        let mut set: Vec<usize> = elements.to_vec();
        set.sort_unstable();
        set.dedup();
        if let Some(&bad) = set.iter().find(|&&x| x >= self.order()) {
            return Err(Error::Argument(format!("element {bad} is not in the group")));
        }
        if set.first() != Some(&0) {
            return Err(Error::Argument("subset does not contain the identity".into()));
        }
        for &a in &set {
            for &b in &set {
                if set.binary_search(&self.op(a, b)).is_err() {
                    return Err(Error::Argument(format!(
                        "subset is not closed: {a} * {b} = {} is missing",
                        self.op(a, b)
                    )));
                }
            }
        }
        Ok(set)
    }

    /// Left coset `g H`, sorted.
    pub fn left_coset(&self, g: usize, subgroup: &[usize]) -> Vec<usize> {
        let mut coset: Vec<usize> = subgroup.iter().map(|&h| self.op(g, h)).collect();
        coset.sort_unstable();
        coset
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}
