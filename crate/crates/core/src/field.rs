//! Arithmetic in GF(p) for a prime p.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Argument(format!(
                "{p} is not prime (only prime fields are supported)"
            )));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(self) -> u32 {
        self.p
    }

    pub fn elements(self) -> impl Iterator<Item = u32> {
        0..self.p
    }

    pub fn reduce(self, a: i64) -> u32 {
        a.rem_euclid(self.p as i64) as u32
    }

    pub fn add(self, a: u32, b: u32) -> u32 {
        (a + b) % self.p
    }

    pub fn sub(self, a: u32, b: u32) -> u32 {
        (a + self.p - b) % self.p
    }

    pub fn neg(self, a: u32) -> u32 {
        (self.p - a) % self.p
    }

    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// Multiplicative inverse by Fermat; `None` for zero.
    pub fn inv(self, a: u32) -> Option<u32> {
        if a.is_multiple_of(self.p) {
            return None;
        }
        let mut result = 1u64;
        let mut base = (a % self.p) as u64;
        let mut exp = self.p - 2;
        let m = self.p as u64;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result * base % m;
            }
            base = base * base % m;
            exp >>= 1;
        }
        Some(result as u32)
    }

    /// Scales `v` so that its first nonzero coordinate is 1. `None` for the zero vector.
    pub fn normalize(self, v: &[u32]) -> Option<Vec<u32>> {
        let lead = *v.iter().find(|&&x| x != 0)?;
        let inv = self.inv(lead)?;
        Some(v.iter().map(|&x| self.mul(x, inv)).collect())
    }

    pub fn dot(self, a: &[u32], b: &[u32]) -> u32 {
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    /// Reduced row echelon form, zero rows dropped.
    pub fn rref(self, rows: &[Vec<u32>]) -> Vec<Vec<u32>> {
        let mut m: Vec<Vec<u32>> = rows.to_vec();
        let cols = m.first().map_or(0, Vec::len);
        let mut pivot_row = 0;
        for col in 0..cols {
            let Some(r) = (pivot_row..m.len()).find(|&r| m[r][col] != 0) else {
                continue;
            };
            m.swap(pivot_row, r);
            let inv = self.inv(m[pivot_row][col]).expect("pivot is nonzero");
            for x in &mut m[pivot_row] {
                *x = self.mul(*x, inv);
            }
            for r in 0..m.len() {
                if r != pivot_row && m[r][col] != 0 {
                    let factor = m[r][col];
                    for c in 0..cols {
                        let sub = self.mul(factor, m[pivot_row][c]);
                        m[r][c] = self.sub(m[r][c], sub);
                    }
                }
            }
            pivot_row += 1;
            if pivot_row == m.len() {
                break;
            }
        }
        m.truncate(pivot_row);
        m
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
