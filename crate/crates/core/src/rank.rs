//! Exact rank of 0/1 incidence matrices.
//!
//! Elimination runs over the prime field GF(2^61 - 1) first. Linear
//! independence modulo a prime implies independence over the rationals, so a
//! full modular rank is already exact. Anything short of full rank is
//! recomputed with fraction-free (Bareiss) elimination over big integers.

use num_bigint::BigInt;
use num_traits::{One, Zero};

const P: u64 = (1 << 61) - 1;

#[inline]
fn reduce(x: u128) -> u64 {
    let lo = (x as u64) & P;
    let hi = (x >> 61) as u64;
    let s = lo + hi;
    // s < 2^62, one more fold suffices
    let s = (s & P) + (s >> 61);
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
fn mul(a: u64, b: u64) -> u64 {
    reduce(a as u128 * b as u128)
}

#[inline]
fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P - b
    }
}

fn inverse(a: u64) -> u64 {
    let mut result = 1u64;
    let mut base = a;
    let mut e = P - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(result, base);
        }
        base = mul(base, base);
        e >>= 1;
    }
    result
}

/// Sparse 0/1 matrix; each row lists the columns holding a one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IncidenceMatrix {
    pub cols: usize,
    pub rows: Vec<Vec<usize>>,
}

impl IncidenceMatrix {
    pub fn new(cols: usize) -> Self {
        IncidenceMatrix {
            cols,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, mut cols: Vec<usize>) {
        cols.sort_unstable();
        cols.dedup();
        debug_assert!(cols.iter().all(|&c| c < self.cols));
        self.rows.push(cols);
    }

    pub fn is_square(&self) -> bool {
        self.rows.len() == self.cols
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0u8; self.cols];
                for &c in r {
                    d[c] = 1;
                }
                d
            })
            .collect()
    }
}

/// Row-echelon basis over GF(2^61 - 1), grown one row at a time.
#[derive(Clone, Debug)]
pub struct ModularBasis {
    cols: usize,
    pivot_row: Vec<Option<usize>>,
    /// Basis rows stored from their pivot column on, pivot entry 1.
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModularBasis {
    pub fn new(cols: usize) -> Self {
        ModularBasis {
            cols,
            pivot_row: vec![None; cols],
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Inserts a 0/1 row given by its one-columns; true if the rank grew.
    pub fn insert(&mut self, ones: &[usize]) -> bool {
        let mut row = vec![0u64; self.cols];
        for &c in ones {
            row[c] = 1;
        }
        let Some(mut c) = ones.iter().copied().min() else {
            return false;
        };
        while c < self.cols {
            let x = row[c];
            if x != 0 {
                match self.pivot_row[c] {
                    Some(b) => {
                        let (start, ref brow) = self.rows[b];
                        for (j, &bv) in brow.iter().enumerate() {
                            if bv != 0 {
                                let t = &mut row[start + j];
                                *t = sub(*t, mul(x, bv));
                            }
                        }
                    }
                    None => {
                        let inv = inverse(x);
                        let tail: Vec<u64> = row[c..].iter().map(|&v| mul(v, inv)).collect();
                        self.pivot_row[c] = Some(self.rows.len());
                        self.rows.push((c, tail));
                        return true;
                    }
                }
            }
            c += 1;
        }
        false
    }
}

/// Rank over GF(2^61 - 1); a lower bound on the rational rank.
pub fn modular_rank(m: &IncidenceMatrix) -> usize {
    let mut basis = ModularBasis::new(m.cols);
    for r in &m.rows {
        basis.insert(r);
        if basis.rank() == m.cols {
            break;
        }
    }
    basis.rank()
}

/// Rational rank by fraction-free elimination over big integers.
pub fn bareiss_rank(m: &IncidenceMatrix) -> usize {
    let mut a: Vec<Vec<BigInt>> = m
        .to_dense()
        .into_iter()
        .map(|r| r.into_iter().map(BigInt::from).collect())
        .collect();
    let rows = a.len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..m.cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank][col].clone();
        for i in rank + 1..rows {
            let lead = a[i][col].clone();
            for j in col + 1..m.cols {
                let v = (&a[i][j] * &pivot - &lead * &a[rank][j]) / &prev;
                a[i][j] = v;
            }
            a[i][col] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Exact rational rank of a 0/1 matrix.
pub fn exact_rank(m: &IncidenceMatrix) -> usize {
    let r = modular_rank(m);
    if r == m.rows.len().min(m.cols) {
        r
    } else {
        bareiss_rank(m)
    }
}
