//! Independent oracles, kept separate from the library code paths.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;

use nqtensor::matrix::ExactMatrix;
use nqtensor::scalar::ExactComplex;

type Q = Complex<BigRational>;

fn q(re: i64, im: i64) -> Q {
    Complex::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
}

/// Textbook Gaussian elimination with field division over `Q(i)`.
pub fn rank_oracle(rows: &[Vec<(i64, i64)>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&(a, b)| q(a, b)).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let factor = m[i][c].clone() / pivot.clone();
                for j in c..cols {
                    let sub = factor.clone() * m[rank][j].clone();
                    m[i][j] = m[i][j].clone() - sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn to_exact(rows: &[Vec<(i64, i64)>]) -> ExactMatrix {
    let cols = rows.first().map_or(0, Vec::len);
    ExactMatrix::from_fn(rows.len(), cols, |i, j| ExactComplex::gaussian(rows[i][j].0, rows[i][j].1))
}

/// Input strings as explicit bit vectors, most significant first.
pub fn bits(x: u64, n: usize) -> Vec<bool> {
    format!("{x:0n$b}").chars().map(|c| c == '1').collect()
}

pub fn gip_oracle(x: &[u64], n: usize) -> bool {
    let strings: Vec<Vec<bool>> = x.iter().map(|&v| bits(v, n)).collect();
    let count = (0..n).filter(|&j| strings.iter().all(|s| s[j])).count();
    count % 2 == 1
}

pub fn eq_oracle(x: &[u64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}

pub fn hamming_neq1_oracle(x: &[u64], n: usize) -> bool {
    let strings: Vec<Vec<bool>> = x.iter().map(|&v| bits(v, n)).collect();
    (0..n).filter(|&j| strings.iter().all(|s| s[j])).count() != 1
}

/// Every input tuple for `k` players of `n` bits, first player slowest.
pub fn all_inputs(n: usize, k: usize) -> Vec<Vec<u64>> {
    let side = 1u64 << n;
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u64>| {
                (0..side).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn big(v: i64) -> BigInt {
    v.into()
}
