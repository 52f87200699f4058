//! Boolean function families, their 0/1 communication tensors and explicit
//! nondeterministic constructions.
//!
//! Inputs are `k` strings of `n` bits, each passed as its big-endian integer
//! value; bit position `j` (0-based) is the `j`-th character from the left.

use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::ExactComplex;
use crate::tensor::{check_size, unravel, Decomposition, DenseTensor};

/// Default bound `B` for random Gaussian-integer substitutions.
pub const DEFAULT_SUBSTITUTION_BOUND: i64 = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionKind {
    /// All strings equal.
    Eq,
    /// Parity of positions where every player holds a 1.
    Gip,
    /// Parity of the number of players whose string is all ones.
    GipAbstract,
    /// 1 iff the bitwise AND of all strings does not have weight exactly 1.
    HammingNeq1,
    Constant(bool),
    /// Row-major over inputs, first player slowest.
    TruthTable(Vec<bool>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BooleanFunction {
    name: String,
    players: usize,
    bits: usize,
    kind: FunctionKind,
}

/// Bit at 0-based position `pos` from the left of an `n`-bit string.
pub fn bit_at(x: u64, n: usize, pos: usize) -> u64 {
    (x >> (n - 1 - pos)) & 1
}

fn check_args(n: usize, k: usize, x: &[u64]) -> Result<()> {
    if x.len() != k {
        return Err(Error::ArityMismatch(format!("expected {k} strings, got {}", x.len())));
    }
    if n == 0 || n > 63 {
        return Err(Error::ArityMismatch(format!("bits per player must be in 1..=63, got {n}")));
    }
    if let Some(bad) = x.iter().find(|&&v| v >> n != 0) {
        return Err(Error::ArityMismatch(format!("{bad} is not an {n}-bit string")));
    }
    Ok(())
}

fn and_all(x: &[u64]) -> u64 {
    x.iter().fold(u64::MAX, |acc, &v| acc & v)
}

pub fn eval_eq(n: usize, k: usize, x: &[u64]) -> Result<bool> {
    check_args(n, k, x)?;
    Ok(x.windows(2).all(|w| w[0] == w[1]))
}

pub fn eval_gip(n: usize, k: usize, x: &[u64]) -> Result<bool> {
    check_args(n, k, x)?;
    Ok(and_all(x).count_ones() % 2 == 1)
}

pub fn eval_gip_abstract(n: usize, k: usize, x: &[u64]) -> Result<bool> {
    check_args(n, k, x)?;
    let all_ones = (1u64 << n) - 1;
    Ok(x.iter().filter(|&&v| v == all_ones).count() % 2 == 1)
}

pub fn eval_hamming_neq1(n: usize, k: usize, x: &[u64]) -> Result<bool> {
    check_args(n, k, x)?;
    Ok(and_all(x).count_ones() != 1)
}

/// ±1 view: -1 exactly when the AND has weight 1.
pub fn hamming_sign(n: usize, k: usize, x: &[u64]) -> Result<i8> {
    Ok(if eval_hamming_neq1(n, k, x)? { 1 } else { -1 })
}

impl BooleanFunction {
    pub fn new(name: impl Into<String>, players: usize, bits: usize, kind: FunctionKind) -> Result<Self> {
        if players < 2 {
            return Err(Error::ArityMismatch(format!("need at least 2 players, got {players}")));
        }
        if bits == 0 || bits > 63 {
            return Err(Error::ArityMismatch(format!("bits per player must be in 1..=63, got {bits}")));
        }
        if let FunctionKind::TruthTable(table) = &kind {
            let expected = (1u128 << bits).checked_pow(players as u32);
            if expected != Some(table.len() as u128) {
                return Err(Error::ArityMismatch(format!(
                    "truth table has {} rows, expected (2^{bits})^{players}",
                    table.len()
                )));
            }
        }
        Ok(BooleanFunction { name: name.into(), players, bits, kind })
    }

    pub fn eq(n: usize, k: usize) -> Result<Self> {
        BooleanFunction::new("eq", k, n, FunctionKind::Eq)
    }

    pub fn gip(n: usize, k: usize) -> Result<Self> {
        BooleanFunction::new("gip", k, n, FunctionKind::Gip)
    }

    pub fn hamming_neq1(n: usize, k: usize) -> Result<Self> {
        BooleanFunction::new("hamming_neq1", k, n, FunctionKind::HammingNeq1)
    }

    pub fn constant(value: bool, n: usize, k: usize) -> Result<Self> {
        let name = if value { "const1" } else { "const0" };
        BooleanFunction::new(name, k, n, FunctionKind::Constant(value))
    }

    /// Registry lookup by CLI name.
    pub fn by_name(name: &str, n: usize, k: usize) -> Result<Self> {
        let kind = match name {
            "eq" => FunctionKind::Eq,
            "gip" => FunctionKind::Gip,
            "gip_abstract" => FunctionKind::GipAbstract,
            "hamming_neq1" => FunctionKind::HammingNeq1,
            "const0" => FunctionKind::Constant(false),
            "const1" => FunctionKind::Constant(true),
            other => return Err(Error::ArityMismatch(format!("unknown function `{other}`"))),
        };
        BooleanFunction::new(name, k, n, kind)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    /// Values per player, `2^n`.
    pub fn side(&self) -> usize {
        1 << self.bits
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.side(); self.players]
    }

    pub fn input_count(&self) -> usize {
        self.side().pow(self.players as u32)
    }

    pub fn eval(&self, x: &[u64]) -> Result<bool> {
        let (n, k) = (self.bits, self.players);
        match &self.kind {
            FunctionKind::Eq => eval_eq(n, k, x),
            FunctionKind::Gip => eval_gip(n, k, x),
            FunctionKind::GipAbstract => eval_gip_abstract(n, k, x),
            FunctionKind::HammingNeq1 => eval_hamming_neq1(n, k, x),
            FunctionKind::Constant(v) => check_args(n, k, x).map(|_| *v),
            FunctionKind::TruthTable(table) => {
                check_args(n, k, x)?;
                let flat = x.iter().fold(0usize, |acc, &v| acc * self.side() + v as usize);
                Ok(table[flat])
            }
        }
    }

    /// Input tuple at a row-major flat index.
    pub fn input_at(&self, flat: usize) -> Vec<u64> {
        unravel(flat, &self.dims()).into_iter().map(|v| v as u64).collect()
    }

    pub fn inputs(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..self.input_count()).map(|flat| self.input_at(flat))
    }

    /// Truth values in row-major input order.
    pub fn table(&self) -> Result<Vec<bool>> {
        check_size(&self.dims())?;
        self.inputs().map(|x| self.eval(&x)).collect()
    }
}

impl fmt::Display for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={}, k={})", self.name, self.bits, self.players)
    }
}

/// The 0/1 communication tensor of `f`.
pub fn canonical_tensor(f: &BooleanFunction) -> Result<DenseTensor> {
    let table = f.table()?;
    let entries = table
        .into_iter()
        .map(|b| if b { ExactComplex::one() } else { ExactComplex::zero() })
        .collect();
    DenseTensor::new(f.dims(), entries)
}

fn basis(side: usize, j: usize) -> Vec<ExactComplex> {
    let mut v = vec![ExactComplex::zero(); side];
    v[j] = ExactComplex::one();
    v
}

/// `2^n` terms `e_x ⊗ ⋯ ⊗ e_x`.
pub fn eq_nondet_decomposition(n: usize, k: usize) -> Result<Decomposition> {
    let f = BooleanFunction::eq(n, k)?;
    check_size(&f.dims())?;
    let side = f.side();
    let terms = (0..side).map(|x| vec![basis(side, x); k]).collect();
    Decomposition::new(f.dims(), terms)
}

/// One rank-1 indicator term per bit position plus an all-ones term scaled by
/// -1; the sum at `x` is `|x_1 ∧ ⋯ ∧ x_k| - 1`.
pub fn hamming_nondet_decomposition(n: usize, k: usize) -> Result<Decomposition> {
    let f = BooleanFunction::hamming_neq1(n, k)?;
    check_size(&f.dims())?;
    let side = f.side();
    let mut terms = Vec::with_capacity(n + 1);
    for pos in 0..n {
        let indicator: Vec<ExactComplex> = (0..side as u64)
            .map(|x| ExactComplex::from_int(bit_at(x, n, pos) as i64))
            .collect();
        terms.push(vec![indicator; k]);
    }
    let mut offset = vec![vec![ExactComplex::one(); side]; k];
    offset[0] = vec![ExactComplex::from_int(-1); side];
    terms.push(offset);
    Decomposition::new(f.dims(), terms)
}

/// Uniform nonzero Gaussian integer with both parts in `[-bound, bound]`.
pub fn random_nonzero_gaussian<R: Rng>(rng: &mut R, bound: i64) -> ExactComplex {
    loop {
        let re = rng.random_range(-bound..=bound);
        let im = rng.random_range(-bound..=bound);
        if re != 0 || im != 0 {
            return ExactComplex::gaussian(re, im);
        }
    }
}

/// Replaces every 1-entry of the communication tensor by a random nonzero
/// Gaussian integer; deterministic in `seed`.
pub fn random_nondet_substitution(f: &BooleanFunction, seed: u64, bound: i64) -> Result<DenseTensor> {
    let table = f.table()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = table
        .into_iter()
        .map(|b| if b { random_nonzero_gaussian(&mut rng, bound) } else { ExactComplex::zero() })
        .collect();
    DenseTensor::new(f.dims(), entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(bits: &str) -> u64 {
        u64::from_str_radix(bits, 2).unwrap()
    }

    #[test]
    fn eq_examples() {
        assert!(eval_eq(2, 3, &[s("01"), s("01"), s("01")]).unwrap());
        assert!(!eval_eq(2, 3, &[s("01"), s("01"), s("11")]).unwrap());
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(eval_eq(2, 2, &[x, y]).unwrap(), x == y);
            }
        }
    }

    #[test]
    fn gip_examples() {
        assert!(!eval_gip(2, 3, &[s("11"), s("11"), s("11")]).unwrap());
        assert!(eval_gip(2, 3, &[s("10"), s("10"), s("10")]).unwrap());
        for x in 0u64..4 {
            for y in 0u64..4 {
                let ip = ((x >> 1) * (y >> 1) + (x & 1) * (y & 1)) % 2 == 1;
                assert_eq!(eval_gip(2, 2, &[x, y]).unwrap(), ip);
            }
        }
    }

    #[test]
    fn gip_abstract_reading_differs() {
        // one player holds all ones
        assert!(eval_gip_abstract(2, 3, &[s("11"), s("00"), s("01")]).unwrap());
        assert!(!eval_gip(2, 3, &[s("11"), s("00"), s("01")]).unwrap());
    }

    #[test]
    fn hamming_examples() {
        assert!(eval_hamming_neq1(3, 3, &[s("110"), s("110"), s("110")]).unwrap());
        assert!(!eval_hamming_neq1(3, 3, &[s("100"), s("100"), s("100")]).unwrap());
        assert!(eval_hamming_neq1(3, 3, &[s("000"), s("111"), s("010")]).unwrap());
        assert_eq!(hamming_sign(3, 3, &[s("100"), s("100"), s("100")]).unwrap(), -1);
        assert_eq!(hamming_sign(3, 3, &[s("000"), s("100"), s("100")]).unwrap(), 1);
    }

    #[test]
    fn arity_errors() {
        assert!(matches!(eval_eq(2, 3, &[1, 1]), Err(Error::ArityMismatch(_))));
        assert!(matches!(eval_gip(2, 2, &[4, 1]), Err(Error::ArityMismatch(_))));
        assert!(BooleanFunction::by_name("nope", 1, 3).is_err());
        assert!(BooleanFunction::new("t", 2, 1, FunctionKind::TruthTable(vec![true; 3])).is_err());
    }

    #[test]
    fn canonical_tensor_examples() {
        let eq = canonical_tensor(&BooleanFunction::eq(1, 3).unwrap()).unwrap();
        let sd = crate::tensor::superdiagonal(2, &[ExactComplex::one(), ExactComplex::one()], 3).unwrap();
        assert_eq!(eq, sd);

        let gip = canonical_tensor(&BooleanFunction::gip(1, 3).unwrap()).unwrap();
        let nonzero: Vec<usize> =
            gip.entries().iter().enumerate().filter(|(_, z)| !z.is_zero()).map(|(i, _)| i).collect();
        assert_eq!(nonzero, vec![7]);
    }

    #[test]
    fn canonical_tensor_matches_evaluator() {
        for n in 1..=3 {
            for k in 2..=3 {
                for f in [
                    BooleanFunction::eq(n, k).unwrap(),
                    BooleanFunction::gip(n, k).unwrap(),
                    BooleanFunction::hamming_neq1(n, k).unwrap(),
                ] {
                    let t = canonical_tensor(&f).unwrap();
                    for (flat, x) in f.inputs().enumerate() {
                        let expected = if f.eval(&x).unwrap() { ExactComplex::one() } else { ExactComplex::zero() };
                        assert_eq!(t.entries()[flat], expected, "{f} at {x:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_tensor_size_cap() {
        let f = BooleanFunction::eq(10, 3).unwrap();
        assert!(matches!(canonical_tensor(&f), Err(Error::SizeCapExceeded { .. })));
        assert!(matches!(eq_nondet_decomposition(10, 3), Err(Error::SizeCapExceeded { .. })));
    }

    #[test]
    fn eq_decomposition_term_counts() {
        assert_eq!(eq_nondet_decomposition(1, 3).unwrap().term_count(), 2);
        assert_eq!(eq_nondet_decomposition(2, 3).unwrap().term_count(), 4);
        assert_eq!(eq_nondet_decomposition(3, 3).unwrap().term_count(), 8);
        let t = eq_nondet_decomposition(1, 3).unwrap().materialize().unwrap();
        assert_eq!(t, canonical_tensor(&BooleanFunction::eq(1, 3).unwrap()).unwrap());
    }

    #[test]
    fn hamming_decomposition_entries() {
        let d = hamming_nondet_decomposition(2, 3).unwrap();
        assert_eq!(d.term_count(), 3);
        let t = d.materialize().unwrap();
        // AND = 11
        assert_eq!(t.get(&[3, 3, 3]).unwrap(), &ExactComplex::from_int(1));
        // AND = 10
        assert_eq!(t.get(&[2, 3, 2]).unwrap(), &ExactComplex::zero());
        // AND = 00
        assert_eq!(t.get(&[1, 2, 3]).unwrap(), &ExactComplex::from_int(-1));
        for (flat, x) in BooleanFunction::hamming_neq1(2, 3).unwrap().inputs().enumerate() {
            let weight = x.iter().fold(3u64, |a, &v| a & v).count_ones() as i64;
            assert_eq!(t.entries()[flat], ExactComplex::from_int(weight - 1));
        }
    }

    #[test]
    fn substitution_examples() {
        let zero = BooleanFunction::constant(false, 2, 2).unwrap();
        assert!(random_nondet_substitution(&zero, 3, 8).unwrap().is_zero());

        let f = BooleanFunction::gip(2, 3).unwrap();
        let a = random_nondet_substitution(&f, 1, 8).unwrap();
        let b = random_nondet_substitution(&f, 2, 8).unwrap();
        assert_ne!(a, b);
        let pattern = |t: &DenseTensor| t.entries().iter().map(|z| z.is_zero()).collect::<Vec<_>>();
        assert_eq!(pattern(&a), pattern(&b));
        assert_eq!(a, random_nondet_substitution(&f, 1, 8).unwrap());
        for z in a.entries().iter().filter(|z| !z.is_zero()) {
            assert!(z.is_gaussian_integer());
            let (re, im) = (z.re.to_integer(), z.im.to_integer());
            assert!(re.magnitude() <= &8u32.into() && im.magnitude() <= &8u32.into());
        }
    }

    #[test]
    fn truth_table_function() {
        // 2 players, 1 bit: AND
        let f = BooleanFunction::new("and", 2, 1, FunctionKind::TruthTable(vec![false, false, false, true]))
            .unwrap();
        assert!(f.eval(&[1, 1]).unwrap());
        assert!(!f.eval(&[1, 0]).unwrap());
    }
}
