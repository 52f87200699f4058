//! Dense order-k tensors, rank-1 decompositions and their matrizations.
//!
//! Storage is row-major with the last index fastest. Modes are 0-based in this
//! API; mode-`i` unfoldings order their columns lexicographically over the
//! remaining modes in ascending mode order.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::ExactMatrix;
use crate::scalar::ExactComplex;

/// Default cap on dense tensor entries; `NQTENSOR_SIZE_CAP` overrides it.
pub const DEFAULT_SIZE_CAP: usize = 1 << 24;

pub fn size_cap() -> usize {
    std::env::var("NQTENSOR_SIZE_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_SIZE_CAP)
}

/// Fails with `SizeCapExceeded` when `Π dims` is above the configured cap.
pub fn check_size(dims: &[usize]) -> Result<usize> {
    let cap = size_cap();
    let entries = dims.iter().try_fold(1u128, |acc, &d| acc.checked_mul(d as u128));
    match entries {
        Some(e) if e <= cap as u128 => Ok(e as usize),
        Some(e) => Err(Error::SizeCapExceeded { entries: e, cap }),
        None => Err(Error::SizeCapExceeded { entries: u128::MAX, cap }),
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Mixed-radix decoding of a flat row-major index.
pub fn unravel(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        idx[i] = flat % dims[i];
        flat /= dims[i];
    }
    idx
}

pub fn ravel(index: &[usize], dims: &[usize]) -> usize {
    index.iter().zip(dims).fold(0, |acc, (&j, &d)| acc * d + j)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    entries: Vec<ExactComplex>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, entries: Vec<ExactComplex>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::DimMismatch(format!("tensor order must be >= 2, got {}", dims.len())));
        }
        let len = check_size(&dims)?;
        if entries.len() != len {
            return Err(Error::DimMismatch(format!(
                "dims {dims:?} need {len} entries, got {}",
                entries.len()
            )));
        }
        Ok(DenseTensor { dims, entries })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = check_size(&dims)?;
        DenseTensor::new(dims, vec![ExactComplex::zero(); len])
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> ExactComplex) -> Result<Self> {
        let len = check_size(&dims)?;
        let entries = (0..len).map(|flat| f(&unravel(flat, &dims))).collect();
        DenseTensor::new(dims, entries)
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &[ExactComplex] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_index(&self, index: &[usize]) -> Result<()> {
        if index.len() != self.order() || index.iter().zip(&self.dims).any(|(&j, &d)| j >= d) {
            return Err(Error::IndexOutOfRange(format!("{index:?} for dims {:?}", self.dims)));
        }
        Ok(())
    }

    pub fn get(&self, index: &[usize]) -> Result<&ExactComplex> {
        self.check_index(index)?;
        Ok(&self.entries[ravel(index, &self.dims)])
    }

    pub fn set(&mut self, index: &[usize], value: ExactComplex) -> Result<()> {
        self.check_index(index)?;
        let flat = ravel(index, &self.dims);
        self.entries[flat] = value;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, c: &ExactComplex) -> DenseTensor {
        DenseTensor { dims: self.dims.clone(), entries: self.entries.iter().map(|z| z * c).collect() }
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.order() {
            return Err(Error::IndexOutOfRange(format!("mode {mode} of an order-{} tensor", self.order())));
        }
        Ok(())
    }

    /// Mode-`mode` fiber; `fixed` lists the other `k - 1` indices in mode order.
    pub fn fiber(&self, mode: usize, fixed: &[usize]) -> Result<Vec<ExactComplex>> {
        self.check_mode(mode)?;
        if fixed.len() + 1 != self.order() {
            return Err(Error::IndexOutOfRange(format!(
                "fiber of an order-{} tensor needs {} fixed indices, got {}",
                self.order(),
                self.order() - 1,
                fixed.len()
            )));
        }
        let mut index: Vec<usize> = fixed.to_vec();
        index.insert(mode, 0);
        self.check_index(&index)?;
        let stride = strides(&self.dims)[mode];
        let base = ravel(&index, &self.dims);
        Ok((0..self.dims[mode]).map(|j| self.entries[base + j * stride].clone()).collect())
    }

    /// Slice over modes `free_a < free_b`; rows run over `free_a`.
    pub fn slice(&self, free_a: usize, free_b: usize, fixed: &[usize]) -> Result<ExactMatrix> {
        self.check_mode(free_a)?;
        self.check_mode(free_b)?;
        if free_a >= free_b {
            return Err(Error::IndexOutOfRange(format!("slice modes must satisfy {free_a} < {free_b}")));
        }
        if fixed.len() + 2 != self.order() {
            return Err(Error::IndexOutOfRange(format!(
                "slice of an order-{} tensor needs {} fixed indices, got {}",
                self.order(),
                self.order() - 2,
                fixed.len()
            )));
        }
        let mut index = fixed.to_vec();
        index.insert(free_a, 0);
        index.insert(free_b, 0);
        self.check_index(&index)?;
        let st = strides(&self.dims);
        let base = ravel(&index, &self.dims);
        Ok(ExactMatrix::from_fn(self.dims[free_a], self.dims[free_b], |a, b| {
            self.entries[base + a * st[free_a] + b * st[free_b]].clone()
        }))
    }

    /// Mode-`mode` unfolding: `d_mode × (Π d / d_mode)`, columns are the mode fibers.
    pub fn unfold(&self, mode: usize) -> Result<ExactMatrix> {
        self.check_mode(mode)?;
        let rest: Vec<usize> =
            self.dims.iter().enumerate().filter(|&(i, _)| i != mode).map(|(_, &d)| d).collect();
        let cols: usize = rest.iter().product();
        let st = strides(&self.dims);
        let mut m = ExactMatrix::zeros(self.dims[mode], cols);
        for c in 0..cols {
            let mut index = unravel(c, &rest);
            index.insert(mode, 0);
            let base = ravel(&index, &self.dims);
            for j in 0..self.dims[mode] {
                m.set(j, c, self.entries[base + j * st[mode]].clone());
            }
        }
        Ok(m)
    }

    /// Rows indexed by modes `0..split`, columns by `split..k`.
    pub fn group_matrize(&self, split: usize) -> Result<ExactMatrix> {
        if split == 0 || split >= self.order() {
            return Err(Error::IndexOutOfRange(format!(
                "split {split} must lie in 1..{}",
                self.order()
            )));
        }
        let rows: usize = self.dims[..split].iter().product();
        let cols: usize = self.dims[split..].iter().product();
        ExactMatrix::new(rows, cols, self.entries.clone())
    }
}

/// An order-k tensor whose entries are the products of components.
pub fn outer_product(vectors: &[Vec<ExactComplex>]) -> Result<DenseTensor> {
    if vectors.len() < 2 {
        return Err(Error::DimMismatch("outer product needs at least two vectors".into()));
    }
    if vectors.iter().any(Vec::is_empty) {
        return Err(Error::DimMismatch("outer product of an empty vector".into()));
    }
    let dims: Vec<usize> = vectors.iter().map(Vec::len).collect();
    DenseTensor::from_fn(dims, |idx| {
        idx.iter().zip(vectors).fold(ExactComplex::one(), |acc, (&j, v)| &acc * &v[j])
    })
}

pub fn superdiagonal(side: usize, diag: &[ExactComplex], order: usize) -> Result<DenseTensor> {
    if diag.len() != side {
        return Err(Error::DimMismatch(format!("diagonal of length {} for side {side}", diag.len())));
    }
    let mut t = DenseTensor::zeros(vec![side; order])?;
    for (j, d) in diag.iter().enumerate() {
        t.set(&vec![j; order], d.clone())?;
    }
    Ok(t)
}

/// A sum of rank-1 terms; each term holds one vector per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    dims: Vec<usize>,
    terms: Vec<Vec<Vec<ExactComplex>>>,
}

impl Decomposition {
    pub fn new(dims: Vec<usize>, terms: Vec<Vec<Vec<ExactComplex>>>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::DimMismatch(format!("order must be >= 2, got {}", dims.len())));
        }
        for (t, term) in terms.iter().enumerate() {
            if term.len() != dims.len() {
                return Err(Error::DimMismatch(format!(
                    "term {t} has {} vectors, order is {}",
                    term.len(),
                    dims.len()
                )));
            }
            for (mode, (v, &d)) in term.iter().zip(&dims).enumerate() {
                if v.len() != d {
                    return Err(Error::DimMismatch(format!(
                        "term {t} mode {mode}: vector length {} vs dim {d}",
                        v.len()
                    )));
                }
            }
        }
        Ok(Decomposition { dims, terms })
    }

    pub fn empty(dims: Vec<usize>) -> Result<Self> {
        Decomposition::new(dims, Vec::new())
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn terms(&self) -> &[Vec<Vec<ExactComplex>>] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn materialize(&self) -> Result<DenseTensor> {
        let mut t = DenseTensor::zeros(self.dims.clone())?;
        for term in &self.terms {
            for (flat, entry) in t.entries.iter_mut().enumerate() {
                let idx = unravel(flat, &self.dims);
                let mut prod = ExactComplex::one();
                for (v, &j) in term.iter().zip(&idx) {
                    if v[j].is_zero() {
                        prod = ExactComplex::zero();
                        break;
                    }
                    prod = &prod * &v[j];
                }
                if !prod.is_zero() {
                    *entry = &*entry + &prod;
                }
            }
        }
        Ok(t)
    }

    /// Adds a mode of length `extra_len` carrying the all-ones vector in every
    /// term, so the lifted tensor is constant along the new mode.
    pub fn lift_order(&self, extra_len: usize) -> Decomposition {
        let mut dims = self.dims.clone();
        dims.push(extra_len);
        let terms = self
            .terms
            .iter()
            .map(|term| {
                let mut term = term.clone();
                term.push(vec![ExactComplex::one(); extra_len]);
                term
            })
            .collect();
        Decomposition { dims, terms }
    }

    /// Splits a superdiagonal into its diagonal units, skipping zero entries.
    pub fn from_superdiagonal(diag: &[ExactComplex], order: usize) -> Result<Decomposition> {
        let side = diag.len();
        let terms = diag
            .iter()
            .enumerate()
            .filter(|(_, d)| !d.is_zero())
            .map(|(j, d)| {
                (0..order)
                    .map(|mode| {
                        let mut v = vec![ExactComplex::zero(); side];
                        v[j] = if mode == 0 { d.clone() } else { ExactComplex::one() };
                        v
                    })
                    .collect()
            })
            .collect();
        Decomposition::new(vec![side; order], terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::exact_rank;

    fn ints(v: &[i64]) -> Vec<ExactComplex> {
        v.iter().map(|&x| ExactComplex::from_int(x)).collect()
    }

    fn eq3() -> DenseTensor {
        superdiagonal(2, &ints(&[1, 1]), 3).unwrap()
    }

    #[test]
    fn outer_product_examples() {
        let t = outer_product(&[ints(&[1, 0]), ints(&[1, 0]), ints(&[1, 0])]).unwrap();
        assert_eq!(t.entries().iter().filter(|z| !z.is_zero()).count(), 1);
        assert_eq!(t.get(&[0, 0, 0]).unwrap(), &ExactComplex::one());

        let t = outer_product(&[ints(&[1, 1]), ints(&[1, 1])]).unwrap();
        assert!(t.entries().iter().all(|z| *z == ExactComplex::one()));

        let t = outer_product(&[ints(&[1, 2]), ints(&[3, 0]), ints(&[1, 1])]).unwrap();
        assert_eq!(t.get(&[1, 0, 1]).unwrap(), &ExactComplex::from_int(6));
    }

    #[test]
    fn outer_product_rejects_bad_input() {
        assert!(outer_product(&[ints(&[1])]).is_err());
        assert!(outer_product(&[ints(&[1]), vec![]]).is_err());
    }

    #[test]
    fn materialize_examples() {
        let d = Decomposition::empty(vec![2, 3]).unwrap();
        assert!(d.materialize().unwrap().is_zero());

        let term = vec![ints(&[1, 2]), ints(&[3, 0, 1])];
        let d = Decomposition::new(vec![2, 3], vec![term.clone()]).unwrap();
        assert_eq!(d.materialize().unwrap(), outer_product(&term).unwrap());

        let d = Decomposition::from_superdiagonal(&ints(&[1, 1]), 3).unwrap();
        assert_eq!(d.term_count(), 2);
        assert_eq!(d.materialize().unwrap(), eq3());
    }

    #[test]
    fn decomposition_rejects_dim_mismatch() {
        let r = Decomposition::new(vec![2, 2], vec![vec![ints(&[1, 1]), ints(&[1])]]);
        assert!(matches!(r, Err(Error::DimMismatch(_))));
        let r = Decomposition::new(vec![2, 2], vec![vec![ints(&[1, 1])]]);
        assert!(matches!(r, Err(Error::DimMismatch(_))));
    }

    #[test]
    fn fiber_examples() {
        let t = eq3();
        assert_eq!(t.fiber(0, &[0, 0]).unwrap(), ints(&[1, 0]));
        assert_eq!(t.fiber(0, &[0, 1]).unwrap(), ints(&[0, 0]));
        let ones = outer_product(&[ints(&[1, 1]), ints(&[1, 1]), ints(&[1, 1])]).unwrap();
        for mode in 0..3 {
            assert_eq!(ones.fiber(mode, &[1, 0]).unwrap(), ints(&[1, 1]));
        }
        assert!(matches!(t.fiber(0, &[2, 0]), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(t.fiber(3, &[0, 0]), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn slice_examples() {
        let z = DenseTensor::zeros(vec![2, 3, 2]).unwrap();
        let s = z.slice(0, 2, &[1]).unwrap();
        assert_eq!((s.rows(), s.cols()), (2, 2));
        assert!(s.data().iter().all(Zero::is_zero));

        let t = outer_product(&[ints(&[1, 2]), ints(&[3, 4, 5]), ints(&[1, -1])]).unwrap();
        let s = t.slice(0, 1, &[1]).unwrap();
        assert_eq!(exact_rank(&s), 1);
        assert_eq!(s.get(1, 2), &ExactComplex::from_int(-10));
        assert!(t.slice(1, 0, &[0]).is_err());
    }

    #[test]
    fn unfold_superdiagonal_mode_one() {
        let m = eq3().unfold(0).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 4));
        let cols: Vec<_> = (0..4).map(|c| m.column(c)).collect();
        assert_eq!(cols, vec![ints(&[1, 0]), ints(&[0, 0]), ints(&[0, 0]), ints(&[0, 1])]);
    }

    #[test]
    fn unfold_column_order_is_lexicographic() {
        let t = DenseTensor::from_fn(vec![2, 3, 4], |i| ExactComplex::from_int(ravel(i, &[2, 3, 4]) as i64))
            .unwrap();
        let m = t.unfold(1).unwrap();
        // column c enumerates (j_0, j_2) with j_2 fastest
        for c in 0..8 {
            let (j0, j2) = (c / 4, c % 4);
            for j1 in 0..3 {
                assert_eq!(m.get(j1, c), t.get(&[j0, j1, j2]).unwrap());
            }
        }
    }

    #[test]
    fn unfold_of_outer_product_has_rank_one() {
        let t = outer_product(&[ints(&[1, 2]), ints(&[0, 3, 1]), ints(&[2, -1])]).unwrap();
        for mode in 0..3 {
            assert_eq!(exact_rank(&t.unfold(mode).unwrap()), 1);
        }
    }

    #[test]
    fn group_matrize_examples() {
        let t = DenseTensor::from_fn(vec![2, 3], |i| ExactComplex::from_int((i[0] * 3 + i[1]) as i64)).unwrap();
        assert_eq!(t.group_matrize(1).unwrap(), t.unfold(0).unwrap());

        let s = superdiagonal(2, &ints(&[1, 1]), 4).unwrap();
        let m = s.group_matrize(2).unwrap();
        assert_eq!((m.rows(), m.cols()), (4, 4));
        let nonzero: Vec<_> = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| !m.get(i, j).is_zero())
            .collect();
        assert_eq!(nonzero, vec![(0, 0), (3, 3)]);
        assert!(s.group_matrize(0).is_err());
        assert!(s.group_matrize(4).is_err());
    }

    #[test]
    fn lift_order_keeps_term_count_and_constant_slices() {
        let d = Decomposition::new(vec![2, 2], vec![vec![ints(&[1, 2]), ints(&[3, -1])]]).unwrap();
        let lifted = d.lift_order(2);
        assert_eq!(lifted.order(), 3);
        let t = lifted.materialize().unwrap();
        let base = d.materialize().unwrap();
        for x in 0..2 {
            let mut fixed_slice = ExactMatrix::zeros(2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    fixed_slice.set(i, j, t.get(&[i, j, x]).unwrap().clone());
                }
            }
            assert_eq!(fixed_slice, base.group_matrize(1).unwrap());
        }

        let eq = Decomposition::from_superdiagonal(&ints(&[1, 1]), 3).unwrap().lift_order(2);
        assert_eq!(eq.order(), 4);
        assert_eq!(eq.term_count(), 2);
    }

    #[test]
    fn superdiagonal_examples() {
        assert!(superdiagonal(2, &ints(&[0, 0]), 3).unwrap().is_zero());
        let t = superdiagonal(3, &ints(&[2, 0, 5]), 3).unwrap();
        assert_eq!(exact_rank(&t.unfold(0).unwrap()), 2);
        assert!(superdiagonal(2, &ints(&[1]), 3).is_err());
    }

    #[test]
    fn size_cap_is_enforced() {
        assert!(matches!(DenseTensor::zeros(vec![1 << 13, 1 << 13]), Err(Error::SizeCapExceeded { .. })));
    }
}
