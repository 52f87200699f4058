//! SVD-compressed NOF protocol built from a nondeterministic tensor.
//!
//! The tensor (lifted by one dummy mode when `k` is odd) is group-matrized as
//! `M = U Σ V` with rows `(x_1, …, x_s)` and columns `(x_{s+1}, …, x_k[, dummy])`.
//! Player 1 sees the column half and sends `c·ΣV|col⟩`, which lives in the
//! first `r` coordinates and so fits in `⌈log₂ r⌉` qubits. Player `k` sees
//! the row half, applies `U`, and writes 1 on the channel iff it measures
//! `|row⟩`, which happens with probability `|c|²|T[x]|²`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functions::BooleanFunction;
use crate::matrix::{svd, to_float, ExactMatrix, Svd};
use crate::rank_bounds::pattern_check;
use crate::scalar::FloatComplex;
use crate::tensor::{ravel, Decomposition};

/// Acceptance threshold `ε₀`.
pub const ACCEPT_THRESHOLD: f64 = 1e-9;
/// Allowed gap between simulated and analytic probabilities.
pub const ANALYTIC_TOLERANCE: f64 = 1e-9;
/// Largest probability tolerated on a 0-input.
pub const ZERO_INPUT_CEILING: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct NofProtocol {
    function: BooleanFunction,
    lifted: bool,
    split: usize,
    dummy: usize,
    term_count: usize,
    matrix: ExactMatrix,
    svd: Svd,
    rank: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcceptanceResult {
    pub probability: f64,
    pub accepted: bool,
    pub qubit_cost: usize,
    pub analytic_probability: f64,
}

fn ceil_log2(r: usize) -> usize {
    if r <= 1 {
        0
    } else {
        (usize::BITS - (r - 1).leading_zeros()) as usize
    }
}

impl NofProtocol {
    pub fn source(&self) -> String {
        self.function.to_string()
    }

    pub fn function(&self) -> &BooleanFunction {
        &self.function
    }

    pub fn lifted(&self) -> bool {
        self.lifted
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn dummy(&self) -> usize {
        self.dummy
    }

    /// Value of the lifted dummy index used at run time (0 or 1).
    pub fn with_dummy(mut self, dummy: usize) -> Result<Self> {
        if dummy > 1 {
            return Err(Error::InvalidArgument(format!("dummy index must be 0 or 1, got {dummy}")));
        }
        self.dummy = dummy;
        Ok(self)
    }

    pub fn term_count(&self) -> usize {
        self.term_count
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.matrix
    }

    pub fn svd(&self) -> &Svd {
        &self.svd
    }

    /// Singular values above the zero threshold.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Size of the compressed register, `⌈log₂ r⌉`.
    pub fn register_qubits(&self) -> usize {
        ceil_log2(self.rank)
    }

    /// Register plus the final channel qubit.
    pub fn qubit_cost(&self) -> usize {
        self.register_qubits() + 1
    }

    fn indices(&self, inputs: &[u64]) -> (usize, usize) {
        let side = self.function.side();
        let row_dims = vec![side; self.split];
        let row: Vec<usize> = inputs[..self.split].iter().map(|&x| x as usize).collect();
        let mut col: Vec<usize> = inputs[self.split..].iter().map(|&x| x as usize).collect();
        let mut col_dims = vec![side; col.len()];
        if self.lifted {
            col.push(self.dummy);
            col_dims.push(2);
        }
        (ravel(&row, &row_dims), ravel(&col, &col_dims))
    }

    /// Whether some input in column `col` is a 1-input of the function.
    fn column_has_one(&self, col: usize) -> bool {
        (0..self.matrix.rows()).any(|row| !self.matrix.get(row, col).is_zero())
    }
}

pub fn build_nof_protocol(d: &Decomposition, f: &BooleanFunction) -> Result<NofProtocol> {
    let tensor = d.materialize()?;
    if !pattern_check(&tensor, f)? {
        return Err(Error::PatternMismatch(f.to_string()));
    }
    let k = f.players();
    let lifted = k % 2 == 1;
    let (tensor, split) = if lifted {
        (d.lift_order(2).materialize()?, (k + 1) / 2)
    } else {
        (tensor, k / 2)
    };
    let matrix = tensor.group_matrize(split)?;
    let svd = svd(&to_float(&matrix)?.matrix)?;
    let rank = svd.numerical_rank();
    Ok(NofProtocol {
        function: f.clone(),
        lifted,
        split,
        dummy: 0,
        term_count: d.term_count(),
        matrix,
        svd,
        rank,
    })
}

pub fn run_nof(p: &NofProtocol, inputs: &[u64]) -> Result<AcceptanceResult> {
    let f = &p.function;
    if inputs.len() != f.players() || inputs.iter().any(|&x| x >> f.bits() != 0) {
        return Err(Error::ArityMismatch(format!("inputs {inputs:?} for {f}")));
    }
    let (row, col) = p.indices(inputs);

    // exact |c|²|T[x]|²
    let column_norm: BigRational = (0..p.matrix.rows())
        .map(|i| p.matrix.get(i, col).norm_sqr())
        .fold(BigRational::zero(), |acc, v| acc + v);
    let analytic_probability = if column_norm.is_zero() {
        0.0
    } else {
        (p.matrix.get(row, col).norm_sqr() / column_norm).to_f64().unwrap_or(f64::NAN)
    };

    // player 1: ΣV|col⟩ restricted to the r retained singular values
    let r = p.rank;
    let message: Vec<FloatComplex> = (0..r).map(|i| p.svd.v.get(i, col) * p.svd.sigma[i]).collect();
    let norm = message.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let qubit_cost = p.qubit_cost();
    if norm <= p.svd.zero_threshold() {
        if p.column_has_one(col) {
            return Err(Error::Normalization(col));
        }
        return Ok(AcceptanceResult { probability: 0.0, accepted: false, qubit_cost, analytic_probability });
    }
    let mut register = vec![Complex64::new(0.0, 0.0); 1 << p.register_qubits()];
    for (slot, z) in register.iter_mut().zip(&message) {
        *slot = z / norm;
    }

    // player k: decode, apply U, project on |row⟩
    let amplitude: FloatComplex = (0..r).map(|i| p.svd.u.get(row, i) * register[i]).sum();
    let probability = amplitude.norm_sqr();
    Ok(AcceptanceResult {
        probability,
        accepted: probability > ACCEPT_THRESHOLD,
        qubit_cost,
        analytic_probability,
    })
}

/// Exhaustive strong-nondeterminism sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub inputs: usize,
    /// Inputs where acceptance disagrees with `f`.
    pub wrong_decisions: Vec<Vec<u64>>,
    pub min_accept_on_ones: Option<f64>,
    pub max_accept_on_zeros: Option<f64>,
    pub max_analytic_gap: f64,
    pub results: Vec<AcceptanceResult>,
}

impl SweepReport {
    pub fn decisions_correct(&self) -> bool {
        self.wrong_decisions.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.decisions_correct()
            && self.max_analytic_gap <= ANALYTIC_TOLERANCE
            && self.max_accept_on_zeros.is_none_or(|p| p <= ZERO_INPUT_CEILING)
    }
}

pub fn strong_nondet_check(p: &NofProtocol, f: &BooleanFunction) -> Result<SweepReport> {
    if f.dims() != p.function.dims() {
        return Err(Error::DimMismatch(format!("{f} vs protocol for {}", p.function)));
    }
    let rows: Vec<(Vec<u64>, bool, AcceptanceResult)> = (0..f.input_count())
        .into_par_iter()
        .map(|flat| {
            let x = f.input_at(flat);
            let value = f.eval(&x)?;
            let res = run_nof(p, &x)?;
            Ok((x, value, res))
        })
        .collect::<Result<_>>()?;

    let mut report = SweepReport {
        inputs: rows.len(),
        wrong_decisions: Vec::new(),
        min_accept_on_ones: None,
        max_accept_on_zeros: None,
        max_analytic_gap: 0.0,
        results: Vec::with_capacity(rows.len()),
    };
    for (x, value, res) in rows {
        if res.accepted != value {
            report.wrong_decisions.push(x);
        }
        if value {
            report.min_accept_on_ones =
                Some(report.min_accept_on_ones.map_or(res.probability, |m| m.min(res.probability)));
        } else {
            report.max_accept_on_zeros =
                Some(report.max_accept_on_zeros.map_or(res.probability, |m| m.max(res.probability)));
        }
        report.max_analytic_gap = report.max_analytic_gap.max((res.probability - res.analytic_probability).abs());
        report.results.push(res);
    }
    Ok(report)
}
