//! Text formats for matrices (`.mat`), tensors (`.tsr`), decompositions
//! (`.dec`) and truth tables. Readers report 1-based line numbers.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::functions::{BooleanFunction, FunctionKind};
use crate::matrix::{ExactMatrix, FloatMatrix};
use crate::protocol::scenario::{format_float_complex, parse_float_complex};
use crate::scalar::ExactComplex;
use crate::tensor::{check_size, ravel, Decomposition, DenseTensor};

/// Non-empty lines with their numbers; `#` starts a comment.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, toks)| !toks.is_empty())
}

fn next_line<'a>(
    lines: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    last: usize,
    what: &str,
) -> Result<(usize, Vec<&'a str>)> {
    lines.next().ok_or_else(|| Error::parse(last + 1, format!("unexpected end of file, expected {what}")))
}

fn num(line: usize, tok: &str, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| Error::parse(line, format!("{what} must be a non-negative integer, got `{tok}`")))
}

fn exact(line: usize, tok: &str) -> Result<ExactComplex> {
    tok.parse().map_err(|e| Error::parse(line, format!("bad exact scalar `{tok}`: {e}")))
}

fn rational(line: usize, tok: &str) -> Result<BigRational> {
    match exact(line, tok)? {
        ExactComplex { re, im } if im.is_zero() => Ok(re),
        _ => Err(Error::parse(line, format!("expected a rational, got `{tok}`"))),
    }
}

fn expect_len(line: usize, toks: &[&str], n: usize, what: &str) -> Result<()> {
    if toks.len() != n {
        return Err(Error::parse(line, format!("expected {n} {what}, got {}", toks.len())));
    }
    Ok(())
}

fn no_trailing<'a>(mut lines: impl Iterator<Item = (usize, Vec<&'a str>)>) -> Result<()> {
    match lines.next() {
        Some((no, _)) => Err(Error::parse(no, "unexpected trailing content")),
        None => Ok(()),
    }
}

fn join<T: ToString>(v: impl IntoIterator<Item = T>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn read_matrix<T>(text: &str, mut entry: impl FnMut(usize, &str) -> Result<T>) -> Result<crate::matrix::Matrix<T>> {
    let mut lines = content_lines(text);
    let (no, head) = next_line(&mut lines, 0, "`rows cols`")?;
    expect_len(no, &head, 2, "header fields")?;
    let (rows, cols) = (num(no, head[0], "rows")?, num(no, head[1], "cols")?);
    let mut data = Vec::with_capacity(rows * cols);
    let mut last = no;
    for _ in 0..rows {
        let (no, toks) = next_line(&mut lines, last, "a matrix row")?;
        expect_len(no, &toks, cols, "entries")?;
        for t in toks {
            data.push(entry(no, t)?);
        }
        last = no;
    }
    no_trailing(lines)?;
    crate::matrix::Matrix::new(rows, cols, data)
}

pub fn read_exact_matrix(text: &str) -> Result<ExactMatrix> {
    read_matrix(text, exact)
}

pub fn read_float_matrix(text: &str) -> Result<FloatMatrix> {
    read_matrix(text, |no, t| {
        parse_float_complex(t).ok_or_else(|| Error::parse(no, format!("bad complex number `{t}`")))
    })
}

pub fn write_exact_matrix(m: &ExactMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        let _ = writeln!(out, "{}", join(m.row(r)));
    }
    out
}

pub fn write_float_matrix(m: &FloatMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        let _ = writeln!(out, "{}", join(m.row(r).iter().map(|z| format_float_complex(*z))));
    }
    out
}

/// `.tsr`: order, dims, then `j_1 … j_k re im` per nonzero entry (0-based indices).
pub fn write_tensor(t: &DenseTensor) -> String {
    let mut out = format!("{}\n{}\n", t.order(), join(t.dims()));
    for (flat, z) in t.entries().iter().enumerate() {
        if !z.is_zero() {
            let idx = crate::tensor::unravel(flat, t.dims());
            let _ = writeln!(
                out,
                "{} {}/{} {}/{}",
                join(idx),
                z.re.numer(),
                z.re.denom(),
                z.im.numer(),
                z.im.denom()
            );
        }
    }
    out
}

pub fn read_tensor(text: &str) -> Result<DenseTensor> {
    let mut lines = content_lines(text);
    let (no, head) = next_line(&mut lines, 0, "the order")?;
    expect_len(no, &head, 1, "header fields")?;
    let order = num(no, head[0], "order")?;
    let (dno, dims_toks) = next_line(&mut lines, no, "the dimensions")?;
    expect_len(dno, &dims_toks, order, "dimensions")?;
    let dims = dims_toks.iter().map(|t| num(dno, t, "dimension")).collect::<Result<Vec<_>>>()?;
    check_size(&dims).map_err(|e| Error::parse(dno, e.to_string()))?;
    let mut t = DenseTensor::zeros(dims.clone()).map_err(|e| Error::parse(dno, e.to_string()))?;
    let mut seen = std::collections::HashSet::new();
    for (no, toks) in lines {
        expect_len(no, &toks, order + 2, "fields (indices, re, im)")?;
        let idx = toks[..order].iter().map(|s| num(no, s, "index")).collect::<Result<Vec<_>>>()?;
        if let Some(m) = (0..order).find(|&m| idx[m] >= dims[m]) {
            return Err(Error::parse(no, format!("index {} out of range for mode {} of size {}", idx[m], m + 1, dims[m])));
        }
        if !seen.insert(ravel(&idx, &dims)) {
            return Err(Error::parse(no, "duplicate entry"));
        }
        let z = ExactComplex::new(rational(no, toks[order])?, rational(no, toks[order + 1])?);
        t.set(&idx, z).map_err(|e| Error::parse(no, e.to_string()))?;
    }
    Ok(t)
}

/// `.dec`: `k d_1 … d_k r`, then `r` blocks of `k` vector lines.
pub fn write_decomposition(d: &Decomposition) -> String {
    let mut out = format!("{} {} {}\n", d.order(), join(d.dims()), d.term_count());
    for term in d.terms() {
        for v in term {
            let _ = writeln!(out, "{}", join(v));
        }
    }
    out
}

pub fn read_decomposition(text: &str) -> Result<Decomposition> {
    let mut lines = content_lines(text);
    let (no, head) = next_line(&mut lines, 0, "`k d_1 .. d_k r`")?;
    let order = num(no, head[0], "order")?;
    expect_len(no, &head, order + 2, "header fields")?;
    let dims = head[1..=order].iter().map(|t| num(no, t, "dimension")).collect::<Result<Vec<_>>>()?;
    let r = num(no, head[order + 1], "term count")?;
    let mut terms = Vec::with_capacity(r);
    let mut last = no;
    for _ in 0..r {
        let mut term = Vec::with_capacity(order);
        for &d in &dims {
            let (no, toks) = next_line(&mut lines, last, "a vector line")?;
            expect_len(no, &toks, d, "entries")?;
            term.push(toks.iter().map(|t| exact(no, t)).collect::<Result<Vec<_>>>()?);
            last = no;
        }
        terms.push(term);
    }
    no_trailing(lines)?;
    Decomposition::new(dims, terms).map_err(|e| Error::parse(no, e.to_string()))
}

/// One line per input: `x_1 … x_k bit`, each `x_i` an `n`-character bit string.
pub fn read_truth_table(name: &str, text: &str) -> Result<BooleanFunction> {
    let mut shape: Option<(usize, usize)> = None;
    let mut table: Vec<Option<bool>> = Vec::new();
    let mut first_line = 1;
    for (no, toks) in content_lines(text) {
        let (k, n) = match shape {
            Some(s) => s,
            None => {
                if toks.len() < 3 {
                    return Err(Error::parse(no, "expected at least two inputs and an output bit"));
                }
                let s = (toks.len() - 1, toks[0].len());
                if s.1 == 0 || s.1 > 20 {
                    return Err(Error::parse(no, "input strings must have 1..=20 bits"));
                }
                let size = check_size(&vec![1 << s.1; s.0]).map_err(|e| Error::parse(no, e.to_string()))?;
                table = vec![None; size];
                shape = Some(s);
                first_line = no;
                s
            }
        };
        expect_len(no, &toks, k + 1, "fields")?;
        let mut flat = 0usize;
        for t in &toks[..k] {
            if t.len() != n || !t.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::parse(no, format!("expected a {n}-bit string, got `{t}`")));
            }
            flat = (flat << n) | usize::from_str_radix(t, 2).expect("checked binary");
        }
        let bit = match toks[k] {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(no, format!("output must be 0 or 1, got `{other}`"))),
        };
        if table[flat].replace(bit).is_some() {
            return Err(Error::parse(no, "input listed twice"));
        }
    }
    let (k, n) = shape.ok_or_else(|| Error::parse(1, "empty truth table"))?;
    if let Some(missing) = table.iter().position(Option::is_none) {
        return Err(Error::parse(first_line, format!("{} of {} inputs missing, first at flat index {missing}",
            table.iter().filter(|b| b.is_none()).count(), table.len())));
    }
    let table = table.into_iter().map(|b| b.expect("complete")).collect();
    BooleanFunction::new(name, k, n, FunctionKind::TruthTable(table))
}

pub fn write_truth_table(f: &BooleanFunction) -> Result<String> {
    let n = f.bits();
    let mut out = String::new();
    for x in f.inputs() {
        let strs = x.iter().map(|v| format!("{v:0n$b}"));
        let _ = writeln!(out, "{} {}", join(strs), f.eval(&x)? as u8);
    }
    Ok(out)
}
