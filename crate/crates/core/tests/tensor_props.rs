mod common;

use num_traits::{One, Zero};
use proptest::prelude::*;

use nqtensor::functions::{canonical_tensor, eq_nondet_decomposition, hamming_nondet_decomposition, BooleanFunction};
use nqtensor::io::{read_decomposition, read_tensor, write_decomposition, write_tensor};
use nqtensor::matrix::exact_rank;
use nqtensor::rank_bounds::{pattern_check, rank_bracket, unfolding_ranks};
use nqtensor::scalar::ExactComplex;
use nqtensor::tensor::{outer_product, ravel, unravel, Decomposition, DenseTensor};

fn small_dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 2..=4)
}

fn tensor() -> impl Strategy<Value = DenseTensor> {
    small_dims().prop_flat_map(|dims| {
        let len: usize = dims.iter().product();
        prop::collection::vec((-3i64..=3, -3i64..=3), len).prop_map(move |v| {
            DenseTensor::new(dims.clone(), v.into_iter().map(|(a, b)| ExactComplex::gaussian(a, b)).collect()).unwrap()
        })
    })
}

fn decomposition() -> impl Strategy<Value = Decomposition> {
    (small_dims(), 0usize..=3).prop_flat_map(|(dims, r)| {
        let term = dims
            .iter()
            .map(|&d| prop::collection::vec((-2i64..=2, -2i64..=2), d))
            .collect::<Vec<_>>();
        prop::collection::vec(term, r).prop_map(move |terms| {
            let terms = terms
                .into_iter()
                .map(|t| t.into_iter().map(|v| v.into_iter().map(|(a, b)| ExactComplex::gaussian(a, b)).collect()).collect())
                .collect();
            Decomposition::new(dims.clone(), terms).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ravel_inverts_unravel(dims in small_dims(), seed in 0usize..10_000) {
        let flat = seed % dims.iter().product::<usize>();
        prop_assert_eq!(ravel(&unravel(flat, &dims), &dims), flat);
    }

    #[test]
    fn unfolding_places_every_entry(t in tensor(), pick in 0usize..4) {
        let mode = pick % t.order();
        let m = t.unfold(mode).unwrap();
        let dims = t.dims().to_vec();
        prop_assert_eq!(m.rows(), dims[mode]);
        prop_assert_eq!(m.rows() * m.cols(), t.len());
        for flat in 0..t.len() {
            let idx = unravel(flat, &dims);
            // column: remaining indices, lexicographic, last fastest
            let mut col = 0;
            for (m2, &d) in dims.iter().enumerate() {
                if m2 != mode {
                    col = col * d + idx[m2];
                }
            }
            prop_assert_eq!(m.get(idx[mode], col), &t.entries()[flat]);
        }
    }

    #[test]
    fn fibers_are_unfolding_columns(t in tensor()) {
        let m = t.unfold(0).unwrap();
        let rest: Vec<usize> = t.dims()[1..].to_vec();
        for col in 0..m.cols() {
            let fixed = unravel(col, &rest);
            prop_assert_eq!(t.fiber(0, &fixed).unwrap(), m.column(col));
        }
    }

    #[test]
    fn group_matrization_is_a_reshape(t in tensor(), pick in 1usize..4) {
        let split = 1 + pick % (t.order() - 1);
        let m = t.group_matrize(split).unwrap();
        prop_assert_eq!(m.rows(), t.dims()[..split].iter().product::<usize>());
        prop_assert_eq!(m.data(), t.entries());
    }

    #[test]
    fn materialization_is_sum_of_outer_products(d in decomposition()) {
        let t = d.materialize().unwrap();
        let mut sum = DenseTensor::zeros(d.dims().to_vec()).unwrap();
        for term in d.terms() {
            let p = outer_product(term).unwrap();
            for flat in 0..sum.len() {
                let idx = unravel(flat, d.dims());
                let v = sum.get(&idx).unwrap() + p.get(&idx).unwrap();
                sum.set(&idx, v).unwrap();
            }
        }
        prop_assert_eq!(t, sum);
    }

    #[test]
    fn unfolding_rank_bounded_by_term_count(d in decomposition()) {
        let t = d.materialize().unwrap();
        let b = rank_bracket(&t, Some(&d)).unwrap();
        prop_assert!(b.lower <= b.upper);
        prop_assert!(b.upper <= d.term_count());
        prop_assert!(unfolding_ranks(&t).unwrap().into_iter().all(|r| r <= d.term_count()));
    }

    #[test]
    fn outer_products_have_rank_at_most_one(vs in prop::collection::vec(prop::collection::vec((-2i64..=2, -2i64..=2), 1..=3), 2..=4)) {
        let vectors: Vec<Vec<ExactComplex>> =
            vs.into_iter().map(|v| v.into_iter().map(|(a, b)| ExactComplex::gaussian(a, b)).collect()).collect();
        let t = outer_product(&vectors).unwrap();
        let expected = if t.is_zero() { 0 } else { 1 };
        for r in unfolding_ranks(&t).unwrap() {
            prop_assert_eq!(r, expected);
        }
    }

    #[test]
    fn lifting_keeps_slices_constant(d in decomposition(), extra in 1usize..=3) {
        let base = d.materialize().unwrap();
        let lifted = d.lift_order(extra).materialize().unwrap();
        prop_assert_eq!(lifted.order(), base.order() + 1);
        for flat in 0..base.len() {
            let idx = unravel(flat, base.dims());
            for e in 0..extra {
                let mut j = idx.clone();
                j.push(e);
                prop_assert_eq!(lifted.get(&j).unwrap(), base.get(&idx).unwrap());
            }
        }
    }

    #[test]
    fn scaling_preserves_ranks(t in tensor(), re in 1i64..4, im in -3i64..4) {
        let c = ExactComplex::gaussian(re, im);
        let s = t.scale(&c);
        prop_assert_eq!(unfolding_ranks(&s).unwrap(), unfolding_ranks(&t).unwrap());
        prop_assert_eq!(rank_bracket(&s, None).unwrap(), rank_bracket(&t, None).unwrap());
    }

    #[test]
    fn text_formats_round_trip(t in tensor(), d in decomposition()) {
        prop_assert_eq!(read_tensor(&write_tensor(&t)).unwrap(), t);
        prop_assert_eq!(read_decomposition(&write_decomposition(&d)).unwrap(), d);
    }
}

#[test]
fn slice_of_eq_tensor_is_identity_or_zero() {
    let t = canonical_tensor(&BooleanFunction::eq(2, 3).unwrap()).unwrap();
    for fixed in 0..4 {
        let s = t.slice(0, 1, &[fixed]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j && j == fixed { ExactComplex::one() } else { ExactComplex::zero() };
                assert_eq!(s.get(i, j), &want);
            }
        }
    }
}

#[test]
fn constructions_match_their_functions() {
    for n in 1..=3 {
        for k in 3..=4 {
            let f = BooleanFunction::eq(n, k).unwrap();
            let t = eq_nondet_decomposition(n, k).unwrap().materialize().unwrap();
            assert!(pattern_check(&t, &f).unwrap());
            assert_eq!(rank_bracket(&t, None).unwrap().lower, 1 << n);
        }
        let f = BooleanFunction::hamming_neq1(n, 3).unwrap();
        let d = hamming_nondet_decomposition(n, 3).unwrap();
        assert_eq!(d.term_count(), n + 1);
        let t = d.materialize().unwrap();
        assert!(pattern_check(&t, &f).unwrap());
        for x in common::all_inputs(n, 3) {
            let idx: Vec<usize> = x.iter().map(|&v| v as usize).collect();
            assert_eq!(!t.get(&idx).unwrap().is_zero(), common::hamming_neq1_oracle(&x, n));
        }
    }
}

#[test]
fn mode_one_unfolding_of_eq_is_diagonal() {
    let t = canonical_tensor(&BooleanFunction::eq(2, 3).unwrap()).unwrap();
    let m = t.unfold(0).unwrap();
    assert_eq!((m.rows(), m.cols()), (4, 16));
    for x in 0..4 {
        assert_eq!(m.get(x, x * 4 + x), &ExactComplex::one());
    }
    assert_eq!(exact_rank(&m), 4);
}
