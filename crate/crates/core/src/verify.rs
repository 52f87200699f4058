//! Desk-scale verification suite. Each criterion yields a verdict, a one-line
//! summary and detail rows; the combined report carries no timings so two runs
//! with the same configuration produce identical bytes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functions::{
    canonical_tensor, eq_nondet_decomposition, hamming_nondet_decomposition, random_nondet_substitution,
    BooleanFunction, DEFAULT_SUBSTITUTION_BOUND,
};
use crate::matrix::{exact_rank, svd, to_float};
use crate::protocol::{
    build_nof_protocol, coefficient_search, grouped_families, nih_rank_certificate, random_protocol, run_nof,
    simulate_branches_traced, simulate_dense, strong_nondet_check, trivial_eq_nih, Mode,
    NihOptions,
};
use crate::rank_bounds::{gip_certificate_canonical, mode1_rank, rank_bracket, summation_bound};
use crate::report::{Report, Source, Verdict};
use crate::seed::derive_seed;
use crate::tensor::{unravel, Decomposition};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// `(n, k)` pairs for the GIP certificate.
    pub gip_cases: Vec<(usize, usize)>,
    pub substitutions: usize,
    pub random_protocols: usize,
    pub nih_seeds: usize,
    /// `None` means `k·n + 1`.
    pub set_size_exponent: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 1,
            gip_cases: vec![(2, 3), (3, 3), (2, 4)],
            substitutions: 100,
            random_protocols: 200,
            nih_seeds: 20,
            set_size_exponent: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: &'static str,
    pub verdict: Verdict,
    pub summary: String,
    pub details: Report,
}

impl CriterionOutcome {
    fn new(id: usize, title: &'static str, details: Report, summary: String) -> Self {
        let rows = details.rows();
        let verdict = if rows.iter().any(|r| r.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if rows.iter().any(|r| r.verdict == Verdict::Pass) {
            Verdict::Pass
        } else {
            Verdict::Skip
        };
        CriterionOutcome { id, title, verdict, summary, details }
    }

    fn errored(id: usize, title: &'static str, e: Error) -> Self {
        let mut details = Report::new();
        details.push("error", &e, "-", Source::Trivial, Verdict::Fail);
        CriterionOutcome { id, title, verdict: Verdict::Fail, summary: format!("error: {e}"), details }
    }

    /// `criterion 3 FAIL gip certificate: ...`
    pub fn line(&self) -> String {
        format!("criterion {} {} {}: {}", self.id, self.verdict, self.title, self.summary)
    }
}

fn prefixed(prefix: &str, r: Report) -> Report {
    let mut out = Report::new();
    for row in r.rows() {
        out.push(format!("{prefix}.{}", row.quantity), &row.computed, &row.expected, row.source, row.verdict);
    }
    out
}

fn ceil_log2(r: usize) -> usize {
    if r <= 1 {
        0
    } else {
        (usize::BITS - (r - 1).leading_zeros()) as usize
    }
}

fn run(id: usize, title: &'static str, f: impl FnOnce() -> Result<(Report, String)>) -> CriterionOutcome {
    match f() {
        Ok((details, summary)) => CriterionOutcome::new(id, title, details, summary),
        Err(e) => CriterionOutcome::errored(id, title, e),
    }
}

/// Rank of the two-party inner-product matrix.
pub fn criterion_1() -> CriterionOutcome {
    run(1, "inner-product rank", || {
        let mut r = Report::new();
        for n in 1..=3 {
            let m = canonical_tensor(&BooleanFunction::gip(n, 2)?)?.group_matrize(1)?;
            let rank = exact_rank(&m);
            r.check(format!("rank_M_IP_{n}"), rank, (1 << n) - 1, Source::Paper, rank == (1 << n) - 1);
        }
        let ranks: Vec<_> = r.rows().iter().map(|row| row.computed.clone()).collect();
        Ok((r, format!("ranks {} for n = 1..3", ranks.join(","))))
    })
}

/// The EQ superdiagonal has a tight bracket at `2^n`.
pub fn criterion_2() -> CriterionOutcome {
    run(2, "eq tensor rank", || {
        let mut r = Report::new();
        for k in [3, 4] {
            for n in 1..=3 {
                let t = canonical_tensor(&BooleanFunction::eq(n, k)?)?;
                let b = rank_bracket(&t, Some(&eq_nondet_decomposition(n, k)?))?;
                let want = 1usize << n;
                r.check(
                    format!("eq_{n}_{k}.bracket"),
                    format!("[{},{}] tight={}", b.lower, b.upper, b.tight),
                    format!("[{want},{want}] tight=true"),
                    Source::Paper,
                    b.lower == want && b.upper == want && b.tight,
                );
            }
        }
        let ok = r.rows().iter().filter(|row| row.verdict == Verdict::Pass).count();
        Ok((r, format!("{ok}/6 brackets tight at 2^n")))
    })
}

/// GIP certificate; cases outside its preconditions are skipped.
pub fn criterion_3(cases: &[(usize, usize)]) -> CriterionOutcome {
    run(3, "gip certificate", || {
        let mut r = Report::new();
        let mut notes = Vec::new();
        for &(n, k) in cases {
            let prefix = format!("gip_{n}_{k}");
            match gip_certificate_canonical(n, k) {
                Ok(cert) => {
                    notes.push(format!(
                        "({n},{k}) mode1 {} vs bound {}",
                        cert.combined_mode1_rank, cert.summation_bound
                    ));
                    r.extend(prefixed(&prefix, cert.report()));
                }
                Err(e @ (Error::DegenerateN(_) | Error::TooManyPlayers { .. })) => {
                    notes.push(format!("({n},{k}) skipped"));
                    r.push(format!("{prefix}.precondition"), &e, "n >= 2, 3 <= k <= n + 2", Source::Trivial, Verdict::Skip);
                }
                Err(e) => return Err(e),
            }
        }
        Ok((r, notes.join("; ")))
    })
}

/// Mode-1 rank of random nondeterministic GIP tensors against the summation bound.
pub fn criterion_4(seed: u64, draws: usize) -> CriterionOutcome {
    run(4, "random-substitution robustness", || {
        let (n, k) = (2, 3);
        let f = BooleanFunction::gip(n, k)?;
        let bound = summation_bound(n, k);
        let ranks = (0..draws)
            .into_par_iter()
            .map(|i| mode1_rank(&random_nondet_substitution(&f, derive_seed(seed, i as u64), DEFAULT_SUBSTITUTION_BOUND)?))
            .collect::<Result<Vec<_>>>()?;
        let meeting = ranks.iter().filter(|&&rk| rk >= bound).count();
        let (lo, hi) = (ranks.iter().min().copied().unwrap_or(0), ranks.iter().max().copied().unwrap_or(0));
        let mut r = Report::new();
        r.push("draws", draws, draws, Source::Trivial, Verdict::Info);
        r.push("mode1_rank_range", format!("[{lo},{hi}]"), format!(">={bound}"), Source::Derived, Verdict::Info);
        r.check("draws_meeting_summation_bound", meeting, draws, Source::Derived, draws > 0 && meeting == draws);
        Ok((r, format!("{meeting}/{draws} draws reach {bound}; mode-1 ranks in [{lo},{hi}]")))
    })
}

fn nof_cases() -> Result<Vec<(BooleanFunction, Decomposition)>> {
    let mut cases = Vec::new();
    for k in [3, 4] {
        for n in 1..=2 {
            cases.push((BooleanFunction::eq(n, k)?, eq_nondet_decomposition(n, k)?));
        }
    }
    for n in 1..=3 {
        cases.push((BooleanFunction::hamming_neq1(n, 3)?, hamming_nondet_decomposition(n, 3)?));
    }
    Ok(cases)
}

fn label(f: &BooleanFunction) -> String {
    format!("{}_{}_{}", f.name(), f.bits(), f.players())
}

/// Exhaustive strong-nondeterminism sweep of the NOF construction.
pub fn criterion_5() -> CriterionOutcome {
    run(5, "nof protocol correctness", || {
        let mut r = Report::new();
        let mut passed = 0;
        let cases = nof_cases()?;
        for (f, d) in &cases {
            let p = build_nof_protocol(d, f)?;
            let s = strong_nondet_check(&p, f)?;
            let name = label(f);
            r.check(format!("{name}.wrong_decisions"), s.wrong_decisions.len(), 0, Source::Paper, s.decisions_correct());
            r.check(
                format!("{name}.max_accept_on_zeros"),
                format!("{:.3e}", s.max_accept_on_zeros.unwrap_or(0.0)),
                "<=1e-12",
                Source::Paper,
                s.max_accept_on_zeros.is_none_or(|p| p <= 1e-12),
            );
            r.check(
                format!("{name}.min_accept_on_ones"),
                format!("{:.3e}", s.min_accept_on_ones.unwrap_or(0.0)),
                ">1e-9",
                Source::Paper,
                s.min_accept_on_ones.is_none_or(|p| p > 1e-9),
            );
            r.check(
                format!("{name}.max_analytic_gap"),
                format!("{:.3e}", s.max_analytic_gap),
                "<=1e-9",
                Source::Derived,
                s.max_analytic_gap <= 1e-9,
            );
            passed += s.passed() as usize;
        }
        Ok((r, format!("{passed}/{} sweeps strongly nondeterministic", cases.len())))
    })
}

/// Measured qubit cost against `⌈log₂ r⌉ + 1` and the term count.
pub fn criterion_6() -> CriterionOutcome {
    run(6, "cost formula", || {
        let mut r = Report::new();
        let mut cases = vec![
            (BooleanFunction::eq(1, 3)?, eq_nondet_decomposition(1, 3)?),
            (BooleanFunction::eq(1, 4)?, eq_nondet_decomposition(1, 4)?),
        ];
        for n in 1..=3 {
            cases.push((BooleanFunction::hamming_neq1(n, 3)?, hamming_nondet_decomposition(n, 3)?));
        }
        let mut costs = Vec::new();
        for (f, d) in &cases {
            let p = build_nof_protocol(d, f)?;
            // rank recomputed from the group matrization, not taken from the protocol
            let rank = svd(&to_float(p.matrix())?.matrix)?.numerical_rank();
            let measured = run_nof(&p, &f.input_at(0))?.qubit_cost;
            let name = label(f);
            let expected = ceil_log2(rank) + 1;
            r.check(format!("{name}.qubit_cost"), measured, expected, Source::Paper, measured == expected);
            let (limit, ok) = match f.name() {
                "eq" => ("=2".to_string(), rank == 2),
                _ => (format!("<={}", f.bits() + 1), rank <= f.bits() + 1 && rank <= d.term_count()),
            };
            r.check(format!("{name}.nrank_numerical"), rank, limit, Source::Derived, ok);
            costs.push(format!("{name}:{measured}"));
        }
        Ok((r, format!("costs {}", costs.join(" "))))
    })
}

/// Odd-k lift: decisions independent of the dummy value, lifted slices constant.
pub fn criterion_7() -> CriterionOutcome {
    run(7, "lift neutrality", || {
        let mut r = Report::new();
        let cases = vec![
            (BooleanFunction::eq(1, 3)?, eq_nondet_decomposition(1, 3)?),
            (BooleanFunction::eq(2, 3)?, eq_nondet_decomposition(2, 3)?),
            (BooleanFunction::hamming_neq1(1, 3)?, hamming_nondet_decomposition(1, 3)?),
            (BooleanFunction::hamming_neq1(2, 3)?, hamming_nondet_decomposition(2, 3)?),
        ];
        for (f, d) in &cases {
            let name = label(f);
            let p0 = build_nof_protocol(d, f)?.with_dummy(0)?;
            let p1 = build_nof_protocol(d, f)?.with_dummy(1)?;
            let mut differing = 0;
            for x in f.inputs() {
                if run_nof(&p0, &x)?.accepted != run_nof(&p1, &x)?.accepted {
                    differing += 1;
                }
            }
            r.check(format!("{name}.decisions_differing"), differing, 0, Source::Paper, differing == 0);

            let base = d.materialize()?;
            let lifted = d.lift_order(2).materialize()?;
            let mut mismatched = 0;
            for flat in 0..base.len() {
                let idx = unravel(flat, base.dims());
                for extra in 0..2 {
                    let mut j = idx.clone();
                    j.push(extra);
                    if lifted.get(&j)? != base.get(&idx)? {
                        mismatched += 1;
                    }
                }
            }
            r.check(format!("{name}.lifted_entries_mismatched"), mismatched, 0, Source::Paper, mismatched == 0);
        }
        Ok((r, format!("{} odd-k constructions checked over both dummy values", cases.len())))
    })
}

/// Branch form against the dense simulator on random protocols.
pub fn criterion_8(seed: u64, count: usize) -> CriterionOutcome {
    run(8, "branch-form fidelity", || {
        let stats = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
                let k = rng.random_range(2..=3);
                let turns = rng.random_range(1..=3);
                let mode = if rng.random_bool(0.5) { Mode::Nof } else { Mode::Nih };
                let spec = random_protocol(&mut rng, mode, 1, vec![2; k], turns)?;
                let x: Vec<u64> = (0..k).map(|_| rng.random_range(0..2)).collect();
                let (state, norms) = simulate_branches_traced(&spec, &x)?;
                let dense = simulate_dense(&spec, &x)?;
                let gap = state.recontract().iter().zip(&dense).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                let drift = norms.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
                Ok((gap, drift))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let gap = stats.iter().map(|s| s.0).fold(0.0, f64::max);
        let drift = stats.iter().map(|s| s.1).fold(0.0, f64::max);
        let mut r = Report::new();
        r.push("protocols", count, count, Source::Trivial, Verdict::Info);
        r.check("max_recontraction_gap", format!("{gap:.3e}"), "<=1e-9", Source::Derived, count > 0 && gap <= 1e-9);
        r.check("max_norm_drift", format!("{drift:.3e}"), "<=1e-9", Source::Derived, count > 0 && drift <= 1e-9);
        Ok((r, format!("{count} protocols, max gap {gap:.1e}, max norm drift {drift:.1e}")))
    })
}

/// NIH extraction pipeline on the trivial EQ_3 chains.
pub fn criterion_9(seed: u64, seeds: usize, set_size_exponent: Option<usize>) -> CriterionOutcome {
    run(9, "nih certificate", || {
        let mut r = Report::new();
        let mut notes = Vec::new();
        for n in 1..=2 {
            let f = BooleanFunction::eq(n, 3)?;
            let spec = trivial_eq_nih(n, 3)?;
            let opts = NihOptions { set_size_exponent, seed, max_attempts: 10 };
            let cert = nih_rank_certificate(&spec, &f, opts)?;
            r.extend(prefixed(&format!("eq_{n}_3"), cert.report()));

            let exponent = set_size_exponent.unwrap_or(3 * n + 1);
            let fams = grouped_families(&spec)?;
            let side = f.side();
            let ones: Vec<(usize, usize)> = f
                .inputs()
                .filter(|x| f.eval(x).unwrap_or(false))
                .map(|x| (x[0] as usize, x[1] as usize * side + x[2] as usize))
                .collect();
            let found = (0..seeds)
                .filter(|&i| coefficient_search(&fams, &ones, exponent, derive_seed(seed, i as u64), 10).is_ok())
                .count();
            let need = (seeds * 9).div_ceil(10);
            r.check(
                format!("eq_{n}_3.search_successes"),
                format!("{found}/{seeds}"),
                format!(">={need}/{seeds}"),
                Source::Paper,
                seeds > 0 && found >= need,
            );
            notes.push(format!("n={n}: l={} rank {} <= {}, search {found}/{seeds}", cert.turns, cert.rank, cert.family_size));
        }
        Ok((r, notes.join("; ")))
    })
}

/// Criteria 1–9 in order.
pub fn run_criteria(cfg: &VerifyConfig) -> Vec<CriterionOutcome> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(&cfg.gip_cases),
        criterion_4(cfg.seed, cfg.substitutions),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(cfg.seed, cfg.random_protocols),
        criterion_9(cfg.seed, cfg.nih_seeds, cfg.set_size_exponent),
    ]
}

fn assemble(criteria: &[CriterionOutcome]) -> Report {
    let mut r = Report::new();
    for c in criteria {
        r.push(format!("criterion_{}.{}", c.id, c.title.replace(' ', "_")), &c.summary, "all checks pass", Source::Derived, c.verdict);
    }
    for c in criteria {
        r.extend(prefixed(&format!("c{}", c.id), c.details.clone()));
    }
    r
}

/// Determinism: a second run must reproduce the report bytes.
pub fn criterion_10(cfg: &VerifyConfig, first: &str) -> CriterionOutcome {
    run(10, "determinism", || {
        let second = assemble(&run_criteria(cfg)).to_tsv();
        let same = second == first;
        let mut r = Report::new();
        r.check("report_bytes_identical", same, true, Source::Trivial, same);
        Ok((r, format!("{} report bytes, rerun {}", first.len(), if same { "identical" } else { "differs" })))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOutcome {
    pub criteria: Vec<CriterionOutcome>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn report(&self) -> Report {
        assemble(&self.criteria)
    }

    pub fn lines(&self) -> Vec<String> {
        self.criteria.iter().map(CriterionOutcome::line).collect()
    }
}

pub fn verify_all(cfg: &VerifyConfig) -> VerifyOutcome {
    let mut criteria = run_criteria(cfg);
    let first = assemble(&criteria).to_tsv();
    criteria.push(criterion_10(cfg, &first));
    VerifyOutcome { criteria }
}
