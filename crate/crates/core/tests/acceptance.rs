//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use freegva_core::{
    branching_vectors, check_dual_char, check_ef_chars, check_enumeration, check_fib_recursions,
    check_lattice_decomposition, check_rr_recursion, check_switching, check_switching_p2, enumerate_basis,
    exactseq::{verify_fibonacci, verify_flag, verify_rr_finite, verify_rr_free},
    ModuleSpec, Norm, Rat, Report, Result, Rewriter, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<Vec<String>>;

fn r(s: &str) -> Rat {
    s.parse().expect("rational literal")
}

fn g_grid() -> Vec<Rat> {
    ["1/3", "1/2", "1", "3/2", "2", "3"].iter().map(|s| r(s)).collect()
}

fn m_grid() -> Vec<Rat> {
    ["-2", "-1", "0", "1/2", "1", "2"].iter().map(|s| r(s)).collect()
}

/// Collects the summaries of failing reports.
fn failures(reports: impl IntoIterator<Item = Result<Report>>) -> Outcome {
    let mut out = Vec::new();
    for rep in reports {
        let rep = rep?;
        if rep.verdict == Verdict::Fail {
            out.push(rep.summary());
        }
    }
    Ok(out)
}

fn fibonacci_dimensions() -> Outcome {
    let mut bad = Vec::new();
    let want = [1usize, 1, 2, 3, 5, 8, 13];
    for (k, &n) in want.iter().enumerate() {
        let b = enumerate_basis(&ModuleSpec::finite_algebra(2, k as i64), None, None)?;
        if b.len() != n {
            bad.push(format!("dim F(2,{k}) = {}, expected {n}", b.len()));
        }
    }
    let listed: [&[&str]; 6] = [
        &["1"],
        &["1"],
        &["1", "e(-1)1"],
        &["1", "e(-1)1", "e(-2)1"],
        &["1", "e(-1)1", "e(-2)1", "e(-3)1", "e(-3)e(-1)1"],
        &["1", "e(-1)1", "e(-2)1", "e(-3)1", "e(-3)e(-1)1", "e(-4)1", "e(-4)e(-1)1", "e(-4)e(-2)1"],
    ];
    for (k, rows) in listed.iter().enumerate() {
        let b = enumerate_basis(&ModuleSpec::finite_algebra(2, k as i64), None, None)?;
        let mut got: Vec<String> = (0..b.len()).map(|i| b.element(i).replace('b', "e")).collect();
        let mut want: Vec<String> = rows.iter().map(|s| s.to_string()).collect();
        got.sort();
        want.sort();
        if got != want {
            bad.push(format!("basis of F(2,{k}): {got:?} vs {want:?}"));
        }
    }
    Ok(bad)
}

fn enumeration_vs_closed_form() -> Outcome {
    let cut = Rat::int(20);
    let mut reports = Vec::new();
    for g in g_grid() {
        for m in m_grid() {
            reports.push(check_enumeration(&ModuleSpec::free_module(g.clone(), m), Some(&cut), None));
        }
    }
    for p in 1..=3 {
        for k in -4..=8 {
            for m in -4..=8 {
                reports.push(check_enumeration(&ModuleSpec::finite_module(p, k, m), None, None));
            }
        }
    }
    failures(reports)
}

fn recursions() -> Outcome {
    let cut = Rat::int(30);
    let mut reports: Vec<Result<Report>> = g_grid().iter().map(|g| check_rr_recursion(g, &cut, None)).collect();
    for p in 1..=4 {
        for l in 0..=12 {
            reports.push(check_fib_recursions(p, l));
        }
    }
    failures(reports)
}

fn rr_sequences() -> Outcome {
    let cut = Rat::int(15);
    let n = Norm::unnormalized();
    let mut reports = Vec::new();
    for g in g_grid() {
        for m in m_grid() {
            reports.push(verify_rr_free(&g, &m, &n, &cut, None));
        }
    }
    for p in 1..=3 {
        for k in -4..=8 {
            for m in -4..=8 {
                reports.push(verify_rr_finite(p, k, m, &n, Some(&cut)));
            }
        }
    }
    // a normalized instance: C=2, D=1/2, S=1, E=-1
    let twisted = Norm::new(Rat::int(2), r("1/2"), Rat::one(), Rat::int(-1))?;
    reports.push(verify_rr_free(&Rat::int(2), &Rat::zero(), &twisted, &cut, None));
    reports.push(verify_rr_finite(2, 6, 0, &twisted, None));
    failures(reports)
}

fn fibonacci_sequences() -> Outcome {
    let n = Norm::unnormalized();
    let mut reports = Vec::new();
    for p in [2, 3] {
        for k in 1..=8 {
            for m in -3..=3 {
                reports.push(verify_fibonacci(p, k, m, &n, Some(15)));
            }
        }
    }
    failures(reports)
}

fn switching() -> Outcome {
    let mut reports = Vec::new();
    for p in 1..=3 {
        for k in -6..=6 {
            for m in -6..=6 {
                reports.push(check_switching(p, k, m));
                reports.push(check_dual_char(p, k, m, &Rat::zero(), &Rat::zero()));
                reports.push(check_dual_char(p, k, m, &r("1/2"), &r("-3/4")));
            }
        }
    }
    for n in 0..=6 {
        reports.push(check_switching_p2(n));
    }
    failures(reports)
}

fn lattice_decomposition() -> Outcome {
    let cut = Rat::int(15);
    let mut reports = vec![check_lattice_decomposition(1, 0, &cut)];
    for p in [2u32, 3] {
        for l in 0..p {
            reports.push(check_lattice_decomposition(p, l, &cut));
        }
    }
    failures(reports)
}

fn flags() -> Outcome {
    let cut = Rat::int(12);
    let mut reports = Vec::new();
    for p in [2, 3] {
        for n in 0..=6 {
            reports.push(verify_flag(p, n, &Norm::unnormalized(), &cut));
        }
    }
    reports.push(verify_flag(2, 3, &Norm::new(Rat::one(), Rat::one(), Rat::int(2), r("1/3"))?, &cut));
    let mut bad = failures(reports)?;
    let b0 = branching_vectors(2, 3, 0, None)?.len();
    let b1 = branching_vectors(2, 3, 1, None)?.len();
    if (b0, b1) != (3, 2) {
        bad.push(format!("p=2, n=3 branching sizes ({b0}, {b1}), expected (3, 2)"));
    }
    Ok(bad)
}

/// A random monomial with legal cosets, length at most 5 and degree at most 15.
fn random_monomial(rng: &mut ChaCha8Rng, g: &Rat, m: &Rat) -> Vec<Rat> {
    loop {
        let len = rng.gen_range(1..=5usize);
        let modes: Vec<Rat> =
            (0..len).map(|j| m + &(g * &Rat::int(j as i64)) + Rat::int(rng.gen_range(-1..=6))).collect();
        let total = modes.iter().fold(Rat::zero(), |a, b| a + b);
        if total <= Rat::int(15) {
            return modes;
        }
    }
}

fn rewriter_properties() -> Outcome {
    let mut bad = Vec::new();
    let mut rw = Rewriter::new(&Rat::int(2), &Rat::zero())?;
    let nf = rw.normal_form(&[Rat::int(2), Rat::int(2)])?;
    if nf.to_string() != "-2 * b(-3)b(-1)v_0" {
        bad.push(format!("b(-2)b(-2)v_0 = {nf}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut nonzero = 0usize;
    let mut total = 0usize;
    for g in ["1/2", "1", "2", "3"] {
        let g = r(g);
        for m in [Rat::zero(), Rat::int(-1), Rat::one()] {
            let mut rw = Rewriter::new(&g, &m)?;
            for _ in 0..25 {
                let word = random_monomial(&mut rng, &g, &m);
                total += 1;
                let inner = rw.normal_form(&word)?;
                let outer = rw.normal_form_outermost(&word)?;
                if inner != outer {
                    bad.push(format!("g={g} m={m} {word:?}: strategies differ: {inner} vs {outer}"));
                }
                if !inner.is_zero() {
                    nonzero += 1;
                }
                let sum = word.iter().fold(Rat::zero(), |a, b| a + b);
                for (w, c) in inner.iter() {
                    let s = w.iter().fold(Rat::zero(), |a, b| a + b);
                    if w.len() != word.len() || s != sum {
                        bad.push(format!("g={g} m={m} {word:?}: summand {w:?} changes the grading"));
                    }
                    if !rw.is_basis(&w)? {
                        bad.push(format!("g={g} m={m} {word:?}: summand {w:?} is not a basis monomial"));
                    }
                    let again = rw.normal_form(&w)?;
                    if again.len() != 1 || again.coeff(&w) != Rat::one() {
                        bad.push(format!("g={g} m={m}: normal form of {w:?} (coefficient {c}) is {again}"));
                    }
                }
            }
        }
    }
    if total < 200 {
        bad.push(format!("only {total} random monomials"));
    }
    if nonzero * 4 < total {
        bad.push(format!("only {nonzero} of {total} random monomials survive; sample too degenerate"));
    }
    Ok(bad)
}

fn ef_characters() -> Outcome {
    let cut = Rat::int(15);
    let mut reports = Vec::new();
    for p in 1..=3 {
        for k in 0..=9 {
            for m in -3..=3 {
                reports.push(check_ef_chars(p, k, m, &Norm::unnormalized(), &cut));
            }
        }
    }
    let twisted = Norm::new(r("1/2"), r("1/4"), Rat::one(), r("2/3"))?;
    reports.push(check_ef_chars(2, 7, 0, &twisted, &cut));
    failures(reports)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("Fibonacci dimensions and listed bases", fibonacci_dimensions, 1),
        ("enumeration matches fermionic closed forms", enumeration_vs_closed_form, 30),
        ("RR and q-Fibonacci recursions", recursions, 10),
        ("RR exact sequences, free and finite", rr_sequences, 60),
        ("Fibonacci exact sequence by matrix ranks", fibonacci_sequences, 120),
        ("switching and dual characters", switching, 30),
        ("lattice character decomposition", lattice_decomposition, 30),
        ("flag decomposition and branching vectors", flags, 30),
        ("rewriter properties", rewriter_properties, 30),
        ("EF and RF characters", ef_characters, 30),
    ];
    let start = Instant::now();
    let mut all_ok = true;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let took = t.elapsed();
        let mut problems = match outcome {
            Ok(v) => v,
            Err(e) => vec![format!("error: {e}")],
        };
        if took > Duration::from_secs(*limit) {
            problems.push(format!("took {took:.2?}, limit {limit} s"));
        }
        let ok = problems.is_empty();
        all_ok &= ok;
        println!("{} {:>2}. {name} ({took:.2?})", if ok { "PASS" } else { "FAIL" }, i + 1);
        for p in problems.iter().take(5) {
            println!("        {p}");
        }
        if problems.len() > 5 {
            println!("        ... {} more", problems.len() - 5);
        }
    }
    println!("total {:.2?}", start.elapsed());
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
