use std::collections::BTreeMap;

use freegva_core::{
    enumerate_basis, gen_binom, q_binomial, series_eq, straighten_pair, BiSeries, Echelon, ModuleSpec, QPoly, Rat,
    Rewriter,
};
use num_bigint::BigInt;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Rat> {
    (-30i64..30, 1i64..7).prop_map(|(a, b)| Rat::new(a, b))
}

fn poly() -> impl Strategy<Value = BiSeries> {
    prop::collection::vec((-3i64..4, -2i64..10, -5i64..6), 0..8).prop_map(|ts| {
        let mut s = BiSeries::empty(2, 3, None);
        for (z, q, c) in ts {
            s.add_term(z, q, Rat::int(c));
        }
        s
    })
}

fn same(a: &BiSeries, b: &BiSeries) -> bool {
    series_eq(a, b).unwrap().equal
}

/// Binomial coefficient by the multiplicative formula.
fn binom(n: i64, r: i64) -> BigInt {
    if r < 0 || n < r {
        return BigInt::from(0);
    }
    let mut acc = BigInt::from(1);
    for i in 0..r {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn shifted(p: &QPoly, by: usize) -> QPoly {
    QPoly::zero().add_shifted(p, by)
}

proptest! {
    #[test]
    fn pascal_for_general_binomials(x in rat(), j in 0u32..8) {
        let lhs = gen_binom(&x, j) + gen_binom(&x, j + 1);
        prop_assert_eq!(lhs, gen_binom(&(&x + &Rat::one()), j + 1));
    }

    #[test]
    fn integer_binomials_agree(n in 0i64..25, j in 0u32..25) {
        let expect = Rat::from_big(binom(n, i64::from(j)), BigInt::from(1)).unwrap();
        prop_assert_eq!(gen_binom(&Rat::int(n), j), expect);
    }

    #[test]
    fn gaussian_symmetry_and_pascal(n in 1i64..18, r in 0i64..18) {
        prop_assume!(r <= n);
        let b = q_binomial(n, r);
        prop_assert_eq!(&b, &q_binomial(n, n - r));
        prop_assert_eq!(b.eval_at_one(), binom(n, r));
        let rule1 = q_binomial(n - 1, r - 1).add_shifted(&q_binomial(n - 1, r), r as usize);
        prop_assert_eq!(&b, &rule1);
        let rule2 = shifted(&q_binomial(n - 1, r - 1), (n - r) as usize).add_shifted(&q_binomial(n - 1, r), 0);
        prop_assert_eq!(&b, &rule2);
    }

    #[test]
    fn ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert!(same(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()));
        prop_assert!(same(&a.mul(&b).unwrap().mul(&c).unwrap(), &a.mul(&b.mul(&c).unwrap()).unwrap()));
        let left = a.mul(&b.add(&c).unwrap()).unwrap();
        let right = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(same(&left, &right));
        prop_assert!(a.sub(&a).unwrap().is_zero());
        prop_assert!(same(&a.mul(&BiSeries::one()).unwrap(), &a));
    }

    #[test]
    fn truncated_products_agree_below_cutoff(a in poly(), b in poly(), cut in 0i64..8) {
        let cut = Rat::int(cut);
        let full = a.mul(&b).unwrap().truncate(&cut).unwrap();
        let early = a.truncate(&cut).unwrap().mul(&b.truncate(&cut).unwrap()).unwrap();
        prop_assert!(same(&full, &early));
    }

    #[test]
    fn json_round_trip(a in poly(), cut in prop::option::of(-1i64..9)) {
        let a = match cut {
            Some(c) => a.truncate(&Rat::int(c)).unwrap(),
            None => a,
        };
        let text = a.to_json().unwrap();
        let back = BiSeries::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), text);
        prop_assert!(same(&back, &a));
    }
}

fn g_choice() -> impl Strategy<Value = Rat> {
    prop::sample::select(vec![Rat::new(1, 2), Rat::int(1), Rat::int(2), Rat::int(3)])
}

/// Legal modes `m + g j + offset` for `j = 0, 1, ...`.
fn monomial() -> impl Strategy<Value = (Rat, Rat, Vec<Rat>)> {
    (g_choice(), -1i64..2, prop::collection::vec(-2i64..6, 1..=5)).prop_map(|(g, m, offs)| {
        let m = Rat::int(m);
        let modes = offs.iter().enumerate().map(|(j, &o)| &m + &(&g * &Rat::int(j as i64)) + Rat::int(o)).collect();
        (g, m, modes)
    })
}

fn total(modes: &[Rat]) -> Rat {
    modes.iter().fold(Rat::zero(), |a, b| a + b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rewriter_invariants((g, m, modes) in monomial()) {
        prop_assume!(total(&modes) <= Rat::int(15));
        let mut rw = Rewriter::new(&g, &m).unwrap();
        let nf = rw.normal_form(&modes).unwrap();
        let outer = rw.normal_form_outermost(&modes).unwrap();
        prop_assert_eq!(&nf, &outer);
        for (w, _) in nf.iter() {
            prop_assert_eq!(w.len(), modes.len());
            prop_assert_eq!(total(&w), total(&modes));
            prop_assert!(rw.is_basis(&w).unwrap());
            let again = rw.normal_form(&w).unwrap();
            prop_assert_eq!(again.len(), 1);
            prop_assert_eq!(again.coeff(&w), Rat::one());
        }
        if rw.is_basis(&modes).unwrap() && !rw.is_zero_by_truncation(&modes).unwrap() {
            prop_assert_eq!(nf.len(), 1);
        }
    }

    /// Straightening one pair by hand with many more terms than the rewriter keeps
    /// gives the same normal form, and doubling the term count changes nothing.
    #[test]
    fn straightening_cutoff_is_a_fixed_point((g, m, modes) in monomial()) {
        prop_assume!(modes.len() >= 2);
        let modes = modes[..2].to_vec();
        let mut rw = Rewriter::new(&g, &m).unwrap();
        prop_assume!(!rw.is_basis(&modes).unwrap());
        let direct = rw.normal_form(&modes).unwrap();
        let by_hand = |rw: &mut Rewriter, j_max: u32| {
            let mut acc: BTreeMap<Vec<Rat>, Rat> = BTreeMap::new();
            // b(s) b(t) v_m with s outer, t inner, arguments negated degrees
            for t in straighten_pair(&-&modes[1], &-&modes[0], &g, j_max) {
                let w = vec![-&t.inner, -&t.outer];
                if rw.is_zero_by_truncation(&w).unwrap() {
                    continue;
                }
                for (k, c) in rw.normal_form(&w).unwrap().iter() {
                    let e = acc.entry(k).or_default();
                    *e += &(&t.coef * c);
                }
            }
            acc.retain(|_, c| !c.is_zero());
            acc
        };
        let a = by_hand(&mut rw, 40);
        let b = by_hand(&mut rw, 80);
        prop_assert_eq!(&a, &b);
        let d: BTreeMap<Vec<Rat>, Rat> = direct.iter().map(|(k, c)| (k, c.clone())).collect();
        prop_assert_eq!(a, d);
    }
}

/// Rank of normal forms of all legal monomials with bounded offsets in one piece
/// equals the number of basis vectors there.
#[test]
fn normal_forms_span_each_piece() {
    for (g, m) in [(Rat::int(2), 0), (Rat::int(1), 0), (Rat::new(1, 2), 0), (Rat::int(3), -1)] {
        let m = Rat::int(m);
        let mut rw = Rewriter::new(&g, &m).unwrap();
        let basis = enumerate_basis(&ModuleSpec::free_module(g.clone(), m.clone()), Some(&Rat::int(12)), None).unwrap();
        let l = basis.mode_denom;
        for r in 1..=3usize {
            let mut by_degree: BTreeMap<Rat, Echelon<Vec<i64>>> = BTreeMap::new();
            let mut count: BTreeMap<Rat, usize> = BTreeMap::new();
            for s in basis.seqs.iter().filter(|s| s.len() == r) {
                *count.entry(Rat::new(s.iter().sum(), l)).or_default() += 1;
            }
            let mut offs = vec![-1i64; r];
            loop {
                let modes: Vec<Rat> =
                    offs.iter().enumerate().map(|(j, &o)| &m + &(&g * &Rat::int(j as i64)) + Rat::int(o)).collect();
                let d = total(&modes);
                if d <= Rat::int(12) {
                    let nf = rw.normal_form(&modes).unwrap();
                    by_degree.entry(d).or_default().insert(nf.raw().clone());
                }
                // next offset vector in the box [-1, 13]^r
                let mut i = 0;
                while i < r && offs[i] == 13 {
                    offs[i] = -1;
                    i += 1;
                }
                if i == r {
                    break;
                }
                offs[i] += 1;
            }
            for (d, e) in &by_degree {
                let want = count.get(d).copied().unwrap_or(0);
                assert_eq!(e.rank(), want, "g={g} m={m} r={r} degree {d}");
            }
        }
    }
}

/// Partitions of `n` with parts drawn from `parts`, by dynamic programming.
fn partitions_with_parts(n: usize, parts: impl Fn(usize) -> bool) -> Vec<u64> {
    let mut ways = vec![0u64; n + 1];
    ways[0] = 1;
    for part in (1..=n).filter(|&k| parts(k)) {
        for t in part..=n {
            ways[t] += ways[t - part];
        }
    }
    ways
}

fn degree_counts(g: i64, cut: i64) -> Vec<u64> {
    let b = enumerate_basis(&ModuleSpec::free_algebra(Rat::int(g)), Some(&Rat::int(cut)), None).unwrap();
    let mut out = vec![0u64; cut as usize + 1];
    for s in &b.seqs {
        out[s.iter().sum::<i64>() as usize] += 1;
    }
    out
}

#[test]
fn rogers_ramanujan_and_euler_counts() {
    let n = 40;
    assert_eq!(degree_counts(2, n as i64), partitions_with_parts(n, |k| k % 5 == 1 || k % 5 == 4));
    assert_eq!(degree_counts(1, n as i64), partitions_with_parts(n, |k| k % 2 == 1));
}
