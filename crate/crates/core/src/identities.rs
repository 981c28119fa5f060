//! Checks of the q-series identities, each an exact equality of polynomials or of
//! truncated series.

use crate::arith::Rat;
use crate::basis::{char_closed_form, char_from_basis, rf_closed_form};
use crate::error::{Error, Result};
use crate::module::{ModuleSpec, Norm};
use crate::report::{Report, Verdict};
use crate::series::{f_g_series, fib_poly, lattice_char, q_binomial, q_pochhammer_inv, BiSeries};

/// The two sides of each equality making up one check, before comparison.
#[derive(Clone, Debug)]
pub struct Sides {
    pub check: String,
    pub params: String,
    pub pairs: Vec<(String, BiSeries, BiSeries)>,
    /// Set when the parameters lie outside the hypotheses; the comparison is
    /// still run and recorded but does not decide the verdict.
    pub not_applicable: Option<String>,
}

impl Sides {
    fn new(check: &str, params: String) -> Sides {
        Sides { check: check.into(), params, pairs: Vec::new(), not_applicable: None }
    }

    fn push(&mut self, label: &str, lhs: BiSeries, rhs: BiSeries) {
        self.pairs.push((label.into(), lhs, rhs));
    }

    /// Adds `delta` to the coefficient of `z^z q^q` on the left side of the first pair.
    pub fn perturb(&mut self, z: &Rat, q: &Rat, delta: &Rat) -> Result<()> {
        let Some((_, lhs, _)) = self.pairs.first_mut() else {
            return Err(Error::Invariant(format!("{} has no series to perturb", self.check)));
        };
        let bump = BiSeries::monomial(delta.clone(), z, q)?;
        *lhs = lhs.add(&bump)?;
        Ok(())
    }

    pub fn into_report(self) -> Result<Report> {
        let mut rep = Report::new(&self.check, self.params);
        for (label, l, r) in &self.pairs {
            rep.compare(label, l, r)?;
        }
        if let Some(why) = self.not_applicable {
            let held = rep.verdict == Verdict::Pass;
            rep.verdict = Verdict::NotApplicable;
            rep.notes.push(why);
            rep.notes.push(format!("literal comparison {}", if held { "holds" } else { "fails" }));
        }
        Ok(rep)
    }
}

fn z1() -> Rat {
    Rat::one()
}

/// `F_g(z) = F_g(zq) + z q^(g/2) F_g(zq^g)` to `q^cut`.
pub fn rr_recursion_sides(g: &Rat, q_cutoff: &Rat, charge_max: Option<u64>) -> Result<Sides> {
    let mut s = Sides::new("rr-recursion", format!("g={g} qcut={q_cutoff}"));
    let half = g / &Rat::int(2);
    let lhs = f_g_series(g, &z1(), &Rat::zero(), q_cutoff, charge_max)?;
    let a = f_g_series(g, &z1(), &Rat::one(), q_cutoff, charge_max)?;
    let b = f_g_series(g, &z1(), g, &(q_cutoff - &half), charge_max)?.shift(&z1(), &half)?;
    s.push("F_g recursion", lhs, a.add(&b)?);
    Ok(s)
}

pub fn check_rr_recursion(g: &Rat, q_cutoff: &Rat, charge_max: Option<u64>) -> Result<Report> {
    rr_recursion_sides(g, q_cutoff, charge_max)?.into_report()
}

/// The two three-term recursions of the polynomials `F_{p,l}`, with no truncation.
pub fn fib_recursions_sides(p: u32, l: i64) -> Result<Sides> {
    if p == 0 || l < 0 {
        return Err(Error::InvalidSpec(format!("need p >= 1 and l >= 0, got p={p}, l={l}")));
    }
    let pi = i64::from(p);
    let mut s = Sides::new("fib-recursions", format!("p={p} l={l}"));
    let top = fib_poly(p, l + pi);
    let prev = fib_poly(p, l + pi - 1);
    let low = fib_poly(p, l);
    let half_p = Rat::new(pi, 2);
    s.push(
        "F_{p,l+p}(z) = F_{p,l+p-1}(z) + z q^(l+p/2) F_{p,l}(z)",
        top.clone(),
        prev.add(&low.shift(&z1(), &(Rat::int(l) + &half_p))?)?,
    );
    s.push(
        "F_{p,l+p}(z) = F_{p,l+p-1}(zq) + z q^(p/2) F_{p,l}(zq^p)",
        top,
        prev.substitute(&z1(), &z1())?.add(&low.substitute(&z1(), &Rat::int(pi))?.shift(&z1(), &half_p)?)?,
    );
    Ok(s)
}

pub fn check_fib_recursions(p: u32, l: i64) -> Result<Report> {
    fib_recursions_sides(p, l)?.into_report()
}

/// `sum_r z^a(r) q^b(r) [top(r), bot(r)]` over `r = 0, 1, ...` while `top >= bot`.
fn binomial_sum(
    z: impl Fn(i64) -> Rat,
    q: impl Fn(i64) -> Rat,
    top: impl Fn(i64) -> i64,
    bot: impl Fn(i64) -> i64,
) -> Result<BiSeries> {
    let mut s = BiSeries::zero_exact();
    let mut r = 0i64;
    while top(r) >= bot(r) && bot(r) >= 0 {
        let poly = q_binomial(top(r), bot(r)).to_series();
        s = s.add(&poly.shift(&z(r), &q(r))?)?;
        r += 1;
    }
    Ok(s)
}

/// The switching identity between the characters of `F_k(m)` over `F(p)` and the
/// corresponding module over `F(1/p)`, as two terminating sums.
pub fn switching_sides(p: u32, k: i64, m: i64) -> Result<Sides> {
    if p == 0 {
        return Err(Error::InvalidSpec("p must be positive".into()));
    }
    let pi = i64::from(p);
    let mut s = Sides::new("switching", format!("p={p} k={k} m={m}"));
    let i = (k - m - 2).rem_euclid(pi);
    let mp = m - 2 * pi + 1;
    let kp = k + pi - 2;
    let num = -mp + kp - i + 1;
    if num.rem_euclid(pi) != 0 {
        return Err(Error::Invariant(format!("(-m'+k'-i+1)/p is not an integer for p={p}, k={k}, m={m}")));
    }
    let a = num / pi - 2 + i;
    let lhs = binomial_sum(
        |r| Rat::int(-r),
        |r| Rat::new(pi * r * r, 2) + Rat::int(m * r),
        |r| k - m + pi - 2 + (1 - pi) * r,
        |r| r,
    )?
    .shift(&Rat::new(-m, pi), &Rat::new(m * m, 2 * pi))?;
    let rhs = binomial_sum(
        Rat::int,
        |r| Rat::new(pi * r * r, 2) + Rat::int((i - kp) * r),
        |r| a + (pi - 1) * r,
        |r| i + pi * r,
    )?
    .shift(&Rat::new(i - kp, pi), &Rat::new(kp * kp + i * i - 2 * kp * i, 2 * pi))?;
    s.push("switched sums", lhs, rhs);
    Ok(s)
}

pub fn check_switching(p: u32, k: i64, m: i64) -> Result<Report> {
    switching_sides(p, k, m)?.into_report()
}

/// `z^n q^(n^2) sum_r q^(r^2-2nr) [2n-r, r] z^-r = sum_r q^(r^2) [n+r, 2r] z^r`.
pub fn switching_p2_sides(n: i64) -> Result<Sides> {
    if n < 0 {
        return Err(Error::InvalidSpec(format!("need n >= 0, got {n}")));
    }
    let mut s = Sides::new("switching-p2", format!("n={n}"));
    let lhs = binomial_sum(|r| Rat::int(-r), |r| Rat::int(r * r - 2 * n * r), |r| 2 * n - r, |r| r)?
        .shift(&Rat::int(n), &Rat::int(n * n))?;
    let rhs = binomial_sum(Rat::int, |r| Rat::int(r * r), |r| n + r, |r| 2 * r)?;
    s.push("p=2 specialization", lhs, rhs);
    Ok(s)
}

pub fn check_switching_p2(n: i64) -> Result<Report> {
    switching_p2_sides(n)?.into_report()
}

/// The character of `F_k(m)` over `F(p)` at `z^-1` against an `RF` character over
/// `F(1/p)`. Outside `k > m+1-p` the comparison is recorded only.
pub fn dual_char_sides(p: u32, k: i64, m: i64, s0: &Rat, e0: &Rat) -> Result<Sides> {
    if p == 0 {
        return Err(Error::InvalidSpec("p must be positive".into()));
    }
    let pi = i64::from(p);
    let mut s = Sides::new("dual-char", format!("p={p} k={k} m={m} S={s0} E={e0}"));
    let kp = k + pi - 2;
    let fin_norm = Norm::new(Rat::one(), Rat::new(pi, 2), s0 + &Rat::new(m, pi), e0 + &Rat::new(m * m, 2 * pi))?;
    let lhs = char_closed_form(&ModuleSpec::finite_module(p, k, m).with_norm(fin_norm), None, None)?.invert_z();
    let rf_norm =
        Norm::new(Rat::new(1, pi), Rat::new(1, 2 * pi), -s0 - &Rat::new(kp, pi), e0 + &Rat::new(kp * kp, 2 * pi))?;
    let rhs = rf_closed_form(pi, -m + 2 * pi - 1, -k - pi + 2, &rf_norm)?;
    s.push("dual character", lhs, rhs);
    if k <= m + 1 - pi {
        s.not_applicable = Some(format!("needs k > m+1-p, got p={p}, k={k}, m={m}"));
    }
    Ok(s)
}

pub fn check_dual_char(p: u32, k: i64, m: i64, s0: &Rat, e0: &Rat) -> Result<Report> {
    dual_char_sides(p, k, m, s0, e0)?.into_report()
}

/// Enumerated against closed-form characters of `EF`, `RF` and the `EF` summands,
/// and the summands against `EF`.
pub fn ef_chars_sides(p: u32, k: i64, m: i64, norm: &Norm, q_cutoff: &Rat) -> Result<Sides> {
    let mut s = Sides::new(
        "ef-chars",
        format!("p={p} k={k} m={m} C={} D={} S={} E={} qcut={q_cutoff}", norm.c, norm.d, norm.s, norm.e),
    );
    let cut = Some(q_cutoff);
    let ef = ModuleSpec::ef(p, k, m).with_norm(norm.clone());
    let ef_closed = char_closed_form(&ef, cut, None)?;
    s.push("EF", char_from_basis(&ef, cut, None)?, ef_closed.clone());
    let rf = ModuleSpec::rf(p, k, m).with_norm(norm.clone());
    s.push("RF", char_from_basis(&rf, cut, None)?, char_closed_form(&rf, cut, None)?);
    let mut total = BiSeries::zero_exact();
    for i in 0..p {
        let c = ModuleSpec::ef_component(p, k, m, i).with_norm(norm.clone());
        let closed = char_closed_form(&c, cut, None)?;
        s.push(&format!("EF component {i}"), char_from_basis(&c, cut, None)?, closed.clone());
        total = total.add(&closed)?;
    }
    s.push("sum of components", total, ef_closed);
    Ok(s)
}

pub fn check_ef_chars(p: u32, k: i64, m: i64, norm: &Norm, q_cutoff: &Rat) -> Result<Report> {
    ef_chars_sides(p, k, m, norm, q_cutoff)?.into_report()
}

/// Enumerated against closed-form character of any module.
pub fn enumeration_sides(spec: &ModuleSpec, q_cutoff: Option<&Rat>, charge_max: Option<u64>) -> Result<Sides> {
    let cut = q_cutoff.map_or_else(|| "none".to_string(), |c| c.to_string());
    let mut s = Sides::new("enumeration", format!("{spec} qcut={cut}"));
    s.push(
        "basis vs closed form",
        char_from_basis(spec, q_cutoff, charge_max)?,
        char_closed_form(spec, q_cutoff, charge_max)?,
    );
    Ok(s)
}

pub fn check_enumeration(spec: &ModuleSpec, q_cutoff: Option<&Rat>, charge_max: Option<u64>) -> Result<Report> {
    enumeration_sides(spec, q_cutoff, charge_max)?.into_report()
}

/// `sum_{r >= 0, pr+l-p+i >= 0} z^(-r-l/p) q^((pr+l)^2/2p) / (q)_{pr+l-p+i}` to `q^cut`
/// (with `i = p` for the first part).
fn lattice_outer(p: i64, l: i64, i: i64, cut: &Rat) -> Result<BiSeries> {
    let mut s = BiSeries::zero_exact();
    let mut r = 0i64;
    loop {
        let e = Rat::new((p * r + l) * (p * r + l), 2 * p);
        if &e > cut {
            break;
        }
        let len = p * r + l - p + i;
        if len >= 0 {
            let room = (cut - &e).floor();
            let room: u32 = (room + 1u32).try_into().map_err(|_| Error::Overflow)?;
            let term = q_pochhammer_inv(len as u32, room).shift(&Rat::new(-p * r - l, p), &e)?.truncate(cut)?;
            s = s.add(&term)?;
        }
        r += 1;
    }
    s.truncate(cut)
}

/// Lattice coset character against its decomposition into fermionic sums.
pub fn lattice_decomposition_sides(p: u32, l: u32, q_cutoff: &Rat) -> Result<Sides> {
    if p == 0 || l >= p {
        return Err(Error::InvalidSpec(format!("need 0 <= l < p, got p={p}, l={l}")));
    }
    let (pi, li) = (i64::from(p), i64::from(l));
    let mut s = Sides::new("lattice", format!("p={p} l={l} qcut={q_cutoff}"));
    let lhs = lattice_char(p, l, q_cutoff)?;
    let g = Rat::int(pi);
    let inner = f_g_series(&g, &z1(), &Rat::zero(), q_cutoff, None)?;
    let mut rhs = lattice_outer(pi, li, pi, q_cutoff)?.mul(&inner)?;
    for i in 1..pi {
        let lift = Rat::new(pi, 2) - Rat::int(i);
        let deeper = q_cutoff + &lift;
        let inner = f_g_series(&g, &z1(), &Rat::int(i), &deeper, None)?;
        let part = lattice_outer(pi, li, i, &deeper)?.mul(&inner)?.shift(&z1(), &-&lift)?;
        rhs = rhs.add(&part)?;
    }
    s.push("lattice character", lhs, rhs.truncate(q_cutoff)?);
    Ok(s)
}

pub fn check_lattice_decomposition(p: u32, l: u32, q_cutoff: &Rat) -> Result<Report> {
    lattice_decomposition_sides(p, l, q_cutoff)?.into_report()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instances() {
        assert_eq!(check_rr_recursion(&Rat::int(2), &Rat::int(12), None).unwrap().verdict, Verdict::Pass);
        assert_eq!(check_fib_recursions(2, 2).unwrap().verdict, Verdict::Pass);
        assert_eq!(check_switching(2, 0, -2).unwrap().verdict, Verdict::Pass);
        assert_eq!(check_switching_p2(1).unwrap().verdict, Verdict::Pass);
        assert_eq!(check_lattice_decomposition(2, 0, &Rat::int(8)).unwrap().verdict, Verdict::Pass);
        let r = check_dual_char(2, 0, -2, &Rat::zero(), &Rat::zero()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.summary());
    }

    #[test]
    fn perturbation_is_located() {
        let mut s = fib_recursions_sides(2, 2).unwrap();
        s.perturb(&Rat::one(), &Rat::int(3), &Rat::one()).unwrap();
        let r = s.into_report().unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let (_, m) = r.first_mismatch().unwrap();
        assert_eq!((m.z.as_str(), m.q.as_str()), ("1", "3"));
    }
}
