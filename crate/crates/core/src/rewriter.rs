//! Normal forms of mode monomials `b(-n_r)...b(-n_1)v_m` in the free module `M(m)`.
//!
//! A pair of adjacent modes violating the difference condition is rewritten by
//!
//! ```text
//! b(s)b(t) = sum_j (-1)^j C(-g, j)   b(t-g-j) b(s+g+j)
//!          + sum_j (-1)^j C(-g, j+1) b(s-1-j) b(t+1+j)
//! ```
//!
//! and a vector `b(-n_j)...b(-n_1)v_m` vanishes as soon as
//! `n_1 + ... + n_j < g j(j-1)/2 + (m+1) j`. Both sums are cut off where the
//! new inner prefix falls below that bound.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::arith::{common_denom, gen_binom, Rat};
use crate::error::{Error, Result};

pub const STEP_BUDGET: u64 = 10_000_000;

type Terms = BTreeMap<Vec<i64>, Rat>;

fn add_into(acc: &mut Terms, key: Vec<i64>, c: Rat) {
    if c.is_zero() {
        return;
    }
    match acc.get_mut(&key) {
        Some(e) => {
            *e += &c;
            if e.is_zero() {
                acc.remove(&key);
            }
        }
        None => {
            acc.insert(key, c);
        }
    }
}

/// Finite combination of basis monomials of `M(m)`.
///
/// Keys are mode sequences innermost first, as numerators over `denom`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinComb {
    denom: i64,
    m: Rat,
    terms: Terms,
}

impl LinComb {
    pub fn zero(denom: i64, m: Rat) -> LinComb {
        LinComb { denom, m, terms: Terms::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    /// `(modes innermost first, coefficient)` in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<Rat>, &Rat)> + '_ {
        self.terms.iter().map(move |(k, c)| (k.iter().map(|&n| Rat::new(n, self.denom)).collect(), c))
    }

    /// Scaled keys, innermost first.
    pub fn raw(&self) -> &BTreeMap<Vec<i64>, Rat> {
        &self.terms
    }

    pub fn coeff(&self, modes_inner_first: &[Rat]) -> Rat {
        let key: Option<Vec<i64>> = modes_inner_first.iter().map(|n| n.scaled(self.denom).ok()).collect();
        key.and_then(|k| self.terms.get(&k).cloned()).unwrap_or_default()
    }
}

impl fmt::Display for LinComb {
    /// `c * b(..)..b(..)v_m` terms, outermost mode first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let mut word = String::new();
            for &n in k.iter().rev() {
                word.push_str(&format!("b({})", -Rat::new(n, self.denom)));
            }
            word.push_str(&format!("v_{}", self.m));
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if i == 0 {
                let lead = if sign == "-" { "-" } else { "" };
                write!(f, "{lead}{mag} * {word}")?;
            } else {
                write!(f, " {sign} {mag} * {word}")?;
            }
        }
        Ok(())
    }
}

/// One term of the straightening relation: `coef * b(outer) b(inner)` (mode arguments).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairTerm {
    pub coef: Rat,
    pub outer: Rat,
    pub inner: Rat,
}

/// Terms `j = 0..=j_max` of both sums rewriting `b(s)b(t)`.
pub fn straighten_pair(s: &Rat, t: &Rat, g: &Rat, j_max: u32) -> Vec<PairTerm> {
    let mg = -g;
    let mut out = Vec::new();
    for j in 0..=j_max {
        let jr = Rat::int(i64::from(j));
        let sign = if j % 2 == 0 { Rat::one() } else { -Rat::one() };
        out.push(PairTerm { coef: &sign * &gen_binom(&mg, j), outer: t - g - &jr, inner: s + g + &jr });
    }
    for j in 0..=j_max {
        let jr = Rat::int(i64::from(j));
        let sign = if j % 2 == 0 { Rat::one() } else { -Rat::one() };
        out.push(PairTerm {
            coef: &sign * &gen_binom(&mg, j + 1),
            outer: s - &Rat::one() - &jr,
            inner: t + &Rat::one() + &jr,
        });
    }
    out
}

/// Rewriting engine for `M(m)` over `F(g)`, with memoized normal forms.
pub struct Rewriter {
    g: Rat,
    m: Rat,
    l: i64,
    gap: i64,
    first: i64,
    c1: Vec<Rat>,
    c2: Vec<Rat>,
    act_cache: HashMap<(i64, Vec<i64>), Terms>,
    outer_cache: HashMap<Vec<i64>, Terms>,
    steps: u64,
    budget: u64,
}

impl Rewriter {
    pub fn new(g: &Rat, m: &Rat) -> Result<Rewriter> {
        let l = common_denom([g, m])?;
        Ok(Rewriter {
            g: g.clone(),
            m: m.clone(),
            l,
            gap: g.scaled(l)?,
            first: (m + &Rat::one()).scaled(l)?,
            c1: Vec::new(),
            c2: Vec::new(),
            act_cache: HashMap::new(),
            outer_cache: HashMap::new(),
            steps: 0,
            budget: STEP_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Rewriter {
        self.budget = budget;
        self
    }

    pub fn g(&self) -> &Rat {
        &self.g
    }

    pub fn m(&self) -> &Rat {
        &self.m
    }

    pub fn mode_denom(&self) -> i64 {
        self.l
    }

    /// Number of memoized normal forms.
    pub fn cache_len(&self) -> usize {
        self.act_cache.len() + self.outer_cache.len()
    }

    fn coef1(&mut self, j: usize) -> Rat {
        while self.c1.len() <= j {
            let k = self.c1.len() as u32;
            let sign = if k % 2 == 0 { Rat::one() } else { -Rat::one() };
            self.c1.push(sign * gen_binom(&-&self.g, k));
        }
        self.c1[j].clone()
    }

    fn coef2(&mut self, j: usize) -> Rat {
        while self.c2.len() <= j {
            let k = self.c2.len() as u32;
            let sign = if k % 2 == 0 { Rat::one() } else { -Rat::one() };
            self.c2.push(sign * gen_binom(&-&self.g, k + 1));
        }
        self.c2[j].clone()
    }

    fn min_sum(&self, j: i64) -> i64 {
        j * self.first + self.gap * j * (j - 1) / 2
    }

    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(Error::Divergence(self.budget))
        } else {
            Ok(())
        }
    }

    /// Scales modes (innermost first) and checks that `n_j - m - g(j-1)` is an integer.
    pub fn scale_modes(&self, modes: &[Rat]) -> Result<Vec<i64>> {
        let mut out = Vec::with_capacity(modes.len());
        for (j, n) in modes.iter().enumerate() {
            let off = n - &self.m - &self.g * &Rat::int(j as i64);
            if !off.is_integer() {
                return Err(Error::IllegalCoset(format!(
                    "mode {n} at position {} for g={}, m={}",
                    j + 1,
                    self.g,
                    self.m
                )));
            }
            out.push(n.scaled(self.l)?);
        }
        Ok(out)
    }

    fn zero_scaled(&self, w: &[i64]) -> bool {
        let mut sum = 0i64;
        for (j, &n) in w.iter().enumerate() {
            sum += n;
            if sum < self.min_sum(j as i64 + 1) {
                return true;
            }
        }
        false
    }

    fn basis_scaled(&self, w: &[i64]) -> bool {
        w.first().map_or(true, |&n| n >= self.first) && w.windows(2).all(|p| p[1] - p[0] >= self.gap)
    }

    /// Whether some prefix of the monomial falls below the degree bound (so it vanishes).
    pub fn is_zero_by_truncation(&self, modes: &[Rat]) -> Result<bool> {
        Ok(self.zero_scaled(&self.scale_modes(modes)?))
    }

    pub fn is_basis(&self, modes: &[Rat]) -> Result<bool> {
        Ok(self.basis_scaled(&self.scale_modes(modes)?))
    }

    fn wrap(&self, terms: Terms) -> LinComb {
        LinComb { denom: self.l, m: self.m.clone(), terms }
    }

    /// The generator `v_m`.
    pub fn generator(&self) -> LinComb {
        let mut t = Terms::new();
        t.insert(Vec::new(), Rat::one());
        self.wrap(t)
    }

    /// Normal form by fixing the innermost violation first.
    pub fn normal_form(&mut self, modes: &[Rat]) -> Result<LinComb> {
        let w = self.scale_modes(modes)?;
        self.steps = 0;
        let t = self.nf_scaled(&w)?;
        Ok(self.wrap(t))
    }

    pub(crate) fn nf_scaled(&mut self, w: &[i64]) -> Result<Terms> {
        let mut v = Terms::new();
        v.insert(Vec::new(), Rat::one());
        for &n in w {
            v = self.act_terms(n, &v)?;
            if v.is_empty() {
                break;
            }
        }
        Ok(v)
    }

    fn act_terms(&mut self, n: i64, v: &Terms) -> Result<Terms> {
        let mut out = Terms::new();
        for (w, c) in v {
            let img = self.act_basis(n, w)?;
            for (k, d) in img {
                add_into(&mut out, k, c * &d);
            }
        }
        Ok(out)
    }

    /// `b(-n)` applied to a combination of basis monomials.
    pub fn act(&mut self, n: &Rat, v: &LinComb) -> Result<LinComb> {
        if v.denom != self.l || v.m != self.m {
            return Err(Error::Invariant("combination belongs to another module".into()));
        }
        let ns = n.scaled(self.l).ok();
        let mut out = Terms::new();
        for (w, c) in &v.terms {
            let off = n - &self.m - &self.g * &Rat::int(w.len() as i64);
            let ns = match (off.is_integer(), ns) {
                (true, Some(x)) => x,
                _ => return Err(Error::IllegalCoset(format!("mode {n} on a vector of charge {}", w.len()))),
            };
            self.steps = 0;
            for (k, d) in self.act_basis(ns, w)? {
                add_into(&mut out, k, c * &d);
            }
        }
        Ok(self.wrap(out))
    }

    /// Normal form of `b(-n) w` for a basis monomial `w`.
    fn act_basis(&mut self, n: i64, w: &[i64]) -> Result<Terms> {
        let r = w.len();
        let total: i64 = w.iter().sum::<i64>() + n;
        if total < self.min_sum(r as i64 + 1) {
            return Ok(Terms::new());
        }
        if r == 0 || n - w[r - 1] >= self.gap {
            let mut k = w.to_vec();
            k.push(n);
            let mut t = Terms::new();
            t.insert(k, Rat::one());
            return Ok(t);
        }
        let key = (n, w.to_vec());
        if let Some(t) = self.act_cache.get(&key) {
            return Ok(t.clone());
        }
        let t = w[r - 1];
        let u = &w[..r - 1];
        let lo = self.min_sum(r as i64) - u.iter().sum::<i64>();
        let mut out = Terms::new();
        // (inner, outer, coefficient) for both sums
        let mut j = 0usize;
        loop {
            let inner = n - self.gap - j as i64 * self.l;
            if inner < lo {
                break;
            }
            let c = self.coef1(j);
            self.apply_pair(u, inner, t + self.gap + j as i64 * self.l, &c, &mut out)?;
            j += 1;
        }
        let mut j = 0usize;
        loop {
            let inner = t - self.l - j as i64 * self.l;
            if inner < lo {
                break;
            }
            let c = self.coef2(j);
            self.apply_pair(u, inner, n + self.l + j as i64 * self.l, &c, &mut out)?;
            j += 1;
        }
        self.act_cache.insert(key, out.clone());
        Ok(out)
    }

    fn apply_pair(&mut self, u: &[i64], inner: i64, outer: i64, c: &Rat, out: &mut Terms) -> Result<()> {
        self.tick()?;
        if c.is_zero() {
            return Ok(());
        }
        let first = self.act_basis(inner, u)?;
        for (w2, c2) in first {
            let coef = c * &c2;
            for (k, c3) in self.act_basis(outer, &w2)? {
                add_into(out, k, &coef * &c3);
            }
        }
        Ok(())
    }

    /// Normal form by always rewriting the outermost violating pair.
    pub fn normal_form_outermost(&mut self, modes: &[Rat]) -> Result<LinComb> {
        let w = self.scale_modes(modes)?;
        self.steps = 0;
        let t = self.nf_outer(&w)?;
        Ok(self.wrap(t))
    }

    fn nf_outer(&mut self, w: &[i64]) -> Result<Terms> {
        if self.zero_scaled(w) {
            return Ok(Terms::new());
        }
        let Some(i) = (0..w.len().saturating_sub(1)).rev().find(|&i| w[i + 1] - w[i] < self.gap) else {
            let mut t = Terms::new();
            t.insert(w.to_vec(), Rat::one());
            return Ok(t);
        };
        if let Some(t) = self.outer_cache.get(w) {
            return Ok(t.clone());
        }
        let (t, n) = (w[i], w[i + 1]);
        let lo = self.min_sum(i as i64 + 1) - w[..i].iter().sum::<i64>();
        let mut out = Terms::new();
        let mut moves: Vec<(i64, i64, Rat)> = Vec::new();
        let mut j = 0usize;
        while n - self.gap - j as i64 * self.l >= lo {
            moves.push((n - self.gap - j as i64 * self.l, t + self.gap + j as i64 * self.l, self.coef1(j)));
            j += 1;
        }
        let mut j = 0usize;
        while t - self.l - j as i64 * self.l >= lo {
            moves.push((t - self.l - j as i64 * self.l, n + self.l + j as i64 * self.l, self.coef2(j)));
            j += 1;
        }
        for (inner, outer, c) in moves {
            self.tick()?;
            if c.is_zero() {
                continue;
            }
            let mut next = w.to_vec();
            next[i] = inner;
            next[i + 1] = outer;
            for (k, d) in self.nf_outer(&next)? {
                add_into(&mut out, k, &c * &d);
            }
        }
        self.outer_cache.insert(w.to_vec(), out.clone());
        Ok(out)
    }
}

/// Drops every monomial whose outermost mode is at least `k`.
pub fn quotient_reduce(v: &LinComb, k: &Rat) -> LinComb {
    let mut out = v.clone();
    out.terms.retain(|w, _| w.last().map_or(true, |&n| &Rat::new(n, v.denom) < k));
    out
}

/// A monomial read from text such as `b(-5/2) b(-3/2) | g=1/2 m=0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedMonomial {
    /// Degrees `n_1, ..., n_r` (mode arguments negated), innermost first.
    pub modes: Vec<Rat>,
    pub g: Option<Rat>,
    pub m: Option<Rat>,
}

/// Parses `b(x_r) ... b(x_1) [v_m] [| g=.. m=..]`, outermost first.
pub fn parse_monomial(text: &str) -> Result<ParsedMonomial> {
    let (word, params) = match text.split_once('|') {
        Some((a, b)) => (a, Some(b)),
        None => (text, None),
    };
    let mut args = Vec::new();
    let mut m = None;
    let mut rest = word.trim();
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix("b(") {
            let close = after.find(')').ok_or_else(|| Error::Parse(format!("unclosed mode in {text:?}")))?;
            args.push(after[..close].parse::<Rat>()?);
            rest = after[close + 1..].trim_start();
        } else if let Some(after) = rest.strip_prefix("v_") {
            let end = after.find(char::is_whitespace).unwrap_or(after.len());
            m = Some(after[..end].parse::<Rat>()?);
            rest = after[end..].trim_start();
        } else if let Some(after) = rest.strip_prefix('1') {
            rest = after.trim_start();
        } else {
            return Err(Error::Parse(format!("unexpected input {rest:?}")));
        }
    }
    let mut g = None;
    for kv in params.unwrap_or("").split_whitespace() {
        match kv.split_once('=') {
            Some(("g", v)) => g = Some(v.parse()?),
            Some(("m", v)) => m = Some(v.parse()?),
            _ => return Err(Error::Parse(format!("bad parameter {kv:?}"))),
        }
    }
    let modes = args.into_iter().rev().map(|x| -x).collect();
    Ok(ParsedMonomial { modes, g, m })
}
