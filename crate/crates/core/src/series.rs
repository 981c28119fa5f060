//! Truncated bivariate series in `z`, `q` with rational exponents and exact coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{common_denom, lcm, Rat, ScaledExponent};
use crate::error::{Error, Result};

/// Inclusive range of `z` exponents (numerators over the series' `z` denominator)
/// inside which a series is known to be complete. `None` means unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ZWindow {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl ZWindow {
    fn contains(&self, z: i64) -> bool {
        self.lo.map_or(true, |l| z >= l) && self.hi.map_or(true, |h| z <= h)
    }

    fn scaled(self, f: i64) -> Result<ZWindow> {
        let s = |x: Option<i64>| x.map(|v| v.checked_mul(f).ok_or(Error::Overflow)).transpose();
        Ok(ZWindow { lo: s(self.lo)?, hi: s(self.hi)? })
    }

    fn intersect(a: Option<ZWindow>, b: Option<ZWindow>) -> Option<ZWindow> {
        match (a, b) {
            (None, w) | (w, None) => w,
            (Some(a), Some(b)) => Some(ZWindow { lo: opt_max(a.lo, b.lo), hi: opt_min(a.hi, b.hi) }),
        }
    }
}

fn opt_max(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) | (None, x) => x,
    }
}

fn opt_min(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) | (None, x) => x,
    }
}

/// Bivariate series `sum c * z^(zNum/zDenom) q^(qNum/qDenom)`.
///
/// `q_cutoff == None` marks an exact (finitely supported) Laurent polynomial.
/// Otherwise every coefficient with `q` exponent at most the cutoff is known,
/// restricted to `z_window` when one is present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiSeries {
    z_denom: i64,
    q_denom: i64,
    terms: BTreeMap<(i64, i64), Rat>,
    q_cutoff: Option<i64>,
    z_window: Option<ZWindow>,
}

impl BiSeries {
    pub fn zero_exact() -> BiSeries {
        BiSeries { z_denom: 1, q_denom: 1, terms: BTreeMap::new(), q_cutoff: None, z_window: None }
    }

    pub fn one() -> BiSeries {
        BiSeries::monomial(Rat::one(), &Rat::zero(), &Rat::zero()).expect("unit monomial")
    }

    /// Empty series over the given denominators.
    pub fn empty(z_denom: i64, q_denom: i64, q_cutoff: Option<i64>) -> BiSeries {
        assert!(z_denom > 0 && q_denom > 0);
        BiSeries { z_denom, q_denom, terms: BTreeMap::new(), q_cutoff, z_window: None }
    }

    /// Exact monomial `c z^z q^q`.
    pub fn monomial(c: Rat, z: &Rat, q: &Rat) -> Result<BiSeries> {
        let zd = common_denom([z])?;
        let qd = common_denom([q])?;
        let mut s = BiSeries::empty(zd, qd, None);
        s.add_term(z.scaled(zd)?, q.scaled(qd)?, c);
        Ok(s)
    }

    pub fn z_denom(&self) -> i64 {
        self.z_denom
    }

    pub fn q_denom(&self) -> i64 {
        self.q_denom
    }

    pub fn is_exact(&self) -> bool {
        self.q_cutoff.is_none()
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

    pub fn q_cutoff(&self) -> Option<Rat> {
        self.q_cutoff.map(|c| Rat::new(c, self.q_denom))
    }

    pub fn q_cutoff_num(&self) -> Option<i64> {
        self.q_cutoff
    }

    pub fn z_window(&self) -> Option<ZWindow> {
        self.z_window
    }

    /// Terms in `(q, z)` order as scaled exponents.
    pub fn terms(&self) -> impl Iterator<Item = (ScaledExponent, ScaledExponent, &Rat)> + '_ {
        self.terms
            .iter()
            .map(move |(&(q, z), c)| (ScaledExponent::new(z, self.z_denom), ScaledExponent::new(q, self.q_denom), c))
    }

    /// Raw `((qNum, zNum), coef)` access.
    pub fn raw_terms(&self) -> &BTreeMap<(i64, i64), Rat> {
        &self.terms
    }

    pub fn coeff(&self, z: &Rat, q: &Rat) -> Rat {
        match (z.scaled(self.z_denom), q.scaled(self.q_denom)) {
            (Ok(zn), Ok(qn)) => self.terms.get(&(qn, zn)).cloned().unwrap_or_default(),
            _ => Rat::zero(),
        }
    }

    /// Smallest stored `q` exponent (numerator).
    pub fn min_q_num(&self) -> Option<i64> {
        self.terms.keys().next().map(|k| k.0)
    }

    pub fn min_q(&self) -> Option<Rat> {
        self.min_q_num().map(|q| Rat::new(q, self.q_denom))
    }

    pub fn max_q(&self) -> Option<Rat> {
        self.terms.keys().next_back().map(|k| Rat::new(k.0, self.q_denom))
    }

    /// Adds `c z^(z/zDenom) q^(q/qDenom)`, dropping it beyond the cutoff.
    pub fn add_term(&mut self, z: i64, q: i64, c: Rat) {
        if c.is_zero() || self.q_cutoff.is_some_and(|cut| q > cut) {
            return;
        }
        let e = self.terms.entry((q, z)).or_default();
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&(q, z));
        }
    }

    pub fn with_z_window(mut self, w: Option<ZWindow>) -> BiSeries {
        self.z_window = w;
        self
    }

    /// Re-expresses over multiples of the current denominators.
    pub fn rescaled(&self, z_denom: i64, q_denom: i64) -> Result<BiSeries> {
        if z_denom % self.z_denom != 0 || q_denom % self.q_denom != 0 {
            return Err(Error::Denominator(format!(
                "cannot rescale (1/{}, 1/{}) to (1/{z_denom}, 1/{q_denom})",
                self.z_denom, self.q_denom
            )));
        }
        let fz = z_denom / self.z_denom;
        let fq = q_denom / self.q_denom;
        let mul = |v: i64, f: i64| v.checked_mul(f).ok_or(Error::Overflow);
        let mut terms = BTreeMap::new();
        for (&(q, z), c) in &self.terms {
            terms.insert((mul(q, fq)?, mul(z, fz)?), c.clone());
        }
        Ok(BiSeries {
            z_denom,
            q_denom,
            terms,
            q_cutoff: self.q_cutoff.map(|c| mul(c, fq)).transpose()?,
            z_window: self.z_window.map(|w| w.scaled(fz)).transpose()?,
        })
    }

    fn common(&self, o: &BiSeries) -> Result<(BiSeries, BiSeries)> {
        let zd = lcm(self.z_denom, o.z_denom)?;
        let qd = lcm(self.q_denom, o.q_denom)?;
        Ok((self.rescaled(zd, qd)?, o.rescaled(zd, qd)?))
    }

    /// Lowers the cutoff to `cut` (never raises it) and drops the excess terms.
    pub fn truncate(&self, cut: &Rat) -> Result<BiSeries> {
        let qd = lcm(self.q_denom, common_denom([cut])?)?;
        let mut s = self.rescaled(self.z_denom, qd)?;
        let c = cut.floor_scaled(qd)?;
        let c = s.q_cutoff.map_or(c, |old| old.min(c));
        s.q_cutoff = Some(c);
        s.terms.retain(|&(q, _), _| q <= c);
        Ok(s)
    }

    pub fn add(&self, o: &BiSeries) -> Result<BiSeries> {
        let (mut a, b) = self.common(o)?;
        let cut = match (a.q_cutoff, b.q_cutoff) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) | (None, x) => x,
        };
        a.q_cutoff = cut;
        a.z_window = ZWindow::intersect(a.z_window, b.z_window);
        a.terms.retain(|&(q, _), _| cut.map_or(true, |c| q <= c));
        for (&(q, z), c) in &b.terms {
            a.add_term(z, q, c.clone());
        }
        Ok(a)
    }

    pub fn neg(&self) -> BiSeries {
        let mut s = self.clone();
        for c in s.terms.values_mut() {
            *c = -&*c;
        }
        s
    }

    pub fn sub(&self, o: &BiSeries) -> Result<BiSeries> {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &Rat) -> BiSeries {
        let mut s = self.clone();
        if k.is_zero() {
            s.terms.clear();
        } else {
            for c in s.terms.values_mut() {
                *c = &*c * k;
            }
        }
        s
    }

    /// Product, complete up to the largest `q` degree both factors determine.
    ///
    /// Series restricted to a `z` window can only be multiplied by exact
    /// monomials (see [`BiSeries::shift`]).
    pub fn mul(&self, o: &BiSeries) -> Result<BiSeries> {
        if self.z_window.is_some() || o.z_window.is_some() {
            return Err(Error::Invariant("product of series truncated in charge is not supported".into()));
        }
        let (a, b) = self.common(o)?;
        let (zd, qd) = (a.z_denom, a.q_denom);
        // lowest q degree a series can possibly carry; None for the exact zero
        let lower = |s: &BiSeries| match (s.min_q_num(), s.q_cutoff) {
            (None, None) => None,
            (Some(m), None) => Some(m),
            (m, Some(c)) => Some(m.map_or(c, |m| m.min(c))),
        };
        let (la, lb) = match (lower(&a), lower(&b)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Ok(BiSeries::empty(zd, qd, None)),
        };
        let mut cut: Option<i64> = None;
        if let Some(ac) = a.q_cutoff {
            cut = opt_min(cut, Some(ac + lb));
        }
        if let Some(bc) = b.q_cutoff {
            cut = opt_min(cut, Some(bc + la));
        }
        let bmin = b.min_q_num().unwrap_or(0);
        let mut out = BiSeries::empty(zd, qd, cut);
        for (&(qa, za), ca) in &a.terms {
            if cut.is_some_and(|c| qa + bmin > c) {
                break;
            }
            for (&(qb, zb), cb) in &b.terms {
                let q = qa + qb;
                if cut.is_some_and(|c| q > c) {
                    break;
                }
                out.add_term(za + zb, q, ca * cb);
            }
        }
        Ok(out)
    }

    /// Multiplies by `z^z q^q`.
    pub fn shift(&self, z: &Rat, q: &Rat) -> Result<BiSeries> {
        let zd = lcm(self.z_denom, common_denom([z])?)?;
        let qd = lcm(self.q_denom, common_denom([q])?)?;
        let s = self.rescaled(zd, qd)?;
        let dz = z.scaled(zd)?;
        let dq = q.scaled(qd)?;
        let mut terms = BTreeMap::new();
        for ((qq, zz), c) in s.terms {
            terms.insert((qq + dq, zz + dz), c);
        }
        Ok(BiSeries {
            z_denom: zd,
            q_denom: qd,
            terms,
            q_cutoff: s.q_cutoff.map(|c| c + dq),
            z_window: s.z_window.map(|w| ZWindow { lo: w.lo.map(|l| l + dz), hi: w.hi.map(|h| h + dz) }),
        })
    }

    /// Substitutes `z -> z^a q^b` in an exact series.
    pub fn substitute(&self, a: &Rat, b: &Rat) -> Result<BiSeries> {
        if !self.is_exact() || self.z_window.is_some() {
            return Err(Error::Invariant("monomial substitution needs an exact series".into()));
        }
        let mut out = BiSeries::zero_exact();
        for (z, q, c) in self.terms() {
            let zr = z.to_rat();
            let m = BiSeries::monomial(c.clone(), &(a * &zr), &(q.to_rat() + b * &zr))?;
            out = out.add(&m)?;
        }
        Ok(out)
    }

    /// `z -> z^-1`.
    pub fn invert_z(&self) -> BiSeries {
        let mut s = self.clone();
        s.terms = self.terms.iter().map(|(&(q, z), c)| ((q, -z), c.clone())).collect();
        s.z_window = self.z_window.map(|w| ZWindow { lo: w.hi.map(|h| -h), hi: w.lo.map(|l| -l) });
        s
    }

    /// Keeps only the terms whose `z` exponent satisfies `keep`.
    pub fn filter_z(&self, keep: impl Fn(&Rat) -> bool) -> BiSeries {
        let mut s = self.clone();
        let zd = self.z_denom;
        s.terms.retain(|&(_, z), _| keep(&Rat::new(z, zd)));
        s
    }

    /// Canonical form: smallest denominators that still express every exponent.
    pub fn canonical(&self) -> Result<BiSeries> {
        let mut zs: Vec<Rat> = Vec::new();
        let mut qs: Vec<Rat> = Vec::new();
        for (z, q, _) in self.terms() {
            zs.push(z.to_rat());
            qs.push(q.to_rat());
        }
        let mut zd = common_denom(zs.iter())?;
        let mut qd = common_denom(qs.iter())?;
        if let Some(c) = self.q_cutoff() {
            qd = lcm(qd, common_denom([&c])?)?;
        }
        if let Some(w) = self.z_window {
            for v in [w.lo, w.hi].into_iter().flatten() {
                zd = lcm(zd, common_denom([&Rat::new(v, self.z_denom)])?)?;
            }
        }
        let (zd, qd) = (lcm(zd, 1)?, lcm(qd, 1)?);
        let mut out = BiSeries::empty(zd, qd, None);
        for (z, q, c) in self.terms() {
            out.terms.insert((q.to_rat().scaled(qd)?, z.to_rat().scaled(zd)?), c.clone());
        }
        out.q_cutoff = self.q_cutoff().map(|c| c.scaled(qd)).transpose()?;
        out.z_window = match self.z_window {
            None => None,
            Some(w) => {
                let f = |v: Option<i64>| v.map(|x| Rat::new(x, self.z_denom).scaled(zd)).transpose();
                Some(ZWindow { lo: f(w.lo)?, hi: f(w.hi)? })
            }
        };
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (&(q, z), c) in &self.terms {
            let n = c.numer().to_i64().ok_or(Error::Overflow)?;
            let d = c.denom().to_i64().ok_or(Error::Overflow)?;
            terms.push([z, q, n, d]);
        }
        let j = SeriesJson {
            z_denom: self.z_denom,
            q_denom: self.q_denom,
            q_cutoff_num: self.q_cutoff,
            z_window: self.z_window.map(|w| [w.lo, w.hi]),
            terms,
        };
        serde_json::to_string(&j).map_err(|e| Error::Json(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<BiSeries> {
        let j: SeriesJson = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        if j.z_denom <= 0 || j.q_denom <= 0 {
            return Err(Error::Json("denominators must be positive".into()));
        }
        let mut s = BiSeries::empty(j.z_denom, j.q_denom, j.q_cutoff_num);
        s.z_window = j.z_window.map(|[lo, hi]| ZWindow { lo, hi });
        let mut prev: Option<(i64, i64)> = None;
        for [z, q, n, d] in j.terms {
            if prev.is_some_and(|p| p >= (q, z)) {
                return Err(Error::Json("terms must be strictly sorted by (qNum, zNum)".into()));
            }
            prev = Some((q, z));
            if d <= 0 || n == 0 {
                return Err(Error::Json(format!("bad coefficient {n}/{d}")));
            }
            let c = Rat::new(n, d);
            if c.numer() != &BigInt::from(n) {
                return Err(Error::Json(format!("coefficient {n}/{d} not in lowest terms")));
            }
            if j.q_cutoff_num.is_some_and(|cut| q > cut) {
                return Err(Error::Json(format!("term q^{q} beyond cutoff")));
            }
            s.terms.insert((q, z), c);
        }
        Ok(s)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    #[serde(rename = "zDenom")]
    z_denom: i64,
    #[serde(rename = "qDenom")]
    q_denom: i64,
    #[serde(rename = "qCutoffNum")]
    q_cutoff_num: Option<i64>,
    #[serde(rename = "zWindow", default, skip_serializing_if = "Option::is_none")]
    z_window: Option<[Option<i64>; 2]>,
    terms: Vec<[i64; 4]>,
}

trait FloorScaled {
    fn floor_scaled(&self, den: i64) -> Result<i64>;
}

impl FloorScaled for Rat {
    fn floor_scaled(&self, den: i64) -> Result<i64> {
        (self * &Rat::int(den)).floor().to_i64().ok_or(Error::Overflow)
    }
}

fn fmt_pow(var: &str, e: &Rat) -> String {
    if e.is_zero() {
        String::new()
    } else if e == &Rat::one() {
        var.to_string()
    } else if e.is_integer() && e.is_positive() {
        format!("{var}^{e}")
    } else {
        format!("{var}^({e})")
    }
}

fn fmt_term(c: &Rat, parts: &[String]) -> String {
    let vars: Vec<&String> = parts.iter().filter(|p| !p.is_empty()).collect();
    let body = vars.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("*");
    if body.is_empty() {
        return c.to_string();
    }
    if c == &Rat::one() {
        body
    } else if c == &-Rat::one() {
        format!("-{body}")
    } else {
        format!("{c}*{body}")
    }
}

fn join_signed(items: &[String]) -> String {
    let mut out = String::new();
    for (i, t) in items.iter().enumerate() {
        if i == 0 {
            out.push_str(t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(t);
        }
    }
    out
}

impl fmt::Display for BiSeries {
    /// Grouped by `z` power, e.g. `1 + z*(q + q^2) + z^2*q^4 + O(q^5)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut groups: BTreeMap<i64, Vec<(i64, &Rat)>> = BTreeMap::new();
        for (&(q, z), c) in &self.terms {
            groups.entry(z).or_default().push((q, c));
        }
        let mut pieces = Vec::new();
        for (z, qs) in groups {
            let zs = fmt_pow("z", &Rat::new(z, self.z_denom));
            if qs.len() == 1 {
                let (q, c) = qs[0];
                pieces.push(fmt_term(c, &[zs, fmt_pow("q", &Rat::new(q, self.q_denom))]));
            } else {
                let inner: Vec<String> =
                    qs.iter().map(|&(q, c)| fmt_term(c, &[fmt_pow("q", &Rat::new(q, self.q_denom))])).collect();
                let inner = join_signed(&inner);
                if zs.is_empty() {
                    pieces.push(inner);
                } else {
                    pieces.push(format!("{zs}*({inner})"));
                }
            }
        }
        if pieces.is_empty() {
            pieces.push("0".into());
        }
        if let Some(c) = self.q_cutoff {
            let next = Rat::new(c + 1, self.q_denom);
            pieces.push(format!("O({})", fmt_pow("q", &next).replace("q^0", "1")));
        }
        write!(f, "{}", join_signed(&pieces))
    }
}

/// First coefficient at which two series differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub z: String,
    pub q: String,
    pub left: String,
    pub right: String,
}

/// Outcome of comparing two series on their common window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EqReport {
    pub equal: bool,
    pub mismatch: Option<Mismatch>,
    /// Largest `q` degree compared, `None` when both sides are exact.
    pub q_cutoff: Option<String>,
    /// Range of `z` exponents compared, when limited.
    pub z_window: Option<(Option<String>, Option<String>)>,
    pub terms_compared: usize,
}

/// Exact coefficient-wise comparison on the intersection of both windows.
pub fn series_eq(a: &BiSeries, b: &BiSeries) -> Result<EqReport> {
    let (a, b) = a.common(b)?;
    let cut = match (a.q_cutoff, b.q_cutoff) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) | (None, x) => x,
    };
    let win = ZWindow::intersect(a.z_window, b.z_window);
    let inside = |q: i64, z: i64| cut.map_or(true, |c| q <= c) && win.map_or(true, |w| w.contains(z));
    let mut keys: Vec<(i64, i64)> =
        a.terms.keys().chain(b.terms.keys()).copied().filter(|&(q, z)| inside(q, z)).collect();
    keys.sort_unstable();
    keys.dedup();
    let zero = Rat::zero();
    let mut mismatch = None;
    for &(q, z) in &keys {
        let l = a.terms.get(&(q, z)).unwrap_or(&zero);
        let r = b.terms.get(&(q, z)).unwrap_or(&zero);
        if l != r {
            mismatch = Some(Mismatch {
                z: Rat::new(z, a.z_denom).to_string(),
                q: Rat::new(q, a.q_denom).to_string(),
                left: l.to_string(),
                right: r.to_string(),
            });
            break;
        }
    }
    let zw = win
        .map(|w| (w.lo.map(|v| Rat::new(v, a.z_denom).to_string()), w.hi.map(|v| Rat::new(v, a.z_denom).to_string())));
    Ok(EqReport {
        equal: mismatch.is_none(),
        mismatch,
        q_cutoff: cut.map(|c| Rat::new(c, a.q_denom).to_string()),
        z_window: zw,
        terms_compared: keys.len(),
    })
}

/// Exact polynomial in `q` with integer exponents starting at `q^0`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QPoly {
    coeffs: Vec<BigInt>,
}

impl QPoly {
    pub fn zero() -> QPoly {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> QPoly {
        QPoly { coeffs: vec![BigInt::one()] }
    }

    pub fn from_coeffs(c: Vec<BigInt>) -> QPoly {
        let mut p = QPoly { coeffs: c };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn eval_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    /// `self + q^shift * o`
    pub fn add_shifted(&self, o: &QPoly, shift: usize) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len() + shift);
        let mut c = self.coeffs.clone();
        c.resize(n, BigInt::zero());
        for (i, x) in o.coeffs.iter().enumerate() {
            c[i + shift] += x;
        }
        QPoly::from_coeffs(c)
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut c = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(c)
    }

    /// As an exact series in `q` alone.
    pub fn to_series(&self) -> BiSeries {
        let mut s = BiSeries::empty(1, 1, None);
        for (i, c) in self.coeffs.iter().enumerate() {
            let c = Rat::from_big(c.clone(), BigInt::one()).expect("unit denominator");
            s.add_term(0, i as i64, c);
        }
        s
    }
}

/// Gaussian binomial `[n r]_q`; zero unless `n >= r >= 0`.
pub fn q_binomial(n: i64, r: i64) -> QPoly {
    if r < 0 || n < r {
        return QPoly::zero();
    }
    let r = r.min(n - r) as usize;
    let n = n as usize;
    // row[j] = [i j]_q, built by [i j] = [i-1 j-1] + q^j [i-1 j]
    let mut row: Vec<QPoly> = vec![QPoly::one()];
    for i in 1..=n {
        let width = (i.min(r)) + 1;
        let mut next = Vec::with_capacity(width);
        for j in 0..width {
            let left = if j >= 1 { row.get(j - 1).cloned().unwrap_or_default() } else { QPoly::zero() };
            let up = row.get(j).cloned().unwrap_or_default();
            next.push(left.add_shifted(&up, j));
        }
        row = next;
    }
    row.get(r).cloned().unwrap_or_default()
}

/// Dense coefficients of `1/(q)_r` up to `q^cut`.
pub(crate) fn pochhammer_inv_dense(r: u32, cut: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); cut + 1];
    c[0] = BigInt::one();
    for i in 1..=r as usize {
        divide_one_minus_qi(&mut c, i);
    }
    c
}

fn divide_one_minus_qi(c: &mut [BigInt], i: usize) {
    for d in i..c.len() {
        let prev = c[d - i].clone();
        c[d] += prev;
    }
}

/// Expansion of `1/(q)_r` to `q^cut`.
pub fn q_pochhammer_inv(r: u32, q_cutoff: u32) -> BiSeries {
    let dense = pochhammer_inv_dense(r, q_cutoff as usize);
    let mut s = BiSeries::empty(1, 1, Some(i64::from(q_cutoff)));
    for (i, c) in dense.into_iter().enumerate() {
        s.add_term(0, i as i64, Rat::from_big(c, BigInt::one()).expect("unit denominator"));
    }
    s
}

/// Charges `0..=r_max` that can reach `q` degree `cut` in `sum_r z^(a r) q^(b r + g r^2/2)/(q)_r`,
/// or `None` if the exponent does not grow.
fn auto_charge_bound(g: &Rat, b: &Rat, cut: &Rat) -> Option<u64> {
    let two = Rat::int(2);
    let base = |r: i64| {
        let rr = Rat::int(r);
        g * &rr * &rr / &two + b * &rr
    };
    // eventual growth requires g > 0, or g = 0 and b > 0
    if g.is_negative() || (g.is_zero() && !b.is_positive()) {
        return None;
    }
    let mut last_reachable = 0u64;
    let mut r: i64 = 0;
    loop {
        let cur = base(r);
        if &cur <= cut {
            last_reachable = r as u64;
        }
        let step = base(r + 1) - &cur;
        if &cur > cut && step.is_positive() {
            return Some(last_reachable);
        }
        r += 1;
        if r > 1_000_000 {
            return None;
        }
    }
}

/// Truncation of `F_g(z^a q^b, q) = sum_r z^(a r) q^(b r + g r^2/2)/(q)_r` at `q^cut`.
///
/// Without `charge_max` the charge range is derived from the growth of the
/// exponent; if it does not grow the call fails. With a `charge_max` smaller
/// than needed the result carries a `z` window.
pub fn f_g_series(g: &Rat, z_pow: &Rat, q_shift: &Rat, q_cutoff: &Rat, charge_max: Option<u64>) -> Result<BiSeries> {
    let auto = auto_charge_bound(g, q_shift, q_cutoff);
    let (r_max, complete) = match (auto, charge_max) {
        (Some(a), None) => (a, true),
        (Some(a), Some(c)) => (c, c >= a),
        (None, Some(c)) => (c, false),
        (None, None) => {
            return Err(Error::ChargeBoundRequired(format!("F_g with g={g}, shift {q_shift} does not grow in charge")))
        }
    };
    let half_g = g / &Rat::int(2);
    let zd = common_denom([z_pow])?;
    let qd = lcm(common_denom([q_shift, &half_g])?, common_denom([q_cutoff])?)?;
    let cut = q_cutoff.floor_scaled(qd)?;
    let mut s = BiSeries::empty(zd, qd, Some(cut));
    let zstep = z_pow.scaled(zd)?;
    let mut bases = Vec::with_capacity(r_max as usize + 1);
    for r in 0..=r_max {
        let rr = Rat::int(r as i64);
        bases.push((&half_g * &rr * &rr + q_shift * &rr).scaled(qd)?);
    }
    let most = bases.iter().map(|b| (cut - b) / qd).max().unwrap_or(0).max(0) as usize;
    let mut dense = pochhammer_inv_dense(0, most);
    for (r, &base) in bases.iter().enumerate() {
        if r > 0 {
            divide_one_minus_qi(&mut dense, r);
        }
        if cut < base {
            continue;
        }
        let need = ((cut - base) / qd) as usize;
        for (i, c) in dense.iter().enumerate().take(need + 1) {
            if !c.is_zero() {
                s.add_term(zstep * r as i64, base + i as i64 * qd, Rat::from_big(c.clone(), BigInt::one())?);
            }
        }
    }
    if !complete {
        let edge = zstep * r_max as i64;
        let w = match zstep.signum() {
            1 => ZWindow { lo: None, hi: Some(edge) },
            -1 => ZWindow { lo: Some(edge), hi: None },
            _ => {
                return Err(Error::ChargeBoundRequired(
                    "all charges collapse onto z^0; the charge bound cannot be windowed".into(),
                ))
            }
        };
        s.z_window = Some(w);
    }
    Ok(s)
}

/// Exact polynomial `F_{p,l}(z,q) = sum_r z^r q^(p r^2/2) [l-(p-1)r, r]_q`.
pub fn fib_poly(p: u32, l: i64) -> BiSeries {
    assert!(p >= 1, "p must be positive");
    let p = i64::from(p);
    let mut s = BiSeries::empty(1, 2, None);
    let mut r = 0i64;
    while l - (p - 1) * r >= r {
        let b = q_binomial(l - (p - 1) * r, r);
        let base = p * r * r; // in halves
        for (i, c) in b.coeffs().iter().enumerate() {
            s.add_term(r, base + 2 * i as i64, Rat::from_big(c.clone(), BigInt::one()).expect("unit"));
        }
        r += 1;
    }
    s
}

/// Truncated character of the lattice coset `Q - l*w`:
/// `(1/(q)_inf) * sum_n z^(n - l/p) q^((p n - l)^2/(2p))`.
pub fn lattice_char(p: u32, l: u32, q_cutoff: &Rat) -> Result<BiSeries> {
    if p == 0 || l >= p {
        return Err(Error::InvalidSpec(format!("need 0 <= l < p, got p={p}, l={l}")));
    }
    let (pi, li) = (i64::from(p), i64::from(l));
    let qd = lcm(2 * pi, common_denom([q_cutoff])?)?;
    let cut = q_cutoff.floor_scaled(qd)?;
    let mut theta = BiSeries::empty(pi, qd, Some(cut));
    // q exponent (pn - l)^2/(2p) scaled by qd
    let scale = qd / (2 * pi);
    let mut n = 0i64;
    loop {
        let mut any = false;
        for nn in if n == 0 { vec![0] } else { vec![n, -n] } {
            let e = (pi * nn - li) * (pi * nn - li) * scale;
            if e <= cut {
                any = true;
                theta.add_term(pi * nn - li, e, Rat::one());
            }
        }
        if !any && n > 0 {
            break;
        }
        n += 1;
    }
    let whole = if cut < 0 { 0 } else { (cut / qd) as u32 };
    let euler = q_pochhammer_inv(whole, whole);
    let euler = euler.truncate(&Rat::new(cut, qd))?;
    theta.mul(&euler)
}
