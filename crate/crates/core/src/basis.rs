//! Monomial bases defined by difference conditions, their bigraded dimensions and characters.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::arith::{common_denom, lcm, Rat};
use crate::error::{Error, Result};
use crate::module::{Family, ModuleSpec};
use crate::series::{f_g_series, fib_poly, q_binomial, BiSeries, QPoly, ZWindow};

/// Mode sequences `(n_1, ..., n_r)`, innermost first, as numerators over `mode_denom`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub spec: ModuleSpec,
    pub mode_denom: i64,
    pub seqs: Vec<Vec<i64>>,
    pub q_cutoff: Option<Rat>,
    /// Largest charge enumerated.
    pub charge_max: u64,
    /// Some charge that can reach the cutoff was not enumerated.
    pub window_limited: bool,
}

/// Dimensions of the bigraded pieces, keyed by `(qNum, zNum)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigradedTable {
    pub z_denom: i64,
    pub q_denom: i64,
    pub entries: BTreeMap<(i64, i64), u64>,
    pub q_cutoff: Option<i64>,
    pub charge_max: Option<u64>,
}

/// Exponent bookkeeping for one normalization.
#[derive(Clone, Debug)]
pub(crate) struct Grading {
    pub zd: i64,
    pub qd: i64,
    mode_denom: i64,
    s: i64,
    c: i64,
    e: i64,
    dm1: i64,
}

impl Grading {
    pub fn new(spec: &ModuleSpec) -> Result<Grading> {
        let n = &spec.norm;
        let l = spec.mode_denom()?;
        let zd = common_denom([&n.s, &n.c])?;
        let qd = lcm(l, common_denom([&n.e, &n.d])?)?;
        Ok(Grading {
            zd,
            qd,
            mode_denom: l,
            s: n.s.scaled(zd)?,
            c: n.c.scaled(zd)?,
            e: n.e.scaled(qd)?,
            dm1: (&n.d - &Rat::one()).scaled(qd)?,
        })
    }

    /// `(zNum, qNum)` of a sequence of length `r` with mode sum `sum / mode_denom`.
    pub fn place(&self, r: usize, sum: i64) -> (i64, i64) {
        let r = r as i64;
        (self.s + self.c * r, self.e + sum * (self.qd / self.mode_denom) + self.dm1 * r)
    }
}

struct Enumerator {
    first: i64,
    gap: i64,
    unit: i64,
    bound: Option<i64>,
}

impl Enumerator {
    fn min_sum(&self, r: i64) -> i64 {
        r * self.first + self.gap * r * (r - 1) / 2
    }

    fn fits_bound(&self, r: i64) -> bool {
        r == 0 || self.bound.map_or(true, |b| self.first + (r - 1) * self.gap < b)
    }

    fn run(&self, r: usize, budget: Option<i64>, out: &mut Vec<Vec<i64>>) {
        let mut cur = Vec::with_capacity(r);
        self.rec(r, 0, &mut cur, budget, out);
    }

    fn rec(&self, r: usize, sum: i64, cur: &mut Vec<i64>, budget: Option<i64>, out: &mut Vec<Vec<i64>>) {
        let pos = cur.len();
        if pos == r {
            out.push(cur.clone());
            return;
        }
        let t = (r - pos) as i64;
        let mut x = cur.last().map_or(self.first, |&prev| prev + self.gap);
        loop {
            if budget.is_some_and(|b| sum + t * x + self.gap * t * (t - 1) / 2 > b) {
                break;
            }
            if self.bound.is_some_and(|b| x + (t - 1) * self.gap >= b) {
                break;
            }
            cur.push(x);
            self.rec(r, sum + x, cur, budget, out);
            cur.pop();
            x += self.unit;
        }
    }
}

/// Last charge whose minimal degree `E + (m+D) r + g r(r-1)/2` can reach `cut`,
/// or `None` when that degree never grows past it.
fn charges_reaching(spec: &ModuleSpec, cut: &Rat) -> Option<u64> {
    let n = &spec.norm;
    let slope = &spec.m + &n.d;
    if spec.g.is_negative() || (spec.g.is_zero() && !slope.is_positive()) {
        return None;
    }
    let min_q = |r: i64| {
        let rr = Rat::int(r);
        &n.e + &slope * &rr + &spec.g * &Rat::new(r * (r - 1), 2)
    };
    let mut last = 0u64;
    let mut r = 0i64;
    loop {
        let cur = min_q(r);
        if &cur <= cut {
            last = r as u64;
        }
        if &cur > cut && (min_q(r + 1) - &cur).is_positive() {
            return Some(last);
        }
        r += 1;
    }
}

/// All basis sequences of `spec` up to `q_cutoff` (in the spec's grading) and charge `charge_max`.
///
/// Free families need a cutoff. Without `charge_max` the charge range is
/// derived from the minimal degree of each charge; if that does not grow the
/// call fails.
pub fn enumerate_basis(spec: &ModuleSpec, q_cutoff: Option<&Rat>, charge_max: Option<u64>) -> Result<Basis> {
    spec.validate()?;
    let l = spec.mode_denom()?;
    let en = Enumerator {
        first: (&spec.m + &Rat::one()).scaled(l)?,
        gap: spec.g.scaled(l)?,
        unit: l,
        bound: spec.bound.as_ref().map(|b| b.scaled(l)).transpose()?,
    };
    if !spec.family.is_bounded() && q_cutoff.is_none() {
        return Err(Error::InvalidSpec("free modules need a q cutoff".into()));
    }
    let by_bound = if en.bound.is_some() {
        let mut r = 0i64;
        while en.fits_bound(r + 1) {
            r += 1;
        }
        Some(r as u64)
    } else {
        None
    };
    let by_cut = q_cutoff.and_then(|c| charges_reaching(spec, c));
    let needed = match (by_bound, by_cut) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, None) => a,
        (None, b) => b,
    };
    let (r_max, window_limited) = match (needed, charge_max) {
        (Some(n), None) => (n, false),
        (Some(n), Some(c)) => (n.min(c), c < n),
        (None, Some(c)) => (c, true),
        (None, None) => {
            return Err(Error::ChargeBoundRequired(format!(
                "the minimal degree of {spec} does not grow with the charge"
            )))
        }
    };
    let class = spec.length_class()?;
    let mut seqs = Vec::new();
    for r in 0..=r_max as usize {
        if let Some((p, c)) = class {
            if (r as i64).rem_euclid(p) != c {
                continue;
            }
        }
        if !en.fits_bound(r as i64) {
            break;
        }
        let budget = match q_cutoff {
            Some(cut) => {
                // E + sum/L + (D-1) r <= cut
                let room = cut - &spec.norm.e - (&spec.norm.d - &Rat::one()) * Rat::int(r as i64);
                let b = (room * Rat::int(l)).floor();
                let b: i64 = b.try_into().map_err(|_| Error::Overflow)?;
                if en.min_sum(r as i64) > b {
                    continue;
                }
                Some(b)
            }
            None => None,
        };
        en.run(r, budget, &mut seqs);
    }
    Ok(Basis {
        spec: spec.clone(),
        mode_denom: l,
        seqs,
        q_cutoff: q_cutoff.cloned(),
        charge_max: r_max,
        window_limited,
    })
}

impl Basis {
    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }

    /// Modes of element `i`, innermost first.
    pub fn modes(&self, i: usize) -> Vec<Rat> {
        self.seqs[i].iter().map(|&n| Rat::new(n, self.mode_denom)).collect()
    }

    pub fn table(&self) -> Result<BigradedTable> {
        let gr = Grading::new(&self.spec)?;
        let mut entries = BTreeMap::new();
        for s in &self.seqs {
            let (z, q) = gr.place(s.len(), s.iter().sum());
            *entries.entry((q, z)).or_insert(0u64) += 1;
        }
        let q_cutoff = match &self.q_cutoff {
            Some(c) => Some((c * &Rat::int(gr.qd)).floor().try_into().map_err(|_| Error::Overflow)?),
            None => None,
        };
        Ok(BigradedTable {
            z_denom: gr.zd,
            q_denom: gr.qd,
            entries,
            q_cutoff,
            charge_max: self.window_limited.then_some(self.charge_max),
        })
    }

    /// Printable form of element `i`, outermost mode first.
    pub fn element(&self, i: usize) -> String {
        format_monomial(&self.modes(i), &self.spec)
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct J<'a> {
            family: String,
            g: String,
            m: String,
            bound: Option<String>,
            norm: [String; 4],
            #[serde(rename = "modeDenom")]
            mode_denom: i64,
            #[serde(rename = "qCutoff")]
            q_cutoff: Option<String>,
            #[serde(rename = "chargeMax")]
            charge_max: u64,
            #[serde(rename = "windowLimited")]
            window_limited: bool,
            modes: &'a [Vec<i64>],
        }
        let s = &self.spec;
        let j = J {
            family: s.family.name(),
            g: s.g.to_string(),
            m: s.m.to_string(),
            bound: s.bound.as_ref().map(|b| b.to_string()),
            norm: [&s.norm.c, &s.norm.d, &s.norm.s, &s.norm.e].map(|x| x.to_string()),
            mode_denom: self.mode_denom,
            q_cutoff: self.q_cutoff.as_ref().map(|c| c.to_string()),
            charge_max: self.charge_max,
            window_limited: self.window_limited,
            modes: &self.seqs,
        };
        serde_json::to_string(&j).map_err(|e| Error::Json(e.to_string()))
    }
}

/// `b(-n_r)...b(-n_1)v_m`, or `...1` for the algebras.
pub fn format_monomial(modes_inner_first: &[Rat], spec: &ModuleSpec) -> String {
    let mut s = String::new();
    for n in modes_inner_first.iter().rev() {
        s.push_str(&format!("b({})", -n));
    }
    match spec.family {
        Family::FreeAlgebra | Family::FiniteAlgebra => s.push('1'),
        _ => s.push_str(&format!("v_{}", spec.m)),
    }
    s
}

impl BigradedTable {
    pub fn get(&self, z: &Rat, q: &Rat) -> u64 {
        match (z.scaled(self.z_denom), q.scaled(self.q_denom)) {
            (Ok(zn), Ok(qn)) => self.entries.get(&(qn, zn)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn to_series(&self) -> BiSeries {
        let mut s = BiSeries::empty(self.z_denom, self.q_denom, self.q_cutoff);
        for (&(q, z), &d) in &self.entries {
            s.add_term(z, q, Rat::int(d as i64));
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct J {
            #[serde(rename = "zDenom")]
            z_denom: i64,
            #[serde(rename = "qDenom")]
            q_denom: i64,
            #[serde(rename = "qCutoffNum")]
            q_cutoff_num: Option<i64>,
            #[serde(rename = "chargeMax")]
            charge_max: Option<u64>,
            entries: Vec<[i64; 3]>,
        }
        let entries = self.entries.iter().map(|(&(q, z), &d)| [z, q, d as i64]).collect();
        serde_json::to_string(&J {
            z_denom: self.z_denom,
            q_denom: self.q_denom,
            q_cutoff_num: self.q_cutoff,
            charge_max: self.charge_max,
            entries,
        })
        .map_err(|e| Error::Json(e.to_string()))
    }
}

/// Character by counting basis elements.
pub fn char_from_basis(spec: &ModuleSpec, q_cutoff: Option<&Rat>, charge_max: Option<u64>) -> Result<BiSeries> {
    let b = enumerate_basis(spec, q_cutoff, charge_max)?;
    let mut s = b.table()?.to_series();
    if b.window_limited {
        let gr = Grading::new(spec)?;
        let (edge, _) = gr.place(b.charge_max as usize, 0);
        let w = if spec.norm.c.is_positive() {
            ZWindow { lo: None, hi: Some(edge) }
        } else {
            ZWindow { lo: Some(edge), hi: None }
        };
        s = s.with_z_window(Some(w));
    }
    Ok(s)
}

/// Exact series from blocks `z^zexp q^qexp * poly(q)`.
pub(crate) fn series_from_blocks(blocks: &[(Rat, Rat, QPoly)]) -> Result<BiSeries> {
    let zd = common_denom(blocks.iter().map(|b| &b.0))?;
    let qd = common_denom(blocks.iter().map(|b| &b.1))?;
    let mut s = BiSeries::empty(zd, qd, None);
    for (z, q, poly) in blocks {
        let zn = z.scaled(zd)?;
        let qn = q.scaled(qd)?;
        for (i, c) in poly.coeffs().iter().enumerate() {
            s.add_term(zn, qn + i as i64 * qd, Rat::from_big(c.clone(), 1.into())?);
        }
    }
    Ok(s)
}

fn maybe_truncate(s: BiSeries, cut: Option<&Rat>) -> Result<BiSeries> {
    match cut {
        Some(c) => s.truncate(c),
        None => Ok(s),
    }
}

/// Closed fermionic form of the `EF` character restricted to lengths `r` with `keep(r)`.
fn ef_closed(spec: &ModuleSpec, keep: impl Fn(i64) -> bool) -> Result<BiSeries> {
    let (p, k, m) = spec.pkm()?;
    let n = &spec.norm;
    let mut blocks = Vec::new();
    if k <= m + p {
        if keep(0) {
            blocks.push((n.s.clone(), n.e.clone(), QPoly::one()));
        }
        return series_from_blocks(&blocks);
    }
    let lin = &n.d - &Rat::new(1, 2 * p) + Rat::new(m, p);
    for r in 0..=(k - m - p) {
        if !keep(r) {
            continue;
        }
        let top = (k - r - m).div_euclid(p) - 1 + r;
        let rr = Rat::int(r);
        let q0 = &n.e + &Rat::new(r * r, 2 * p) + &lin * &rr;
        let z0 = &n.s + &n.c * &rr;
        blocks.push((z0, q0, q_binomial(top, r)));
    }
    series_from_blocks(&blocks)
}

/// Closed form of the `RF` character, with `i` the remainder of `k - m + 1` mod `p`.
pub fn rf_closed_form(p: i64, k: i64, m: i64, norm: &crate::module::Norm) -> Result<BiSeries> {
    let i = (k - m + 1).rem_euclid(p);
    if k <= m + p {
        let blocks = if i == 0 { vec![(norm.s.clone(), norm.e.clone(), QPoly::one())] } else { vec![] };
        return series_from_blocks(&blocks);
    }
    let num = k - m - i + 1;
    if num.rem_euclid(p) != 0 {
        return Err(Error::Invariant(format!("(k-m-i+1)/p is not an integer for p={p}, k={k}, m={m}")));
    }
    let a = num / p - 2 + i;
    let ir = Rat::int(i);
    let pre_q = &norm.e + &Rat::new(i * i, 2 * p) + &ir * &(&norm.d - &Rat::new(1, 2 * p) + Rat::new(m, p));
    let pre_z = &norm.s + &norm.c * &ir;
    let lin = Rat::int(p) * &norm.d - Rat::new(1, 2) + Rat::int(i + m);
    let mut blocks = Vec::new();
    let mut r = 0i64;
    while a + (p - 1) * r >= i + p * r {
        let rr = Rat::int(r);
        let q0 = &pre_q + &Rat::new(p * r * r, 2) + &lin * &rr;
        let z0 = &pre_z + &(Rat::int(p) * &norm.c * &rr);
        blocks.push((z0, q0, q_binomial(a + (p - 1) * r, i + p * r)));
        r += 1;
    }
    series_from_blocks(&blocks)
}

/// Character from the fermionic closed form of each family.
pub fn char_closed_form(spec: &ModuleSpec, q_cutoff: Option<&Rat>, charge_max: Option<u64>) -> Result<BiSeries> {
    spec.validate()?;
    let n = &spec.norm;
    match spec.family {
        Family::FreeAlgebra | Family::FreeModule => {
            let cut = q_cutoff.ok_or_else(|| Error::InvalidSpec("free modules need a q cutoff".into()))?;
            let shift = &n.d - &(&spec.g / &Rat::int(2)) + &spec.m;
            let f = f_g_series(&spec.g, &n.c, &shift, &(cut - &n.e), charge_max)?;
            f.shift(&n.s, &n.e)
        }
        Family::FiniteAlgebra | Family::FiniteModule => {
            let (p, k, m) = spec.pkm()?;
            let s = if k <= m + 1 {
                BiSeries::monomial(Rat::one(), &n.s, &n.e)?
            } else {
                let shift = &n.d - &Rat::new(p, 2) + Rat::int(m);
                fib_poly(p as u32, k + p - 2 - m).substitute(&n.c, &shift)?.shift(&n.s, &n.e)?
            };
            maybe_truncate(s, q_cutoff)
        }
        Family::Ef => maybe_truncate(ef_closed(spec, |_| true)?, q_cutoff),
        Family::EfComponent(i) => {
            let (p, _, m) = spec.pkm()?;
            let s = ef_closed(spec, |r| (m + r - i64::from(i) - 1).rem_euclid(p) == 0)?;
            maybe_truncate(s, q_cutoff)
        }
        Family::Rf => {
            let (p, k, m) = spec.pkm()?;
            maybe_truncate(rf_closed_form(p, k, m, n)?, q_cutoff)
        }
    }
}

/// The set `B_i` of branching vectors of `M(-n)` over `F(p)`, innermost mode first.
///
/// `B_0` consists of the basis vectors with all modes at most `1 - p`; for
/// `i >= 1`, `B_i` prepends the mode `i + 1 - p` to basis vectors with modes at
/// most `i + 1 - 2p`. Elements of unnormalized degree above `q_cutoff` are dropped.
pub fn branching_vectors(p: u32, n: i64, i: u32, q_cutoff: Option<i64>) -> Result<Vec<Vec<i64>>> {
    if i >= p || n < 0 {
        return Err(Error::InvalidSpec(format!("need 0 <= i < p and n >= 0, got p={p}, n={n}, i={i}")));
    }
    let (pi, ii) = (i64::from(p), i64::from(i));
    let keep = |s: &Vec<i64>| q_cutoff.map_or(true, |c| s.iter().sum::<i64>() <= c);
    if i == 0 {
        let b = enumerate_basis(&ModuleSpec::finite_module(p, 2 - pi, -n), None, None)?;
        return Ok(b.seqs.into_iter().filter(keep).collect());
    }
    let top = ii + 1 - pi;
    let inner = enumerate_basis(&ModuleSpec::finite_module(p, ii + 2 - 2 * pi, -n), None, None)?;
    let mut out = Vec::new();
    for mut s in inner.seqs {
        let legal = match s.last() {
            Some(&t) => top - t >= pi,
            None => top > -n,
        };
        if legal {
            s.push(top);
            if keep(&s) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::Norm;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn finite_algebra_listing() {
        let b = enumerate_basis(&ModuleSpec::finite_algebra(2, 4), None, None).unwrap();
        assert_eq!(b.seqs, vec![vec![], vec![1], vec![2], vec![3], vec![1, 3]]);
        let names: Vec<String> = (0..b.len()).map(|i| b.element(i)).collect();
        assert_eq!(names, ["1", "b(-1)1", "b(-2)1", "b(-3)1", "b(-3)b(-1)1"]);
        assert_eq!(
            char_from_basis(&ModuleSpec::finite_algebra(2, 4), None, None).unwrap().to_string(),
            "1 + z*(q + q^2 + q^3) + z^2*q^4"
        );
    }

    #[test]
    fn charge_zero_only() {
        let spec = ModuleSpec::free_module(r("1/2"), r("0"));
        let b = enumerate_basis(&spec, Some(&Rat::int(10)), Some(0)).unwrap();
        assert_eq!(b.seqs, vec![Vec::<i64>::new()]);
        assert!(b.window_limited);
    }

    #[test]
    fn staircase_minimum() {
        let spec = ModuleSpec::free_module(r("3/2"), r("1/2"));
        let b = enumerate_basis(&spec, Some(&Rat::int(12)), None).unwrap();
        for r in 1..4usize {
            let min = b.seqs.iter().filter(|s| s.len() == r).map(|s| s.iter().sum::<i64>()).min().unwrap();
            // r(m+1) + g r(r-1)/2 = 3r/2 + 3r(r-1)/4, in units of 1/2
            let want = r as i64 * 3 + 3 * (r * (r - 1)) as i64 / 2;
            assert_eq!(min, want);
        }
    }

    #[test]
    fn ef_small() {
        let s = char_from_basis(&ModuleSpec::ef(1, 2, 0), None, None).unwrap();
        assert_eq!(s.to_string(), "1 + z*q");
        assert_eq!(char_closed_form(&ModuleSpec::ef(1, 2, 0), None, None).unwrap().to_string(), "1 + z*q");
    }

    #[test]
    fn finite_module_closed_form() {
        let s = char_closed_form(&ModuleSpec::finite_module(2, 4, 0), None, None).unwrap();
        assert_eq!(s.to_string(), "1 + z*(q + q^2 + q^3) + z^2*q^4");
        let t = ModuleSpec::finite_module(2, 3, 5).with_norm(Norm::new(r("2"), r("1/2"), r("1/3"), r("-1")).unwrap());
        assert_eq!(char_closed_form(&t, None, None).unwrap().to_string(), "z^(1/3)*q^(-1)");
        assert_eq!(char_from_basis(&t, None, None).unwrap().to_string(), "z^(1/3)*q^(-1)");
    }

    #[test]
    fn branching_sets() {
        assert_eq!(branching_vectors(2, 3, 0, None).unwrap(), vec![vec![], vec![-2], vec![-1]]);
        assert_eq!(branching_vectors(2, 3, 1, None).unwrap(), vec![vec![0], vec![-2, 0]]);
        assert_eq!(branching_vectors(2, 2, 0, None).unwrap().len(), 2);
        assert_eq!(branching_vectors(2, 2, 1, None).unwrap().len(), 1);
        assert_eq!(branching_vectors(3, 0, 0, None).unwrap(), vec![Vec::<i64>::new()]);
        assert!(branching_vectors(3, 0, 1, None).unwrap().is_empty());
        assert!(branching_vectors(3, 0, 2, None).unwrap().is_empty());
    }

    #[test]
    fn json_exports() {
        let b = enumerate_basis(&ModuleSpec::finite_algebra(2, 3), None, None).unwrap();
        let j = b.to_json().unwrap();
        assert!(j.contains(r#""modes":[[],[1],[2]]"#), "{j}");
        let t = b.table().unwrap().to_json().unwrap();
        assert_eq!(
            t,
            r#"{"zDenom":1,"qDenom":1,"qCutoffNum":null,"chargeMax":null,"entries":[[0,0,1],[1,1,1],[1,2,1]]}"#
        );
    }
}
