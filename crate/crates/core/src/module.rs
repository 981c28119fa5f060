//! Parameter bundles naming the module families.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::{common_denom, lcm, Rat};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    /// The free algebra `F(g)`, seen as the module `M(0)`.
    FreeAlgebra,
    /// The free module `M(m)`.
    FreeModule,
    /// `F(k,p)`: quotient of `F(p)` by the modes `b(-n)`, `n >= k`.
    FiniteAlgebra,
    /// `F_k(m)`: quotient of `M(m)` over `F(p)` by the modes `n >= k`.
    FiniteModule,
    /// `EF`: quotient of `M(m/p)` over `F(1/p)` by the modes `n >= k/p`.
    Ef,
    /// `RF`: the summand of `EF` whose lengths satisfy `r = k - m + 1 (mod p)`.
    Rf,
    /// Summand of `EF` with `m + r = i + 1 (mod p)`.
    EfComponent(u32),
}

impl Family {
    pub fn is_bounded(self) -> bool {
        !matches!(self, Family::FreeAlgebra | Family::FreeModule)
    }

    pub fn name(self) -> String {
        match self {
            Family::FreeAlgebra => "free-algebra".into(),
            Family::FreeModule => "free-module".into(),
            Family::FiniteAlgebra => "finite-algebra".into(),
            Family::FiniteModule => "finite-module".into(),
            Family::Ef => "ef".into(),
            Family::Rf => "rf".into(),
            Family::EfComponent(i) => format!("ef-component-{i}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        Ok(match s {
            "free-algebra" => Family::FreeAlgebra,
            "free-module" => Family::FreeModule,
            "finite-algebra" => Family::FiniteAlgebra,
            "finite-module" => Family::FiniteModule,
            "ef" => Family::Ef,
            "rf" => Family::Rf,
            _ => match s.strip_prefix("ef-component-") {
                Some(i) => Family::EfComponent(i.parse().map_err(|_| Error::Parse(format!("bad component in {s:?}")))?),
                None => return Err(Error::Parse(format!("unknown family {s:?}"))),
            },
        })
    }
}

/// Normalization `(C, D; S, E)`: a basis vector of length `r` and total mode
/// degree `d` sits at `z^(S + C r) q^(E + d - r + D r)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Norm {
    pub c: Rat,
    pub d: Rat,
    pub s: Rat,
    pub e: Rat,
}

impl Norm {
    pub fn new(c: Rat, d: Rat, s: Rat, e: Rat) -> Result<Norm> {
        if c.is_zero() {
            return Err(Error::InvalidSpec("C must be nonzero".into()));
        }
        Ok(Norm { c, d, s, e })
    }

    /// `z^r q^(n_1 + ... + n_r)`.
    pub fn unnormalized() -> Norm {
        Norm { c: Rat::one(), d: Rat::one(), s: Rat::zero(), e: Rat::zero() }
    }

    /// Same `C, D` with the offsets moved by `(ds, de)`.
    pub fn shifted(&self, ds: &Rat, de: &Rat) -> Norm {
        Norm { c: self.c.clone(), d: self.d.clone(), s: &self.s + ds, e: &self.e + de }
    }

    pub fn with_offsets(&self, s: Rat, e: Rat) -> Norm {
        Norm { c: self.c.clone(), d: self.d.clone(), s, e }
    }
}

impl Default for Norm {
    fn default() -> Self {
        Norm::unnormalized()
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C={} D={} S={} E={}", self.c, self.d, self.s, self.e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModuleSpec {
    pub g: Rat,
    pub m: Rat,
    pub bound: Option<Rat>,
    pub family: Family,
    pub norm: Norm,
}

fn need_int(x: &Rat, what: &str) -> Result<i64> {
    x.to_i64().ok_or_else(|| Error::InvalidSpec(format!("{what} must be an integer, got {x}")))
}

impl ModuleSpec {
    pub fn free_algebra(g: Rat) -> ModuleSpec {
        ModuleSpec { g, m: Rat::zero(), bound: None, family: Family::FreeAlgebra, norm: Norm::unnormalized() }
    }

    pub fn free_module(g: Rat, m: Rat) -> ModuleSpec {
        ModuleSpec { g, m, bound: None, family: Family::FreeModule, norm: Norm::unnormalized() }
    }

    pub fn finite_algebra(p: u32, k: i64) -> ModuleSpec {
        ModuleSpec {
            g: Rat::int(i64::from(p)),
            m: Rat::zero(),
            bound: Some(Rat::int(k)),
            family: Family::FiniteAlgebra,
            norm: Norm::unnormalized(),
        }
    }

    pub fn finite_module(p: u32, k: i64, m: i64) -> ModuleSpec {
        ModuleSpec {
            g: Rat::int(i64::from(p)),
            m: Rat::int(m),
            bound: Some(Rat::int(k)),
            family: Family::FiniteModule,
            norm: Norm::unnormalized(),
        }
    }

    fn ef_like(p: u32, k: i64, m: i64, family: Family) -> ModuleSpec {
        let pi = i64::from(p);
        ModuleSpec {
            g: Rat::new(1, pi),
            m: Rat::new(m, pi),
            bound: Some(Rat::new(k, pi)),
            family,
            norm: Norm::unnormalized(),
        }
    }

    /// `EF` with bound `k/p` over `M(m/p)`.
    pub fn ef(p: u32, k: i64, m: i64) -> ModuleSpec {
        ModuleSpec::ef_like(p, k, m, Family::Ef)
    }

    pub fn rf(p: u32, k: i64, m: i64) -> ModuleSpec {
        ModuleSpec::ef_like(p, k, m, Family::Rf)
    }

    pub fn ef_component(p: u32, k: i64, m: i64, i: u32) -> ModuleSpec {
        ModuleSpec::ef_like(p, k, m, Family::EfComponent(i))
    }

    pub fn with_norm(mut self, norm: Norm) -> ModuleSpec {
        self.norm = norm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.norm.c.is_zero() {
            return Err(Error::InvalidSpec("C must be nonzero".into()));
        }
        match self.family {
            Family::FreeAlgebra | Family::FreeModule => {
                if self.bound.is_some() {
                    return Err(Error::InvalidSpec("free families take no bound".into()));
                }
                if self.family == Family::FreeAlgebra && !self.m.is_zero() {
                    return Err(Error::InvalidSpec("the free algebra has m = 0".into()));
                }
            }
            Family::FiniteAlgebra | Family::FiniteModule => {
                let p = need_int(&self.g, "g")?;
                if p < 1 {
                    return Err(Error::InvalidSpec(format!("g must be a positive integer, got {p}")));
                }
                need_int(&self.m, "m")?;
                need_int(self.bound_ref()?, "k")?;
                if self.family == Family::FiniteAlgebra && !self.m.is_zero() {
                    return Err(Error::InvalidSpec("the finite algebra has m = 0".into()));
                }
            }
            Family::Ef | Family::Rf | Family::EfComponent(_) => {
                if !self.g.is_positive() || self.g.numer() != &1.into() {
                    return Err(Error::InvalidSpec(format!("g must be 1/p, got {}", self.g)));
                }
                let p = self.p()?;
                need_int(&(&self.m * &Rat::int(p)), "p*m")?;
                need_int(&(self.bound_ref()? * &Rat::int(p)), "p*bound")?;
                if let Family::EfComponent(i) = self.family {
                    if i64::from(i) >= p {
                        return Err(Error::InvalidSpec(format!("component {i} needs i < p = {p}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn bound_ref(&self) -> Result<&Rat> {
        self.bound.as_ref().ok_or_else(|| Error::InvalidSpec("bounded family without bound".into()))
    }

    /// The integer `p`: `g` for finite families, `1/g` for `EF`/`RF`.
    pub fn p(&self) -> Result<i64> {
        match self.family {
            Family::FiniteAlgebra | Family::FiniteModule => need_int(&self.g, "g"),
            Family::Ef | Family::Rf | Family::EfComponent(_) => need_int(&self.g.recip(), "1/g"),
            _ => Err(Error::InvalidSpec("p is only defined for bounded families".into())),
        }
    }

    /// Integer data `(p, k, m)` of a bounded family (`EF` data scaled by `p`).
    pub fn pkm(&self) -> Result<(i64, i64, i64)> {
        let p = self.p()?;
        let scale = match self.family {
            Family::FiniteAlgebra | Family::FiniteModule => Rat::one(),
            _ => Rat::int(p),
        };
        let k = need_int(&(self.bound_ref()? * &scale), "k")?;
        let m = need_int(&(&self.m * &scale), "m")?;
        Ok((p, k, m))
    }

    /// Which lengths `r` survive in the `EF` summands.
    pub fn length_class(&self) -> Result<Option<(i64, i64)>> {
        match self.family {
            Family::Rf => {
                let (p, k, m) = self.pkm()?;
                Ok(Some((p, (k - m + 1).rem_euclid(p))))
            }
            Family::EfComponent(i) => {
                let (p, _, m) = self.pkm()?;
                Ok(Some((p, (i64::from(i) + 1 - m).rem_euclid(p))))
            }
            _ => Ok(None),
        }
    }

    /// Denominator of the mode lattice (all modes and the bound are multiples of `1/L`).
    pub fn mode_denom(&self) -> Result<i64> {
        let mut d = common_denom([&self.g, &self.m])?;
        if let Some(b) = &self.bound {
            d = lcm(d, common_denom([b])?)?;
        }
        Ok(d)
    }
}

impl fmt::Display for ModuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} g={} m={}", self.family.name(), self.g, self.m)?;
        if let Some(b) = &self.bound {
            write!(f, " bound={b}")?;
        }
        write!(f, " ({})", self.norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ModuleSpec::finite_module(2, 4, 0).validate().is_ok());
        assert!(ModuleSpec::ef(3, 7, -2).validate().is_ok());
        assert!(ModuleSpec::ef_component(2, 7, 0, 2).validate().is_err());
        let bad = ModuleSpec::free_module(Rat::new(1, 2), Rat::int(0))
            .with_norm(Norm { c: Rat::zero(), ..Norm::unnormalized() });
        assert!(bad.validate().is_err());
        let mut f = ModuleSpec::finite_module(2, 4, 0);
        f.m = Rat::new(1, 2);
        assert!(f.validate().is_err());
    }

    #[test]
    fn classes() {
        assert_eq!(ModuleSpec::rf(2, 7, 0).length_class().unwrap(), Some((2, 0)));
        assert_eq!(ModuleSpec::ef_component(3, 7, 1, 0).length_class().unwrap(), Some((3, 0)));
        assert_eq!(ModuleSpec::ef(3, 7, -2).pkm().unwrap(), (3, 7, -2));
        assert_eq!("ef-component-1".parse::<Family>().unwrap(), Family::EfComponent(1));
    }
}
