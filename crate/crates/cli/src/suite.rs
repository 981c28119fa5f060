//! Suite configuration and the parallel runner.

use std::collections::BTreeMap;
use std::path::PathBuf;

use freegva_core::exactseq::{verify_fibonacci, verify_flag, verify_rr_ef, verify_rr_finite, verify_rr_free};
use freegva_core::identities::{
    dual_char_sides, ef_chars_sides, enumeration_sides, fib_recursions_sides, lattice_decomposition_sides,
    rr_recursion_sides, switching_p2_sides, switching_sides,
};
use freegva_core::{Error, Family, ModuleSpec, Norm, Rat, Report, Sides, Verdict};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::Value;

pub const DEFAULT_SUITE: &str = include_str!("../suites/default.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Markdown,
    Csv,
    /// One line per report; used on stderr when the scorecard goes to a file.
    #[serde(skip)]
    Summary,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawSuite {
    q_cutoff: Option<Value>,
    charge_max: Option<u64>,
    #[serde(default = "default_format")]
    format: Format,
    output: Option<PathBuf>,
    checks: Vec<RawCheck>,
    perturb: Option<RawPerturb>,
}

fn default_format() -> Format {
    Format::Json
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawCheck {
    check: String,
    #[serde(default)]
    grid: BTreeMap<String, Vec<Value>>,
    family: Option<String>,
    q_cutoff: Option<Value>,
    charge_max: Option<u64>,
    degree: Option<i64>,
    norm: Option<BTreeMap<String, Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawPerturb {
    check: String,
    #[serde(default)]
    index: usize,
    z: Value,
    q: Value,
    #[serde(default = "one")]
    delta: Value,
}

fn one() -> Value {
    Value::from(1)
}

/// A validated suite.
#[derive(Debug)]
pub struct SuiteConfig {
    pub format: Format,
    pub output: Option<PathBuf>,
    tasks: Vec<Task>,
    perturb: Option<Perturb>,
}

#[derive(Debug)]
struct Perturb {
    check: String,
    index: usize,
    z: Rat,
    q: Rat,
    delta: Rat,
}

#[derive(Clone, Debug)]
struct Task {
    check: String,
    vals: BTreeMap<String, Rat>,
    family: Option<Family>,
    norm: Norm,
    q_cutoff: Rat,
    charge_max: Option<u64>,
    degree: Option<i64>,
}

fn rat_of(v: &Value, what: &str) -> Result<Rat, String> {
    match v {
        Value::Number(n) => {
            n.as_i64().map(Rat::int).ok_or_else(|| format!("{what}: {n} is not an integer; write fractions as \"a/b\""))
        }
        Value::String(s) => s.parse().map_err(|e| format!("{what}: {e}")),
        _ => Err(format!("{what}: expected a number or a string, got {v}")),
    }
}

/// Grid values; a string `"lo..hi"` stands for the integers `lo..=hi`.
fn expand(values: &[Value], what: &str) -> Result<Vec<Rat>, String> {
    let mut out = Vec::new();
    for v in values {
        if let Some((lo, hi)) = v.as_str().and_then(|s| s.split_once("..")) {
            let lo: i64 = lo.trim().parse().map_err(|_| format!("{what}: bad range {v}"))?;
            let hi: i64 = hi.trim().parse().map_err(|_| format!("{what}: bad range {v}"))?;
            out.extend((lo..=hi).map(Rat::int));
        } else {
            out.push(rat_of(v, what)?);
        }
    }
    Ok(out)
}

fn parameters(check: &str) -> Result<&'static [&'static str], String> {
    Ok(match check {
        "enumeration" => &[],
        "rr-recursion" => &["g"],
        "fib-recursions" => &["p", "l"],
        "switching" | "dual-char" | "ef-chars" | "rr-finite" | "rr-ef" | "fibonacci" => &["p", "k", "m"],
        "switching-p2" => &["n"],
        "lattice" => &["p", "l"],
        "rr-free" => &["g", "m"],
        "flag" => &["p", "n"],
        _ => return Err(format!("unknown check {check:?}")),
    })
}

/// Cartesian product of the grid; keys in alphabetical order, the last one varying fastest.
fn product(grid: &BTreeMap<String, Vec<Rat>>) -> Vec<BTreeMap<String, Rat>> {
    let mut out = vec![BTreeMap::new()];
    for (k, vs) in grid {
        out = out
            .into_iter()
            .flat_map(|row| {
                vs.iter().map(move |v| {
                    let mut r = row.clone();
                    r.insert(k.clone(), v.clone());
                    r
                })
            })
            .collect();
    }
    out
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<SuiteConfig, String> {
        let raw: RawSuite = serde_json::from_str(text).map_err(|e| format!("invalid suite: {e}"))?;
        if raw.checks.is_empty() {
            return Err("the suite lists no checks".into());
        }
        let base_cut = match &raw.q_cutoff {
            Some(v) => rat_of(v, "qCutoff")?,
            None => Rat::int(15),
        };
        let mut tasks = Vec::new();
        for c in &raw.checks {
            let needed = parameters(&c.check)?;
            let q_cutoff = match &c.q_cutoff {
                Some(v) => rat_of(v, "qCutoff")?,
                None => base_cut.clone(),
            };
            if !q_cutoff.is_positive() {
                return Err(format!("{}: qCutoff must be positive, got {q_cutoff}", c.check));
            }
            let mut grid = BTreeMap::new();
            for (k, vs) in &c.grid {
                let vals = expand(vs, &format!("{}.{k}", c.check))?;
                if vals.is_empty() {
                    return Err(format!("{}: grid {k} is empty", c.check));
                }
                grid.insert(k.clone(), vals);
            }
            let family = match &c.family {
                Some(f) => Some(f.parse::<Family>().map_err(|e| e.to_string())?),
                None if c.check == "enumeration" => return Err("enumeration needs a family".into()),
                None => None,
            };
            let family_params: &[&str] = match family {
                Some(Family::FreeAlgebra) => &["g"],
                Some(Family::FreeModule) => &["g", "m"],
                Some(Family::FiniteAlgebra) => &["p", "k"],
                Some(_) => &["p", "k", "m"],
                None => &[],
            };
            for p in needed.iter().chain(if c.check == "enumeration" { family_params } else { &[] }) {
                if !grid.contains_key(*p) {
                    return Err(format!("{}: grid {p} is missing", c.check));
                }
            }
            if grid.is_empty() {
                return Err(format!("{}: empty grid", c.check));
            }
            let mut norm = Norm::unnormalized();
            if let Some(n) = &c.norm {
                for (k, v) in n {
                    let x = rat_of(v, &format!("norm.{k}"))?;
                    match k.as_str() {
                        "C" => norm.c = x,
                        "D" => norm.d = x,
                        "S" => norm.s = x,
                        "E" => norm.e = x,
                        _ => return Err(format!("unknown norm entry {k:?}")),
                    }
                }
                if norm.c.is_zero() {
                    return Err("norm.C must be nonzero".into());
                }
            }
            for vals in product(&grid) {
                tasks.push(Task {
                    check: c.check.clone(),
                    vals,
                    family,
                    norm: norm.clone(),
                    q_cutoff: q_cutoff.clone(),
                    charge_max: c.charge_max.or(raw.charge_max),
                    degree: c.degree,
                });
            }
        }
        let perturb = match &raw.perturb {
            None => None,
            Some(p) => {
                let count = tasks.iter().filter(|t| t.check == p.check).count();
                if p.index >= count {
                    return Err(format!(
                        "perturb: the suite has {count} {} checks, index {} is out of range",
                        p.check, p.index
                    ));
                }
                if matches!(p.check.as_str(), "rr-free" | "rr-finite" | "rr-ef" | "fibonacci" | "flag") {
                    return Err(format!("perturb: {} is not a series identity", p.check));
                }
                Some(Perturb {
                    check: p.check.clone(),
                    index: p.index,
                    z: rat_of(&p.z, "perturb.z")?,
                    q: rat_of(&p.q, "perturb.q")?,
                    delta: rat_of(&p.delta, "perturb.delta")?,
                })
            }
        };
        Ok(SuiteConfig { format: raw.format, output: raw.output, tasks, perturb })
    }
}

impl Task {
    fn int(&self, k: &str) -> Result<i64, Error> {
        let v = &self.vals[k];
        v.to_i64().ok_or_else(|| Error::InvalidSpec(format!("{} needs an integer {k}, got {v}", self.check)))
    }

    fn uint(&self, k: &str) -> Result<u32, Error> {
        let v = self.int(k)?;
        u32::try_from(v).map_err(|_| Error::InvalidSpec(format!("{} needs {k} >= 0, got {v}", self.check)))
    }

    fn sides(&self) -> Result<Option<Sides>, Error> {
        let cut = &self.q_cutoff;
        Ok(Some(match self.check.as_str() {
            "enumeration" => {
                let fam = self.family.expect("validated");
                let spec = match fam {
                    Family::FreeAlgebra => ModuleSpec::free_algebra(self.vals["g"].clone()),
                    Family::FreeModule => ModuleSpec::free_module(self.vals["g"].clone(), self.vals["m"].clone()),
                    Family::FiniteAlgebra => ModuleSpec::finite_algebra(self.uint("p")?, self.int("k")?),
                    Family::FiniteModule => ModuleSpec::finite_module(self.uint("p")?, self.int("k")?, self.int("m")?),
                    Family::Ef => ModuleSpec::ef(self.uint("p")?, self.int("k")?, self.int("m")?),
                    Family::Rf => ModuleSpec::rf(self.uint("p")?, self.int("k")?, self.int("m")?),
                    Family::EfComponent(i) => {
                        ModuleSpec::ef_component(self.uint("p")?, self.int("k")?, self.int("m")?, i)
                    }
                }
                .with_norm(self.norm.clone());
                enumeration_sides(&spec, Some(cut), self.charge_max)?
            }
            "rr-recursion" => rr_recursion_sides(&self.vals["g"], cut, self.charge_max)?,
            "fib-recursions" => fib_recursions_sides(self.uint("p")?, self.int("l")?)?,
            "switching" => switching_sides(self.uint("p")?, self.int("k")?, self.int("m")?)?,
            "switching-p2" => switching_p2_sides(self.int("n")?)?,
            "dual-char" => {
                dual_char_sides(self.uint("p")?, self.int("k")?, self.int("m")?, &self.norm.s, &self.norm.e)?
            }
            "ef-chars" => ef_chars_sides(self.uint("p")?, self.int("k")?, self.int("m")?, &self.norm, cut)?,
            "lattice" => lattice_decomposition_sides(self.uint("p")?, self.uint("l")?, cut)?,
            _ => return Ok(None),
        }))
    }

    fn run(&self, perturb: Option<&Perturb>) -> Result<Report, Error> {
        if let Some(mut sides) = self.sides()? {
            if let Some(p) = perturb {
                sides.perturb(&p.z, &p.q, &p.delta)?;
                sides.params.push_str(" (perturbed)");
            }
            return sides.into_report();
        }
        let cut = &self.q_cutoff;
        match self.check.as_str() {
            "rr-free" => verify_rr_free(&self.vals["g"], &self.vals["m"], &self.norm, cut, self.charge_max),
            "rr-finite" => verify_rr_finite(self.uint("p")?, self.int("k")?, self.int("m")?, &self.norm, Some(cut)),
            "rr-ef" => verify_rr_ef(self.uint("p")?, self.int("k")?, self.int("m")?, &self.norm, Some(cut)),
            "fibonacci" => verify_fibonacci(self.uint("p")?, self.int("k")?, self.int("m")?, &self.norm, self.degree),
            "flag" => verify_flag(self.uint("p")?, self.int("n")?, &self.norm, cut),
            other => Err(Error::InvalidSpec(format!("unknown check {other:?}"))),
        }
    }
}

/// Runs every task; reports come back in configuration order.
pub fn run(cfg: &SuiteConfig) -> Result<Vec<Report>, String> {
    // position of each task among those with the same check, for the perturbation
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let ordinals: Vec<usize> = cfg
        .tasks
        .iter()
        .map(|t| {
            let n = seen.entry(t.check.as_str()).or_default();
            *n += 1;
            *n - 1
        })
        .collect();
    let results: Vec<Result<Report, Error>> = cfg
        .tasks
        .par_iter()
        .zip(ordinals.par_iter())
        .map(|(t, &i)| {
            let p = cfg.perturb.as_ref().filter(|p| p.check == t.check && p.index == i);
            t.run(p)
        })
        .collect();
    let mut out = Vec::with_capacity(results.len());
    for (t, r) in cfg.tasks.iter().zip(results) {
        match r {
            Ok(rep) => out.push(rep),
            Err(e @ (Error::Divergence(_) | Error::Invariant(_))) => {
                let params = t.vals.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
                let mut rep = Report::new(&t.check, params);
                rep.verdict = Verdict::Fail;
                rep.notes.push(format!("failed: {e}"));
                out.push(rep);
            }
            Err(e) => return Err(format!("{}: {e}", t.check)),
        }
    }
    Ok(out)
}
