mod scorecard;
mod suite;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use freegva_core::{
    char_closed_form, char_from_basis, enumerate_basis, parse_monomial, series_eq, Family, ModuleSpec, Norm, Rat,
    Rewriter,
};

use crate::suite::{Format, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "freegva",
    version,
    about = "Bases, normal forms and character identities for free generalized vertex algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List a monomial basis with its bigraded dimensions.
    Basis {
        #[command(flatten)]
        spec: SpecArgs,
        /// Print JSON instead of a listing.
        #[arg(long)]
        json: bool,
    },
    /// Print the character from the basis and from the closed form.
    Char {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Normal form of a mode monomial, e.g. "b(-2) b(-2)" or "b(-5/2) b(-3/2) | g=1/2 m=0".
    Rewrite {
        monomial: String,
        #[arg(long)]
        g: Option<Rat>,
        #[arg(long)]
        m: Option<Rat>,
        /// Fix the outermost violation first.
        #[arg(long)]
        outermost: bool,
    },
    /// Run a verification suite and print a scorecard.
    Verify {
        /// Suite configuration (JSON); the built-in acceptance suite if omitted.
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a verification suite and print every report in full, including bigraded pieces.
    Report {
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Markdown,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Markdown => Format::Markdown,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Args)]
struct SpecArgs {
    /// free-algebra, free-module, finite-algebra, finite-module, ef, rf or ef-component-<i>.
    #[arg(long)]
    family: String,
    #[arg(long)]
    g: Option<Rat>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<Rat>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<i64>,
    #[arg(long)]
    qcut: Option<Rat>,
    #[arg(long)]
    charge_max: Option<u64>,
    #[arg(long = "C", default_value = "1")]
    c: Rat,
    #[arg(long = "D", default_value = "1")]
    d: Rat,
    #[arg(long = "S", default_value = "0", allow_hyphen_values = true)]
    s: Rat,
    #[arg(long = "E", default_value = "0", allow_hyphen_values = true)]
    e: Rat,
}

/// Error carrying the exit code.
struct Exit(u8, String);

impl From<freegva_core::Error> for Exit {
    fn from(e: freegva_core::Error) -> Exit {
        Exit(2, e.to_string())
    }
}

fn need<T: Clone>(v: &Option<T>, flag: &str, family: &str) -> Result<T, Exit> {
    v.clone().ok_or_else(|| Exit(2, format!("--{flag} is required for {family}")))
}

fn int_m(a: &SpecArgs) -> Result<i64, Exit> {
    let m = a.m.clone().unwrap_or_default();
    m.to_i64().ok_or_else(|| Exit(2, format!("--m must be an integer for {}, got {m}", a.family)))
}

impl SpecArgs {
    fn spec(&self) -> Result<ModuleSpec, Exit> {
        let fam: Family = self.family.parse()?;
        let name = fam.name();
        let spec = match fam {
            Family::FreeAlgebra => ModuleSpec::free_algebra(need(&self.g, "g", &name)?),
            Family::FreeModule => {
                ModuleSpec::free_module(need(&self.g, "g", &name)?, self.m.clone().unwrap_or_default())
            }
            Family::FiniteAlgebra => ModuleSpec::finite_algebra(need(&self.p, "p", &name)?, need(&self.k, "k", &name)?),
            Family::FiniteModule => {
                ModuleSpec::finite_module(need(&self.p, "p", &name)?, need(&self.k, "k", &name)?, int_m(self)?)
            }
            Family::Ef => ModuleSpec::ef(need(&self.p, "p", &name)?, need(&self.k, "k", &name)?, int_m(self)?),
            Family::Rf => ModuleSpec::rf(need(&self.p, "p", &name)?, need(&self.k, "k", &name)?, int_m(self)?),
            Family::EfComponent(i) => {
                ModuleSpec::ef_component(need(&self.p, "p", &name)?, need(&self.k, "k", &name)?, int_m(self)?, i)
            }
        };
        let spec = spec.with_norm(Norm::new(self.c.clone(), self.d.clone(), self.s.clone(), self.e.clone())?);
        spec.validate()?;
        if !spec.family.is_bounded() && self.qcut.is_none() {
            return Err(Exit(2, format!("--qcut is required for {name}")));
        }
        Ok(spec)
    }
}

fn cmd_basis(a: &SpecArgs, json: bool) -> Result<String, Exit> {
    let spec = a.spec()?;
    let b = enumerate_basis(&spec, a.qcut.as_ref(), a.charge_max)?;
    let table = b.table()?;
    if json {
        return Ok(format!("{{\"basis\":{},\"table\":{}}}\n", b.to_json()?, table.to_json()?));
    }
    let mut out = format!("# {spec}\n# z exponents in 1/{}, q exponents in 1/{}\n", table.z_denom, table.q_denom);
    if b.window_limited {
        out.push_str(&format!("# charges above {} not enumerated\n", b.charge_max));
    }
    for i in 0..b.len() {
        let modes = b.modes(i);
        let deg = modes.iter().fold(Rat::zero(), |x, y| x + y);
        out.push_str(&format!("{}\t{}\t{deg}\n", b.element(i), modes.len()));
    }
    out.push_str(&format!("# {} elements\n# z\tq\tdim\n", b.len()));
    for (&(q, z), d) in &table.entries {
        out.push_str(&format!("# {}\t{}\t{d}\n", Rat::new(z, table.z_denom), Rat::new(q, table.q_denom)));
    }
    Ok(out)
}

fn cmd_char(a: &SpecArgs) -> Result<(String, bool), Exit> {
    let spec = a.spec()?;
    let from_basis = char_from_basis(&spec, a.qcut.as_ref(), a.charge_max)?;
    let closed = char_closed_form(&spec, a.qcut.as_ref(), a.charge_max)?;
    let eq = series_eq(&from_basis, &closed)?;
    let mut out = format!("# {spec}\nbasis:  {from_basis}\nclosed: {closed}\n");
    if let Some((lo, hi)) = &eq.z_window {
        out.push_str(&format!(
            "note: compared on the charge window [{}, {}]\n",
            lo.as_deref().unwrap_or("-inf"),
            hi.as_deref().unwrap_or("inf")
        ));
    }
    match &eq.mismatch {
        None => out.push_str("PASS\n"),
        Some(m) => out.push_str(&format!("FAIL at z^{} q^{}: {} vs {}\n", m.z, m.q, m.left, m.right)),
    }
    Ok((out, eq.equal))
}

fn cmd_rewrite(text: &str, g: Option<Rat>, m: Option<Rat>, outermost: bool) -> Result<String, Exit> {
    let parsed = parse_monomial(text)?;
    let g = g.or(parsed.g).ok_or_else(|| Exit(2, "g is required (--g or `| g=..`)".into()))?;
    let m = m.or(parsed.m).unwrap_or_default();
    let mut rw = Rewriter::new(&g, &m)?;
    let nf = if outermost { rw.normal_form_outermost(&parsed.modes)? } else { rw.normal_form(&parsed.modes)? };
    Ok(format!("{nf}\n"))
}

fn load_suite(path: Option<&PathBuf>) -> Result<SuiteConfig, Exit> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Exit(2, format!("cannot read {}: {e}", p.display())))?,
        None => suite::DEFAULT_SUITE.to_string(),
    };
    SuiteConfig::parse(&text).map_err(|e| Exit(2, e))
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Exit> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Exit(2, format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Exit> {
    match cli.command {
        Command::Basis { spec, json } => {
            print!("{}", cmd_basis(&spec, json)?);
            Ok(0)
        }
        Command::Char { spec } => {
            let (text, ok) = cmd_char(&spec)?;
            print!("{text}");
            Ok(if ok { 0 } else { 1 })
        }
        Command::Rewrite { monomial, g, m, outermost } => {
            print!("{}", cmd_rewrite(&monomial, g, m, outermost)?);
            Ok(0)
        }
        Command::Verify { config, format, output } => {
            let cfg = load_suite(config.as_ref())?;
            let reports = suite::run(&cfg).map_err(|e| Exit(2, e))?;
            let format = format.map(Format::from).unwrap_or(cfg.format);
            let output = output.or_else(|| cfg.output.clone());
            emit(&scorecard::render(&reports, format), output.as_ref())?;
            if output.is_some() {
                eprint!("{}", scorecard::render(&reports, Format::Summary));
            }
            Ok(if scorecard::all_passed(&reports) { 0 } else { 1 })
        }
        Command::Report { config, output } => {
            let cfg = load_suite(config.as_ref())?;
            let reports = suite::run(&cfg).map_err(|e| Exit(2, e))?;
            let text = serde_json::to_string_pretty(&reports).map_err(|e| Exit(2, e.to_string()))?;
            emit(&(text + "\n"), output.or_else(|| cfg.output.clone()).as_ref())?;
            Ok(if scorecard::all_passed(&reports) { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
