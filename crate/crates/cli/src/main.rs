use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use cantordyn::approx::{self, PrunedTree};
use cantordyn::homeo::{disagreement, sup_distance, tau_distance};
use cantordyn::rational::{self, Rational};
use cantordyn::towers::{self, KRPartition};
use cantordyn::{AdicMap, Alphabet, ClopenSet, FullGroupElement, Word, DEFAULT_MAX_DEPTH};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

mod input;

use input::{parse_eps, parse_measures, parse_point, read_json, read_map};

#[derive(Parser)]
#[command(name = "cantordyn", version, about = "Exact Cantor dynamics computations")]
struct Cli {
    /// Refinement depth cap; overrides CANTORDYN_MAX_DEPTH.
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    /// Print wall-clock timing to stderr.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Budget {
    /// Measure: `uniform`, `bernoulli:p0,p1`, `dirac:PRE(PER)` or JSON.
    #[arg(long = "measure")]
    measures: Vec<String>,
    /// Tolerance as `p/q`.
    #[arg(long, default_value = "1/8")]
    eps: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Rokhlin,
    #[value(name = "gammaY", alias = "gamma-y")]
    GammaY,
}

#[derive(Subcommand)]
enum Command {
    /// Periodic (rokhlin) or Γ_Y (gammaY) approximation of an element.
    Approximate {
        file: PathBuf,
        #[command(flatten)]
        budget: Budget,
        #[arg(long, value_enum, default_value = "rokhlin")]
        mode: Mode,
    },
    /// τ-distances, sup-distance and disagreement set of two maps.
    Distance {
        left: PathBuf,
        right: PathBuf,
        #[arg(long = "measure")]
        measures: Vec<String>,
    },
    /// Kakutani–Rokhlin partition over a base or the canonical `P_n`.
    Tower {
        /// Comma-separated base words.
        #[arg(long, conflicts_with = "canonical")]
        base: Option<String>,
        #[arg(long)]
        canonical: Option<usize>,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Write Graphviz output here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// F-classification and Γ(P_n) membership.
    Gamma {
        file: PathBuf,
        #[arg(long, conflicts_with = "exhaust")]
        level: Option<usize>,
        #[arg(long)]
        exhaust: bool,
    },
    /// Conjugate a universal periodic element into a neighbourhood of a
    /// periodic target.
    Conjugate {
        file: PathBuf,
        #[command(flatten)]
        budget: Budget,
    },
    /// Topologically free perturbation of a periodic element.
    Perturb {
        file: PathBuf,
        #[command(flatten)]
        budget: Budget,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 8)]
        max_period: usize,
    },
    /// Strict matching and extension between pruned trees.
    Extend {
        /// Request JSON with `k`, `depth`, trees `a`, `b` and the map `h`.
        #[arg(long, conflicts_with = "point")]
        request: Option<PathBuf>,
        /// Single-point instance `PRE(PER)` with `h` the identity.
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Parse(anyhow::Error),
    Contract(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        use cantordyn::Error as E;
        match e.downcast_ref::<E>() {
            Some(
                E::InvalidAlphabet(_)
                | E::InvalidSymbol { .. }
                | E::InvalidWord(_)
                | E::InvalidRational(_)
                | E::InvalidPoint(_)
                | E::InvalidMeasure(_)
                | E::NotPrefixCode(_)
                | E::EmptyBase,
            )
            | None => Failure::Parse(e),
            Some(_) => Failure::Contract(e),
        }
    }
}

impl From<cantordyn::Error> for Failure {
    fn from(e: cantordyn::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn max_depth(cli: &Cli) -> Result<usize> {
    if let Some(d) = cli.max_depth {
        return Ok(d);
    }
    match std::env::var("CANTORDYN_MAX_DEPTH") {
        Ok(v) => v.parse().context("CANTORDYN_MAX_DEPTH must be a non-negative integer"),
        Err(_) => Ok(DEFAULT_MAX_DEPTH),
    }
}

fn certify(map: &AdicMap) -> std::result::Result<FullGroupElement, Failure> {
    FullGroupElement::certify(map).map_err(|e| Failure::Contract(e.into()))
}

fn rationals(v: &[Rational]) -> Value {
    v.iter().map(rational::format).collect()
}

fn element_json(el: &FullGroupElement) -> Value {
    let order = el.periodicity().order.map(|o| o.to_string());
    json!({ "powers": el, "map": el.map(), "order": order })
}

fn run(cli: &Cli) -> std::result::Result<(Value, bool), Failure> {
    let depth_cap = max_depth(cli)?;
    match &cli.command {
        Command::Approximate { file, budget, mode } => {
            let s = certify(&read_map(file)?)?;
            let measures = parse_measures(&budget.measures, s.alphabet())?;
            let eps = parse_eps(&budget.eps)?;
            let (name, a) = match mode {
                Mode::Rokhlin => ("rokhlin", approx::periodic_approximation(&s, &measures, &eps, depth_cap)?),
                Mode::GammaY => ("gammaY", approx::gamma_y_approximation(&s, &measures, &eps, depth_cap)?),
            };
            let ok = a.distances.iter().all(|d| *d < eps);
            Ok((
                json!({
                    "mode": name,
                    "eps": rational::format(&eps),
                    "level": a.level,
                    "base": a.base,
                    "folded": a.folded,
                    "distances": rationals(&a.distances),
                    "result": element_json(&a.element),
                }),
                ok,
            ))
        }
        Command::Distance { left, right, measures } => {
            let a = read_map(left)?;
            let b = read_map(right)?;
            let measures = parse_measures(measures, a.alphabet())?;
            let d = disagreement(&a, &b)?;
            Ok((
                json!({
                    "tau": rationals(&tau_distance(&measures, &a, &b)?),
                    "sup": rational::format(&sup_distance(&a, &b)?),
                    "disagreement": d,
                }),
                true,
            ))
        }
        Command::Tower { base, canonical, k, dot } => {
            let k = Alphabet::new(*k)?;
            let (p, conditions) = match (base, canonical) {
                (Some(words), None) => {
                    let words: Vec<&str> = words.split(',').map(str::trim).filter(|w| !w.is_empty()).collect();
                    (towers::kr_partition(&ClopenSet::parse(k, &words)?)?, None)
                }
                (None, Some(n)) => (towers::canonical_sequence(k, *n), Some(towers::kr_conditions(k, *n))),
                _ => return Err(Failure::Parse(anyhow::anyhow!("pass exactly one of --base and --canonical"))),
            };
            if let Some(path) = dot {
                write_dot(path, &p)?;
            }
            let verdicts = conditions.map(|c| {
                let v = |b: bool| if b { "pass" } else { "fail" };
                json!({
                    "i_refines": v(c.refines),
                    "ii_heights_increase": v(c.heights_increase),
                    "iii_bases_nest": v(c.bases_nest),
                    "iv_separates": v(c.separates),
                    "v_base_shrinks_to_point": v(c.base_shrinks_to_point),
                })
            });
            Ok((
                json!({
                    "heights": p.towers().iter().map(|t| t.height).collect::<Vec<_>>(),
                    "partition": p,
                    "alpha": towers::alpha_structure(&p),
                    "conditions": verdicts,
                }),
                true,
            ))
        }
        Command::Gamma { file, level, exhaust } => {
            let s = certify(&read_map(file)?)?;
            let exhaustion = towers::exhaustion_level(&s);
            let n = match (level, exhaust) {
                (Some(n), _) => *n,
                (None, _) => exhaustion,
            };
            let p = towers::canonical_sequence(s.alphabet(), n);
            let c = towers::f_classify(&s, &p, depth_cap)?;
            Ok((
                json!({
                    "level": n,
                    "classification": c,
                    "member": towers::gamma_member(&s, &p),
                    "exhaustion_level": exhaustion,
                    "gammaY": towers::gamma_y_member(&s),
                }),
                true,
            ))
        }
        Command::Conjugate { file, budget } => {
            let target = certify(&read_map(file)?)?;
            let measures = parse_measures(&budget.measures, target.alphabet())?;
            let eps = parse_eps(&budget.eps)?;
            let c = approx::conjugate_into_neighborhood(&target, &measures, &eps, depth_cap)?;
            let ok = c.distances.iter().all(|d| *d < eps);
            Ok((serde_json::to_value(&c).context("serializing")?, ok))
        }
        Command::Perturb { file, budget, depth, max_period } => {
            let r = certify(&read_map(file)?)?;
            let measures = parse_measures(&budget.measures, r.alphabet())?;
            let eps = parse_eps(&budget.eps)?;
            let p = approx::topologically_free_perturbation(&r, &measures, &eps, *depth, *max_period, depth_cap)?;
            let ok = p.topologically_free && p.distances.iter().all(|d| *d < eps);
            Ok((serde_json::to_value(&p).context("serializing")?, ok))
        }
        Command::Extend { request, point, depth, k } => {
            let (a, b, h) = match request {
                Some(path) => parse_extension_request(path)?,
                None => {
                    let k = Alphabet::new(*k)?;
                    let x = parse_point(point.as_deref().unwrap_or("(0)"), k)?;
                    let t = PrunedTree::point(k, &x, *depth);
                    let h = t.kept_words().into_iter().map(|w| (w.clone(), w)).collect();
                    (t.clone(), t, h)
                }
            };
            let m = approx::kr_matching(&a, &b, &h)?;
            let ext = approx::kr_extension(&a, &b, &h, &m)?;
            Ok((json!({ "matching": m, "valid": m.validate(&h), "extension": ext }), true))
        }
    }
}

type Extension = (PrunedTree, PrunedTree, BTreeMap<Word, Word>);

fn parse_extension_request(path: &Path) -> Result<Extension> {
    let v = read_json(path)?;
    let k = Alphabet::new(v["k"].as_u64().context("k")? as u32)?;
    let depth = v["depth"].as_u64().context("depth")? as usize;
    let tree = |key: &str| -> Result<PrunedTree> {
        let words = |field: &str| -> Result<ClopenSet> {
            let list: Vec<String> = serde_json::from_value(v[key][field].clone())
                .with_context(|| format!("{key}.{field}"))?;
            let refs: Vec<&str> = list.iter().map(String::as_str).collect();
            Ok(ClopenSet::parse(k, &refs)?)
        };
        Ok(PrunedTree::new(words("ambient")?, words("hull")?, depth)?)
    };
    let raw: BTreeMap<String, String> = serde_json::from_value(v["h"].clone()).context("h")?;
    let mut h = BTreeMap::new();
    for (x, y) in raw {
        h.insert(Word::parse(k, &x)?, Word::parse(k, &y)?);
    }
    Ok((tree("a")?, tree("b")?, h))
}

fn write_dot(path: &Path, p: &KRPartition) -> Result<()> {
    let dot = p.to_dot();
    if path.as_os_str() == "-" {
        eprint!("{dot}");
        return Ok(());
    }
    std::fs::write(path, dot).with_context(|| format!("writing {}", path.display()))
}

/// Prints the error, tagged with the library variant name when there is one.
fn report(e: &anyhow::Error) {
    match e.downcast_ref::<cantordyn::Error>() {
        Some(inner) => {
            let debug = format!("{inner:?}");
            let name: String = debug.chars().take_while(|c| c.is_alphanumeric()).collect();
            eprintln!("error: {name}: {e:#}");
        }
        None => eprintln!("error: {e:#}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = run(&cli);
    if cli.timing {
        eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    }
    match outcome {
        Ok((value, ok)) => {
            let text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: tolerance not met");
                ExitCode::from(2)
            }
        }
        Err(Failure::Parse(e)) => {
            report(&e);
            ExitCode::from(1)
        }
        Err(Failure::Contract(e)) => {
            report(&e);
            ExitCode::from(2)
        }
    }
}
