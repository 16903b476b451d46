use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use cantordyn::{rational, AdicMap, Alphabet, EPPoint, FullGroupElement, Measure, Rational, Word};
use serde_json::Value;

/// Reads a file, or stdin for `-`.
pub fn read_source(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = read_source(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing JSON from {}", path.display()))
}

/// Either a pair table `{"k", "pairs"}` or a power table `{"k", "level", "c"}`.
pub fn parse_map(v: Value) -> Result<AdicMap> {
    if v.get("c").is_some() {
        Ok(parse_power_table(v)?.map().clone())
    } else {
        serde_json::from_value(v).context("pair table")
    }
}

/// Parsed by hand so certification failures keep their library error.
fn parse_power_table(v: Value) -> Result<FullGroupElement> {
    #[derive(serde::Deserialize)]
    struct Table {
        k: u32,
        level: usize,
        c: BTreeMap<String, i64>,
    }
    let t: Table = serde_json::from_value(v).context("power table")?;
    let k = Alphabet::new(t.k)?;
    let mut powers = vec![None; k.count(t.level)];
    for (w, c) in &t.c {
        let w = Word::parse(k, w)?;
        if w.len() != t.level {
            bail!("power table word {w} does not have length {}", t.level);
        }
        powers[w.value(k) as usize] = Some(*c);
    }
    let powers: Option<Vec<i64>> = powers.into_iter().collect();
    let powers = powers.ok_or(cantordyn::Error::NotAPermutation { level: t.level })?;
    Ok(FullGroupElement::from_powers(k, t.level, powers)?)
}

pub fn read_map(path: &Path) -> Result<AdicMap> {
    parse_map(read_json(path)?)
}

pub fn parse_eps(s: &str) -> Result<Rational> {
    Ok(rational::parse(s)?)
}

/// A measure as JSON, or one of `uniform`, `bernoulli:p0,p1,...` and
/// `dirac:PRE(PER)`.
pub fn parse_measure(s: &str, k: Alphabet) -> Result<Measure> {
    let s = s.trim();
    if s.starts_with('{') {
        let m: Measure = serde_json::from_str(s).context("measure JSON")?;
        return Ok(m);
    }
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "uniform" => Ok(Measure::uniform(k)),
        "bernoulli" => {
            let p = arg.split(',').map(rational::parse).collect::<Result<Vec<_>, _>>()?;
            Ok(Measure::bernoulli(p)?)
        }
        "dirac" => Ok(Measure::dirac(parse_point(arg, k)?)),
        _ => bail!("unknown measure {s:?}"),
    }
}

/// `PRE(PER)`, e.g. `0(1)` for `0·1^∞`.
pub fn parse_point(s: &str, k: Alphabet) -> Result<EPPoint> {
    let Some((pre, rest)) = s.split_once('(') else {
        bail!("point {s:?} must look like PRE(PER)");
    };
    let Some(per) = rest.strip_suffix(')') else {
        bail!("point {s:?} must end with ')'");
    };
    Ok(EPPoint::new(Word::parse(k, pre)?, Word::parse(k, per)?)?)
}

/// Defaults to the uniform measure when none is given.
pub fn parse_measures(specs: &[String], k: Alphabet) -> Result<Vec<Measure>> {
    if specs.is_empty() {
        return Ok(vec![Measure::uniform(k)]);
    }
    specs.iter().map(|s| parse_measure(s, k)).collect()
}
