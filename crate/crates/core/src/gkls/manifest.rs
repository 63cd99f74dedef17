//! Line-oriented class manifests.
//!
//! ```text
//! gkls v1 <N> <m> <f*> <rho> <seed>
//! # prng ChaCha8Rng seed_from_u64(seed ^ index)
//! # class <name>
//! # global_dist <r>
//! # domain <axis> <lo> <hi>
//! function <k>
//! <idx> <x_1> ... <x_N> <value> <radius>
//! ```
//!
//! Minimum 0 of each block is the paraboloid vertex and minimum 1 the global
//! one. Numbers are written in shortest round-trip form, so a manifest
//! reproduces its functions bit for bit.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{generate_class, GklsClassSpec, GklsFunction, Minimum};
use crate::error::{Error, Result};
use crate::problem::BoxDomain;

pub const PRNG_LAW: &str = "ChaCha8Rng seed_from_u64(seed ^ index)";

/// A class specification together with its generated functions.
#[derive(Debug, Clone, PartialEq)]
pub struct GklsClass {
    pub spec: GklsClassSpec,
    pub functions: Vec<GklsFunction>,
}

impl GklsClass {
    pub fn generate(spec: GklsClassSpec) -> Result<Self> {
        let functions = generate_class(&spec)?;
        Ok(Self { spec, functions })
    }

    pub fn to_manifest_string(&self) -> String {
        let s = &self.spec;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "gkls v1 {} {} {:?} {:?} {}",
            s.dim, s.minima, s.global_value, s.global_radius, s.seed
        );
        let _ = writeln!(out, "# prng {PRNG_LAW}");
        let _ = writeln!(out, "# class {}", s.name);
        let _ = writeln!(out, "# global_dist {:?}", s.global_dist);
        for j in 0..s.dim {
            let _ = writeln!(out, "# domain {j} {:?} {:?}", s.domain.lower()[j], s.domain.upper()[j]);
        }
        for (k, f) in self.functions.iter().enumerate() {
            let _ = writeln!(out, "function {}", k + 1);
            for (i, m) in f.minima.iter().enumerate() {
                let _ = write!(out, "{i}");
                for x in &m.point {
                    let _ = write!(out, " {x:?}");
                }
                let _ = writeln!(out, " {:?} {:?}", m.value, m.radius);
            }
        }
        out
    }
}

pub fn write_manifest<W: Write>(out: &mut W, class: &GklsClass) -> std::io::Result<()> {
    out.write_all(class.to_manifest_string().as_bytes())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from `{tok}`")))
}

pub fn read_manifest<R: BufRead>(input: R) -> Result<GklsClass> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty manifest"))?;
    let header = header.map_err(|e| parse_err(ln, e.to_string()))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("gkls") || tok.next() != Some("v1") {
        return Err(parse_err(ln, "expected header `gkls v1 N m f* rho seed`"));
    }
    let dim: usize = num(tok.next(), ln, "N")?;
    let minima: usize = num(tok.next(), ln, "m")?;
    let global_value: f64 = num(tok.next(), ln, "f*")?;
    let global_radius: f64 = num(tok.next(), ln, "rho")?;
    let seed: u64 = num(tok.next(), ln, "seed")?;

    let mut name = String::new();
    let mut global_dist = None;
    let mut lower = vec![f64::NAN; dim];
    let mut upper = vec![f64::NAN; dim];
    let mut blocks: Vec<Vec<(usize, Minimum)>> = Vec::new();

    for (ln, line) in lines {
        let line = line.map_err(|e| parse_err(ln, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let mut t = meta.split_whitespace();
            match t.next() {
                Some("class") => name = t.collect::<Vec<_>>().join(" "),
                Some("global_dist") => global_dist = Some(num::<f64>(t.next(), ln, "global_dist")?),
                Some("domain") => {
                    let j: usize = num(t.next(), ln, "domain axis")?;
                    if j >= dim {
                        return Err(parse_err(ln, format!("domain axis {j} out of range")));
                    }
                    lower[j] = num(t.next(), ln, "lower bound")?;
                    upper[j] = num(t.next(), ln, "upper bound")?;
                }
                _ => {}
            }
            continue;
        }
        let mut t = line.split_whitespace();
        let first = t.next().expect("nonempty line");
        if first == "function" {
            let k: usize = num(t.next(), ln, "function index")?;
            if k != blocks.len() + 1 {
                return Err(parse_err(ln, format!("expected function {}, found {k}", blocks.len() + 1)));
            }
            blocks.push(Vec::new());
            continue;
        }
        let block = blocks
            .last_mut()
            .ok_or_else(|| parse_err(ln, "minimum listed before any `function` line"))?;
        let idx: usize = num(Some(first), ln, "minimum index")?;
        if idx != block.len() {
            return Err(parse_err(ln, format!("expected minimum {}, found {idx}", block.len())));
        }
        let vals: Vec<f64> = t
            .map(|s| num(Some(s), ln, "coordinate"))
            .collect::<Result<_>>()?;
        if vals.len() != dim + 2 {
            return Err(parse_err(ln, format!("expected {} numbers after the index", dim + 2)));
        }
        block.push((
            idx,
            Minimum {
                point: vals[..dim].to_vec(),
                value: vals[dim],
                radius: vals[dim + 1],
            },
        ));
    }

    if lower.iter().chain(&upper).any(|v| v.is_nan()) {
        return Err(parse_err(0, "domain bounds missing for some axis"));
    }
    let domain = BoxDomain::new(lower, upper)?;
    let global_dist = global_dist.ok_or_else(|| parse_err(0, "missing `# global_dist` line"))?;
    let spec = GklsClassSpec {
        dim,
        minima,
        global_value,
        global_radius,
        global_dist,
        domain: domain.clone(),
        seed,
        name,
    };
    spec.validate()?;
    if blocks.is_empty() {
        return Err(parse_err(0, "manifest lists no functions"));
    }
    let functions = blocks
        .into_iter()
        .enumerate()
        .map(|(k, b)| {
            if b.len() != minima {
                return Err(parse_err(0, format!("function {} lists {} minima, header says {minima}", k + 1, b.len())));
            }
            GklsFunction::from_minima(domain.clone(), b.into_iter().map(|(_, m)| m).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GklsClass { spec, functions })
}
