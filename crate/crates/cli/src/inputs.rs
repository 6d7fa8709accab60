//! Input specs for coefficient vectors, cube functions and torus functions.
//! A spec naming an existing file is read as JSON.

use std::path::Path;

use xpcube::torus::{Generator, TorusJson};
use xpcube::walsh::{gaussian_vector, CubeJson};
use xpcube::{CubeFunction, Subset, TorusFunction};

use crate::grid::parse_coords;

pub const COEFF_HELP: &str = "ones | e1 | gaussian:SEED | comma list | JSON file with an array";
pub const CUBE_HELP: &str =
    "character:COORDS | linear:A1,A2,.. | random:SEED (centered Gaussian) | constant:C | JSON file {n, repr, data}";
pub const TORUS_HELP: &str = "constant:V | cosine:J | cosine-sum[:A1,..] | character:XI1,.. | tent:J | random:SEED | random-trig:SEED[:TERMS] | JSON file {r, n, data}";

fn read_file(spec: &str) -> Result<Option<String>, String> {
    let path = Path::new(spec);
    if path.is_file() {
        std::fs::read_to_string(path)
            .map(Some)
            .map_err(|e| format!("cannot read {spec}: {e}"))
    } else {
        Ok(None)
    }
}

fn numbers(list: &str) -> Result<Vec<f64>, String> {
    list.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("'{v}' is not a number")))
        .collect()
}

fn arg<'a>(rest: Option<&'a str>, spec: &str) -> Result<&'a str, String> {
    rest.ok_or_else(|| format!("'{spec}' needs a value after ':'"))
}

fn need_n(n: Option<usize>, spec: &str) -> Result<usize, String> {
    n.ok_or_else(|| format!("'{spec}' needs --n"))
}

/// Coefficient vector for the linear inequality.
pub fn coefficients(spec: &str, n: Option<usize>) -> Result<Vec<f64>, String> {
    if let Some(text) = read_file(spec)? {
        return serde_json::from_str(&text).map_err(|e| format!("malformed coefficient file {spec}: {e}"));
    }
    let (head, rest) = split(spec);
    match head {
        "ones" => Ok(vec![1.0; need_n(n, spec)?]),
        "e1" => {
            let mut a = vec![0.0; need_n(n, spec)?];
            a[0] = 1.0;
            Ok(a)
        }
        "gaussian" => {
            let seed = arg(rest, spec)?
                .parse::<u64>()
                .map_err(|_| format!("bad seed in '{spec}'"))?;
            Ok(gaussian_vector(need_n(n, spec)?, seed))
        }
        _ => numbers(spec),
    }
}

/// Cube function on `{-1,1}^n`.
pub fn cube_function(spec: &str, n: Option<usize>) -> Result<CubeFunction, String> {
    if let Some(text) = read_file(spec)? {
        return CubeJson::parse(&text)
            .and_then(|j| j.into_function())
            .map_err(|e| format!("malformed cube file {spec}: {e}"));
    }
    let (head, rest) = split(spec);
    let fail = |e: xpcube::Error| e.to_string();
    match head {
        "character" => {
            let n = need_n(n, spec)?;
            let coords = parse_coords(arg(rest, spec)?, n)?;
            if let Some(c) = coords.iter().find(|c| **c >= n) {
                return Err(format!("coordinate {c} out of range for n = {n}"));
            }
            CubeFunction::character(n, Subset::from_coords(coords)).map_err(fail)
        }
        "linear" => CubeFunction::linear(&numbers(arg(rest, spec)?)?).map_err(fail),
        "random" => {
            let seed = arg(rest, spec)?
                .parse::<u64>()
                .map_err(|_| format!("bad seed in '{spec}'"))?;
            let n = need_n(n, spec)?;
            CubeFunction::gaussian(n, seed).map_err(fail)
        }
        "constant" => {
            let c = arg(rest, spec)?
                .parse::<f64>()
                .map_err(|_| format!("bad constant in '{spec}'"))?;
            CubeFunction::constant(need_n(n, spec)?, c).map_err(fail)
        }
        _ => Err(format!("unknown cube function '{spec}' (expected {CUBE_HELP})")),
    }
}

/// Torus function on `Z_{2r}^n`.
pub fn torus_function(spec: &str, r: Option<usize>, n: Option<usize>) -> Result<TorusFunction, String> {
    if let Some(text) = read_file(spec)? {
        return TorusJson::parse(&text)
            .and_then(|j| j.into_function())
            .map_err(|e| format!("malformed torus file {spec}: {e}"));
    }
    let r = r.ok_or("generated torus functions need --r")?;
    let n = n.ok_or("generated torus functions need --n")?;
    let (head, rest) = split(spec);
    let index = |s: &str| s.parse::<usize>().map_err(|_| format!("bad coordinate in '{spec}'"));
    let seed = |s: &str| s.parse::<u64>().map_err(|_| format!("bad seed in '{spec}'"));
    let generator = match head {
        "constant" => Generator::Constant {
            value: arg(rest, spec)?.parse().map_err(|_| format!("bad value in '{spec}'"))?,
        },
        "cosine" => Generator::Cosine {
            coord: index(arg(rest, spec)?)?,
        },
        "cosine-sum" => Generator::CosineSum {
            coeffs: match rest {
                Some(list) => numbers(list)?,
                None => vec![1.0; n],
            },
        },
        "character" => Generator::Character {
            freq: arg(rest, spec)?
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<i64>()
                        .map_err(|_| format!("bad frequency in '{spec}'"))
                })
                .collect::<Result<_, _>>()?,
        },
        "tent" => Generator::Tent {
            coord: index(arg(rest, spec)?)?,
        },
        "random" => Generator::RandomDense {
            seed: seed(arg(rest, spec)?)?,
        },
        "random-trig" => {
            let body = arg(rest, spec)?;
            let (s, terms) = match body.split_once(':') {
                Some((s, t)) => (
                    s,
                    t.parse::<usize>().map_err(|_| format!("bad term count in '{spec}'"))?,
                ),
                None => (body, 4),
            };
            Generator::RandomTrig { seed: seed(s)?, terms }
        }
        _ => return Err(format!("unknown torus function '{spec}' (expected {TORUS_HELP})")),
    };
    generator.build(r, n).map_err(|e| e.to_string())
}

fn split(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once(':') {
        Some((h, r)) => (h.trim(), Some(r.trim())),
        None => (spec.trim(), None),
    }
}
