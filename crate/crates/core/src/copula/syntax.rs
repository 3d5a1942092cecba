//! Text form of copula models.
//!
//! ```text
//! model    := compose | family [":" params]
//! compose  := "compose:[" item ("|" item)* "]"
//! item     := model ["@{" index ("," index)* "}"]
//! family   := "product" | "comonotone" | "countermonotone" | "gumbel" | "mo"
//! params   := key "=" number ("," key "=" number)*
//! ```
//!
//! Required keys: `product` and `comonotone` take `d`; `gumbel` takes `d` and
//! `delta`; `mo` takes `a1` and `a2`; `countermonotone` takes none. Block
//! positions after `@` are one-based; either every block of a composition
//! lists its positions or none does (then blocks are laid out left to right).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{Block, CopulaModel};
use crate::error::{Error, Result};

impl FromStr for CopulaModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s).map_err(|reason| Error::ModelSyntax {
            input: s.to_string(),
            reason,
        })
    }
}

fn parse(s: &str) -> std::result::Result<CopulaModel, String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("compose:") {
        return parse_compose(rest.trim());
    }
    let (family, params) = match s.split_once(':') {
        Some((f, p)) => (f.trim(), p.trim()),
        None => (s, ""),
    };
    let mut params = parse_params(params)?;
    let model = match family {
        "product" => CopulaModel::product(take_dim(&mut params)?),
        "comonotone" => CopulaModel::comonotone(take_dim(&mut params)?),
        "countermonotone" => Ok(CopulaModel::CountermonotonePair),
        "gumbel" => {
            let d = take_dim(&mut params)?;
            let delta = take_real(&mut params, "delta")?;
            CopulaModel::gumbel(d, delta)
        }
        "mo" => {
            let a1 = take_real(&mut params, "a1")?;
            let a2 = take_real(&mut params, "a2")?;
            CopulaModel::marshall_olkin(a1, a2)
        }
        "" => return Err("empty model".into()),
        other => return Err(format!("unknown family `{other}`")),
    }
    .map_err(|e| e.to_string())?;
    if let Some(key) = params.keys().next() {
        return Err(format!("unexpected parameter `{key}` for `{family}`"));
    }
    Ok(model)
}

fn parse_params(text: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found `{part}`"))?;
        let k = k.trim().to_string();
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(format!("parameter `{k}` given twice"));
        }
    }
    Ok(out)
}

fn take_dim(params: &mut BTreeMap<String, String>) -> std::result::Result<usize, String> {
    let v = params.remove("d").ok_or("missing parameter `d`")?;
    v.parse()
        .map_err(|_| format!("`d` must be a positive integer, found `{v}`"))
}

fn take_real(params: &mut BTreeMap<String, String>, key: &str) -> std::result::Result<f64, String> {
    let v = params
        .remove(key)
        .ok_or_else(|| format!("missing parameter `{key}`"))?;
    let x: f64 = v
        .parse()
        .map_err(|_| format!("`{key}` must be a number, found `{v}`"))?;
    if !x.is_finite() {
        return Err(format!("`{key}` must be finite"));
    }
    Ok(x)
}

fn parse_compose(text: &str) -> std::result::Result<CopulaModel, String> {
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or("composition must be written compose:[A | B | ...]")?;
    let items = split_top_level(inner, '|')?;
    let mut models = Vec::with_capacity(items.len());
    let mut positions = Vec::with_capacity(items.len());
    for item in items {
        let (model_text, coords) = match find_top_level(item, '@') {
            Some(at) => {
                let listed = item[at + 1..].trim();
                let listed = listed
                    .strip_prefix('{')
                    .and_then(|t| t.strip_suffix('}'))
                    .ok_or("block positions must be written @{i,j,...}")?;
                let coords = listed
                    .split(',')
                    .map(|p| match p.trim().parse::<usize>() {
                        Ok(k) if k >= 1 => Ok(k - 1),
                        _ => Err(format!("bad block position `{}`", p.trim())),
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                (&item[..at], Some(coords))
            }
            None => (item, None),
        };
        models.push(parse(model_text)?);
        positions.push(coords);
    }
    let listed = positions.iter().filter(|p| p.is_some()).count();
    let result = if listed == 0 {
        CopulaModel::compose(models)
    } else if listed == models.len() {
        let blocks = models
            .into_iter()
            .zip(positions)
            .map(|(model, coords)| Block {
                model,
                coords: coords.unwrap_or_default(),
            })
            .collect();
        CopulaModel::compose_listed(blocks)
    } else {
        return Err("either every block lists its positions or none does".into());
    };
    result.map_err(|e| e.to_string())
}

fn split_top_level(text: &str, sep: char) -> std::result::Result<Vec<&str>, String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '[' | '{' => depth += 1,
            ']' | '}' => {
                depth -= 1;
                if depth < 0 {
                    return Err("unbalanced brackets".into());
                }
            }
            c if c == sep && depth == 0 => {
                parts.push(text[start..i].trim());
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err("unbalanced brackets".into());
    }
    parts.push(text[start..].trim());
    if parts.iter().any(|p| p.is_empty()) {
        return Err("empty block in composition".into());
    }
    Ok(parts)
}

fn find_top_level(text: &str, needle: char) -> Option<usize> {
    let mut depth = 0i32;
    let mut found = None;
    for (i, ch) in text.char_indices() {
        match ch {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            c if c == needle && depth == 0 => found = Some(i),
            _ => {}
        }
    }
    found
}

impl fmt::Display for CopulaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopulaModel::Product(d) => write!(f, "product:d={d}"),
            CopulaModel::Comonotone(d) => write!(f, "comonotone:d={d}"),
            CopulaModel::CountermonotonePair => f.write_str("countermonotone"),
            CopulaModel::Gumbel { dim, delta } => write!(f, "gumbel:d={dim},delta={delta}"),
            CopulaModel::MarshallOlkin { alpha1, alpha2 } => {
                write!(f, "mo:a1={alpha1},a2={alpha2}")
            }
            CopulaModel::Compose(blocks) => {
                let contiguous = CopulaModel::is_contiguous_compose(blocks);
                f.write_str("compose:[")?;
                for (k, b) in blocks.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{}", b.model)?;
                    if !contiguous {
                        let listed: Vec<String> =
                            b.coords.iter().map(|c| (c + 1).to_string()).collect();
                        write!(f, "@{{{}}}", listed.join(","))?;
                    }
                }
                f.write_str("]")
            }
        }
    }
}
