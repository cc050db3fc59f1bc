//! String ids for gallery items.
//!
//! ```text
//! item  := name "(" args ")"
//! args  := arg ("," arg)*
//! arg   := key "=" number | item
//! ```
//!
//! Names: `u_slice`, `u_radial`, `v`, `power_singularity`, `up`, `trunc`,
//! `shifted`. `up` takes an optional ball radius `r` (default 1); `shifted`
//! takes an optional constant `c` (default: the item's value on the boundary
//! sphere, so the shifted item vanishes there).

use std::collections::BTreeMap;

use crate::error::{LabError, Result};
use crate::gallery::{
    make_power_singularity, make_u_radial, make_u_slice, make_up_on, make_v, shifted, truncate, GalleryItem,
    GalleryTag,
};

fn parse_error<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Parse(msg.into()))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

struct Call {
    name: String,
    keys: BTreeMap<String, f64>,
    nested: Vec<Call>,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            parse_error(format!("expected '{c}' at offset {} in {:?}", self.pos, self.src))
        }
    }

    fn token(&mut self) -> &'a str {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest.find(|c: char| matches!(c, '(' | ')' | ',' | '=') || c.is_whitespace()).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn call(&mut self) -> Result<Call> {
        let name = self.token().to_ascii_lowercase();
        if name.is_empty() {
            return parse_error(format!("expected an item name at offset {} in {:?}", self.pos, self.src));
        }
        self.expect('(')?;
        let mut keys = BTreeMap::new();
        let mut nested = Vec::new();
        loop {
            let save = self.pos;
            let word = self.token();
            match self.peek() {
                Some('=') => {
                    self.expect('=')?;
                    let raw = self.token();
                    let value: f64 = match raw {
                        "inf" | "Inf" | "infinity" => f64::INFINITY,
                        _ => raw.parse().map_err(|_| LabError::Parse(format!("bad number {raw:?} for {word}")))?,
                    };
                    if keys.insert(word.to_ascii_lowercase(), value).is_some() {
                        return parse_error(format!("duplicate argument {word} in {:?}", self.src));
                    }
                }
                Some('(') => {
                    self.pos = save;
                    nested.push(self.call()?);
                }
                _ => return parse_error(format!("malformed argument at offset {save} in {:?}", self.src)),
            }
            match self.peek() {
                Some(',') => self.expect(',')?,
                Some(')') => {
                    self.expect(')')?;
                    break;
                }
                _ => return parse_error(format!("expected ',' or ')' at offset {} in {:?}", self.pos, self.src)),
            }
        }
        Ok(Call { name, keys, nested })
    }
}

impl Call {
    fn take(&mut self, key: &str) -> Result<f64> {
        self.keys
            .remove(key)
            .ok_or_else(|| LabError::Parse(format!("{} needs argument {key}", self.name)))
    }

    fn take_dim(&mut self, key: &str) -> Result<usize> {
        let v = self.take(key)?;
        if v.fract() != 0.0 || !(1.0..=64.0).contains(&v) {
            return parse_error(format!("{key} must be a positive integer, got {v}"));
        }
        Ok(v as usize)
    }

    fn finish(&self) -> Result<()> {
        if let Some(k) = self.keys.keys().next() {
            return parse_error(format!("{} does not take argument {k}", self.name));
        }
        Ok(())
    }

    fn build(mut self) -> Result<GalleryItem> {
        let nested_count = match self.name.as_str() {
            "trunc" | "shifted" => 1,
            _ => 0,
        };
        if self.nested.len() != nested_count {
            return parse_error(format!("{} takes {nested_count} nested item(s)", self.name));
        }
        let item = match self.name.as_str() {
            "u_slice" => {
                let (r, alpha, p, n) = (self.take("r")?, self.take("alpha")?, self.take("p")?, self.take_dim("n")?);
                make_u_slice(r, alpha, p, n)?
            }
            "u_radial" => {
                let (r, alpha, n, p) = (self.take("r")?, self.take("alpha")?, self.take_dim("n")?, self.take("p")?);
                make_u_radial(r, alpha, n, p)?
            }
            "v" => {
                let (r, alpha, n, p) = (self.take("r")?, self.take("alpha")?, self.take_dim("n")?, self.take("p")?);
                make_v(r, alpha, n, p)?
            }
            "power_singularity" => {
                let (r, n, p) = (self.take("r")?, self.take_dim("n")?, self.take("p")?);
                make_power_singularity(r, n, p)?
            }
            "up" => {
                let (n, p) = (self.take_dim("n")?, self.take("p")?);
                let r = if self.keys.contains_key("r") { self.take("r")? } else { 1.0 };
                make_up_on(n, p, r)?
            }
            "trunc" => {
                let k = self.take("k")?;
                if k.fract() != 0.0 || k < 0.0 || k > u32::MAX as f64 {
                    return parse_error(format!("k must be a nonnegative integer, got {k}"));
                }
                let parent = self.nested.pop().expect("one nested item").build()?;
                truncate(&parent, k as u32)?
            }
            "shifted" => {
                let parent = self.nested.pop().expect("one nested item").build()?;
                let c = if self.keys.contains_key("c") {
                    self.take("c")?
                } else {
                    parent.value_radial(parent.radius())
                };
                shifted(&parent, c)?
            }
            other => return parse_error(format!("unknown gallery item {other:?}")),
        };
        self.finish()?;
        Ok(item)
    }
}

/// Builds the item named by `id`.
pub fn parse_item(id: &str) -> Result<GalleryItem> {
    let mut p = Parser { src: id, pos: 0 };
    let call = p.call()?;
    if p.peek().is_some() {
        return parse_error(format!("trailing input at offset {} in {id:?}", p.pos));
    }
    call.build()
}

/// Canonical id; parsing it rebuilds an identical item.
pub fn format_tag(tag: &GalleryTag) -> String {
    match tag {
        GalleryTag::USlice { r, alpha, p, n } => format!("u_slice(r={r},alpha={alpha},p={p},n={n})"),
        GalleryTag::URadial { r, alpha, n, p } => format!("u_radial(r={r},alpha={alpha},n={n},p={p})"),
        GalleryTag::VAntiderivative { r, alpha, n, p } => format!("v(r={r},alpha={alpha},n={n},p={p})"),
        GalleryTag::PowerSingularity { r, n, p } => format!("power_singularity(r={r},n={n},p={p})"),
        GalleryTag::UpFamily { n, p, radius } => {
            if *radius == 1.0 {
                format!("up(n={n},p={p})")
            } else {
                format!("up(n={n},p={p},r={radius})")
            }
        }
        GalleryTag::Truncation { parent, k } => format!("trunc(k={k},{})", format_tag(parent)),
        GalleryTag::Shifted { parent, constant } => format!("shifted(c={constant},{})", format_tag(parent)),
    }
}
