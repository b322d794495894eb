//! Text serialization of compiled moment systems.
//!
//! ```text
//! treering-moment-system 1
//! reduced true
//! vars x y v c s
//! dist_vars w_v c_w_theta s_w_theta
//! group plain w_v 0
//! group trig w_theta 1 2
//! link theta 3 4
//! basis 20
//! moment 1,0,0,0,0
//! ...
//! terms 87
//! 0 | 1/1 | 0,0,0 | 0
//! 0 | 1/1 | 0,1,0 | 2,5
//! ```
//!
//! Term lines are `target_idx | num/den | beta_w | factor_idx_list`, with `-`
//! for an empty factor list.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;

use super::{MomentBasis, MomentStateSystem, MomentUpdateForm, MufTerm};
use crate::error::{Error, Result};
use crate::polyring::MultiIndex;
use crate::scalar::Rational;
use crate::sysspec::{DistGroup, TrigLink};

pub const FORMAT_HEADER: &str = "treering-moment-system 1";

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub(super) fn write(sys: &MomentStateSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_HEADER}");
    let _ = writeln!(out, "reduced {}", sys.reduced);
    let _ = writeln!(out, "vars {}", sys.vars.join(" "));
    let _ = writeln!(out, "dist_vars {}", sys.dist_vars.join(" "));
    for g in &sys.dist_groups {
        let _ = match g {
            DistGroup::Plain { name, index } => writeln!(out, "group plain {name} {index}"),
            DistGroup::Trig { name, cos_index, sin_index } => {
                writeln!(out, "group trig {name} {cos_index} {sin_index}")
            }
        };
    }
    for l in &sys.state_links {
        let _ = writeln!(out, "link {} {} {}", l.angle, l.cos_index, l.sin_index);
    }
    let _ = writeln!(out, "basis {}", sys.basis.len());
    for m in &sys.basis {
        let _ = writeln!(out, "moment {}", join(m.as_slice()));
    }
    let _ = writeln!(out, "terms {}", sys.term_count());
    for (target, form) in sys.forms.iter().enumerate() {
        for t in &form.terms {
            let factors = if t.factors.is_empty() {
                "-".to_string()
            } else {
                join(t.factors.iter().map(|f| sys.basis.index(f).expect("complete basis")))
            };
            let _ = writeln!(
                out,
                "{target} | {}/{} | {} | {factors}",
                t.coeff.numer(),
                t.coeff.denom(),
                join(t.beta_w.as_slice())
            );
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.last = i + 1;
            return Ok((i + 1, line));
        }
        Err(Error::Format { line: self.last + 1, message: "unexpected end of input".into() })
    }

    fn peek_keyword(&self, keyword: &str) -> bool {
        let mut probe = self.inner.clone();
        probe
            .find(|(_, l)| {
                let l = l.trim();
                !l.is_empty() && !l.starts_with('#')
            })
            .is_some_and(|(_, l)| l.split_whitespace().next() == Some(keyword))
    }
}

fn ferr(line: usize, message: impl Into<String>) -> Error {
    Error::Format { line, message: message.into() }
}

fn keyword<'a>(line: usize, text: &'a str, key: &str) -> Result<&'a str> {
    match text.split_once(char::is_whitespace) {
        Some((k, rest)) if k == key => Ok(rest.trim()),
        None if text == key => Ok(""),
        _ => Err(ferr(line, format!("expected `{key}`"))),
    }
}

fn num<T: FromStr>(line: usize, text: &str) -> Result<T> {
    text.trim().parse().map_err(|_| ferr(line, format!("bad number `{text}`")))
}

fn index_list(line: usize, text: &str, len: usize) -> Result<MultiIndex> {
    let e: Vec<u32> = text.split(',').map(|p| num(line, p)).collect::<Result<_>>()?;
    if e.len() != len {
        return Err(ferr(line, format!("expected {len} exponents, found {}", e.len())));
    }
    Ok(MultiIndex::new(e))
}

pub(super) fn read(text: &str) -> Result<MomentStateSystem> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (n, header) = lines.next()?;
    if header != FORMAT_HEADER {
        return Err(ferr(n, format!("expected header `{FORMAT_HEADER}`")));
    }
    let (n, l) = lines.next()?;
    let reduced = match keyword(n, l, "reduced")? {
        "true" => true,
        "false" => false,
        other => return Err(ferr(n, format!("bad flag `{other}`"))),
    };
    let (n, l) = lines.next()?;
    let vars: Vec<String> = keyword(n, l, "vars")?.split_whitespace().map(String::from).collect();
    let (n, l) = lines.next()?;
    let dist_vars: Vec<String> = keyword(n, l, "dist_vars")?.split_whitespace().map(String::from).collect();

    let mut dist_groups = Vec::new();
    while lines.peek_keyword("group") {
        let (n, l) = lines.next()?;
        let parts: Vec<&str> = keyword(n, l, "group")?.split_whitespace().collect();
        let check = |i: usize| -> Result<usize> {
            if i < dist_vars.len() {
                Ok(i)
            } else {
                Err(ferr(n, format!("disturbance index {i} out of range")))
            }
        };
        dist_groups.push(match parts.as_slice() {
            ["plain", name, i] => DistGroup::Plain { name: name.to_string(), index: check(num(n, i)?)? },
            ["trig", name, c, s] => {
                DistGroup::Trig { name: name.to_string(), cos_index: check(num(n, c)?)?, sin_index: check(num(n, s)?)? }
            }
            _ => return Err(ferr(n, "malformed group line")),
        });
    }
    let mut state_links = Vec::new();
    while lines.peek_keyword("link") {
        let (n, l) = lines.next()?;
        let parts: Vec<&str> = keyword(n, l, "link")?.split_whitespace().collect();
        let [angle, c, s] = parts.as_slice() else { return Err(ferr(n, "malformed link line")) };
        let (cos_index, sin_index): (usize, usize) = (num(n, c)?, num(n, s)?);
        if cos_index >= vars.len() || sin_index >= vars.len() {
            return Err(ferr(n, "link index out of range"));
        }
        state_links.push(TrigLink { angle: angle.to_string(), cos_index, sin_index });
    }

    let (n, l) = lines.next()?;
    let count: usize = num(n, keyword(n, l, "basis")?)?;
    let mut basis = MomentBasis::new();
    for _ in 0..count {
        let (n, l) = lines.next()?;
        let mi = index_list(n, keyword(n, l, "moment")?, vars.len())?;
        if basis.contains(&mi) {
            return Err(ferr(n, "duplicate basis element"));
        }
        basis.insert(mi);
    }
    let mut forms: Vec<MomentUpdateForm> =
        basis.iter().map(|m| MomentUpdateForm { target: m.clone(), terms: Vec::new(), reduced }).collect();

    let (n, l) = lines.next()?;
    let terms: usize = num(n, keyword(n, l, "terms")?)?;
    for _ in 0..terms {
        let (n, l) = lines.next()?;
        let fields: Vec<&str> = l.split('|').map(str::trim).collect();
        let [target, coeff, beta_w, factors] = fields.as_slice() else {
            return Err(ferr(n, "term line needs four `|`-separated fields"));
        };
        let target: usize = num(n, target)?;
        if target >= forms.len() {
            return Err(ferr(n, format!("target index {target} out of range")));
        }
        let (p, q) = coeff.split_once('/').ok_or_else(|| ferr(n, "coefficient must be num/den"))?;
        let (p, q): (BigInt, BigInt) = (num(n, p)?, num(n, q)?);
        if q == BigInt::from(0) {
            return Err(ferr(n, "zero denominator"));
        }
        let coeff = Rational::new(p, q);
        let beta_w = index_list(n, beta_w, dist_vars.len())?;
        let factors = if *factors == "-" {
            Vec::new()
        } else {
            factors
                .split(',')
                .map(|i| {
                    let i: usize = num(n, i)?;
                    if i < basis.len() {
                        Ok(basis.get(i).clone())
                    } else {
                        Err(ferr(n, format!("factor index {i} out of range")))
                    }
                })
                .collect::<Result<_>>()?
        };
        forms[target].terms.push(MufTerm { coeff, beta_w, factors });
    }
    if let Ok((n, _)) = lines.next() {
        return Err(ferr(n, "trailing content"));
    }
    Ok(MomentStateSystem { vars, dist_vars, dist_groups, state_links, basis, forms, reduced })
}
