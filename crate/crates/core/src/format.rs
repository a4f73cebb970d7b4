//! Plain-text formats.
//!
//! `.bms` (bounded metric spaces, possibly partial):
//!
//! ```text
//! bms n=4 nstar=2
//! a b c
//! a b 3
//! b c 2
//! ```
//!
//! `nstar` is optional. Any pair left out makes the file a partial
//! distance set. `.dds` (directed distances) has the header `dds n=<int>`,
//! a points line and lines `p q d` for `p -> q` or `p q d bi` for a
//! bidirected pair. Edge lists hold one `u v` per line. Everywhere `#` starts
//! a comment and blank lines are ignored. Serializers write the canonical
//! form: sorted points, sorted pairs, no comments.

use std::fmt::Write as _;

use thiserror::Error;

use crate::girth::{DirectedDistance, DirectedDistanceStructure, GirthError};
use crate::spaces::{BoundedMetricSpace, Distance, PartialDistanceSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

/// Content lines with their 1-based numbers, comments stripped.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let body = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn number(line: usize, what: &str, tok: &str) -> Result<Distance, ParseError> {
    tok.parse()
        .or_else(|_| err(line, format!("malformed {what} {tok:?}")))
}

struct Header {
    bound: Distance,
    nstar: Option<Distance>,
}

fn header(
    line: usize,
    toks: &[&str],
    magic: &str,
    allow_nstar: bool,
) -> Result<Header, ParseError> {
    if toks.first() != Some(&magic) {
        return err(line, format!("expected header starting with {magic:?}"));
    }
    let (mut bound, mut nstar) = (None, None);
    for tok in &toks[1..] {
        match tok.split_once('=') {
            Some(("n", v)) if bound.is_none() => bound = Some(number(line, "bound", v)?),
            Some(("nstar", v)) if allow_nstar && nstar.is_none() => {
                nstar = Some(number(line, "nstar", v)?)
            }
            _ => return err(line, format!("unexpected header field {tok:?}")),
        }
    }
    match bound {
        Some(bound) => Ok(Header { bound, nstar }),
        None => err(line, "header is missing n=<int>"),
    }
}

/// Contents of a `.bms` file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BmsFile {
    pub nstar: Option<Distance>,
    pub spec: PartialDistanceSpec,
}

impl BmsFile {
    /// The stated `nstar`, or `ceil(n / 2)`.
    pub fn nstar_or_default(&self) -> Distance {
        self.nstar.unwrap_or_else(|| self.spec.bound().div_ceil(2))
    }

    pub fn is_total(&self) -> bool {
        self.spec.is_total()
    }
}

pub fn parse_bms(text: &str) -> Result<BmsFile, ParseError> {
    let mut it = lines(text);
    let Some((hl, htoks)) = it.next() else {
        return err(1, "empty input");
    };
    let h = header(hl, &htoks, "bms", true)?;
    let Some((pl, ptoks)) = it.next() else {
        return err(hl + 1, "missing points line");
    };
    let points: Vec<String> = ptoks.iter().map(|s| s.to_string()).collect();
    let mut spec = PartialDistanceSpec::new(h.bound, points).or_else(|e| err(pl, e.to_string()))?;
    for (l, toks) in it {
        let [p, q, d] = toks[..] else {
            return err(
                l,
                format!("expected `<p> <q> <d>`, got {} fields", toks.len()),
            );
        };
        let d = number(l, "distance", d)?;
        spec.assign(p, q, d).or_else(|e| err(l, e.to_string()))?;
    }
    Ok(BmsFile {
        nstar: h.nstar,
        spec,
    })
}

pub fn serialize_bms(file: &BmsFile) -> String {
    let mut out = format!("bms n={}", file.spec.bound());
    if let Some(k) = file.nstar {
        write!(out, " nstar={k}").unwrap();
    }
    out.push('\n');
    out.push_str(&file.spec.points().join(" "));
    out.push('\n');
    for (p, q, d) in file.spec.assigned() {
        writeln!(out, "{p} {q} {d}").unwrap();
    }
    out
}

pub fn serialize_space(space: &BoundedMetricSpace, nstar: Option<Distance>) -> String {
    serialize_bms(&BmsFile {
        nstar,
        spec: space.to_partial(),
    })
}

pub fn parse_dds(text: &str) -> Result<DirectedDistanceStructure, ParseError> {
    let mut it = lines(text);
    let Some((hl, htoks)) = it.next() else {
        return err(1, "empty input");
    };
    let h = header(hl, &htoks, "dds", false)?;
    let Some((pl, ptoks)) = it.next() else {
        return err(hl + 1, "missing points line");
    };
    let points: Vec<String> = ptoks.iter().map(|s| s.to_string()).collect();
    let nstar = h.bound.div_ceil(2);
    let mut assignments = Vec::new();
    let mut last_line = pl;
    for (l, toks) in it {
        last_line = l;
        let (p, q, d, bi) = match toks[..] {
            [p, q, d] => (p, q, d, false),
            [p, q, d, "bi"] => (p, q, d, true),
            _ => return err(l, "expected `<p> <q> <d>` or `<p> <q> <d> bi`"),
        };
        let d = number(l, "distance", d)?;
        let a = if bi {
            if d != nstar {
                return err(
                    l,
                    format!("bidirected distance must equal nstar = {nstar}, got {d}"),
                );
            }
            DirectedDistance::bidirected(p, q)
        } else {
            DirectedDistance::directed(p, q, d)
        };
        if !points.iter().any(|x| x == p) || !points.iter().any(|x| x == q) {
            return err(
                l,
                format!("pair {p}-{q} uses a point not on the points line"),
            );
        }
        // reject bad lengths and self pairs at their own line
        DirectedDistanceStructure::new(h.bound, vec![p.to_string(), q.to_string()], [a.clone()])
            .or_else(|e| err(l, e.to_string()))?;
        assignments.push((l, a));
    }
    let list: Vec<DirectedDistance> = assignments.iter().map(|(_, a)| a.clone()).collect();
    DirectedDistanceStructure::new(h.bound, points, list).or_else(|e| {
        let line = match &e {
            GirthError::DuplicatePair(p, q) => assignments
                .iter()
                .filter(|(_, a)| same_pair(a, p, q))
                .nth(1)
                .map_or(last_line, |(l, _)| *l),
            GirthError::MissingPair(..) => last_line,
            _ => pl,
        };
        err(line, e.to_string())
    })
}

fn same_pair(a: &DirectedDistance, p: &str, q: &str) -> bool {
    let (x, y) = match a {
        DirectedDistance::Directed { from, to, .. } => (from.as_str(), to.as_str()),
        DirectedDistance::Bidirected { a, b } => (a.as_str(), b.as_str()),
    };
    (x == p && y == q) || (x == q && y == p)
}

pub fn serialize_dds(s: &DirectedDistanceStructure) -> String {
    let mut out = format!("dds n={}\n{}\n", s.bound(), s.points().join(" "));
    for a in s.assignments() {
        match a {
            DirectedDistance::Directed { from, to, length } => {
                writeln!(out, "{from} {to} {length}").unwrap()
            }
            DirectedDistance::Bidirected { a, b } => {
                writeln!(out, "{a} {b} {} bi", s.nstar()).unwrap()
            }
        }
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<Vec<(String, String)>, ParseError> {
    lines(text)
        .map(|(l, toks)| match toks[..] {
            [u, v] => Ok((u.to_string(), v.to_string())),
            _ => err(l, format!("expected `<u> <v>`, got {} fields", toks.len())),
        })
        .collect()
}

pub fn serialize_edge_list(edges: &[(String, String)]) -> String {
    edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_space() {
        let f = parse_bms("bms n=4 nstar=2\na b\na b 3\n").unwrap();
        assert_eq!(f.nstar, Some(2));
        assert!(f.is_total());
        let s = f.spec.into_space().unwrap();
        assert_eq!(s.dist_by_name("a", "b"), Some(3));
    }

    #[test]
    fn canonical_round_trip() {
        let raw = "# comment\nbms n=5\n  c a b   # trailing\n\nc b 2\nb a 1\n";
        let f = parse_bms(raw).unwrap();
        let canon = serialize_bms(&f);
        assert_eq!(canon, "bms n=5\na b c\na b 1\nb c 2\n");
        assert_eq!(serialize_bms(&parse_bms(&canon).unwrap()), canon);
        assert_eq!(f.nstar_or_default(), 3);
    }

    #[test]
    fn diagnostics_name_lines() {
        let e = parse_bms("bms n=4\na b\na b x\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("malformed distance"));
        assert_eq!(parse_bms("bms q=4\na\n").unwrap_err().line, 1);
        assert_eq!(parse_bms("bms n=4\na b\na b 9\n").unwrap_err().line, 3);
        assert_eq!(parse_bms("bms n=4\na b\n\na c 1\n").unwrap_err().line, 4);
        assert_eq!(parse_bms("").unwrap_err().line, 1);
    }

    #[test]
    fn dds_round_trip() {
        let raw = "dds n=5\nc b a\nb a 1\nb c 3 bi\na c 2\n";
        let s = parse_dds(raw).unwrap();
        let canon = serialize_dds(&s);
        assert_eq!(canon, "dds n=5\na b c\nb a 1\na c 2\nb c 3 bi\n");
        assert_eq!(parse_dds(&canon).unwrap(), s);
    }

    #[test]
    fn dds_diagnostics() {
        assert_eq!(parse_dds("dds n=5\na b\na b 2 bi\n").unwrap_err().line, 3);
        assert_eq!(parse_dds("dds n=5\na b\na b 3\n").unwrap_err().line, 3);
        assert_eq!(parse_dds("dds n=5\na b c\na b 1\n").unwrap_err().line, 3);
        assert_eq!(
            parse_dds("dds n=5\na b\na b 1\nb a 2\n").unwrap_err().line,
            4
        );
    }

    #[test]
    fn edge_lists() {
        let e = parse_edge_list("a b\n# x\nb c\n").unwrap();
        assert_eq!(serialize_edge_list(&e), "a b\nb c\n");
        assert_eq!(parse_edge_list("a b c\n").unwrap_err().line, 1);
    }
}
