//! Text formats for instances, matchings, adaptation queries and graphs.
//!
//! Instance (`.pref`):
//!
//! ```text
//! kind sm
//! left m1 m2
//! right w1 w2
//! m1 : w1 w2
//! m2 : ( w1 w2 )      # parentheses group a tie
//! w1 : m2 m1
//! w2 : m1 m2
//! ```
//!
//! Matchings are one `a b` pair per line. Queries have `[m1]`, `[forced]` and
//! `[forbidden]` sections of pair lines followed by `k = <int>`. `#` starts a
//! comment everywhere and blank lines are ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gen::Graph;
use crate::instance::{validate_instance, Instance, Pair, RawAgent, RawInstance, RawKind};
use crate::matching::Matching;
use crate::query::AdaptQuery;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let line = line.trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn tokenize(s: &str) -> Vec<String> {
    s.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

pub fn parse_raw_instance(text: &str) -> Result<RawInstance> {
    let mut lines = content_lines(text).peekable();
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty instance file"))?;
    let mut kind = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["kind", "sr"] => RawKind::Roommates,
        ["kind", "sm"] => RawKind::Marriage {
            left: Vec::new(),
            right: Vec::new(),
        },
        _ => return Err(parse_err(line_no, "expected `kind sr` or `kind sm`")),
    };
    if let RawKind::Marriage { left, right } = &mut kind {
        for (expected, side) in [("left", left), ("right", right)] {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| parse_err(line_no, format!("missing `{expected}` line")))?;
            let mut words = line.split_whitespace();
            if words.next() != Some(expected) {
                return Err(parse_err(line_no, format!("expected `{expected}` line")));
            }
            side.extend(words.map(str::to_string));
        }
    }

    let mut agents = Vec::new();
    for (line_no, line) in lines {
        let (name, rest) = line
            .split_once(':')
            .ok_or_else(|| parse_err(line_no, "expected `<name> : <preferences>`"))?;
        let name = name.trim();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(parse_err(line_no, format!("bad agent name {name:?}")));
        }
        let mut groups: Vec<Vec<String>> = Vec::new();
        let mut open: Option<Vec<String>> = None;
        for tok in tokenize(rest) {
            match (tok.as_str(), open.as_mut()) {
                ("(", None) => open = Some(Vec::new()),
                ("(", Some(_)) => return Err(parse_err(line_no, "nested tie group")),
                (")", Some(_)) => {
                    let group = open.take().unwrap_or_default();
                    if group.is_empty() {
                        return Err(parse_err(line_no, "empty tie group"));
                    }
                    groups.push(group);
                }
                (")", None) => return Err(parse_err(line_no, "unbalanced `)`")),
                (_, Some(group)) => group.push(tok),
                (_, None) => groups.push(vec![tok]),
            }
        }
        if open.is_some() {
            return Err(parse_err(line_no, "unclosed tie group"));
        }
        agents.push(RawAgent {
            name: name.to_string(),
            groups,
        });
    }
    Ok(RawInstance { kind, agents })
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    Ok(validate_instance(&parse_raw_instance(text)?)?)
}

pub fn emit_instance(instance: &Instance) -> String {
    emit_instance_with_header(instance, &[])
}

/// Writes `header` lines as comments before the instance.
pub fn emit_instance_with_header(instance: &Instance, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    let raw = instance.to_raw();
    match &raw.kind {
        RawKind::Roommates => out.push_str("kind sr\n"),
        RawKind::Marriage { left, right } => {
            out.push_str("kind sm\n");
            let _ = writeln!(out, "left {}", left.join(" "));
            let _ = writeln!(out, "right {}", right.join(" "));
        }
    }
    for agent in &raw.agents {
        let tokens: Vec<String> = agent
            .groups
            .iter()
            .map(|g| {
                if g.len() == 1 {
                    g[0].clone()
                } else {
                    format!("( {} )", g.join(" "))
                }
            })
            .collect();
        if tokens.is_empty() {
            let _ = writeln!(out, "{} :", agent.name);
        } else {
            let _ = writeln!(out, "{} : {}", agent.name, tokens.join(" "));
        }
    }
    out
}

fn parse_pair_line(instance: &Instance, line_no: usize, line: &str) -> Result<Pair> {
    match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        [a, b] => instance
            .pair_by_names(a, b)
            .map_err(|e| parse_err(line_no, e.to_string())),
        _ => Err(parse_err(line_no, "expected `<name> <name>`")),
    }
}

pub fn parse_matching(instance: &Instance, text: &str) -> Result<Matching> {
    let pairs = content_lines(text)
        .map(|(no, line)| parse_pair_line(instance, no, line))
        .collect::<Result<Vec<_>>>()?;
    Matching::on(instance, pairs)
}

pub fn emit_matching(instance: &Instance, m: &Matching) -> String {
    let mut out = String::new();
    for p in m.pairs() {
        let _ = writeln!(out, "{} {}", instance.name(p.lo()), instance.name(p.hi()));
    }
    out
}

pub fn parse_query(instance: &Instance, text: &str) -> Result<AdaptQuery> {
    #[derive(PartialEq)]
    enum Section {
        None,
        M1,
        Forced,
        Forbidden,
    }
    let mut section = Section::None;
    let (mut m1, mut forced, mut forbidden) = (Vec::new(), Vec::new(), Vec::new());
    let mut k = None;
    for (no, line) in content_lines(text) {
        match line {
            "[m1]" => section = Section::M1,
            "[forced]" => section = Section::Forced,
            "[forbidden]" => section = Section::Forbidden,
            _ if line.starts_with('k') && line.contains('=') => {
                let value = line.split_once('=').map(|(_, v)| v.trim()).unwrap_or("");
                k = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| parse_err(no, format!("bad budget {value:?}")))?,
                );
            }
            _ => {
                let pair = parse_pair_line(instance, no, line)?;
                match section {
                    Section::M1 => m1.push(pair),
                    Section::Forced => forced.push(pair),
                    Section::Forbidden => forbidden.push(pair),
                    Section::None => return Err(parse_err(no, "pair outside of a section")),
                }
            }
        }
    }
    let k = k.ok_or_else(|| parse_err(0, "missing `k = <int>`"))?;
    Ok(AdaptQuery::new(
        Matching::on(instance, m1)?,
        forced,
        forbidden,
        k,
    ))
}

pub fn emit_query(instance: &Instance, q: &AdaptQuery) -> String {
    let mut out = String::new();
    let mut section = |title: &str, pairs: &mut dyn Iterator<Item = Pair>| {
        let _ = writeln!(out, "[{title}]");
        for p in pairs {
            let _ = writeln!(out, "{} {}", instance.name(p.lo()), instance.name(p.hi()));
        }
    };
    section("m1", &mut q.m1.pairs());
    section("forced", &mut q.forced.iter().copied());
    section("forbidden", &mut q.forbidden.iter().copied());
    let _ = writeln!(out, "k = {}", q.k);
    out
}

/// `vertices <n>` followed by one `u v` edge per line, 0-based.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty graph file"))?;
    let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["vertices", n] => n
            .parse::<usize>()
            .map_err(|_| parse_err(no, "bad vertex count"))?,
        _ => return Err(parse_err(no, "expected `vertices <n>`")),
    };
    let mut edges = Vec::new();
    for (no, line) in lines {
        let ends: Vec<usize> = line
            .split_whitespace()
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(no, "bad vertex index"))
            })
            .collect::<Result<_>>()?;
        match ends.as_slice() {
            [u, v] => edges.push((*u, *v)),
            _ => return Err(parse_err(no, "expected `u v`")),
        }
    }
    Graph::new(n, edges)
}

pub fn emit_graph(g: &Graph) -> String {
    let mut out = format!("vertices {}\n", g.num_vertices());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example1, example1_matching};

    #[test]
    fn example1_round_trip() {
        let inst = example1();
        let text = emit_instance(&inst);
        assert!(text.starts_with("kind sm\nleft m1 m2 m3\nright w1 w2 w3\n"));
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn ties_comments_and_blank_lines() {
        let text = "# header\nkind sr\n\na : (b c) d # tie first\nb : a\nc : a\nd : a\n";
        let inst = parse_instance(text).unwrap();
        let a = inst.agent("a").unwrap();
        assert_eq!(inst.prefs(a).groups().len(), 2);
        assert_eq!(parse_instance(&emit_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_instance(""), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_instance("kind xx\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_instance("kind sr\na b c\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_instance("kind sr\na : ( b\nb : a\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_instance("kind sr\na : b\nb :\n"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn matching_and_query_round_trip() {
        let inst = example1();
        let m = example1_matching(&inst, &[("m1", "w1"), ("m2", "w2"), ("m3", "w3")]);
        assert_eq!(parse_matching(&inst, &emit_matching(&inst, &m)).unwrap(), m);
        let q = AdaptQuery::new(m, [inst.pair_by_names("m1", "w2").unwrap()], [], 6);
        let text = emit_query(&inst, &q);
        assert_eq!(parse_query(&inst, &text).unwrap(), q);
        assert!(parse_matching(&inst, "m1 w1\nm1 w2\n").is_err());
        assert!(parse_matching(&inst, "m1 m2\n").is_err());
    }

    #[test]
    fn graph_round_trip() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(parse_graph(&emit_graph(&g)).unwrap(), g);
        assert!(parse_graph("vertices 2\n0 0\n").is_err());
    }
}
