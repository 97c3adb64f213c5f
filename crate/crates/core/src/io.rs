//! Text formats: edge lists, signal files, `key=value` configs and CSV
//! number formatting.
//!
//! Edge list:
//!
//! ```text
//! # comment
//! n 3
//! 0 1 1.0
//! 1 2 0.5   # trailing comments are fine
//! ```

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
    .trim()
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses an edge list without self-loops.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    parse_edge_list_with(text, false)
}

pub fn parse_edge_list_with(text: &str, allow_self_loops: bool) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match n {
            None => {
                if fields.len() != 2 || fields[0] != "n" {
                    return Err(parse_err(line_no, "expected header 'n <count>'"));
                }
                n =
                    Some(fields[1].parse().map_err(|_| {
                        parse_err(line_no, format!("bad node count '{}'", fields[1]))
                    })?);
            }
            Some(_) => {
                if fields.len() != 3 {
                    return Err(parse_err(line_no, "expected 'i j w'"));
                }
                let i: usize = fields[0]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad index '{}'", fields[0])))?;
                let j: usize = fields[1]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad index '{}'", fields[1])))?;
                let w: f64 = fields[2]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad weight '{}'", fields[2])))?;
                edges.push((i, j, w));
            }
        }
    }
    let n = n.ok_or_else(|| parse_err(0, "missing header 'n <count>'"))?;
    Graph::from_edges_with(n, &edges, allow_self_loops)
}

/// Writes the header and every edge with `i <= j`, sorted lexicographically.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.n());
    for (i, j, w) in g.edges() {
        out.push_str(&format!("{i} {j} {w}\n"));
    }
    out
}

/// One whitespace-separated signal per non-empty line.
pub fn parse_signals(text: &str, n: usize) -> Result<Vec<DVector<f64>>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| parse_err(idx + 1, format!("bad number '{tok}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != n {
            return Err(parse_err(
                idx + 1,
                format!("signal has {} entries, graph has {n} nodes", values.len()),
            ));
        }
        out.push(DVector::from_vec(values));
    }
    Ok(out)
}

/// Parses `key=value` lines; later keys override earlier ones.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(idx + 1, "expected key=value"))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(parse_err(idx + 1, "empty key"));
        }
        out.insert(key.to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_with_comments() {
        let text = "# a triangle\nn 3\n0 1 1\n1 2 1 # inline\n\n2 0 1\n";
        let g = parse_edge_list(text).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(write_edge_list(&g), "n 3\n0 1 1\n0 2 1\n1 2 1\n");
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(
            parse_edge_list("0 1 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(parse_edge_list(""), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_edge_list("n 2\n0 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_edge_list("n 2\n0 1 x\n"),
            Err(Error::Parse { .. })
        ));
        assert_eq!(parse_edge_list("n 3\n0 1 1\n"), Err(Error::IsolatedNode(2)));
    }

    #[test]
    fn signals_and_config() {
        let s = parse_signals("1 2 3\n# skip\n4 5 6\n", 3).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1][2], 6.0);
        assert!(parse_signals("1 2\n", 3).is_err());

        let c = parse_config("n = 100\n# c\nseed=7\nn=50\n").unwrap();
        assert_eq!(c["n"], "50");
        assert_eq!(c["seed"], "7");
        assert!(parse_config("novalue\n").is_err());
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, 0.0, -2.5] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
