//! File ingestion: graphs, turnstile streams, and real-valued datasets.
//!
//! All loaders address malformed content by line number. Blank lines are
//! ignored everywhere.
//!
//! Graph files: a header line `n m`, then exactly `m` lines `u v` with
//! 0-based endpoints. Stream files: one `index,delta` pair per line.
//! Real-valued datasets: one finite number per line.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sketch::StreamUpdate;

fn parse_at<T>(path: &Path, line: usize, token: &str, what: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    token.parse().map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line,
        msg: format!("bad {what} {token:?}: {e}"),
    })
}

fn split_pair<'a>(
    path: &Path,
    line: usize,
    text: &'a str,
    sep: Option<char>,
    expected: &str,
) -> Result<(&'a str, &'a str)> {
    let mut it: Box<dyn Iterator<Item = &str>> = match sep {
        Some(c) => Box::new(text.split(c).map(str::trim)),
        None => Box::new(text.split_whitespace()),
    };
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => Ok((a, b)),
        _ => Err(Error::Parse {
            path: path.display().to_string(),
            line,
            msg: format!("expected {expected}, got {text:?}"),
        }),
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn significant_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Loads an undirected graph: header `n m`, then `m` edge lines `u v`.
/// Self loops, duplicate edges, out-of-range endpoints, and an edge count
/// that disagrees with the header are all rejected with line numbers.
pub fn load_graph(path: &Path) -> Result<Graph> {
    let content = read_file(path)?;
    let mut lines = significant_lines(&content);
    let (header_no, header) = lines.next().ok_or_else(|| Error::Parse {
        path: path.display().to_string(),
        line: 1,
        msg: "empty graph file; expected a header line `n m`".into(),
    })?;
    let (n_tok, m_tok) = split_pair(path, header_no, header, None, "header `n m`")?;
    let n: usize = parse_at(path, header_no, n_tok, "vertex count")?;
    let m: u64 = parse_at(path, header_no, m_tok, "edge count")?;

    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(m as usize);
    let mut seen = std::collections::HashSet::with_capacity(m as usize);
    for (line_no, line) in lines {
        if edges.len() as u64 == m {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: line_no,
                msg: format!("more than the declared {m} edges"),
            });
        }
        let (u_tok, v_tok) = split_pair(path, line_no, line, None, "an edge `u v`")?;
        let u: u32 = parse_at(path, line_no, u_tok, "vertex id")?;
        let v: u32 = parse_at(path, line_no, v_tok, "vertex id")?;
        let err = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line: line_no,
            msg,
        };
        if u as usize >= n || v as usize >= n {
            return Err(err(format!("edge ({u}, {v}) has an endpoint outside 0..{n}")));
        }
        if u == v {
            return Err(err(format!("self loop at vertex {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(err(format!("duplicate edge ({u}, {v})")));
        }
        edges.push((u, v));
    }
    if edges.len() as u64 != m {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: header_no,
            msg: format!("header declares {m} edges but the file has {}", edges.len()),
        });
    }
    Graph::from_edges(n, &edges)
}

/// Loads a turnstile stream: one `index,delta` update per line.
pub fn load_stream(path: &Path) -> Result<Vec<StreamUpdate>> {
    let content = read_file(path)?;
    let mut updates = Vec::new();
    for (line_no, line) in significant_lines(&content) {
        let (i_tok, d_tok) = split_pair(path, line_no, line, Some(','), "an update `index,delta`")?;
        let index: u64 = parse_at(path, line_no, i_tok, "index")?;
        let delta: f64 = parse_at(path, line_no, d_tok, "delta")?;
        if !delta.is_finite() {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: line_no,
                msg: format!("delta must be finite, got {delta}"),
            });
        }
        updates.push(StreamUpdate { index, delta });
    }
    Ok(updates)
}

/// Loads a real-valued dataset: one finite number per line.
pub fn load_reals(path: &Path) -> Result<Vec<f64>> {
    let content = read_file(path)?;
    let mut values = Vec::new();
    for (line_no, line) in significant_lines(&content) {
        let x: f64 = parse_at(path, line_no, line, "value")?;
        if !x.is_finite() {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: line_no,
                msg: format!("values must be finite, got {x}"),
            });
        }
        values.push(x);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn parse_line(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn loads_a_two_vertex_graph() {
        let f = file("2 1\n0 1\n");
        let g = load_graph(f.path()).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.m(), 1);
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    fn self_loop_is_rejected_with_its_line() {
        let f = file("3 2\n0 1\n2 2\n");
        assert_eq!(parse_line(load_graph(f.path()).unwrap_err()), 3);
    }

    #[test]
    fn duplicate_edge_is_rejected_with_its_line() {
        let f = file("3 2\n0 1\n1 0\n");
        assert_eq!(parse_line(load_graph(f.path()).unwrap_err()), 3);
    }

    #[test]
    fn out_of_range_endpoint_is_rejected() {
        let f = file("2 1\n0 5\n");
        assert_eq!(parse_line(load_graph(f.path()).unwrap_err()), 2);
    }

    #[test]
    fn edge_count_mismatches_are_rejected_both_ways() {
        let f = file("3 2\n0 1\n");
        assert_eq!(parse_line(load_graph(f.path()).unwrap_err()), 1);
        let f = file("3 1\n0 1\n1 2\n");
        assert_eq!(parse_line(load_graph(f.path()).unwrap_err()), 3);
    }

    #[test]
    fn garbage_tokens_are_rejected() {
        let f = file("x 1\n0 1\n");
        assert_eq!(parse_line(load_graph(f.path()).unwrap_err()), 1);
        let f = file("2 1\n0 1 2\n");
        assert_eq!(parse_line(load_graph(f.path()).unwrap_err()), 2);
    }

    #[test]
    fn blank_lines_are_ignored() {
        let f = file("\n2 1\n\n0 1\n\n");
        assert!(load_graph(f.path()).is_ok());
    }

    #[test]
    fn loads_a_cancelling_stream() {
        let f = file("0,3\n0,-3\n");
        let s = load_stream(f.path()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0], StreamUpdate { index: 0, delta: 3.0 });
        assert_eq!(s[1].delta, -3.0);
    }

    #[test]
    fn stream_rejects_bad_lines() {
        let f = file("0,1\nbroken\n");
        assert_eq!(parse_line(load_stream(f.path()).unwrap_err()), 2);
        let f = file("0,inf\n");
        assert_eq!(parse_line(load_stream(f.path()).unwrap_err()), 1);
        let f = file("-1,2\n");
        assert_eq!(parse_line(load_stream(f.path()).unwrap_err()), 1);
    }

    #[test]
    fn loads_reals_and_rejects_non_finite() {
        let f = file("1.5\n-2\n3e-4\n");
        assert_eq!(load_reals(f.path()).unwrap(), vec![1.5, -2.0, 3e-4]);
        let f = file("1.5\nnan\n");
        assert_eq!(parse_line(load_reals(f.path()).unwrap_err()), 2);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_graph(Path::new("/nonexistent/graph")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
