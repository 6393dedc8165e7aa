use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};

/// A multigraph on vertices `0..n` (written 1-indexed in the text format).
///
/// Edges keep the order in which they were produced, and each pair is stored
/// with its smaller endpoint first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Multigraph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl Multigraph {
    pub fn empty(n: usize) -> Self {
        Multigraph {
            n,
            edges: Vec::new(),
        }
    }

    /// Builds a multigraph from 0-indexed pairs, rejecting loops and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Multigraph::empty(n);
        for (u, v) in edges {
            g.push_edge(u, v)?;
        }
        Ok(g)
    }

    pub(crate) fn push_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u == v {
            return Err(Error::invalid(format!("self-loop at vertex {}", u + 1)));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::invalid(format!(
                "edge {{{}, {}}} outside vertex range 1..={}",
                u + 1,
                v + 1,
                self.n
            )));
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.edges.push((a as u32, b as u32));
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    /// Distinct pairs with their multiplicities, sorted.
    pub fn pair_multiplicities(&self) -> Vec<((usize, usize), u64)> {
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        let mut out: Vec<((usize, usize), u64)> = Vec::new();
        for (u, v) in sorted {
            let key = (u as usize, v as usize);
            match out.last_mut() {
                Some((last, c)) if *last == key => *c += 1,
                _ => out.push((key, 1)),
            }
        }
        out
    }

    pub fn is_simple(&self) -> bool {
        self.pair_multiplicities().iter().all(|&(_, c)| c == 1)
    }

    /// Neighbour lists of the underlying simple graph, sorted.
    pub fn simple_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for ((u, v), _) in self.pair_multiplicities() {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Serializes to the text format: header `n m [k]`, then one 1-indexed
    /// `u v` line per edge.
    pub fn to_text(&self, k: Option<usize>) -> String {
        let mut s = String::new();
        match k {
            Some(k) => writeln!(s, "{} {} {}", self.n, self.m(), k),
            None => writeln!(s, "{} {}", self.n, self.m()),
        }
        .unwrap();
        for (u, v) in self.edges() {
            writeln!(s, "{} {}", u + 1, v + 1).unwrap();
        }
        s
    }

    /// Parses the text format. Blank lines and lines starting with `#` are
    /// ignored. Returns the graph and the optional colour count from the header.
    pub fn parse_text(text: &str) -> Result<(Self, Option<usize>)> {
        Self::read_text(text.as_bytes())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<(Self, Option<usize>)> {
        let mut header: Option<(usize, usize, Option<usize>)> = None;
        let mut g = Multigraph::empty(0);
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let fields = parse_fields(t, lineno)?;
            match header {
                None => {
                    let (n, m, k) = match fields[..] {
                        [n, m] => (n, m, None),
                        [n, m, k] => (n, m, Some(k)),
                        _ => return Err(parse_err(lineno, "header must be `n m` or `n m k`")),
                    };
                    header = Some((n, m, k));
                    g = Multigraph {
                        n,
                        edges: Vec::with_capacity(m),
                    };
                }
                Some(_) => {
                    let [u, v] = fields[..] else {
                        return Err(parse_err(lineno, "edge line must be `u v`"));
                    };
                    if u == 0 || v == 0 {
                        return Err(parse_err(lineno, "vertices are 1-indexed"));
                    }
                    g.push_edge(u - 1, v - 1)
                        .map_err(|e| parse_err(lineno, &e.to_string()))?;
                }
            }
        }
        let (_, m, k) = header.ok_or_else(|| parse_err(0, "missing header"))?;
        if g.m() != m {
            return Err(parse_err(
                0,
                &format!("header declares {m} edges, found {}", g.m()),
            ));
        }
        Ok((g, k))
    }
}

fn parse_fields(t: &str, lineno: usize) -> Result<Vec<usize>> {
    t.split_whitespace()
        .map(|f| {
            f.parse::<usize>()
                .map_err(|_| parse_err(lineno, &format!("not a non-negative integer: `{f}`")))
        })
        .collect()
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}
