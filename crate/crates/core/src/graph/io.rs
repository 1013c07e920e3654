//! Plain-text graph format.
//!
//! ```text
//! 5
//! 0 1
//! 1 2
//! ```
//!
//! First line is the vertex count; every following non-blank line is one
//! proper edge `u v`, 0-indexed. Self-loops are never listed.

use std::fmt::Write as _;
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

impl Graph {
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.vertex_count());
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").expect("writing to a String");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Graph> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (first, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing vertex count".into(),
        })?;
        let n: usize = header.trim().parse().map_err(|_| Error::Parse {
            line: first + 1,
            message: format!("invalid vertex count {:?}", header.trim()),
        })?;
        let mut g = Graph::new(n).map_err(|e| Error::Parse {
            line: first + 1,
            message: e.to_string(),
        })?;
        for (idx, line) in lines {
            let line_no = idx + 1;
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [a, b] = fields[..] else {
                return Err(parse_err(format!("expected \"u v\", got {:?}", line.trim())));
            };
            let u: usize = a.parse().map_err(|_| parse_err(format!("invalid vertex {a:?}")))?;
            let v: usize = b.parse().map_err(|_| parse_err(format!("invalid vertex {b:?}")))?;
            for w in [u, v] {
                if w >= n {
                    return Err(parse_err(
                        Error::VertexOutOfRange {
                            vertex: w,
                            vertex_count: n,
                        }
                        .to_string(),
                    ));
                }
            }
            if u == v {
                return Err(parse_err(Error::ExplicitSelfLoop(u).to_string()));
            }
            if !g.add_edge(u, v)? {
                return Err(parse_err(Error::DuplicateEdge(u, v).to_string()));
            }
        }
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Graph> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Graph::from_text(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
