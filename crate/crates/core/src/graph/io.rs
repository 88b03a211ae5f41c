//! Edge-list text format.
//!
//! One edge per line as `src dst [timestamp]`, tokens separated by
//! whitespace or commas. Lines starting with `#` and blank lines are skipped.
//! Labels are arbitrary strings mapped to dense ids in first-seen order.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{Edge, Graph, NodeId};
use crate::{Error, Result};

/// Counters reported while loading an edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct LoadReport {
    pub records: usize,
    pub duplicates: usize,
    pub self_loops: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub report: LoadReport,
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

pub fn load_edge_list<R: BufRead>(reader: R) -> Result<LoadedGraph> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, NodeId> = HashMap::new();
    let mut edges = Vec::new();
    let mut records = 0;
    let mut self_loops = 0;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = tokens(trimmed).collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected 2 or 3 tokens, found {}", fields.len()),
            });
        }
        let timestamp = match fields.get(2) {
            Some(t) => Some(t.parse::<i64>().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("timestamp {t:?} is not an integer"),
            })?),
            None => None,
        };
        records += 1;
        if fields[0] == fields[1] {
            self_loops += 1;
            continue;
        }
        let mut intern = |label: &str| -> NodeId {
            if let Some(&id) = index.get(label) {
                return id;
            }
            let id = labels.len();
            labels.push(label.to_string());
            index.insert(label.to_string(), id);
            id
        };
        let u = intern(fields[0]);
        let v = intern(fields[1]);
        edges.push(Edge::new(u, v, timestamp));
    }

    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let (graph, duplicates, _) = Graph::with_labels(labels, edges);
    Ok(LoadedGraph {
        graph,
        report: LoadReport {
            records,
            duplicates,
            self_loops,
        },
    })
}

/// Reads a `label,id` CSV as written by [`Graph::write_label_map`].
pub fn read_label_map<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut pairs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 && line.trim() == "label,id" {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (label, id) = line.rsplit_once(',').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            message: "expected label,id".into(),
        })?;
        let id: usize = id.trim().parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("id {id:?} is not an integer"),
        })?;
        pairs.push((id, label.to_string()));
    }
    pairs.sort();
    for (expected, (id, _)) in pairs.iter().enumerate() {
        if *id != expected {
            return Err(Error::Schema(format!(
                "label map ids are not dense at {expected}"
            )));
        }
    }
    Ok(pairs.into_iter().map(|(_, l)| l).collect())
}

impl Graph {
    /// Canonical export: sorted dense-id pairs, timestamp appended when
    /// present, LF line endings.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for e in self.edges() {
            match e.timestamp {
                Some(t) => writeln!(out, "{} {} {}", e.u, e.v, t)?,
                None => writeln!(out, "{} {}", e.u, e.v)?,
            }
        }
        Ok(())
    }

    pub fn write_label_map<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "label,id")?;
        for (id, label) in self.labels().iter().enumerate() {
            writeln!(out, "{label},{id}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<LoadedGraph> {
        load_edge_list(text.as_bytes())
    }

    #[test]
    fn triangle() {
        let g = load("a b\nb c\nc a\n").unwrap().graph;
        assert_eq!((g.node_count(), g.edge_count()), (3, 3));
        assert!(g.degrees().iter().all(|&d| d == 2));
        assert_eq!(g.labels(), &["a", "b", "c"]);
    }

    #[test]
    fn duplicates_are_collapsed() {
        let loaded = load("a b\na b\nb a\n").unwrap();
        assert_eq!(loaded.graph.node_count(), 2);
        assert_eq!(loaded.graph.edge_count(), 1);
        assert_eq!(loaded.report.duplicates, 2);
    }

    #[test]
    fn comments_commas_and_timestamps() {
        let loaded = load("# header\nx,y,10\n\ny z 5\nz z\n").unwrap();
        assert_eq!(loaded.report.self_loops, 1);
        assert_eq!(loaded.report.records, 3);
        assert!(loaded.graph.has_timestamps());
    }

    #[test]
    fn malformed_records_report_line_numbers() {
        match load("a b\nc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match load("# c\na b x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            load("a b c d\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(load(""), Err(Error::EmptyGraph)));
        assert!(matches!(load("# only\n\n"), Err(Error::EmptyGraph)));
    }

    #[test]
    fn label_map_round_trip() {
        let g = load("alpha beta\nbeta gamma\n").unwrap().graph;
        let mut buf = Vec::new();
        g.write_label_map(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "label,id\nalpha,0\nbeta,1\ngamma,2\n"
        );
        assert_eq!(read_label_map(buf.as_slice()).unwrap(), g.labels());
    }
}
