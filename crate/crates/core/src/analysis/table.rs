use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::atc::{atc_all, EmbeddingMatrix, Similarity};
use crate::concentration::{subgraph_density, tc_all_with_index, HopIndex, TcParams, TcResult};
use crate::eval::{MetricReport, METRIC_NAMES};
use crate::graph::{EdgeSplit, SplitType};
use crate::{Error, Result, Scalar};

/// Where a column came from: producing module, its parameters and seed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub module: String,
    pub params: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(module: &str) -> Self {
        Self {
            module: module.to_string(),
            ..Self::default()
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub values: Vec<Option<f64>>,
    pub provenance: Provenance,
}

/// `<prefix>_<split>`, e.g. `tc_te`, `degree_tr`.
pub fn column_name(prefix: &str, t: SplitType) -> String {
    format!("{prefix}_{}", t.short_name().to_ascii_lowercase())
}

/// `<metric>@<K>`, e.g. `hits@10`.
pub fn metric_column(metric: &str, k: usize) -> String {
    format!("{metric}@{k}")
}

/// Aligned per-node columns; `None` marks an undefined entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeTable {
    labels: Vec<String>,
    columns: IndexMap<String, Column>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    name: String,
    #[serde(flatten)]
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    rows: usize,
    columns: Vec<ManifestEntry>,
}

impl NodeTable {
    pub fn new(labels: Vec<String>) -> Self {
        Self {
            labels,
            columns: IndexMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    /// Adds or replaces a column.
    pub fn insert(
        &mut self,
        name: &str,
        values: Vec<Option<f64>>,
        provenance: Provenance,
    ) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::Schema(format!(
                "column {name:?} has {} rows, table has {}",
                values.len(),
                self.len()
            )));
        }
        self.columns
            .insert(name.to_string(), Column { values, provenance });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Column> {
        self.columns.get(name)
    }

    pub fn column(&self, name: &str) -> Result<&[Option<f64>]> {
        self.columns
            .get(name)
            .map(|c| c.values.as_slice())
            .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))
    }

    /// `tc_<t>` for every split type, `degree_<t>`, and `density`.
    pub fn add_topology(&mut self, split: &EdgeSplit, params: TcParams) -> Result<()> {
        self.check_rows(split.node_count())?;
        let index = HopIndex::build(split, params.k)?;
        for t in SplitType::ALL {
            let results = tc_all_with_index::<f64>(split, &index, t, params)?;
            self.add_concentration(&results)?;
        }
        self.add_degrees(split)?;
        self.add_density(split)
    }

    /// `tc_<t>` from precomputed results of a single split type.
    pub fn add_concentration<T: Scalar>(&mut self, results: &[TcResult<T>]) -> Result<()> {
        let Some(first) = results.first() else {
            return self.check_rows(0);
        };
        let values = results
            .iter()
            .map(|r| r.value.map(Scalar::as_f64))
            .collect();
        let prov = Provenance::new("concentration")
            .param("split", first.split_type.short_name())
            .param("k", first.k)
            .param("beta", first.beta)
            .param("norm", first.norm);
        self.insert(&column_name("tc", first.split_type), values, prov)
    }

    /// `degree_<t>` for every split type.
    pub fn add_degrees(&mut self, split: &EdgeSplit) -> Result<()> {
        self.check_rows(split.node_count())?;
        for t in SplitType::ALL {
            let values = (0..split.node_count())
                .map(|i| Some(split.neighbors(i, t).len() as f64))
                .collect();
            self.insert(
                &column_name("degree", t),
                values,
                Provenance::new("graph").param("split", t.short_name()),
            )?;
        }
        Ok(())
    }

    /// `density` of each node's one-hop training subgraph.
    pub fn add_density(&mut self, split: &EdgeSplit) -> Result<()> {
        self.check_rows(split.node_count())?;
        let density = (0..split.node_count())
            .map(|i| subgraph_density::<f64>(split, i).map(Some))
            .collect::<Result<_>>()?;
        self.insert(
            "density",
            density,
            Provenance::new("concentration").param("split", "Tr"),
        )
    }

    /// `atc_<t>` for every split type.
    pub fn add_atc<T: Scalar>(
        &mut self,
        diffused: &EmbeddingMatrix<T>,
        split: &EdgeSplit,
        phi: Similarity,
    ) -> Result<()> {
        self.check_rows(split.node_count())?;
        for t in SplitType::ALL {
            let values = atc_all(diffused, split, t, phi)?
                .into_iter()
                .map(|v| v.map(Scalar::as_f64))
                .collect();
            let prov = Provenance::new("atc")
                .param("split", t.short_name())
                .param("phi", phi)
                .param("dim", diffused.dim())
                .seed(diffused.seed);
            self.insert(&column_name("atc", t), values, prov)?;
        }
        Ok(())
    }

    /// `<metric>@<K>` for every metric and cutoff, plus `mrr_full`. Nodes
    /// without ground truth are missing.
    pub fn add_metrics<T: Scalar>(
        &mut self,
        report: &MetricReport<T>,
        provenance: Provenance,
    ) -> Result<()> {
        let n = self.len();
        for &k in &report.ks {
            let mut cols = vec![vec![None; n]; METRIC_NAMES.len()];
            for row in report.rows.iter().filter(|r| r.k == k) {
                for (col, v) in cols.iter_mut().zip(row.metrics.as_array()) {
                    *col.get_mut(row.node).ok_or_else(|| {
                        Error::Schema(format!("metric row for node {} beyond table", row.node))
                    })? = Some(v.as_f64());
                }
            }
            for (name, values) in METRIC_NAMES.iter().zip(cols) {
                self.insert(
                    &metric_column(name, k),
                    values,
                    provenance.clone().param("k", k),
                )?;
            }
        }
        let mut full = vec![None; n];
        for &(node, v) in &report.full_mrr {
            full[node] = Some(v.as_f64());
        }
        self.insert("mrr_full", full, provenance)
    }

    fn check_rows(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::Schema(format!(
                "{n} nodes for a table of {} rows",
                self.len()
            )));
        }
        Ok(())
    }

    /// `node_label,<columns...>`; missing entries are empty fields.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "node_label")?;
        for name in self.columns.keys() {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for (i, label) in self.labels.iter().enumerate() {
            write!(out, "{label}")?;
            for col in self.columns.values() {
                match col.values[i] {
                    Some(v) => write!(out, ",{v}")?,
                    None => write!(out, ",")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn write_manifest<W: Write>(&self, out: W) -> Result<()> {
        let manifest = Manifest {
            rows: self.len(),
            columns: self
                .columns
                .iter()
                .map(|(name, c)| ManifestEntry {
                    name: name.clone(),
                    provenance: c.provenance.clone(),
                })
                .collect(),
        };
        serde_json::to_writer_pretty(out, &manifest)?;
        Ok(())
    }

    /// Parses the CSV written by [`Self::write_csv`]. Provenance is
    /// restored from a manifest when one is given.
    pub fn read_csv<R: BufRead>(input: R, manifest: Option<&str>) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => return Err(Error::Schema("empty table".into())),
        };
        let names: Vec<String> = header.trim_end().split(',').map(str::to_string).collect();
        if names.first().map(String::as_str) != Some("node_label") {
            return Err(Error::Schema("first column must be node_label".into()));
        }
        let names = &names[1..];
        let mut labels = Vec::new();
        let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
        for (idx, line) in lines {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != names.len() + 1 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {} fields, got {}", names.len() + 1, fields.len()),
                });
            }
            labels.push(fields[0].to_string());
            for (col, f) in cols.iter_mut().zip(&fields[1..]) {
                col.push(if f.is_empty() {
                    None
                } else {
                    Some(f.parse().map_err(|_| Error::Parse {
                        line: idx + 1,
                        message: format!("not a number: {f:?}"),
                    })?)
                });
            }
        }
        let mut provenance: BTreeMap<String, Provenance> = BTreeMap::new();
        if let Some(text) = manifest {
            let m: Manifest = serde_json::from_str(text)?;
            provenance.extend(m.columns.into_iter().map(|e| (e.name, e.provenance)));
        }
        let mut table = NodeTable::new(labels);
        for (name, values) in names.iter().zip(cols) {
            let prov = provenance
                .remove(name)
                .unwrap_or_else(|| Provenance::new("input"));
            table.insert(name, values, prov)?;
        }
        Ok(table)
    }
}
