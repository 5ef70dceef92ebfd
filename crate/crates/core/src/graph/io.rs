use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use super::Graph;
use crate::error::{Error, Result};

const EDGE_HEADER: [&str; 2] = ["node_a", "node_b"];
const ROUND_HEADER: [&str; 3] = ["round", "node_a", "node_b"];

/// Dense label-to-index map; indices are assigned in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct LabelIndex {
    index: HashMap<String, usize>,
    labels: Vec<String>,
}

impl LabelIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pre-registers labels `"0"`, `"1"`, ... so numeric labels map to
    /// themselves and isolated vertices are kept.
    pub fn with_numeric(n: usize) -> Self {
        let mut idx = Self::new();
        for i in 0..n {
            idx.intern(&i.to_string());
        }
        idx
    }

    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.index.insert(label.to_owned(), i);
        self.labels.push(label.to_owned());
        i
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
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
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

/// Reads `node_a,node_b` rows into raw index pairs using a shared label map.
fn read_pairs<R: Read>(source: R, labels: &mut LabelIndex) -> Result<Vec<(usize, usize)>> {
    let mut rdr = reader(source);
    check_header(&mut rdr, &EDGE_HEADER)?;
    let mut pairs = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record_line(&record);
        let (a, b) = match (record.len(), record.get(0), record.get(1)) {
            (2, Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => (a, b),
            _ => {
                return Err(Error::Parse {
                    line,
                    message: "expected two non-empty fields `node_a,node_b`".into(),
                })
            }
        };
        if a == b {
            return Err(Error::Validation(format!("self-edge `{a}` on line {line}")));
        }
        pairs.push((labels.intern(a), labels.intern(b)));
    }
    Ok(pairs)
}

/// Loads one edge-list CSV. Vertices are the labels that appear, indexed in
/// first-seen order.
pub fn load_edge_list<R: Read>(source: R) -> Result<Graph> {
    let mut labels = LabelIndex::new();
    let pairs = read_pairs(source, &mut labels)?;
    Graph::from_edges(labels.len(), pairs)
}

/// Loads several edge lists over one shared label map, so the same label is
/// the same vertex in every returned graph. All graphs get the full vertex set.
pub fn load_edge_lists<R: Read>(
    sources: Vec<R>,
    mut labels: LabelIndex,
) -> Result<(Vec<Graph>, LabelIndex)> {
    let mut all_pairs = Vec::with_capacity(sources.len());
    for source in sources {
        all_pairs.push(read_pairs(source, &mut labels)?);
    }
    let n = labels.len();
    let graphs = all_pairs
        .into_iter()
        .map(|pairs| Graph::from_edges(n, pairs))
        .collect::<Result<Vec<_>>>()?;
    Ok((graphs, labels))
}

/// Writes `node_a,node_b` rows in canonical edge order. Without labels the
/// vertex indices are written.
pub fn write_edge_list<W: Write>(graph: &Graph, labels: Option<&LabelIndex>, sink: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(EDGE_HEADER)?;
    for (i, j) in graph.edges() {
        match labels {
            Some(l) => wtr.write_record([&l.labels()[i], &l.labels()[j]])?,
            None => wtr.write_record([i.to_string(), j.to_string()])?,
        }
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Contact data collected over several rounds on one label universe.
#[derive(Debug, Clone, Default)]
pub struct RoundedContactData {
    /// `(round id, canonical deduplicated pairs)`, ordered by round id.
    pub rounds: Vec<(u64, Vec<(usize, usize)>)>,
    pub labels: LabelIndex,
}

impl RoundedContactData {
    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    /// Round `k` as a graph on the full vertex set.
    pub fn round_graph(&self, k: usize) -> Graph {
        Graph::from_canonical_pairs(self.n_vertices(), &self.rounds[k].1)
    }
}

/// Reads a `round,node_a,node_b` CSV.
pub fn load_rounds<R: Read>(source: R) -> Result<RoundedContactData> {
    let mut rdr = reader(source);
    check_header(&mut rdr, &ROUND_HEADER)?;
    let mut labels = LabelIndex::new();
    let mut rounds: BTreeMap<u64, Vec<(usize, usize)>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record_line(&record);
        if record.len() != 3 || record.iter().any(str::is_empty) {
            return Err(Error::Parse {
                line,
                message: "expected three non-empty fields `round,node_a,node_b`".into(),
            });
        }
        let round: u64 = match record[0].parse() {
            Ok(r) if r >= 1 => r,
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("round must be a positive integer, found `{}`", &record[0]),
                })
            }
        };
        let (a, b) = (&record[1], &record[2]);
        if a == b {
            return Err(Error::Validation(format!("self-edge `{a}` on line {line}")));
        }
        let (i, j) = (labels.intern(a), labels.intern(b));
        rounds.entry(round).or_default().push((i.min(j), i.max(j)));
    }
    let rounds = rounds
        .into_iter()
        .map(|(r, mut pairs)| {
            pairs.sort_unstable();
            pairs.dedup();
            (r, pairs)
        })
        .collect();
    Ok(RoundedContactData { rounds, labels })
}

/// Keeps a pair as a true edge iff it occurs in at least `min_count` rounds.
pub fn build_true_graph_from_rounds(data: &RoundedContactData, min_count: usize) -> Result<Graph> {
    if min_count == 0 {
        return Err(Error::param("min_count must be at least 1"));
    }
    if data.rounds.is_empty() {
        return Err(Error::param("contact data has no rounds"));
    }
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for (_, pairs) in &data.rounds {
        for &pair in pairs {
            *counts.entry(pair).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(usize, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(pair, _)| pair)
        .collect();
    kept.sort_unstable();
    Ok(Graph::from_canonical_pairs(data.n_vertices(), &kept))
}
