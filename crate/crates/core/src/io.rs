//! Triple ingestion and deterministic exports (matrix CSV, tree JSON/DOT).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::diversity::ActivityReport;
use crate::error::{Error, Result};
use crate::model::TaggingEvent;
use crate::percolation::IslandTree;
use crate::projection::CorrelationMatrix;

/// Delimited text layout of a triples file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TripleFormat {
    /// Tab separated, no quoting.
    #[default]
    Tsv,
    /// Comma separated with standard quoting.
    Csv,
}

impl FromStr for TripleFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tsv" => Ok(TripleFormat::Tsv),
            "csv" => Ok(TripleFormat::Csv),
            _ => Err(format!("unknown format '{s}' (expected tsv or csv)")),
        }
    }
}

/// One attribution line: `user, item, tag`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleRecord {
    pub user: String,
    pub item: String,
    pub tag: String,
}

impl TripleRecord {
    /// One record per tag of the event.
    pub fn from_event(event: &TaggingEvent) -> impl Iterator<Item = TripleRecord> + '_ {
        event.tags.iter().map(move |tag| TripleRecord {
            user: event.user.clone(),
            item: event.item.clone(),
            tag: tag.clone(),
        })
    }

    fn fields(&self) -> [&str; 3] {
        [&self.user, &self.item, &self.tag]
    }
}

/// Events grouped from a triples file, plus the lines skipped on the way.
#[derive(Debug, Default)]
pub struct ReadOutcome {
    pub events: Vec<TaggingEvent>,
    pub warnings: Vec<Error>,
}

const HEADER: [&str; 3] = ["user", "item", "tag"];

fn reader_builder(format: TripleFormat) -> csv::ReaderBuilder {
    let mut b = csv::ReaderBuilder::new();
    b.has_headers(false).flexible(true);
    match format {
        TripleFormat::Tsv => b.delimiter(b'\t').quoting(false),
        TripleFormat::Csv => b.delimiter(b','),
    };
    b
}

pub fn read_triples(path: &Path, format: TripleFormat, strict: bool) -> Result<ReadOutcome> {
    let file = File::open(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })?;
    read_triples_from(BufReader::new(file), format, strict)
}

/// Reads triples and groups them by (user, item) in first-seen order. A
/// header line `user item tag` is skipped when present. Malformed lines are
/// warnings, or the error, in strict mode; invalid UTF-8 always aborts.
pub fn read_triples_from<R: Read>(reader: R, format: TripleFormat, strict: bool) -> Result<ReadOutcome> {
    let mut rdr = reader_builder(format).from_reader(reader);
    let mut out = ReadOutcome::default();
    let mut groups: HashMap<(String, String), usize> = HashMap::new();
    let mut record = csv::ByteRecord::new();
    let mut first = true;

    while rdr.read_byte_record(&mut record)? {
        let pos = record.position().cloned().unwrap_or_else(csv::Position::new);
        let line = pos.line();

        let mut fields = Vec::with_capacity(record.len());
        let mut offset = pos.byte();
        for raw in record.iter() {
            let text = std::str::from_utf8(raw).map_err(|e| Error::InvalidUtf8 {
                line,
                offset: offset + e.valid_up_to() as u64,
            })?;
            fields.push(text.trim());
            offset += raw.len() as u64 + 1;
        }

        if std::mem::take(&mut first) && fields == HEADER {
            continue;
        }

        let problem = if fields.len() != 3 {
            Some(format!("expected 3 fields, found {}", fields.len()))
        } else {
            HEADER
                .iter()
                .zip(&fields)
                .find(|(_, f)| f.is_empty())
                .map(|(name, _)| format!("empty {name} field"))
        };
        if let Some(message) = problem {
            let err = Error::Malformed { line, message };
            if strict {
                return Err(err);
            }
            out.warnings.push(err);
            continue;
        }

        let key = (fields[0].to_owned(), fields[1].to_owned());
        let idx = *groups.entry(key).or_insert_with(|| {
            out.events.push(TaggingEvent::new(fields[0], fields[1], Vec::<String>::new()));
            out.events.len() - 1
        });
        let tags = &mut out.events[idx].tags;
        if !tags.iter().any(|t| t == fields[2]) {
            tags.push(fields[2].to_owned());
        }
    }
    Ok(out)
}

/// Writes one line per attribution, with a header.
pub fn write_triples<W: Write>(writer: W, events: &[TaggingEvent], format: TripleFormat) -> Result<()> {
    let mut b = csv::WriterBuilder::new();
    if format == TripleFormat::Tsv {
        b.delimiter(b'\t').quote_style(csv::QuoteStyle::Never);
    }
    let mut w = b.from_writer(writer);
    w.write_record(HEADER)?;
    for record in events.iter().flat_map(TripleRecord::from_event) {
        let fields = record.fields();
        if format == TripleFormat::Tsv && fields.iter().any(|f| f.contains(['\t', '\n', '\r'])) {
            return Err(Error::InvalidConfig(format!(
                "({}, {}, {}) cannot be written as TSV",
                record.user, record.item, record.tag
            )));
        }
        w.write_record(fields)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::File {
            path: path.to_owned(),
            source,
        })
}

/// Square CSV with member names on the first row and column; values with
/// six decimals.
pub fn write_matrix_to<W: Write>(writer: W, c: &CorrelationMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![""];
    header.extend(c.names().iter().map(String::as_str));
    w.write_record(&header)?;
    let n = c.len();
    for a in 0..n {
        let mut row = Vec::with_capacity(n + 1);
        row.push(c.names()[a].clone());
        row.extend((0..n).map(|b| format!("{:.6}", c.get(a, b))));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix(c: &CorrelationMatrix, path: &Path) -> Result<()> {
    write_matrix_to(create(path)?, c)
}

/// Reads a matrix written by [`write_matrix`]: member names and row-major
/// values.
pub fn read_matrix(path: &Path) -> Result<(Vec<String>, Vec<f64>)> {
    let file = File::open(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(file);
    let mut records = rdr.records();
    let header = records
        .next()
        .transpose()?
        .ok_or_else(|| Error::Malformed {
            line: 1,
            message: "missing header row".into(),
        })?;
    let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut values = Vec::with_capacity(names.len() * names.len());
    for (row, rec) in records.enumerate() {
        let rec = rec?;
        for cell in rec.iter().skip(1) {
            values.push(cell.parse::<f64>().map_err(|e| Error::Malformed {
                line: row as u64 + 2,
                message: e.to_string(),
            })?);
        }
    }
    Ok((names, values))
}

fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// The tree as a JSON value. Object keys come out sorted.
pub fn tree_json(tree: &IslandTree, report: Option<&ActivityReport>) -> Result<Value> {
    if let Some(r) = report {
        r.check_matches(tree)?;
    }
    let names = |ids: &[usize]| -> Vec<&str> { ids.iter().map(|&m| tree.name(m)).collect() };
    let islands: Vec<Value> = tree
        .islands()
        .iter()
        .map(|island| {
            let mut obj = json!({
                "id": island.id,
                "level": island.level,
                "phi": json_number(island.phi),
                "members": names(&island.members),
                "size": island.size(),
                "parent": island.parent,
                "characteristic": tree.name(island.characteristic),
                "singleton": island.is_singleton(),
            });
            if let Some(rec) = report.map(|r| &r.records[island.id]) {
                let map = obj.as_object_mut().expect("island is an object");
                map.insert("p_sample".into(), json_number(rec.p_sample));
                map.insert("p_user".into(), json_number(rec.p_user));
                map.insert("r".into(), rec.ratio.map_or(Value::Null, json_number));
                map.insert("color".into(), Value::String(rec.color.to_string()));
            }
            obj
        })
        .collect();
    Ok(json!({
        "family": tree.family().as_str(),
        "grid": { "start": tree.grid().start(), "step": tree.grid().step() },
        "levels": tree.levels().iter().map(|&x| json_number(x)).collect::<Vec<_>>(),
        "root": {
            "members": names(tree.root_members()),
            "size": tree.root_members().len(),
        },
        "islands": islands,
    }))
}

pub fn write_tree_json_to<W: Write>(mut writer: W, tree: &IslandTree, report: Option<&ActivityReport>) -> Result<()> {
    let value = tree_json(tree, report)?;
    serde_json::to_writer_pretty(&mut writer, &value)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

pub fn write_tree_json(tree: &IslandTree, report: Option<&ActivityReport>, path: &Path) -> Result<()> {
    write_tree_json_to(create(path)?, tree, report)
}

/// Inches of node width per square root of island size.
pub const DOT_WIDTH_SCALE: f64 = 0.5;

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// GraphViz digraph with edges parent -> child. Square node area grows
/// with island size. Singletons are left out unless `include_singletons`.
pub fn tree_dot(tree: &IslandTree, report: Option<&ActivityReport>, include_singletons: bool) -> Result<String> {
    if let Some(r) = report {
        r.check_matches(tree)?;
    }
    let mut out = String::new();
    out.push_str("digraph islands {\n");
    out.push_str("  node [shape=square, fixedsize=true, fontsize=10];\n");
    let _ = writeln!(
        out,
        "  root [shape=circle, label=\"root\", tooltip=\"size={}\"];",
        tree.root_members().len()
    );
    let shown = |i: &crate::percolation::Island| include_singletons || !i.is_singleton();
    for island in tree.islands().iter().filter(|i| shown(i)) {
        let width = DOT_WIDTH_SCALE * (island.size() as f64).sqrt();
        let _ = write!(
            out,
            "  n{} [label=\"{}\", width={width:.4}, height={width:.4}, tooltip=\"phi={} size={}\"",
            island.id,
            dot_escape(tree.name(island.characteristic)),
            island.phi,
            island.size()
        );
        if let Some(rec) = report.map(|r| &r.records[island.id]) {
            let _ = write!(out, ", style=filled, fillcolor=\"{}\"", rec.color);
        }
        out.push_str("];\n");
    }
    for island in tree.islands().iter().filter(|i| shown(i)) {
        match island.parent {
            None => {
                let _ = writeln!(out, "  root -> n{};", island.id);
            }
            Some(p) => {
                let _ = writeln!(out, "  n{p} -> n{};", island.id);
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn write_tree_dot(
    tree: &IslandTree,
    report: Option<&ActivityReport>,
    include_singletons: bool,
    path: &Path,
) -> Result<()> {
    let text = tree_dot(tree, report, include_singletons)?;
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}
