//! File formats: model and pattern documents, record files, manifests,
//! CSV and rendered exports, and real-world log input.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use logsynth_core::dataset::{Manifest, RawLogRecord};
use logsynth_core::pattern::{FailurePattern, PatternError, PatternKind};
use logsynth_core::{
    BehaviourModel, Dataset, Label, LabeledSequence, ModelDocument, ModelError, SymbolId, TemplateCatalog,
};
use serde::{Deserialize, Serialize};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const MODEL_FILE: &str = "model.json";
pub const PATTERNS_FILE: &str = "patterns.json";
pub const OVERSAMPLED_FILE: &str = "train_oversampled.jsonl";
pub const CSV_FILE: &str = "records.csv";
pub const RENDERED_FILE: &str = "records.log";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {message}", .path.display())]
    Syntax {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", .path.display())]
    Model { path: PathBuf, source: Box<ModelError> },
    #[error("{}: pattern `{id}`: {source}", .path.display())]
    Pattern {
        path: PathBuf,
        id: String,
        source: PatternError,
    },
    #[error("{}: pattern `{id}` is for model `{found}`, expected `{expected}`", .path.display())]
    ModelMismatch {
        path: PathBuf,
        id: String,
        found: String,
        expected: String,
    },
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn json_err(path: &Path, e: serde_json::Error) -> FormatError {
    FormatError::Syntax {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// The model name used to pair patterns with models: the file stem.
pub fn model_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub struct LoadedModel {
    pub name: String,
    pub model: BehaviourModel,
    pub catalog: TemplateCatalog,
}

pub fn load_model(path: &Path) -> Result<LoadedModel, FormatError> {
    load_model_named(path, model_name(path))
}

pub fn load_model_named(path: &Path, name: String) -> Result<LoadedModel, FormatError> {
    let doc: ModelDocument = serde_json::from_str(&read_text(path)?).map_err(|e| json_err(path, e))?;
    let (model, catalog) = doc.into_model().map_err(|source| FormatError::Model {
        path: path.to_path_buf(),
        source: Box::new(source),
    })?;
    Ok(LoadedModel { name, model, catalog })
}

/// One entry of a pattern file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDocument {
    pub id: String,
    pub model: String,
    #[serde(rename = "type")]
    pub kind: PatternKind,
    pub expr: String,
}

impl PatternDocument {
    pub fn compile(&self, model: &BehaviourModel) -> Result<FailurePattern, PatternError> {
        FailurePattern::compile(&self.id, &self.model, &self.expr, model.symbol_names(), Some(self.kind))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PatternFile {
    One(PatternDocument),
    Many(Vec<PatternDocument>),
}

/// Reads a pattern file holding one pattern object or an array of them.
pub fn read_pattern_documents(path: &Path) -> Result<Vec<PatternDocument>, FormatError> {
    let text = read_text(path)?;
    // Parse strictly first so that errors carry a line number.
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| json_err(path, e))?;
    let file = if value.is_array() {
        serde_json::from_str::<Vec<PatternDocument>>(&text).map(PatternFile::Many)
    } else {
        serde_json::from_str::<PatternDocument>(&text).map(PatternFile::One)
    };
    Ok(match file.map_err(|e| json_err(path, e))? {
        PatternFile::One(doc) => vec![doc],
        PatternFile::Many(docs) => docs,
    })
}

/// Reads and compiles every pattern of a file against `model`, requiring
/// each to name `model_name`.
pub fn load_patterns(
    path: &Path,
    model: &BehaviourModel,
    model_name: &str,
) -> Result<Vec<FailurePattern>, FormatError> {
    read_pattern_documents(path)?
        .iter()
        .map(|doc| {
            if doc.model != model_name {
                return Err(FormatError::ModelMismatch {
                    path: path.to_path_buf(),
                    id: doc.id.clone(),
                    found: doc.model.clone(),
                    expected: model_name.to_string(),
                });
            }
            doc.compile(model).map_err(|source| FormatError::Pattern {
                path: path.to_path_buf(),
                id: doc.id.clone(),
                source,
            })
        })
        .collect()
}

pub fn pattern_documents(patterns: &[FailurePattern]) -> Vec<PatternDocument> {
    patterns
        .iter()
        .map(|p| PatternDocument {
            id: p.id.clone(),
            model: p.model.clone(),
            kind: p.kind(),
            expr: p.expr.clone(),
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine<'a> {
    #[serde(borrow)]
    seq: Vec<Cow<'a, str>>,
    label: Label,
    pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<usize>,
}

/// Writes records as JSON lines with template IDs spelled out.
pub fn write_records<W: Write>(mut w: W, records: &[LabeledSequence], symbols: &[String]) -> io::Result<()> {
    for r in records {
        let line = RecordLine {
            seq: r
                .templates
                .iter()
                .map(|s| Cow::Borrowed(symbols[s.index()].as_str()))
                .collect(),
            label: r.label,
            pattern: r.pattern_id.clone(),
            origin: r.origin,
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Maps template IDs to symbols, either from a fixed table or by interning
/// new IDs as they appear.
pub struct SymbolTable {
    names: Vec<String>,
    index: HashMap<String, SymbolId>,
    open: bool,
}

impl SymbolTable {
    pub fn fixed(names: &[String]) -> Self {
        Self {
            names: names.to_vec(),
            index: names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.clone(), SymbolId(i as u32)))
                .collect(),
            open: false,
        }
    }

    pub fn open() -> Self {
        Self {
            names: Vec::new(),
            index: HashMap::new(),
            open: true,
        }
    }

    fn lookup(&mut self, name: &str) -> Option<SymbolId> {
        if let Some(&id) = self.index.get(name) {
            return Some(id);
        }
        if !self.open {
            return None;
        }
        let id = SymbolId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Some(id)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Reads a JSON-lines record file. Record indices are line positions.
pub fn read_records(path: &Path, symbols: &mut SymbolTable) -> Result<Vec<LabeledSequence>, FormatError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut records = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let syntax = |message: String| FormatError::Syntax {
            path: path.to_path_buf(),
            line: n + 1,
            message,
        };
        let parsed: RecordLine = serde_json::from_str(&line).map_err(|e| syntax(e.to_string()))?;
        let templates = parsed
            .seq
            .iter()
            .map(|t| {
                symbols
                    .lookup(t)
                    .ok_or_else(|| syntax(format!("unknown template `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        records.push(LabeledSequence {
            templates,
            label: parsed.label,
            pattern_id: parsed.pattern,
            index: records.len(),
            origin: parsed.origin,
        });
    }
    Ok(records)
}

/// CSV export: `index,label,pattern,sequence` with space-joined template IDs.
pub fn write_records_csv<W: Write>(w: W, records: &[LabeledSequence], symbols: &[String]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "label", "pattern", "sequence"])?;
    for r in records {
        let seq: Vec<&str> = r.templates.iter().map(|s| symbols[s.index()].as_str()).collect();
        out.write_record([
            r.index.to_string().as_str(),
            r.label.as_str(),
            r.pattern_id.as_deref().unwrap_or(""),
            seq.join(" ").as_str(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Rendered export: one catalog text line per template, a blank line after
/// each sequence.
pub fn write_rendered<W: Write>(
    mut w: W,
    records: &[LabeledSequence],
    symbols: &[String],
    catalog: &TemplateCatalog,
) -> io::Result<()> {
    for r in records {
        for s in &r.templates {
            let id = &symbols[s.index()];
            writeln!(w, "{}", catalog.get(id).unwrap_or(id))?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>, FormatError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct WriteOptions {
    pub csv: bool,
    pub rendered: bool,
}

/// Everything a dataset directory is written from.
pub struct DatasetFiles<'a> {
    pub dataset: &'a mut Dataset,
    pub model: &'a BehaviourModel,
    pub catalog: &'a TemplateCatalog,
    pub patterns: &'a [FailurePattern],
    pub oversampled_train: Option<&'a [LabeledSequence]>,
}

/// Writes records, manifest, and copies of the model and patterns to `dir`.
pub fn write_dataset(dir: &Path, files: DatasetFiles<'_>, options: WriteOptions) -> Result<(), FormatError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let dataset = files.dataset;
    let symbols = dataset.manifest.symbols.clone();
    let mut names = BTreeMap::new();

    let path = dir.join(RECORDS_FILE);
    write_records(create_file(&path)?, &dataset.records, &symbols).map_err(io_err(&path))?;
    names.insert("records".to_string(), RECORDS_FILE.to_string());

    write_json(&dir.join(MODEL_FILE), &files.model.to_document(files.catalog))?;
    names.insert("model".to_string(), MODEL_FILE.to_string());
    write_json(&dir.join(PATTERNS_FILE), &pattern_documents(files.patterns))?;
    names.insert("patterns".to_string(), PATTERNS_FILE.to_string());

    if let Some(train) = files.oversampled_train {
        let path = dir.join(OVERSAMPLED_FILE);
        write_records(create_file(&path)?, train, &symbols).map_err(io_err(&path))?;
        names.insert("oversampled_train".to_string(), OVERSAMPLED_FILE.to_string());
    }
    if options.csv {
        let path = dir.join(CSV_FILE);
        write_records_csv(create_file(&path)?, &dataset.records, &symbols).map_err(|e| FormatError::Io {
            path: path.clone(),
            source: e.into(),
        })?;
        names.insert("csv".to_string(), CSV_FILE.to_string());
    }
    if options.rendered {
        let path = dir.join(RENDERED_FILE);
        write_rendered(create_file(&path)?, &dataset.records, &symbols, files.catalog).map_err(io_err(&path))?;
        names.insert("rendered".to_string(), RENDERED_FILE.to_string());
    }

    dataset.manifest.files = names;
    write_json(&dir.join(MANIFEST_FILE), &dataset.manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest, FormatError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| json_err(path, e))
}

/// Reads a dataset directory written by [`write_dataset`].
pub fn read_dataset(dir: &Path) -> Result<Dataset, FormatError> {
    let manifest = read_manifest(&dir.join(MANIFEST_FILE))?;
    let records_name = manifest.files.get("records").map_or(RECORDS_FILE, String::as_str);
    let path = dir.join(records_name);
    let records = read_records(&path, &mut SymbolTable::fixed(&manifest.symbols))?;
    if records.len() != manifest.spec.size {
        return Err(FormatError::Syntax {
            line: records.len(),
            path,
            message: format!("expected {} records, found {}", manifest.spec.size, records.len()),
        });
    }
    Ok(Dataset { records, manifest })
}

/// Timestamps of a real-world log: integers or decimals when every value
/// parses as one, text otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Timestamps {
    Integer(Vec<i64>),
    Decimal(Vec<f64>),
    Text(Vec<String>),
}

#[derive(Debug, Deserialize)]
struct RawRow {
    task_id: String,
    timestamp: String,
    template_id: String,
    is_failure_message: String,
}

fn parse_flag(text: &str) -> Option<bool> {
    match text.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> FormatError {
    FormatError::Syntax {
        path: path.to_path_buf(),
        line: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    }
}

/// A real-world log with its timestamps kept as text until the whole column
/// has been seen.
pub struct RawLog {
    rows: Vec<(String, String, bool)>,
    timestamps: Timestamps,
}

impl RawLog {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn records<T>(rows: Vec<(String, String, bool)>, ts: Vec<T>) -> Vec<RawLogRecord<T>> {
        rows.into_iter()
            .zip(ts)
            .map(|((task_id, template_id, is_failure_message), timestamp)| RawLogRecord {
                task_id,
                timestamp,
                template_id,
                is_failure_message,
            })
            .collect()
    }

    /// Runs `f` on the records with their timestamps in their parsed type.
    pub fn with_records<R>(self, f: impl FnOnce(RawRecords) -> R) -> R {
        match self.timestamps {
            Timestamps::Integer(ts) => f(RawRecords::Integer(Self::records(self.rows, ts))),
            Timestamps::Decimal(ts) => f(RawRecords::Decimal(Self::records(
                self.rows,
                ts.into_iter().map(OrderedF64).collect(),
            ))),
            Timestamps::Text(ts) => f(RawRecords::Text(Self::records(self.rows, ts))),
        }
    }
}

/// Total order on decimal timestamps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderedF64(pub f64);

impl Eq for OrderedF64 {}

impl PartialOrd for OrderedF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub enum RawRecords {
    Integer(Vec<RawLogRecord<i64>>),
    Decimal(Vec<RawLogRecord<OrderedF64>>),
    Text(Vec<RawLogRecord<String>>),
}

/// Reads `task_id,timestamp,template_id,is_failure_message` rows.
pub fn read_raw_log(path: &Path) -> Result<RawLog, FormatError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut rows = Vec::new();
    let mut stamps = Vec::new();
    for row in reader.deserialize::<RawRow>() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let Some(flag) = parse_flag(&row.is_failure_message) else {
            return Err(FormatError::Syntax {
                path: path.to_path_buf(),
                line: rows.len() + 2,
                message: format!(
                    "is_failure_message must be true/false, got `{}`",
                    row.is_failure_message
                ),
            });
        };
        rows.push((row.task_id, row.template_id, flag));
        stamps.push(row.timestamp);
    }
    let timestamps = if let Some(ints) = stamps
        .iter()
        .map(|s| s.trim().parse().ok())
        .collect::<Option<Vec<i64>>>()
    {
        Timestamps::Integer(ints)
    } else if let Some(decs) = stamps
        .iter()
        .map(|s| s.trim().parse().ok())
        .collect::<Option<Vec<f64>>>()
    {
        Timestamps::Decimal(decs)
    } else {
        Timestamps::Text(stamps)
    };
    Ok(RawLog { rows, timestamps })
}

#[derive(Debug, Deserialize)]
struct LabelRow {
    task_id: String,
    label: String,
}

/// Reads `task_id,label` rows with labels `normal` or `failure`.
pub fn read_task_labels(path: &Path) -> Result<BTreeMap<String, Label>, FormatError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut labels = BTreeMap::new();
    for (i, row) in reader.deserialize::<LabelRow>().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let label = match row.label.trim().to_ascii_lowercase().as_str() {
            "normal" => Label::Normal,
            "failure" => Label::Failure,
            other => {
                return Err(FormatError::Syntax {
                    path: path.to_path_buf(),
                    line: i + 2,
                    message: format!("label must be `normal` or `failure`, got `{other}`"),
                })
            }
        };
        labels.insert(row.task_id, label);
    }
    Ok(labels)
}
