//! File formats: corpus ingestion (CSV or JSON), corpus serialization,
//! baseline import/export, ranking exports and the generator's latent-truth
//! sidecar.
//!
//! CSV files are UTF-8 with a header row; columns are matched by name.
//! The JSON variant mirrors the CSV field names, one array of objects per
//! file. Parse problems are collected per row with file, row and column
//! context instead of failing on the first.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::corpus::{
    AuthorshipEntry, CategoryId, Corpus, FieldTaxonomy, InstitutionId, PubId, Publication, Researcher,
    ResearcherId, SdsId, SdsInfo, UdaId,
};
use crate::error::{DataError, Issue, IssueKind};
use crate::normalize::{BaselineCell, BaselineTable};
use crate::rank::RankingTable;
use crate::real::Real;

/// On-disk corpus encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Json,
}

impl FileFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FileFormat::Csv => "csv",
            FileFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for FileFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(FileFormat::Csv),
            "json" => Ok(FileFormat::Json),
            other => Err(format!("unknown format \"{other}\" (expected csv or json)")),
        }
    }
}

/// The four input files of a corpus.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CorpusPaths {
    pub researchers: PathBuf,
    pub publications: PathBuf,
    pub authorship: PathBuf,
    pub taxonomy: PathBuf,
}

impl CorpusPaths {
    /// Standard file names under one directory.
    pub fn in_dir(dir: &Path, format: FileFormat) -> CorpusPaths {
        let ext = format.extension();
        CorpusPaths {
            researchers: dir.join(format!("researchers.{ext}")),
            publications: dir.join(format!("publications.{ext}")),
            authorship: dir.join(format!("authorship.{ext}")),
            taxonomy: dir.join(format!("taxonomy.{ext}")),
        }
    }

    pub fn all(&self) -> [&Path; 4] {
        [&self.researchers, &self.publications, &self.authorship, &self.taxonomy]
    }
}

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io { path: path.display().to_string(), source }
}

fn file_label(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Load and cross-validate a corpus. The observation label is run metadata,
/// not file content, and is recorded verbatim in reports.
pub fn load_corpus(
    paths: &CorpusPaths,
    format: FileFormat,
    observation_date_label: &str,
) -> Result<Corpus, DataError> {
    let mut issues = Vec::new();
    let (researchers, publications, authorship, taxonomy) = match format {
        FileFormat::Csv => (
            read_researchers_csv(&paths.researchers, &mut issues)?,
            read_publications_csv(&paths.publications, &mut issues)?,
            read_authorship_csv(&paths.authorship, &mut issues)?,
            read_taxonomy_csv(&paths.taxonomy, &mut issues)?,
        ),
        FileFormat::Json => (
            read_json_array::<Researcher>(&paths.researchers, &mut issues)?,
            read_json_array::<Publication>(&paths.publications, &mut issues)?,
            read_json_array::<AuthorshipEntry>(&paths.authorship, &mut issues)?,
            taxonomy_from_rows(
                read_json_array::<TaxonomyRow>(&paths.taxonomy, &mut issues)?,
                &file_label(&paths.taxonomy),
                &mut issues,
            ),
        ),
    };
    if !issues.is_empty() {
        return Err(DataError::Validation(issues));
    }
    Corpus::new(researchers, publications, authorship, taxonomy, observation_date_label)
}

/// A standalone publication list used as the baseline reference set. Schema
/// and key uniqueness are enforced; no authorship is expected.
pub fn load_reference_publications(path: &Path, format: FileFormat) -> Result<Vec<Publication>, DataError> {
    let mut issues = Vec::new();
    let publications = match format {
        FileFormat::Csv => read_publications_csv(path, &mut issues)?,
        FileFormat::Json => read_json_array::<Publication>(path, &mut issues)?,
    };
    let mut seen = std::collections::HashSet::new();
    for p in &publications {
        if !seen.insert(&p.pub_id) {
            issues.push(
                Issue::new(
                    IssueKind::DuplicateKey,
                    file_label(path),
                    format!("pub_id \"{}\" appears more than once", p.pub_id),
                )
                .with_key(p.pub_id.as_str()),
            );
        }
        if p.subject_categories.is_empty() {
            issues.push(
                Issue::new(
                    IssueKind::Schema,
                    file_label(path),
                    format!("publication \"{}\" has no subject categories", p.pub_id),
                )
                .with_key(p.pub_id.as_str()),
            );
        }
    }
    if issues.is_empty() {
        Ok(publications)
    } else {
        Err(DataError::Validation(issues))
    }
}

// ---------------------------------------------------------------------------
// CSV reading
// ---------------------------------------------------------------------------

struct CsvFile {
    label: String,
    header_index: BTreeMap<String, usize>,
    /// (1-based line number, fields)
    rows: Vec<(u64, csv::StringRecord)>,
}

fn read_csv_file(path: &Path, expected: &[&str], issues: &mut Vec<Issue>) -> Result<CsvFile, DataError> {
    let label = file_label(path);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => io_err(path, io),
            other => DataError::Validation(vec![Issue::new(
                IssueKind::Schema,
                label.clone(),
                format!("unreadable csv: {other:?}"),
            )]),
        })?;

    let mut header_index = BTreeMap::new();
    match reader.headers() {
        Ok(headers) => {
            for (i, name) in headers.iter().enumerate() {
                header_index.insert(name.to_string(), i);
            }
            for name in expected {
                if !header_index.contains_key(*name) {
                    issues.push(
                        Issue::new(
                            IssueKind::Schema,
                            label.clone(),
                            format!("missing column \"{name}\" in header"),
                        )
                        .in_column(*name),
                    );
                }
            }
        }
        Err(e) => {
            issues.push(Issue::new(IssueKind::Schema, label.clone(), format!("unreadable header: {e}")));
        }
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        match record {
            Ok(rec) => {
                let line = rec.position().map(|p| p.line()).unwrap_or(0);
                rows.push((line, rec));
            }
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                issues.push(
                    Issue::new(IssueKind::Schema, label.clone(), format!("malformed row: {e}")).at_row(line),
                );
            }
        }
    }
    Ok(CsvFile { label, header_index, rows })
}

impl CsvFile {
    fn field<'r>(&self, record: &'r csv::StringRecord, column: &str) -> Option<&'r str> {
        self.header_index.get(column).and_then(|&i| record.get(i))
    }

    fn required<'r>(
        &self,
        record: &'r csv::StringRecord,
        line: u64,
        column: &str,
        issues: &mut Vec<Issue>,
    ) -> Option<&'r str> {
        match self.field(record, column) {
            Some(value) if !value.is_empty() => Some(value),
            _ => {
                issues.push(
                    Issue::new(IssueKind::Schema, self.label.clone(), format!("missing value for \"{column}\""))
                        .at_row(line)
                        .in_column(column),
                );
                None
            }
        }
    }

    fn parsed<T: std::str::FromStr>(
        &self,
        record: &csv::StringRecord,
        line: u64,
        column: &str,
        issues: &mut Vec<Issue>,
    ) -> Option<T> {
        let raw = self.required(record, line, column, issues)?;
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                issues.push(
                    Issue::new(
                        IssueKind::Schema,
                        self.label.clone(),
                        format!("cannot parse \"{raw}\" in column \"{column}\""),
                    )
                    .at_row(line)
                    .in_column(column),
                );
                None
            }
        }
    }
}

fn read_researchers_csv(path: &Path, issues: &mut Vec<Issue>) -> Result<Vec<Researcher>, DataError> {
    let file = read_csv_file(
        path,
        &["researcher_id", "sds_id", "university_id", "active_from", "active_to"],
        issues,
    )?;
    let mut out = Vec::with_capacity(file.rows.len());
    for (line, record) in &file.rows {
        let id = file.required(record, *line, "researcher_id", issues);
        let sds = file.required(record, *line, "sds_id", issues);
        let university = file.required(record, *line, "university_id", issues);
        let from = file.parsed::<i32>(record, *line, "active_from", issues);
        let to = file.parsed::<i32>(record, *line, "active_to", issues);
        if let (Some(id), Some(sds), Some(university), Some(from), Some(to)) = (id, sds, university, from, to) {
            out.push(Researcher {
                researcher_id: ResearcherId::from(id),
                sds_id: SdsId::from(sds),
                university_id: InstitutionId::from(university),
                active_from: from,
                active_to: to,
            });
        }
    }
    Ok(out)
}

fn read_publications_csv(path: &Path, issues: &mut Vec<Issue>) -> Result<Vec<Publication>, DataError> {
    let file = read_csv_file(path, &["pub_id", "year", "citation_count", "subject_categories"], issues)?;
    let mut out = Vec::with_capacity(file.rows.len());
    for (line, record) in &file.rows {
        let id = file.required(record, *line, "pub_id", issues);
        let year = file.parsed::<i32>(record, *line, "year", issues);
        let citations = file.parsed::<u32>(record, *line, "citation_count", issues);
        let categories = file.required(record, *line, "subject_categories", issues).map(|raw| {
            raw.split(';')
                .map(str::trim)
                .filter(|c| !c.is_empty())
                .map(CategoryId::from)
                .collect::<Vec<_>>()
        });
        if let (Some(id), Some(year), Some(citations), Some(categories)) = (id, year, citations, categories) {
            out.push(Publication {
                pub_id: PubId::from(id),
                year,
                citation_count: citations,
                subject_categories: categories,
            });
        }
    }
    Ok(out)
}

fn read_authorship_csv(path: &Path, issues: &mut Vec<Issue>) -> Result<Vec<AuthorshipEntry>, DataError> {
    let file = read_csv_file(path, &["pub_id", "position", "researcher_id", "institution_id"], issues)?;
    let mut out = Vec::with_capacity(file.rows.len());
    for (line, record) in &file.rows {
        let pub_id = file.required(record, *line, "pub_id", issues);
        let position = file.parsed::<u32>(record, *line, "position", issues);
        // researcher_id is legitimately empty for off-roster authors
        let researcher = file.field(record, "researcher_id").filter(|v| !v.is_empty());
        let institution = file.required(record, *line, "institution_id", issues);
        if let (Some(pub_id), Some(position), Some(institution)) = (pub_id, position, institution) {
            out.push(AuthorshipEntry {
                pub_id: PubId::from(pub_id),
                position,
                researcher_id: researcher.map(ResearcherId::from),
                institution_id: InstitutionId::from(institution),
            });
        }
    }
    Ok(out)
}

fn read_taxonomy_csv(path: &Path, issues: &mut Vec<Issue>) -> Result<FieldTaxonomy, DataError> {
    let file = read_csv_file(path, &["sds_id", "uda_id", "positional_weighting"], issues)?;
    let mut rows = Vec::with_capacity(file.rows.len());
    for (line, record) in &file.rows {
        let sds = file.required(record, *line, "sds_id", issues);
        let uda = file.required(record, *line, "uda_id", issues);
        let positional = file.parsed::<bool>(record, *line, "positional_weighting", issues);
        if let (Some(sds), Some(uda), Some(positional)) = (sds, uda, positional) {
            rows.push(TaxonomyRow {
                sds_id: SdsId::from(sds),
                uda_id: UdaId::from(uda),
                positional_weighting: positional,
            });
        }
    }
    let label = file.label.clone();
    Ok(taxonomy_from_rows(rows, &label, issues))
}

#[derive(Debug, Clone, serde::Serialize, Deserialize)]
struct TaxonomyRow {
    sds_id: SdsId,
    uda_id: UdaId,
    positional_weighting: bool,
}

fn taxonomy_from_rows(rows: Vec<TaxonomyRow>, file: &str, issues: &mut Vec<Issue>) -> FieldTaxonomy {
    let mut entries = BTreeMap::new();
    for row in rows {
        if entries
            .insert(
                row.sds_id.clone(),
                SdsInfo { uda_id: row.uda_id, positional_weighting: row.positional_weighting },
            )
            .is_some()
        {
            issues.push(
                Issue::new(
                    IssueKind::DuplicateKey,
                    file.to_owned(),
                    format!("sds_id \"{}\" appears more than once", row.sds_id),
                )
                .in_column("sds_id")
                .with_key(row.sds_id.as_str()),
            );
        }
    }
    FieldTaxonomy::new(entries)
}

fn read_json_array<T: serde::de::DeserializeOwned>(
    path: &Path,
    issues: &mut Vec<Issue>,
) -> Result<Vec<T>, DataError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    match serde_json::from_str::<Vec<T>>(&text) {
        Ok(rows) => Ok(rows),
        Err(e) => {
            issues.push(
                Issue::new(IssueKind::Schema, file_label(path), format!("invalid json: {e}"))
                    .at_row(e.line() as u64),
            );
            Ok(Vec::new())
        }
    }
}

// ---------------------------------------------------------------------------
// Corpus serialization
// ---------------------------------------------------------------------------

/// Write the four corpus files (standard names) into `dir`.
pub fn save_corpus(corpus: &Corpus, dir: &Path, format: FileFormat) -> Result<CorpusPaths, DataError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let paths = CorpusPaths::in_dir(dir, format);
    match format {
        FileFormat::Csv => {
            write_researchers_csv(corpus, &paths.researchers)?;
            write_publications_csv(corpus.publications(), &paths.publications)?;
            write_authorship_csv(corpus, &paths.authorship)?;
            write_taxonomy_csv(corpus, &paths.taxonomy)?;
        }
        FileFormat::Json => {
            write_json(&paths.researchers, corpus.researchers())?;
            write_json(&paths.publications, corpus.publications())?;
            write_json(&paths.authorship, corpus.authorship())?;
            let rows: Vec<TaxonomyRow> = corpus
                .taxonomy()
                .iter()
                .map(|(sds, info)| TaxonomyRow {
                    sds_id: sds.clone(),
                    uda_id: info.uda_id.clone(),
                    positional_weighting: info.positional_weighting,
                })
                .collect();
            write_json(&paths.taxonomy, &rows)?;
        }
    }
    Ok(paths)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, DataError> {
    csv::WriterBuilder::new().from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(path, io),
        other => DataError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    })
}

fn csv_io(path: &Path, e: csv::Error) -> DataError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(path, io),
        other => DataError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    }
}

fn write_researchers_csv(corpus: &Corpus, path: &Path) -> Result<(), DataError> {
    let mut w = csv_writer(path)?;
    w.write_record(["researcher_id", "sds_id", "university_id", "active_from", "active_to"])
        .map_err(|e| csv_io(path, e))?;
    for r in corpus.researchers() {
        w.write_record([
            r.researcher_id.as_str(),
            r.sds_id.as_str(),
            r.university_id.as_str(),
            &r.active_from.to_string(),
            &r.active_to.to_string(),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Publications in the exact corpus CSV schema; also used for reference sets.
pub fn write_publications_csv(publications: &[Publication], path: &Path) -> Result<(), DataError> {
    let mut w = csv_writer(path)?;
    w.write_record(["pub_id", "year", "citation_count", "subject_categories"])
        .map_err(|e| csv_io(path, e))?;
    for p in publications {
        let categories: Vec<&str> = p.subject_categories.iter().map(|c| c.as_str()).collect();
        w.write_record([
            p.pub_id.as_str(),
            &p.year.to_string(),
            &p.citation_count.to_string(),
            &categories.join(";"),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_authorship_csv(corpus: &Corpus, path: &Path) -> Result<(), DataError> {
    let mut w = csv_writer(path)?;
    w.write_record(["pub_id", "position", "researcher_id", "institution_id"])
        .map_err(|e| csv_io(path, e))?;
    for a in corpus.authorship() {
        w.write_record([
            a.pub_id.as_str(),
            &a.position.to_string(),
            a.researcher_id.as_ref().map(|r| r.as_str()).unwrap_or(""),
            a.institution_id.as_str(),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_taxonomy_csv(corpus: &Corpus, path: &Path) -> Result<(), DataError> {
    let mut w = csv_writer(path)?;
    w.write_record(["sds_id", "uda_id", "positional_weighting"]).map_err(|e| csv_io(path, e))?;
    for (sds, info) in corpus.taxonomy().iter() {
        w.write_record([
            sds.as_str(),
            info.uda_id.as_str(),
            if info.positional_weighting { "true" } else { "false" },
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_json<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<(), DataError> {
    let mut text = serde_json::to_string_pretty(rows).expect("serializable rows");
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// Baselines, rankings, sidecars
// ---------------------------------------------------------------------------

/// Export baselines as `category,year,median,count`, sorted.
pub fn write_baselines_csv<F: Real>(table: &BaselineTable<F>, path: &Path) -> Result<(), DataError> {
    let mut w = csv_writer(path)?;
    w.write_record(["category", "year", "median", "count"]).map_err(|e| csv_io(path, e))?;
    for (category, year, cell) in table.sorted_cells() {
        w.write_record([
            category.as_str(),
            &year.to_string(),
            &cell.median.to_string(),
            &cell.count.to_string(),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Import baselines previously exported with [`write_baselines_csv`].
pub fn read_baselines_csv(path: &Path) -> Result<BaselineTable<f64>, DataError> {
    let mut issues = Vec::new();
    let file = read_csv_file(path, &["category", "year", "median", "count"], &mut issues)?;
    let mut cells = Vec::new();
    for (line, record) in &file.rows {
        let category = file.required(record, *line, "category", &mut issues);
        let year = file.parsed::<i32>(record, *line, "year", &mut issues);
        let median = file.parsed::<f64>(record, *line, "median", &mut issues);
        let count = file.parsed::<u32>(record, *line, "count", &mut issues);
        if let (Some(category), Some(year), Some(median), Some(count)) = (category, year, median, count) {
            if median <= 0.0 {
                issues.push(
                    Issue::new(IssueKind::Invariant, file.label.clone(), "median must be positive")
                        .at_row(*line)
                        .in_column("median"),
                );
                continue;
            }
            cells.push(((CategoryId::from(category), year), BaselineCell { median, count }));
        }
    }
    if issues.is_empty() {
        Ok(BaselineTable::from_cells(cells))
    } else {
        Err(DataError::Validation(issues))
    }
}

/// One ranking table in the export schema
/// `sds_id,window_start,window_end,researcher_id,fss,percentile,class`.
pub fn write_ranking_csv(table: &RankingTable<f64>, path: &Path) -> Result<(), DataError> {
    let mut w = csv_writer(path)?;
    w.write_record(["sds_id", "window_start", "window_end", "researcher_id", "fss", "percentile", "class"])
        .map_err(|e| csv_io(path, e))?;
    for entry in &table.entries {
        w.write_record([
            table.sds_id.as_str(),
            &table.window.start().to_string(),
            &table.window.end().to_string(),
            entry.researcher_id.as_str(),
            &entry.fss.to_string(),
            &entry.percentile.to_string(),
            &entry.class.to_string(),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Latent-truth sidecar of the generator: `researcher_id,latent_rate`.
pub fn write_latent_csv(rates: &[(ResearcherId, f64)], path: &Path) -> Result<(), DataError> {
    let mut w = csv_writer(path)?;
    w.write_record(["researcher_id", "latent_rate"]).map_err(|e| csv_io(path, e))?;
    for (id, rate) in rates {
        w.write_record([id.as_str(), &rate.to_string()]).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Pretty-printed JSON with a trailing newline (stable across runs).
pub fn write_json_report<T: serde::Serialize>(value: &T, path: &Path) -> Result<(), DataError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}
