//! File ingestion and report emission.
//!
//! Formats (all UTF-8, LF line endings, "." decimal separator):
//!
//! - **Dataset CSV**: header row; first column date labels, last column the
//!   outcome, every column in between one partner. Blank cells read as 0.
//! - **Payoff CSV**: header row; two columns: semicolon-separated partner
//!   names (empty or "NA" marks the baseline row) and the payoff.
//! - **Report**: JSON (one document) or CSV (one file per table section).
//!   Numbers are written in shortest round-trip form, so re-parsing yields
//!   the exact 64-bit value.

use std::fs::File;
use std::io::{BufWriter, Write as IoWrite};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameShapleyResult;
use crate::least_squares::FitResult;
use crate::model::{
    validate_dataset, validate_payoff_table, CoalitionPayoffTable, ImportanceEntry,
    ImportanceReport, PartnerDataset, PlayerId, RawDataset, RawPayoffRow, ShapleyBreakdown,
};
use crate::regression::{CoalitionR2Table, CoefficientSet, ImportanceResult, Prediction};

/// Report output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

fn map_csv_error(err: csv::Error) -> Error {
    let row = err
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or_default();
    match err.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::ParseError {
            row,
            column: String::new(),
            message: format!("{other:?}"),
        },
    }
}

fn parse_cell(text: &str, row: usize, column: &str) -> Result<Option<f64>> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(None);
    }
    trimmed
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::ParseError {
            row,
            column: column.to_string(),
            message: format!("not a number: {trimmed:?}"),
        })
}

/// Loads a partner dataset CSV: date column, partner columns, outcome column.
pub fn load_dataset_csv(path: impl AsRef<Path>) -> Result<PartnerDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path.as_ref())
        .map_err(map_csv_error)?;

    let mut records = reader.records();
    let header = match records.next() {
        Some(record) => record.map_err(map_csv_error)?,
        None => return Err(Error::HeaderMissing("file is empty".to_string())),
    };
    if header.len() < 3 {
        return Err(Error::HeaderMissing(format!(
            "need a date column, at least one partner column, and an outcome column; got {} columns",
            header.len()
        )));
    }
    let columns: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    let partner_names = columns[1..columns.len() - 1].to_vec();
    let outcome_name = &columns[columns.len() - 1];

    let mut dates = Vec::new();
    let mut cells = Vec::new();
    let mut outcome = Vec::new();
    for (index, record) in records.enumerate() {
        let record = record.map_err(map_csv_error)?;
        let row = index + 1;
        if record.len() != columns.len() {
            return Err(Error::ParseError {
                row,
                column: String::new(),
                message: format!("expected {} fields, got {}", columns.len(), record.len()),
            });
        }
        let date = record[0].trim();
        if date.is_empty() {
            return Err(Error::ParseError {
                row,
                column: columns[0].clone(),
                message: "empty date label".to_string(),
            });
        }
        dates.push(date.to_string());
        let mut data_row = Vec::with_capacity(partner_names.len());
        for (c, name) in partner_names.iter().enumerate() {
            data_row.push(parse_cell(&record[c + 1], row, name)?);
        }
        cells.push(data_row);
        outcome.push(parse_cell(&record[columns.len() - 1], row, outcome_name)?);
    }

    validate_dataset(RawDataset {
        dates,
        partner_names,
        cells,
        outcome,
    })
}

/// Loads a coalition payoff CSV. Player order is first appearance.
pub fn load_payoff_csv(path: impl AsRef<Path>) -> Result<CoalitionPayoffTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path.as_ref())
        .map_err(map_csv_error)?;

    let mut records = reader.records();
    let header = match records.next() {
        Some(record) => record.map_err(map_csv_error)?,
        None => return Err(Error::HeaderMissing("file is empty".to_string())),
    };
    if header.len() != 2 {
        return Err(Error::HeaderMissing(format!(
            "payoff files have exactly two columns (partners, payoff); got {}",
            header.len()
        )));
    }

    let mut player_names: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for (index, record) in records.enumerate() {
        let record = record.map_err(map_csv_error)?;
        let row = index + 1;
        if record.len() != 2 {
            return Err(Error::ParseError {
                row,
                column: String::new(),
                message: format!("expected 2 fields, got {}", record.len()),
            });
        }
        let subset = record[0].trim();
        let partners: Vec<String> = if subset.is_empty() || subset.eq_ignore_ascii_case("na") {
            Vec::new()
        } else {
            subset.split(';').map(|p| p.trim().to_string()).collect()
        };
        for name in &partners {
            if !player_names.contains(name) {
                player_names.push(name.clone());
            }
        }
        let payoff = parse_cell(&record[1], row, "payoff")?.ok_or_else(|| Error::ParseError {
            row,
            column: "payoff".to_string(),
            message: "empty payoff".to_string(),
        })?;
        rows.push(RawPayoffRow { partners, payoff });
    }

    validate_payoff_table(&player_names, &rows)
}

/// Writes a dataset back out in the canonical CSV layout.
pub fn write_dataset_csv(dataset: &PartnerDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path.as_ref())?);
    let mut header = vec!["date".to_string()];
    header.extend(dataset.partners().iter().map(|p| p.name().to_string()));
    header.push("outcome".to_string());
    writeln!(writer, "{}", header.join(","))?;
    for row in 0..dataset.rows() {
        let mut fields = vec![dataset.dates()[row].clone()];
        for partner in 0..dataset.partner_count() {
            fields.push(fmt_f64(dataset.column(partner)[row]));
        }
        fields.push(fmt_f64(dataset.outcome()[row]));
        writeln!(writer, "{}", fields.join(","))?;
    }
    writer.flush()?;
    Ok(())
}

/// Shortest decimal form that parses back to the exact same 64-bit float.
fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

// ---------------------------------------------------------------------------
// Report document
// ---------------------------------------------------------------------------

/// Run information embedded in every report. The timestamp is suppressed
/// in deterministic mode so identical inputs produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub version: String,
    pub mode: String,
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub players: Vec<String>,
    pub player_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row_count: Option<usize>,
}

impl ReportMetadata {
    pub fn new(
        mode: &str,
        input: impl AsRef<Path>,
        players: &[PlayerId],
        row_count: Option<usize>,
        deterministic: bool,
    ) -> Self {
        let timestamp = if deterministic {
            None
        } else {
            Some(
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            )
        };
        ReportMetadata {
            tool: "shapreg".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            mode: mode.to_string(),
            input: input.as_ref().display().to_string(),
            timestamp,
            players: players.iter().map(|p| p.name().to_string()).collect(),
            player_count: players.len(),
            row_count,
        }
    }
}

/// One worksheet row with coalitions spelled out as player names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRowDoc {
    pub coalition: Vec<String>,
    pub complement: Vec<String>,
    pub utility_with: f64,
    pub utility_without: f64,
    pub weight: f64,
    pub marginal: f64,
    pub weighted_contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownDoc {
    pub player: String,
    pub rows: Vec<BreakdownRowDoc>,
    pub total: f64,
}

fn breakdown_doc(breakdown: &ShapleyBreakdown, players: &[PlayerId]) -> BreakdownDoc {
    BreakdownDoc {
        player: breakdown.player.name().to_string(),
        rows: breakdown
            .rows
            .iter()
            .map(|row| BreakdownRowDoc {
                coalition: row.coalition.member_names(players),
                complement: row.complement.member_names(players),
                utility_with: row.utility_with,
                utility_without: row.utility_without,
                weight: row.weight,
                marginal: row.marginal,
                weighted_contribution: row.weighted_contribution,
            })
            .collect(),
        total: breakdown.total,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntryDoc {
    pub partner: String,
    pub beta: f64,
    pub attributed_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOlsDoc {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientsDoc {
    pub entries: Vec<CoefficientEntryDoc>,
    pub comparison_ols: ComparisonOlsDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R2RowDoc {
    pub coalition: Vec<String>,
    pub r_squared: f64,
}

/// Serializable report: metadata, importance summary, per-player
/// worksheets, and (regression mode) coefficients and the R² table.
/// Array order follows player declaration order throughout; optional
/// sections are omitted entirely rather than null-filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub metadata: ReportMetadata,
    pub importance: ImportanceReport,
    pub breakdowns: Vec<BreakdownDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r2_table: Option<Vec<R2RowDoc>>,
}

fn build_importance(
    players: &[PlayerId],
    values: &[f64],
    shares: Option<&[f64]>,
    attributed: Option<&[f64]>,
    cost_per_outcome: Option<&[f64]>,
    utility_full: f64,
    outcome_total: Option<f64>,
) -> ImportanceReport {
    let entries = players
        .iter()
        .enumerate()
        .map(|(i, player)| ImportanceEntry {
            player: player.clone(),
            shapley_value: values[i],
            normalized_share: shares.map(|s| s[i]).unwrap_or(0.0),
            attributed_outcome: attributed.map(|a| a[i]),
            cost_per_outcome: cost_per_outcome.map(|c| c[i]),
        })
        .collect();
    ImportanceReport {
        entries,
        utility_full,
        outcome_total,
    }
}

impl ReportDocument {
    /// Report for the cooperative-game pipeline. The result's extrapolated
    /// dollars (when a channel total was applied) land in the
    /// attributed-outcome column.
    pub fn for_game(
        metadata: ReportMetadata,
        result: &GameShapleyResult,
        channel_total: Option<f64>,
        utility_full: f64,
    ) -> Self {
        ReportDocument {
            metadata,
            importance: build_importance(
                &result.players,
                &result.values,
                result.shares.as_deref(),
                result.extrapolated.as_deref(),
                None,
                utility_full,
                channel_total,
            ),
            breakdowns: result
                .breakdowns
                .iter()
                .map(|b| breakdown_doc(b, &result.players))
                .collect(),
            coefficients: None,
            r2_table: None,
        }
    }

    /// Report for the regression pipeline.
    #[allow(clippy::too_many_arguments)]
    pub fn for_regression(
        metadata: ReportMetadata,
        importance: &ImportanceResult,
        attributed: Option<&[f64]>,
        cost_per_outcome: Option<&[f64]>,
        outcome_total: Option<f64>,
        coefficients: Option<&CoefficientSet>,
        r2_table: Option<&CoalitionR2Table>,
        utility_full: f64,
    ) -> Self {
        ReportDocument {
            metadata,
            importance: build_importance(
                &importance.players,
                &importance.values,
                importance.shares.as_deref(),
                attributed,
                cost_per_outcome,
                utility_full,
                outcome_total,
            ),
            breakdowns: importance
                .breakdowns
                .iter()
                .map(|b| breakdown_doc(b, &importance.players))
                .collect(),
            coefficients: coefficients.map(|set| CoefficientsDoc {
                entries: set
                    .players
                    .iter()
                    .enumerate()
                    .map(|(i, p)| CoefficientEntryDoc {
                        partner: p.name().to_string(),
                        beta: set.beta[i],
                        attributed_total: set.attributed_total[i],
                    })
                    .collect(),
                comparison_ols: comparison_doc(&set.comparison_ols),
            }),
            r2_table: r2_table.map(|table| {
                table
                    .rows()
                    .into_iter()
                    .map(|(coalition, r_squared)| R2RowDoc {
                        coalition: coalition.member_names(table.players()),
                        r_squared,
                    })
                    .collect()
            }),
        }
    }
}

fn comparison_doc(fit: &FitResult) -> ComparisonOlsDoc {
    ComparisonOlsDoc {
        coefficients: fit.coefficients.clone(),
        intercept: fit.intercept,
        r_squared: fit.r_squared,
    }
}

/// Writes a report as JSON (single document) or CSV (one file per section,
/// named `<stem>.<section>.csv`).
pub fn write_report(
    doc: &ReportDocument,
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<()> {
    match format {
        ReportFormat::Json => {
            let mut writer = BufWriter::new(File::create(path.as_ref())?);
            let json = serde_json::to_string_pretty(doc).expect("report serializes");
            writer.write_all(json.as_bytes())?;
            writer.write_all(b"\n")?;
            writer.flush()?;
            Ok(())
        }
        ReportFormat::Csv => write_report_csv(doc, path.as_ref()),
    }
}

fn section_path(path: &Path, section: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".to_string());
    path.with_file_name(format!("{stem}.{section}.csv"))
}

fn write_report_csv(doc: &ReportDocument, path: &Path) -> Result<()> {
    {
        let mut writer = BufWriter::new(File::create(section_path(path, "metadata"))?);
        writeln!(writer, "key,value")?;
        writeln!(writer, "tool,{}", doc.metadata.tool)?;
        writeln!(writer, "version,{}", doc.metadata.version)?;
        writeln!(writer, "mode,{}", doc.metadata.mode)?;
        writeln!(writer, "input,{}", doc.metadata.input)?;
        if let Some(ts) = doc.metadata.timestamp {
            writeln!(writer, "timestamp,{ts}")?;
        }
        writeln!(writer, "players,{}", doc.metadata.players.join(";"))?;
        writeln!(writer, "player_count,{}", doc.metadata.player_count)?;
        if let Some(rows) = doc.metadata.row_count {
            writeln!(writer, "row_count,{rows}")?;
        }
        writer.flush()?;
    }

    {
        let mut writer = BufWriter::new(File::create(section_path(path, "importance"))?);
        writeln!(
            writer,
            "player,shapley_value,normalized_share,attributed_outcome,cost_per_outcome"
        )?;
        for entry in &doc.importance.entries {
            writeln!(
                writer,
                "{},{},{},{},{}",
                entry.player.name(),
                fmt_f64(entry.shapley_value),
                fmt_f64(entry.normalized_share),
                entry.attributed_outcome.map(fmt_f64).unwrap_or_default(),
                entry.cost_per_outcome.map(fmt_f64).unwrap_or_default(),
            )?;
        }
        writer.flush()?;
    }

    {
        let mut writer = BufWriter::new(File::create(section_path(path, "breakdowns"))?);
        writeln!(
            writer,
            "player,coalition,complement,utility_with,utility_without,weight,marginal,weighted_contribution"
        )?;
        for breakdown in &doc.breakdowns {
            for row in &breakdown.rows {
                writeln!(
                    writer,
                    "{},{},{},{},{},{},{},{}",
                    breakdown.player,
                    row.coalition.join(";"),
                    row.complement.join(";"),
                    fmt_f64(row.utility_with),
                    fmt_f64(row.utility_without),
                    fmt_f64(row.weight),
                    fmt_f64(row.marginal),
                    fmt_f64(row.weighted_contribution),
                )?;
            }
        }
        writer.flush()?;
    }

    if let Some(coefficients) = &doc.coefficients {
        let mut writer = BufWriter::new(File::create(section_path(path, "coefficients"))?);
        writeln!(writer, "partner,beta,attributed_total")?;
        for entry in &coefficients.entries {
            writeln!(
                writer,
                "{},{},{}",
                entry.partner,
                fmt_f64(entry.beta),
                fmt_f64(entry.attributed_total)
            )?;
        }
        writeln!(writer)?;
        writeln!(writer, "comparison_ols_term,value")?;
        writeln!(
            writer,
            "intercept,{}",
            fmt_f64(coefficients.comparison_ols.intercept)
        )?;
        for (i, c) in coefficients.comparison_ols.coefficients.iter().enumerate() {
            writeln!(
                writer,
                "{},{}",
                coefficients.entries[i].partner,
                fmt_f64(*c)
            )?;
        }
        writeln!(
            writer,
            "r_squared,{}",
            fmt_f64(coefficients.comparison_ols.r_squared)
        )?;
        writer.flush()?;
    }

    if let Some(r2_table) = &doc.r2_table {
        let mut writer = BufWriter::new(File::create(section_path(path, "r2"))?);
        writeln!(writer, "coalition,r_squared")?;
        for row in r2_table {
            writeln!(
                writer,
                "{},{}",
                row.coalition.join(";"),
                fmt_f64(row.r_squared)
            )?;
        }
        writer.flush()?;
    }

    Ok(())
}

/// Writes the fitted series CSV: date, actual, fitted, then one
/// contribution column per partner (in declaration order); the
/// contribution columns sum to the fitted column on every row.
pub fn write_fitted_series(
    dataset: &PartnerDataset,
    prediction: &Prediction,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path.as_ref())?);
    let mut header = vec![
        "date".to_string(),
        "actual".to_string(),
        "fitted".to_string(),
    ];
    header.extend(dataset.partners().iter().map(|p| p.name().to_string()));
    writeln!(writer, "{}", header.join(","))?;
    for row in 0..dataset.rows() {
        let mut fields = vec![
            dataset.dates()[row].clone(),
            fmt_f64(dataset.outcome()[row]),
            fmt_f64(prediction.fitted[row]),
        ];
        for contribution in &prediction.contributions {
            fields.push(fmt_f64(contribution[row]));
        }
        writeln!(writer, "{}", fields.join(","))?;
    }
    writer.flush()?;
    Ok(())
}
