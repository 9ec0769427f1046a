//! Command-line orchestration for the two pipelines.
//!
//! Exit codes are a stable contract: 0 success, 1 I/O failure,
//! 2 validation/usage failure, 3 numerical failure. Human tables go to
//! stdout (rounded for reading); warnings go to stderr; machine reports
//! are written unrounded.

use std::path::PathBuf;

use crate::data_io::{
    load_dataset_csv, load_payoff_csv, write_fitted_series, write_report, ReportDocument,
    ReportFormat, ReportMetadata,
};
use crate::error::{Error, Result};
use crate::game::{extrapolate, shapley_values, GameShapleyResult};
use crate::model::{PartnerDataset, PlayerId, MAX_PARTNERS};
use crate::regression::{
    attribute_outcome, coalition_r2_sweep, derive_coefficients, partner_efficiency, predict_series,
    shapley_importance, SOFT_PARTNER_LIMIT,
};

/// Which pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Game,
    Regress,
}

/// Resolved run configuration, independent of argument parsing.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub input: PathBuf,
    /// Report output path; section files derive from it in CSV format.
    pub output: Option<PathBuf>,
    pub output_format: ReportFormat,
    /// Include the full 2^n R² table in the report (regress mode).
    pub emit_r2_table: bool,
    /// Write the fitted/contribution series CSV here (regress mode).
    pub emit_fitted: Option<PathBuf>,
    /// Per-partner spend CSV for cost-per-outcome (regress mode).
    pub spend: Option<PathBuf>,
    /// Scale shares up to this total (game mode).
    pub channel_total: Option<f64>,
    /// Suppress timestamps so identical inputs give identical bytes.
    pub deterministic: bool,
    /// Refuse inputs with more partners than this (≤ 25).
    pub max_partners: Option<usize>,
}

impl RunConfig {
    pub fn new(mode: Mode, input: impl Into<PathBuf>) -> Self {
        RunConfig {
            mode,
            input: input.into(),
            output: None,
            output_format: ReportFormat::Json,
            emit_r2_table: false,
            emit_fitted: None,
            spend: None,
            channel_total: None,
            deterministic: false,
            max_partners: None,
        }
    }

    fn effective_max_partners(&self) -> usize {
        self.max_partners.unwrap_or(MAX_PARTNERS).min(MAX_PARTNERS)
    }
}

/// Dispatches on the configured mode.
pub fn run(config: &RunConfig) -> i32 {
    match config.mode {
        Mode::Game => cmd_game(config),
        Mode::Regress => cmd_regress(config),
    }
}

fn exit_with(err: Error) -> i32 {
    eprintln!("error: {err}");
    err.exit_code()
}

/// Game pipeline: payoff table → Shapley values → shares → extrapolation.
pub fn cmd_game(config: &RunConfig) -> i32 {
    match run_game(config) {
        Ok(()) => 0,
        Err(err) => exit_with(err),
    }
}

/// Regression pipeline: dataset → coalition R² sweep → importance →
/// attribution → coefficients → prediction.
pub fn cmd_regress(config: &RunConfig) -> i32 {
    match run_regress(config) {
        Ok(()) => 0,
        Err(err) => exit_with(err),
    }
}

fn run_game(config: &RunConfig) -> Result<()> {
    if config.spend.is_some() {
        return Err(Error::Usage(
            "--spend applies to regress mode only".to_string(),
        ));
    }
    if config.emit_fitted.is_some() || config.emit_r2_table {
        return Err(Error::Usage(
            "--emit-fitted/--emit-r2-table apply to regress mode only".to_string(),
        ));
    }

    let table = load_payoff_csv(&config.input)?;
    let n = table.player_count();
    let max = config.effective_max_partners();
    if n > max {
        return Err(Error::TooManyPartners { n, max });
    }

    let mut result = shapley_values(&table);
    if result.has_negative_values() {
        eprintln!(
            "warning: negative Shapley value(s) present; some coalitions pay below the baseline"
        );
    }
    if result.shares.is_none() {
        eprintln!("warning: Shapley values sum to zero or less; shares are undefined");
    }

    if let Some(total) = config.channel_total {
        result.extrapolated = Some(extrapolate(&result, total)?);
    }

    print_game_table(&result);

    if let Some(path) = &config.output {
        let metadata = ReportMetadata::new(
            "game",
            &config.input,
            table.players(),
            None,
            config.deterministic,
        );
        let doc = ReportDocument::for_game(
            metadata,
            &result,
            config.channel_total,
            table.grand_payoff(),
        );
        write_report(&doc, path, config.output_format)?;
    }
    Ok(())
}

fn run_regress(config: &RunConfig) -> Result<()> {
    if config.channel_total.is_some() {
        return Err(Error::Usage(
            "--channel-total applies to game mode only".to_string(),
        ));
    }

    let dataset = load_dataset_csv(&config.input)?;
    let n = dataset.partner_count();
    let max = config.effective_max_partners();
    if n > max {
        return Err(Error::TooManyPartners { n, max });
    }
    if n > SOFT_PARTNER_LIMIT {
        eprintln!(
            "warning: {n} partners require {} coalition fits; this may take a while",
            1u64 << n
        );
    }

    let spend = match &config.spend {
        Some(path) => Some(load_spend_csv(path, dataset.partners())?),
        None => None,
    };

    let table = coalition_r2_sweep(&dataset)?;
    let importance = shapley_importance(&table)?;

    // Attribution needs a meaningful outcome total; mean-centered data has
    // none, so fall back to shares-only output.
    let mut attributed = None;
    let mut coefficients = None;
    let mut prediction = None;
    let mut efficiency = None;
    let mut outcome_total = None;
    match importance.shares.as_deref() {
        Some(shares) => match attribute_outcome(shares, dataset.outcome()) {
            Ok(values) => {
                let set = derive_coefficients(&values, &dataset)?;
                prediction = Some(predict_series(&set, &dataset));
                if let Some(spend) = &spend {
                    efficiency = Some(partner_efficiency(&values, spend, dataset.partners())?);
                }
                outcome_total = Some(dataset.outcome_total());
                attributed = Some(values);
                coefficients = Some(set);
            }
            Err(Error::ZeroOutcomeTotal) => {
                eprintln!(
                    "warning: outcome column sums to ~0 (mean-centered data?); \
                     attribution and coefficients skipped, shares reported"
                );
            }
            Err(other) => return Err(other),
        },
        None => {
            eprintln!("warning: total importance is zero; shares are undefined");
        }
    }

    print_regress_tables(
        &dataset,
        &importance.values,
        importance.shares.as_deref(),
        attributed.as_deref(),
        efficiency.as_deref(),
        coefficients.as_ref(),
        table.full_r_squared(),
    );

    if let Some(path) = &config.emit_fitted {
        match &prediction {
            Some(prediction) => write_fitted_series(&dataset, prediction, path)?,
            None => eprintln!("warning: no coefficients, fitted series not written"),
        }
    }

    if let Some(path) = &config.output {
        let metadata = ReportMetadata::new(
            "regress",
            &config.input,
            dataset.partners(),
            Some(dataset.rows()),
            config.deterministic,
        );
        let doc = ReportDocument::for_regression(
            metadata,
            &importance,
            attributed.as_deref(),
            efficiency.as_deref(),
            outcome_total,
            coefficients.as_ref(),
            config.emit_r2_table.then_some(&table),
            table.full_r_squared(),
        );
        write_report(&doc, path, config.output_format)?;
    }
    Ok(())
}

/// Spend CSV: header row, then `partner,spend` rows. Partners without a
/// row spend 0; unknown partners are an error.
fn load_spend_csv(path: &std::path::Path, players: &[PlayerId]) -> Result<Vec<f64>> {
    let content = std::fs::read_to_string(path)?;
    let mut lines = content.lines();
    if lines.next().is_none() {
        return Err(Error::HeaderMissing("spend file is empty".to_string()));
    }
    let mut spend = vec![0.0; players.len()];
    for (index, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = index + 1;
        let (name, amount) = line.split_once(',').ok_or_else(|| Error::ParseError {
            row,
            column: "spend".to_string(),
            message: "expected partner,spend".to_string(),
        })?;
        let name = name.trim();
        let position = players
            .iter()
            .position(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownPlayer {
                name: name.to_string(),
            })?;
        spend[position] = amount
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::ParseError {
                row,
                column: "spend".to_string(),
                message: format!("not a number: {:?}", amount.trim()),
            })?;
    }
    Ok(spend)
}

fn percent(share: f64) -> String {
    format!("{:.0}%", share * 100.0)
}

fn print_game_table(result: &GameShapleyResult) {
    let extrapolated = result.extrapolated.as_deref();
    println!("Shapley attribution (payoff utility)");
    let mut header = format!("{:<16} {:>16} {:>8}", "Player", "Shapley Value", "Share");
    if extrapolated.is_some() {
        header.push_str(&format!(" {:>18}", "Extrapolated"));
    }
    println!("{header}");
    for (i, player) in result.players.iter().enumerate() {
        let share = result
            .shares
            .as_ref()
            .map(|s| percent(s[i]))
            .unwrap_or_else(|| "-".to_string());
        let mut line = format!(
            "{:<16} {:>16.3} {:>8}",
            player.name(),
            result.values[i],
            share
        );
        if let Some(dollars) = extrapolated {
            line.push_str(&format!(" {:>18.3}", dollars[i]));
        }
        println!("{line}");
    }
    let mut total_line = format!(
        "{:<16} {:>16.3} {:>8}",
        "Total",
        result.total_value(),
        if result.shares.is_some() { "100%" } else { "-" }
    );
    if let Some(dollars) = extrapolated {
        let sum: f64 = dollars.iter().sum();
        total_line.push_str(&format!(" {:>18.3}", sum));
    }
    println!("{total_line}");
}

fn print_regress_tables(
    dataset: &PartnerDataset,
    values: &[f64],
    shares: Option<&[f64]>,
    attributed: Option<&[f64]>,
    efficiency: Option<&[f64]>,
    coefficients: Option<&crate::regression::CoefficientSet>,
    full_r2: f64,
) {
    println!("Partner importance (R\u{b2} utility, zero-intercept fits)");
    let mut header = format!("{:<16} {:>14} {:>8}", "Partner", "Shapley Value", "Share");
    if attributed.is_some() {
        header.push_str(&format!(" {:>18}", "Attributed"));
    }
    if efficiency.is_some() {
        header.push_str(&format!(" {:>14}", "Cost/Outcome"));
    }
    println!("{header}");
    for (i, partner) in dataset.partners().iter().enumerate() {
        let share = shares
            .map(|s| percent(s[i]))
            .unwrap_or_else(|| "-".to_string());
        let mut line = format!("{:<16} {:>14.3} {:>8}", partner.name(), values[i], share);
        if let Some(attributed) = attributed {
            line.push_str(&format!(" {:>18.3}", attributed[i]));
        }
        if let Some(efficiency) = efficiency {
            line.push_str(&format!(" {:>14.3}", efficiency[i]));
        }
        println!("{line}");
    }
    let total: f64 = values.iter().sum();
    let mut line = format!(
        "{:<16} {:>14.3} {:>8}",
        "Total",
        total,
        if shares.is_some() { "100%" } else { "-" }
    );
    if let Some(attributed) = attributed {
        let sum: f64 = attributed.iter().sum();
        line.push_str(&format!(" {:>18.3}", sum));
    }
    println!("{line}");
    println!("Full-coalition R\u{b2}: {full_r2:.3}");

    if let Some(set) = coefficients {
        println!();
        println!("Coefficients (zero intercept, raw columns)");
        println!("{:<16} {:>14}", "Partner", "Beta");
        for (i, partner) in dataset.partners().iter().enumerate() {
            println!("{:<16} {:>14.5}", partner.name(), set.beta[i]);
        }
        let ols = &set.comparison_ols;
        let rendered: Vec<String> = ols.coefficients.iter().map(|c| format!("{c:.3}")).collect();
        println!(
            "Comparison OLS: intercept {:.3}, coefficients [{}], R\u{b2} {:.3}",
            ols.intercept,
            rendered.join(", "),
            ols.r_squared
        );
    }
}
