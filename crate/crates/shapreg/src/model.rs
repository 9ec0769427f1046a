//! Domain types shared by the game solver and the regression pipeline.
//!
//! Everything here is immutable after construction and validated on the way
//! in, so downstream code can assume complete payoff tables, gap-free
//! datasets, and stable player ordering (declaration order, everywhere).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on exact coalition enumeration (2^n fits / weights).
pub const MAX_PARTNERS: usize = 25;

/// A named player (marketing partner). Ordering of players is their
/// declaration order and is preserved in every output.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(String);

impl PlayerId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(Error::EmptyPlayerName);
        }
        Ok(PlayerId(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for PlayerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Validates a player list: non-empty, no duplicates.
pub fn validate_players(names: &[String]) -> Result<Vec<PlayerId>> {
    if names.is_empty() {
        return Err(Error::EmptyPlayerList);
    }
    let mut players = Vec::with_capacity(names.len());
    for name in names {
        let id = PlayerId::new(name.clone())?;
        if players.contains(&id) {
            return Err(Error::DuplicatePlayer { name: name.clone() });
        }
        players.push(id);
    }
    Ok(players)
}

/// A subset of players, canonicalized as a bitmask over player indices
/// (bit i = player i in declaration order). Deterministic map key and
/// stable output order come for free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(pub u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn full(n: usize) -> Coalition {
        Coalition(((1u64 << n) - 1) as u32)
    }

    pub fn contains(self, player: usize) -> bool {
        self.0 >> player & 1 == 1
    }

    pub fn with(self, player: usize) -> Coalition {
        Coalition(self.0 | 1 << player)
    }

    pub fn without(self, player: usize) -> Coalition {
        Coalition(self.0 & !(1 << player))
    }

    pub fn size(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Member player indices in ascending order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 >> i & 1 == 1)
    }

    pub fn member_names(self, players: &[PlayerId]) -> Vec<String> {
        self.members()
            .map(|i| players[i].name().to_string())
            .collect()
    }

    /// `{A,B}`-style label used in error messages and human tables.
    pub fn label(self, players: &[PlayerId]) -> String {
        format!("{{{}}}", self.member_names(players).join(","))
    }

    /// All 2^n subsets in size-then-lexicographic order, empty set first.
    /// Lexicographic compares the sorted member index lists.
    pub fn enumerate(n: usize) -> Vec<Coalition> {
        let mut out = Vec::with_capacity(1 << n);
        for size in 0..=n {
            combinations_into(n, size, &mut out);
        }
        out
    }
}

/// Appends all size-`k` subsets of `{0..n}` in lexicographic order.
fn combinations_into(n: usize, k: usize, out: &mut Vec<Coalition>) {
    fn rec(n: usize, k: usize, start: usize, acc: Coalition, out: &mut Vec<Coalition>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..=n - k {
            rec(n, k - 1, i + 1, acc.with(i), out);
        }
    }
    rec(n, k, 0, Coalition::EMPTY, out);
}

/// One raw subset/payoff row, as parsed from a payoff file. An empty
/// partner list (or the literal "NA") denotes the baseline row.
#[derive(Debug, Clone)]
pub struct RawPayoffRow {
    pub partners: Vec<String>,
    pub payoff: f64,
}

/// The characteristic function of a cooperative game: a payoff for every
/// one of the 2^n subsets of players, with index 0 holding the
/// empty-coalition baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionPayoffTable {
    players: Vec<PlayerId>,
    payoffs: Vec<f64>,
}

impl CoalitionPayoffTable {
    /// Builds a table from per-subset payoffs plus the baseline.
    /// Every one of the 2^n − 1 non-empty subsets must appear exactly once.
    pub fn new(
        players: Vec<PlayerId>,
        baseline: f64,
        rows: impl IntoIterator<Item = (Coalition, f64)>,
    ) -> Result<Self> {
        if players.is_empty() {
            return Err(Error::EmptyPlayerList);
        }
        let n = players.len();
        if n > MAX_PARTNERS {
            return Err(Error::TooManyPartners {
                n,
                max: MAX_PARTNERS,
            });
        }
        if !baseline.is_finite() {
            return Err(Error::NonFinitePayoff {
                coalition: "{} (baseline)".to_string(),
            });
        }
        let mut slots: Vec<Option<f64>> = vec![None; 1 << n];
        slots[0] = Some(baseline);
        for (coalition, payoff) in rows {
            if coalition.is_empty() {
                return Err(Error::DuplicateCoalition {
                    coalition: "{} (baseline)".to_string(),
                });
            }
            if !payoff.is_finite() {
                return Err(Error::NonFinitePayoff {
                    coalition: coalition.label(&players),
                });
            }
            let slot = &mut slots[coalition.0 as usize];
            if slot.is_some() {
                return Err(Error::DuplicateCoalition {
                    coalition: coalition.label(&players),
                });
            }
            *slot = Some(payoff);
        }
        let mut payoffs = Vec::with_capacity(slots.len());
        for (mask, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(p) => payoffs.push(p),
                None => {
                    return Err(Error::MissingCoalition {
                        coalition: Coalition(mask as u32).label(&players),
                    })
                }
            }
        }
        Ok(CoalitionPayoffTable { players, payoffs })
    }

    pub fn players(&self) -> &[PlayerId] {
        &self.players
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn payoff(&self, coalition: Coalition) -> f64 {
        self.payoffs[coalition.0 as usize]
    }

    pub fn baseline(&self) -> f64 {
        self.payoffs[0]
    }

    /// Payoff of the grand coalition v(N).
    pub fn grand_payoff(&self) -> f64 {
        self.payoff(Coalition::full(self.players.len()))
    }

    /// Pointwise sum of two games over the same players (v1 + v2).
    pub fn add(&self, other: &CoalitionPayoffTable) -> Result<CoalitionPayoffTable> {
        if self.players != other.players {
            return Err(Error::DimensionMismatch {
                left: self.players.len(),
                right: other.players.len(),
            });
        }
        let payoffs = self
            .payoffs
            .iter()
            .zip(&other.payoffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CoalitionPayoffTable {
            players: self.players.clone(),
            payoffs,
        })
    }
}

/// Resolves named subset/payoff rows against a player list and builds a
/// complete table. Baseline rows have an empty partner list or "NA".
pub fn validate_payoff_table(
    player_names: &[String],
    rows: &[RawPayoffRow],
) -> Result<CoalitionPayoffTable> {
    let players = validate_players(player_names)?;
    let mut baseline: Option<f64> = None;
    let mut resolved = Vec::with_capacity(rows.len());
    for row in rows {
        let is_baseline = row.partners.is_empty()
            || (row.partners.len() == 1 && row.partners[0].eq_ignore_ascii_case("na"));
        if is_baseline {
            if baseline.is_some() {
                return Err(Error::DuplicateCoalition {
                    coalition: "{} (baseline)".to_string(),
                });
            }
            baseline = Some(row.payoff);
            continue;
        }
        let mut coalition = Coalition::EMPTY;
        for name in &row.partners {
            let idx = players
                .iter()
                .position(|p| p.name() == name)
                .ok_or_else(|| Error::UnknownPlayer { name: name.clone() })?;
            coalition = coalition.with(idx);
        }
        resolved.push((coalition, row.payoff));
    }
    let baseline = baseline.ok_or_else(|| Error::MissingCoalition {
        coalition: "{} (baseline)".to_string(),
    })?;
    CoalitionPayoffTable::new(players, baseline, resolved)
}

/// A raw parsed dataset before validation: cells may be missing (None)
/// and will be filled with zero.
#[derive(Debug, Clone)]
pub struct RawDataset {
    pub dates: Vec<String>,
    pub partner_names: Vec<String>,
    /// Row-major regressor cells, one inner Vec per period.
    pub cells: Vec<Vec<Option<f64>>>,
    pub outcome: Vec<Option<f64>>,
}

/// Time-series design matrix: one regressor column per partner plus an
/// outcome column, stored column-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartnerDataset {
    dates: Vec<String>,
    partners: Vec<PlayerId>,
    columns: Vec<Vec<f64>>,
    outcome: Vec<f64>,
}

impl PartnerDataset {
    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn partners(&self) -> &[PlayerId] {
        &self.partners
    }

    /// Number of periods m.
    pub fn rows(&self) -> usize {
        self.outcome.len()
    }

    /// Number of partners n.
    pub fn partner_count(&self) -> usize {
        self.partners.len()
    }

    pub fn column(&self, partner: usize) -> &[f64] {
        &self.columns[partner]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    pub fn outcome_total(&self) -> f64 {
        self.outcome.iter().sum()
    }

    pub fn column_sum(&self, partner: usize) -> f64 {
        self.columns[partner].iter().sum()
    }
}

/// Typed-dataset construction: fills missing cells with zero, rejects
/// non-finite cells, constant partner columns, and too-short series.
pub fn validate_dataset(raw: RawDataset) -> Result<PartnerDataset> {
    let partners = validate_players(&raw.partner_names)?;
    let n = partners.len();
    let m = raw.dates.len();
    if raw.cells.len() != m || raw.outcome.len() != m {
        return Err(Error::DimensionMismatch {
            left: raw.cells.len(),
            right: m,
        });
    }
    if m <= n {
        return Err(Error::TooFewRows {
            rows: m,
            partners: n,
        });
    }

    let mut columns = vec![vec![0.0; m]; n];
    for (r, row) in raw.cells.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                left: row.len(),
                right: n,
            });
        }
        for (c, cell) in row.iter().enumerate() {
            let value = cell.unwrap_or(0.0);
            if !value.is_finite() {
                return Err(Error::NonNumericCell {
                    row: r + 1,
                    column: partners[c].name().to_string(),
                });
            }
            columns[c][r] = value;
        }
    }
    let mut outcome = vec![0.0; m];
    for (r, cell) in raw.outcome.iter().enumerate() {
        let value = cell.unwrap_or(0.0);
        if !value.is_finite() {
            return Err(Error::NonNumericCell {
                row: r + 1,
                column: "outcome".to_string(),
            });
        }
        outcome[r] = value;
    }

    for (c, column) in columns.iter().enumerate() {
        if is_constant(column) {
            return Err(Error::ConstantColumn {
                column: partners[c].name().to_string(),
            });
        }
    }

    Ok(PartnerDataset {
        dates: raw.dates,
        partners,
        columns,
        outcome,
    })
}

pub(crate) fn is_constant(column: &[f64]) -> bool {
    column.windows(2).all(|w| w[0] == w[1])
}

/// One line of a per-player Shapley worksheet: a coalition containing the
/// player, its complement, both utilities, the positional weight, and the
/// weighted marginal contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub coalition: Coalition,
    pub complement: Coalition,
    pub utility_with: f64,
    pub utility_without: f64,
    pub weight: f64,
    pub marginal: f64,
    pub weighted_contribution: f64,
}

/// Full worksheet for one player over the 2^(n−1) coalitions containing it.
/// Row weights sum to one; `total` is the player's Shapley value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyBreakdown {
    pub player: PlayerId,
    pub rows: Vec<BreakdownRow>,
    pub total: f64,
}

/// Per-player importance result: Shapley value, normalized share, and
/// (when the outcome scale is meaningful) the attributed outcome total
/// and optional cost per unit outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub player: PlayerId,
    pub shapley_value: f64,
    pub normalized_share: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attributed_outcome: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_per_outcome: Option<f64>,
}

/// Importance summary across all players, in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub entries: Vec<ImportanceEntry>,
    /// Utility of the grand coalition (game payoff or full-model R²).
    pub utility_full: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome_total: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn dma_rows() -> Vec<RawPayoffRow> {
        let row = |partners: &[&str], payoff: f64| RawPayoffRow {
            partners: names(partners),
            payoff,
        };
        vec![
            row(&["NA"], 1000.0),
            row(&["Disney"], 10_000.0),
            row(&["ESPN"], 5_000.0),
            row(&["CNN"], 12_000.0),
            row(&["ESPN", "CNN"], 15_000.0),
            row(&["Disney", "ESPN"], 12_000.0),
            row(&["Disney", "CNN"], 20_000.0),
            row(&["Disney", "ESPN", "CNN"], 25_000.0),
        ]
    }

    #[test]
    fn dma_payoff_table_is_valid() {
        let table = validate_payoff_table(&names(&["Disney", "ESPN", "CNN"]), &dma_rows()).unwrap();
        assert_eq!(table.player_count(), 3);
        assert_eq!(table.baseline(), 1000.0);
        assert_eq!(table.grand_payoff(), 25_000.0);
        // {Disney, CNN} = bits 0 and 2
        assert_eq!(table.payoff(Coalition(0b101)), 20_000.0);
    }

    #[test]
    fn single_player_game_is_valid() {
        let rows = vec![
            RawPayoffRow {
                partners: vec![],
                payoff: 0.0,
            },
            RawPayoffRow {
                partners: names(&["A"]),
                payoff: 5.0,
            },
        ];
        let table = validate_payoff_table(&names(&["A"]), &rows).unwrap();
        assert_eq!(table.baseline(), 0.0);
        assert_eq!(table.grand_payoff(), 5.0);
    }

    #[test]
    fn missing_coalition_is_named() {
        let mut rows = dma_rows();
        rows.retain(|r| r.partners != names(&["ESPN", "CNN"]));
        let err = validate_payoff_table(&names(&["Disney", "ESPN", "CNN"]), &rows).unwrap_err();
        assert!(
            err.to_string().contains("MissingCoalition: {ESPN,CNN}"),
            "got: {err}"
        );
    }

    #[test]
    fn duplicate_coalition_rejected() {
        let mut rows = dma_rows();
        rows.push(RawPayoffRow {
            partners: names(&["CNN", "Disney"]),
            payoff: 1.0,
        });
        let err = validate_payoff_table(&names(&["Disney", "ESPN", "CNN"]), &rows).unwrap_err();
        assert!(
            matches!(err, Error::DuplicateCoalition { .. }),
            "got: {err}"
        );
    }

    #[test]
    fn non_finite_payoffs_rejected() {
        // "NaN" and "inf" parse as floats, so the table must catch them.
        let mut rows = dma_rows();
        rows[3].payoff = f64::NAN;
        let err = validate_payoff_table(&names(&["Disney", "ESPN", "CNN"]), &rows).unwrap_err();
        assert!(matches!(err, Error::NonFinitePayoff { .. }), "got: {err}");

        let mut rows = dma_rows();
        rows[0].payoff = f64::INFINITY;
        let err = validate_payoff_table(&names(&["Disney", "ESPN", "CNN"]), &rows).unwrap_err();
        assert!(matches!(err, Error::NonFinitePayoff { .. }), "got: {err}");
    }

    #[test]
    fn missing_baseline_reported_as_missing_coalition() {
        let mut rows = dma_rows();
        rows.remove(0);
        let err = validate_payoff_table(&names(&["Disney", "ESPN", "CNN"]), &rows).unwrap_err();
        assert!(matches!(err, Error::MissingCoalition { .. }), "got: {err}");
    }

    #[test]
    fn empty_player_list_rejected() {
        let err = validate_payoff_table(&[], &[]).unwrap_err();
        assert!(matches!(err, Error::EmptyPlayerList));
    }

    #[test]
    fn enumerate_is_size_then_lex() {
        let subsets = Coalition::enumerate(3);
        let got: Vec<u32> = subsets.iter().map(|c| c.0).collect();
        // ∅, A, B, C, AB, AC, BC, ABC
        assert_eq!(
            got,
            vec![0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111]
        );
    }

    fn raw_dataset(m: usize, n: usize) -> RawDataset {
        RawDataset {
            dates: (0..m).map(|i| format!("w{i}")).collect(),
            partner_names: (0..n).map(|i| format!("P{i}")).collect(),
            cells: (0..m)
                .map(|r| (0..n).map(|c| Some((r * n + c) as f64)).collect())
                .collect(),
            outcome: (0..m).map(|r| Some(r as f64 + 1.0)).collect(),
        }
    }

    #[test]
    fn dataset_missing_cells_become_zero() {
        let mut raw = raw_dataset(6, 2);
        raw.cells[3][1] = None;
        let ds = validate_dataset(raw).unwrap();
        assert_eq!(ds.column(1)[3], 0.0);
    }

    #[test]
    fn constant_column_rejected() {
        let mut raw = raw_dataset(6, 2);
        for row in &mut raw.cells {
            row[0] = Some(0.0);
        }
        let err = validate_dataset(raw).unwrap_err();
        assert!(
            matches!(err, Error::ConstantColumn { ref column } if column == "P0"),
            "got: {err}"
        );
    }

    #[test]
    fn too_few_rows_rejected() {
        let err = validate_dataset(raw_dataset(4, 5)).unwrap_err();
        assert!(matches!(
            err,
            Error::TooFewRows {
                rows: 4,
                partners: 5
            }
        ));
    }

    #[test]
    fn non_numeric_cell_rejected() {
        let mut raw = raw_dataset(6, 2);
        raw.cells[2][1] = Some(f64::NAN);
        let err = validate_dataset(raw).unwrap_err();
        assert!(
            matches!(err, Error::NonNumericCell { row: 3, ref column } if column == "P1"),
            "got: {err}"
        );
    }

    #[test]
    fn duplicate_partner_rejected() {
        let mut raw = raw_dataset(6, 2);
        raw.partner_names[1] = "P0".to_string();
        let err = validate_dataset(raw).unwrap_err();
        assert!(matches!(err, Error::DuplicatePlayer { .. }));
    }

    #[test]
    fn player_order_is_declaration_order() {
        let table = validate_payoff_table(&names(&["Disney", "ESPN", "CNN"]), &dma_rows()).unwrap();
        let got: Vec<&str> = table.players().iter().map(|p| p.name()).collect();
        assert_eq!(got, vec!["Disney", "ESPN", "CNN"]);
    }
}
