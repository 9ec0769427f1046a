//! Shapley value regression: enumerate all coalitions of partners, fit each
//! one, use R² as the utility in the Shapley formula, normalize into shares,
//! attribute the outcome total, and derive nonnegative coefficients.
//!
//! Importance comes from standardized zero-intercept fits; attribution and
//! coefficient denominators use the raw columns (the outcome total of
//! mean-centered data is ~0 and cannot be attributed).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{compute_shares, solve_breakdowns};
use crate::least_squares::{
    fit_with_intercept, fit_zero_intercept, standardize, standardize_vector, FitResult,
};
use crate::model::{
    Coalition, CoalitionPayoffTable, PartnerDataset, PlayerId, ShapleyBreakdown, MAX_PARTNERS,
};

/// Above this partner count the CLI warns about the 2^n sweep cost.
pub const SOFT_PARTNER_LIMIT: usize = 15;

/// Marginal R² contributions below this are a numerical failure: nested
/// least-squares fits cannot lose R², so a genuinely negative marginal
/// means the solver broke.
pub const NEGATIVE_MARGINAL_TOL: f64 = 1e-10;

/// All 2^n coalitions in size-then-lexicographic order, empty set first.
pub fn enumerate_coalitions(n: usize) -> Result<Vec<Coalition>> {
    if n == 0 {
        return Err(Error::EmptyPlayerList);
    }
    if n > MAX_PARTNERS {
        return Err(Error::TooManyPartners {
            n,
            max: MAX_PARTNERS,
        });
    }
    Ok(Coalition::enumerate(n))
}

/// R² per coalition, indexed by canonical subset. Complete by construction:
/// all 2^n subsets present, empty coalition pinned to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionR2Table {
    players: Vec<PlayerId>,
    r2: Vec<f64>,
}

impl CoalitionR2Table {
    /// Wraps a dense mask-indexed R² vector (length 2^n, entry 0 = 0).
    pub fn new(players: Vec<PlayerId>, r2: Vec<f64>) -> Result<Self> {
        if players.is_empty() {
            return Err(Error::EmptyPlayerList);
        }
        if players.len() > MAX_PARTNERS {
            return Err(Error::TooManyPartners {
                n: players.len(),
                max: MAX_PARTNERS,
            });
        }
        if r2.len() != 1 << players.len() {
            return Err(Error::MissingCoalition {
                coalition: format!(
                    "dense table needs {} entries, got {}",
                    1 << players.len(),
                    r2.len()
                ),
            });
        }
        if r2[0].abs() > 1e-12 {
            return Err(Error::NumericalFailure {
                details: format!("empty coalition must have R² = 0, got {}", r2[0]),
            });
        }
        // NaN would slip past the marginal checks (all comparisons false).
        if let Some(mask) = r2.iter().position(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure {
                details: format!(
                    "non-finite R² for coalition {}",
                    Coalition(mask as u32).label(&players)
                ),
            });
        }
        Ok(CoalitionR2Table { players, r2 })
    }

    /// Builds a table from sparse (coalition, R²) rows; every non-empty
    /// subset must appear exactly once.
    pub fn from_rows(players: Vec<PlayerId>, rows: &[(Coalition, f64)]) -> Result<Self> {
        let table = CoalitionPayoffTable::new(players, 0.0, rows.iter().copied())?;
        let n = table.player_count();
        let r2 = (0..1u32 << n)
            .map(|mask| table.payoff(Coalition(mask)))
            .collect();
        Ok(CoalitionR2Table {
            players: table.players().to_vec(),
            r2,
        })
    }

    pub fn players(&self) -> &[PlayerId] {
        &self.players
    }

    pub fn r_squared(&self, coalition: Coalition) -> f64 {
        self.r2[coalition.0 as usize]
    }

    /// R² of the grand coalition.
    pub fn full_r_squared(&self) -> f64 {
        self.r_squared(Coalition::full(self.players.len()))
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.r2
    }

    /// (coalition, R²) rows in size-then-lexicographic order.
    pub fn rows(&self) -> Vec<(Coalition, f64)> {
        Coalition::enumerate(self.players.len())
            .into_iter()
            .map(|c| (c, self.r_squared(c)))
            .collect()
    }

    /// The table viewed as a cooperative game with baseline 0. This is the
    /// bridge the permutation oracle uses to cross-check the importance pass.
    pub fn as_game(&self) -> CoalitionPayoffTable {
        let rows = (1..self.r2.len()).map(|mask| (Coalition(mask as u32), self.r2[mask]));
        CoalitionPayoffTable::new(self.players.clone(), 0.0, rows).expect("dense table is complete")
    }
}

/// Fits every coalition of partners on standardized columns and collects
/// the R² utility table. Each of the 2^n fits runs exactly once; fits are
/// independent and run in parallel, assembled in mask order so the result
/// does not depend on the worker count.
pub fn coalition_r2_sweep(dataset: &PartnerDataset) -> Result<CoalitionR2Table> {
    let n = dataset.partner_count();
    if n > MAX_PARTNERS {
        return Err(Error::TooManyPartners {
            n,
            max: MAX_PARTNERS,
        });
    }
    let (std_columns, _) = standardize(dataset.columns())?;
    let std_y = standardize_vector(dataset.outcome())?;

    let r2 = (0u32..1 << n)
        .into_par_iter()
        .map(|mask| {
            if mask == 0 {
                return Ok(0.0);
            }
            let coalition = Coalition(mask);
            let columns: Vec<Vec<f64>> = coalition
                .members()
                .map(|i| std_columns[i].clone())
                .collect();
            Ok(fit_zero_intercept(&columns, &std_y)?.r_squared)
        })
        .collect::<Result<Vec<f64>>>()?;

    CoalitionR2Table::new(dataset.partners().to_vec(), r2)
}

/// Shapley importance of every partner under the R² utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceResult {
    pub players: Vec<PlayerId>,
    pub breakdowns: Vec<ShapleyBreakdown>,
    /// Shapley value per partner; sums to the full-coalition R².
    pub values: Vec<f64>,
    /// values / Σ values; None when the total is not positive.
    pub shares: Option<Vec<f64>>,
}

/// Applies the Shapley formula to an R² table: φ_i = Σ_S w(|S|,n)·(r²(S∪{i}) − r²(S)).
///
/// Any marginal below −1e-10 aborts with a diagnostics dump naming the worst
/// offenders: nested zero-intercept fits can lose that much R² only through
/// a solver failure, and a silently wrong importance split is worse than an
/// error.
pub fn shapley_importance(table: &CoalitionR2Table) -> Result<ImportanceResult> {
    let breakdowns = solve_breakdowns(table.players(), table.values());

    let mut violations: Vec<String> = Vec::new();
    for breakdown in &breakdowns {
        for row in &breakdown.rows {
            if row.marginal < -NEGATIVE_MARGINAL_TOL {
                violations.push(format!(
                    "player {} joining {}: marginal {:.3e}",
                    breakdown.player,
                    row.complement.label(table.players()),
                    row.marginal
                ));
            }
        }
    }
    if !violations.is_empty() {
        violations.truncate(8);
        return Err(Error::NumericalFailure {
            details: format!(
                "negative R² marginal contribution(s): {}",
                violations.join("; ")
            ),
        });
    }

    let values: Vec<f64> = breakdowns.iter().map(|b| b.total).collect();
    let shares = compute_shares(&values);
    Ok(ImportanceResult {
        players: table.players().to_vec(),
        breakdowns,
        values,
        shares,
    })
}

/// Splits the raw outcome total across partners by share: O_i = Σy · share_i.
/// A total below 1e-12·m is the signature of mean-centered data, which has
/// no attributable scale.
pub fn attribute_outcome(shares: &[f64], outcome: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = outcome.iter().sum();
    if total.abs() < 1e-12 * outcome.len() as f64 {
        return Err(Error::ZeroOutcomeTotal);
    }
    Ok(shares.iter().map(|s| s * total).collect())
}

/// Per-partner coefficients from the attribution rule β_i = O_i / Σ_j x_{i,j},
/// plus an intercept OLS fit for comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub players: Vec<PlayerId>,
    pub beta: Vec<f64>,
    pub attributed_total: Vec<f64>,
    pub comparison_ols: FitResult,
}

/// Derives coefficients over the RAW regressor columns. A partner column
/// whose sum is ~0 (possible on mean-centered data) has no defined
/// coefficient and is an error rather than a guess.
pub fn derive_coefficients(attributed: &[f64], dataset: &PartnerDataset) -> Result<CoefficientSet> {
    let n = dataset.partner_count();
    if attributed.len() != n {
        return Err(Error::DimensionMismatch {
            left: attributed.len(),
            right: n,
        });
    }
    let mut beta = Vec::with_capacity(n);
    for (i, outcome_share) in attributed.iter().enumerate() {
        let column_sum = dataset.column_sum(i);
        let magnitude: f64 = dataset.column(i).iter().map(|v| v.abs()).sum();
        if column_sum.abs() <= 1e-12 * magnitude.max(1.0) {
            return Err(Error::ZeroColumnSum {
                partner: dataset.partners()[i].name().to_string(),
            });
        }
        beta.push(outcome_share / column_sum);
    }
    let comparison_ols = fit_with_intercept(dataset.columns(), dataset.outcome())?;
    Ok(CoefficientSet {
        players: dataset.partners().to_vec(),
        beta,
        attributed_total: attributed.to_vec(),
        comparison_ols,
    })
}

/// Fitted series ŷ_j = Σ_i β_i·x_{i,j} and the per-partner contribution
/// series behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub fitted: Vec<f64>,
    /// `contributions[partner][period]` = β_i · x_{i,j}
    pub contributions: Vec<Vec<f64>>,
}

pub fn predict_series(coefficients: &CoefficientSet, dataset: &PartnerDataset) -> Prediction {
    let m = dataset.rows();
    let n = dataset.partner_count();
    let contributions: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            dataset
                .column(i)
                .iter()
                .map(|x| coefficients.beta[i] * x)
                .collect()
        })
        .collect();
    let fitted = (0..m)
        .map(|j| contributions.iter().map(|c| c[j]).sum())
        .collect();
    Prediction {
        fitted,
        contributions,
    }
}

/// Cost per unit outcome: spend_i / O_i. Partners without spend cost 0;
/// spend against zero attribution is non-computable, not infinite.
pub fn partner_efficiency(
    attributed: &[f64],
    spend: &[f64],
    players: &[PlayerId],
) -> Result<Vec<f64>> {
    if attributed.len() != spend.len() {
        return Err(Error::DimensionMismatch {
            left: spend.len(),
            right: attributed.len(),
        });
    }
    attributed
        .iter()
        .zip(spend)
        .zip(players)
        .map(|((o, s), player)| {
            if *s == 0.0 {
                Ok(0.0)
            } else if *o <= 0.0 {
                Err(Error::ZeroAttribution {
                    partner: player.name().to_string(),
                })
            } else {
                Ok(s / o)
            }
        })
        .collect()
}
