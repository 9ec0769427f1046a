//! Exact Shapley value computation from a complete characteristic function,
//! plus a permutation-average oracle used as an independent cross-check.
//!
//! The positional weight |S|!(n−|S|−1)!/n! is computed as 1/(n·C(n−1,|S|)),
//! which stays exact in f64 for every n up to the enumeration cap (n! itself
//! overflows 64-bit integers at n = 21).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BreakdownRow, Coalition, CoalitionPayoffTable, PlayerId, ShapleyBreakdown};

/// Player-count cap for full n! permutation enumeration.
pub const MAX_ORACLE_PLAYERS: usize = 8;

/// Tolerance on the efficiency identity Σφ = v(N) − v(∅), in units of the
/// largest payoff magnitude.
pub const EFFICIENCY_TOL: f64 = 1e-9;

/// Shapley positional weight for a coalition of size `s` joined by one more
/// player, in a game of `n` players.
pub fn shapley_weight(s: usize, n: usize) -> Result<f64> {
    if n == 0 || s >= n {
        return Err(Error::OutOfRange { s, n });
    }
    Ok(1.0 / (n as f64 * binomial(n - 1, s)))
}

/// C(n, k) as f64; exact for the small n used here. Requires k ≤ n.
fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Per-player Shapley values and shares for a cooperative game, with the
/// full per-player worksheets behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameShapleyResult {
    pub players: Vec<PlayerId>,
    pub breakdowns: Vec<ShapleyBreakdown>,
    /// Shapley value per player, declaration order.
    pub values: Vec<f64>,
    /// values / Σ values; None when the total is not positive.
    pub shares: Option<Vec<f64>>,
    /// Shares scaled to a channel total, when one was applied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrapolated: Option<Vec<f64>>,
}

impl GameShapleyResult {
    pub fn total_value(&self) -> f64 {
        self.values.iter().sum()
    }

    /// True when any player carries a negative Shapley value (possible for
    /// arbitrary payoff tables, e.g. a test market selling below baseline).
    pub fn has_negative_values(&self) -> bool {
        self.values.iter().any(|v| *v < 0.0)
    }
}

/// Worksheet for every player: all coalitions containing the player in
/// size-then-lexicographic order, marginals against the complement
/// (baseline when the complement is empty), and positional weights.
pub(crate) fn solve_breakdowns(players: &[PlayerId], utility: &[f64]) -> Vec<ShapleyBreakdown> {
    let n = players.len();
    players
        .iter()
        .enumerate()
        .map(|(i, player)| {
            let mut rows = Vec::with_capacity(1 << (n - 1));
            // Complements enumerated size-then-lex yield coalitions in
            // size-then-lex order as well (inserting the same player into
            // sorted index lists preserves lexicographic order).
            for complement in Coalition::enumerate(n) {
                if complement.contains(i) {
                    continue;
                }
                let coalition = complement.with(i);
                let utility_with = utility[coalition.0 as usize];
                let utility_without = utility[complement.0 as usize];
                let weight = shapley_weight(complement.size(), n).expect("size < n");
                let marginal = utility_with - utility_without;
                rows.push(BreakdownRow {
                    coalition,
                    complement,
                    utility_with,
                    utility_without,
                    weight,
                    marginal,
                    weighted_contribution: weight * marginal,
                });
            }
            let total = rows.iter().map(|r| r.weighted_contribution).sum();
            ShapleyBreakdown {
                player: player.clone(),
                rows,
                total,
            }
        })
        .collect()
}

/// Exact Shapley values for every player of a complete payoff table.
///
/// Marginals against the empty coalition subtract the baseline v(∅), so the
/// values satisfy Σφ = v(N) − v(∅).
pub fn shapley_values(game: &CoalitionPayoffTable) -> GameShapleyResult {
    let players = game.players().to_vec();
    let n = players.len();
    let utility: Vec<f64> = (0..1u64 << n)
        .map(|mask| game.payoff(Coalition(mask as u32)))
        .collect();
    let breakdowns = solve_breakdowns(&players, &utility);
    let values: Vec<f64> = breakdowns.iter().map(|b| b.total).collect();

    let expected = game.grand_payoff() - game.baseline();
    let total: f64 = values.iter().sum();
    // Tolerance scales with the payoff magnitudes: the identity cancels
    // v(S) terms pairwise, so rounding is absolute in units of max |v|.
    let scale = utility.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    debug_assert!(
        (total - expected).abs() <= EFFICIENCY_TOL * scale,
        "efficiency violated: {total} vs {expected}"
    );

    let shares = compute_shares(&values);
    GameShapleyResult {
        players,
        breakdowns,
        values,
        shares,
        extrapolated: None,
    }
}

pub(crate) fn compute_shares(values: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        Some(values.iter().map(|v| v / total).collect())
    } else {
        None
    }
}

/// Independent oracle: averages each player's marginal contribution over all
/// n! join orders. Capped at 8 players.
pub fn permutation_oracle(game: &CoalitionPayoffTable) -> Result<Vec<f64>> {
    let n = game.player_count();
    if n > MAX_ORACLE_PLAYERS {
        return Err(Error::TooManyPlayers {
            n,
            max: MAX_ORACLE_PLAYERS,
        });
    }
    let mut totals = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut count = 0u64;
    permute(&mut order, 0, &mut |perm| {
        count += 1;
        let mut joined = Coalition::EMPTY;
        let mut previous = game.baseline();
        for &player in perm {
            joined = joined.with(player);
            let current = game.payoff(joined);
            totals[player] += current - previous;
            previous = current;
        }
    });
    let factorial = count as f64;
    Ok(totals.into_iter().map(|t| t / factorial).collect())
}

fn permute(order: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == order.len() {
        visit(order);
        return;
    }
    for i in k..order.len() {
        order.swap(k, i);
        permute(order, k + 1, visit);
        order.swap(k, i);
    }
}

/// Scales shares up to a channel total (e.g. national-level dollars).
/// Uses unrounded shares, so the outputs sum to the total within fp.
pub fn extrapolate(result: &GameShapleyResult, channel_total: f64) -> Result<Vec<f64>> {
    match &result.shares {
        Some(shares) => Ok(shares.iter().map(|s| s * channel_total).collect()),
        None => Err(Error::DegenerateGame {
            total: result.total_value(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_payoff_table, RawPayoffRow};

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    pub(crate) fn dma_game() -> CoalitionPayoffTable {
        let row = |partners: &[&str], payoff: f64| RawPayoffRow {
            partners: names(partners),
            payoff,
        };
        validate_payoff_table(
            &names(&["Disney", "ESPN", "CNN"]),
            &[
                row(&[], 1000.0),
                row(&["Disney"], 10_000.0),
                row(&["ESPN"], 5_000.0),
                row(&["CNN"], 12_000.0),
                row(&["ESPN", "CNN"], 15_000.0),
                row(&["Disney", "ESPN"], 12_000.0),
                row(&["Disney", "CNN"], 20_000.0),
                row(&["Disney", "ESPN", "CNN"], 25_000.0),
            ],
        )
        .unwrap()
    }

    fn table_from_fn(player_names: &[&str], v: impl Fn(Coalition) -> f64) -> CoalitionPayoffTable {
        let players = crate::model::validate_players(&names(player_names)).unwrap();
        let n = players.len();
        let rows = (1..1u32 << n).map(|mask| (Coalition(mask), v(Coalition(mask))));
        CoalitionPayoffTable::new(players, v(Coalition::EMPTY), rows).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert!((shapley_weight(0, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((shapley_weight(2, 5).unwrap() - 0.033_333_333_333_333_33).abs() < 1e-15);
        assert_eq!(shapley_weight(0, 1).unwrap(), 1.0);
        assert!(matches!(
            shapley_weight(3, 3),
            Err(Error::OutOfRange { s: 3, n: 3 })
        ));
    }

    #[test]
    fn weights_stay_finite_at_the_cap() {
        // n = 25 would overflow n! in u64; the multiplicative form must not.
        for s in 0..25 {
            let w = shapley_weight(s, 25).unwrap();
            assert!(w.is_finite() && w > 0.0);
        }
    }

    #[test]
    fn weight_normalization() {
        // Over all coalitions containing a fixed player, weights sum to 1:
        // Σ_s C(n−1,s) · w(s,n) = 1.
        for n in 1..=10 {
            let sum: f64 = (0..n)
                .map(|s| binomial(n - 1, s) * shapley_weight(s, n).unwrap())
                .sum();
            assert!((sum - 1.0).abs() < 1e-12, "n={n}: {sum}");
        }
    }

    #[test]
    fn dma_values_match_worked_example() {
        let result = shapley_values(&dma_game());
        let expected = [26_500.0 / 3.0, 11_500.0 / 3.0, 34_000.0 / 3.0];
        for (got, want) in result.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        // Published rounded dollars.
        assert!((result.values[0] - 8833.0).abs() < 0.5);
        assert!((result.values[1] - 3833.0).abs() < 0.5);
        assert!((result.values[2] - 11333.0).abs() < 0.5);
    }

    #[test]
    fn dma_breakdown_weights_and_totals() {
        let result = shapley_values(&dma_game());
        for breakdown in &result.breakdowns {
            assert_eq!(breakdown.rows.len(), 4);
            let weight_sum: f64 = breakdown.rows.iter().map(|r| r.weight).sum();
            assert!((weight_sum - 1.0).abs() < 1e-12);
            let total: f64 = breakdown.rows.iter().map(|r| r.weighted_contribution).sum();
            assert!((total - breakdown.total).abs() < 1e-12);
            for row in &breakdown.rows {
                assert!((row.marginal - (row.utility_with - row.utility_without)).abs() < 1e-12);
            }
        }
        // Disney's first row marginal subtracts the baseline: 10000 − 1000.
        let disney = &result.breakdowns[0];
        assert_eq!(disney.rows[0].utility_without, 1000.0);
        assert_eq!(disney.rows[0].marginal, 9000.0);
    }

    #[test]
    fn symmetry_two_players() {
        let game = table_from_fn(&["A", "B"], |c| match c.0 {
            0b00 => 0.0,
            0b01 | 0b10 => 1.0,
            _ => 4.0,
        });
        let result = shapley_values(&game);
        assert!((result.values[0] - 2.0).abs() < 1e-12);
        assert!((result.values[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dummy_player_gets_zero() {
        // C adds nothing to any coalition.
        let game = table_from_fn(&["A", "B", "C"], |c| {
            let without_c = c.without(2);
            (without_c.size() * without_c.size()) as f64 * 10.0
        });
        let result = shapley_values(&game);
        assert!(result.values[2].abs() < 1e-12);
        let oracle = permutation_oracle(&game).unwrap();
        assert!(oracle[2].abs() < 1e-12);
    }

    #[test]
    fn additivity() {
        let g1 = table_from_fn(&["A", "B", "C"], |c| (c.0 as f64) * 3.0 + 1.0);
        let g2 = table_from_fn(&["A", "B", "C"], |c| (c.size() as f64).powi(2));
        let sum = g1.add(&g2).unwrap();
        let v1 = shapley_values(&g1).values;
        let v2 = shapley_values(&g2).values;
        let vs = shapley_values(&sum).values;
        for i in 0..3 {
            assert!((vs[i] - (v1[i] + v2[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn oracle_matches_dma() {
        let game = dma_game();
        let values = shapley_values(&game).values;
        let oracle = permutation_oracle(&game).unwrap();
        for (a, b) in values.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn oracle_single_player() {
        let game = table_from_fn(&["A"], |c| if c.is_empty() { 0.0 } else { 5.0 });
        assert_eq!(permutation_oracle(&game).unwrap(), vec![5.0]);
    }

    #[test]
    fn oracle_rejects_large_games() {
        let players: Vec<&str> = vec!["a", "b", "c", "d", "e", "f", "g", "h", "i"];
        let game = table_from_fn(&players, |c| c.size() as f64);
        assert!(matches!(
            permutation_oracle(&game),
            Err(Error::TooManyPlayers { n: 9, max: 8 })
        ));
    }

    #[test]
    fn oracle_equivalence_random_games() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for n in 1..=6usize {
            for _ in 0..8 {
                let labels: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
                let players = crate::model::validate_players(&labels).unwrap();
                let baseline = rng.gen_range(0.0..100.0);
                let rows: Vec<(Coalition, f64)> = (1..1u32 << n)
                    .map(|mask| (Coalition(mask), rng.gen_range(0.0..100.0)))
                    .collect();
                let game = CoalitionPayoffTable::new(players, baseline, rows).unwrap();
                let fast = shapley_values(&game);
                let slow = permutation_oracle(&game).unwrap();
                for (a, b) in fast.values.iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
                }
                let expected = game.grand_payoff() - game.baseline();
                let total = fast.total_value();
                assert!(
                    (total - expected).abs() <= 1e-9 * expected.abs().max(1.0),
                    "efficiency: {total} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn extrapolate_matches_step6() {
        let result = shapley_values(&dma_game());
        let dollars = extrapolate(&result, 10_000_000.0).unwrap();
        assert!((dollars[0] - 3_680_556.0).abs() < 1.0);
        assert!((dollars[1] - 1_597_222.0).abs() < 1.0);
        assert!((dollars[2] - 4_722_222.0).abs() < 1.0);
        let sum: f64 = dollars.iter().sum();
        assert!((sum - 10_000_000.0).abs() < 1e-6);
    }

    #[test]
    fn extrapolate_zero_total_gives_zeros() {
        let result = shapley_values(&dma_game());
        assert_eq!(extrapolate(&result, 0.0).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn extrapolate_equal_shares() {
        let game = table_from_fn(&["A", "B"], |c| match c.0 {
            0b00 => 0.0,
            0b01 | 0b10 => 3.0,
            _ => 6.0,
        });
        let result = shapley_values(&game);
        let split = extrapolate(&result, 100.0).unwrap();
        assert!((split[0] - 50.0).abs() < 1e-9);
        assert!((split[1] - 50.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_game_has_no_shares() {
        let game = table_from_fn(&["A", "B"], |c| -(c.size() as f64));
        let result = shapley_values(&game);
        assert!(result.shares.is_none());
        assert!(result.has_negative_values());
        assert!(matches!(
            extrapolate(&result, 10.0),
            Err(Error::DegenerateGame { .. })
        ));
    }
}
