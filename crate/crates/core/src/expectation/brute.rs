use crate::error::{Error, Result};
use crate::game::{for_each_profile, PolymatrixGame, ProductDistribution};

/// Default cap on enumerated profiles.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

/// `sum_s x(s) U(p, s)` over every profile; works for any aggregator.
pub fn brute_expectation(game: &PolymatrixGame, p: usize, x: &ProductDistribution) -> Result<f64> {
    brute_expectation_with_guard(game, p, x, ENUMERATION_GUARD)
}

pub fn brute_expectation_with_guard(
    game: &PolymatrixGame,
    p: usize,
    x: &ProductDistribution,
    guard: u128,
) -> Result<f64> {
    game.check_player(p)?;
    x.check_shape(game)?;
    let count = game.profile_count();
    if count > guard {
        return Err(Error::Resource(format!(
            "{count} profiles exceed enumeration guard {guard}"
        )));
    }
    let mut scratch = Vec::with_capacity(game.n());
    let mut total = 0.0;
    for_each_profile(game.strategy_counts(), |s| {
        let w = x.probability(s);
        if w > 0.0 {
            total += w * game.utility_unchecked(p, s, &mut scratch)?;
        }
        Ok(())
    })?;
    Ok(total)
}

/// `E[U(p, (i, s_-p))]` by enumerating opponent profiles.
pub(crate) fn conditional_brute(
    game: &PolymatrixGame,
    p: usize,
    i: usize,
    x: &ProductDistribution,
    guard: u128,
) -> Result<f64> {
    let count = game.opponent_profile_count(p);
    if count > guard {
        return Err(Error::Resource(format!(
            "{count} opponent profiles exceed enumeration guard {guard}"
        )));
    }
    let mut counts = game.strategy_counts().to_vec();
    counts[p] = 1;
    let mut profile = vec![0; game.n()];
    let mut scratch = Vec::with_capacity(game.n());
    let mut total = 0.0;
    for_each_profile(&counts, |s| {
        let w: f64 = (0..s.len()).filter(|&q| q != p).map(|q| x.marginal(q)[s[q]]).product();
        if w > 0.0 {
            profile.copy_from_slice(s);
            profile[p] = i;
            total += w * game.utility_unchecked(p, &profile, &mut scratch)?;
        }
        Ok(())
    })?;
    Ok(total)
}
