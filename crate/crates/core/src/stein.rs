//! The re-insertion coupling and the coupling-based variance estimator.
//!
//! [`rebuild_independent`] turns a configuration `G` into a configuration
//! `G'_v` whose law is uniform and independent of the truncated component
//! of `v`. Every pair of `G` incident to an explored colour is removed:
//! the `K_v` pairs internal to the explored set `ξ_v` and the `s(ξ_v)`
//! boundary pairs joining it to the rest. The removed pairs are then
//! re-inserted one at a time in increasing ball order: the `j`-th of the
//! `R = K_v + s` insertions matches the pair with itself with probability
//! `1/(m − 2(R − j) − 1)` and otherwise splices it into a uniformly chosen
//! existing pair `(I, J)`. Conditionally on the truncated component (and on
//! the identity of the removed pairs) each step keeps the matching uniform
//! on its growing ball set, so the final configuration is uniform on all of
//! `[m]` whatever the conditioning — which is the independence the coupling
//! needs. Re-inserting only the internal pairs while leaving the boundary
//! balls attached would *not* achieve this: with two or more boundary
//! balls, matchings that pair two ex-partners of the boundary together are
//! unreachable, and the output law remembers the truncated component.
//!
//! The colours touched by splices (spliced targets `I, J` and any
//! re-inserted ball whose partner moved) form `H_v`; `η_v = ξ_v ∪ H_v` is
//! the set of colours whose truncated view can distinguish `G` from `G'_v`.
//!
//! [`coupling_draw`] combines the rebuild with a statistic summary to produce
//! one draw of the Stein coupling `(W, W'_v, G_v)`, and
//! [`estimate_variance_identity`] averages `−n·X_I·(U'_I − U)` over
//! independent draws, which is an unbiased estimator of `Var U`.

use std::collections::BTreeSet;

use rand::Rng;

use crate::config::{sample_configuration_with, Configuration};
use crate::degseq::DegreeSequence;
use crate::error::{Error, Result};
use crate::exec;
use crate::explore::explore_truncated;
use crate::rng::{self, RandomSeed, RngStream};
use crate::stats::{evaluate_checked, evaluate_statistic, LocalStatistic, StatisticSummary};

/// One draw of the coupling at a vertex.
#[derive(Debug, Clone)]
pub struct CouplingRecord {
    pub vertex: usize,
    /// Explored colours `ξ_v`, in exploration order.
    pub xi: Vec<usize>,
    /// `η_v = ξ_v ∪ H_v`, sorted.
    pub eta: Vec<usize>,
    /// Number of pairs internal to `ξ_v` that were re-inserted.
    pub k_v: usize,
    /// Standardised statistic on the base configuration.
    pub w: f64,
    /// Standardised statistic on the rebuilt configuration.
    pub w_prime: f64,
    /// `G_v = −(n/σ)·X_v`.
    pub g_term: f64,
    /// `Δ_v = w_prime − w`.
    pub delta: f64,
    /// Whether `K_v ≤ ℓ + 6` on this draw.
    pub on_event_a: bool,
}

impl CouplingRecord {
    /// 1-based JSON-lines record.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "vertex": self.vertex + 1,
            "xi": self.xi.iter().map(|c| c + 1).collect::<Vec<_>>(),
            "eta": self.eta.iter().map(|c| c + 1).collect::<Vec<_>>(),
            "k_v": self.k_v,
            "w": self.w,
            "w_prime": self.w_prime,
            "g_term": self.g_term,
            "delta": self.delta,
            "on_event_a": self.on_event_a,
        })
    }
}

/// The random choices and colour bookkeeping of one rebuild.
#[derive(Debug, Clone)]
pub struct RebuildOutcome {
    /// Explored colours `ξ_v` in exploration order.
    pub xi: Vec<usize>,
    /// Colours outside `ξ_v` touched by splices (`H_v`), sorted.
    pub h_colours: Vec<usize>,
    /// `ξ_v ∪ H_v`, sorted.
    pub eta: Vec<usize>,
    /// Internal pair count of the truncated component.
    pub k_v: usize,
    /// Boundary size `s(ξ_v)`.
    pub s_xi: usize,
}

impl RebuildOutcome {
    pub fn on_event_a(&self, ell: usize) -> bool {
        self.k_v <= ell + 6
    }
}

/// Rebuilds a configuration distributed uniformly and independently of the
/// truncated component of `v`. Returns the rebuilt configuration and the
/// bookkeeping of the random choices made.
pub fn rebuild_independent(
    g: &Configuration,
    v: usize,
    ell: usize,
    rng: &mut RngStream,
) -> Result<(Configuration, RebuildOutcome)> {
    let t = explore_truncated(g, v, ell)?;
    let m = g.m();

    // Remove every pair incident to an explored colour: the K_v internal
    // pairs are exactly the revealed edges, and each unpaired ball
    // contributes its boundary pair.
    let mut inserted: Vec<(usize, usize)> = t
        .edges
        .iter()
        .map(|e| (e.balls.0, e.balls.1))
        .collect();
    let k_v = inserted.len();
    let xi_set: BTreeSet<usize> = t.colours.iter().copied().collect();
    for &c in &t.colours {
        for ball in g.balls_of(c) {
            let partner = g.partner(ball);
            if !xi_set.contains(&g.colour_of(partner)) {
                inserted.push((ball.min(partner), ball.max(partner)));
            }
        }
    }
    inserted.sort_unstable();
    let rounds = inserted.len();
    debug_assert_eq!(rounds, k_v + t.unpaired_count);

    let mut partner = g.partner_slice().to_vec();
    let mut removed = vec![false; m];
    for &(a, b) in &inserted {
        removed[a] = true;
        removed[b] = true;
    }
    let mut present: Vec<usize> = (0..m).filter(|&b| !removed[b]).collect();

    let mut touched: BTreeSet<usize> = BTreeSet::new();
    for (j, &(a, b)) in (1..=rounds).zip(inserted.iter()) {
        let denominator = m - 2 * (rounds - j) - 1;
        let heads = rng.random::<f64>() < 1.0 / denominator as f64;
        if heads {
            // Restores the original pairing; nothing moves.
            partner[a] = b;
            partner[b] = a;
        } else {
            // Tails is impossible on an empty configuration: the coin is
            // then forced to heads by denominator 1.
            debug_assert!(!present.is_empty());
            let pick = rng.random_range(0..present.len() as u64) as usize;
            let i_ball = present[pick];
            let j_ball = partner[i_ball];
            touched.insert(g.colour_of(a));
            touched.insert(g.colour_of(b));
            touched.insert(g.colour_of(i_ball));
            touched.insert(g.colour_of(j_ball));
            partner[a] = i_ball;
            partner[i_ball] = a;
            partner[b] = j_ball;
            partner[j_ball] = b;
        }
        present.push(a);
        present.push(b);
    }

    let rebuilt = g.with_partner(partner);
    let h_colours: Vec<usize> = touched.difference(&xi_set).copied().collect();
    let mut eta = xi_set;
    eta.extend(touched);
    let outcome = RebuildOutcome {
        xi: t.colours,
        h_colours,
        eta: eta.into_iter().collect(),
        k_v,
        s_xi: t.unpaired_count,
    };
    Ok((rebuilt, outcome))
}

/// Sum over the potentially affected vertices of `h(T'(w)) − h(T(w))`.
///
/// Only vertices whose explored colour set meets `η_v` can change, so the
/// sum over that set equals `U' − U` exactly; the inverted index makes the
/// lookup cheap.
fn affected_difference<H: LocalStatistic + ?Sized>(
    rebuilt: &Configuration,
    outcome: &RebuildOutcome,
    h: &H,
    summary: &StatisticSummary,
) -> Result<f64> {
    let mut affected: BTreeSet<usize> = BTreeSet::new();
    for &c in &outcome.eta {
        affected.extend(summary.inverted_index[c].iter().copied());
    }
    let mut diff = 0.0;
    for &w in &affected {
        let t = explore_truncated(rebuilt, w, h.ell())?;
        diff += evaluate_checked(h, &t)? - summary.per_vertex[w];
    }
    Ok(diff)
}

/// Performs one coupling draw at `v`: rebuilds, re-explores the affected
/// vertices, and fills in the standardised quantities.
///
/// `summary` must come from `evaluate_statistic(g, h)`; `sigma` is the
/// standardising scale and `summary.mean_hint` (default 0) the centring.
pub fn coupling_draw<H: LocalStatistic + ?Sized>(
    g: &Configuration,
    v: usize,
    h: &H,
    summary: &StatisticSummary,
    sigma: f64,
    rng: &mut RngStream,
) -> Result<CouplingRecord> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let (rebuilt, outcome) = rebuild_independent(g, v, h.ell(), rng)?;
    let diff = affected_difference(&rebuilt, &outcome, h, summary)?;
    let mu = summary.mean_hint.unwrap_or(0.0);
    let w = (summary.value - mu) / sigma;
    let delta = diff / sigma;
    let n = g.n() as f64;
    Ok(CouplingRecord {
        vertex: v,
        on_event_a: outcome.on_event_a(h.ell()),
        xi: outcome.xi,
        eta: outcome.eta,
        k_v: outcome.k_v,
        w,
        w_prime: w + delta,
        g_term: -(n / sigma) * summary.per_vertex[v],
        delta,
    })
}

/// Monte Carlo estimate of `Var U` through the coupling identity
/// `Var U = −n E{X_I (U'_I − U)}` with `I` uniform on the vertices.
/// Returns `(estimate, standard_error)`.
pub fn estimate_variance_identity<H: LocalStatistic + ?Sized>(
    d: &DegreeSequence,
    h: &H,
    replications: usize,
    seed: RandomSeed,
) -> Result<(f64, f64)> {
    assert!(replications >= 2, "need at least two replications");
    let n = d.n();
    let draws = exec::map_indexed(replications, |r| -> Result<f64> {
        let r = r as u64;
        let mut config_rng = rng::stream(seed, &[r, 0]);
        let g = sample_configuration_with(d, &mut config_rng);
        let summary = evaluate_statistic(&g, h)?;
        let mut draw_rng = rng::stream(seed, &[r, 1]);
        let vertex = draw_rng.random_range(0..n as u64) as usize;
        let (rebuilt, outcome) = rebuild_independent(&g, vertex, h.ell(), &mut draw_rng)?;
        let diff = affected_difference(&rebuilt, &outcome, h, &summary)?;
        Ok(-(n as f64) * summary.per_vertex[vertex] * diff)
    });
    let mut values = Vec::with_capacity(replications);
    for draw in draws {
        values.push(draw?);
    }
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let ss: f64 = values.iter().map(|y| (y - mean) * (y - mean)).sum();
    let std_error = (ss / (r - 1.0) / r).sqrt();
    Ok((mean, std_error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::sample_configuration;
    use crate::stats::{DegreeIndicator, SmallComponentIndicator};

    fn seq(degrees: &[usize]) -> DegreeSequence {
        DegreeSequence::validate(degrees.to_vec()).unwrap()
    }

    #[test]
    fn forced_rebuild_on_single_edge() {
        let d = seq(&[1, 1]);
        let g = sample_configuration(&d, 3);
        let mut rng = rng::stream(9, &[]);
        for _ in 0..50 {
            let (rebuilt, outcome) = rebuild_independent(&g, 0, 2, &mut rng).unwrap();
            assert_eq!(rebuilt.pairs_canonical(), g.pairs_canonical());
            assert_eq!(outcome.k_v, 1);
            assert!(outcome.h_colours.is_empty());
        }
    }

    #[test]
    fn k_v_identity_holds_on_every_draw() {
        let d = seq(&[3, 2, 2, 1, 2, 1, 3, 2]);
        let mut rng = rng::stream(17, &[]);
        for seed in 0..60 {
            let g = sample_configuration(&d, seed);
            for v in 0..g.n() {
                let (_, outcome) = rebuild_independent(&g, v, 3, &mut rng).unwrap();
                let degree_sum: usize = outcome.xi.iter().map(|&c| d.degree(c)).sum();
                assert_eq!(2 * outcome.k_v + outcome.s_xi, degree_sum);
            }
        }
    }

    #[test]
    fn eta_growth_is_bounded_by_swaps() {
        // An internal-pair splice reaches at most 2 new colours, a
        // boundary-pair splice at most 3 (the outside ball plus the target
        // pair).
        let d = seq(&[3, 2, 2, 1, 2, 1, 3, 2]);
        let mut rng = rng::stream(23, &[]);
        for seed in 0..60 {
            let g = sample_configuration(&d, seed);
            for v in 0..g.n() {
                let ell = 3;
                let (_, outcome) = rebuild_independent(&g, v, ell, &mut rng).unwrap();
                assert!(
                    outcome.eta.len()
                        <= outcome.xi.len() + 2 * outcome.k_v + 3 * outcome.s_xi
                );
                if outcome.on_event_a(ell) {
                    assert!(
                        outcome.eta.len()
                            <= outcome.xi.len() + 2 * (ell + 6) + 3 * outcome.s_xi
                    );
                }
                // ξ ⊆ η
                for c in &outcome.xi {
                    assert!(outcome.eta.contains(c));
                }
            }
        }
    }

    #[test]
    fn rebuilt_law_is_uniform_on_four_balls() {
        // d = (1,1,1,1): three matchings; conditioned on any T_2(0), the
        // rebuild must produce each matching with probability 1/3.
        let d = seq(&[1, 1, 1, 1]);
        let mut counts = std::collections::HashMap::new();
        let rounds = 30_000;
        for r in 0..rounds {
            let g = sample_configuration(&d, 1000 + r);
            let mut rng = rng::stream(5, &[r]);
            let (rebuilt, _) = rebuild_independent(&g, 0, 2, &mut rng).unwrap();
            *counts.entry(rebuilt.pairs_canonical()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 3);
        let expected = rounds as f64 / 3.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // dof 2; chi2 above 20 has p < 5e-5
        assert!(chi2 < 20.0, "chi2 = {chi2}");
    }

    #[test]
    fn degree_indicator_draws_are_null() {
        let d = seq(&[2, 1, 3, 1, 1, 2]);
        let h = DegreeIndicator { k: 1 };
        for seed in 0..30 {
            let g = sample_configuration(&d, seed);
            let summary = evaluate_statistic(&g, &h).unwrap();
            let mut rng = rng::stream(seed, &[1]);
            for v in 0..g.n() {
                let rec = coupling_draw(&g, v, &h, &summary, 1.0, &mut rng).unwrap();
                assert_eq!(rec.delta, 0.0);
            }
        }
    }

    #[test]
    fn constant_statistic_has_zero_delta_even_when_rebuild_moves() {
        // On d = (1,1,1,1) every matching is two components of size 2, so
        // the ell = 2 indicator sums to 4 on all three matchings.
        let d = seq(&[1, 1, 1, 1]);
        let h = SmallComponentIndicator { ell: 2 };
        let mut moved = 0;
        for seed in 0..300 {
            let g = sample_configuration(&d, seed);
            let summary = evaluate_statistic(&g, &h).unwrap();
            assert_eq!(summary.value, 4.0);
            let mut rng = rng::stream(seed, &[7]);
            let rec = coupling_draw(&g, 0, &h, &summary, 1.0, &mut rng).unwrap();
            assert_eq!(rec.delta, 0.0);
            let mut check_rng = rng::stream(seed, &[7]);
            let (rebuilt, _) = rebuild_independent(&g, 0, 2, &mut check_rng).unwrap();
            if rebuilt.pairs_canonical() != g.pairs_canonical() {
                moved += 1;
            }
        }
        assert!(moved > 100, "rebuild should move the matching often");
    }

    #[test]
    fn variance_identity_is_exactly_zero_for_degree_indicator() {
        let d = seq(&[2, 1, 3, 1, 1, 2]);
        let h = DegreeIndicator { k: 3 };
        let (estimate, std_error) = estimate_variance_identity(&d, &h, 50, 99).unwrap();
        assert_eq!(estimate, 0.0);
        assert_eq!(std_error, 0.0);
    }

    #[test]
    fn variance_identity_is_zero_for_constant_u() {
        let d = seq(&[1, 1, 1, 1]);
        let h = SmallComponentIndicator { ell: 2 };
        let (estimate, std_error) = estimate_variance_identity(&d, &h, 50, 3).unwrap();
        assert_eq!(estimate, 0.0);
        assert_eq!(std_error, 0.0);
    }

    #[test]
    fn delta_matches_full_reevaluation() {
        // The affected-set shortcut must equal the brute-force U' − U.
        let d = seq(&[3, 2, 2, 1, 2, 1, 3, 2, 1, 1]);
        let h = SmallComponentIndicator { ell: 3 };
        for seed in 0..40 {
            let g = sample_configuration(&d, seed);
            let summary = evaluate_statistic(&g, &h).unwrap();
            for v in 0..g.n() {
                let mut rng_a = rng::stream(seed, &[v as u64]);
                let mut rng_b = rng::stream(seed, &[v as u64]);
                let rec = coupling_draw(&g, v, &h, &summary, 2.0, &mut rng_a).unwrap();
                let (rebuilt, _) = rebuild_independent(&g, v, h.ell(), &mut rng_b).unwrap();
                let u_prime = crate::stats::statistic_value(&rebuilt, &h).unwrap();
                let brute = (u_prime - summary.value) / 2.0;
                assert!(
                    (rec.delta - brute).abs() < 1e-12,
                    "seed {seed} v {v}: {} vs {brute}",
                    rec.delta
                );
            }
        }
    }

    #[test]
    fn stein_identity_with_linear_test_function() {
        // On d = (1,2,1) with the ell = 2 indicator, exact enumeration over
        // the three matchings gives E U = 1 and Var U = 2. The Monte Carlo
        // mean of G_v(W' − W) over (configuration, I, coupling) draws must
        // then be 1 within three standard errors.
        let d = seq(&[1, 2, 1]);
        let h = SmallComponentIndicator { ell: 2 };
        let sigma2: f64 = 2.0;
        let sigma = sigma2.sqrt();
        let mu = 1.0;
        let rounds = 20_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for r in 0..rounds {
            let g = sample_configuration(&d, 50_000 + r as u64);
            let mut summary = evaluate_statistic(&g, &h).unwrap();
            summary.mean_hint = Some(mu);
            let mut rng = rng::stream(11, &[r as u64]);
            let vertex = rng.random_range(0..g.n() as u64) as usize;
            let rec = coupling_draw(&g, vertex, &h, &summary, sigma, &mut rng).unwrap();
            let y = rec.g_term * rec.delta;
            sum += y;
            sumsq += y * y;
        }
        let mean = sum / rounds as f64;
        let var = (sumsq - sum * sum / rounds as f64) / (rounds as f64 - 1.0);
        let se = (var / rounds as f64).sqrt();
        assert!(
            (mean - 1.0).abs() < 3.0 * se,
            "mean {mean} should be 1 within 3 x {se}"
        );
    }
}
