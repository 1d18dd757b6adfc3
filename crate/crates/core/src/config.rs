//! The matching core: uniform configurations and colour-set restrictions.
//!
//! A configuration is a perfect matching of `m` labelled balls (half-edges),
//! where balls `0..d_1` carry colour 0, the next `d_2` balls colour 1, and so
//! on. Sampling a uniform matching and reading pairs as edges realises the
//! configuration-model multigraph: loops and multi-edges are kept throughout.
//!
//! Ball and colour labels are 0-based in the library; the JSON interchange
//! format is 1-based.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::degseq::DegreeSequence;
use crate::error::{Error, Result};
use crate::rng::{self, RandomSeed, RngStream};

/// A perfect matching of the balls of a degree sequence.
///
/// `partner` is a fixed-point-free involution on `0..m`; `colour_of` maps a
/// ball to its vertex; `first_ball[v]..first_ball[v+1]` is the contiguous
/// ball range of colour `v`. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    degrees: DegreeSequence,
    colour_of: Vec<usize>,
    first_ball: Vec<usize>,
    partner: Vec<usize>,
}

impl Configuration {
    fn layout(d: &DegreeSequence) -> (Vec<usize>, Vec<usize>) {
        let mut first_ball = Vec::with_capacity(d.n() + 1);
        let mut colour_of = Vec::with_capacity(d.m());
        first_ball.push(0);
        for (v, &deg) in d.degrees().iter().enumerate() {
            for _ in 0..deg {
                colour_of.push(v);
            }
            first_ball.push(colour_of.len());
        }
        (colour_of, first_ball)
    }

    /// Builds a configuration from an explicit partner involution.
    pub fn from_partner(d: &DegreeSequence, partner: Vec<usize>) -> Result<Self> {
        if partner.len() != d.m() {
            return Err(Error::InvalidConfiguration(format!(
                "partner array has length {}, want m = {}",
                partner.len(),
                d.m()
            )));
        }
        for (b, &p) in partner.iter().enumerate() {
            if p >= partner.len() || p == b || partner[p] != b {
                return Err(Error::InvalidConfiguration(format!(
                    "partner array is not a fixed-point-free involution at ball {b}"
                )));
            }
        }
        let (colour_of, first_ball) = Self::layout(d);
        Ok(Self {
            degrees: d.clone(),
            colour_of,
            first_ball,
            partner,
        })
    }

    /// Builds a configuration from a pair list (0-based balls).
    pub fn from_pairs(d: &DegreeSequence, pairs: &[(usize, usize)]) -> Result<Self> {
        let m = d.m();
        let mut partner = vec![usize::MAX; m];
        if pairs.len() * 2 != m {
            return Err(Error::InvalidConfiguration(format!(
                "{} pairs cannot cover {} balls",
                pairs.len(),
                m
            )));
        }
        for &(a, b) in pairs {
            if a >= m || b >= m || a == b || partner[a] != usize::MAX || partner[b] != usize::MAX {
                return Err(Error::InvalidConfiguration(format!(
                    "pair ({a}, {b}) is out of range or duplicates a ball"
                )));
            }
            partner[a] = b;
            partner[b] = a;
        }
        Self::from_partner(d, partner)
    }

    /// Rewires into a sibling configuration on the same degree sequence.
    pub(crate) fn with_partner(&self, partner: Vec<usize>) -> Self {
        debug_assert_eq!(partner.len(), self.m());
        debug_assert!(partner
            .iter()
            .enumerate()
            .all(|(b, &p)| p != b && partner[p] == b));
        Self {
            degrees: self.degrees.clone(),
            colour_of: self.colour_of.clone(),
            first_ball: self.first_ball.clone(),
            partner,
        }
    }

    pub fn degrees(&self) -> &DegreeSequence {
        &self.degrees
    }

    pub fn n(&self) -> usize {
        self.degrees.n()
    }

    pub fn m(&self) -> usize {
        self.degrees.m()
    }

    pub fn partner(&self, ball: usize) -> usize {
        self.partner[ball]
    }

    pub(crate) fn partner_slice(&self) -> &[usize] {
        &self.partner
    }

    pub fn colour_of(&self, ball: usize) -> usize {
        self.colour_of[ball]
    }

    /// Ball range of colour `v`.
    pub fn balls_of(&self, v: usize) -> std::ops::Range<usize> {
        self.first_ball[v]..self.first_ball[v + 1]
    }

    /// Iterates each matched pair once, as `(b, partner(b))` with `b` minimal.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(b, &p)| b < p)
            .map(|(b, &p)| (b, p))
    }

    /// Canonical sorted pair list; usable as a matching identity key.
    pub fn pairs_canonical(&self) -> Vec<(usize, usize)> {
        self.pairs().collect()
    }

    /// 1-based JSON value: `{"degrees": [...], "pairs": [[b1, b2], ...]}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let wire = ConfigurationWire {
            degrees: self.degrees.degrees().to_vec(),
            pairs: self.pairs().map(|(a, b)| [a + 1, b + 1]).collect(),
        };
        serde_json::to_value(wire).expect("configuration serialises")
    }

    /// Reads the 1-based JSON format, verifying the involution invariant.
    pub fn from_json_value(value: &serde_json::Value) -> Result<Self> {
        let wire: ConfigurationWire = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidConfiguration(format!("bad configuration JSON: {e}")))?;
        let d = DegreeSequence::validate(wire.degrees)?;
        let mut pairs = Vec::with_capacity(wire.pairs.len());
        for [a, b] in wire.pairs {
            if a == 0 || b == 0 {
                return Err(Error::InvalidConfiguration(
                    "ball labels in JSON are 1-based".into(),
                ));
            }
            pairs.push((a - 1, b - 1));
        }
        Self::from_pairs(&d, &pairs)
    }
}

#[derive(Serialize, Deserialize)]
struct ConfigurationWire {
    degrees: Vec<usize>,
    pairs: Vec<[usize; 2]>,
}

/// Samples a configuration uniformly over all `(m−1)!!` perfect matchings by
/// shuffling the ball labels and pairing consecutive entries.
pub fn sample_configuration(d: &DegreeSequence, seed: RandomSeed) -> Configuration {
    let mut rng = rng::stream(seed, &[]);
    sample_configuration_with(d, &mut rng)
}

/// As [`sample_configuration`], drawing from a caller-owned stream.
pub fn sample_configuration_with(d: &DegreeSequence, rng: &mut RngStream) -> Configuration {
    let m = d.m();
    let mut balls: Vec<usize> = (0..m).collect();
    balls.shuffle(rng);
    let mut partner = vec![0usize; m];
    for pair in balls.chunks_exact(2) {
        partner[pair[0]] = pair[1];
        partner[pair[1]] = pair[0];
    }
    let (colour_of, first_ball) = Configuration::layout(d);
    Configuration {
        degrees: d.clone(),
        colour_of,
        first_ball,
        partner,
    }
}

/// The restriction of a configuration to a colour subset: pairs internal to
/// the subset plus the balls whose partners have colours outside it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubConfiguration {
    colour_set: BTreeSet<usize>,
    internal_pairs: Vec<(usize, usize)>,
    unpaired: Vec<usize>,
}

impl SubConfiguration {
    pub fn colour_set(&self) -> &BTreeSet<usize> {
        &self.colour_set
    }

    /// Internal pairs, each `(min, max)`, sorted by first ball.
    pub fn internal_pairs(&self) -> &[(usize, usize)] {
        &self.internal_pairs
    }

    /// Sorted balls whose partners lie outside the colour set.
    pub fn unpaired(&self) -> &[usize] {
        &self.unpaired
    }

    /// The boundary size `s(C)`.
    pub fn s(&self) -> usize {
        self.unpaired.len()
    }
}

/// Restricts `g` to the given colour set.
pub fn restrict(g: &Configuration, colours: &BTreeSet<usize>) -> SubConfiguration {
    let mut internal_pairs = Vec::new();
    let mut unpaired = Vec::new();
    for &c in colours {
        for b in g.balls_of(c) {
            let p = g.partner(b);
            if colours.contains(&g.colour_of(p)) {
                if b < p {
                    internal_pairs.push((b, p));
                }
            } else {
                unpaired.push(b);
            }
        }
    }
    SubConfiguration {
        colour_set: colours.clone(),
        internal_pairs,
        unpaired,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(degrees: &[usize]) -> DegreeSequence {
        DegreeSequence::validate(degrees.to_vec()).unwrap()
    }

    #[test]
    fn single_edge_is_forced() {
        let d = seq(&[1, 1]);
        for seed in 0..20 {
            let g = sample_configuration(&d, seed);
            assert_eq!(g.pairs_canonical(), vec![(0, 1)]);
        }
    }

    #[test]
    fn involution_holds_after_sampling() {
        let d = seq(&[3, 2, 2, 1, 4]);
        let g = sample_configuration(&d, 7);
        for b in 0..g.m() {
            assert_ne!(g.partner(b), b);
            assert_eq!(g.partner(g.partner(b)), b);
        }
    }

    #[test]
    fn loop_pairings_are_legal() {
        // Colour 0 has balls {0, 1}; the matching {(0,1),(2,3)} is a loop
        // plus an edge and must be reachable.
        let d = seq(&[2, 1, 1]);
        let mut seen_loop = false;
        for seed in 0..200 {
            let g = sample_configuration(&d, seed);
            if g.partner(0) == 1 {
                seen_loop = true;
                break;
            }
        }
        assert!(seen_loop);
    }

    #[test]
    fn restrict_hand_trace() {
        // d = (1,2,1): balls 0 | 1,2 | 3; matching {(0,1),(2,3)} is the path
        // 0 - 1 - 2 on colours.
        let d = seq(&[1, 2, 1]);
        let g = Configuration::from_pairs(&d, &[(0, 1), (2, 3)]).unwrap();

        let c01: BTreeSet<usize> = [0, 1].into_iter().collect();
        let sub = restrict(&g, &c01);
        assert_eq!(sub.internal_pairs(), &[(0, 1)]);
        assert_eq!(sub.unpaired(), &[2]);
        assert_eq!(sub.s(), 1);

        let c2: BTreeSet<usize> = [2].into_iter().collect();
        let sub2 = restrict(&g, &c2);
        assert!(sub2.internal_pairs().is_empty());
        assert_eq!(sub2.unpaired(), &[3]);
        assert_eq!(sub2.s(), sub.s());
    }

    #[test]
    fn restrict_to_everything() {
        let d = seq(&[2, 1, 1]);
        let g = sample_configuration(&d, 3);
        let all: BTreeSet<usize> = (0..g.n()).collect();
        let sub = restrict(&g, &all);
        assert_eq!(sub.internal_pairs().len(), g.m() / 2);
        assert_eq!(sub.s(), 0);
    }

    #[test]
    fn json_round_trip_verifies_involution() {
        let d = seq(&[1, 2, 1]);
        let g = Configuration::from_pairs(&d, &[(0, 1), (2, 3)]).unwrap();
        let value = g.to_json_value();
        let back = Configuration::from_json_value(&value).unwrap();
        assert_eq!(back, g);

        let broken = serde_json::json!({"degrees": [1, 1], "pairs": [[1, 1]]});
        assert!(Configuration::from_json_value(&broken).is_err());
    }

    #[test]
    fn from_pairs_rejects_duplicates() {
        let d = seq(&[1, 1, 1, 1]);
        assert!(Configuration::from_pairs(&d, &[(0, 1), (1, 2)]).is_err());
    }
}
