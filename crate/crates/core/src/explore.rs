//! Truncated breadth-first exploration and exact connected components.
//!
//! [`explore_truncated`] reveals the component of a root vertex one colour at
//! a time. Adding a colour immediately reveals all its loops and all its
//! pairings with colours already present (sub-configuration semantics); the
//! next reveal step then picks the smallest-labelled unpaired ball from the
//! smallest-labelled colour among the colours closest to the root. Closeness
//! is the BFS wave recorded at insertion, so the full selection priority is
//! `(wave, colour label, ball label)`. The exploration stops once `ell`
//! colours are present or no unpaired ball remains.

use serde::Serialize;

use crate::config::Configuration;
use crate::error::{Error, Result};

/// One revealed edge of a truncated component, with ball-level witnesses so
/// statistics can tell loops and multi-edges apart. Both the colour pair and
/// the ball pair are stored `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct MultiEdge {
    pub colours: (usize, usize),
    pub balls: (usize, usize),
}

impl MultiEdge {
    pub fn is_loop(&self) -> bool {
        self.colours.0 == self.colours.1
    }
}

/// The output of the truncated exploration rooted at `root`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedComponent {
    pub root: usize,
    /// Colours in exploration order, root first.
    pub colours: Vec<usize>,
    /// BFS wave of each colour, parallel to `colours`.
    pub waves: Vec<usize>,
    /// Revealed edges in reveal order.
    pub edges: Vec<MultiEdge>,
    /// Balls of explored colours whose partners were never revealed.
    pub unpaired_count: usize,
    /// True exactly when the true component has more than `ell` vertices.
    pub truncated: bool,
}

impl TruncatedComponent {
    /// Number of explored colours.
    pub fn len(&self) -> usize {
        self.colours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colours.is_empty()
    }

    /// 1-based JSON value:
    /// `{"root": v, "colours": [...], "edges": [[a, b], ...], "unpaired": s}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "root": self.root + 1,
            "colours": self.colours.iter().map(|c| c + 1).collect::<Vec<_>>(),
            "edges": self
                .edges
                .iter()
                .map(|e| [e.colours.0 + 1, e.colours.1 + 1])
                .collect::<Vec<_>>(),
            "unpaired": self.unpaired_count,
        })
    }
}

/// Runs the truncated exploration from `v`, revealing at most `ell` colours.
pub fn explore_truncated(g: &Configuration, v: usize, ell: usize) -> Result<TruncatedComponent> {
    assert!(ell >= 1, "ell must be at least 1");
    if v >= g.n() {
        return Err(Error::InvalidVertex { vertex: v, n: g.n() });
    }

    let mut colours: Vec<usize> = Vec::with_capacity(ell.min(16));
    let mut waves: Vec<usize> = Vec::with_capacity(ell.min(16));
    let mut edges: Vec<MultiEdge> = Vec::new();

    let contains = |colours: &[usize], c: usize| colours.contains(&c);

    // Adding a colour reveals its loops and its pairings to present colours.
    let add_colour = |colours: &mut Vec<usize>,
                          waves: &mut Vec<usize>,
                          edges: &mut Vec<MultiEdge>,
                          c: usize,
                          wave: usize| {
        for b in g.balls_of(c) {
            let p = g.partner(b);
            let pc = g.colour_of(p);
            if pc == c {
                if b < p {
                    edges.push(MultiEdge {
                        colours: (c, c),
                        balls: (b, p),
                    });
                }
            } else if contains(colours, pc) {
                edges.push(MultiEdge {
                    colours: (pc.min(c), pc.max(c)),
                    balls: (b.min(p), b.max(p)),
                });
            }
        }
        colours.push(c);
        waves.push(wave);
    };

    add_colour(&mut colours, &mut waves, &mut edges, v, 0);

    while colours.len() < ell {
        // Selection: smallest (wave, colour, ball) over unpaired balls.
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, &c) in colours.iter().enumerate() {
            let key = (waves[i], c);
            if let Some((bw, bc, _)) = best {
                if (bw, bc) <= key {
                    continue;
                }
            }
            for b in g.balls_of(c) {
                if !contains(&colours, g.colour_of(g.partner(b))) {
                    best = Some((waves[i], c, b));
                    break;
                }
            }
        }
        let Some((wave, _, ball)) = best else {
            break;
        };
        let new_colour = g.colour_of(g.partner(ball));
        add_colour(&mut colours, &mut waves, &mut edges, new_colour, wave + 1);
    }

    let mut unpaired_count = 0;
    for &c in &colours {
        for b in g.balls_of(c) {
            if !contains(&colours, g.colour_of(g.partner(b))) {
                unpaired_count += 1;
            }
        }
    }

    Ok(TruncatedComponent {
        root: v,
        colours,
        waves,
        edges,
        truncated: unpaired_count > 0,
        unpaired_count,
    })
}

/// The exact component structure of the multigraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    /// Component index per colour, numbered by first appearance.
    pub component_id: Vec<usize>,
    /// Component sizes, indexed by component id; they sum to `n`.
    pub sizes: Vec<usize>,
    /// Size of the largest component.
    pub largest: usize,
}

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Computes the connected components of `g`. Loops connect nothing new and
/// are skipped.
pub fn components(g: &Configuration) -> ComponentPartition {
    let n = g.n();
    let mut dsu = DisjointSet::new(n);
    for (a, b) in g.pairs() {
        let (ca, cb) = (g.colour_of(a), g.colour_of(b));
        if ca != cb {
            dsu.union(ca, cb);
        }
    }
    let mut component_id = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for v in 0..n {
        let root = dsu.find(v);
        if component_id[root] == usize::MAX {
            component_id[root] = sizes.len();
            sizes.push(0);
        }
        let id = component_id[root];
        component_id[v] = id;
        sizes[id] += 1;
    }
    let largest = sizes.iter().copied().max().unwrap_or(0);
    ComponentPartition {
        component_id,
        sizes,
        largest,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{sample_configuration, Configuration};
    use crate::degseq::DegreeSequence;

    fn seq(degrees: &[usize]) -> DegreeSequence {
        DegreeSequence::validate(degrees.to_vec()).unwrap()
    }

    #[test]
    fn single_vertex_loop() {
        let d = seq(&[2]);
        let g = Configuration::from_pairs(&d, &[(0, 1)]).unwrap();
        let t = explore_truncated(&g, 0, 3).unwrap();
        assert_eq!(t.colours, vec![0]);
        assert_eq!(t.edges.len(), 1);
        assert!(t.edges[0].is_loop());
        assert_eq!(t.unpaired_count, 0);
        assert!(!t.truncated);
    }

    #[test]
    fn path_truncates_at_two() {
        // Path 0 - 1 - 2 with balls 0 | 1,2 | 3 matched {(0,1),(2,3)}.
        let d = seq(&[1, 2, 1]);
        let g = Configuration::from_pairs(&d, &[(0, 1), (2, 3)]).unwrap();
        let t = explore_truncated(&g, 0, 2).unwrap();
        assert_eq!(t.colours, vec![0, 1]);
        assert_eq!(t.edges.len(), 1);
        assert_eq!(t.edges[0].colours, (0, 1));
        assert_eq!(t.unpaired_count, 1);
        assert!(t.truncated);
    }

    #[test]
    fn star_tie_break_picks_smallest_ball() {
        // Star centre 0 with balls 0,1,2; leaves 1,2,3 with balls 3,4,5.
        // Matching {(0,3),(1,4),(2,5)}: ball 0 is revealed first, so the
        // second colour is leaf 1 (colour index 1).
        let d = seq(&[3, 1, 1, 1]);
        let g = Configuration::from_pairs(&d, &[(0, 3), (1, 4), (2, 5)]).unwrap();
        let t = explore_truncated(&g, 0, 2).unwrap();
        assert_eq!(t.colours, vec![0, 1]);
        assert_eq!(t.unpaired_count, 2);
        assert!(t.truncated);
    }

    #[test]
    fn exploring_whole_component_matches_components() {
        let d = seq(&[1, 2, 1]);
        let g = Configuration::from_pairs(&d, &[(0, 1), (2, 3)]).unwrap();
        let t = explore_truncated(&g, 0, 5).unwrap();
        assert_eq!(t.colours.len(), 3);
        assert_eq!(t.unpaired_count, 0);
        let parts = components(&g);
        assert_eq!(parts.largest, 3);
        assert_eq!(parts.sizes, vec![3]);
    }

    #[test]
    fn components_examples() {
        let d = seq(&[2]);
        let g = Configuration::from_pairs(&d, &[(0, 1)]).unwrap();
        let parts = components(&g);
        assert_eq!(parts.largest, 1);
        assert_eq!(parts.sizes, vec![1]);

        let d = seq(&[1, 1, 1, 1]);
        let g = Configuration::from_pairs(&d, &[(0, 1), (2, 3)]).unwrap();
        let parts = components(&g);
        assert_eq!(parts.sizes, vec![2, 2]);
        assert_eq!(parts.largest, 2);
        assert_eq!(parts.component_id, vec![0, 0, 1, 1]);
    }

    #[test]
    fn wave_order_beats_colour_order() {
        // Cycle 0-2-3-1-0: colour 2 is discovered before colour 1 (ball
        // order), both sit at wave 1, and the reveal from wave 1 must come
        // from colour 1, the smaller label.
        let d = seq(&[2, 2, 2, 2]);
        // balls: 0,1 | 2,3 | 4,5 | 6,7
        // matching: (0,4) 0-2, (1,2) 0-1, (3,6) 1-3, (5,7) 2-3
        let g = Configuration::from_pairs(&d, &[(0, 4), (1, 2), (3, 6), (5, 7)]).unwrap();
        let t = explore_truncated(&g, 0, 4).unwrap();
        assert_eq!(t.colours, vec![0, 2, 1, 3]);
        assert_eq!(t.waves, vec![0, 1, 1, 2]);
        assert_eq!(t.unpaired_count, 0);
    }

    #[test]
    fn handshake_identity() {
        let d = seq(&[3, 2, 2, 1, 2, 1, 3]);
        for seed in 0..50 {
            let g = sample_configuration(&d, seed);
            for v in 0..g.n() {
                for ell in 1..=4 {
                    let t = explore_truncated(&g, v, ell).unwrap();
                    let degree_sum: usize =
                        t.colours.iter().map(|&c| g.degrees().degree(c)).sum();
                    assert_eq!(degree_sum, 2 * t.edges.len() + t.unpaired_count);
                }
            }
        }
    }

    #[test]
    fn monotone_prefix_property() {
        let d = seq(&[3, 2, 2, 1, 2, 1, 3]);
        for seed in 0..30 {
            let g = sample_configuration(&d, seed);
            for v in 0..g.n() {
                let mut prev = explore_truncated(&g, v, 1).unwrap();
                for ell in 2..=6 {
                    let next = explore_truncated(&g, v, ell).unwrap();
                    assert_eq!(&next.colours[..prev.colours.len()], &prev.colours[..]);
                    prev = next;
                }
            }
        }
    }

    #[test]
    fn truncation_flag_matches_component_size() {
        let d = seq(&[2, 2, 1, 1, 2, 2]);
        for seed in 0..40 {
            let g = sample_configuration(&d, seed);
            let parts = components(&g);
            for v in 0..g.n() {
                let size = parts.sizes[parts.component_id[v]];
                for ell in 1..=6 {
                    let t = explore_truncated(&g, v, ell).unwrap();
                    assert_eq!(t.truncated, size > ell, "v={v} ell={ell}");
                    if ell >= size {
                        assert_eq!(t.colours.len(), size);
                        let mut sorted = t.colours.clone();
                        sorted.sort_unstable();
                        let mut expected: Vec<usize> = (0..g.n())
                            .filter(|&w| parts.component_id[w] == parts.component_id[v])
                            .collect();
                        expected.sort_unstable();
                        assert_eq!(sorted, expected);
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_vertex_is_rejected() {
        let d = seq(&[1, 1]);
        let g = Configuration::from_pairs(&d, &[(0, 1)]).unwrap();
        assert!(matches!(
            explore_truncated(&g, 5, 2),
            Err(crate::Error::InvalidVertex { vertex: 5, n: 2 })
        ));
    }

    #[test]
    fn json_shape() {
        let d = seq(&[1, 2, 1]);
        let g = Configuration::from_pairs(&d, &[(0, 1), (2, 3)]).unwrap();
        let t = explore_truncated(&g, 0, 2).unwrap();
        let v = t.to_json_value();
        assert_eq!(v["root"], 1);
        assert_eq!(v["colours"], serde_json::json!([1, 2]));
        assert_eq!(v["edges"], serde_json::json!([[1, 2]]));
        assert_eq!(v["unpaired"], 1);
    }
}
