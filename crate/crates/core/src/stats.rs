//! Local statistics and the summed statistic `U = Σ_v h(T_ℓ(v))`.
//!
//! A [`LocalStatistic`] is a bounded function of truncated components with a
//! declared locality `ell` and sup-norm. Implementations must be pure and
//! must depend only on the truncated component handed to them — two explored
//! components that are equal as rooted labelled multigraphs with equal
//! unpaired counts must map to the same value.

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::exec;
use crate::explore::{explore_truncated, TruncatedComponent};

/// A bounded local statistic of truncated rooted multigraphs.
pub trait LocalStatistic: Sync {
    /// Locality radius, counted in explored vertices.
    fn ell(&self) -> usize;

    /// Declared bound on `|evaluate(t)|`.
    fn sup_norm(&self) -> f64;

    fn evaluate(&self, t: &TruncatedComponent) -> f64;
}

/// `h(t) = 1` when the exploration exhausted the component (component size
/// at most `ell`), else `0`. `U` counts vertices in small components.
#[derive(Debug, Clone, Copy)]
pub struct SmallComponentIndicator {
    pub ell: usize,
}

impl LocalStatistic for SmallComponentIndicator {
    fn ell(&self) -> usize {
        self.ell
    }

    fn sup_norm(&self) -> f64 {
        1.0
    }

    fn evaluate(&self, t: &TruncatedComponent) -> f64 {
        if t.truncated {
            0.0
        } else {
            1.0
        }
    }
}

/// `h(t) = 1` when the root degree equals `k`; locality 1. At `ell = 1` the
/// exploration reveals exactly the root's loops, so the root degree is
/// `2·#edges + #unpaired`.
#[derive(Debug, Clone, Copy)]
pub struct DegreeIndicator {
    pub k: usize,
}

impl LocalStatistic for DegreeIndicator {
    fn ell(&self) -> usize {
        1
    }

    fn sup_norm(&self) -> f64 {
        1.0
    }

    fn evaluate(&self, t: &TruncatedComponent) -> f64 {
        let root_degree = 2 * t.edges.len() + t.unpaired_count;
        if root_degree == self.k {
            1.0
        } else {
            0.0
        }
    }
}

/// `h(t) = |colours(t)|`, the component size capped at `ell`; a
/// susceptibility-type summand with sup-norm `ell`.
#[derive(Debug, Clone, Copy)]
pub struct CappedComponentSize {
    pub ell: usize,
}

impl LocalStatistic for CappedComponentSize {
    fn ell(&self) -> usize {
        self.ell
    }

    fn sup_norm(&self) -> f64 {
        self.ell as f64
    }

    fn evaluate(&self, t: &TruncatedComponent) -> f64 {
        t.colours.len() as f64
    }
}

/// Name-plus-parameters selection of a built-in statistic, as used in
/// experiment configs: `{"statistic": "small_component_indicator", "ell": 25}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StatisticSpec {
    #[serde(rename = "statistic")]
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl StatisticSpec {
    pub fn small_component_indicator(ell: usize) -> Self {
        Self {
            name: "small_component_indicator".into(),
            ell: Some(ell),
            k: None,
        }
    }

    pub fn degree_indicator(k: usize) -> Self {
        Self {
            name: "degree_indicator".into(),
            ell: None,
            k: Some(k),
        }
    }

    pub fn build(&self) -> Result<BuiltStatistic> {
        let need = |opt: Option<usize>, what: &str| {
            opt.ok_or_else(|| {
                Error::InvalidExperiment(format!("statistic {:?} needs {what}", self.name))
            })
        };
        match self.name.as_str() {
            "small_component_indicator" => Ok(BuiltStatistic::SmallComponent(
                SmallComponentIndicator {
                    ell: need(self.ell, "ell")?,
                },
            )),
            "degree_indicator" => Ok(BuiltStatistic::Degree(DegreeIndicator {
                k: need(self.k, "k")?,
            })),
            "capped_component_size" => Ok(BuiltStatistic::CappedSize(CappedComponentSize {
                ell: need(self.ell, "ell")?,
            })),
            other => Err(Error::UnknownStatistic(other.to_string())),
        }
    }
}

/// A built-in statistic resolved from a [`StatisticSpec`].
#[derive(Debug, Clone, Copy)]
pub enum BuiltStatistic {
    SmallComponent(SmallComponentIndicator),
    Degree(DegreeIndicator),
    CappedSize(CappedComponentSize),
}

impl LocalStatistic for BuiltStatistic {
    fn ell(&self) -> usize {
        match self {
            Self::SmallComponent(s) => s.ell(),
            Self::Degree(s) => s.ell(),
            Self::CappedSize(s) => s.ell(),
        }
    }

    fn sup_norm(&self) -> f64 {
        match self {
            Self::SmallComponent(s) => s.sup_norm(),
            Self::Degree(s) => s.sup_norm(),
            Self::CappedSize(s) => s.sup_norm(),
        }
    }

    fn evaluate(&self, t: &TruncatedComponent) -> f64 {
        match self {
            Self::SmallComponent(s) => s.evaluate(t),
            Self::Degree(s) => s.evaluate(t),
            Self::CappedSize(s) => s.evaluate(t),
        }
    }
}

/// The evaluated statistic: total, per-vertex terms, and the inverted colour
/// index `colour → {w : colour ∈ ξ_w}` the coupling uses for its affected-set
/// lookups.
#[derive(Debug, Clone)]
pub struct StatisticSummary {
    /// `U = Σ_v per_vertex[v]`.
    pub value: f64,
    pub per_vertex: Vec<f64>,
    /// Optional externally estimated mean used for standardisation.
    pub mean_hint: Option<f64>,
    /// Optional externally estimated variance used for standardisation.
    pub variance_hint: Option<f64>,
    pub inverted_index: Vec<Vec<usize>>,
}

pub(crate) fn evaluate_checked<H: LocalStatistic + ?Sized>(
    h: &H,
    t: &TruncatedComponent,
) -> Result<f64> {
    let value = h.evaluate(t);
    debug_assert!(
        value.abs() <= h.sup_norm(),
        "statistic exceeded its sup-norm"
    );
    if value.abs() > h.sup_norm() {
        return Err(Error::StatisticOutOfBound {
            value,
            sup_norm: h.sup_norm(),
        });
    }
    Ok(value)
}

fn summarise(g: &Configuration, rows: Vec<Result<(f64, Vec<usize>)>>) -> Result<StatisticSummary> {
    let n = g.n();
    let mut per_vertex = Vec::with_capacity(n);
    let mut inverted_index = vec![Vec::new(); n];
    for (w, row) in rows.into_iter().enumerate() {
        let (value, xi) = row?;
        per_vertex.push(value);
        for c in xi {
            inverted_index[c].push(w);
        }
    }
    let value = per_vertex.iter().sum();
    Ok(StatisticSummary {
        value,
        per_vertex,
        mean_hint: None,
        variance_hint: None,
        inverted_index,
    })
}

/// Explores every vertex, evaluates `h`, and assembles the summary. Vertex
/// explorations run in parallel; the index merge is a sequential reduce in
/// vertex order.
pub fn evaluate_statistic<H: LocalStatistic + ?Sized>(
    g: &Configuration,
    h: &H,
) -> Result<StatisticSummary> {
    let rows = exec::map_indexed(g.n(), |v| {
        let t = explore_truncated(g, v, h.ell())?;
        Ok((evaluate_checked(h, &t)?, t.colours))
    });
    summarise(g, rows)
}

/// Sequential twin of [`evaluate_statistic`].
pub fn evaluate_statistic_sequential<H: LocalStatistic + ?Sized>(
    g: &Configuration,
    h: &H,
) -> Result<StatisticSummary> {
    let rows = exec::map_indexed_sequential(g.n(), |v| {
        let t = explore_truncated(g, v, h.ell())?;
        Ok((evaluate_checked(h, &t)?, t.colours))
    });
    summarise(g, rows)
}

/// Just `U`, skipping the per-vertex vector and the inverted index. This is
/// the hot path of the Monte Carlo experiments.
pub fn statistic_value<H: LocalStatistic + ?Sized>(g: &Configuration, h: &H) -> Result<f64> {
    let parts = exec::map_indexed(g.n(), |v| {
        let t = explore_truncated(g, v, h.ell())?;
        evaluate_checked(h, &t)
    });
    let mut total = 0.0;
    for part in parts {
        total += part?;
    }
    Ok(total)
}

/// Sequential twin of [`statistic_value`].
pub fn statistic_value_sequential<H: LocalStatistic + ?Sized>(
    g: &Configuration,
    h: &H,
) -> Result<f64> {
    let parts = exec::map_indexed_sequential(g.n(), |v| {
        let t = explore_truncated(g, v, h.ell())?;
        evaluate_checked(h, &t)
    });
    let mut total = 0.0;
    for part in parts {
        total += part?;
    }
    Ok(total)
}
