//! The three-stage citing procedure and the timestep loop.
//!
//! Each timestep one fresh agent (1) reads the `m` papers it perceives as
//! best, (2) substantively cites read papers whose revealed quality clears
//! its threshold, and (3) in the full model backfills the remaining slots
//! with the papers of highest rhetorical value. Every distinct paper in the
//! resulting reference list then gains one citation.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::Result;
use crate::metrics::{self, MetricSnapshot};
use crate::model::{
    effective_quality, perceived_quality, rhetorical_value, AgentMode, AgentView, ModelConfig,
    Paper, Variant, HOMOGENEOUS_THRESHOLD,
};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CitationKind {
    Substantive,
    Rhetorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CitationSlot {
    pub paper_id: usize,
    pub kind: CitationKind,
}

/// Filled slots of one reference list, substantive slots first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ReferenceList {
    pub slots: Vec<CitationSlot>,
}

impl ReferenceList {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Paper ids in slot order with repeats removed.
    pub fn distinct_papers(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(i, s)| !self.slots[..*i].iter().any(|p| p.paper_id == s.paper_id))
            .map(|(_, s)| s.paper_id)
    }

    pub fn count(&self, kind: CitationKind) -> usize {
        self.slots.iter().filter(|s| s.kind == kind).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    pub refs: ReferenceList,
    /// Metrics over the citation counts right after this step's update.
    pub snapshot: MetricSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub config: ModelConfig,
    pub records: Vec<StepRecord>,
    /// Underlying quality of each paper, by id.
    pub qualities: Vec<f64>,
    /// Final citation count of each paper, by id.
    pub citations: Vec<u32>,
}

impl Trajectory {
    pub fn end_correlation(&self) -> Option<f64> {
        if self.qualities.len() < 2 {
            return None;
        }
        let counts: Vec<f64> = self.citations.iter().map(|&c| c as f64).collect();
        metrics::pearson(&counts, &self.qualities).ok().flatten()
    }

    pub fn end_gini(&self) -> f64 {
        let counts: Vec<f64> = self.citations.iter().map(|&c| c as f64).collect();
        metrics::gini(&counts).unwrap_or(0.0)
    }

    pub fn mean_churn(&self) -> Option<f64> {
        metrics::mean_churn(self)
    }
}

/// Draws the fixed literature: all qualities first, then all shared
/// rhetorical bases.
pub fn init_papers(config: &ModelConfig, stream: &mut RandomStream) -> Result<Vec<Paper>> {
    let n = config.literature_size;
    let qualities = (0..n)
        .map(|_| config.quality_dist.sample(stream))
        .collect::<Result<Vec<_>>>()?;
    let bases = (0..n)
        .map(|_| config.rhetorical_dist.sample(stream))
        .collect::<Result<Vec<_>>>()?;
    Ok(qualities
        .into_iter()
        .zip(bases)
        .enumerate()
        .map(|(id, (q, r))| Paper::new(id, q, r))
        .collect())
}

/// Samples a new agent's private view of the literature.
pub fn build_agent_view(
    config: &ModelConfig,
    papers: &[Paper],
    stream: &mut RandomStream,
) -> Result<AgentView> {
    let n = papers.len();
    match config.agent_mode {
        AgentMode::Heterogeneous => {
            let threshold = config.threshold_dist.sample(stream)?;
            let h = config.fit_halfwidth;
            let fit = (0..n)
                .map(|_| stream.uniform(-h, h))
                .collect::<Result<Vec<_>>>()?;
            let error = sample_errors(config, n, stream)?;
            let rhetorical_base = (0..n)
                .map(|_| config.rhetorical_dist.sample(stream))
                .collect::<Result<Vec<_>>>()?;
            Ok(AgentView {
                threshold,
                fit,
                error,
                rhetorical_base,
            })
        }
        AgentMode::Homogeneous => Ok(AgentView {
            threshold: HOMOGENEOUS_THRESHOLD,
            fit: vec![0.0; n],
            error: sample_errors(config, n, stream)?,
            rhetorical_base: papers.iter().map(Paper::shared_rhetorical_base).collect(),
        }),
    }
}

fn sample_errors(config: &ModelConfig, n: usize, stream: &mut RandomStream) -> Result<Vec<f64>> {
    (0..n)
        .map(|_| stream.normal(0.0, config.error_sd, None))
        .collect()
}

/// Descending by score, ties by ascending id.
fn rank_desc(scores: &[f64], a: usize, b: usize) -> Ordering {
    scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
}

/// The `k` best candidates by `scores` (indexed by paper id), best first.
fn top_k(scores: &[f64], mut candidates: Vec<usize>, k: usize) -> Vec<usize> {
    let cmp = |a: &usize, b: &usize| rank_desc(scores, *a, *b);
    if k < candidates.len() {
        if k == 0 {
            return Vec::new();
        }
        candidates.select_nth_unstable_by(k - 1, cmp);
        candidates.truncate(k);
    }
    candidates.sort_unstable_by(cmp);
    candidates
}

/// Stage 1: ids of the `m` papers with highest perceived quality, best first.
pub fn select_reading_set(papers: &[Paper], view: &AgentView, config: &ModelConfig) -> Vec<usize> {
    let scores: Vec<f64> = papers
        .iter()
        .map(|p| perceived_quality(p, view, config.alpha))
        .collect();
    top_k(&scores, (0..papers.len()).collect(), config.reading_budget)
}

/// Stage 2: substantive citations among the read papers.
pub fn select_substantive(
    reading_set: &[usize],
    papers: &[Paper],
    view: &AgentView,
    config: &ModelConfig,
) -> Vec<CitationSlot> {
    let mut revealed = vec![f64::NEG_INFINITY; papers.len()];
    for &id in reading_set {
        revealed[id] = effective_quality(&papers[id], view);
    }
    let candidates: Vec<usize> = match config.variant {
        Variant::Full | Variant::NullFixedThreshold => reading_set
            .iter()
            .copied()
            .filter(|&id| revealed[id] > view.threshold)
            .collect(),
        Variant::NullFixedReference => reading_set.to_vec(),
    };
    top_k(&revealed, candidates, config.citing_budget)
        .into_iter()
        .map(|paper_id| CitationSlot {
            paper_id,
            kind: CitationKind::Substantive,
        })
        .collect()
}

/// Stage 3: fill the slots left after substantive citing with the papers of
/// highest rhetorical value. Only the full model calls this.
pub fn fill_rhetorical(
    substantive: &[CitationSlot],
    papers: &[Paper],
    view: &AgentView,
    reading_set: &[usize],
    config: &ModelConfig,
) -> Vec<CitationSlot> {
    let open = config.citing_budget.saturating_sub(substantive.len());
    if open == 0 {
        return Vec::new();
    }
    let mut read = vec![false; papers.len()];
    for &id in reading_set {
        read[id] = true;
    }
    let scores: Vec<f64> = papers
        .iter()
        .map(|p| rhetorical_value(p, view, config.alpha, config.beta_reinforce, read[p.id]))
        .collect();
    top_k(&scores, (0..papers.len()).collect(), open)
        .into_iter()
        .map(|paper_id| CitationSlot {
            paper_id,
            kind: CitationKind::Rhetorical,
        })
        .collect()
}

/// One agent's decisions, before citation counts are updated.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub reading_set: Vec<usize>,
    pub refs: ReferenceList,
}

/// Runs the three stages for a given view without touching the papers.
pub fn decide(papers: &[Paper], view: &AgentView, config: &ModelConfig) -> Decision {
    let reading_set = select_reading_set(papers, view, config);
    let mut slots = select_substantive(&reading_set, papers, view, config);
    if config.variant == Variant::Full {
        let rhetorical = fill_rhetorical(&slots, papers, view, &reading_set, config);
        slots.extend(rhetorical);
    }
    Decision {
        reading_set,
        refs: ReferenceList { slots },
    }
}

/// Adds one citation to each distinct paper in `refs`.
pub fn apply_citations(papers: &mut [Paper], refs: &ReferenceList) {
    for id in refs.distinct_papers() {
        papers[id].citations += 1;
    }
}

/// A full timestep: sample an agent, decide, update counts.
pub fn run_timestep(
    papers: &mut [Paper],
    config: &ModelConfig,
    stream: &mut RandomStream,
) -> Result<ReferenceList> {
    let view = build_agent_view(config, papers, stream)?;
    let decision = decide(papers, &view, config);
    apply_citations(papers, &decision.refs);
    Ok(decision.refs)
}

/// Sub-stream used for the literature; agent `t` uses `t + 1`.
pub const LITERATURE_STREAM: u64 = 0;

pub fn agent_stream_id(t: usize) -> u64 {
    t as u64 + 1
}

/// Step-by-step driver behind [`run_simulation`].
#[derive(Debug, Clone)]
pub struct Simulation {
    config: ModelConfig,
    papers: Vec<Paper>,
    qualities: Vec<f64>,
    records: Vec<StepRecord>,
}

impl Simulation {
    pub fn new(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut stream = RandomStream::new(config.seed, LITERATURE_STREAM);
        let papers = init_papers(config, &mut stream)?;
        let qualities = papers.iter().map(Paper::quality).collect();
        Ok(Self {
            config: config.clone(),
            papers,
            qualities,
            records: Vec::with_capacity(config.timesteps),
        })
    }

    pub fn papers(&self) -> &[Paper] {
        &self.papers
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn next_timestep(&self) -> usize {
        self.records.len()
    }

    pub fn is_done(&self) -> bool {
        self.records.len() >= self.config.timesteps
    }

    /// The view the agent of timestep `t` samples; reproducible on demand.
    pub fn agent_view(&self, t: usize) -> Result<AgentView> {
        let mut stream = RandomStream::new(self.config.seed, agent_stream_id(t));
        build_agent_view(&self.config, &self.papers, &mut stream)
    }

    /// Advances one timestep and returns that agent's decision.
    pub fn step(&mut self) -> Result<Decision> {
        let t = self.next_timestep();
        let view = self.agent_view(t)?;
        let decision = decide(&self.papers, &view, &self.config);
        apply_citations(&mut self.papers, &decision.refs);
        let churn = self
            .records
            .last()
            .map(|prev| metrics::churn(&prev.refs, &decision.refs));
        let counts: Vec<u32> = self.papers.iter().map(|p| p.citations).collect();
        let snapshot = metrics::snapshot(t, &counts, &self.qualities, churn);
        self.records.push(StepRecord {
            t,
            refs: decision.refs.clone(),
            snapshot,
        });
        Ok(decision)
    }

    pub fn finish(self) -> Trajectory {
        Trajectory {
            citations: self.papers.iter().map(|p| p.citations).collect(),
            config: self.config,
            records: self.records,
            qualities: self.qualities,
        }
    }
}

pub fn run_simulation(config: &ModelConfig) -> Result<Trajectory> {
    let mut sim = Simulation::new(config)?;
    while !sim.is_done() {
        sim.step()?;
    }
    Ok(sim.finish())
}
