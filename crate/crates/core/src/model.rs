//! Papers, agents, configuration, and the per-(agent, paper) valuations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Distribution;

#[derive(Debug, Clone, PartialEq)]
pub struct Paper {
    pub id: usize,
    quality: f64,
    shared_rhetorical_base: f64,
    pub citations: u32,
}

impl Paper {
    /// Panics if either value lies outside `[0, 1]`.
    pub fn new(id: usize, quality: f64, shared_rhetorical_base: f64) -> Self {
        assert!(
            (0.0..=1.0).contains(&quality),
            "quality {quality} outside [0, 1]"
        );
        assert!(
            (0.0..=1.0).contains(&shared_rhetorical_base),
            "rhetorical base {shared_rhetorical_base} outside [0, 1]"
        );
        Self {
            id,
            quality,
            shared_rhetorical_base,
            citations: 0,
        }
    }

    pub fn quality(&self) -> f64 {
        self.quality
    }

    pub fn shared_rhetorical_base(&self) -> f64 {
        self.shared_rhetorical_base
    }
}

/// What one agent privately perceives about every paper during its timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentView {
    pub threshold: f64,
    pub fit: Vec<f64>,
    pub error: Vec<f64>,
    pub rhetorical_base: Vec<f64>,
}

impl AgentView {
    pub fn len(&self) -> usize {
        self.fit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fit.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Substantive citing followed by rhetorical backfill.
    Full,
    /// Always cite the `n` best read papers, threshold ignored.
    NullFixedReference,
    /// Cite only above-threshold read papers; leftover slots stay empty.
    NullFixedThreshold,
}

impl Variant {
    pub const ALL: [Variant; 3] = [
        Variant::Full,
        Variant::NullFixedReference,
        Variant::NullFixedThreshold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NullFixedReference => "null_fixed_reference",
            Variant::NullFixedThreshold => "null_fixed_threshold",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentMode {
    Heterogeneous,
    /// Threshold fixed at 0.5, no fit, and a rhetorical base shared by all agents.
    Homogeneous,
}

pub const HOMOGENEOUS_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub literature_size: usize,
    pub reading_budget: usize,
    pub citing_budget: usize,
    pub timesteps: usize,
    pub alpha: f64,
    pub beta_reinforce: f64,
    pub quality_dist: Distribution,
    pub rhetorical_dist: Distribution,
    pub threshold_dist: Distribution,
    pub error_sd: f64,
    pub fit_halfwidth: f64,
    pub variant: Variant,
    pub agent_mode: AgentMode,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            literature_size: 600,
            reading_budget: 120,
            citing_budget: 40,
            timesteps: 1000,
            alpha: 0.001,
            beta_reinforce: 0.3,
            quality_dist: Distribution::BetaOneW { w: 6.0 },
            rhetorical_dist: Distribution::BetaOneW { w: 6.0 },
            threshold_dist: Distribution::Uniform { lo: 0.0, hi: 1.0 },
            error_sd: 0.05,
            fit_halfwidth: 0.1,
            variant: Variant::Full,
            agent_mode: AgentMode::Heterogeneous,
            seed: 0,
        }
    }
}

pub const CONFIG_KEYS: [&str; 14] = [
    "literature_size",
    "reading_budget",
    "citing_budget",
    "timesteps",
    "alpha",
    "beta_reinforce",
    "quality_dist",
    "rhetorical_dist",
    "threshold_dist",
    "error_sd",
    "fit_halfwidth",
    "variant",
    "agent_mode",
    "seed",
];

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.literature_size == 0 {
            return Err(Error::config("literature_size", "must be positive"));
        }
        if self.reading_budget == 0 {
            return Err(Error::config("reading_budget", "must be positive"));
        }
        if self.citing_budget == 0 {
            return Err(Error::config("citing_budget", "must be positive"));
        }
        if self.reading_budget > self.literature_size {
            return Err(Error::config(
                "reading_budget > literature_size",
                format!(
                    "reading_budget {} exceeds literature_size {}",
                    self.reading_budget, self.literature_size
                ),
            ));
        }
        if self.citing_budget > self.literature_size {
            return Err(Error::config(
                "citing_budget > literature_size",
                format!(
                    "citing_budget {} exceeds literature_size {}",
                    self.citing_budget, self.literature_size
                ),
            ));
        }
        for (field, value) in [
            ("alpha", self.alpha),
            ("beta_reinforce", self.beta_reinforce),
            ("error_sd", self.error_sd),
            ("fit_halfwidth", self.fit_halfwidth),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::config(
                    field,
                    format!("must be finite and >= 0, got {value}"),
                ));
            }
        }
        for (field, dist) in [
            ("quality_dist", &self.quality_dist),
            ("rhetorical_dist", &self.rhetorical_dist),
            ("threshold_dist", &self.threshold_dist),
        ] {
            dist.validate()
                .map_err(|e| Error::config(field, e.to_string()))?;
            let (lo, hi) = dist.support();
            if lo < 0.0 || hi > 1.0 {
                return Err(Error::config(
                    field,
                    format!("support [{lo}, {hi}] must lie within [0, 1]"),
                ));
            }
        }
        Ok(())
    }

    /// Largest citation count any paper can reach.
    pub fn max_citations(&self) -> f64 {
        self.timesteps as f64
    }
}

/// Quality as revealed by reading: `q + fit`, clamped to `[0, 1]`.
pub fn effective_quality(paper: &Paper, view: &AgentView) -> f64 {
    (paper.quality + view.fit[paper.id]).clamp(0.0, 1.0)
}

/// Quality as perceived before reading: the clamped noisy quality plus a
/// premium of `alpha` per citation.
pub fn perceived_quality(paper: &Paper, view: &AgentView, alpha: f64) -> f64 {
    let noisy = (paper.quality + view.fit[paper.id] + view.error[paper.id]).clamp(0.0, 1.0);
    noisy + alpha * paper.citations as f64
}

/// Persuasive value of citing `paper`. A read paper is valued on its
/// error-free quality, an unread one on the noisy perceived quality.
pub fn rhetorical_value(
    paper: &Paper,
    view: &AgentView,
    alpha: f64,
    beta_reinforce: f64,
    has_read: bool,
) -> f64 {
    let quality_term = if has_read {
        effective_quality(paper, view) + alpha * paper.citations as f64
    } else {
        perceived_quality(paper, view, alpha)
    };
    view.rhetorical_base[paper.id] + beta_reinforce * quality_term
}
