//! Straight-line reference implementations shared by the integration tests
//! and the acceptance runner.

#![allow(dead_code)]

use std::collections::BTreeSet;

use citesim::engine::{CitationKind, Decision, Simulation, Trajectory};
use citesim::model::{AgentMode, AgentView, ModelConfig, Variant};
use citesim::{Distribution, RandomStream};

/// Gini from the mean absolute pairwise difference.
pub fn gini_pairwise(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let total: f64 = x.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut diffs = 0.0;
    for a in x {
        for b in x {
            diffs += (a - b).abs();
        }
    }
    diffs / (2.0 * n * total)
}

/// Covariance over the product of standard deviations, computed in one
/// pass from raw sums.
pub fn pearson_direct(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let cov = sxy - sx * sy / n;
    let vx = sxx - sx * sx / n;
    let vy = syy - sy * sy / n;
    if vx <= 1e-12 * sxx.max(1.0) || vy <= 1e-12 * syy.max(1.0) {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

pub fn churn_sets(prev: &[usize], cur: &[usize]) -> usize {
    let a: BTreeSet<usize> = prev.iter().copied().collect();
    let b: BTreeSet<usize> = cur.iter().copied().collect();
    b.difference(&a).count()
}

/// Ids sorted best first by score, ties to the lower id.
fn ranked(ids: &[usize], score: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut v: Vec<(f64, usize)> = ids.iter().map(|&i| (score(i), i)).collect();
    v.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    v.into_iter().map(|(_, i)| i).collect()
}

/// One agent's decision recomputed from the model equations.
pub fn oracle_decide(
    qualities: &[f64],
    citations: &[u32],
    view: &AgentView,
    config: &ModelConfig,
) -> (Vec<usize>, Vec<(usize, CitationKind)>) {
    let n_papers = qualities.len();
    let all: Vec<usize> = (0..n_papers).collect();
    let eff = |i: usize| (qualities[i] + view.fit[i]).clamp(0.0, 1.0);
    let perceived = |i: usize| {
        (qualities[i] + view.fit[i] + view.error[i]).clamp(0.0, 1.0)
            + config.alpha * citations[i] as f64
    };

    let mut reading = ranked(&all, perceived);
    reading.truncate(config.reading_budget);

    let pool: Vec<usize> = match config.variant {
        Variant::NullFixedReference => reading.clone(),
        _ => reading
            .iter()
            .copied()
            .filter(|&i| eff(i) > view.threshold)
            .collect(),
    };
    let mut substantive = ranked(&pool, eff);
    substantive.truncate(config.citing_budget);
    let mut slots: Vec<(usize, CitationKind)> = substantive
        .iter()
        .map(|&i| (i, CitationKind::Substantive))
        .collect();

    if config.variant == Variant::Full {
        let open = config.citing_budget - substantive.len();
        let rhet = |i: usize| {
            let q = if reading.contains(&i) {
                eff(i) + config.alpha * citations[i] as f64
            } else {
                perceived(i)
            };
            view.rhetorical_base[i] + config.beta_reinforce * q
        };
        let mut fill = ranked(&all, rhet);
        fill.truncate(open);
        slots.extend(fill.into_iter().map(|i| (i, CitationKind::Rhetorical)));
    }
    (reading, slots)
}

/// Random configuration with at most 6 papers and 3 timesteps.
pub fn micro_config(stream: &mut RandomStream) -> ModelConfig {
    let n_papers = 1 + stream.index(6);
    let reading = 1 + stream.index(n_papers.min(4));
    let citing = 1 + stream.index(n_papers);
    let pick = |s: &mut RandomStream, xs: &[f64]| xs[s.index(xs.len())];
    ModelConfig {
        literature_size: n_papers,
        reading_budget: reading,
        citing_budget: citing,
        timesteps: stream.index(4),
        alpha: pick(stream, &[0.0, 0.001, 0.05, 0.3]),
        beta_reinforce: pick(stream, &[0.0, 0.3, 1.0, 5.0]),
        error_sd: pick(stream, &[0.0, 0.05, 0.3]),
        fit_halfwidth: pick(stream, &[0.0, 0.1, 0.5]),
        quality_dist: Distribution::BetaOneW {
            w: pick(stream, &[1.0, 6.0]),
        },
        rhetorical_dist: Distribution::BetaOneW { w: 6.0 },
        threshold_dist: Distribution::Uniform { lo: 0.0, hi: 1.0 },
        variant: Variant::ALL[stream.index(3)],
        agent_mode: if stream.index(4) == 0 {
            AgentMode::Homogeneous
        } else {
            AgentMode::Heterogeneous
        },
        seed: stream.index(1 << 20) as u64,
    }
}

/// Steps a simulation while checking every decision against the oracle.
/// Returns a description of the first mismatch.
pub fn check_against_oracle(config: &ModelConfig) -> Result<(), String> {
    let mut sim = Simulation::new(config).map_err(|e| e.to_string())?;
    let qualities: Vec<f64> = sim.papers().iter().map(|p| p.quality()).collect();
    let mut counts: Vec<u32> = vec![0; qualities.len()];
    let mut history: Vec<(Vec<u32>, Vec<usize>)> = Vec::new();
    while !sim.is_done() {
        let t = sim.next_timestep();
        let view = sim.agent_view(t).map_err(|e| e.to_string())?;
        let (reading, slots) = oracle_decide(&qualities, &counts, &view, config);
        let Decision { reading_set, refs } = sim.step().map_err(|e| e.to_string())?;
        if reading_set != reading {
            return Err(format!(
                "t={t}: reading {reading_set:?} vs oracle {reading:?}"
            ));
        }
        let got: Vec<(usize, CitationKind)> =
            refs.slots.iter().map(|s| (s.paper_id, s.kind)).collect();
        if got != slots {
            return Err(format!("t={t}: slots {got:?} vs oracle {slots:?}"));
        }
        let cited: BTreeSet<usize> = slots.iter().map(|s| s.0).collect();
        for &i in &cited {
            counts[i] += 1;
        }
        let now: Vec<u32> = sim.papers().iter().map(|p| p.citations).collect();
        if now != counts {
            return Err(format!("t={t}: counts {now:?} vs oracle {counts:?}"));
        }
        history.push((counts.clone(), cited.into_iter().collect()));
    }
    let trajectory = sim.finish();
    for (t, (record, (counts, cited))) in trajectory.records.iter().zip(&history).enumerate() {
        let s = &record.snapshot;
        let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        if (s.gini - gini_pairwise(&xs)).abs() > 1e-12 {
            return Err(format!(
                "t={t}: gini {} vs oracle {}",
                s.gini,
                gini_pairwise(&xs)
            ));
        }
        let want = if xs.len() < 2 {
            None
        } else {
            pearson_direct(&xs, &qualities)
        };
        match (s.correlation, want) {
            (None, None) => {}
            (Some(a), Some(b)) if (a - b).abs() < 1e-9 => {}
            (a, b) => return Err(format!("t={t}: correlation {a:?} vs oracle {b:?}")),
        }
        let churn = (t > 0).then(|| churn_sets(&history[t - 1].1, cited));
        if s.churn != churn {
            return Err(format!("t={t}: churn {:?} vs oracle {churn:?}", s.churn));
        }
    }
    Ok(())
}

/// The engine invariants every run must satisfy, checked step by step.
pub fn check_invariants(config: &ModelConfig) -> Result<Trajectory, String> {
    let mut sim = Simulation::new(config).map_err(|e| e.to_string())?;
    let (n, m) = (config.citing_budget, config.reading_budget);
    let mut before: Vec<u32> = vec![0; config.literature_size];
    while !sim.is_done() {
        let t = sim.next_timestep();
        let view = sim.agent_view(t).map_err(|e| e.to_string())?;
        let d = sim.step().map_err(|e| e.to_string())?;
        let refs = &d.refs;
        let subs: Vec<usize> = refs
            .slots
            .iter()
            .filter(|s| s.kind == CitationKind::Substantive)
            .map(|s| s.paper_id)
            .collect();
        let rhetorical = refs.count(CitationKind::Rhetorical);
        match config.variant {
            Variant::Full if refs.len() != n => {
                return Err(format!(
                    "t={t}: full model filled {} of {n} slots",
                    refs.len()
                ))
            }
            Variant::NullFixedReference if refs.len() != n.min(m) => {
                return Err(format!(
                    "t={t}: fixed-reference list has {} slots",
                    refs.len()
                ))
            }
            _ if refs.len() > n => return Err(format!("t={t}: {} slots over budget", refs.len())),
            _ => {}
        }
        if config.variant != Variant::Full && rhetorical > 0 {
            return Err(format!(
                "t={t}: null model made {rhetorical} rhetorical citations"
            ));
        }
        if let Some(id) = subs.iter().find(|id| !d.reading_set.contains(id)) {
            return Err(format!("t={t}: substantive citation of unread paper {id}"));
        }
        if config.variant != Variant::NullFixedReference {
            let papers = sim.papers();
            if let Some(id) = subs.iter().find(|&&id| {
                (papers[id].quality() + view.fit[id]).clamp(0.0, 1.0) <= view.threshold
            }) {
                return Err(format!("t={t}: paper {id} cited below threshold"));
            }
        }
        let after: Vec<u32> = sim.papers().iter().map(|p| p.citations).collect();
        let gained: u32 = after.iter().zip(&before).map(|(a, b)| a - b).sum();
        if after.iter().zip(&before).any(|(a, b)| a < b || a - b > 1) {
            return Err(format!("t={t}: a count moved by other than 0 or 1"));
        }
        if gained as usize != refs.distinct_papers().count() {
            return Err(format!(
                "t={t}: counts gained {gained}, distinct cited differs"
            ));
        }
        before = after;
    }
    let trajectory = sim.finish();
    let total: u32 = trajectory.citations.iter().sum();
    let distinct: usize = trajectory
        .records
        .iter()
        .map(|r| r.refs.distinct_papers().count())
        .sum();
    if total as usize != distinct {
        return Err("final counts do not sum to distinct citations".into());
    }
    Ok(trajectory)
}
