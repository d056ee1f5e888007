//! Latency/bandwidth cost model for the 1D and 2D searches and its
//! comparison against measured communication.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::comm::{CommPhase, CommStats};
use crate::error::{Error, Result};

/// Local access latency as a step function of working-set size: the value of
/// the first breakpoint whose size is at least `x`, or the last value when
/// `x` exceeds every breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlphaL {
    steps: Vec<(f64, f64)>,
}

impl AlphaL {
    pub fn new(steps: Vec<(f64, f64)>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Config(
                "alpha_L needs at least one breakpoint".into(),
            ));
        }
        if steps
            .iter()
            .any(|&(s, v)| !(s >= 0.0 && v >= 0.0 && s.is_finite() && v.is_finite()))
        {
            return Err(Error::Config(format!(
                "alpha_L entries must be finite and >= 0: {steps:?}"
            )));
        }
        if steps
            .windows(2)
            .any(|w| w[0].0 >= w[1].0 || w[0].1 > w[1].1)
        {
            return Err(Error::Config(format!(
                "alpha_L breakpoints must increase in size with nondecreasing values: {steps:?}"
            )));
        }
        Ok(AlphaL { steps })
    }

    pub fn constant(value: f64) -> Self {
        AlphaL {
            steps: vec![(0.0, value)],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.steps
            .iter()
            .find(|&&(size, _)| x <= size)
            .unwrap_or_else(|| self.steps.last().unwrap())
            .1
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaKind {
    /// `c`
    Constant,
    /// `c * p^(1/3)`, a 3D torus under all-to-all load.
    Torus,
    /// `c * p`, no parallel speedup.
    Ring,
}

/// Network inverse bandwidth per word as a function of participant count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaN {
    pub kind: BetaKind,
    pub coefficient: f64,
}

impl BetaN {
    pub fn constant(c: f64) -> Self {
        BetaN {
            kind: BetaKind::Constant,
            coefficient: c,
        }
    }

    pub fn eval(&self, p: f64) -> f64 {
        match self.kind {
            BetaKind::Constant => self.coefficient,
            BetaKind::Torus => self.coefficient * p.cbrt(),
            BetaKind::Ring => self.coefficient * p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMachineParams", into = "RawMachineParams")]
pub struct MachineParams {
    pub alpha_l: AlphaL,
    pub beta_l: f64,
    pub alpha_n: f64,
    pub beta_n_a2a: BetaN,
    pub beta_n_ag: BetaN,
    pub beta_n_p2p: BetaN,
}

/// On-disk form: `beta_N` applies to every collective unless a specific
/// `beta_N_a2a`, `beta_N_ag` or `beta_N_p2p` is given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMachineParams {
    #[serde(rename = "alpha_L")]
    alpha_l: Vec<(f64, f64)>,
    #[serde(rename = "beta_L")]
    beta_l: f64,
    #[serde(rename = "alpha_N")]
    alpha_n: f64,
    #[serde(rename = "beta_N", default, skip_serializing_if = "Option::is_none")]
    beta_n: Option<BetaN>,
    #[serde(
        rename = "beta_N_a2a",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    beta_n_a2a: Option<BetaN>,
    #[serde(rename = "beta_N_ag", default, skip_serializing_if = "Option::is_none")]
    beta_n_ag: Option<BetaN>,
    #[serde(
        rename = "beta_N_p2p",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    beta_n_p2p: Option<BetaN>,
}

impl TryFrom<RawMachineParams> for MachineParams {
    type Error = Error;

    fn try_from(raw: RawMachineParams) -> Result<Self> {
        let pick = |specific: Option<BetaN>, name: &str| {
            specific.or(raw.beta_n).ok_or_else(|| {
                Error::Config(format!("machine parameters need beta_N or beta_N_{name}"))
            })
        };
        let mp = MachineParams {
            alpha_l: AlphaL::new(raw.alpha_l.clone())?,
            beta_l: raw.beta_l,
            alpha_n: raw.alpha_n,
            beta_n_a2a: pick(raw.beta_n_a2a, "a2a")?,
            beta_n_ag: pick(raw.beta_n_ag, "ag")?,
            beta_n_p2p: pick(raw.beta_n_p2p, "p2p")?,
        };
        mp.validate()?;
        Ok(mp)
    }
}

impl From<MachineParams> for RawMachineParams {
    fn from(mp: MachineParams) -> Self {
        RawMachineParams {
            alpha_l: mp.alpha_l.steps,
            beta_l: mp.beta_l,
            alpha_n: mp.alpha_n,
            beta_n: None,
            beta_n_a2a: Some(mp.beta_n_a2a),
            beta_n_ag: Some(mp.beta_n_ag),
            beta_n_p2p: Some(mp.beta_n_p2p),
        }
    }
}

impl MachineParams {
    /// Every latency and bandwidth term equal to 1.
    pub fn unit() -> Self {
        MachineParams {
            alpha_l: AlphaL::constant(1.0),
            beta_l: 1.0,
            alpha_n: 1.0,
            beta_n_a2a: BetaN::constant(1.0),
            beta_n_ag: BetaN::constant(1.0),
            beta_n_p2p: BetaN::constant(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [
            self.beta_l,
            self.alpha_n,
            self.beta_n_a2a.coefficient,
            self.beta_n_ag.coefficient,
            self.beta_n_p2p.coefficient,
        ];
        if scalars.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Config(format!(
                "machine parameters must be finite and >= 0: {scalars:?}"
            )));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("machine parameters: {e}")))
    }

    /// Reads TOML when the extension is `.toml`, JSON otherwise.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            _ => Self::from_json_str(&text),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostInputs {
    pub n: f64,
    pub m: f64,
    /// Cores: processes times threads.
    pub p: f64,
    pub p_r: usize,
    pub p_c: usize,
    pub t: usize,
    /// Processes after the thread substitution `p -> p / t`.
    pub processes: f64,
}

/// One communication term: `messages * alpha_N + words * beta`, per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommTerm {
    pub name: String,
    pub phase: CommPhase,
    /// Participants in the collective.
    pub participants: f64,
    pub messages: f64,
    pub words: f64,
    pub latency: f64,
    pub bandwidth: f64,
    /// The term bounds the cost from above rather than estimating it.
    pub upper_bound: bool,
}

impl CommTerm {
    pub fn cost(&self) -> f64 {
        self.latency + self.bandwidth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTerms {
    /// Streaming over the local edges.
    pub edge_stream: f64,
    /// Random accesses per vertex.
    pub vertex_access: f64,
    /// Random accesses per edge.
    pub edge_access: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub model: Model,
    pub inputs: CostInputs,
    pub local: LocalTerms,
    pub local_mem: f64,
    pub comm_latency: f64,
    pub comm_bandwidth: f64,
    pub terms: Vec<CommTerm>,
    /// Estimates outside the published formulas; not part of `total`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extensions: Vec<CommTerm>,
    pub total: f64,
}

impl CostBreakdown {
    pub fn comm(&self) -> f64 {
        self.comm_latency + self.comm_bandwidth
    }

    pub fn term(&self, phase: CommPhase) -> Option<&CommTerm> {
        self.terms.iter().find(|t| t.phase == phase)
    }

    fn finish(
        model: Model,
        inputs: CostInputs,
        local: LocalTerms,
        terms: Vec<CommTerm>,
        extensions: Vec<CommTerm>,
    ) -> Self {
        let local_mem = local.edge_stream + local.vertex_access + local.edge_access;
        let comm_latency = terms.iter().map(|t| t.latency).sum();
        let comm_bandwidth = terms.iter().map(|t| t.bandwidth).sum();
        CostBreakdown {
            model,
            inputs,
            local,
            local_mem,
            comm_latency,
            comm_bandwidth,
            terms,
            extensions,
            total: local_mem + comm_latency + comm_bandwidth,
        }
    }
}

fn comm_term(
    name: &str,
    phase: CommPhase,
    participants: f64,
    words: f64,
    alpha_n: f64,
    beta: &BetaN,
    upper_bound: bool,
) -> CommTerm {
    // A single participant moves nothing over the network.
    let (messages, words) = if participants <= 1.0 {
        (0.0, 0.0)
    } else {
        (participants, words)
    };
    CommTerm {
        name: name.into(),
        phase,
        participants,
        messages,
        words,
        latency: messages * alpha_n,
        bandwidth: if words == 0.0 {
            0.0
        } else {
            words * beta.eval(participants)
        },
        upper_bound,
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Config(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

/// 1D model on `p` cores with `t` threads per process.
///
/// Local: `(m/q) beta_L + (n/q) alpha_L(n/q) + (m/q) alpha_L(n/q)`;
/// all-to-all: `q alpha_N + (m/q) beta_a2a(q)`, with `q = p / t` processes
/// (real-valued).
pub fn cost_1d(n: f64, m: f64, p: f64, t: usize, mp: &MachineParams) -> Result<CostBreakdown> {
    check_positive("p", p)?;
    if t == 0 {
        return Err(Error::Config("t must be at least 1".into()));
    }
    let q = p / t as f64;
    let (nq, mq) = (n / q, m / q);
    let a = mp.alpha_l.eval(nq);
    let local = LocalTerms {
        edge_stream: mq * mp.beta_l,
        vertex_access: nq * a,
        edge_access: mq * a,
    };
    let terms = vec![comm_term(
        "alltoall",
        CommPhase::Alltoall,
        q,
        mq,
        mp.alpha_n,
        &mp.beta_n_a2a,
        false,
    )];
    let inputs = CostInputs {
        n,
        m,
        p,
        p_r: q.round().max(1.0) as usize,
        p_c: 1,
        t,
        processes: q,
    };
    Ok(CostBreakdown::finish(
        Model::OneD,
        inputs,
        local,
        terms,
        Vec::new(),
    ))
}

/// 2D model on a `p_r x p_c` grid.
///
/// Local: `(m/p) beta_L + (n/p) alpha_L(n/p_c) + (m/p) alpha_L(n/p_r)`;
/// expand: `p_r alpha_N + (n/p_c) beta_ag(p_r)`; fold (upper bound):
/// `p_c alpha_N + (m/p) beta_a2a(p_c)`. The transpose estimate
/// `alpha_N + (n/p) beta_p2p(p)` is reported as an extension only.
pub fn cost_2d(
    n: f64,
    m: f64,
    p_r: usize,
    p_c: usize,
    mp: &MachineParams,
) -> Result<CostBreakdown> {
    if p_r == 0 || p_c == 0 {
        return Err(Error::Config(format!("empty {p_r}x{p_c} grid")));
    }
    let (pr, pc) = (p_r as f64, p_c as f64);
    let p = pr * pc;
    let local = LocalTerms {
        edge_stream: m / p * mp.beta_l,
        vertex_access: n / p * mp.alpha_l.eval(n / pc),
        edge_access: m / p * mp.alpha_l.eval(n / pr),
    };
    let terms = vec![
        comm_term(
            "expand",
            CommPhase::Allgather,
            pr,
            n / pc,
            mp.alpha_n,
            &mp.beta_n_ag,
            false,
        ),
        comm_term(
            "fold",
            CommPhase::Alltoall,
            pc,
            m / p,
            mp.alpha_n,
            &mp.beta_n_a2a,
            true,
        ),
    ];
    let mut transpose = comm_term(
        "transpose",
        CommPhase::Transpose,
        p,
        n / p,
        mp.alpha_n,
        &mp.beta_n_p2p,
        false,
    );
    if p > 1.0 {
        // one partner, so one message
        transpose.messages = 1.0;
        transpose.latency = mp.alpha_n;
    }
    let inputs = CostInputs {
        n,
        m,
        p,
        p_r,
        p_c,
        t: 1,
        processes: p,
    };
    Ok(CostBreakdown::finish(
        Model::TwoD,
        inputs,
        local,
        terms,
        vec![transpose],
    ))
}

/// Model words and messages per node against the measured counters of the
/// matching phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub term: String,
    pub phase: CommPhase,
    pub upper_bound: bool,
    /// Present for terms outside the published formulas.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub extension: bool,
    pub model_words_per_node: f64,
    pub measured_input_words: u64,
    pub measured_network_words: u64,
    pub measured_words_max_rank: u64,
    pub measured_words_mean_rank: f64,
    /// Busiest rank over the model; 1 when both are zero, absent when only
    /// the model is zero.
    pub words_ratio: Option<f64>,
    pub model_messages_per_node: f64,
    pub measured_messages_max_rank_per_level: f64,
    pub messages_ratio: Option<f64>,
    /// For upper-bound terms: every rank at or below the bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub within_bound: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub model: Model,
    pub rows: Vec<ComparisonRow>,
}

fn ratio(measured: f64, model: f64) -> Option<f64> {
    match (measured == 0.0, model == 0.0) {
        (true, true) => Some(1.0),
        (false, true) => None,
        _ => Some(measured / model),
    }
}

fn max_and_mean(values: impl Iterator<Item = u64>) -> (u64, f64) {
    let v: Vec<u64> = values.collect();
    let max = v.iter().copied().max().unwrap_or(0);
    let mean = if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<u64>() as f64 / v.len() as f64
    };
    (max, mean)
}

/// Pairs each model term with the measured counters of its phase. Model
/// words are totals per node over the whole search; model messages are per
/// collective call, so measured messages are divided by the number of
/// levels.
pub fn compare_model_vs_measured(cb: &CostBreakdown, stats: &CommStats) -> Result<ModelComparison> {
    let (p_r, p_c) = match cb.model {
        Model::OneD => (cb.inputs.processes.round() as usize, 1),
        Model::TwoD => (cb.inputs.p_r, cb.inputs.p_c),
    };
    let model_is_whole = (cb.inputs.processes - cb.inputs.processes.round()).abs() < 1e-9;
    if !model_is_whole || (p_r, p_c) != (stats.p_r, stats.p_c) {
        return Err(Error::Config(format!(
            "model evaluated for a {p_r}x{p_c} grid ({} processes) but the run used {}x{}",
            cb.inputs.processes, stats.p_r, stats.p_c
        )));
    }
    let levels = stats.per_level.len().max(1) as f64;
    let row = |term: &CommTerm, extension: bool| {
        let c = stats.phase(term.phase);
        let (max, mean) = max_and_mean(stats.per_rank.iter().map(|r| r.sent.get(term.phase)));
        let (max_msgs, _) = max_and_mean(stats.per_rank.iter().map(|r| r.messages.get(term.phase)));
        let msgs_per_level = max_msgs as f64 / levels;
        ComparisonRow {
            term: term.name.clone(),
            phase: term.phase,
            upper_bound: term.upper_bound,
            extension,
            model_words_per_node: term.words,
            measured_input_words: c.input_words,
            measured_network_words: c.words,
            measured_words_max_rank: max,
            measured_words_mean_rank: mean,
            words_ratio: ratio(max as f64, term.words),
            model_messages_per_node: term.messages,
            measured_messages_max_rank_per_level: msgs_per_level,
            messages_ratio: ratio(msgs_per_level, term.messages),
            within_bound: term.upper_bound.then_some(max as f64 <= term.words),
        }
    };
    let mut rows: Vec<ComparisonRow> = cb.terms.iter().map(|t| row(t, false)).collect();
    rows.extend(cb.extensions.iter().map(|t| row(t, true)));
    Ok(ModelComparison {
        model: cb.model,
        rows,
    })
}
