//! Toy-blocklength random-coding experiments: codebooks drawn from the
//! auxiliary marginals, typicality encoding at each transmitter, a discrete
//! or Gaussian MAC, and joint-typicality decoding with error attribution.
//!
//! Typicality is weak typicality: a tuple of sequences is typical for a
//! variable set S when |−(1/n)·log2 p(s^n) − H(S)| ≤ ε, with differential
//! entropies and densities for real-valued variables. The encoder of user i
//! tests (U_i, Z_i, W_i). The decoder tests the full set
//! (W1, W2, X1, X2, Y, Z) together with the per-user sets (W_i, X_i, Y, Z).
//! Candidates are compared as auxiliary sequences, so two codebook entries
//! carrying the same W sequence never make a decode ambiguous on their own.

use std::collections::HashMap;
use std::f64::consts::{E, LN_2, PI};

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{sample_codeword, Component, MixtureSpec};
use crate::probability::{DiscreteKernel, DistortionMeasure, JointPmf, Variable};
use crate::region::{cond_mi, refs, Decoder, SystemSpec};

/// Default cap on the number of codewords per user.
pub const DEFAULT_BUDGET: u64 = 1 << 20;

/// Panels per component used for mixture entropies.
const ENTROPY_PANELS: usize = 2000;

/// Half-width of each component's integration window, in standard deviations.
const ENTROPY_SPAN: f64 = 10.0;

/// Two-user Gaussian MAC Y = X1 + X2 + N driven by per-symbol mixtures.
/// The auxiliaries are the source symbols themselves, so the link is
/// lossless under Hamming distortion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianLink {
    /// Joint pmf of the two sources, in the order (U1, U2).
    pub source: JointPmf,
    /// Channel-input mixtures; rescaled to the design power before use.
    pub mixture: MixtureSpec,
    /// Average power constraints α1, α2.
    pub powers: [f64; 2],
    #[serde(default = "one")]
    pub sigma_n2: f64,
    /// Codewords are drawn with average power α_i − backoff; defaults to ε.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backoff: Option<f64>,
}

/// Channel and coding ingredients of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    Discrete { system: SystemSpec },
    Gaussian { link: GaussianLink },
}

/// One experiment at a single blocklength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookConfig {
    pub n: usize,
    /// Rate offset added to I(U_i, Z_i; W_i).
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Explicit codebook rates R'_i, overriding the offset rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<[f64; 2]>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Largest codebook allowed per user.
    #[serde(default = "default_budget")]
    pub budget: u64,
    pub model: ChannelModel,
}

fn one() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    0.2
}
fn default_epsilon() -> f64 {
    0.15
}
fn default_trials() -> usize {
    2000
}
fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

impl CodebookConfig {
    /// Configuration with default δ, ε, seed, trial count and budget.
    pub fn new(model: ChannelModel, n: usize) -> Self {
        CodebookConfig {
            n,
            delta: default_delta(),
            rates: None,
            epsilon: default_epsilon(),
            seed: 0,
            trials: default_trials(),
            budget: DEFAULT_BUDGET,
            model,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParam("blocklength must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "typicality slack must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "rate offset must be positive, got {}",
                self.delta
            )));
        }
        if let Some(r) = self.rates {
            if r.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidParam(format!("invalid codebook rates {r:?}")));
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidParam("need at least one trial".into()));
        }
        Ok(())
    }
}

/// Per-letter channel inputs attached to each codeword.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelInputs {
    Discrete(Vec<u32>),
    Real(Vec<f64>),
}

/// One user's codebook: `len()` auxiliary sequences of length n, each with
/// its channel sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n: usize,
    rate: f64,
    words: Vec<u32>,
    inputs: ChannelInputs,
    class: Vec<u32>,
}

impl Codebook {
    /// Builds a codebook from row-major codeword and input tables.
    pub fn new(n: usize, rate: f64, words: Vec<u32>, inputs: ChannelInputs) -> Result<Self> {
        let len = match &inputs {
            ChannelInputs::Discrete(x) => x.len(),
            ChannelInputs::Real(x) => x.len(),
        };
        if n == 0 || !words.len().is_multiple_of(n) || len != words.len() || words.is_empty() {
            return Err(Error::ShapeMismatch {
                expected: words.len(),
                got: len,
            });
        }
        let mut seen: HashMap<&[u32], u32> = HashMap::new();
        let class = words
            .chunks(n)
            .map(|w| {
                let next = seen.len() as u32;
                *seen.entry(w).or_insert(next)
            })
            .collect();
        Ok(Codebook {
            n,
            rate,
            words,
            inputs,
            class,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn word(&self, a: usize) -> &[u32] {
        &self.words[a * self.n..(a + 1) * self.n]
    }

    pub fn inputs(&self) -> &ChannelInputs {
        &self.inputs
    }

    pub fn discrete_input(&self, a: usize) -> Option<&[u32]> {
        match &self.inputs {
            ChannelInputs::Discrete(x) => Some(&x[a * self.n..(a + 1) * self.n]),
            ChannelInputs::Real(_) => None,
        }
    }

    pub fn real_input(&self, a: usize) -> Option<&[f64]> {
        match &self.inputs {
            ChannelInputs::Real(x) => Some(&x[a * self.n..(a + 1) * self.n]),
            ChannelInputs::Discrete(_) => None,
        }
    }

    /// Number of distinct auxiliary sequences.
    pub fn distinct(&self) -> usize {
        self.class.iter().max().map_or(0, |&c| c as usize + 1)
    }

    fn same_word(&self, a: usize, b: usize) -> bool {
        self.class[a] == self.class[b]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebooks {
    pub users: [Codebook; 2],
}

/// n letters of the source, each a full assignment of the source variables
/// in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceBlock {
    pub letters: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Received {
    Discrete(Vec<usize>),
    Real(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub output: Received,
    /// Whether each transmitted codeword broke its power constraint.
    pub erased: [bool; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeError {
    /// No candidate pair is jointly typical.
    NotFound,
    /// Typical candidates carry more than one pair of auxiliary sequences.
    Ambiguous,
}

/// Cause of a failed block, by priority E1 > erasure > E2 > E3 > E3' > E4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorEvent {
    /// Some encoder found no typical codeword.
    E1,
    /// A transmitted codeword violated its power constraint.
    Erasure,
    /// The transmitted pair is not jointly typical with the output.
    E2,
    /// Another W1 sequence with the true W2 sequence is typical.
    E3,
    /// Another W2 sequence with the true W1 sequence is typical.
    E3Prime,
    /// A pair with both sequences wrong is typical.
    E4,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub e1: usize,
    pub erasure: usize,
    pub e2: usize,
    pub e3: usize,
    pub e3_prime: usize,
    pub e4: usize,
}

impl EventCounts {
    pub fn total(&self) -> usize {
        self.e1 + self.erasure + self.e2 + self.e3 + self.e3_prime + self.e4
    }

    fn add(&mut self, e: ErrorEvent) {
        match e {
            ErrorEvent::E1 => self.e1 += 1,
            ErrorEvent::Erasure => self.erasure += 1,
            ErrorEvent::E2 => self.e2 += 1,
            ErrorEvent::E3 => self.e3 += 1,
            ErrorEvent::E3Prime => self.e3_prime += 1,
            ErrorEvent::E4 => self.e4 += 1,
        }
    }

    fn rates(&self, trials: usize) -> EventRates {
        let t = trials as f64;
        EventRates {
            e1: self.e1 as f64 / t,
            erasure: self.erasure as f64 / t,
            e2: self.e2 as f64 / t,
            e3: self.e3 as f64 / t,
            e3_prime: self.e3_prime as f64 / t,
            e4: self.e4 as f64 / t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRates {
    pub e1: f64,
    pub erasure: f64,
    pub e2: f64,
    pub e3: f64,
    pub e3_prime: f64,
    pub e4: f64,
}

/// Aggregate of all trials of one experiment. Half-widths are 95% normal
/// intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub n: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub rates: [f64; 2],
    pub codebook_sizes: [usize; 2],
    pub counts: EventCounts,
    pub event_rates: EventRates,
    pub failures: usize,
    pub block_error_rate: f64,
    pub block_error_half_width: f64,
    /// Average per-letter distortion of the reconstructions, one entry per
    /// reconstructed source. Failed blocks use the decoder's output when it
    /// is unique and the first codeword pair otherwise.
    pub distortion: Vec<f64>,
    pub distortion_half_width: Vec<f64>,
    /// Same average with every failed block charged the maximum distortion.
    pub distortion_dmax: Vec<f64>,
}

/// −log2 p over a discrete variable set, with its entropy.
#[derive(Debug, Clone)]
struct Typ {
    nll: Vec<f64>,
    h: f64,
}

impl Typ {
    fn new(j: &JointPmf, names: &[String]) -> Result<Self> {
        let r = refs(names);
        let m = j.marginal(&r)?;
        let h = m.entropy(&r, &[])?;
        let nll = m
            .probs()
            .iter()
            .map(|&p| if p > 0.0 { -p.log2() } else { f64::INFINITY })
            .collect();
        Ok(Typ { nll, h })
    }
}

fn within(sum: f64, n: usize, h: f64, eps: f64) -> bool {
    sum.is_finite() && (sum / n as f64 - h).abs() <= eps
}

fn dedup(v: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn row_major(idx: impl Iterator<Item = (usize, usize)>) -> usize {
    idx.fold(0, |acc, (x, size)| acc * size + x)
}

/// Encoder-side tables for one user: the context (U_i, Z_i) is read from
/// the source letter at `vars`.
#[derive(Debug, Clone)]
struct EncoderTables {
    vars: Vec<usize>,
    sizes: Vec<usize>,
    w_size: usize,
    w_marginal: Vec<f64>,
    typ: Typ,
    mi: f64,
}

impl EncoderTables {
    fn new(source: &JointPmf, j: &JointPmf, u: &str, z: &[String], w: &str) -> Result<Self> {
        let ctx = dedup(std::iter::once(u.to_string()).chain(z.iter().cloned()));
        let vars = ctx
            .iter()
            .map(|n| source.index_of(n))
            .collect::<Result<Vec<_>>>()?;
        let sizes = vars.iter().map(|&i| source.variables()[i].size).collect();
        let mut names = ctx.clone();
        names.push(w.to_string());
        Ok(EncoderTables {
            vars,
            sizes,
            w_size: j.size_of(w)?,
            w_marginal: j.marginal(&[w])?.probs().to_vec(),
            typ: Typ::new(j, &names)?,
            mi: cond_mi(j, &ctx, &[w.to_string()], &[])?,
        })
    }

    fn context(&self, letter: &[usize]) -> usize {
        row_major(
            self.vars
                .iter()
                .map(|&i| letter[i])
                .zip(self.sizes.iter().copied()),
        )
    }
}

#[derive(Debug, Clone)]
struct DiscreteModel {
    chin: [DiscreteKernel; 2],
    x_size: [usize; 2],
    channel: DiscreteKernel,
    /// For each channel input, which user feeds it.
    channel_users: Vec<usize>,
    y_size: usize,
    z_vars: Vec<usize>,
    z_sizes: Vec<usize>,
    side: [Typ; 2],
    full: Typ,
    u_pos: [usize; 2],
    decoder: Option<Decoder>,
    measures: Vec<DistortionMeasure>,
}

impl DiscreteModel {
    fn z_rows(&self) -> usize {
        self.z_sizes.iter().product()
    }

    fn z_index(&self, letter: &[usize]) -> usize {
        row_major(
            self.z_vars
                .iter()
                .map(|&i| letter[i])
                .zip(self.z_sizes.iter().copied()),
        )
    }
}

/// Precomputed log-density terms of one Gaussian component.
#[derive(Debug, Clone, Copy)]
struct LogComp {
    ln_coef: f64,
    mean: f64,
    inv2var: f64,
}

impl LogComp {
    fn new(weight: f64, mean: f64, var: f64) -> Self {
        LogComp {
            ln_coef: weight.ln() - 0.5 * (2.0 * PI * var).ln(),
            mean,
            inv2var: 0.5 / var,
        }
    }

    fn ln_term(&self, x: f64) -> f64 {
        let d = x - self.mean;
        self.ln_coef - d * d * self.inv2var
    }
}

fn ln_mixture(comps: &[LogComp], x: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for c in comps {
        best = best.max(c.ln_term(x));
    }
    if best == f64::NEG_INFINITY {
        return best;
    }
    let s: f64 = comps.iter().map(|c| (c.ln_term(x) - best).exp()).sum();
    best + s.ln()
}

fn log_comps(comps: &[Component]) -> Vec<LogComp> {
    comps
        .iter()
        .filter(|c| c.weight > 0.0)
        .map(|c| LogComp::new(c.weight, c.mean, c.var))
        .collect()
}

/// Differential entropy in bits of a one-dimensional Gaussian mixture,
/// integrated component by component with composite Simpson.
pub fn mixture_entropy_bits(components: &[Component]) -> Result<f64> {
    if components.iter().any(|c| c.weight > 0.0 && c.var <= 0.0) {
        return Err(Error::ZeroVarianceComponent);
    }
    let lc = log_comps(components);
    let m = ENTROPY_PANELS;
    let mut h = 0.0;
    for c in components.iter().filter(|c| c.weight > 0.0) {
        let sd = c.var.sqrt();
        let lo = c.mean - ENTROPY_SPAN * sd;
        let step = 2.0 * ENTROPY_SPAN * sd / m as f64;
        let own = LogComp::new(1.0, c.mean, c.var);
        let mut s = 0.0;
        for i in 0..=m {
            let x = lo + i as f64 * step;
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * own.ln_term(x).exp() * -ln_mixture(&lc, x);
        }
        h += c.weight * s * step / 3.0;
    }
    Ok(h / LN_2)
}

#[derive(Debug, Clone)]
struct GaussianModel {
    /// Mixtures at the design power, `mix[i][w]`.
    mix: [Vec<Vec<Component>>; 2],
    mix_ln: [Vec<Vec<LogComp>>; 2],
    /// `cond[i][w]`: density of Y − X_i given W_i = w.
    cond: [Vec<Vec<LogComp>>; 2],
    marg_nll: [Vec<f64>; 2],
    joint_nll: Vec<f64>,
    w_size: [usize; 2],
    side_h: [f64; 2],
    full_h: f64,
    powers: [f64; 2],
    sigma_n2: f64,
}

impl GaussianModel {
    fn x_nll(&self, user: usize, w: usize, x: f64) -> f64 {
        -ln_mixture(&self.mix_ln[user][w], x) / LN_2
    }

    fn noise_nll(&self, e: f64) -> f64 {
        (0.5 * (2.0 * PI * self.sigma_n2).ln() + e * e / (2.0 * self.sigma_n2)) / LN_2
    }
}

fn second_moment(spec: &MixtureSpec, s: usize, marg: &[f64]) -> f64 {
    spec.sources[s]
        .iter()
        .zip(marg)
        .map(|(comps, p)| {
            p * comps
                .iter()
                .map(|c| c.weight * (c.var + c.mean * c.mean))
                .sum::<f64>()
        })
        .sum()
}

#[derive(Debug, Clone)]
enum Model {
    Discrete(Box<DiscreteModel>),
    Gaussian(Box<GaussianModel>),
}

#[derive(Debug, Clone)]
struct Compiled {
    encoders: [EncoderTables; 2],
    model: Model,
}

fn nll_table(p: &[f64]) -> Vec<f64> {
    p.iter()
        .map(|&p| if p > 0.0 { -p.log2() } else { f64::INFINITY })
        .collect()
}

fn compile_discrete(s: &SystemSpec) -> Result<Compiled> {
    s.validate()?;
    let j = s.joint()?;
    let src = &s.source;
    let encoders = [
        EncoderTables::new(src, &j, &s.u1, &s.z1, s.w1())?,
        EncoderTables::new(src, &j, &s.u2, &s.z2, s.w2())?,
    ];
    let z = dedup(s.z.iter().cloned());
    let z_vars = z
        .iter()
        .map(|n| src.index_of(n))
        .collect::<Result<Vec<_>>>()?;
    let z_sizes = z_vars.iter().map(|&i| src.variables()[i].size).collect();
    let tail = |head: [&str; 2]| -> Vec<String> {
        head.iter()
            .map(|h| h.to_string())
            .chain(std::iter::once(s.y().to_string()))
            .chain(z.iter().cloned())
            .collect()
    };
    let side = [
        Typ::new(&j, &tail([s.w1(), s.x1()]))?,
        Typ::new(&j, &tail([s.w2(), s.x2()]))?,
    ];
    let mut full_names = vec![s.w1().to_string(), s.x1().to_string()];
    full_names.extend(tail([s.w2(), s.x2()]));
    let full = Typ::new(&j, &full_names)?;
    let channel_users = s
        .channel
        .inputs()
        .iter()
        .map(|v| if v.name == s.x1() { 0 } else { 1 })
        .collect();
    let (decoder, measures) = match &s.decoder {
        Some(d) => (
            Some(d.clone()),
            s.distortion.iter().map(|t| t.measure.clone()).collect(),
        ),
        None => (None, Vec::new()),
    };
    Ok(Compiled {
        encoders,
        model: Model::Discrete(Box::new(DiscreteModel {
            chin: [s.chin1.clone(), s.chin2.clone()],
            x_size: [s.chin1.output().size, s.chin2.output().size],
            channel: s.channel.clone(),
            channel_users,
            y_size: s.channel.output().size,
            z_vars,
            z_sizes,
            side,
            full,
            u_pos: [src.index_of(&s.u1)?, src.index_of(&s.u2)?],
            decoder,
            measures,
        })),
    })
}

fn compile_gaussian(link: &GaussianLink, epsilon: f64) -> Result<Compiled> {
    let vars = link.source.variables();
    if vars.len() != 2 {
        return Err(Error::InvalidParam(format!(
            "Gaussian link needs a pmf over exactly two sources, got {}",
            vars.len()
        )));
    }
    if link.powers.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::InvalidParam(format!(
            "invalid powers {:?}",
            link.powers
        )));
    }
    if !(link.sigma_n2.is_finite() && link.sigma_n2 > 0.0) {
        return Err(Error::InvalidParam(format!(
            "invalid noise variance {}",
            link.sigma_n2
        )));
    }
    link.mixture.validate()?;
    link.mixture.check_covers(&link.source)?;
    let backoff = link.backoff.unwrap_or(epsilon);
    let names = [vars[0].name.clone(), vars[1].name.clone()];
    let w_names = names.clone().map(|n| format!("{n}#w"));
    let mut j = link.source.clone();
    for i in 0..2 {
        j = j.attach_kernel(&DiscreteKernel::identity(
            vars[i].clone(),
            w_names[i].clone(),
        )?)?;
    }
    let encoders = [
        EncoderTables::new(&link.source, &j, &names[0], &[], &w_names[0])?,
        EncoderTables::new(&link.source, &j, &names[1], &[], &w_names[1])?,
    ];
    let marg = [
        encoders[0].w_marginal.clone(),
        encoders[1].w_marginal.clone(),
    ];
    let mut scale = [0.0; 2];
    for i in 0..2 {
        let design = link.powers[i] - backoff;
        if !(design > 0.0) {
            return Err(Error::InvalidParam(format!(
                "power {} leaves no room for backoff {backoff}",
                link.powers[i]
            )));
        }
        let m2 = second_moment(&link.mixture, i, &marg[i]);
        if !(m2 > 0.0) {
            return Err(Error::InvalidParam(format!(
                "source {} mixture has zero power",
                i + 1
            )));
        }
        scale[i] = (design / m2).sqrt();
    }
    let spec = link.mixture.scaled(scale);
    let w_size = [vars[0].size, vars[1].size];
    let mix: [Vec<Vec<Component>>; 2] = [0, 1].map(|i| spec.sources[i][..w_size[i]].to_vec());
    if mix
        .iter()
        .flatten()
        .flatten()
        .any(|c| c.weight > 0.0 && c.var <= 0.0)
    {
        return Err(Error::ZeroVarianceComponent);
    }
    let mix_ln = [0, 1].map(|i| mix[i].iter().map(|c| log_comps(c)).collect::<Vec<_>>());
    let p = link.source.probs();
    let pj = |w1: usize, w2: usize| p[w1 * w_size[1] + w2];
    let mut cond: [Vec<Vec<LogComp>>; 2] = [Vec::new(), Vec::new()];
    let mut h_cond = [0.0; 2];
    for i in 0..2 {
        let other = 1 - i;
        for w in 0..w_size[i] {
            let pw = marg[i][w];
            let mut comps = Vec::new();
            if pw > 0.0 {
                for v in 0..w_size[other] {
                    let joint = if i == 0 { pj(w, v) } else { pj(v, w) };
                    if joint == 0.0 {
                        continue;
                    }
                    for c in &mix[other][v] {
                        comps.push(Component {
                            weight: joint / pw * c.weight,
                            mean: c.mean,
                            var: c.var + link.sigma_n2,
                        });
                    }
                }
                h_cond[i] += pw * mixture_entropy_bits(&comps)?;
            }
            cond[i].push(log_comps(&comps));
        }
    }
    let mut h_x = [0.0; 2];
    for i in 0..2 {
        for w in 0..w_size[i] {
            if marg[i][w] > 0.0 {
                h_x[i] += marg[i][w] * mixture_entropy_bits(&mix[i][w])?;
            }
        }
    }
    let h_w = [0, 1].map(|i| crate::probability::entropy_of(&marg[i]));
    let h_joint = crate::probability::entropy_of(p);
    let h_noise = 0.5 * (2.0 * PI * E * link.sigma_n2).log2();
    Ok(Compiled {
        encoders,
        model: Model::Gaussian(Box::new(GaussianModel {
            mix,
            mix_ln,
            cond,
            marg_nll: [nll_table(&marg[0]), nll_table(&marg[1])],
            joint_nll: nll_table(p),
            w_size,
            side_h: [0, 1].map(|i| h_w[i] + h_x[i] + h_cond[i]),
            full_h: h_joint + h_x[0] + h_x[1] + h_noise,
            powers: link.powers,
            sigma_n2: link.sigma_n2,
        })),
    })
}

fn compile(cfg: &CodebookConfig) -> Result<Compiled> {
    cfg.validate()?;
    match &cfg.model {
        ChannelModel::Discrete { system } => compile_discrete(system),
        ChannelModel::Gaussian { link } => compile_gaussian(link, cfg.epsilon),
    }
}

fn codebook_rates(cfg: &CodebookConfig, c: &Compiled) -> [f64; 2] {
    cfg.rates
        .unwrap_or([c.encoders[0].mi + cfg.delta, c.encoders[1].mi + cfg.delta])
}

/// ⌈2^{nR}⌉, guarding against round-off just above an integer.
fn codebook_size(n: usize, rate: f64) -> f64 {
    let m = (n as f64 * rate).exp2();
    let near = m.round();
    if (m - near).abs() <= 1e-9 * near.max(1.0) {
        near.max(1.0)
    } else {
        m.ceil().max(1.0)
    }
}

fn sample_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let mut t: f64 = rng.random();
    for (i, &p) in row.iter().enumerate() {
        if t < p {
            return i;
        }
        t -= p;
    }
    row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn generate_with<R: Rng + ?Sized>(
    cfg: &CodebookConfig,
    c: &Compiled,
    rng: &mut R,
) -> Result<Codebooks> {
    let rates = codebook_rates(cfg, c);
    let n = cfg.n;
    let mut books = Vec::with_capacity(2);
    for i in 0..2 {
        let m = codebook_size(n, rates[i]);
        if m > cfg.budget as f64 {
            return Err(Error::BudgetExceeded {
                count: m as u128,
                budget: cfg.budget as u128,
            });
        }
        let m = m as usize;
        let w_dist = WeightedIndex::new(&c.encoders[i].w_marginal)
            .map_err(|e| Error::InvalidParam(format!("auxiliary marginal: {e}")))?;
        let mut words = Vec::with_capacity(m * n);
        let inputs = match &c.model {
            Model::Discrete(d) => {
                let mut xs = Vec::with_capacity(m * n);
                for _ in 0..m * n {
                    let w = w_dist.sample(rng);
                    let row = if d.chin[i].inputs().is_empty() {
                        d.chin[i].row(&[])
                    } else {
                        d.chin[i].row(&[w])
                    };
                    words.push(w as u32);
                    xs.push(sample_row(row, rng) as u32);
                }
                ChannelInputs::Discrete(xs)
            }
            Model::Gaussian(g) => {
                let spec = MixtureSpec {
                    sources: g.mix.clone(),
                };
                let mut xs = Vec::with_capacity(m * n);
                for _ in 0..m * n {
                    let w = w_dist.sample(rng);
                    words.push(w as u32);
                    xs.push(sample_codeword(&spec, i, w, rng)?);
                }
                ChannelInputs::Real(xs)
            }
        };
        books.push(Codebook::new(n, rates[i], words, inputs)?);
    }
    let b1 = books.pop().expect("two codebooks");
    let b0 = books.pop().expect("two codebooks");
    Ok(Codebooks { users: [b0, b1] })
}

/// Draws both codebooks: 2^{nR'_i} auxiliary sequences iid from p(w_i), each
/// with a channel sequence drawn letter by letter from p(x_i | w_i).
pub fn generate_codebooks<R: Rng + ?Sized>(cfg: &CodebookConfig, rng: &mut R) -> Result<Codebooks> {
    let c = compile(cfg)?;
    generate_with(cfg, &c, rng)
}

/// Per-letter decoder context.
enum Rx {
    /// (Y, Z) row-major index per letter.
    Discrete(Vec<usize>),
    Real(Vec<f64>),
}

/// Outcome of one trial.
struct TrialOutcome {
    event: Option<ErrorEvent>,
    distortion: Vec<f64>,
}

/// A compiled experiment with its codebooks.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: CodebookConfig,
    compiled: Compiled,
    books: Codebooks,
    /// −log2 f(x | w) per codeword letter, Gaussian links only.
    x_nll: [Vec<f64>; 2],
}

impl Simulator {
    /// Compiles `cfg` and draws its codebooks from stream 0 of the seed.
    pub fn new(cfg: &CodebookConfig) -> Result<Self> {
        let compiled = compile(cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(0);
        let books = generate_with(cfg, &compiled, &mut rng)?;
        Self::assemble(cfg, compiled, books)
    }

    /// Uses the given codebooks instead of drawing new ones.
    pub fn with_codebooks(cfg: &CodebookConfig, books: Codebooks) -> Result<Self> {
        let compiled = compile(cfg)?;
        Self::assemble(cfg, compiled, books)
    }

    fn assemble(cfg: &CodebookConfig, compiled: Compiled, books: Codebooks) -> Result<Self> {
        for (i, b) in books.users.iter().enumerate() {
            if b.n != cfg.n {
                return Err(Error::InvalidParam(format!(
                    "codebook {} has blocklength {}, config has {}",
                    i + 1,
                    b.n,
                    cfg.n
                )));
            }
            let w_size = compiled.encoders[i].w_size as u32;
            if b.words.iter().any(|&w| w >= w_size) {
                return Err(Error::AlphabetMismatch(format!(
                    "codebook {} uses auxiliary symbols outside 0..{w_size}",
                    i + 1
                )));
            }
            let ok = match (&compiled.model, &b.inputs) {
                (Model::Discrete(d), ChannelInputs::Discrete(x)) => {
                    x.iter().all(|&v| (v as usize) < d.x_size[i])
                }
                (Model::Gaussian(_), ChannelInputs::Real(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(Error::AlphabetMismatch(format!(
                    "codebook {} inputs do not match the channel",
                    i + 1
                )));
            }
        }
        let x_nll = match &compiled.model {
            Model::Gaussian(g) => [0, 1].map(|i| {
                let b = &books.users[i];
                let ChannelInputs::Real(x) = &b.inputs else {
                    unreachable!("checked above")
                };
                b.words
                    .iter()
                    .zip(x)
                    .map(|(&w, &x)| g.x_nll(i, w as usize, x))
                    .collect()
            }),
            Model::Discrete(_) => [Vec::new(), Vec::new()],
        };
        Ok(Simulator {
            cfg: cfg.clone(),
            compiled,
            books,
            x_nll,
        })
    }

    pub fn config(&self) -> &CodebookConfig {
        &self.cfg
    }

    pub fn codebooks(&self) -> &Codebooks {
        &self.books
    }

    /// I(U_i, Z_i; W_i) for both users.
    pub fn description_rates(&self) -> [f64; 2] {
        [self.compiled.encoders[0].mi, self.compiled.encoders[1].mi]
    }

    fn source(&self) -> &JointPmf {
        match &self.cfg.model {
            ChannelModel::Discrete { system } => &system.source,
            ChannelModel::Gaussian { link } => &link.source,
        }
    }

    /// Draws n iid source letters.
    pub fn sample_block<R: Rng + ?Sized>(&self, rng: &mut R) -> SourceBlock {
        let src = self.source();
        let sizes: Vec<usize> = src.variables().iter().map(|v| v.size).collect();
        let dist = WeightedIndex::new(src.probs()).expect("validated pmf has positive mass");
        let letters = (0..self.cfg.n)
            .map(|_| {
                let mut cell = dist.sample(rng);
                let mut a = vec![0; sizes.len()];
                for k in (0..sizes.len()).rev() {
                    a[k] = cell % sizes[k];
                    cell /= sizes[k];
                }
                a
            })
            .collect();
        SourceBlock { letters }
    }

    fn check_block(&self, block: &SourceBlock) -> Result<()> {
        let vars = self.source().variables();
        if block.letters.len() != self.cfg.n {
            return Err(Error::ShapeMismatch {
                expected: self.cfg.n,
                got: block.letters.len(),
            });
        }
        for l in &block.letters {
            if l.len() != vars.len() || l.iter().zip(vars).any(|(&a, v)| a >= v.size) {
                return Err(Error::AlphabetMismatch(format!(
                    "source letter {l:?} does not fit {} variables",
                    vars.len()
                )));
            }
        }
        Ok(())
    }

    /// Index of the first codeword jointly typical with the user's source
    /// and side information, or `None` (event E1).
    pub fn encode_block(&self, user: usize, block: &SourceBlock) -> Result<Option<usize>> {
        self.check_block(block)?;
        Ok(self.encode(user, block))
    }

    fn encode(&self, user: usize, block: &SourceBlock) -> Option<usize> {
        let enc = &self.compiled.encoders[user];
        let book = &self.books.users[user];
        let n = self.cfg.n;
        let eps = self.cfg.epsilon;
        let ctx: Vec<usize> = block
            .letters
            .iter()
            .map(|l| enc.context(l) * enc.w_size)
            .collect();
        let hi = n as f64 * (enc.typ.h + eps);
        (0..book.len()).find(|&a| {
            let mut s = 0.0;
            for (t, &w) in book.word(a).iter().enumerate() {
                s += enc.typ.nll[ctx[t] + w as usize];
                if s > hi {
                    return false;
                }
            }
            within(s, n, enc.typ.h, eps)
        })
    }

    /// Sends codewords `sent` through the channel.
    pub fn transmit<R: Rng + ?Sized>(&self, sent: [usize; 2], rng: &mut R) -> Transmission {
        let n = self.cfg.n;
        let [b0, b1] = &self.books.users;
        match &self.compiled.model {
            Model::Discrete(d) => {
                let x = [
                    b0.discrete_input(sent[0]).expect("discrete codebook"),
                    b1.discrete_input(sent[1]).expect("discrete codebook"),
                ];
                let mut input = vec![0usize; d.channel_users.len()];
                let y = (0..n)
                    .map(|t| {
                        for (k, &u) in d.channel_users.iter().enumerate() {
                            input[k] = x[u][t] as usize;
                        }
                        sample_row(d.channel.row(&input), rng)
                    })
                    .collect();
                Transmission {
                    output: Received::Discrete(y),
                    erased: [false; 2],
                }
            }
            Model::Gaussian(g) => {
                let x = [
                    b0.real_input(sent[0]).expect("real codebook"),
                    b1.real_input(sent[1]).expect("real codebook"),
                ];
                let sd = g.sigma_n2.sqrt();
                let y = (0..n)
                    .map(|t| {
                        let z: f64 = StandardNormal.sample(rng);
                        x[0][t] + x[1][t] + sd * z
                    })
                    .collect();
                let erased = [0, 1].map(|i| {
                    let p = x[i].iter().map(|v| v * v).sum::<f64>() / n as f64;
                    !(p < g.powers[i])
                });
                Transmission {
                    output: Received::Real(y),
                    erased,
                }
            }
        }
    }

    fn rx(&self, y: &Received, block: &SourceBlock) -> Result<Rx> {
        let n = self.cfg.n;
        match (&self.compiled.model, y) {
            (Model::Discrete(d), Received::Discrete(y)) if y.len() == n => {
                let zr = d.z_rows();
                let mut ctx = Vec::with_capacity(n);
                for (t, &yt) in y.iter().enumerate() {
                    if yt >= d.y_size {
                        return Err(Error::AlphabetMismatch(format!(
                            "output symbol {yt} outside alphabet of size {}",
                            d.y_size
                        )));
                    }
                    ctx.push(yt * zr + d.z_index(&block.letters[t]));
                }
                Ok(Rx::Discrete(ctx))
            }
            (Model::Gaussian(_), Received::Real(y)) if y.len() == n => Ok(Rx::Real(y.clone())),
            _ => Err(Error::InvalidParam(
                "received block does not match the channel or blocklength".into(),
            )),
        }
    }

    fn side_typical(&self, user: usize, a: usize, rx: &Rx) -> bool {
        let n = self.cfg.n;
        let eps = self.cfg.epsilon;
        let book = &self.books.users[user];
        let w = book.word(a);
        match (&self.compiled.model, rx) {
            (Model::Discrete(d), Rx::Discrete(ctx)) => {
                let typ = &d.side[user];
                let nctx = d.y_size * d.z_rows();
                let x = book.discrete_input(a).expect("discrete codebook");
                let hi = n as f64 * (typ.h + eps);
                let mut s = 0.0;
                for t in 0..n {
                    let code = w[t] as usize * d.x_size[user] + x[t] as usize;
                    s += typ.nll[code * nctx + ctx[t]];
                    if s > hi {
                        return false;
                    }
                }
                within(s, n, typ.h, eps)
            }
            (Model::Gaussian(g), Rx::Real(y)) => {
                let x = book.real_input(a).expect("real codebook");
                let xn = &self.x_nll[user][a * n..(a + 1) * n];
                let mut s = 0.0;
                for t in 0..n {
                    let wt = w[t] as usize;
                    s += g.marg_nll[user][wt] + xn[t]
                        - ln_mixture(&g.cond[user][wt], y[t] - x[t]) / LN_2;
                }
                within(s, n, g.side_h[user], eps)
            }
            _ => unreachable!("context built for this model"),
        }
    }

    fn full_typical(&self, a: usize, b: usize, rx: &Rx) -> bool {
        let n = self.cfg.n;
        let eps = self.cfg.epsilon;
        let [b0, b1] = &self.books.users;
        let (w1, w2) = (b0.word(a), b1.word(b));
        match (&self.compiled.model, rx) {
            (Model::Discrete(d), Rx::Discrete(ctx)) => {
                let typ = &d.full;
                let nctx = d.y_size * d.z_rows();
                let codes2 = self.compiled.encoders[1].w_size * d.x_size[1];
                let x1 = b0.discrete_input(a).expect("discrete codebook");
                let x2 = b1.discrete_input(b).expect("discrete codebook");
                let hi = n as f64 * (typ.h + eps);
                let mut s = 0.0;
                for t in 0..n {
                    let c1 = w1[t] as usize * d.x_size[0] + x1[t] as usize;
                    let c2 = w2[t] as usize * d.x_size[1] + x2[t] as usize;
                    s += typ.nll[(c1 * codes2 + c2) * nctx + ctx[t]];
                    if s > hi {
                        return false;
                    }
                }
                within(s, n, typ.h, eps)
            }
            (Model::Gaussian(g), Rx::Real(y)) => {
                let x1 = b0.real_input(a).expect("real codebook");
                let x2 = b1.real_input(b).expect("real codebook");
                let n1 = &self.x_nll[0][a * n..(a + 1) * n];
                let n2 = &self.x_nll[1][b * n..(b + 1) * n];
                let mut s = 0.0;
                for t in 0..n {
                    let j = w1[t] as usize * g.w_size[1] + w2[t] as usize;
                    s += g.joint_nll[j] + n1[t] + n2[t] + g.noise_nll(y[t] - x1[t] - x2[t]);
                }
                within(s, n, g.full_h, eps)
            }
            _ => unreachable!("context built for this model"),
        }
    }

    fn survivors(&self, user: usize, rx: &Rx) -> Vec<usize> {
        (0..self.books.users[user].len())
            .filter(|&a| self.side_typical(user, a, rx))
            .collect()
    }

    /// Scans survivor pairs in index order and returns the first typical pair
    /// if every typical pair carries the same auxiliary sequences.
    fn search(
        &self,
        s1: &[usize],
        s2: &[usize],
        rx: &Rx,
    ) -> std::result::Result<(usize, usize), DecodeError> {
        let [b0, b1] = &self.books.users;
        let mut found: Option<(usize, usize)> = None;
        for &a in s1 {
            for &b in s2 {
                if let Some((fa, fb)) = found {
                    if b0.same_word(a, fa) && b1.same_word(b, fb) {
                        continue;
                    }
                }
                if self.full_typical(a, b, rx) {
                    if found.is_some() {
                        return Err(DecodeError::Ambiguous);
                    }
                    found = Some((a, b));
                }
            }
        }
        found.ok_or(DecodeError::NotFound)
    }

    /// The unique typical pair of auxiliary sequences, reported as the first
    /// codeword pair carrying it.
    pub fn decode_block(
        &self,
        y: &Received,
        block: &SourceBlock,
    ) -> Result<std::result::Result<(usize, usize), DecodeError>> {
        self.check_block(block)?;
        let rx = self.rx(y, block)?;
        let s1 = self.survivors(0, &rx);
        let s2 = self.survivors(1, &rx);
        Ok(self.search(&s1, &s2, &rx))
    }

    /// Classifies a block whose encoders both succeeded and whose codewords
    /// were delivered. Returns the event and the decoder's unique output.
    fn attribute(&self, sent: [usize; 2], rx: &Rx) -> (Option<ErrorEvent>, Option<(usize, usize)>) {
        let [b0, b1] = &self.books.users;
        let s1 = self.survivors(0, rx);
        let s2 = self.survivors(1, rx);
        let (a0, b0i) = (sent[0], sent[1]);
        let true_ok = s1.contains(&a0) && s2.contains(&b0i) && self.full_typical(a0, b0i, rx);
        if !true_ok {
            return (Some(ErrorEvent::E2), self.search(&s1, &s2, rx).ok());
        }
        let (same1, diff1): (Vec<usize>, Vec<usize>) =
            s1.iter().partition(|&&a| b0.same_word(a, a0));
        let (same2, diff2): (Vec<usize>, Vec<usize>) =
            s2.iter().partition(|&&b| b1.same_word(b, b0i));
        let any = |xs: &[usize], ys: &[usize]| {
            xs.iter()
                .any(|&a| ys.iter().any(|&b| self.full_typical(a, b, rx)))
        };
        let event = if any(&diff1, &same2) {
            Some(ErrorEvent::E3)
        } else if any(&same1, &diff2) {
            Some(ErrorEvent::E3Prime)
        } else if any(&diff1, &diff2) {
            Some(ErrorEvent::E4)
        } else {
            None
        };
        let decoded = event.is_none().then_some((a0, b0i));
        (event, decoded)
    }

    fn reconstruct(&self, block: &SourceBlock, pair: (usize, usize)) -> Vec<f64> {
        let n = self.cfg.n;
        let [b0, b1] = &self.books.users;
        let (w1, w2) = (b0.word(pair.0), b1.word(pair.1));
        match &self.compiled.model {
            Model::Discrete(d) => {
                let Some(dec) = &d.decoder else {
                    return Vec::new();
                };
                let ws2 = self.compiled.encoders[1].w_size;
                let zr = d.z_rows();
                d.measures
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let table = &dec.reconstructions[i].table;
                        let total: f64 = (0..n)
                            .map(|t| {
                                let l = &block.letters[t];
                                let row =
                                    (w1[t] as usize * ws2 + w2[t] as usize) * zr + d.z_index(l);
                                m.get(l[d.u_pos[i]], table[row])
                            })
                            .sum();
                        total / n as f64
                    })
                    .collect()
            }
            Model::Gaussian(_) => [w1, w2]
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let miss = (0..n)
                        .filter(|&t| block.letters[t][i] != w[t] as usize)
                        .count();
                    miss as f64 / n as f64
                })
                .collect(),
        }
    }

    fn max_distortions(&self) -> Vec<f64> {
        match &self.compiled.model {
            Model::Discrete(d) if d.decoder.is_some() => {
                d.measures.iter().map(|m| m.max()).collect()
            }
            Model::Discrete(_) => Vec::new(),
            Model::Gaussian(_) => vec![1.0, 1.0],
        }
    }

    fn trial(&self, index: usize) -> TrialOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index as u64 + 1);
        let block = self.sample_block(&mut rng);
        let enc = [self.encode(0, &block), self.encode(1, &block)];
        let sent = [enc[0].unwrap_or(0), enc[1].unwrap_or(0)];
        let tx = self.transmit(sent, &mut rng);
        let erased = tx.erased.iter().any(|&e| e);
        let rx = self
            .rx(&tx.output, &block)
            .expect("channel output matches model");
        let (event, decoded) = if enc.iter().any(Option::is_none) {
            let d = if erased {
                None
            } else {
                let s1 = self.survivors(0, &rx);
                let s2 = self.survivors(1, &rx);
                self.search(&s1, &s2, &rx).ok()
            };
            (Some(ErrorEvent::E1), d)
        } else if erased {
            (Some(ErrorEvent::Erasure), None)
        } else {
            self.attribute(sent, &rx)
        };
        TrialOutcome {
            event,
            distortion: self.reconstruct(&block, decoded.unwrap_or((0, 0))),
        }
    }

    /// Runs all trials, in parallel, and aggregates them in trial order.
    pub fn run(&self) -> SimResult {
        let trials = self.cfg.trials;
        let outcomes: Vec<TrialOutcome> =
            (0..trials).into_par_iter().map(|t| self.trial(t)).collect();
        let dmax = self.max_distortions();
        let k = dmax.len();
        let mut counts = EventCounts::default();
        let mut sum = vec![0.0; k];
        let mut sum2 = vec![0.0; k];
        let mut sum_dmax = vec![0.0; k];
        for o in &outcomes {
            if let Some(e) = o.event {
                counts.add(e);
            }
            for i in 0..k {
                let d = o.distortion[i];
                sum[i] += d;
                sum2[i] += d * d;
                sum_dmax[i] += if o.event.is_some() { dmax[i] } else { d };
            }
        }
        let t = trials as f64;
        let failures = counts.total();
        let p = failures as f64 / t;
        let distortion: Vec<f64> = sum.iter().map(|s| s / t).collect();
        let distortion_half_width = (0..k)
            .map(|i| {
                let var = (sum2[i] / t - distortion[i] * distortion[i]).max(0.0);
                1.96 * (var / t).sqrt()
            })
            .collect();
        SimResult {
            n: self.cfg.n,
            trials,
            epsilon: self.cfg.epsilon,
            rates: [self.books.users[0].rate, self.books.users[1].rate],
            codebook_sizes: [self.books.users[0].len(), self.books.users[1].len()],
            counts,
            event_rates: counts.rates(trials),
            failures,
            block_error_rate: p,
            block_error_half_width: 1.96 * (p * (1.0 - p) / t).sqrt(),
            distortion,
            distortion_half_width,
            distortion_dmax: sum_dmax.iter().map(|s| s / t).collect(),
        }
    }
}

/// Draws codebooks, runs every trial and aggregates the outcome.
pub fn run_experiment(cfg: &CodebookConfig) -> Result<SimResult> {
    Ok(Simulator::new(cfg)?.run())
}

/// Runs the same configuration at each blocklength in `ns`.
pub fn run_sweep(cfg: &CodebookConfig, ns: &[usize]) -> Result<Vec<SimResult>> {
    ns.iter()
        .map(|&n| run_experiment(&CodebookConfig { n, ..cfg.clone() }))
        .collect()
}

/// Lossless system with encoders W_i = U_i for the first two variables of
/// `source`, channel-input maps `chin`, the MAC `channel`, decoder side
/// information `z`, and the pass-through decoder.
pub fn identity_system(
    source: JointPmf,
    z: &[&str],
    chin: [DiscreteKernel; 2],
    channel: DiscreteKernel,
) -> Result<SystemSpec> {
    use crate::region::{passthrough_decoder, DistortionTarget};
    let u = [source.variables()[0].clone(), source.variables()[1].clone()];
    let z_rows = z
        .iter()
        .map(|n| source.size_of(n))
        .product::<Result<usize>>()?;
    let [c1, c2] = chin;
    let spec = SystemSpec {
        u1: u[0].name.clone(),
        u2: u[1].name.clone(),
        z1: Vec::new(),
        z2: Vec::new(),
        z: z.iter().map(|s| s.to_string()).collect(),
        enc1: DiscreteKernel::identity(u[0].clone(), "W1")?,
        enc2: DiscreteKernel::identity(u[1].clone(), "W2")?,
        chin1: c1,
        chin2: c2,
        channel,
        decoder: Some(passthrough_decoder([u[0].size, u[1].size], z_rows)),
        distortion: vec![
            DistortionTarget::lossless(u[0].size),
            DistortionTarget::lossless(u[1].size),
        ],
        source,
    };
    spec.validate()?;
    Ok(spec)
}

/// Channel-input map X = W over `size` symbols.
pub fn identity_input(w: &str, x: &str, size: usize) -> Result<DiscreteKernel> {
    DiscreteKernel::identity(Variable::new(w, size), x)
}

/// Noiseless adder Y = X1 + X2 over quaternary inputs.
pub fn quaternary_adder() -> DiscreteKernel {
    DiscreteKernel::deterministic(
        vec![Variable::new("X1", 4), Variable::new("X2", 4)],
        Variable::new("Y", 7),
        |a| a[0] + a[1],
    )
    .expect("adder is a valid kernel")
}

fn uniform_inputs(size: usize) -> Result<[DiscreteKernel; 2]> {
    use crate::region::independent_input;
    Ok([
        independent_input(Variable::new("W1", 2), "X1", size)?,
        independent_input(Variable::new("W2", 2), "X2", size)?,
    ])
}

/// The correlated binary pair over the quaternary adder, each codeword's
/// channel sequence drawn uniformly and independently of its auxiliary.
pub fn quaternary_adder_system() -> Result<SystemSpec> {
    identity_system(
        crate::region::correlated_pair(),
        &[],
        uniform_inputs(4)?,
        quaternary_adder(),
    )
}

/// The correlated binary pair sent uncoded (X = U) over the binary adder,
/// which needs 1.918 bits against a sum capacity of 1.585.
pub fn uncoded_adder_system() -> Result<SystemSpec> {
    identity_system(
        crate::region::correlated_pair(),
        &[],
        [
            identity_input("W1", "X1", 2)?,
            identity_input("W2", "X2", 2)?,
        ],
        crate::region::adder_channel(),
    )
}

/// Independent uniform bits over two noiseless quaternary links.
pub fn orthogonal_uniform_system() -> Result<SystemSpec> {
    let link = |x: &str, y: &str| DiscreteKernel::identity(Variable::new(x, 4), y);
    identity_system(
        crate::region::binary_pair([0.25; 4]),
        &[],
        uniform_inputs(4)?,
        crate::region::orthogonal_channel(&link("X1", "Y1")?, &link("X2", "Y2")?)?,
    )
}

/// Both sources fixed at symbol 0, sent uncoded over the binary adder.
pub fn constant_system() -> Result<SystemSpec> {
    identity_system(
        crate::region::binary_pair([1.0, 0.0, 0.0, 0.0]),
        &[],
        [
            identity_input("W1", "X1", 2)?,
            identity_input("W2", "X2", 2)?,
        ],
        crate::region::adder_channel(),
    )
}

#[cfg(test)]
mod tests;
