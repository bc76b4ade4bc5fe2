//! Monte Carlo estimation of mutual informations over the Gaussian MAC
//! Y = √P1·X1 + √P2·X2 + N, using the exact conditional densities of Y
//! (finite Gaussian mixtures) inside the sample averages.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianSourceParams, GmacParams};
use crate::mixture::{induced_rho, MixtureSpec};
use crate::probability::JointPmf;

/// Sampling settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    pub n: usize,
    pub seed: u64,
    pub sigma_n2: f64,
    pub powers: [f64; 2],
    pub batch_size: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n: 1_000_000,
            seed: 0,
            sigma_n2: 1.0,
            powers: [1.0, 1.0],
            batch_size: 10_000,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParam(
                "sample and batch sizes must be positive".into(),
            ));
        }
        if !(self.sigma_n2 > 0.0 && self.sigma_n2.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "noise variance must be positive, got {}",
                self.sigma_n2
            )));
        }
        if self.powers.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidParam("powers must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A Monte Carlo estimate in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MiEstimate {
    pub fn exact(value: f64) -> Self {
        MiEstimate {
            value,
            stderr: 0.0,
            n: 0,
        }
    }

    /// Whether `x` lies within `k` standard errors plus `floor` of the
    /// estimate.
    pub fn agrees_with(&self, x: f64, k: f64, floor: f64) -> bool {
        (self.value - x).abs() <= k * self.stderr + floor
    }
}

/// Mutual informations the estimator supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    /// I(X1;Y|X2)
    #[serde(rename = "I1")]
    I1,
    /// I(X2;Y|X1)
    #[serde(rename = "I2")]
    I2,
    /// I(X1,X2;Y)
    #[serde(rename = "Isum")]
    Isum,
    /// I(X1;Y|X2,U2)
    #[serde(rename = "I1c")]
    I1c,
    /// I(X2;Y|X1,U1)
    #[serde(rename = "I2c")]
    I2c,
}

impl Target {
    pub const ALL: [Target; 5] = [
        Target::I1,
        Target::I2,
        Target::Isum,
        Target::I1c,
        Target::I2c,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Target::I1 => "I(X1;Y|X2)",
            Target::I2 => "I(X2;Y|X1)",
            Target::Isum => "I(X1,X2;Y)",
            Target::I1c => "I(X1;Y|X2,U2)",
            Target::I2c => "I(X2;Y|X1,U1)",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::I1 => "I1",
            Target::I2 => "I2",
            Target::Isum => "Isum",
            Target::I1c => "I1c",
            Target::I2c => "I2c",
        })
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "I1" => Target::I1,
            "I2" => Target::I2,
            "Isum" => Target::Isum,
            "I1c" => Target::I1c,
            "I2c" => Target::I2c,
            _ => return Err(Error::InvalidParam(format!("unknown target `{s}`"))),
        })
    }
}

/// Channel-input law before power scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputModel {
    /// Per-symbol mixtures driven by a discrete source pair.
    Mixture { spec: MixtureSpec, source: JointPmf },
    /// Jointly Gaussian unit-variance inputs with correlation `rho`,
    /// independent of any source.
    Gaussian { rho: f64 },
}

/// (weight, mean, variance) after power scaling.
type Comp = (f64, f64, f64);

fn log_normal(d: f64, var: f64) -> f64 {
    -0.5 * ((2.0 * PI * var).ln() + d * d / var)
}

/// log Σ exp(t) over the iterator, −∞ when empty.
fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + terms.map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Log-density of a scaled mixture at `x`. Zero-variance components are
/// point masses; they dominate any continuous part at their location.
fn log_mixture(comps: &[Comp], x: f64) -> f64 {
    const ATOM: f64 = 1e6;
    log_sum_exp(comps.iter().filter(|c| c.0 > 0.0).map(|&(w, m, v)| {
        if v == 0.0 {
            if x == m {
                w.ln() + ATOM
            } else {
                f64::NEG_INFINITY
            }
        } else {
            w.ln() + log_normal(x - m, v)
        }
    }))
}

/// Log-density of (component of X) + noise at `x`.
fn log_mixture_plus_noise(comps: &[Comp], x: f64, s2: f64) -> f64 {
    log_sum_exp(
        comps
            .iter()
            .filter(|c| c.0 > 0.0)
            .map(move |&(w, m, v)| w.ln() + log_normal(x - m, v + s2)),
    )
}

struct MixtureModel {
    comps: [Vec<Vec<Comp>>; 2],
    /// p[u1][u2]
    p: Vec<Vec<f64>>,
    marg: [Vec<f64>; 2],
    /// (u1, u2, p) for cells with p > 0.
    cells: Vec<(usize, usize, f64)>,
}

impl MixtureModel {
    fn new(spec: &MixtureSpec, source: &JointPmf, powers: [f64; 2]) -> Result<Self> {
        spec.validate()?;
        spec.check_covers(source)?;
        let v = source.variables();
        let (n1, n2) = (v[0].size, v[1].size);
        let p: Vec<Vec<f64>> = (0..n1)
            .map(|a| source.probs()[a * n2..(a + 1) * n2].to_vec())
            .collect();
        let mut marg = [vec![0.0; n1], vec![0.0; n2]];
        let mut cells = Vec::new();
        for (a, row) in p.iter().enumerate() {
            for (b, &q) in row.iter().enumerate() {
                marg[0][a] += q;
                marg[1][b] += q;
                if q > 0.0 {
                    cells.push((a, b, q));
                }
            }
        }
        let scaled = spec.scaled([powers[0].sqrt(), powers[1].sqrt()]);
        let comps = [0, 1].map(|s| {
            scaled.sources[s]
                .iter()
                .map(|cs| cs.iter().map(|c| (c.weight, c.mean, c.var)).collect())
                .collect()
        });
        Ok(MixtureModel {
            comps,
            p,
            marg,
            cells,
        })
    }

    fn sample_x<R: Rng>(&self, s: usize, u: usize, rng: &mut R) -> f64 {
        let cs = &self.comps[s][u];
        let mut t: f64 = rng.random();
        for &(w, m, v) in cs {
            if t < w {
                let z: f64 = StandardNormal.sample(rng);
                return m + v.sqrt() * z;
            }
            t -= w;
        }
        let &(_, m, v) = cs.last().expect("nonempty mixture");
        let z: f64 = StandardNormal.sample(rng);
        m + v.sqrt() * z
    }

    fn sample_cell<R: Rng>(&self, rng: &mut R) -> (usize, usize) {
        let mut t: f64 = rng.random();
        for &(a, b, q) in &self.cells {
            if t < q {
                return (a, b);
            }
            t -= q;
        }
        let &(a, b, _) = self.cells.last().expect("pmf has support");
        (a, b)
    }

    /// Sample u_other ~ p(· | u_s = u) for the other source.
    fn sample_partner<R: Rng>(&self, s: usize, u: usize, rng: &mut R) -> usize {
        let (n, pu) = (self.marg[1 - s].len(), self.marg[s][u]);
        let mut t: f64 = rng.random::<f64>() * pu;
        let mut last = 0;
        for v in 0..n {
            let q = if s == 0 { self.p[u][v] } else { self.p[v][u] };
            if q > 0.0 {
                last = v;
                if t < q {
                    return v;
                }
                t -= q;
            }
        }
        last
    }

    /// Joint law q(u_s, u_o) with s the conditioning source.
    fn joint(&self, s: usize, us: usize, uo: usize) -> f64 {
        if s == 0 {
            self.p[us][uo]
        } else {
            self.p[uo][us]
        }
    }

    /// ln p(y | x_s) where the other input is integrated out.
    fn log_y_given_x(&self, s: usize, xs: f64, y: f64, s2: f64) -> f64 {
        let o = 1 - s;
        let fs: Vec<f64> = (0..self.marg[s].len())
            .map(|u| log_mixture(&self.comps[s][u], xs))
            .collect();
        let lse_fs = log_sum_exp(
            (0..self.marg[s].len())
                .filter(|&u| self.marg[s][u] > 0.0)
                .map(|u| self.marg[s][u].ln() + fs[u]),
        );
        // posterior weight of u_o given x_s
        let terms = (0..self.marg[o].len()).filter_map(|uo| {
            let lw = log_sum_exp(
                (0..self.marg[s].len())
                    .filter(|&us| self.joint(s, us, uo) > 0.0)
                    .map(|us| self.joint(s, us, uo).ln() + fs[us]),
            );
            if lw == f64::NEG_INFINITY {
                return None;
            }
            Some(lw - lse_fs + log_mixture_plus_noise(&self.comps[o][uo], y - xs, s2))
        });
        log_sum_exp(terms.collect::<Vec<_>>().into_iter())
    }

    /// ln p(y | x_s, u_s).
    fn log_y_given_x_u(&self, s: usize, xs: f64, us: usize, y: f64, s2: f64) -> f64 {
        let o = 1 - s;
        let pu = self.marg[s][us];
        let terms: Vec<f64> = (0..self.marg[o].len())
            .filter(|&uo| self.joint(s, us, uo) > 0.0)
            .map(|uo| {
                (self.joint(s, us, uo) / pu).ln()
                    + log_mixture_plus_noise(&self.comps[o][uo], y - xs, s2)
            })
            .collect();
        log_sum_exp(terms.into_iter())
    }

    fn log_y(&self, y: f64, s2: f64) -> f64 {
        let terms: Vec<f64> = self
            .cells
            .iter()
            .flat_map(|&(a, b, q)| {
                self.comps[0][a].iter().flat_map(move |&(w1, m1, v1)| {
                    self.comps[1][b]
                        .iter()
                        .filter(move |&&(w2, _, _)| w1 * w2 > 0.0)
                        .map(move |&(w2, m2, v2)| {
                            (q * w1 * w2).ln() + log_normal(y - m1 - m2, v1 + v2 + s2)
                        })
                })
            })
            .collect();
        log_sum_exp(terms.into_iter())
    }
}

struct GaussianModel {
    a: [f64; 2],
    rho: f64,
}

impl GaussianModel {
    fn sample<R: Rng>(&self, rng: &mut R) -> [f64; 2] {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let g2 = self.rho * z1 + (1.0 - self.rho * self.rho).sqrt() * z2;
        [self.a[0] * z1, self.a[1] * g2]
    }

    fn log_y_given_x(&self, s: usize, xs: f64, y: f64, s2: f64) -> f64 {
        let o = 1 - s;
        let (ao, as_) = (self.a[o], self.a[s]);
        let mean = if as_ > 0.0 {
            ao * self.rho * xs / as_
        } else {
            0.0
        };
        log_normal(y - xs - mean, ao * ao * (1.0 - self.rho * self.rho) + s2)
    }

    fn log_y(&self, y: f64, s2: f64) -> f64 {
        let v =
            self.a[0] * self.a[0] + self.a[1] * self.a[1] + 2.0 * self.rho * self.a[0] * self.a[1];
        log_normal(y, v + s2)
    }
}

enum Model {
    Mixture(MixtureModel),
    Gaussian(GaussianModel),
}

impl Model {
    fn new(input: &InputModel, cfg: &McConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(match input {
            InputModel::Mixture { spec, source } => {
                Model::Mixture(MixtureModel::new(spec, source, cfg.powers)?)
            }
            InputModel::Gaussian { rho } => {
                if !(rho.abs() <= 1.0) {
                    return Err(Error::InvalidParam(format!(
                        "rho must lie in [-1, 1], got {rho}"
                    )));
                }
                Model::Gaussian(GaussianModel {
                    a: cfg.powers.map(f64::sqrt),
                    rho: *rho,
                })
            }
        })
    }
}

/// Running sum over one batch.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum2 += x * x;
    }
}

/// Combine per-batch sums (in batch order) into a mean with the pooled
/// per-sample standard error, converting nats to bits.
fn summarize(batches: &[Vec<Moments>], k: usize) -> MiEstimate {
    let n: usize = batches.iter().map(|b| b[k].n).sum();
    let total: f64 = batches.iter().map(|b| b[k].sum).sum();
    let total2: f64 = batches.iter().map(|b| b[k].sum2).sum();
    let nf = n as f64;
    let mean = total / nf;
    let var = ((total2 - nf * mean * mean) / (nf - 1.0).max(1.0)).max(0.0);
    let stderr = (var / nf).sqrt();
    MiEstimate {
        value: mean / LN_2,
        stderr: stderr / LN_2,
        n,
    }
}

/// Run `n` samples in fixed-size batches, each batch on its own ChaCha
/// stream derived from (seed, `stream_base` + batch index). `f` draws one
/// sample and pushes one value per tracked quantity.
fn run_batches<F>(cfg: &McConfig, stream_base: u64, width: usize, f: F) -> Vec<MiEstimate>
where
    F: Fn(&mut ChaCha8Rng, &mut [Moments]) + Sync,
{
    let batches = cfg.n.div_ceil(cfg.batch_size);
    let sums: Vec<Vec<Moments>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(stream_base + b as u64);
            let len = cfg.batch_size.min(cfg.n - b * cfg.batch_size);
            let mut acc = vec![Moments::default(); width];
            for _ in 0..len {
                f(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    (0..width).map(|k| summarize(&sums, k)).collect()
}

const SYMBOL_STREAM: u64 = 1 << 32;

/// Per-sample log-likelihood ratios for the unconditioned targets, in the
/// order [I1, I2, Isum, I(U2;Y|X2), I(U1;Y|X1)].
fn joint_stream(model: &Model, cfg: &McConfig) -> Vec<MiEstimate> {
    let s2 = cfg.sigma_n2;
    let sd = s2.sqrt();
    run_batches(cfg, 0, 5, |rng, acc| {
        let z: f64 = StandardNormal.sample(rng);
        let noise = sd * z;
        match model {
            Model::Mixture(m) => {
                let (u1, u2) = m.sample_cell(rng);
                let x1 = m.sample_x(0, u1, rng);
                let x2 = m.sample_x(1, u2, rng);
                let y = x1 + x2 + noise;
                let lc = log_normal(noise, s2);
                let l_x2 = m.log_y_given_x(1, x2, y, s2);
                let l_x1 = m.log_y_given_x(0, x1, y, s2);
                acc[0].push(lc - l_x2);
                acc[1].push(lc - l_x1);
                acc[2].push(lc - m.log_y(y, s2));
                acc[3].push(m.log_y_given_x_u(1, x2, u2, y, s2) - l_x2);
                acc[4].push(m.log_y_given_x_u(0, x1, u1, y, s2) - l_x1);
            }
            Model::Gaussian(g) => {
                let [x1, x2] = g.sample(rng);
                let y = x1 + x2 + noise;
                let lc = log_normal(noise, s2);
                acc[0].push(lc - g.log_y_given_x(1, x2, y, s2));
                acc[1].push(lc - g.log_y_given_x(0, x1, y, s2));
                acc[2].push(lc - g.log_y(y, s2));
                acc[3].push(0.0);
                acc[4].push(0.0);
            }
        }
    })
}

/// I(X_o;Y|X_s,U_s) = Σ_u p(u) E[ln p(y|x1,x2) − ln p(y|x_s,u) | U_s = u],
/// one stream per symbol u.
fn conditional_on_symbol(m: &MixtureModel, s: usize, cfg: &McConfig) -> MiEstimate {
    let s2 = cfg.sigma_n2;
    let sd = s2.sqrt();
    let mut value = 0.0;
    let mut var = 0.0;
    let mut n = 0;
    for (u, &pu) in m.marg[s].iter().enumerate() {
        if pu == 0.0 {
            continue;
        }
        let base = SYMBOL_STREAM * (1 + 2 * u as u64 + s as u64);
        let est = run_batches(cfg, base, 1, |rng, acc| {
            let uo = m.sample_partner(s, u, rng);
            let xs = m.sample_x(s, u, rng);
            let xo = m.sample_x(1 - s, uo, rng);
            let z: f64 = StandardNormal.sample(rng);
            let noise = sd * z;
            let y = xs + xo + noise;
            acc[0].push(log_normal(noise, s2) - m.log_y_given_x_u(s, xs, u, y, s2));
        })[0];
        value += pu * est.value;
        var += pu * pu * est.stderr * est.stderr;
        n += est.n;
    }
    MiEstimate {
        value,
        stderr: var.sqrt(),
        n,
    }
}

/// Estimate one target for the given input law.
pub fn estimate_mi(input: &InputModel, target: Target, cfg: &McConfig) -> Result<MiEstimate> {
    let model = Model::new(input, cfg)?;
    Ok(match (target, &model) {
        (Target::I1c, Model::Mixture(m)) => conditional_on_symbol(m, 1, cfg),
        (Target::I2c, Model::Mixture(m)) => conditional_on_symbol(m, 0, cfg),
        (Target::I1 | Target::I1c, _) => joint_stream(&model, cfg)[0],
        (Target::I2 | Target::I2c, _) => joint_stream(&model, cfg)[1],
        (Target::Isum, _) => joint_stream(&model, cfg)[2],
    })
}

/// Estimates of every target from shared streams.
pub fn estimate_all(input: &InputModel, cfg: &McConfig) -> Result<Vec<(Target, MiEstimate)>> {
    let model = Model::new(input, cfg)?;
    let joint = joint_stream(&model, cfg);
    let (c1, c2) = match &model {
        Model::Mixture(m) => (
            conditional_on_symbol(m, 1, cfg),
            conditional_on_symbol(m, 0, cfg),
        ),
        Model::Gaussian(_) => (joint[0], joint[1]),
    };
    Ok(vec![
        (Target::I1, joint[0]),
        (Target::I2, joint[1]),
        (Target::Isum, joint[2]),
        (Target::I1c, c1),
        (Target::I2c, c2),
    ])
}

/// Both sides of I(X1;Y|X2) − I(X1;Y|X2,U2) = I(X1+N;U2|X2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: MiEstimate,
    pub rhs: MiEstimate,
    pub gap: f64,
    /// Combined standard error of `lhs − rhs`.
    pub stderr: f64,
}

pub fn lemma_on_identity(input: &InputModel, cfg: &McConfig) -> Result<IdentityCheck> {
    let model = Model::new(input, cfg)?;
    let joint = joint_stream(&model, cfg);
    let cond = match &model {
        Model::Mixture(m) => conditional_on_symbol(m, 1, cfg),
        Model::Gaussian(_) => joint[0],
    };
    let lhs = MiEstimate {
        value: joint[0].value - cond.value,
        stderr: (joint[0].stderr.powi(2) + cond.stderr.powi(2)).sqrt(),
        n: joint[0].n + cond.n,
    };
    let rhs = joint[3];
    Ok(IdentityCheck {
        lhs,
        rhs,
        gap: lhs.value - rhs.value,
        stderr: (lhs.stderr.powi(2) + rhs.stderr.powi(2)).sqrt(),
    })
}

/// I(X1,X2;Y) for Gaussian inputs in closed form.
pub fn gaussian_isum(powers: [f64; 2], rho: f64, sigma_n2: f64) -> f64 {
    0.5 * (1.0 + (powers[0] + powers[1] + 2.0 * rho * (powers[0] * powers[1]).sqrt()) / sigma_n2)
        .log2()
}

/// Isum estimates along a sequence of input laws, with the Gaussian value
/// they should approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub estimates: Vec<MiEstimate>,
    pub limit: f64,
}

pub fn lemma5_convergence(
    seq: &[InputModel],
    rho_target: f64,
    cfg: &McConfig,
) -> Result<Convergence> {
    let estimates = seq
        .iter()
        .map(|m| estimate_mi(m, Target::Isum, cfg))
        .collect::<Result<_>>()?;
    Ok(Convergence {
        estimates,
        limit: gaussian_isum(cfg.powers, rho_target, cfg.sigma_n2),
    })
}

/// Isum of Gaussian inputs with the mixture's covariance, against the
/// mixture's own Isum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dominance {
    pub gaussian: MiEstimate,
    pub mixture: MiEstimate,
    /// Correlation of the matched Gaussian comparator.
    pub rho: f64,
}

pub fn lemma2_dominance(
    spec: &MixtureSpec,
    source: &JointPmf,
    cfg: &McConfig,
) -> Result<Dominance> {
    let rho = induced_rho(spec, source)?;
    // per-source variances of the unscaled inputs
    let v = source.variables();
    let n2 = v[1].size;
    let mut vars = [0.0; 2];
    for s in 0..2 {
        let (mut m1, mut m2) = (0.0, 0.0);
        for (u, comps) in spec.sources[s].iter().enumerate().take(v[s].size) {
            let pu: f64 = if s == 0 {
                source.probs()[u * n2..(u + 1) * n2].iter().sum()
            } else {
                (0..v[0].size).map(|a| source.probs()[a * n2 + u]).sum()
            };
            for c in comps {
                m1 += pu * c.weight * c.mean;
                m2 += pu * c.weight * (c.var + c.mean * c.mean);
            }
        }
        vars[s] = m2 - m1 * m1;
    }
    let powers = [cfg.powers[0] * vars[0], cfg.powers[1] * vars[1]];
    let gaussian = MiEstimate::exact(gaussian_isum(powers, rho, cfg.sigma_n2));
    let mixture = estimate_mi(
        &InputModel::Mixture {
            spec: spec.clone(),
            source: source.clone(),
        },
        Target::Isum,
        cfg,
    )?;
    Ok(Dominance {
        gaussian,
        mixture,
        rho,
    })
}

/// Monte Carlo estimates of I(U1;W1|W2), I(U2;W2|W1), I(U1,U2;W1,W2) for
/// Gaussian descriptions W_i = U_i + Q_i with I(U_i;W_i) = R_i.
pub fn gaussian_description_mc(
    g: &GaussianSourceParams,
    cfg: &McConfig,
) -> Result<[MiEstimate; 3]> {
    g.validate()?;
    cfg.validate()?;
    if g.r1 <= 0.0 || g.r2 <= 0.0 {
        return Err(Error::InvalidParam(
            "description rates must be positive".into(),
        ));
    }
    let q = [
        g.sigma1_2 / ((2.0 * g.r1).exp2() - 1.0),
        g.sigma2_2 / ((2.0 * g.r2).exp2() - 1.0),
    ];
    let s = [g.sigma1_2.sqrt(), g.sigma2_2.sqrt()];
    let c = g.rho_source * s[0] * s[1];
    let kw = [g.sigma1_2 + q[0], g.sigma2_2 + q[1]];
    let det = kw[0] * kw[1] - c * c;
    let r = g.rho_source;
    let est = run_batches(cfg, 0, 3, |rng, acc| {
        let z: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let u1 = s[0] * z[0];
        let u2 = s[1] * (r * z[0] + (1.0 - r * r).sqrt() * z[1]);
        let n1 = q[0].sqrt() * z[2];
        let n2 = q[1].sqrt() * z[3];
        let (w1, w2) = (u1 + n1, u2 + n2);
        let l1 = log_normal(n1, q[0]);
        let l2 = log_normal(n2, q[1]);
        let cond = |wa: f64, wb: f64, a: usize| {
            let b = 1 - a;
            log_normal(wa - c / kw[b] * wb, kw[a] - c * c / kw[b])
        };
        let lw = -(2.0 * PI).ln()
            - 0.5 * det.ln()
            - 0.5 * (kw[1] * w1 * w1 - 2.0 * c * w1 * w2 + kw[0] * w2 * w2) / det;
        // W1 − U1 − W2, so p(w1|u1,w2) = p(w1|u1)
        acc[0].push(l1 - cond(w1, w2, 0));
        acc[1].push(l2 - cond(w2, w1, 1));
        acc[2].push(l1 + l2 - lw);
    });
    Ok([est[0], est[1], est[2]])
}

/// Exact Gaussian inputs scaled to powers and correlation, as a convenience
/// for the closed-form comparisons.
pub fn gaussian_inputs(p: &GmacParams) -> (InputModel, McConfig) {
    (
        InputModel::Gaussian { rho: p.rho },
        McConfig {
            powers: [p.p1, p.p2],
            sigma_n2: p.sigma_n2,
            ..Default::default()
        },
    )
}

#[cfg(test)]
mod tests;
