//! Discrete-to-Gaussian channel mapping. Each symbol of each source is sent
//! as a draw from its own one-dimensional Gaussian mixture; the fit chooses
//! the mixtures so that the induced joint density of (X1, X2) is close in L2
//! to a zero-mean, unit-variance bivariate Gaussian with correlation ρ.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::probability::{JointPmf, NORMALIZATION_TOL};

/// Smallest variance the search is allowed to visit.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// One Gaussian component N(mean, var) with its mixing weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub var: f64,
}

impl Component {
    pub const STANDARD: Component = Component {
        weight: 1.0,
        mean: 0.0,
        var: 1.0,
    };
}

/// Per-symbol mixtures for both sources: `sources[s][u]` is the list of
/// components used by source `s` when it emits symbol `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub sources: [Vec<Vec<Component>>; 2],
}

/// Moment-constraint deviations of a spec under a source pmf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResiduals {
    /// E[X1], E[X2], E[X1²] − 1, E[X2²] − 1.
    pub moments: [f64; 4],
    /// Σ weights − 1 for every (source, symbol) in order.
    pub weight_sums: Vec<f64>,
}

impl ConstraintResiduals {
    pub fn max_abs(&self) -> f64 {
        self.moments
            .iter()
            .chain(&self.weight_sums)
            .fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// L2 distance between the induced density and the Gaussian target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Value {
    pub objective: f64,
    /// `objective / ∫f_ρ²`.
    pub normalized: f64,
}

/// Outcome of [`fit_mixture`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: MixtureSpec,
    pub rho_target: f64,
    pub objective: f64,
    pub normalized_distortion: f64,
    pub constraint_residuals: ConstraintResiduals,
    pub induced_rho: f64,
    /// Index of the multi-start that produced the returned spec.
    pub best_start: usize,
    pub starts: usize,
}

/// Settings for [`fit_mixture`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub starts: usize,
    pub seed: u64,
    pub penalty_initial: f64,
    pub penalty_growth: f64,
    pub penalty_rounds: usize,
    /// Objective evaluations allowed per simplex search.
    pub max_evals: usize,
    /// Simplex restarts from the current best point within each round.
    pub restarts: usize,
    /// Spread of the random perturbation applied to the standard spec.
    pub perturbation: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            starts: 16,
            seed: 0,
            penalty_initial: 10.0,
            penalty_growth: 10.0,
            penalty_rounds: 5,
            max_evals: 20_000,
            restarts: 3,
            perturbation: 0.5,
        }
    }
}

fn normal_pdf(d: f64, var: f64) -> f64 {
    (-d * d / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

fn component_pdf(c: &Component, x: f64) -> f64 {
    if c.var == 0.0 {
        return if x == c.mean { f64::INFINITY } else { 0.0 };
    }
    normal_pdf(x - c.mean, c.var)
}

/// Density of the bivariate N(0, [[s11, s12], [s12, s22]]) at `m`.
fn bivariate_pdf(m: [f64; 2], s11: f64, s12: f64, s22: f64) -> f64 {
    let det = s11 * s22 - s12 * s12;
    let q = (s22 * m[0] * m[0] - 2.0 * s12 * m[0] * m[1] + s11 * m[1] * m[1]) / det;
    (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
}

/// ∫f_ρ² for the unit-variance bivariate Gaussian with correlation ρ.
pub fn target_self_inner(rho: f64) -> f64 {
    1.0 / (4.0 * PI * (1.0 - rho * rho).sqrt())
}

/// Pair of source alphabets read from the first two variables of `pmf`.
fn alphabet_sizes(pmf: &JointPmf) -> Result<[usize; 2]> {
    let v = pmf.variables();
    if v.len() != 2 {
        return Err(Error::ShapeMismatch {
            expected: 2,
            got: v.len(),
        });
    }
    Ok([v[0].size, v[1].size])
}

fn source_marginals(pmf: &JointPmf) -> Result<[Vec<f64>; 2]> {
    let [n1, n2] = alphabet_sizes(pmf)?;
    let mut m = [vec![0.0; n1], vec![0.0; n2]];
    for u1 in 0..n1 {
        for u2 in 0..n2 {
            let p = pmf.probs()[u1 * n2 + u2];
            m[0][u1] += p;
            m[1][u2] += p;
        }
    }
    Ok(m)
}

fn check_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(Error::DegenerateRho(rho));
    }
    Ok(())
}

impl MixtureSpec {
    /// Every symbol uses `r` copies of N(0, 1) with equal weights.
    pub fn standard(sizes: [usize; 2], r: usize) -> Self {
        let comp = Component {
            weight: 1.0 / r as f64,
            ..Component::STANDARD
        };
        MixtureSpec {
            sources: sizes.map(|n| vec![vec![comp; r]; n]),
        }
    }

    /// Same component list for every symbol of both sources.
    pub fn uniform(sizes: [usize; 2], components: &[Component]) -> Self {
        MixtureSpec {
            sources: sizes.map(|n| vec![components.to_vec(); n]),
        }
    }

    pub fn symbol(&self, source: usize, symbol: usize) -> Result<&[Component]> {
        self.sources
            .get(source)
            .and_then(|s| s.get(symbol))
            .map(Vec::as_slice)
            .ok_or(Error::SymbolNotCovered {
                source_index: source,
                symbol,
            })
    }

    /// Weights nonnegative and normalized per symbol; variances nonnegative;
    /// all values finite; at least one component per symbol.
    pub fn validate(&self) -> Result<()> {
        for (s, symbols) in self.sources.iter().enumerate() {
            for (u, comps) in symbols.iter().enumerate() {
                if comps.is_empty() {
                    return Err(Error::InvalidParam(format!(
                        "source {} symbol {u} has no components",
                        s + 1
                    )));
                }
                let mut sum = 0.0;
                for c in comps {
                    if !(c.weight.is_finite() && c.mean.is_finite() && c.var.is_finite()) {
                        return Err(Error::InvalidParam(format!(
                            "non-finite component in source {} symbol {u}",
                            s + 1
                        )));
                    }
                    if c.weight < 0.0 {
                        return Err(Error::InvalidParam(format!(
                            "negative weight {} in source {} symbol {u}",
                            c.weight,
                            s + 1
                        )));
                    }
                    if c.var < 0.0 {
                        return Err(Error::InvalidParam(format!(
                            "negative variance {} in source {} symbol {u}",
                            c.var,
                            s + 1
                        )));
                    }
                    sum += c.weight;
                }
                if (sum - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::NotNormalized { sum });
                }
            }
        }
        Ok(())
    }

    /// Fails with `SymbolNotCovered` unless every symbol of `pmf` has a
    /// mixture.
    pub fn check_covers(&self, pmf: &JointPmf) -> Result<()> {
        let sizes = alphabet_sizes(pmf)?;
        for s in 0..2 {
            if self.sources[s].len() < sizes[s] {
                return Err(Error::SymbolNotCovered {
                    source_index: s,
                    symbol: self.sources[s].len(),
                });
            }
        }
        Ok(())
    }

    /// Conditional density f(x | source `s` emits `u`).
    pub fn conditional_density(&self, s: usize, u: usize, x: f64) -> Result<f64> {
        Ok(self
            .symbol(s, u)?
            .iter()
            .map(|c| c.weight * component_pdf(c, x))
            .sum())
    }

    /// Same spec with every mean multiplied by `scale` and every variance
    /// by `scale²`, so X ↦ scale·X for the chosen source.
    pub fn scaled(&self, scale: [f64; 2]) -> Self {
        let mut out = self.clone();
        for (s, symbols) in out.sources.iter_mut().enumerate() {
            for c in symbols.iter_mut().flatten() {
                c.mean *= scale[s];
                c.var *= scale[s] * scale[s];
            }
        }
        out
    }

    /// First and second moments of each per-symbol mixture.
    fn symbol_moments(&self, s: usize) -> Vec<(f64, f64)> {
        self.sources[s]
            .iter()
            .map(|comps| {
                comps.iter().fold((0.0, 0.0), |(m1, m2), c| {
                    (
                        m1 + c.weight * c.mean,
                        m2 + c.weight * (c.var + c.mean * c.mean),
                    )
                })
            })
            .collect()
    }

    /// Rescale each source so that E[X]=0 and E[X²]=1 hold exactly under
    /// `pmf`.
    pub fn standardized(&self, pmf: &JointPmf) -> Result<Self> {
        self.check_covers(pmf)?;
        let marg = source_marginals(pmf)?;
        let mut out = self.clone();
        for s in 0..2 {
            let mom = self.symbol_moments(s);
            let (m, e2) = marg[s]
                .iter()
                .zip(&mom)
                .fold((0.0, 0.0), |(a, b), (p, (m1, m2))| (a + p * m1, b + p * m2));
            let v = e2 - m * m;
            if !(v > 0.0) {
                return Err(Error::ZeroVarianceComponent);
            }
            let sd = v.sqrt();
            for c in out.sources[s].iter_mut().flatten() {
                c.mean = (c.mean - m) / sd;
                c.var /= v;
            }
        }
        Ok(out)
    }
}

/// Induced joint density g(x1, x2) = Σ p(u1,u2) f(x1|u1) f(x2|u2).
pub fn induced_density(spec: &MixtureSpec, pmf: &JointPmf, x1: f64, x2: f64) -> Result<f64> {
    spec.check_covers(pmf)?;
    let [n1, n2] = alphabet_sizes(pmf)?;
    let f1: Vec<f64> = (0..n1)
        .map(|u| spec.conditional_density(0, u, x1))
        .collect::<Result<_>>()?;
    let f2: Vec<f64> = (0..n2)
        .map(|u| spec.conditional_density(1, u, x2))
        .collect::<Result<_>>()?;
    let mut g = 0.0;
    for u1 in 0..n1 {
        for u2 in 0..n2 {
            let p = pmf.probs()[u1 * n2 + u2];
            if p > 0.0 {
                g += p * f1[u1] * f2[u2];
            }
        }
    }
    Ok(g)
}

/// A(u, u') = ∫ f(x|u) f(x|u') dx for one source.
fn overlap_matrix(symbols: &[Vec<Component>], used: &[bool]) -> Result<Vec<Vec<f64>>> {
    let n = symbols.len();
    let mut a = vec![vec![0.0; n]; n];
    for u in 0..n {
        for v in u..n {
            if !(used[u] && used[v]) {
                continue;
            }
            let mut s = 0.0;
            for ci in &symbols[u] {
                for cj in &symbols[v] {
                    let w = ci.weight * cj.weight;
                    if w == 0.0 {
                        continue;
                    }
                    let var = ci.var + cj.var;
                    if var == 0.0 {
                        return Err(Error::ZeroVarianceComponent);
                    }
                    s += w * normal_pdf(ci.mean - cj.mean, var);
                }
            }
            a[u][v] = s;
            a[v][u] = s;
        }
    }
    Ok(a)
}

/// Closed-form ∫(g − f_ρ)² over the plane.
pub fn l2_objective(spec: &MixtureSpec, pmf: &JointPmf, rho: f64) -> Result<L2Value> {
    check_rho(rho)?;
    spec.check_covers(pmf)?;
    let [n1, n2] = alphabet_sizes(pmf)?;
    let probs = pmf.probs();
    let marg = source_marginals(pmf)?;
    let used1: Vec<bool> = marg[0].iter().map(|&p| p > 0.0).collect();
    let used2: Vec<bool> = marg[1].iter().map(|&p| p > 0.0).collect();
    let a1 = overlap_matrix(&spec.sources[0][..n1], &used1)?;
    let a2 = overlap_matrix(&spec.sources[1][..n2], &used2)?;

    let cells: Vec<(usize, usize, f64)> = (0..n1)
        .flat_map(|u1| (0..n2).map(move |u2| (u1, u2)))
        .map(|(u1, u2)| (u1, u2, probs[u1 * n2 + u2]))
        .filter(|c| c.2 > 0.0)
        .collect();

    let mut gg = 0.0;
    for &(u1, u2, p) in &cells {
        for &(v1, v2, q) in &cells {
            gg += p * q * a1[u1][v1] * a2[u2][v2];
        }
    }
    let mut gf = 0.0;
    for &(u1, u2, p) in &cells {
        for c1 in &spec.sources[0][u1] {
            for c2 in &spec.sources[1][u2] {
                let w = c1.weight * c2.weight;
                if w > 0.0 {
                    gf +=
                        p * w * bivariate_pdf([c1.mean, c2.mean], 1.0 + c1.var, rho, 1.0 + c2.var);
                }
            }
        }
    }
    let ff = target_self_inner(rho);
    let objective = (gg - 2.0 * gf + ff).max(0.0);
    Ok(L2Value {
        objective,
        normalized: objective / ff,
    })
}

/// Residuals of the moment equations and weight normalizations.
pub fn constraint_residuals(spec: &MixtureSpec, pmf: &JointPmf) -> Result<ConstraintResiduals> {
    spec.check_covers(pmf)?;
    let marg = source_marginals(pmf)?;
    let mut moments = [0.0; 4];
    for s in 0..2 {
        let mom = spec.symbol_moments(s);
        let (m, e2) = marg[s]
            .iter()
            .zip(&mom)
            .fold((0.0, 0.0), |(a, b), (p, (m1, m2))| (a + p * m1, b + p * m2));
        moments[s] = m;
        moments[2 + s] = e2 - 1.0;
    }
    let weight_sums = spec
        .sources
        .iter()
        .flatten()
        .map(|comps| comps.iter().map(|c| c.weight).sum::<f64>() - 1.0)
        .collect();
    Ok(ConstraintResiduals {
        moments,
        weight_sums,
    })
}

/// Correlation coefficient of (X1, X2) under the induced joint.
pub fn induced_rho(spec: &MixtureSpec, pmf: &JointPmf) -> Result<f64> {
    spec.check_covers(pmf)?;
    let [n1, n2] = alphabet_sizes(pmf)?;
    let marg = source_marginals(pmf)?;
    let m1 = spec.symbol_moments(0);
    let m2 = spec.symbol_moments(1);
    let mut cross = 0.0;
    for u1 in 0..n1 {
        for u2 in 0..n2 {
            cross += pmf.probs()[u1 * n2 + u2] * m1[u1].0 * m2[u2].0;
        }
    }
    let stats = |m: &[(f64, f64)], p: &[f64]| {
        let (a, b) = p
            .iter()
            .zip(m)
            .fold((0.0, 0.0), |(a, b), (p, (x, y))| (a + p * x, b + p * y));
        (a, b - a * a)
    };
    let (e1, v1) = stats(&m1, &marg[0]);
    let (e2, v2) = stats(&m2, &marg[1]);
    if !(v1 > 0.0 && v2 > 0.0) {
        return Ok(0.0);
    }
    Ok((cross - e1 * e2) / (v1 * v2).sqrt())
}

/// Draw one channel input for `symbol` of source `source` (0 or 1).
pub fn sample_codeword<R: Rng + ?Sized>(
    spec: &MixtureSpec,
    source: usize,
    symbol: usize,
    rng: &mut R,
) -> Result<f64> {
    let comps = spec.symbol(source, symbol)?;
    let mut t: f64 = rng.random();
    let mut pick = comps.len() - 1;
    for (i, c) in comps.iter().enumerate() {
        if t < c.weight {
            pick = i;
            break;
        }
        t -= c.weight;
    }
    let c = &comps[pick];
    let z: f64 = StandardNormal.sample(rng);
    Ok(c.mean + c.var.sqrt() * z)
}

/// Search-space layout: for each (source, symbol) with r components there are
/// r raw weights, r means and r raw variances.
struct Layout {
    counts: Vec<usize>,
    sizes: [usize; 2],
}

impl Layout {
    fn dim(&self) -> usize {
        self.counts.iter().map(|r| 3 * r).sum()
    }

    fn decode(&self, x: &[f64]) -> MixtureSpec {
        let mut k = 0;
        let mut idx = 0;
        let mut sources: [Vec<Vec<Component>>; 2] = [Vec::new(), Vec::new()];
        for (s, &n) in self.sizes.iter().enumerate() {
            for _ in 0..n {
                let r = self.counts[idx];
                idx += 1;
                let raw = &x[k..k + 3 * r];
                k += 3 * r;
                let total: f64 = raw[..r].iter().map(|w| w.abs()).sum();
                let comps = (0..r)
                    .map(|i| Component {
                        weight: if total > 0.0 {
                            raw[i].abs() / total
                        } else {
                            1.0 / r as f64
                        },
                        mean: raw[r + i],
                        var: raw[2 * r + i].abs().max(VARIANCE_FLOOR),
                    })
                    .collect();
                sources[s].push(comps);
            }
        }
        MixtureSpec { sources }
    }

    #[cfg(test)]
    fn encode(&self, spec: &MixtureSpec) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        for comps in spec.sources.iter().flatten() {
            x.extend(comps.iter().map(|c| c.weight));
            x.extend(comps.iter().map(|c| c.mean));
            x.extend(comps.iter().map(|c| c.var));
        }
        x
    }
}

fn expand_counts(counts: &[usize], sizes: [usize; 2]) -> Result<Vec<usize>> {
    let total = sizes[0] + sizes[1];
    let v = match counts.len() {
        1 => vec![counts[0]; total],
        2 => {
            let mut v = vec![counts[0]; sizes[0]];
            v.extend(vec![counts[1]; sizes[1]]);
            v
        }
        n if n == total => counts.to_vec(),
        n => {
            return Err(Error::ShapeMismatch {
                expected: total,
                got: n,
            })
        }
    };
    if v.contains(&0) {
        return Err(Error::InvalidParam(
            "component counts must be at least 1".into(),
        ));
    }
    Ok(v)
}

fn starting_point(layout: &Layout, start: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(layout.dim());
    for &r in &layout.counts {
        let jitter = if start == 0 { 0.0 } else { scale };
        for _ in 0..r {
            let e: f64 = rng.random_range(-0.5..0.5);
            x.push((1.0 + jitter * e) / r as f64);
        }
        for _ in 0..r {
            let z: f64 = StandardNormal.sample(&mut rng);
            x.push(jitter * z);
        }
        for _ in 0..r {
            let z: f64 = StandardNormal.sample(&mut rng);
            x.push((jitter * z).exp());
        }
    }
    x
}

struct StartOutcome {
    spec: MixtureSpec,
    objective: f64,
}

fn run_start(
    pmf: &JointPmf,
    rho: f64,
    layout: &Layout,
    opts: &FitOptions,
    start: usize,
) -> Option<StartOutcome> {
    let mut x = starting_point(
        layout,
        start,
        opts.perturbation,
        opts.seed.wrapping_add(start as u64),
    );
    let nm = NelderMeadOptions {
        max_evals: opts.max_evals,
        ..Default::default()
    };
    let mut mu = opts.penalty_initial;
    for _ in 0..opts.penalty_rounds {
        let penalized = |x: &[f64]| -> f64 {
            let spec = layout.decode(x);
            let Ok(l2) = l2_objective(&spec, pmf, rho) else {
                return f64::INFINITY;
            };
            let Ok(res) = constraint_residuals(&spec, pmf) else {
                return f64::INFINITY;
            };
            l2.objective + mu * res.moments.iter().map(|r| r * r).sum::<f64>()
        };
        let mut best = f64::INFINITY;
        for _ in 0..=opts.restarts {
            let m = nelder_mead(penalized, &x, &nm);
            let improved = m.value < best - 1e-15;
            x = m.x;
            best = best.min(m.value);
            if !improved {
                break;
            }
        }
        mu *= opts.penalty_growth;
    }
    let spec = layout.decode(&x).standardized(pmf).ok()?;
    let objective = l2_objective(&spec, pmf, rho).ok()?.objective;
    if !objective.is_finite() {
        return None;
    }
    let res = constraint_residuals(&spec, pmf).ok()?;
    if res.max_abs() > 1e-6 {
        return None;
    }
    Some(StartOutcome { spec, objective })
}

/// Fit per-symbol mixtures for the two sources of `pmf` to the unit-variance
/// Gaussian target with correlation `rho`.
///
/// `counts` lists components per symbol: one value for every symbol, one value
/// per source, or one value for each (source, symbol) in order.
pub fn fit_mixture(
    pmf: &JointPmf,
    rho: f64,
    counts: &[usize],
    opts: &FitOptions,
) -> Result<FitResult> {
    check_rho(rho)?;
    let sizes = alphabet_sizes(pmf)?;
    let layout = Layout {
        counts: expand_counts(counts, sizes)?,
        sizes,
    };
    if opts.starts == 0 {
        return Err(Error::InvalidParam("at least one start is required".into()));
    }
    let outcomes: Vec<Option<StartOutcome>> = (0..opts.starts)
        .into_par_iter()
        .map(|i| run_start(pmf, rho, &layout, opts, i))
        .collect();
    let (best_start, best) = outcomes
        .into_iter()
        .enumerate()
        .filter_map(|(i, o)| o.map(|o| (i, o)))
        .min_by(|a, b| a.1.objective.total_cmp(&b.1.objective).then(a.0.cmp(&b.0)))
        .ok_or(Error::OptimizerDiverged {
            starts: opts.starts,
        })?;
    let l2 = l2_objective(&best.spec, pmf, rho)?;
    Ok(FitResult {
        constraint_residuals: constraint_residuals(&best.spec, pmf)?,
        induced_rho: induced_rho(&best.spec, pmf)?,
        spec: best.spec,
        rho_target: rho,
        objective: l2.objective,
        normalized_distortion: l2.normalized,
        best_start,
        starts: opts.starts,
    })
}
