//! Rate-distortion with and without decoder side information, by exhaustive
//! search over finite test channels p(w|u) with the Bayes-optimal decoder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probability::{binary_entropy, DistortionMeasure, JointPmf};

/// R(D) = h(p) − h(D) of a Bernoulli(p) source under Hamming distortion
/// (zero once D reaches min(p, 1 − p)).
pub fn binary_rate_distortion(p: f64, d: f64) -> f64 {
    if d >= p.min(1.0 - p) {
        0.0
    } else {
        binary_entropy(p) - binary_entropy(d.max(0.0))
    }
}

/// Search settings for [`wyner_ziv`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WzOptions {
    /// Test-channel output alphabet sizes to try.
    pub w_sizes: Vec<usize>,
    /// Coarse grid resolution for each entry of `w_sizes`.
    pub steps: Vec<usize>,
    /// Number of local refinement passes around the best grid point.
    pub zoom_levels: usize,
    /// Upper bound on test channels examined per coarse grid.
    pub budget: u128,
}

impl Default for WzOptions {
    fn default() -> Self {
        WzOptions {
            w_sizes: vec![2, 3],
            steps: vec![200, 20],
            zoom_levels: 16,
            budget: 5_000_000,
        }
    }
}

/// Best test channel found for one output alphabet size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WzPoint {
    pub w_size: usize,
    /// I(U;W|Z) in bits.
    pub rate: f64,
    pub distortion: f64,
    /// `test_channel[u][w]` = p(w|u).
    pub test_channel: Vec<Vec<f64>>,
    /// Reconstruction for each (z, w), row-major with w fastest.
    pub decoder: Vec<usize>,
}

/// Outcome of [`wyner_ziv`]: the best point for each alphabet size and the
/// overall minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WzReport {
    pub target: f64,
    pub points: Vec<WzPoint>,
    pub best: WzPoint,
}

struct Problem<'a> {
    /// p(u, z) with z flattened.
    puz: Vec<Vec<f64>>,
    nz: usize,
    measure: &'a DistortionMeasure,
}

impl Problem<'_> {
    fn nu(&self) -> usize {
        self.puz.len()
    }

    /// Rate I(U;W|Z) and Bayes distortion of test channel `q[u][w]`.
    fn evaluate(&self, q: &[Vec<f64>], k: usize) -> (f64, f64) {
        let nu = self.nu();
        let nr = self.measure.reproduction_size();
        let mut rate = 0.0;
        let mut dist = 0.0;
        for z in 0..self.nz {
            let pz: f64 = (0..nu).map(|u| self.puz[u][z]).sum();
            if pz == 0.0 {
                continue;
            }
            for w in 0..k {
                let pzw: f64 = (0..nu).map(|u| self.puz[u][z] * q[u][w]).sum();
                if pzw == 0.0 {
                    continue;
                }
                for u in 0..nu {
                    let p = self.puz[u][z] * q[u][w];
                    if p > 0.0 {
                        // p(u,z,w) log[p(u,z,w) p(z) / (p(u,z) p(z,w))]
                        rate += p * (q[u][w] * pz / pzw).log2();
                    }
                }
                let mut best = f64::INFINITY;
                for r in 0..nr {
                    let c: f64 = (0..nu)
                        .map(|u| self.puz[u][z] * q[u][w] * self.measure.get(u, r))
                        .sum();
                    best = best.min(c);
                }
                dist += best;
            }
        }
        (rate.max(0.0), dist)
    }

    fn decoder(&self, q: &[Vec<f64>], k: usize) -> Vec<usize> {
        let nu = self.nu();
        let nr = self.measure.reproduction_size();
        let mut table = Vec::with_capacity(self.nz * k);
        for z in 0..self.nz {
            for w in 0..k {
                let cost = |r: usize| -> f64 {
                    (0..nu)
                        .map(|u| self.puz[u][z] * q[u][w] * self.measure.get(u, r))
                        .sum()
                };
                let best = (0..nr)
                    .min_by(|&a, &b| cost(a).total_cmp(&cost(b)))
                    .unwrap_or(0);
                table.push(best);
            }
        }
        table
    }
}

/// All compositions of `steps` into `k` nonnegative parts, as probability
/// vectors.
fn simplex_grid(k: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if k == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(k - 1, left - c, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, steps, steps, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Candidate is better when it meets the target and has lower rate, breaking
/// ties on distortion.
fn better(cand: (f64, f64), best: Option<(f64, f64)>, target: f64) -> bool {
    if cand.1 > target + 1e-12 {
        return false;
    }
    match best {
        None => true,
        Some(b) => cand.0 < b.0 - 1e-15 || (cand.0 <= b.0 + 1e-15 && cand.1 < b.1),
    }
}

fn search(
    prob: &Problem,
    k: usize,
    steps: usize,
    opts: &WzOptions,
    target: f64,
) -> Result<WzPoint> {
    let nu = prob.nu();
    let per_row = binomial((steps + k - 1) as u128, (k - 1) as u128);
    let count = (0..nu).fold(1u128, |a, _| a.saturating_mul(per_row));
    if count > opts.budget {
        return Err(Error::BudgetExceeded {
            count,
            budget: opts.budget,
        });
    }
    let grid = simplex_grid(k, steps);
    let mut idx = vec![0usize; nu];
    let mut best: Option<(f64, f64)> = None;
    let mut best_q: Vec<Vec<f64>> = Vec::new();
    loop {
        let q: Vec<Vec<f64>> = idx.iter().map(|&i| grid[i].clone()).collect();
        let v = prob.evaluate(&q, k);
        if better(v, best, target) {
            best = Some(v);
            best_q = q;
        }
        let mut pos = 0;
        loop {
            if pos == nu {
                break;
            }
            idx[pos] += 1;
            if idx[pos] < grid.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == nu {
            break;
        }
    }
    let Some(mut best_v) = best else {
        return Err(Error::InvalidDistortion(format!(
            "no test channel with {k} outputs reaches distortion {target}"
        )));
    };

    // local refinement on the free coordinates q[u][0..k-1]
    let m: i64 = 4;
    let mut span = 1.0 / steps as f64;
    let dims = nu * (k - 1);
    let mut shrinks = 0;
    let mut passes = 0;
    while shrinks < opts.zoom_levels && passes < 50 * opts.zoom_levels {
        passes += 1;
        let center = best_q.clone();
        let before = best_v;
        let mut offs = vec![-m; dims];
        loop {
            let mut q = center.clone();
            let mut ok = true;
            for u in 0..nu {
                let mut rest = 1.0;
                for w in 0..k - 1 {
                    let v = center[u][w] + offs[u * (k - 1) + w] as f64 * span / m as f64;
                    if v < 0.0 {
                        ok = false;
                    }
                    q[u][w] = v;
                    rest -= v;
                }
                if rest < -1e-15 {
                    ok = false;
                }
                q[u][k - 1] = rest.max(0.0);
            }
            if ok {
                let v = prob.evaluate(&q, k);
                if better(v, Some(best_v), target) {
                    best_v = v;
                    best_q = q;
                }
            }
            let mut pos = 0;
            while pos < dims {
                offs[pos] += 1;
                if offs[pos] <= m {
                    break;
                }
                offs[pos] = -m;
                pos += 1;
            }
            if pos == dims {
                break;
            }
        }
        if best_v == before {
            span *= 0.5;
            shrinks += 1;
        }
    }

    Ok(WzPoint {
        w_size: k,
        rate: best_v.0,
        distortion: best_v.1,
        decoder: prob.decoder(&best_q, k),
        test_channel: best_q,
    })
}

/// Smallest I(U;W|Z) over test channels p(w|u) whose Bayes-optimal decoder
/// û(w, z) meets `target`, searched on a grid for each alphabet size in
/// `opts.w_sizes` and refined locally. With `z` empty this is the ordinary
/// rate-distortion function restricted to the searched channels.
pub fn wyner_ziv(
    source: &JointPmf,
    u: &str,
    z: &[&str],
    measure: &DistortionMeasure,
    target: f64,
    opts: &WzOptions,
) -> Result<WzReport> {
    if !(target >= 0.0) {
        return Err(Error::InvalidDistortion(format!(
            "target {target} is negative"
        )));
    }
    if opts.w_sizes.len() != opts.steps.len() || opts.w_sizes.is_empty() {
        return Err(Error::InvalidParam(
            "w_sizes and steps must be nonempty and of equal length".into(),
        ));
    }
    let nu = source.size_of(u)?;
    if measure.source_size() != nu {
        return Err(Error::AlphabetMismatch(format!(
            "distortion measure covers {} symbols but `{u}` has {nu}",
            measure.source_size()
        )));
    }
    let mut names = vec![u];
    names.extend_from_slice(z);
    let j = source.marginal(&names)?;
    let nz = j.probs().len() / nu;
    let puz = (0..nu)
        .map(|a| j.probs()[a * nz..(a + 1) * nz].to_vec())
        .collect();
    let prob = Problem { puz, nz, measure };

    let mut points = Vec::new();
    for (&k, &steps) in opts.w_sizes.iter().zip(&opts.steps) {
        if k < 1 || steps < 1 {
            return Err(Error::InvalidParam(
                "alphabet size and steps must be positive".into(),
            ));
        }
        points.push(search(&prob, k, steps, opts, target)?);
    }
    let best = points
        .iter()
        .min_by(|a, b| a.rate.total_cmp(&b.rate))
        .cloned()
        .expect("at least one alphabet size");
    Ok(WzReport {
        target,
        points,
        best,
    })
}
