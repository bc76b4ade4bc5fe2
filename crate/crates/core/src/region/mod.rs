//! Achievability inequalities for correlated sources over a MAC with side
//! information, evaluated exactly on a fully specified system.
//!
//! A [`SystemSpec`] fixes every distribution in the chain
//! `(U, Z) -> W -> X -> Y`; [`check_theorem1`] and [`check_multiuser`] build
//! the full joint and compare each left-hand side (information the decoder
//! must resolve) against its right-hand side (information the channel
//! delivers).

mod reference;
mod special;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probability::{DiscreteKernel, DistortionMeasure, JointPmf, Variable};

pub use reference::*;
pub use special::*;

/// Half-width of the band around zero margin reported as a boundary tie.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Satisfied,
    Boundary,
    Violated,
}

impl RowStatus {
    pub fn from_margin(margin: f64) -> Self {
        if margin > BOUNDARY_TOL {
            RowStatus::Satisfied
        } else if margin >= -BOUNDARY_TOL {
            RowStatus::Boundary
        } else {
            RowStatus::Violated
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub status: RowStatus,
}

impl RegionRow {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        RegionRow {
            label: label.into(),
            lhs,
            rhs,
            margin,
            status: RowStatus::from_margin(margin),
        }
    }

    pub fn satisfied(&self) -> bool {
        self.status == RowStatus::Satisfied
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionRow {
    pub source: String,
    pub achieved: f64,
    pub target: f64,
    pub satisfied: bool,
}

/// Per-inequality verdicts for one region check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub rows: Vec<RegionRow>,
    #[serde(default)]
    pub distortion: Vec<DistortionRow>,
    pub feasible: bool,
    /// Set by checks whose conditions are also necessary (orthogonal links).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
}

impl RegionReport {
    pub fn new(rows: Vec<RegionRow>, distortion: Vec<DistortionRow>) -> Self {
        let feasible =
            rows.iter().all(RegionRow::satisfied) && distortion.iter().all(|d| d.satisfied);
        RegionReport {
            rows,
            distortion,
            feasible,
            exact: None,
        }
    }

    pub fn row(&self, i: usize) -> &RegionRow {
        &self.rows[i]
    }

    pub fn min_margin(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Display for RegionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(0)
            .max(10);
        writeln!(
            f,
            "{:<w$}  {:>10}  {:>10}  {:>11}  status",
            "inequality", "lhs", "rhs", "margin"
        )?;
        for r in &self.rows {
            let status = match r.status {
                RowStatus::Satisfied => "ok",
                RowStatus::Boundary => "boundary",
                RowStatus::Violated => "VIOLATED",
            };
            writeln!(
                f,
                "{:<w$}  {:>10.6}  {:>10.6}  {:>+11.6}  {}",
                r.label, r.lhs, r.rhs, r.margin, status
            )?;
        }
        for d in &self.distortion {
            writeln!(
                f,
                "{:<w$}  {:>10.6}  {:>10.6}  {:>+11.6}  {}",
                format!("E d({0},{0}^)", d.source),
                d.achieved,
                d.target,
                d.target - d.achieved,
                if d.satisfied { "ok" } else { "VIOLATED" }
            )?;
        }
        if let Some(exact) = self.exact {
            writeln!(f, "conditions are necessary and sufficient: {exact}")?;
        }
        write!(
            f,
            "verdict: {}",
            if self.feasible {
                "feasible"
            } else {
                "infeasible"
            }
        )
    }
}

/// One reconstruction map of the decoder, indexed row-major over the
/// decoder inputs `(W_1, .., W_M, Z...)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub size: usize,
    pub table: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decoder {
    pub reconstructions: Vec<Reconstruction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionTarget {
    pub measure: DistortionMeasure,
    pub target: f64,
}

impl DistortionTarget {
    pub fn lossless(size: usize) -> Self {
        DistortionTarget {
            measure: DistortionMeasure::hamming(size),
            target: 0.0,
        }
    }
}

fn default_u1() -> String {
    "U1".into()
}
fn default_u2() -> String {
    "U2".into()
}

/// A complete two-user instance: source with side information, encoders,
/// channel-input maps, the MAC, and optionally a decoder with fidelity
/// targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub source: JointPmf,
    #[serde(default = "default_u1")]
    pub u1: String,
    #[serde(default = "default_u2")]
    pub u2: String,
    #[serde(default)]
    pub z1: Vec<String>,
    #[serde(default)]
    pub z2: Vec<String>,
    #[serde(default)]
    pub z: Vec<String>,
    pub enc1: DiscreteKernel,
    pub enc2: DiscreteKernel,
    pub chin1: DiscreteKernel,
    pub chin2: DiscreteKernel,
    pub channel: DiscreteKernel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoder: Option<Decoder>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distortion: Vec<DistortionTarget>,
}

/// One user of a multi-user system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub u: String,
    #[serde(default)]
    pub z: Vec<String>,
    pub enc: DiscreteKernel,
    pub chin: DiscreteKernel,
}

/// M-user generalization of [`SystemSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiSpec {
    pub source: JointPmf,
    pub users: Vec<User>,
    #[serde(default)]
    pub z: Vec<String>,
    pub channel: DiscreteKernel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoder: Option<Decoder>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distortion: Vec<DistortionTarget>,
}

fn owned(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Builds the set `a` minus everything in `minus`, without duplicates.
fn set_minus(a: &[String], minus: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for x in a {
        if !minus.contains(x) && !out.contains(x) {
            out.push(x.clone());
        }
    }
    out
}

fn dedup(a: &[String]) -> Vec<String> {
    set_minus(a, &[])
}

/// I(A; B | C) where A and B may repeat members of C; repeated members carry
/// no extra information and are dropped.
pub(crate) fn cond_mi(j: &JointPmf, a: &[String], b: &[String], c: &[String]) -> Result<f64> {
    let c = dedup(c);
    let a = set_minus(a, &c);
    let b = set_minus(b, &c);
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    j.mutual_info(&refs(&a), &refs(&b), &refs(&c))
}

pub(crate) fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn fmt_set(v: &[String]) -> String {
    v.join(",")
}

fn mi_label(a: &[String], b: &[String], c: &[String]) -> String {
    if c.is_empty() {
        format!("I({};{})", fmt_set(a), fmt_set(b))
    } else {
        format!("I({};{}|{})", fmt_set(a), fmt_set(b), fmt_set(c))
    }
}

fn require_vars(source: &JointPmf, names: &[String]) -> Result<()> {
    for n in names {
        source.index_of(n)?;
    }
    Ok(())
}

fn require_inputs_within(k: &DiscreteKernel, allowed: &[String], role: &str) -> Result<()> {
    for v in k.inputs() {
        if !allowed.contains(&v.name) {
            return Err(Error::InvalidSystem(format!(
                "{role} may only read {allowed:?}, but reads `{}`",
                v.name
            )));
        }
    }
    Ok(())
}

impl MultiSpec {
    pub fn w_names(&self) -> Vec<String> {
        self.users
            .iter()
            .map(|u| u.enc.output().name.clone())
            .collect()
    }

    pub fn x_names(&self) -> Vec<String> {
        self.users
            .iter()
            .map(|u| u.chin.output().name.clone())
            .collect()
    }

    pub fn y_name(&self) -> String {
        self.channel.output().name.clone()
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.len() < 2 {
            return Err(Error::InvalidSystem(format!(
                "need at least two users, got {}",
                self.users.len()
            )));
        }
        require_vars(&self.source, &self.z)?;
        let ws = self.w_names();
        let xs = self.x_names();
        for (i, u) in self.users.iter().enumerate() {
            self.source.index_of(&u.u)?;
            require_vars(&self.source, &u.z)?;
            let mut allowed = vec![u.u.clone()];
            allowed.extend(u.z.iter().cloned());
            require_inputs_within(&u.enc, &allowed, &format!("encoder {}", i + 1))?;
            require_inputs_within(&u.chin, &ws[i..=i], &format!("channel input map {}", i + 1))?;
        }
        require_inputs_within(&self.channel, &xs, "channel")?;
        self.validate_decoder()
    }

    fn decoder_input_sizes(&self, joint: &JointPmf) -> Result<Vec<Variable>> {
        let mut vars = Vec::new();
        for n in self.w_names().iter().chain(dedup(&self.z).iter()) {
            vars.push(Variable::new(n.clone(), joint.size_of(n)?));
        }
        Ok(vars)
    }

    fn validate_decoder(&self) -> Result<()> {
        let Some(dec) = &self.decoder else {
            if !self.distortion.is_empty() {
                return Err(Error::InvalidSystem(
                    "distortion targets given without a decoder".into(),
                ));
            }
            return Ok(());
        };
        if dec.reconstructions.len() != self.users.len() {
            return Err(Error::InvalidSystem(format!(
                "decoder has {} reconstructions for {} users",
                dec.reconstructions.len(),
                self.users.len()
            )));
        }
        let mut rows = 1usize;
        for u in &self.users {
            rows *= u.enc.output().size;
        }
        for z in dedup(&self.z) {
            rows *= self.source.size_of(&z)?;
        }
        for (i, r) in dec.reconstructions.iter().enumerate() {
            if r.table.len() != rows {
                return Err(Error::InvalidSystem(format!(
                    "reconstruction {} has {} entries, decoder domain has {rows}",
                    i + 1,
                    r.table.len()
                )));
            }
            if let Some(&bad) = r.table.iter().find(|&&v| v >= r.size) {
                return Err(Error::InvalidSystem(format!(
                    "reconstruction {} outputs {bad} outside alphabet of size {}",
                    i + 1,
                    r.size
                )));
            }
        }
        if !self.distortion.is_empty() && self.distortion.len() != self.users.len() {
            return Err(Error::InvalidSystem(format!(
                "{} distortion targets for {} users",
                self.distortion.len(),
                self.users.len()
            )));
        }
        for (i, d) in self.distortion.iter().enumerate() {
            let nu = self.source.size_of(&self.users[i].u)?;
            if d.measure.source_size() != nu
                || d.measure.reproduction_size() != dec.reconstructions[i].size
            {
                return Err(Error::AlphabetMismatch(format!(
                    "distortion measure {} is {}x{}, source/reconstruction are {}x{}",
                    i + 1,
                    d.measure.source_size(),
                    d.measure.reproduction_size(),
                    nu,
                    dec.reconstructions[i].size
                )));
            }
        }
        Ok(())
    }

    /// Full joint of sources, side information, auxiliaries, inputs and output.
    pub fn joint(&self) -> Result<JointPmf> {
        self.validate()?;
        let mut j = self.source.clone();
        for u in &self.users {
            j = j.attach_kernel(&u.enc)?;
        }
        for u in &self.users {
            j = j.attach_kernel(&u.chin)?;
        }
        j.attach_kernel(&self.channel)
    }

    pub fn reconstruction_name(&self, i: usize) -> String {
        format!("{}^", self.users[i].u)
    }

    /// Appends the decoder outputs to a joint built by [`MultiSpec::joint`].
    fn with_reconstructions(&self, joint: &JointPmf) -> Result<Option<JointPmf>> {
        let Some(dec) = &self.decoder else {
            return Ok(None);
        };
        let inputs = self.decoder_input_sizes(joint)?;
        let sizes: Vec<usize> = inputs.iter().map(|v| v.size).collect();
        let mut j = joint.clone();
        for (i, r) in dec.reconstructions.iter().enumerate() {
            let out = Variable::new(self.reconstruction_name(i), r.size);
            let k = DiscreteKernel::deterministic(inputs.clone(), out, |a| {
                let mut idx = 0;
                for (x, s) in a.iter().zip(&sizes) {
                    idx = idx * s + x;
                }
                r.table[idx]
            })?;
            j = j.attach_kernel(&k)?;
        }
        Ok(Some(j))
    }

    fn distortion_rows(&self, joint: &JointPmf) -> Result<Vec<DistortionRow>> {
        let Some(j) = self.with_reconstructions(joint)? else {
            return Ok(Vec::new());
        };
        let mut rows = Vec::new();
        for (i, d) in self.distortion.iter().enumerate() {
            let u = &self.users[i].u;
            let achieved = j.expected_distortion(u, &self.reconstruction_name(i), &d.measure)?;
            rows.push(DistortionRow {
                source: u.clone(),
                achieved,
                target: d.target,
                satisfied: achieved <= d.target + BOUNDARY_TOL,
            });
        }
        Ok(rows)
    }
}

impl SystemSpec {
    pub fn to_multi(&self) -> MultiSpec {
        MultiSpec {
            source: self.source.clone(),
            users: vec![
                User {
                    u: self.u1.clone(),
                    z: self.z1.clone(),
                    enc: self.enc1.clone(),
                    chin: self.chin1.clone(),
                },
                User {
                    u: self.u2.clone(),
                    z: self.z2.clone(),
                    enc: self.enc2.clone(),
                    chin: self.chin2.clone(),
                },
            ],
            z: self.z.clone(),
            channel: self.channel.clone(),
            decoder: self.decoder.clone(),
            distortion: self.distortion.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.to_multi().validate()
    }

    pub fn joint(&self) -> Result<JointPmf> {
        self.to_multi().joint()
    }

    pub fn w1(&self) -> &str {
        &self.enc1.output().name
    }
    pub fn w2(&self) -> &str {
        &self.enc2.output().name
    }
    pub fn x1(&self) -> &str {
        &self.chin1.output().name
    }
    pub fn x2(&self) -> &str {
        &self.chin2.output().name
    }
    pub fn y(&self) -> &str {
        &self.channel.output().name
    }
}

/// The three two-user inequalities plus fidelity rows.
pub fn check_theorem1(spec: &SystemSpec) -> Result<RegionReport> {
    let multi = spec.to_multi();
    let j = multi.joint()?;
    let (w1, w2) = (spec.w1().to_string(), spec.w2().to_string());
    let (x1, x2, y) = (
        spec.x1().to_string(),
        spec.x2().to_string(),
        spec.y().to_string(),
    );
    let z = spec.z.clone();
    let mut uz1 = vec![spec.u1.clone()];
    uz1.extend(spec.z1.iter().cloned());
    let mut uz2 = vec![spec.u2.clone()];
    uz2.extend(spec.z2.iter().cloned());
    let cat = |a: &[String], b: &[String]| -> Vec<String> { a.iter().chain(b).cloned().collect() };

    let mut rows = Vec::with_capacity(3);
    let lhs_a = cat(&uz1, &[]);
    let lhs_c = cat(std::slice::from_ref(&w2), &z);
    let rhs_c = cat(&[x2.clone(), w2.clone()], &z);
    rows.push(RegionRow::new(
        format!(
            "{} < {}",
            mi_label(&lhs_a, std::slice::from_ref(&w1), &lhs_c),
            mi_label(std::slice::from_ref(&x1), std::slice::from_ref(&y), &rhs_c)
        ),
        cond_mi(&j, &lhs_a, std::slice::from_ref(&w1), &lhs_c)?,
        cond_mi(
            &j,
            std::slice::from_ref(&x1),
            std::slice::from_ref(&y),
            &rhs_c,
        )?,
    ));

    let lhs_c = cat(std::slice::from_ref(&w1), &z);
    let rhs_c = cat(&[x1.clone(), w1.clone()], &z);
    rows.push(RegionRow::new(
        format!(
            "{} < {}",
            mi_label(&uz2, std::slice::from_ref(&w2), &lhs_c),
            mi_label(std::slice::from_ref(&x2), std::slice::from_ref(&y), &rhs_c)
        ),
        cond_mi(&j, &uz2, std::slice::from_ref(&w2), &lhs_c)?,
        cond_mi(
            &j,
            std::slice::from_ref(&x2),
            std::slice::from_ref(&y),
            &rhs_c,
        )?,
    ));

    let all_uz = vec![spec.u1.clone(), spec.u2.clone()]
        .into_iter()
        .chain(spec.z1.iter().cloned())
        .chain(spec.z2.iter().cloned())
        .collect::<Vec<_>>();
    let ws = vec![w1, w2];
    let xs = vec![x1, x2];
    rows.push(RegionRow::new(
        format!(
            "{} < {}",
            mi_label(&dedup(&all_uz), &ws, &z),
            mi_label(&xs, std::slice::from_ref(&y), &z)
        ),
        cond_mi(&j, &all_uz, &ws, &z)?,
        cond_mi(&j, &xs, &[y], &z)?,
    ));
    let distortion = multi.distortion_rows(&j)?;
    Ok(RegionReport::new(rows, distortion))
}

/// Nonempty subsets of `0..m`, ordered by size and then lexicographically.
pub fn ordered_subsets(m: usize) -> Vec<Vec<usize>> {
    let mut subsets: Vec<Vec<usize>> = (1u32..(1u32 << m))
        .map(|mask| (0..m).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    subsets
}

/// One row per nonempty subset A of users:
/// I(U_A, Z_A; W_A | W_Ac, Z) < I(X_A; Y | X_Ac, W_Ac, Z).
pub fn check_multiuser(spec: &MultiSpec) -> Result<RegionReport> {
    let j = spec.joint()?;
    let ws = spec.w_names();
    let xs = spec.x_names();
    let y = vec![spec.y_name()];
    let m = spec.users.len();
    let mut rows = Vec::new();
    for a in ordered_subsets(m) {
        let inside = |i: usize| a.contains(&i);
        let mut uz_a = Vec::new();
        for &i in &a {
            uz_a.push(spec.users[i].u.clone());
        }
        for &i in &a {
            uz_a.extend(spec.users[i].z.iter().cloned());
        }
        let w_a: Vec<String> = a.iter().map(|&i| ws[i].clone()).collect();
        let x_a: Vec<String> = a.iter().map(|&i| xs[i].clone()).collect();
        let w_c: Vec<String> = (0..m)
            .filter(|&i| !inside(i))
            .map(|i| ws[i].clone())
            .collect();
        let x_c: Vec<String> = (0..m)
            .filter(|&i| !inside(i))
            .map(|i| xs[i].clone())
            .collect();
        let lhs_cond: Vec<String> = w_c.iter().chain(&spec.z).cloned().collect();
        let rhs_cond: Vec<String> = x_c.iter().chain(&w_c).chain(&spec.z).cloned().collect();
        rows.push(RegionRow::new(
            format!(
                "{} < {}",
                mi_label(&dedup(&uz_a), &w_a, &lhs_cond),
                mi_label(&x_a, &y, &rhs_cond)
            ),
            cond_mi(&j, &uz_a, &w_a, &lhs_cond)?,
            cond_mi(&j, &x_a, &y, &rhs_cond)?,
        ));
    }
    let distortion = spec.distortion_rows(&j)?;
    Ok(RegionReport::new(rows, distortion))
}

/// Minimum rates over a noiseless dummy channel with independent inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwBounds {
    pub r1_min: f64,
    pub r2_min: f64,
    pub rsum_min: f64,
}

/// Distributed source coding rate bounds for given encoders and side
/// information: I(U1,Z1;W1|W2,Z), I(U2,Z2;W2|W1,Z), I(U1,U2,Z1,Z2;W1,W2|Z).
pub fn sw_rate_bounds(
    source: &JointPmf,
    enc1: &DiscreteKernel,
    enc2: &DiscreteKernel,
    z1: &[&str],
    z2: &[&str],
    z: &[&str],
) -> Result<SwBounds> {
    let (z1, z2, z) = (owned(z1), owned(z2), owned(z));
    require_vars(source, &z1)?;
    require_vars(source, &z2)?;
    require_vars(source, &z)?;
    let u1 = default_u1();
    let u2 = default_u2();
    let mut uz1 = vec![u1.clone()];
    uz1.extend(z1.iter().cloned());
    let mut uz2 = vec![u2.clone()];
    uz2.extend(z2.iter().cloned());
    require_inputs_within(enc1, &uz1, "encoder 1")?;
    require_inputs_within(enc2, &uz2, "encoder 2")?;
    let j = source.attach_kernel(enc1)?.attach_kernel(enc2)?;
    let w1 = enc1.output().name.clone();
    let w2 = enc2.output().name.clone();
    let c1: Vec<String> = std::iter::once(w2.clone())
        .chain(z.iter().cloned())
        .collect();
    let c2: Vec<String> = std::iter::once(w1.clone())
        .chain(z.iter().cloned())
        .collect();
    let all: Vec<String> = uz1.iter().chain(&uz2).cloned().collect();
    Ok(SwBounds {
        r1_min: cond_mi(&j, &uz1, std::slice::from_ref(&w1), &c1)?,
        r2_min: cond_mi(&j, &uz2, std::slice::from_ref(&w2), &c2)?,
        rsum_min: cond_mi(&j, &all, &[w1, w2], &z)?,
    })
}
