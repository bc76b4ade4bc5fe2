//! Exact arithmetic over finite joint distributions.
//!
//! A [`JointPmf`] is a dense table over the product alphabet of a list of
//! named discrete variables, stored row-major in declaration order (the last
//! variable varies fastest). Kernels extend a joint by one variable; every
//! information quantity is computed from marginals of the full table, in bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a pmf and on every kernel row.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub size: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Variable {
            name: name.into(),
            size,
        }
    }
}

fn check_probs(probs: &[f64]) -> Result<()> {
    for (index, &value) in probs.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::NegativeProbability { index, value });
        }
    }
    Ok(())
}

fn check_variables(variables: &[Variable]) -> Result<()> {
    for (i, v) in variables.iter().enumerate() {
        if v.size == 0 {
            return Err(Error::EmptyAlphabet(v.name.clone()));
        }
        if variables[..i].iter().any(|w| w.name == v.name) {
            return Err(Error::DuplicateVariable(v.name.clone()));
        }
    }
    Ok(())
}

fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut s = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * sizes[i + 1];
    }
    s
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Finite joint probability mass function over named variables.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointPmf {
    variables: Vec<Variable>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct JointPmfRepr {
    variables: Vec<Variable>,
    probs: Vec<f64>,
}

impl<'de> Deserialize<'de> for JointPmf {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = JointPmfRepr::deserialize(d)?;
        JointPmf::new(raw.variables, raw.probs).map_err(serde::de::Error::custom)
    }
}

impl JointPmf {
    /// Validates and builds a joint pmf. The table is row-major in the order
    /// of `variables`.
    pub fn new(variables: Vec<Variable>, probs: Vec<f64>) -> Result<Self> {
        check_variables(&variables)?;
        let expected: usize = variables.iter().map(|v| v.size).product();
        if probs.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: probs.len(),
            });
        }
        check_probs(&probs)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(JointPmf { variables, probs })
    }

    /// Single variable with the given marginal.
    pub fn single(name: impl Into<String>, probs: Vec<f64>) -> Result<Self> {
        let v = Variable::new(name, probs.len());
        JointPmf::new(vec![v], probs)
    }

    pub fn uniform(name: impl Into<String>, size: usize) -> Result<Self> {
        JointPmf::single(name, vec![1.0 / size as f64; size])
    }

    /// Point mass on `symbol` of a variable with `size` symbols.
    pub fn point_mass(name: impl Into<String>, size: usize, symbol: usize) -> Result<Self> {
        let mut p = vec![0.0; size];
        if symbol >= size {
            return Err(Error::AlphabetMismatch(format!(
                "symbol {symbol} outside alphabet of size {size}"
            )));
        }
        p[symbol] = 1.0;
        JointPmf::single(name, p)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.variables.iter().any(|v| v.name == name)
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn size_of(&self, name: &str) -> Result<usize> {
        Ok(self.variables[self.index_of(name)?].size)
    }

    fn sizes(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.size).collect()
    }

    fn resolve(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut idx = Vec::with_capacity(names.len());
        for n in names {
            let i = self.index_of(n)?;
            if idx.contains(&i) {
                return Err(Error::DuplicateVariable(n.to_string()));
            }
            idx.push(i);
        }
        Ok(idx)
    }

    /// Marginal table over the variables at `idx` (row-major in that order).
    fn marginal_table(&self, idx: &[usize]) -> Vec<f64> {
        let sizes = self.sizes();
        let full = strides(&sizes);
        let out_sizes: Vec<usize> = idx.iter().map(|&i| sizes[i]).collect();
        let out_strides = strides(&out_sizes);
        let mut out = vec![0.0; out_sizes.iter().product()];
        for (cell, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut o = 0;
            for (k, &i) in idx.iter().enumerate() {
                o += ((cell / full[i]) % sizes[i]) * out_strides[k];
            }
            out[o] += p;
        }
        out
    }

    /// Same table with variables renamed positionally.
    pub fn with_names(&self, names: &[&str]) -> Result<JointPmf> {
        if names.len() != self.variables.len() {
            return Err(Error::ShapeMismatch {
                expected: self.variables.len(),
                got: names.len(),
            });
        }
        let variables: Vec<Variable> = self
            .variables
            .iter()
            .zip(names)
            .map(|(v, n)| Variable::new(*n, v.size))
            .collect();
        check_variables(&variables)?;
        Ok(JointPmf {
            variables,
            probs: self.probs.clone(),
        })
    }

    /// Marginal pmf over `names`, in the given order.
    pub fn marginal(&self, names: &[&str]) -> Result<JointPmf> {
        let idx = self.resolve(names)?;
        let variables = idx.iter().map(|&i| self.variables[i].clone()).collect();
        Ok(JointPmf {
            variables,
            probs: self.marginal_table(&idx),
        })
    }

    /// Probability of one full assignment, given in declaration order.
    pub fn prob(&self, assignment: &[usize]) -> f64 {
        let st = strides(&self.sizes());
        let cell: usize = assignment.iter().zip(&st).map(|(a, s)| a * s).sum();
        self.probs[cell]
    }

    /// Calls `f(assignment, p)` for every cell with positive probability.
    pub fn for_each_cell(&self, mut f: impl FnMut(&[usize], f64)) {
        let sizes = self.sizes();
        let mut a = vec![0usize; sizes.len()];
        for &p in &self.probs {
            if p > 0.0 {
                f(&a, p);
            }
            for k in (0..sizes.len()).rev() {
                a[k] += 1;
                if a[k] < sizes[k] {
                    break;
                }
                a[k] = 0;
            }
        }
    }

    /// Product of two pmfs over disjoint variable sets.
    pub fn product(&self, other: &JointPmf) -> Result<JointPmf> {
        for v in &other.variables {
            if self.contains(&v.name) {
                return Err(Error::NameCollision(v.name.clone()));
            }
        }
        let mut probs = Vec::with_capacity(self.probs.len() * other.probs.len());
        for &p in &self.probs {
            for &q in &other.probs {
                probs.push(p * q);
            }
        }
        let mut variables = self.variables.clone();
        variables.extend(other.variables.iter().cloned());
        Ok(JointPmf { variables, probs })
    }

    /// Extends the joint with the kernel's output variable:
    /// p(old, new) = p(old) · k(new | inputs).
    pub fn attach_kernel(&self, k: &DiscreteKernel) -> Result<JointPmf> {
        if self.contains(&k.output.name) {
            return Err(Error::NameCollision(k.output.name.clone()));
        }
        let mut idx = Vec::with_capacity(k.inputs.len());
        for v in &k.inputs {
            let i = self.index_of(&v.name)?;
            if self.variables[i].size != v.size {
                return Err(Error::AlphabetMismatch(format!(
                    "kernel expects `{}` with {} symbols, pmf has {}",
                    v.name, v.size, self.variables[i].size
                )));
            }
            idx.push(i);
        }
        let sizes = self.sizes();
        let full = strides(&sizes);
        let in_sizes: Vec<usize> = k.inputs.iter().map(|v| v.size).collect();
        let in_strides = strides(&in_sizes);
        let m = k.output.size;
        let mut probs = vec![0.0; self.probs.len() * m];
        for (cell, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut row = 0;
            for (j, &i) in idx.iter().enumerate() {
                row += ((cell / full[i]) % sizes[i]) * in_strides[j];
            }
            let r = &k.probs[row * m..(row + 1) * m];
            for (o, &q) in r.iter().enumerate() {
                probs[cell * m + o] = p * q;
            }
        }
        let mut variables = self.variables.clone();
        variables.push(k.output.clone());
        Ok(JointPmf { variables, probs })
    }

    fn joint_entropy_idx(&self, idx: &[usize]) -> f64 {
        if idx.is_empty() {
            return 0.0;
        }
        entropy_of(&self.marginal_table(idx))
    }

    fn disjoint(sets: &[&[&str]]) -> Result<()> {
        for (i, a) in sets.iter().enumerate() {
            for b in &sets[i + 1..] {
                if let Some(x) = a.iter().find(|x| b.contains(x)) {
                    return Err(Error::OverlappingSets(x.to_string()));
                }
            }
        }
        Ok(())
    }

    /// H(A | B) in bits.
    pub fn entropy(&self, a: &[&str], given: &[&str]) -> Result<f64> {
        Self::disjoint(&[a, given])?;
        let ai = self.resolve(a)?;
        let bi = self.resolve(given)?;
        let abi: Vec<usize> = ai.iter().chain(&bi).copied().collect();
        Ok(self.joint_entropy_idx(&abi) - self.joint_entropy_idx(&bi))
    }

    /// I(A; B | C) in bits.
    pub fn mutual_info(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        Self::disjoint(&[a, b, given])?;
        let ai = self.resolve(a)?;
        let bi = self.resolve(b)?;
        let ci = self.resolve(given)?;
        let cat = |x: &[usize], y: &[usize]| -> Vec<usize> { x.iter().chain(y).copied().collect() };
        let ac = cat(&ai, &ci);
        let bc = cat(&bi, &ci);
        let abc = cat(&ac, &bi);
        Ok(self.joint_entropy_idx(&ac) + self.joint_entropy_idx(&bc)
            - self.joint_entropy_idx(&abc)
            - self.joint_entropy_idx(&ci))
    }

    /// E[d(U, Û)] for the pair of variables `u`, `u_hat`.
    pub fn expected_distortion(&self, u: &str, u_hat: &str, d: &DistortionMeasure) -> Result<f64> {
        let m = self.marginal(&[u, u_hat])?;
        let (nu, nh) = (m.variables[0].size, m.variables[1].size);
        if nu != d.source_size() || nh != d.reproduction_size() {
            return Err(Error::AlphabetMismatch(format!(
                "pair ({u}, {u_hat}) has alphabets {nu}x{nh}, measure is {}x{}",
                d.source_size(),
                d.reproduction_size()
            )));
        }
        let mut total = 0.0;
        for x in 0..nu {
            for y in 0..nh {
                total += m.probs[x * nh + y] * d.table[x][y];
            }
        }
        Ok(total)
    }
}

/// Row-stochastic conditional table p(output | inputs).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteKernel {
    inputs: Vec<Variable>,
    output: Variable,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct KernelRepr {
    #[serde(default)]
    inputs: Vec<Variable>,
    output: Variable,
    probs: Vec<f64>,
}

impl<'de> Deserialize<'de> for DiscreteKernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = KernelRepr::deserialize(d)?;
        DiscreteKernel::new(raw.inputs, raw.output, raw.probs).map_err(serde::de::Error::custom)
    }
}

impl DiscreteKernel {
    /// `probs` holds one row of `output.size` entries per input assignment,
    /// rows ordered row-major over `inputs`.
    pub fn new(inputs: Vec<Variable>, output: Variable, probs: Vec<f64>) -> Result<Self> {
        let mut all = inputs.clone();
        all.push(output.clone());
        check_variables(&all)?;
        let rows: usize = inputs.iter().map(|v| v.size).product();
        let expected = rows * output.size;
        if probs.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: probs.len(),
            });
        }
        check_probs(&probs)?;
        for row in probs.chunks(output.size) {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::NotNormalized { sum });
            }
        }
        Ok(DiscreteKernel {
            inputs,
            output,
            probs,
        })
    }

    /// Kernel with no inputs: attaching it adds an independent variable.
    pub fn independent(output: Variable, probs: Vec<f64>) -> Result<Self> {
        DiscreteKernel::new(Vec::new(), output, probs)
    }

    /// Deterministic kernel `output = f(inputs)`.
    pub fn deterministic(
        inputs: Vec<Variable>,
        output: Variable,
        f: impl Fn(&[usize]) -> usize,
    ) -> Result<Self> {
        let sizes: Vec<usize> = inputs.iter().map(|v| v.size).collect();
        let rows: usize = sizes.iter().product();
        let mut probs = vec![0.0; rows * output.size];
        let mut a = vec![0usize; sizes.len()];
        for row in 0..rows {
            let y = f(&a);
            if y >= output.size {
                return Err(Error::AlphabetMismatch(format!(
                    "deterministic map sends {a:?} to {y}, outside `{}` of size {}",
                    output.name, output.size
                )));
            }
            probs[row * output.size + y] = 1.0;
            for k in (0..sizes.len()).rev() {
                a[k] += 1;
                if a[k] < sizes[k] {
                    break;
                }
                a[k] = 0;
            }
        }
        DiscreteKernel::new(inputs, output, probs)
    }

    pub fn identity(input: Variable, output_name: impl Into<String>) -> Result<Self> {
        let out = Variable::new(output_name, input.size);
        DiscreteKernel::deterministic(vec![input], out, |a| a[0])
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(
        input_name: impl Into<String>,
        output_name: impl Into<String>,
        p: f64,
    ) -> Result<Self> {
        DiscreteKernel::new(
            vec![Variable::new(input_name, 2)],
            Variable::new(output_name, 2),
            vec![1.0 - p, p, p, 1.0 - p],
        )
    }

    pub fn inputs(&self) -> &[Variable] {
        &self.inputs
    }

    pub fn output(&self) -> &Variable {
        &self.output
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Row for one input assignment.
    pub fn row(&self, input: &[usize]) -> &[f64] {
        let sizes: Vec<usize> = self.inputs.iter().map(|v| v.size).collect();
        let st = strides(&sizes);
        let r: usize = input.iter().zip(&st).map(|(a, s)| a * s).sum();
        &self.probs[r * self.output.size..(r + 1) * self.output.size]
    }

    /// True when every row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.probs
            .chunks(self.output.size)
            .all(|r| r.contains(&1.0))
    }

    /// Same table with the output variable renamed.
    pub fn with_output_name(mut self, name: impl Into<String>) -> Self {
        self.output.name = name.into();
        self
    }

    /// Same table with input variables renamed positionally.
    pub fn with_input_names(mut self, names: &[&str]) -> Result<Self> {
        if names.len() != self.inputs.len() {
            return Err(Error::ShapeMismatch {
                expected: self.inputs.len(),
                got: names.len(),
            });
        }
        for (v, n) in self.inputs.iter_mut().zip(names) {
            v.name = n.to_string();
        }
        Ok(self)
    }
}

/// Per-letter distortion table d(u, û).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionMeasure {
    table: Vec<Vec<f64>>,
    lossless: bool,
}

#[derive(Deserialize)]
struct DistortionRepr {
    table: Vec<Vec<f64>>,
    #[serde(default)]
    lossless: bool,
}

impl<'de> Deserialize<'de> for DistortionMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DistortionRepr::deserialize(d)?;
        DistortionMeasure::new(raw.table, raw.lossless).map_err(serde::de::Error::custom)
    }
}

impl DistortionMeasure {
    pub fn new(table: Vec<Vec<f64>>, lossless: bool) -> Result<Self> {
        let cols = table.first().map(|r| r.len()).unwrap_or(0);
        if table.is_empty() || cols == 0 || table.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistortion(
                "table must be a non-empty rectangle".into(),
            ));
        }
        for (u, row) in table.iter().enumerate() {
            for (v, &d) in row.iter().enumerate() {
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(Error::InvalidDistortion(format!("d({u},{v}) = {d}")));
                }
                if lossless && ((d == 0.0) != (u == v)) {
                    return Err(Error::InvalidDistortion(format!(
                        "lossless measure needs d(u,v)=0 exactly when u=v; d({u},{v}) = {d}"
                    )));
                }
            }
        }
        Ok(DistortionMeasure { table, lossless })
    }

    pub fn hamming(size: usize) -> Self {
        let table = (0..size)
            .map(|u| (0..size).map(|v| if u == v { 0.0 } else { 1.0 }).collect())
            .collect();
        DistortionMeasure {
            table,
            lossless: true,
        }
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn is_lossless(&self) -> bool {
        self.lossless
    }

    pub fn source_size(&self) -> usize {
        self.table.len()
    }

    pub fn reproduction_size(&self) -> usize {
        self.table[0].len()
    }

    pub fn get(&self, u: usize, u_hat: usize) -> f64 {
        self.table[u][u_hat]
    }

    pub fn max(&self) -> f64 {
        self.table.iter().flatten().fold(0.0, |a, &b| a.max(b))
    }
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_source() -> JointPmf {
        JointPmf::new(
            vec![Variable::new("U1", 2), Variable::new("U2", 2)],
            vec![1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0],
        )
        .unwrap()
    }

    #[test]
    fn make_joint_validates() {
        assert!(JointPmf::point_mass("X", 3, 2).is_ok());
        let bad = JointPmf::single("X", vec![0.5, 0.4]);
        assert!(matches!(bad, Err(Error::NotNormalized { .. })));
        let neg = JointPmf::single("X", vec![1.2, -0.2]);
        assert!(matches!(
            neg,
            Err(Error::NegativeProbability { index: 1, .. })
        ));
        let shape = JointPmf::new(vec![Variable::new("A", 2)], vec![1.0]);
        assert!(matches!(shape, Err(Error::ShapeMismatch { .. })));
        let dup = JointPmf::new(
            vec![Variable::new("A", 1), Variable::new("A", 1)],
            vec![1.0],
        );
        assert!(matches!(dup, Err(Error::DuplicateVariable(_))));
    }

    #[test]
    fn example_entropies() {
        let p = example_source();
        assert!((p.entropy(&["U1"], &[]).unwrap() - 1.0).abs() < 1e-12);
        assert!((p.entropy(&["U1"], &["U2"]).unwrap() - 0.918).abs() < 1e-3);
        assert!((p.entropy(&["U1", "U2"], &[]).unwrap() - 1.918).abs() < 1e-3);
        let mi = p.mutual_info(&["U1"], &["U2"], &[]).unwrap();
        assert!((mi - (2.0 - 1.918_295_834_054_489_6)).abs() < 1e-9);
    }

    #[test]
    fn attach_bsc_side_information() {
        let p = example_source()
            .attach_kernel(&DiscreteKernel::bsc("U2", "Z1", 0.3).unwrap())
            .unwrap();
        let m = p.marginal(&["U2", "Z1"]).unwrap();
        let flip = m.prob(&[0, 1]) + m.prob(&[1, 0]);
        assert!((flip - 0.3).abs() < 1e-12);
        assert!(matches!(
            p.attach_kernel(&DiscreteKernel::bsc("U2", "Z1", 0.1).unwrap()),
            Err(Error::NameCollision(_))
        ));
        assert!(matches!(
            p.attach_kernel(&DiscreteKernel::bsc("Q", "Z9", 0.1).unwrap()),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn attach_identity_and_adder() {
        let p = example_source()
            .attach_kernel(&DiscreteKernel::identity(Variable::new("U1", 2), "W1").unwrap())
            .unwrap();
        assert!(p.entropy(&["W1"], &["U1"]).unwrap().abs() < 1e-12);
        assert!(p.entropy(&["U1"], &["W1"]).unwrap().abs() < 1e-12);

        let xs = JointPmf::uniform("X1", 2)
            .unwrap()
            .product(&JointPmf::uniform("X2", 2).unwrap())
            .unwrap();
        let adder = DiscreteKernel::deterministic(
            vec![Variable::new("X1", 2), Variable::new("X2", 2)],
            Variable::new("Y", 3),
            |a| a[0] + a[1],
        )
        .unwrap();
        let y = xs.attach_kernel(&adder).unwrap().marginal(&["Y"]).unwrap();
        assert_eq!(y.probs(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn entropy_argument_errors() {
        let p = example_source();
        assert!(matches!(
            p.entropy(&["U1"], &["U1"]),
            Err(Error::OverlappingSets(_))
        ));
        assert!(matches!(
            p.entropy(&["V"], &[]),
            Err(Error::UnknownVariable(_))
        ));
        assert!(matches!(
            p.mutual_info(&["U1"], &["U2"], &["U2"]),
            Err(Error::OverlappingSets(_))
        ));
    }

    #[test]
    fn mutual_info_self_and_independent() {
        let p = example_source();
        let h = p.entropy(&["U1"], &[]).unwrap();
        let with_copy = p
            .attach_kernel(&DiscreteKernel::identity(Variable::new("U1", 2), "C").unwrap())
            .unwrap();
        assert!((with_copy.mutual_info(&["U1"], &["C"], &[]).unwrap() - h).abs() < 1e-12);
        let ind = JointPmf::single("A", vec![0.2, 0.8])
            .unwrap()
            .product(&JointPmf::single("B", vec![0.6, 0.3, 0.1]).unwrap())
            .unwrap();
        assert!(ind.mutual_info(&["A"], &["B"], &[]).unwrap().abs() < 1e-9);
    }

    #[test]
    fn distortion_values() {
        let u = JointPmf::uniform("U", 2).unwrap();
        let h = DistortionMeasure::hamming(2);
        let same = u
            .attach_kernel(&DiscreteKernel::identity(Variable::new("U", 2), "Uh").unwrap())
            .unwrap();
        assert_eq!(same.expected_distortion("U", "Uh", &h).unwrap(), 0.0);
        let ind = u.product(&JointPmf::uniform("Uh", 2).unwrap()).unwrap();
        assert!((ind.expected_distortion("U", "Uh", &h).unwrap() - 0.5).abs() < 1e-15);
        let bsc = u
            .attach_kernel(&DiscreteKernel::bsc("U", "Uh", 0.04).unwrap())
            .unwrap();
        assert!((bsc.expected_distortion("U", "Uh", &h).unwrap() - 0.04).abs() < 1e-15);
        let wrong = DistortionMeasure::hamming(3);
        assert!(matches!(
            bsc.expected_distortion("U", "Uh", &wrong),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn distortion_measure_validation() {
        assert!(DistortionMeasure::new(vec![vec![0.0, 1.0], vec![0.0, 0.0]], true).is_err());
        assert!(DistortionMeasure::new(vec![vec![0.0, -1.0]], false).is_err());
        assert!(DistortionMeasure::new(vec![vec![0.0, 1.0], vec![0.0, 0.0]], false).is_ok());
    }

    #[test]
    fn kernel_rows_must_normalize() {
        let k = DiscreteKernel::new(
            vec![Variable::new("A", 2)],
            Variable::new("B", 2),
            vec![0.5, 0.5, 0.7, 0.2],
        );
        assert!(matches!(k, Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let p = example_source();
        let s = serde_json::to_string(&p).unwrap();
        let q: JointPmf = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = r#"{"variables":[{"name":"A","size":2}],"probs":[0.5,0.4]}"#;
        assert!(serde_json::from_str::<JointPmf>(bad).is_err());
        let k = DiscreteKernel::bsc("A", "B", 0.2).unwrap();
        let ks = serde_json::to_string(&k).unwrap();
        assert_eq!(serde_json::from_str::<DiscreteKernel>(&ks).unwrap(), k);
    }

    #[test]
    fn uniform_entropy_is_log_size() {
        for n in 1..9 {
            let h = JointPmf::uniform("X", n)
                .unwrap()
                .entropy(&["X"], &[])
                .unwrap();
            assert!((h - (n as f64).log2()).abs() < 1e-12);
        }
    }
}
