//! Strategies, property checks and oracles shared by the integration suites.

#![allow(dead_code)]

use std::f64::consts::PI;

use macjsc::gaussian::{gmac_outer_bounds, GmacParams};
use macjsc::mixture::{induced_density, Component, MixtureSpec};
use macjsc::region::{check_multiuser, check_theorem1, SystemSpec};
use macjsc::{DiscreteKernel, JointPmf, Variable};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 200;
pub const TOL: f64 = 1e-10;

pub fn config() -> Config {
    Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    }
}

/// Normalized weights over `n` cells, with occasional exact zeros.
pub fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 5 => 0.0f64..1.0], n).prop_map(|mut w| {
        if w.iter().sum::<f64>() == 0.0 {
            w[0] = 1.0;
        }
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    })
}

fn vars(names: &[&str], sizes: &[usize]) -> Vec<Variable> {
    names
        .iter()
        .zip(sizes)
        .map(|(n, &s)| Variable::new(*n, s))
        .collect()
}

/// Joint pmf over the named variables with alphabet sizes in 2..=3.
pub fn joint(names: &'static [&'static str]) -> impl Strategy<Value = JointPmf> {
    prop::collection::vec(2usize..=3, names.len()).prop_flat_map(move |sizes| {
        let cells = sizes.iter().product();
        weights(cells).prop_map(move |p| JointPmf::new(vars(names, &sizes), p).unwrap())
    })
}

/// Random kernel p(output | inputs).
pub fn kernel(inputs: Vec<Variable>, output: Variable) -> impl Strategy<Value = DiscreteKernel> {
    let rows: usize = inputs.iter().map(|v| v.size).product();
    prop::collection::vec(weights(output.size), rows).prop_map(move |rs| {
        DiscreteKernel::new(inputs.clone(), output.clone(), rs.concat()).unwrap()
    })
}

/// Two-user system over a random source (U1, U2, Z) with random encoders,
/// channel-input maps and MAC, and Z known at the decoder.
pub fn system() -> impl Strategy<Value = SystemSpec> {
    (
        joint(&["U1", "U2", "Z"]),
        2usize..=3,
        2usize..=3,
        2usize..=3,
    )
        .prop_flat_map(|(source, w, x, y)| {
            let u1 = Variable::new("U1", source.size_of("U1").unwrap());
            let u2 = Variable::new("U2", source.size_of("U2").unwrap());
            (
                Just(source),
                kernel(vec![u1], Variable::new("W1", w)),
                kernel(vec![u2], Variable::new("W2", w)),
                kernel(vec![Variable::new("W1", w)], Variable::new("X1", x)),
                kernel(vec![Variable::new("W2", w)], Variable::new("X2", x)),
                kernel(
                    vec![Variable::new("X1", x), Variable::new("X2", x)],
                    Variable::new("Y", y),
                ),
            )
        })
        .prop_map(|(source, enc1, enc2, chin1, chin2, channel)| SystemSpec {
            source,
            u1: "U1".into(),
            u2: "U2".into(),
            z1: vec![],
            z2: vec![],
            z: vec!["Z".into()],
            enc1,
            enc2,
            chin1,
            chin2,
            channel,
            decoder: None,
            distortion: vec![],
        })
}

pub fn gmac_pair() -> impl Strategy<Value = (GmacParams, f64, f64)> {
    (
        0.1f64..10.0,
        0.1f64..10.0,
        0.1f64..5.0,
        -1.0f64..=1.0,
        -1.0f64..=1.0,
    )
        .prop_map(|(p1, p2, n, a, b)| {
            (GmacParams::new(p1, p2, n, 0.0).unwrap(), a.min(b), a.max(b))
        })
}

fn close(a: f64, b: f64, what: &str) -> Result<(), TestCaseError> {
    prop_assert!((a - b).abs() < TOL, "{what}: {a} vs {b}");
    Ok(())
}

/// H(A,B|C) = H(A|C) + H(B|A,C) and H(A,B) = H(A) + H(B|A).
pub fn chain_rule(j: &JointPmf) -> Result<(), TestCaseError> {
    let hab_c = j.entropy(&["A", "B"], &["C"]).unwrap();
    let split = j.entropy(&["A"], &["C"]).unwrap() + j.entropy(&["B"], &["A", "C"]).unwrap();
    close(hab_c, split, "H(A,B|C)")?;
    let habc = j.entropy(&["A", "B", "C"], &[]).unwrap();
    let split = j.entropy(&["A"], &[]).unwrap()
        + j.entropy(&["B"], &["A"]).unwrap()
        + j.entropy(&["C"], &["A", "B"]).unwrap();
    close(habc, split, "H(A,B,C)")
}

/// I(A;B|C) ≥ 0 and I(A;B|C) = I(B;A|C), conditioned and unconditioned.
pub fn mi_nonnegative_symmetric(j: &JointPmf) -> Result<(), TestCaseError> {
    for given in [&[][..], &["C"][..]] {
        let ab = j.mutual_info(&["A"], &["B"], given).unwrap();
        let ba = j.mutual_info(&["B"], &["A"], given).unwrap();
        prop_assert!(ab >= -TOL, "I(A;B|{given:?}) = {ab}");
        close(ab, ba, "symmetry")?;
    }
    let a_bc = j.mutual_info(&["A"], &["B", "C"], &[]).unwrap();
    prop_assert!(a_bc >= -TOL);
    Ok(())
}

/// For U → W → X: I(U;X) ≤ I(U;W) and I(U;X) ≤ I(W;X).
pub fn data_processing(
    src: &JointPmf,
    k1: &DiscreteKernel,
    k2: &DiscreteKernel,
) -> Result<(), TestCaseError> {
    let j = src.attach_kernel(k1).unwrap().attach_kernel(k2).unwrap();
    let ux = j.mutual_info(&["U"], &["X"], &[]).unwrap();
    let uw = j.mutual_info(&["U"], &["W"], &[]).unwrap();
    let wx = j.mutual_info(&["W"], &["X"], &[]).unwrap();
    prop_assert!(ux <= uw + TOL, "I(U;X) {ux} > I(U;W) {uw}");
    prop_assert!(ux <= wx + TOL, "I(U;X) {ux} > I(W;X) {wx}");
    Ok(())
}

/// Attaching a kernel leaves the marginal of the original variables intact
/// and reproduces the kernel as the conditional law of its output.
pub fn attach_preserves_marginal(j: &JointPmf, k: &DiscreteKernel) -> Result<(), TestCaseError> {
    let out = j.attach_kernel(k).unwrap();
    let names: Vec<&str> = j.names().collect();
    let back = out.marginal(&names).unwrap();
    prop_assert_eq!(back.variables(), j.variables());
    for (a, b) in back.probs().iter().zip(j.probs()) {
        close(*a, *b, "marginal")?;
    }
    let s = out.size_of("S").unwrap();
    let a = out.size_of("A").unwrap();
    let pa = j.marginal(&["A"]).unwrap();
    let pas = out.marginal(&["A", "S"]).unwrap();
    for x in 0..a {
        let px = pa.prob(&[x]);
        if px <= 1e-12 {
            continue;
        }
        for y in 0..s {
            close(pas.prob(&[x, y]) / px, k.row(&[x])[y], "conditional")?;
        }
    }
    Ok(())
}

/// The M-user inequalities at M = 2 coincide with the two-user rows.
pub fn theorems_agree(spec: &SystemSpec) -> Result<(), TestCaseError> {
    let a = check_theorem1(spec).unwrap();
    let b = check_multiuser(&spec.to_multi()).unwrap();
    prop_assert_eq!(a.rows.len(), b.rows.len());
    for (x, y) in a.rows.iter().zip(&b.rows) {
        close(x.lhs, y.lhs, "lhs")?;
        close(x.rhs, y.rhs, "rhs")?;
    }
    prop_assert_eq!(a.feasible, b.feasible);
    Ok(())
}

/// Isum grows with ρ on [−1, 1]; I1 and I2 shrink with ρ on [0, 1].
pub fn gmac_monotone(p: &GmacParams, lo: f64, hi: f64) -> Result<(), TestCaseError> {
    let a = gmac_outer_bounds(&p.with_rho(lo)).unwrap();
    let b = gmac_outer_bounds(&p.with_rho(hi)).unwrap();
    prop_assert!(a.isum <= b.isum + TOL, "isum {} > {}", a.isum, b.isum);
    let (lo, hi) = (lo.abs().min(hi.abs()), lo.abs().max(hi.abs()));
    let a = gmac_outer_bounds(&p.with_rho(lo)).unwrap();
    let b = gmac_outer_bounds(&p.with_rho(hi)).unwrap();
    prop_assert!(b.i1 <= a.i1 + TOL, "i1 {} < {}", a.i1, b.i1);
    prop_assert!(b.i2 <= a.i2 + TOL, "i2 {} < {}", a.i2, b.i2);
    Ok(())
}

pub type Suite = (&'static str, fn() -> Result<(), String>);

fn run<S: Strategy>(
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    TestRunner::new(config())
        .run(&strategy, check)
        .map_err(|e| e.to_string())
}

/// Every property suite, each over [`CASES`] generated cases.
pub fn suites() -> Vec<Suite> {
    vec![
        ("chain rule", || {
            run(joint(&["A", "B", "C"]), |j| chain_rule(&j))
        }),
        ("mutual information nonnegative and symmetric", || {
            run(joint(&["A", "B", "C"]), |j| mi_nonnegative_symmetric(&j))
        }),
        ("data processing", || {
            let s = (2usize..=3, 2usize..=3, 2usize..=3).prop_flat_map(|(u, w, x)| {
                (
                    weights(u).prop_map(move |p| JointPmf::single("U", p).unwrap()),
                    kernel(vec![Variable::new("U", u)], Variable::new("W", w)),
                    kernel(vec![Variable::new("W", w)], Variable::new("X", x)),
                )
            });
            run(s, |(j, k1, k2)| data_processing(&j, &k1, &k2))
        }),
        ("attach_kernel marginal preservation", || {
            let s = joint(&["A", "B"]).prop_flat_map(|j| {
                let a = Variable::new("A", j.size_of("A").unwrap());
                (Just(j), kernel(vec![a], Variable::new("S", 3)))
            });
            run(s, |(j, k)| attach_preserves_marginal(&j, &k))
        }),
        ("two-user and M-user inequalities agree at M=2", || {
            run(system(), |s| theorems_agree(&s))
        }),
        ("GMAC bounds monotone in rho", || {
            run(gmac_pair(), |(p, lo, hi)| gmac_monotone(&p, lo, hi))
        }),
    ]
}

/// ∫∫ h over [−l, l]² by composite Simpson with `m` panels per axis.
pub fn simpson_2d(h: impl Fn(f64, f64) -> f64, l: f64, m: usize) -> f64 {
    let step = 2.0 * l / m as f64;
    let w = |i: usize| match i {
        0 => 1.0,
        i if i == m => 1.0,
        i if i % 2 == 1 => 4.0,
        _ => 2.0,
    };
    let mut s = 0.0;
    for i in 0..=m {
        let x = -l + i as f64 * step;
        for j in 0..=m {
            let y = -l + j as f64 * step;
            s += w(i) * w(j) * h(x, y);
        }
    }
    s * step * step / 9.0
}

pub fn target_pdf(x: f64, y: f64, rho: f64) -> f64 {
    let d = 1.0 - rho * rho;
    (-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * d)).exp() / (2.0 * PI * d.sqrt())
}

/// ∫∫ (g − f_ρ)² by quadrature.
pub fn quadrature_objective(spec: &MixtureSpec, pmf: &JointPmf, rho: f64) -> f64 {
    simpson_2d(
        |x, y| {
            let g = induced_density(spec, pmf, x, y).unwrap();
            (g - target_pdf(x, y, rho)).powi(2)
        },
        9.0,
        600,
    )
}

/// Random two-component mixture for binary sources, rescaled so that it
/// meets the moment constraints under `pmf`.
pub fn random_feasible_spec(rng: &mut impl rand::Rng, pmf: &JointPmf) -> MixtureSpec {
    let mut symbol = || {
        let w = rng.random_range(0.1..0.9);
        vec![
            Component {
                weight: w,
                mean: rng.random_range(-0.8..0.8),
                var: rng.random_range(0.3..1.2),
            },
            Component {
                weight: 1.0 - w,
                mean: rng.random_range(-0.8..0.8),
                var: rng.random_range(0.3..1.2),
            },
        ]
    };
    let raw = MixtureSpec {
        sources: [vec![symbol(), symbol()], vec![symbol(), symbol()]],
    };
    raw.standardized(pmf).unwrap()
}
