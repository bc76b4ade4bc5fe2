use super::*;
use crate::gaussian::{gaussian_description_mi, gmac_outer_bounds};
use crate::mixture::Component;
use crate::region::gmac_example_pair;

fn cfg(n: usize) -> McConfig {
    McConfig {
        n,
        powers: [3.0, 4.0],
        ..Default::default()
    }
}

fn symbol_dependent_spec() -> MixtureSpec {
    let c = |weight, mean, var| Component { weight, mean, var };
    MixtureSpec {
        sources: [
            vec![
                vec![c(0.5, -0.6, 0.4), c(0.5, 0.1, 0.3)],
                vec![c(1.0, 0.9, 0.5)],
            ],
            vec![
                vec![c(1.0, -1.0, 0.6)],
                vec![c(0.7, 0.4, 0.5), c(0.3, 0.6, 0.2)],
            ],
        ],
    }
}

fn mixture(spec: MixtureSpec) -> InputModel {
    InputModel::Mixture {
        spec,
        source: gmac_example_pair(),
    }
}

#[test]
fn gaussian_inputs_match_closed_form() {
    let p = GmacParams::new(3.0, 4.0, 1.0, 0.3).unwrap();
    let (model, c) = gaussian_inputs(&p);
    let b = gmac_outer_bounds(&p).unwrap();
    let all = estimate_all(&model, &c).unwrap();
    assert!(
        all[0].1.agrees_with(b.i1, 3.0, 0.0),
        "{:?} vs {}",
        all[0].1,
        b.i1
    );
    assert!(
        all[1].1.agrees_with(b.i2, 3.0, 0.0),
        "{:?} vs {}",
        all[1].1,
        b.i2
    );
    assert!(
        all[2].1.agrees_with(b.isum, 3.0, 0.0),
        "{:?} vs {}",
        all[2].1,
        b.isum
    );
    assert!(all[0].1.agrees_with(0.949, 3.0, 0.001));
}

#[test]
fn standard_mixture_is_independent_gaussian() {
    let model = mixture(MixtureSpec::standard([2, 2], 1));
    let c = cfg(100_000);
    let isum = estimate_mi(&model, Target::Isum, &c).unwrap();
    assert!(isum.agrees_with(1.5, 3.0, 0.0), "{isum:?}");
    let i1 = estimate_mi(&model, Target::I1, &c).unwrap();
    let i1c = estimate_mi(&model, Target::I1c, &c).unwrap();
    assert!(i1.agrees_with(2f64.log2(), 3.0, 0.0));
    assert!(i1c.agrees_with(2f64.log2(), 3.0, 0.0));
    let id = lemma_on_identity(&model, &c).unwrap();
    assert!(id.rhs.value.abs() < 1e-12);
    assert!(id.gap.abs() <= 3.0 * id.stderr);
}

#[test]
fn constant_input_carries_nothing() {
    let zero = Component {
        weight: 1.0,
        mean: 0.0,
        var: 0.0,
    };
    let mut spec = MixtureSpec::standard([2, 2], 1);
    spec.sources[0] = vec![vec![zero]; 2];
    let model = mixture(spec);
    let c = cfg(20_000);
    for t in [Target::I1, Target::I1c] {
        let e = estimate_mi(&model, t, &c).unwrap();
        assert!(e.value.abs() <= 3.0 * e.stderr + 1e-12, "{t}: {e:?}");
    }
}

#[test]
fn conditioning_on_partner_source_lowers_bound() {
    let model = mixture(symbol_dependent_spec());
    let c = cfg(100_000);
    let all = estimate_all(&model, &c).unwrap();
    let (i1, i1c) = (all[0].1, all[3].1);
    let (i2, i2c) = (all[1].1, all[4].1);
    let se1 = (i1.stderr.powi(2) + i1c.stderr.powi(2)).sqrt();
    let se2 = (i2.stderr.powi(2) + i2c.stderr.powi(2)).sqrt();
    assert!(i1c.value <= i1.value + 3.0 * se1);
    assert!(i2c.value <= i2.value + 3.0 * se2);
    let id = lemma_on_identity(&model, &c).unwrap();
    assert!(id.rhs.value > 0.0);
    assert!(id.gap.abs() <= 3.0 * id.stderr, "{id:?}");
}

#[test]
fn identity_vanishes_without_dependence() {
    let pair = JointPmf::uniform("U1", 2)
        .unwrap()
        .product(&JointPmf::uniform("U2", 2).unwrap())
        .unwrap();
    let comps = [
        Component {
            weight: 0.5,
            mean: -0.5,
            var: 0.75,
        },
        Component {
            weight: 0.5,
            mean: 0.5,
            var: 0.75,
        },
    ];
    let model = InputModel::Mixture {
        spec: MixtureSpec::uniform([2, 2], &comps),
        source: pair,
    };
    let id = lemma_on_identity(&model, &cfg(50_000)).unwrap();
    assert!(id.lhs.value.abs() <= 3.0 * id.lhs.stderr + 1e-12, "{id:?}");
    assert!(id.rhs.value.abs() <= 3.0 * id.rhs.stderr + 1e-12);
}

#[test]
fn estimates_are_reproducible() {
    let model = mixture(symbol_dependent_spec());
    let c = McConfig {
        batch_size: 1_000,
        ..cfg(10_000)
    };
    let a = estimate_all(&model, &c).unwrap();
    let b = estimate_all(&model, &c).unwrap();
    assert_eq!(a, b);
    let other = estimate_mi(&model, Target::Isum, &McConfig { seed: 1, ..c }).unwrap();
    assert_ne!(other, a[2].1);
}

#[test]
fn stderr_scales_as_inverse_root_n() {
    let model = mixture(symbol_dependent_spec());
    let small = estimate_mi(
        &model,
        Target::Isum,
        &McConfig {
            batch_size: 1_000,
            ..cfg(20_000)
        },
    )
    .unwrap();
    let large = estimate_mi(
        &model,
        Target::Isum,
        &McConfig {
            batch_size: 10_000,
            ..cfg(200_000)
        },
    )
    .unwrap();
    let ratio = small.stderr / large.stderr;
    let ideal = 10f64.sqrt();
    assert!(ratio > ideal / 2.0 && ratio < ideal * 2.0, "ratio {ratio}");
}

#[test]
fn gaussian_descriptions_match_closed_form() {
    let g = GaussianSourceParams {
        sigma1_2: 1.0,
        sigma2_2: 1.0,
        rho_source: 0.5,
        r1: 0.5,
        r2: 0.5,
    };
    let exact = gaussian_description_mi(&g).unwrap();
    let est = gaussian_description_mc(
        &g,
        &McConfig {
            n: 200_000,
            ..Default::default()
        },
    )
    .unwrap();
    for (e, x) in est.iter().zip(exact) {
        assert!((e.value - x).abs() < 0.01, "{e:?} vs {x}");
        assert!(e.agrees_with(x, 4.0, 0.0));
    }
}

#[test]
fn bimodal_inputs_are_dominated() {
    let comps = [
        Component {
            weight: 0.5,
            mean: -0.95,
            var: 0.0975,
        },
        Component {
            weight: 0.5,
            mean: 0.95,
            var: 0.0975,
        },
    ];
    let spec = MixtureSpec::uniform([2, 2], &comps);
    let d = lemma2_dominance(&spec, &gmac_example_pair(), &cfg(100_000)).unwrap();
    assert!(d.rho.abs() < 1e-12);
    assert!((d.gaussian.value - 1.5).abs() < 1e-9);
    assert!(
        d.gaussian.value > d.mixture.value + 3.0 * d.mixture.stderr,
        "{d:?}"
    );
}

#[test]
fn convergence_sequence_flat_for_gaussian() {
    let model = InputModel::Gaussian { rho: 0.3 };
    let c = cfg(50_000);
    let conv = lemma5_convergence(&[model.clone(), model], 0.3, &c).unwrap();
    assert_eq!(conv.estimates.len(), 2);
    for e in &conv.estimates {
        assert!(
            e.agrees_with(conv.limit, 4.0, 0.0),
            "{e:?} vs {}",
            conv.limit
        );
    }
    let zero = lemma5_convergence(&[mixture(MixtureSpec::standard([2, 2], 1))], 0.0, &c).unwrap();
    assert!((zero.limit - 0.5 * 8f64.log2()).abs() < 1e-12);
    assert!(zero.estimates[0].agrees_with(zero.limit, 3.0, 0.0));
}

#[test]
fn target_names_roundtrip() {
    for t in Target::ALL {
        assert_eq!(t.to_string().parse::<Target>().unwrap(), t);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, format!("\"{t}\""));
    }
    assert!("I3".parse::<Target>().is_err());
}

#[test]
fn config_validation() {
    let model = InputModel::Gaussian { rho: 0.0 };
    assert!(estimate_mi(
        &model,
        Target::I1,
        &McConfig {
            n: 0,
            ..Default::default()
        }
    )
    .is_err());
    assert!(estimate_mi(
        &model,
        Target::I1,
        &McConfig {
            sigma_n2: 0.0,
            ..Default::default()
        }
    )
    .is_err());
    assert!(estimate_mi(&InputModel::Gaussian { rho: 2.0 }, Target::I1, &cfg(10)).is_err());
}
