use super::*;
use crate::mixture::MixtureSpec;
use crate::region::{binary_pair, gmac_example_pair, orthogonal_channel};

fn discrete(system: SystemSpec, n: usize, trials: usize) -> CodebookConfig {
    CodebookConfig {
        trials,
        ..CodebookConfig::new(ChannelModel::Discrete { system }, n)
    }
}

fn gaussian(link: GaussianLink, n: usize, trials: usize) -> CodebookConfig {
    CodebookConfig {
        trials,
        ..CodebookConfig::new(ChannelModel::Gaussian { link }, n)
    }
}

fn link(powers: [f64; 2], backoff: Option<f64>) -> GaussianLink {
    GaussianLink {
        source: gmac_example_pair(),
        mixture: MixtureSpec::standard([2, 2], 1),
        powers,
        sigma_n2: 1.0,
        backoff,
    }
}

/// Independent uniform bits, X = W, noiseless binary links.
fn noiseless_identity_system() -> SystemSpec {
    let l = |x: &str, y: &str| DiscreteKernel::identity(Variable::new(x, 2), y).unwrap();
    identity_system(
        binary_pair([0.25; 4]),
        &[],
        [
            identity_input("W1", "X1", 2).unwrap(),
            identity_input("W2", "X2", 2).unwrap(),
        ],
        orthogonal_channel(&l("X1", "Y1"), &l("X2", "Y2")).unwrap(),
    )
    .unwrap()
}

fn block(letters: &[[usize; 2]]) -> SourceBlock {
    SourceBlock {
        letters: letters.iter().map(|l| l.to_vec()).collect(),
    }
}

/// All 2^n binary words of length n, row-major.
fn all_words(n: usize) -> Vec<u32> {
    let mut w = Vec::new();
    for k in 0..1u32 << n {
        for t in (0..n).rev() {
            w.push((k >> t) & 1);
        }
    }
    w
}

#[test]
fn codebook_size_follows_rate() {
    let mut cfg = discrete(uncoded_adder_system().unwrap(), 4, 1);
    cfg.rates = Some([1.0, 1.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let books = generate_codebooks(&cfg, &mut rng).unwrap();
    assert_eq!(books.users[0].len(), 16);
    assert_eq!(books.users[1].len(), 16);
    assert_eq!(codebook_size(3, 0.5), 3.0);
    assert_eq!(codebook_size(4, 0.0), 1.0);
}

#[test]
fn default_rate_adds_offset_to_description_rate() {
    let sim = Simulator::new(&discrete(quaternary_adder_system().unwrap(), 4, 1)).unwrap();
    assert_eq!(sim.description_rates(), [1.0, 1.0]);
    assert!((sim.codebooks().users[0].rate() - 1.2).abs() < 1e-12);
    // ⌈2^4.8⌉
    assert_eq!(sim.codebooks().users[0].len(), 28);
}

#[test]
fn deterministic_inputs_are_symbolwise_images() {
    let cfg = discrete(uncoded_adder_system().unwrap(), 6, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let books = generate_codebooks(&cfg, &mut rng).unwrap();
    for b in &books.users {
        for a in 0..b.len() {
            assert_eq!(b.word(a), b.discrete_input(a).unwrap());
        }
    }
}

#[test]
fn codebooks_are_reproducible() {
    let cfg = discrete(quaternary_adder_system().unwrap(), 5, 1);
    let draw = |seed| generate_codebooks(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    assert_eq!(draw(9), draw(9));
    assert_ne!(draw(9), draw(10));
}

#[test]
fn oversized_codebook_is_rejected() {
    let mut cfg = discrete(uncoded_adder_system().unwrap(), 12, 1);
    cfg.rates = Some([3.0, 1.0]);
    let err = Simulator::new(&cfg).unwrap_err();
    assert_eq!(
        err,
        Error::BudgetExceeded {
            count: 1 << 36,
            budget: DEFAULT_BUDGET as u128
        }
    );
}

#[test]
fn invalid_configs_are_rejected() {
    let base = discrete(uncoded_adder_system().unwrap(), 4, 1);
    for bad in [
        CodebookConfig {
            n: 0,
            ..base.clone()
        },
        CodebookConfig {
            epsilon: 0.0,
            ..base.clone()
        },
        CodebookConfig {
            delta: -0.1,
            ..base.clone()
        },
        CodebookConfig {
            trials: 0,
            ..base.clone()
        },
        CodebookConfig {
            rates: Some([f64::NAN, 1.0]),
            ..base.clone()
        },
    ] {
        assert!(
            matches!(Simulator::new(&bad), Err(Error::InvalidParam(_))),
            "{bad:?}"
        );
    }
    let no_room = gaussian(link([0.1, 4.0], None), 4, 1);
    assert!(matches!(
        Simulator::new(&no_room),
        Err(Error::InvalidParam(_))
    ));
}

#[test]
fn identity_quantizer_finds_the_source_word() {
    let mut cfg = discrete(noiseless_identity_system(), 3, 1);
    cfg.epsilon = 0.5;
    let words = all_words(3);
    let books = Codebooks {
        users: [
            Codebook::new(
                3,
                1.0,
                words.clone(),
                ChannelInputs::Discrete(words.clone()),
            )
            .unwrap(),
            Codebook::new(3, 1.0, words.clone(), ChannelInputs::Discrete(words)).unwrap(),
        ],
    };
    let sim = Simulator::with_codebooks(&cfg, books).unwrap();
    let b = block(&[[1, 0], [0, 0], [1, 1]]);
    let a = sim.encode_block(0, &b).unwrap().unwrap();
    assert_eq!(sim.codebooks().users[0].word(a), &[1, 0, 1]);
    let c = sim.encode_block(1, &b).unwrap().unwrap();
    assert_eq!(sim.codebooks().users[1].word(c), &[0, 0, 1]);
}

#[test]
fn encoder_fails_without_a_matching_word() {
    let cfg = discrete(noiseless_identity_system(), 2, 1);
    let books = Codebooks {
        users: [
            Codebook::new(
                2,
                0.5,
                vec![0, 0, 0, 1],
                ChannelInputs::Discrete(vec![0, 0, 0, 1]),
            )
            .unwrap(),
            Codebook::new(
                2,
                0.5,
                vec![0, 0, 0, 1],
                ChannelInputs::Discrete(vec![0, 0, 0, 1]),
            )
            .unwrap(),
        ],
    };
    let sim = Simulator::with_codebooks(&cfg, books).unwrap();
    assert_eq!(
        sim.encode_block(0, &block(&[[1, 0], [1, 0]])).unwrap(),
        None
    );
    assert_eq!(
        sim.encode_block(1, &block(&[[1, 0], [1, 1]])).unwrap(),
        Some(1)
    );
    assert!(sim.encode_block(0, &block(&[[1, 0]])).is_err());
    assert!(sim.encode_block(0, &block(&[[2, 0], [0, 0]])).is_err());
}

#[test]
fn noiseless_channel_always_decodes_the_sent_pair() {
    let cfg = discrete(noiseless_identity_system(), 3, 1);
    let words = all_words(3);
    let book = Codebook::new(3, 1.0, words.clone(), ChannelInputs::Discrete(words)).unwrap();
    let sim = Simulator::with_codebooks(
        &cfg,
        Codebooks {
            users: [book.clone(), book],
        },
    )
    .unwrap();
    let src = block(&[[0, 0], [0, 0], [0, 0]]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for a in 0..8 {
        for b in 0..8 {
            let tx = sim.transmit([a, b], &mut rng);
            assert_eq!(tx.erased, [false, false]);
            assert_eq!(sim.decode_block(&tx.output, &src).unwrap(), Ok((a, b)));
        }
    }
}

#[test]
fn duplicate_codewords_decode_as_one_sequence() {
    let cfg = discrete(noiseless_identity_system(), 2, 1);
    let dup = Codebook::new(
        2,
        1.0,
        vec![0, 1, 0, 1],
        ChannelInputs::Discrete(vec![0, 1, 0, 1]),
    )
    .unwrap();
    assert_eq!(dup.distinct(), 1);
    let other = Codebook::new(
        2,
        1.0,
        vec![1, 1, 0, 0],
        ChannelInputs::Discrete(vec![1, 1, 0, 0]),
    )
    .unwrap();
    let sim = Simulator::with_codebooks(
        &cfg,
        Codebooks {
            users: [dup, other],
        },
    )
    .unwrap();
    let src = block(&[[0, 0], [0, 0]]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tx = sim.transmit([1, 1], &mut rng);
    assert_eq!(sim.decode_block(&tx.output, &src).unwrap(), Ok((0, 1)));
}

#[test]
fn shared_channel_sequence_makes_decoding_ambiguous() {
    // Channel inputs independent of the auxiliary: two different W words with
    // the same X word cannot be told apart.
    let l = |x: &str, y: &str| DiscreteKernel::identity(Variable::new(x, 2), y).unwrap();
    let system = identity_system(
        binary_pair([0.25; 4]),
        &[],
        [
            crate::region::independent_input(Variable::new("W1", 2), "X1", 2).unwrap(),
            crate::region::independent_input(Variable::new("W2", 2), "X2", 2).unwrap(),
        ],
        orthogonal_channel(&l("X1", "Y1"), &l("X2", "Y2")).unwrap(),
    )
    .unwrap();
    let cfg = discrete(system, 2, 1);
    let twin = Codebook::new(
        2,
        1.0,
        vec![0, 1, 1, 0],
        ChannelInputs::Discrete(vec![1, 1, 1, 1]),
    )
    .unwrap();
    let single = Codebook::new(2, 1.0, vec![0, 0], ChannelInputs::Discrete(vec![0, 1])).unwrap();
    let sim = Simulator::with_codebooks(
        &cfg,
        Codebooks {
            users: [twin, single],
        },
    )
    .unwrap();
    let src = block(&[[0, 0], [1, 0]]);
    let tx = sim.transmit([0, 0], &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(
        sim.decode_block(&tx.output, &src).unwrap(),
        Err(DecodeError::Ambiguous)
    );
}

#[test]
fn nothing_typical_is_reported() {
    let cfg = discrete(noiseless_identity_system(), 2, 1);
    let b = Codebook::new(2, 0.5, vec![0, 0], ChannelInputs::Discrete(vec![0, 0])).unwrap();
    let sim = Simulator::with_codebooks(
        &cfg,
        Codebooks {
            users: [b.clone(), b],
        },
    )
    .unwrap();
    // y = (1,1) at both letters: output index y1*2 + y2
    let y = Received::Discrete(vec![3, 3]);
    let src = block(&[[0, 0], [0, 0]]);
    assert_eq!(
        sim.decode_block(&y, &src).unwrap(),
        Err(DecodeError::NotFound)
    );
    assert!(sim
        .decode_block(&Received::Discrete(vec![3]), &src)
        .is_err());
    assert!(sim
        .decode_block(&Received::Real(vec![0.0, 0.0]), &src)
        .is_err());
}

#[test]
fn foreign_codebooks_are_rejected() {
    let cfg = discrete(noiseless_identity_system(), 2, 1);
    let wide = Codebook::new(2, 1.0, vec![0, 2], ChannelInputs::Discrete(vec![0, 1])).unwrap();
    let ok = Codebook::new(2, 1.0, vec![0, 1], ChannelInputs::Discrete(vec![0, 1])).unwrap();
    assert!(Simulator::with_codebooks(
        &cfg,
        Codebooks {
            users: [wide, ok.clone()]
        }
    )
    .is_err());
    let real = Codebook::new(2, 1.0, vec![0, 1], ChannelInputs::Real(vec![0.0, 1.0])).unwrap();
    assert!(Simulator::with_codebooks(
        &cfg,
        Codebooks {
            users: [real, ok.clone()]
        }
    )
    .is_err());
    let long = Codebook::new(1, 1.0, vec![0, 1], ChannelInputs::Discrete(vec![0, 1])).unwrap();
    assert!(Simulator::with_codebooks(&cfg, Codebooks { users: [long, ok] }).is_err());
    assert!(Codebook::new(
        2,
        1.0,
        vec![0, 1, 0],
        ChannelInputs::Discrete(vec![0, 1, 0])
    )
    .is_err());
}

#[test]
fn constant_source_never_fails() {
    for n in [4, 8] {
        let r = run_experiment(&discrete(constant_system().unwrap(), n, 200)).unwrap();
        assert_eq!(r.failures, 0);
        assert_eq!(r.block_error_rate, 0.0);
        assert_eq!(r.distortion, vec![0.0, 0.0]);
        assert_eq!(r.distortion_dmax, vec![0.0, 0.0]);
    }
}

#[test]
fn experiments_are_deterministic_and_attribution_is_exhaustive() {
    let cfg = discrete(quaternary_adder_system().unwrap(), 6, 300);
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.counts.total(), a.failures);
    assert!(a.failures > 0 && a.failures < a.trials);
    let c = run_experiment(&CodebookConfig { seed: 1, ..cfg }).unwrap();
    assert_ne!(a.counts, c.counts);
}

#[test]
fn lossless_distortion_comes_only_from_failed_blocks() {
    let r = run_experiment(&discrete(quaternary_adder_system().unwrap(), 8, 400)).unwrap();
    for i in 0..2 {
        // Hamming distortion is at most one per failed block and zero otherwise.
        assert!(r.distortion[i] <= r.block_error_rate + 1e-12);
        assert!(r.distortion[i] > 0.0);
        assert!((r.distortion_dmax[i] - r.block_error_rate).abs() < 1e-12);
        assert!(r.distortion_half_width[i] > 0.0);
    }
    let p = r.block_error_rate;
    assert!((r.block_error_half_width - 1.96 * (p * (1.0 - p) / 400.0).sqrt()).abs() < 1e-12);
}

#[test]
fn undersized_codebooks_keep_failing_to_encode() {
    for n in [4, 8, 12] {
        let mut cfg = discrete(quaternary_adder_system().unwrap(), n, 300);
        cfg.rates = Some([0.6, 0.6]);
        let r = run_experiment(&cfg).unwrap();
        assert!(r.event_rates.e1 > 0.5, "n={n}: {:?}", r.event_rates);
    }
}

#[test]
fn uncoded_adder_fails_at_moderate_length() {
    let r = run_experiment(&discrete(uncoded_adder_system().unwrap(), 8, 300)).unwrap();
    assert!(r.block_error_rate > 0.9, "{}", r.block_error_rate);
}

#[test]
fn mixture_entropy_matches_closed_forms() {
    let g = |mean, var| Component {
        weight: 1.0,
        mean,
        var,
    };
    for var in [1e-4, 0.5, 3.0] {
        let h = mixture_entropy_bits(&[g(0.7, var)]).unwrap();
        assert!(
            (h - 0.5 * (2.0 * PI * E * var).log2()).abs() < 1e-9,
            "{var}: {h}"
        );
    }
    // Two far-apart halves add one bit.
    let half = |mean| Component {
        weight: 0.5,
        mean,
        var: 0.2,
    };
    let h = mixture_entropy_bits(&[half(-40.0), half(40.0)]).unwrap();
    assert!((h - 1.0 - 0.5 * (2.0 * PI * E * 0.2).log2()).abs() < 1e-9);
    // Identical components are one Gaussian.
    let h = mixture_entropy_bits(&[half(1.0), half(1.0)]).unwrap();
    assert!((h - 0.5 * (2.0 * PI * E * 0.2).log2()).abs() < 1e-9);
    assert_eq!(
        mixture_entropy_bits(&[g(0.0, 0.0)]),
        Err(Error::ZeroVarianceComponent)
    );
}

#[test]
fn gaussian_log_likelihoods_average_to_the_entropies() {
    let n = 8;
    let sim = Simulator::new(&gaussian(link([3.0, 4.0], None), n, 1)).unwrap();
    let Model::Gaussian(g) = &sim.compiled.model else {
        unreachable!()
    };
    let [b0, b1] = &sim.books.users;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut full, mut side, mut k) = (0.0, [0.0; 2], 0.0);
    for _ in 0..3000 {
        let block = sim.sample_block(&mut rng);
        let (Some(a), Some(b)) = (sim.encode(0, &block), sim.encode(1, &block)) else {
            continue;
        };
        let Received::Real(y) = sim.transmit([a, b], &mut rng).output else {
            unreachable!()
        };
        let (w1, w2) = (b0.word(a), b1.word(b));
        let (x1, x2) = (b0.real_input(a).unwrap(), b1.real_input(b).unwrap());
        for t in 0..n {
            let (u, v) = (w1[t] as usize, w2[t] as usize);
            let (p, q) = (sim.x_nll[0][a * n + t], sim.x_nll[1][b * n + t]);
            full += g.joint_nll[u * 2 + v] + p + q + g.noise_nll(y[t] - x1[t] - x2[t]);
            side[0] += g.marg_nll[0][u] + p - ln_mixture(&g.cond[0][u], y[t] - x1[t]) / LN_2;
            side[1] += g.marg_nll[1][v] + q - ln_mixture(&g.cond[1][v], y[t] - x2[t]) / LN_2;
            k += 1.0;
        }
    }
    assert!(k > 1000.0);
    assert!(
        (full / k - g.full_h).abs() < 0.1,
        "{} vs {}",
        full / k,
        g.full_h
    );
    for i in 0..2 {
        assert!(
            (side[i] / k - g.side_h[i]).abs() < 0.1,
            "{} vs {}",
            side[i] / k,
            g.side_h[i]
        );
    }
}

#[test]
fn gaussian_link_decodes_at_high_snr() {
    let mut cfg = gaussian(link([100.0, 100.0], Some(60.0)), 6, 300);
    cfg.epsilon = 1.0;
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.counts.total(), r.failures);
    assert!(r.block_error_rate < 0.7, "{r:?}");
    assert!(r.distortion.iter().all(|&d| d < 0.3));
}

#[test]
fn power_violations_are_erased() {
    // Drawing at the full constraint puts about half the codewords over it.
    let r = run_experiment(&gaussian(link([3.0, 4.0], Some(1e-9)), 4, 300)).unwrap();
    assert!(r.counts.erasure > 30, "{:?}", r.counts);
    // A large backoff leaves no room for violations.
    let r = run_experiment(&gaussian(link([30.0, 30.0], Some(29.0)), 4, 300)).unwrap();
    assert_eq!(r.counts.erasure, 0);
}

#[test]
fn config_round_trips_through_json() {
    for cfg in [
        discrete(quaternary_adder_system().unwrap(), 4, 10),
        gaussian(link([3.0, 4.0], Some(0.2)), 4, 10),
    ] {
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<CodebookConfig>(&s).unwrap(), cfg);
    }
    let minimal = r#"{"n": 4, "model": {"kind": "gaussian", "link": {
        "source": {"variables": [{"name": "U1", "size": 2}, {"name": "U2", "size": 2}],
                   "probs": [0.25, 0.25, 0.25, 0.25]},
        "mixture": {"sources": [[[{"weight": 1, "mean": 0, "var": 1}], [{"weight": 1, "mean": 0, "var": 1}]],
                                [[{"weight": 1, "mean": 0, "var": 1}], [{"weight": 1, "mean": 0, "var": 1}]]]},
        "powers": [3, 4]}}}"#;
    let cfg: CodebookConfig = serde_json::from_str(minimal).unwrap();
    assert_eq!(
        (cfg.epsilon, cfg.delta, cfg.trials, cfg.seed),
        (0.15, 0.2, 2000, 0)
    );
    let r = run_experiment(&CodebookConfig { trials: 5, ..cfg }).unwrap();
    let s = serde_json::to_string(&r).unwrap();
    assert_eq!(serde_json::from_str::<SimResult>(&s).unwrap(), r);
}

#[test]
fn sweep_runs_each_length() {
    let cfg = discrete(orthogonal_uniform_system().unwrap(), 4, 50);
    let rs = run_sweep(&cfg, &[2, 3, 4]).unwrap();
    assert_eq!(rs.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 3, 4]);
}
