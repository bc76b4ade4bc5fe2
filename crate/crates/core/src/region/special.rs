//! Builders that embed classical configurations into a [`SystemSpec`], and
//! the orthogonal-link check whose conditions are also necessary.

use serde::{Deserialize, Serialize};

use super::reference::{independent_input, passthrough_decoder};
use super::{
    check_theorem1, Decoder, DistortionTarget, Reconstruction, RegionReport, RegionRow, SystemSpec,
};
use crate::error::{Error, Result};
use crate::probability::{DiscreteKernel, DistortionMeasure, JointPmf, Variable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    /// Lossless, no side information, W = U.
    Cover80,
    /// Lossy, no side information.
    Lossy,
    /// U1 = (U1', U0'), U2 = (U2', U0') with independent parts, W = U.
    CommonInfo,
    /// Lossless, side information at the decoder only, W = U.
    ReceiverSide,
    /// Single source X with encoder side information Y and decoder side
    /// information (Z, Y).
    MixedSi,
    /// Two decoders, each observing its own channel output and side
    /// information, both reconstructing both sources.
    Compound,
}

impl std::str::FromStr for CaseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidParam(format!("unknown special case `{s}`")))
    }
}

/// Inputs for [`build_special_case`]; which fields are required depends on
/// the case.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseParams {
    #[serde(default)]
    pub source: Option<JointPmf>,
    #[serde(default)]
    pub enc1: Option<DiscreteKernel>,
    #[serde(default)]
    pub enc2: Option<DiscreteKernel>,
    #[serde(default)]
    pub chin1: Option<DiscreteKernel>,
    #[serde(default)]
    pub chin2: Option<DiscreteKernel>,
    #[serde(default)]
    pub channel: Option<DiscreteKernel>,
    /// Second channel output for the compound case.
    #[serde(default)]
    pub second_channel: Option<DiscreteKernel>,
    #[serde(default)]
    pub z: Option<Vec<String>>,
    #[serde(default)]
    pub second_z: Option<Vec<String>>,
    #[serde(default)]
    pub private1: Option<JointPmf>,
    #[serde(default)]
    pub private2: Option<JointPmf>,
    #[serde(default)]
    pub common: Option<JointPmf>,
    #[serde(default)]
    pub decoder: Option<Decoder>,
    #[serde(default)]
    pub distortion: Option<Vec<DistortionTarget>>,
    /// Alphabet of the noiseless link used as the dummy channel in the
    /// mixed side information case; the link carries log2 of it in bits.
    #[serde(default)]
    pub rate_alphabet: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BuiltCase {
    Single(SystemSpec),
    Compound(Box<[SystemSpec; 2]>),
}

impl BuiltCase {
    pub fn specs(&self) -> Vec<&SystemSpec> {
        match self {
            BuiltCase::Single(s) => vec![s],
            BuiltCase::Compound(p) => vec![&p[0], &p[1]],
        }
    }

    /// One report per decoder; the configuration is feasible only when every
    /// decoder's report is.
    pub fn check(&self) -> Result<Vec<RegionReport>> {
        self.specs().into_iter().map(check_theorem1).collect()
    }
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::MissingParam(name.to_string()))
}

fn rename_input(k: DiscreteKernel, name: &str) -> Result<DiscreteKernel> {
    if k.inputs().len() != 1 {
        return Err(Error::InvalidSystem(format!(
            "channel input map must read exactly one auxiliary, reads {}",
            k.inputs().len()
        )));
    }
    k.with_input_names(&[name])
}

fn channel_named(k: DiscreteKernel) -> Result<DiscreteKernel> {
    let n = k.inputs().len();
    if n != 2 {
        return Err(Error::InvalidSystem(format!(
            "MAC must read (X1, X2), reads {n} inputs"
        )));
    }
    Ok(k.with_input_names(&["X1", "X2"])?.with_output_name("Y"))
}

/// W = U identity encoders, lossless targets and the pass-through decoder.
fn lossless_system(
    source: JointPmf,
    z: Vec<String>,
    chin1: DiscreteKernel,
    chin2: DiscreteKernel,
    channel: DiscreteKernel,
) -> Result<SystemSpec> {
    let n1 = source.size_of("U1")?;
    let n2 = source.size_of("U2")?;
    let mut z_rows = 1;
    for name in &z {
        z_rows *= source.size_of(name)?;
    }
    Ok(SystemSpec {
        source,
        u1: "U1".into(),
        u2: "U2".into(),
        z1: Vec::new(),
        z2: Vec::new(),
        z,
        enc1: DiscreteKernel::identity(Variable::new("U1", n1), "W1")?,
        enc2: DiscreteKernel::identity(Variable::new("U2", n2), "W2")?,
        chin1: rename_input(chin1, "W1")?.with_output_name("X1"),
        chin2: rename_input(chin2, "W2")?.with_output_name("X2"),
        channel: channel_named(channel)?,
        decoder: Some(passthrough_decoder([n1, n2], z_rows)),
        distortion: vec![
            DistortionTarget::lossless(n1),
            DistortionTarget::lossless(n2),
        ],
    })
}

/// Builds the system (or pair of systems) realizing a classical special case.
pub fn build_special_case(case: CaseKind, params: &CaseParams) -> Result<BuiltCase> {
    match case {
        CaseKind::Cover80 => {
            let source = need(&params.source, "source")?.marginal(&["U1", "U2"])?;
            Ok(BuiltCase::Single(lossless_system(
                source,
                Vec::new(),
                need(&params.chin1, "chin1")?,
                need(&params.chin2, "chin2")?,
                need(&params.channel, "channel")?,
            )?))
        }
        CaseKind::Lossy => {
            let source = need(&params.source, "source")?.marginal(&["U1", "U2"])?;
            let enc1 = need(&params.enc1, "enc1")?.with_output_name("W1");
            let enc2 = need(&params.enc2, "enc2")?.with_output_name("W2");
            Ok(BuiltCase::Single(SystemSpec {
                source,
                u1: "U1".into(),
                u2: "U2".into(),
                z1: Vec::new(),
                z2: Vec::new(),
                z: Vec::new(),
                enc1,
                enc2,
                chin1: rename_input(need(&params.chin1, "chin1")?, "W1")?.with_output_name("X1"),
                chin2: rename_input(need(&params.chin2, "chin2")?, "W2")?.with_output_name("X2"),
                channel: channel_named(need(&params.channel, "channel")?)?,
                decoder: params.decoder.clone(),
                distortion: params.distortion.clone().unwrap_or_default(),
            }))
        }
        CaseKind::CommonInfo => {
            let p1 = need(&params.private1, "private1")?;
            let p2 = need(&params.private2, "private2")?;
            let p0 = need(&params.common, "common")?;
            for (p, n) in [(&p1, "private1"), (&p2, "private2"), (&p0, "common")] {
                if p.variables().len() != 1 {
                    return Err(Error::InvalidParam(format!(
                        "{n} must be a single-variable pmf"
                    )));
                }
            }
            let (a, b, c) = (
                p1.variables()[0].size,
                p2.variables()[0].size,
                p0.variables()[0].size,
            );
            let parts = p1
                .with_names(&["U1p"])?
                .product(&p2.with_names(&["U2p"])?)?
                .product(&p0.with_names(&["U0"])?)?;
            let join1 = DiscreteKernel::deterministic(
                vec![Variable::new("U1p", a), Variable::new("U0", c)],
                Variable::new("U1", a * c),
                |x| x[0] * c + x[1],
            )?;
            let join2 = DiscreteKernel::deterministic(
                vec![Variable::new("U2p", b), Variable::new("U0", c)],
                Variable::new("U2", b * c),
                |x| x[0] * c + x[1],
            )?;
            let source = parts
                .attach_kernel(&join1)?
                .attach_kernel(&join2)?
                .marginal(&["U1", "U2"])?;
            Ok(BuiltCase::Single(lossless_system(
                source,
                Vec::new(),
                need(&params.chin1, "chin1")?,
                need(&params.chin2, "chin2")?,
                need(&params.channel, "channel")?,
            )?))
        }
        CaseKind::ReceiverSide => {
            let source = need(&params.source, "source")?;
            let z = need(&params.z, "z")?;
            let mut keep: Vec<&str> = vec!["U1", "U2"];
            keep.extend(z.iter().map(String::as_str));
            let source = source.marginal(&keep)?;
            Ok(BuiltCase::Single(lossless_system(
                source,
                z,
                need(&params.chin1, "chin1")?,
                need(&params.chin2, "chin2")?,
                need(&params.channel, "channel")?,
            )?))
        }
        CaseKind::MixedSi => build_mixed_si(params),
        CaseKind::Compound => {
            let source = need(&params.source, "source")?;
            let z_a = need(&params.z, "z")?;
            let z_b = need(&params.second_z, "second_z")?;
            let chin1 = need(&params.chin1, "chin1")?;
            let chin2 = need(&params.chin2, "chin2")?;
            let first = lossless_system(
                source.clone(),
                z_a,
                chin1.clone(),
                chin2.clone(),
                need(&params.channel, "channel")?,
            )?;
            let second = lossless_system(
                source,
                z_b,
                chin1,
                chin2,
                need(&params.second_channel, "second_channel")?,
            )?;
            Ok(BuiltCase::Compound(Box::new([first, second])))
        }
    }
}

/// Source (X, Y, Z) becomes U1 = X, Z1 = Y, decoder side information (Z, Y);
/// user 2 is a constant with its own idle 1-bit link. The dummy channel for
/// user 1 is a noiseless link of `rate_alphabet` symbols driven independently
/// of W, so its right-hand side is the link rate.
fn build_mixed_si(params: &CaseParams) -> Result<BuiltCase> {
    let source = need(&params.source, "source")?;
    if source.variables().len() != 3 {
        return Err(Error::InvalidParam(
            "mixed side information source must be a pmf over (X, Y, Z)".into(),
        ));
    }
    let source = source
        .with_names(&["U1", "Z1", "Zd"])?
        .product(&JointPmf::point_mass("U2", 1, 0)?)?;
    let test_channel = need(&params.enc1, "enc1")?;
    if test_channel.inputs().len() != 2 {
        return Err(Error::InvalidParam(
            "mixed side information test channel must read (X, Y)".into(),
        ));
    }
    let enc1 = test_channel
        .with_input_names(&["U1", "Z1"])?
        .with_output_name("W1");
    let w1 = enc1.output().clone();
    let k = params.rate_alphabet.unwrap_or(2);
    if k == 0 {
        return Err(Error::InvalidParam("rate_alphabet must be positive".into()));
    }
    let channel = DiscreteKernel::deterministic(
        vec![Variable::new("X1", k), Variable::new("X2", 2)],
        Variable::new("Y", 2 * k),
        |a| a[0] * 2 + a[1],
    )?;
    let decoder = match &params.decoder {
        None => None,
        Some(d) => {
            let first = d.reconstructions.first().cloned().ok_or_else(|| {
                Error::InvalidParam("decoder needs a reconstruction for X".into())
            })?;
            let rows = first.table.len();
            Some(Decoder {
                reconstructions: vec![
                    first,
                    Reconstruction {
                        size: 1,
                        table: vec![0; rows],
                    },
                ],
            })
        }
    };
    let mut distortion = params.distortion.clone().unwrap_or_default();
    if distortion.len() == 1 {
        distortion.push(DistortionTarget {
            measure: DistortionMeasure::new(vec![vec![0.0]], true)?,
            target: 0.0,
        });
    }
    Ok(BuiltCase::Single(SystemSpec {
        source,
        u1: "U1".into(),
        u2: "U2".into(),
        z1: vec!["Z1".into()],
        z2: Vec::new(),
        z: vec!["Zd".into(), "Z1".into()],
        enc1,
        enc2: DiscreteKernel::identity(Variable::new("U2", 1), "W2")?,
        chin1: independent_input(w1, "X1", k)?,
        chin2: independent_input(Variable::new("W2", 1), "X2", 2)?,
        channel,
        decoder,
        distortion,
    }))
}

/// Product channel Y = (Y1, Y2) from two links X1 -> Y1 and X2 -> Y2; the
/// output index is y1 * |Y2| + y2.
pub fn orthogonal_channel(
    link1: &DiscreteKernel,
    link2: &DiscreteKernel,
) -> Result<DiscreteKernel> {
    if link1.inputs().len() != 1 || link2.inputs().len() != 1 {
        return Err(Error::InvalidParam(
            "each link reads exactly one input".into(),
        ));
    }
    let (n1, n2) = (link1.inputs()[0].size, link2.inputs()[0].size);
    let (m1, m2) = (link1.output().size, link2.output().size);
    let mut probs = Vec::with_capacity(n1 * n2 * m1 * m2);
    for x1 in 0..n1 {
        for x2 in 0..n2 {
            let r1 = link1.row(&[x1]);
            let r2 = link2.row(&[x2]);
            for &a in r1 {
                for &b in r2 {
                    probs.push(a * b);
                }
            }
        }
    }
    DiscreteKernel::new(
        vec![Variable::new("X1", n1), Variable::new("X2", n2)],
        Variable::new("Y", m1 * m2),
        probs,
    )
}

/// Splits a two-input channel with output (Y1, Y2) into its links, failing
/// when it does not factorize as p(y1|x1) p(y2|x2).
pub fn split_orthogonal(
    channel: &DiscreteKernel,
    x1: &str,
    x2: &str,
    y_sizes: (usize, usize),
) -> Result<(DiscreteKernel, DiscreteKernel)> {
    let inputs = channel.inputs();
    if inputs.len() != 2 {
        return Err(Error::InvalidSystem(
            "orthogonal check needs a channel reading (X1, X2)".into(),
        ));
    }
    let i1 = inputs
        .iter()
        .position(|v| v.name == x1)
        .ok_or_else(|| Error::UnknownVariable(x1.into()))?;
    let i2 = inputs
        .iter()
        .position(|v| v.name == x2)
        .ok_or_else(|| Error::UnknownVariable(x2.into()))?;
    let (m1, m2) = y_sizes;
    if m1 * m2 != channel.output().size {
        return Err(Error::AlphabetMismatch(format!(
            "output has {} symbols, links declare {m1}x{m2}",
            channel.output().size
        )));
    }
    let (n1, n2) = (inputs[i1].size, inputs[i2].size);
    let row = |a: usize, b: usize| {
        let mut idx = [0usize; 2];
        idx[i1] = a;
        idx[i2] = b;
        channel.row(&idx).to_vec()
    };
    let mut l1 = vec![0.0; n1 * m1];
    let mut l2 = vec![0.0; n2 * m2];
    let mut deviation: f64 = 0.0;
    for a in 0..n1 {
        let r = row(a, 0);
        for y1 in 0..m1 {
            l1[a * m1 + y1] = (0..m2).map(|y2| r[y1 * m2 + y2]).sum();
        }
    }
    for b in 0..n2 {
        let r = row(0, b);
        for y2 in 0..m2 {
            l2[b * m2 + y2] = (0..m1).map(|y1| r[y1 * m2 + y2]).sum();
        }
    }
    for a in 0..n1 {
        for b in 0..n2 {
            let r = row(a, b);
            for y1 in 0..m1 {
                for y2 in 0..m2 {
                    let prod = l1[a * m1 + y1] * l2[b * m2 + y2];
                    deviation = deviation.max((r[y1 * m2 + y2] - prod).abs());
                }
            }
        }
    }
    if deviation > 1e-9 {
        return Err(Error::NotOrthogonal { deviation });
    }
    Ok((
        DiscreteKernel::new(vec![Variable::new(x1, n1)], Variable::new("Y1", m1), l1)?,
        DiscreteKernel::new(vec![Variable::new(x2, n2)], Variable::new("Y2", m2), l2)?,
    ))
}

fn reveals(j: &JointPmf, a: &str, b: &str) -> Result<bool> {
    Ok(j.entropy(&[a], &[b])?.abs() < 1e-12)
}

/// Orthogonal-link check: left-hand sides as in [`check_theorem1`],
/// right-hand sides I(X1;Y1), I(X2;Y2) and their sum at independent inputs
/// with the system's input marginals. `exact` is set when W = U and every
/// fidelity measure is lossless, where the conditions are also necessary.
pub fn check_orthogonal(spec: &SystemSpec, y_sizes: (usize, usize)) -> Result<RegionReport> {
    let (link1, link2) = split_orthogonal(&spec.channel, spec.x1(), spec.x2(), y_sizes)?;
    let base = check_theorem1(spec)?;
    let joint = spec.joint()?;
    let px1 = joint.marginal(&[spec.x1()])?;
    let px2 = joint.marginal(&[spec.x2()])?;
    let c1 = px1
        .attach_kernel(&link1)?
        .mutual_info(&[spec.x1()], &["Y1"], &[])?;
    let c2 = px2
        .attach_kernel(&link2)?
        .mutual_info(&[spec.x2()], &["Y2"], &[])?;
    let rows = vec![
        RegionRow::new(
            format!("{} < I({};Y1)", lhs_part(&base.rows[0].label), spec.x1()),
            base.rows[0].lhs,
            c1,
        ),
        RegionRow::new(
            format!("{} < I({};Y2)", lhs_part(&base.rows[1].label), spec.x2()),
            base.rows[1].lhs,
            c2,
        ),
        RegionRow::new(
            format!(
                "{} < I({};Y1)+I({};Y2)",
                lhs_part(&base.rows[2].label),
                spec.x1(),
                spec.x2()
            ),
            base.rows[2].lhs,
            c1 + c2,
        ),
    ];
    let w_is_u = spec.enc1.is_deterministic()
        && spec.enc2.is_deterministic()
        && reveals(&joint, spec.w1(), &spec.u1)?
        && reveals(&joint, &spec.u1, spec.w1())?
        && reveals(&joint, spec.w2(), &spec.u2)?
        && reveals(&joint, &spec.u2, spec.w2())?;
    let lossless = spec.distortion.iter().all(|d| d.measure.is_lossless());
    let mut report = RegionReport::new(rows, base.distortion);
    report.exact = Some(w_is_u && lossless);
    Ok(report)
}

fn lhs_part(label: &str) -> &str {
    label.split(" < ").next().unwrap_or(label)
}
