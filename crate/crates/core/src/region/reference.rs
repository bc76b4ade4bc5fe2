//! Reference instances: the correlated binary pair with noisy side
//! information, the binary adder MAC, and the sources used for the Gaussian
//! MAC examples.

use super::{Decoder, DistortionTarget, Reconstruction, SystemSpec};
use crate::error::Result;
use crate::probability::{DiscreteKernel, JointPmf, Variable};

/// Binary pair with P(00)=P(11)=1/3, P(01)=P(10)=1/6.
pub fn correlated_pair() -> JointPmf {
    binary_pair([1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0])
}

/// Binary pair with P(00)=P(11)=0.4444, P(01)=P(10)=0.0556.
pub fn strongly_correlated_pair() -> JointPmf {
    binary_pair([0.4444, 0.0556, 0.0556, 0.4444])
}

/// Binary pair with P(00)=P(01)=P(11)=1/3 and a structural zero at 10.
pub fn gmac_example_pair() -> JointPmf {
    binary_pair([1.0 / 3.0, 1.0 / 3.0, 0.0, 1.0 / 3.0])
}

/// Binary pair over (U1, U2) with probabilities for 00, 01, 10, 11.
pub fn binary_pair(p: [f64; 4]) -> JointPmf {
    JointPmf::new(
        vec![Variable::new("U1", 2), Variable::new("U2", 2)],
        p.to_vec(),
    )
    .expect("reference pmf is valid")
}

/// [`correlated_pair`] extended with side information: Z1 is U2 through a
/// BSC(`crossover`), Z2 is U1 through a BSC(`crossover`), and V = U1·U2·N
/// with N a fair bit independent of the sources.
pub fn side_info_source(crossover: f64) -> Result<JointPmf> {
    let j = correlated_pair()
        .attach_kernel(&DiscreteKernel::bsc("U2", "Z1", crossover)?)?
        .attach_kernel(&DiscreteKernel::bsc("U1", "Z2", crossover)?)?
        .attach_kernel(&DiscreteKernel::independent(
            Variable::new("N", 2),
            vec![0.5, 0.5],
        )?)?;
    let and = DiscreteKernel::deterministic(
        vec![
            Variable::new("U1", 2),
            Variable::new("U2", 2),
            Variable::new("N", 2),
        ],
        Variable::new("V", 2),
        |a| a[0] & a[1] & a[2],
    )?;
    j.attach_kernel(&and)?
        .marginal(&["U1", "U2", "Z1", "Z2", "V"])
}

/// Noiseless binary adder MAC: Y = X1 + X2 over {0, 1, 2}.
pub fn adder_channel() -> DiscreteKernel {
    DiscreteKernel::deterministic(
        vec![Variable::new("X1", 2), Variable::new("X2", 2)],
        Variable::new("Y", 3),
        |a| a[0] + a[1],
    )
    .expect("adder is a valid kernel")
}

/// Channel-input map drawing X uniformly over `size` symbols regardless of W.
pub fn independent_input(w: Variable, x_name: &str, size: usize) -> Result<DiscreteKernel> {
    let rows = w.size;
    DiscreteKernel::new(
        vec![w],
        Variable::new(x_name, size),
        vec![1.0 / size as f64; rows * size],
    )
}

/// Lossless decoder û_i = w_i over inputs (W1, W2, Z...).
pub fn passthrough_decoder(w_sizes: [usize; 2], z_rows: usize) -> Decoder {
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    for w1 in 0..w_sizes[0] {
        for w2 in 0..w_sizes[1] {
            for _ in 0..z_rows {
                t1.push(w1);
                t2.push(w2);
            }
        }
    }
    Decoder {
        reconstructions: vec![
            Reconstruction {
                size: w_sizes[0],
                table: t1,
            },
            Reconstruction {
                size: w_sizes[1],
                table: t2,
            },
        ],
    }
}

/// Lossless W = U system over the adder MAC with decoder side information
/// `z` drawn from [`side_info_source`] (Z1 at encoder 1, Z2 at encoder 2).
/// With `coupled` the inputs are X = U; otherwise they are independent fair
/// bits.
pub fn side_info_system(z: &[&str], coupled: bool) -> Result<SystemSpec> {
    let source = side_info_source(0.3)?;
    let enc1 = DiscreteKernel::identity(Variable::new("U1", 2), "W1")?;
    let enc2 = DiscreteKernel::identity(Variable::new("U2", 2), "W2")?;
    let (chin1, chin2) = if coupled {
        (
            DiscreteKernel::identity(Variable::new("W1", 2), "X1")?,
            DiscreteKernel::identity(Variable::new("W2", 2), "X2")?,
        )
    } else {
        (
            independent_input(Variable::new("W1", 2), "X1", 2)?,
            independent_input(Variable::new("W2", 2), "X2", 2)?,
        )
    };
    let z_rows = z
        .iter()
        .map(|n| source.size_of(n))
        .product::<Result<usize>>()?;
    Ok(SystemSpec {
        source,
        u1: "U1".into(),
        u2: "U2".into(),
        z1: vec!["Z1".into()],
        z2: vec!["Z2".into()],
        z: z.iter().map(|s| s.to_string()).collect(),
        enc1,
        enc2,
        chin1,
        chin2,
        channel: adder_channel(),
        decoder: Some(passthrough_decoder([2, 2], z_rows)),
        distortion: vec![DistortionTarget::lossless(2), DistortionTarget::lossless(2)],
    })
}
