//! Binary network checkpoint format.
//!
//! One network record is:
//!
//! ```text
//! magic "SPNN1" | output_activation u8 | n_dims u32 | dims u32...
//! per layer: weights f64-le (row-major out x in), biases f64-le
//! optimizer tag u8: 0 none | 1 adam | 2 sgd
//!   adam: lr, beta1, beta2, epsilon f64-le | step_count u64-le
//!         per layer: m_weights, m_biases, v_weights, v_biases f64-le
//!   sgd:  lr f64-le
//! ```
//!
//! Round trips are bit-exact; floats are moved via `to_le_bytes`.

use std::io::{Read, Write};

use crate::error::NeuralError;

use super::{AdamState, Gradients, Mlp, Optimizer, OutputActivation};

pub const MAGIC: &[u8; 5] = b"SPNN1";

fn write_f64s(w: &mut impl Write, values: &[f64]) -> Result<(), NeuralError> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>, NeuralError> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn write_u32(w: &mut impl Write, v: u32) -> Result<(), NeuralError> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32, NeuralError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u8(r: &mut impl Read) -> Result<u8, NeuralError> {
    let mut buf = [0u8; 1];
    r.read_exact(&mut buf)?;
    Ok(buf[0])
}

fn write_gradients(w: &mut impl Write, g: &Gradients) -> Result<(), NeuralError> {
    for l in 0..g.weights.len() {
        write_f64s(w, &g.weights[l])?;
        write_f64s(w, &g.biases[l])?;
    }
    Ok(())
}

fn read_gradients(r: &mut impl Read, shape: &Mlp) -> Result<Gradients, NeuralError> {
    let mut g = Gradients::zeros_like(shape);
    for l in 0..g.weights.len() {
        g.weights[l] = read_f64s(r, g.weights[l].len())?;
        g.biases[l] = read_f64s(r, g.biases[l].len())?;
    }
    Ok(g)
}

pub fn write_network(
    w: &mut impl Write,
    net: &Mlp,
    optimizer: Option<&Optimizer>,
) -> Result<(), NeuralError> {
    w.write_all(MAGIC)?;
    let act = match net.output_activation {
        OutputActivation::Identity => 0u8,
        OutputActivation::Tanh => 1u8,
    };
    w.write_all(&[act])?;
    write_u32(w, net.layer_dims.len() as u32)?;
    for &d in &net.layer_dims {
        write_u32(w, d as u32)?;
    }
    for l in 0..net.weights.len() {
        write_f64s(w, &net.weights[l])?;
        write_f64s(w, &net.biases[l])?;
    }
    match optimizer {
        None => w.write_all(&[0u8])?,
        Some(Optimizer::Adam(state)) => {
            w.write_all(&[1u8])?;
            write_f64s(
                w,
                &[state.learning_rate, state.beta1, state.beta2, state.epsilon],
            )?;
            w.write_all(&state.step_count.to_le_bytes())?;
            write_gradients(w, &state.first_moment)?;
            write_gradients(w, &state.second_moment)?;
        }
        Some(Optimizer::Sgd { learning_rate }) => {
            w.write_all(&[2u8])?;
            write_f64s(w, &[*learning_rate])?;
        }
    }
    Ok(())
}

pub fn read_network(r: &mut impl Read) -> Result<(Mlp, Option<Optimizer>), NeuralError> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(NeuralError::Format(format!(
            "bad magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }
    let output_activation = match read_u8(r)? {
        0 => OutputActivation::Identity,
        1 => OutputActivation::Tanh,
        other => {
            return Err(NeuralError::Format(format!(
                "unknown output activation tag {other}"
            )))
        }
    };
    let n_dims = read_u32(r)? as usize;
    if !(2..=64).contains(&n_dims) {
        return Err(NeuralError::Format(format!(
            "implausible layer count {n_dims}"
        )));
    }
    let mut layer_dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        layer_dims.push(read_u32(r)? as usize);
    }
    if layer_dims.iter().any(|&d| d == 0) {
        return Err(NeuralError::Format("zero layer dimension".into()));
    }
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in layer_dims.windows(2) {
        weights.push(read_f64s(r, pair[0] * pair[1])?);
        biases.push(read_f64s(r, pair[1])?);
    }
    let net = Mlp {
        layer_dims,
        weights,
        biases,
        output_activation,
    };
    let optimizer = match read_u8(r)? {
        0 => None,
        1 => {
            let params = read_f64s(r, 4)?;
            let mut count = [0u8; 8];
            r.read_exact(&mut count)?;
            let first_moment = read_gradients(r, &net)?;
            let second_moment = read_gradients(r, &net)?;
            Some(Optimizer::Adam(AdamState {
                learning_rate: params[0],
                beta1: params[1],
                beta2: params[2],
                epsilon: params[3],
                step_count: u64::from_le_bytes(count),
                first_moment,
                second_moment,
            }))
        }
        2 => {
            let params = read_f64s(r, 1)?;
            Some(Optimizer::Sgd {
                learning_rate: params[0],
            })
        }
        other => {
            return Err(NeuralError::Format(format!(
                "unknown optimizer tag {other}"
            )))
        }
    };
    Ok((net, optimizer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for trial in 0..20 {
            let dims: Vec<usize> = {
                let n = rng.gen_range(2..=4);
                (0..n).map(|_| rng.gen_range(1..=9)).collect()
            };
            let act = if trial % 2 == 0 {
                OutputActivation::Identity
            } else {
                OutputActivation::Tanh
            };
            let net = Mlp::xavier_init(&dims, act, &mut rng);
            let opt = match trial % 3 {
                0 => None,
                1 => {
                    let mut state = AdamState::new(&net, 0.01);
                    state.step_count = rng.gen();
                    for w in &mut state.first_moment.weights {
                        for x in w.iter_mut() {
                            *x = rng.gen_range(-1.0..1.0);
                        }
                    }
                    Some(Optimizer::Adam(state))
                }
                _ => Some(Optimizer::Sgd {
                    learning_rate: 0.003,
                }),
            };
            let mut bytes = Vec::new();
            write_network(&mut bytes, &net, opt.as_ref()).unwrap();
            let (net2, opt2) = read_network(&mut bytes.as_slice()).unwrap();
            assert_eq!(net, net2);
            assert_eq!(opt, opt2);
            // Writing again produces the same bytes.
            let mut bytes2 = Vec::new();
            write_network(&mut bytes2, &net2, opt2.as_ref()).unwrap();
            assert_eq!(bytes, bytes2);
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let err = read_network(&mut &b"NOPE!xxxx"[..]).unwrap_err();
        assert!(matches!(err, NeuralError::Format(_)));
    }

    #[test]
    fn truncated_record_is_rejected() {
        let net = Mlp::zeros(&[2, 2], OutputActivation::Identity);
        let mut bytes = Vec::new();
        write_network(&mut bytes, &net, None).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(read_network(&mut bytes.as_slice()).is_err());
    }
}
