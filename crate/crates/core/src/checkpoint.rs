//! Binary checkpoints: a text header
//! `BQCHK1 n L t nu kappa alpha beta` and a newline, then two arrays, each a
//! little-endian `u64` length followed by little-endian `f64` values (θ, then
//! ω, collocation values in row-major order).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::PhysicalField;
use crate::grid::{FlowParams, GridSpec};
use crate::solver::SimState;

const MAGIC: &str = "BQCHK1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: SimState,
    pub params: FlowParams,
}

fn header(state: &SimState, p: &FlowParams) -> String {
    let g = state.grid();
    // `{:?}` prints the shortest decimal that parses back to the same bits.
    format!(
        "{MAGIC} {} {:?} {:?} {:?} {:?} {:?} {:?}\n",
        g.n(),
        g.side_length(),
        state.t(),
        p.nu,
        p.kappa,
        p.alpha,
        p.beta
    )
}

pub fn encode(state: &SimState, params: &FlowParams) -> Vec<u8> {
    let mut out = header(state, params).into_bytes();
    for f in [state.theta(), state.omega()] {
        out.extend_from_slice(&(f.values().len() as u64).to_le_bytes());
        for v in f.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

/// Parses a checkpoint; the dealias fraction is not stored and is supplied
/// by the caller.
pub fn decode(bytes: &[u8], dealias_fraction: f64) -> Result<Checkpoint> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header line"))?;
    let head = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not text"))?;
    let fields: Vec<&str> = head.split_whitespace().collect();
    if fields.len() != 8 || fields[0] != MAGIC {
        return Err(bad(format!("malformed header `{head}`")));
    }
    let n: usize = fields[1].parse().map_err(|_| bad("bad n"))?;
    let num =
        |i: usize, name: &str| -> Result<f64> { fields[i].parse::<f64>().map_err(|_| bad(format!("bad {name}"))) };
    let grid = GridSpec::new(n, num(2, "L")?, dealias_fraction)?;
    let t = num(3, "t")?;
    let params = FlowParams::new(num(4, "nu")?, num(5, "kappa")?, num(6, "alpha")?, num(7, "beta")?)?;
    let mut rest = &bytes[nl + 1..];
    let mut arrays = Vec::with_capacity(2);
    for name in ["theta", "omega"] {
        let mut len = [0u8; 8];
        rest.read_exact(&mut len)
            .map_err(|_| bad(format!("truncated {name} length")))?;
        let len = u64::from_le_bytes(len) as usize;
        if len != n * n {
            return Err(bad(format!("{name} has {len} values, expected {}", n * n)));
        }
        let mut values = Vec::with_capacity(len);
        let mut buf = [0u8; 8];
        for _ in 0..len {
            rest.read_exact(&mut buf)
                .map_err(|_| bad(format!("truncated {name} data")))?;
            values.push(f64::from_le_bytes(buf));
        }
        arrays.push(PhysicalField::new(grid, values)?);
    }
    if !rest.is_empty() {
        return Err(bad("trailing bytes"));
    }
    let omega = arrays.pop().expect("two arrays");
    let theta = arrays.pop().expect("two arrays");
    Ok(Checkpoint {
        state: SimState::from_physical(theta, omega, t)?,
        params,
    })
}

pub fn write(path: &Path, state: &SimState, params: &FlowParams) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(state, params))?;
    Ok(())
}

pub fn read(path: &Path, dealias_fraction: f64) -> Result<Checkpoint> {
    decode(&std::fs::read(path)?, dealias_fraction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{initial_data, step_fixed, InitKind};

    fn sample() -> (SimState, FlowParams) {
        let g = GridSpec::new(16, 5.3, 2.0 / 3.0).unwrap();
        let p = FlowParams::new(0.7, 1.1, 0.9, 0.1 + 0.2).unwrap();
        let s = step_fixed(&initial_data(InitKind::GaussianBumps, 5, g).unwrap(), &p, 0.1 / 3.0).unwrap();
        (s, p)
    }

    #[test]
    fn bit_exact_round_trip() {
        let (s, p) = sample();
        let bytes = encode(&s, &p);
        let back = decode(&bytes, 2.0 / 3.0).unwrap();
        assert_eq!(back.state, s);
        assert_eq!(back.params, p);
        assert_eq!(encode(&back.state, &back.params), bytes);
        assert!(bytes.starts_with(b"BQCHK1 16 5.3 "));
    }

    #[test]
    fn rejects_corruption() {
        let (s, p) = sample();
        let bytes = encode(&s, &p);
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(matches!(decode(&wrong, 2.0 / 3.0), Err(Error::Checkpoint(_))));
        assert!(decode(&bytes[..bytes.len() - 3], 2.0 / 3.0).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(decode(&long, 2.0 / 3.0).is_err());
        let text = String::from_utf8_lossy(&bytes[..30]).replace("BQCHK1 16", "BQCHK1 xx");
        let mut garbled = text.into_bytes();
        garbled.extend_from_slice(&bytes[30..]);
        assert!(decode(&garbled, 2.0 / 3.0).is_err());
    }

    #[test]
    fn file_round_trip() {
        let (s, p) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        write(&path, &s, &p).unwrap();
        assert_eq!(read(&path, 2.0 / 3.0).unwrap().state, s);
    }
}
