//! JSON file formats and the name shorthands accepted by the front end.
//!
//! Matrices are `{"dim": d, "re": [[...]], "im": [[...]]}`, Kraus maps are
//! `{"dim": d, "kraus": [matrix, ...]}` and states are
//! `{"dim": d, "re": [...], "im": [...]}`. `im` may be omitted for real data.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cp_map::KrausMap;
use crate::error::{Error, Result};
use crate::evolution_measurement::PureState;
use crate::interaction_entanglement::BipartiteUnitary;
use crate::linalg::{pauli, CMatrix, CVector, C64};
use crate::operator_basis::{clock_shift, UnitaryOperator};
use crate::random::{haar_unitary, seeded};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows =
            |f: fn(&C64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        Self { dim: m.nrows(), re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !shape_ok(&self.re) {
            return Err(Error::Parse(format!("'re' must be {d}x{d}")));
        }
        if !self.im.is_empty() && !shape_ok(&self.im) {
            return Err(Error::Parse(format!("'im' must be {d}x{d} or omitted")));
        }
        Ok(CMatrix::from_fn(d, d, |i, j| C64::new(self.re[i][j], self.im.get(i).map_or(0.0, |r| r[j]))))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausFile {
    pub dim: usize,
    pub kraus: Vec<MatrixFile>,
}

impl KrausFile {
    pub fn from_map(map: &KrausMap) -> Self {
        Self { dim: map.dim(), kraus: map.operators().iter().map(MatrixFile::from_matrix).collect() }
    }

    pub fn to_map(&self) -> Result<KrausMap> {
        let ops = self
            .kraus
            .iter()
            .map(|m| {
                if m.dim != self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim, found: m.dim });
                }
                m.to_matrix()
            })
            .collect::<Result<Vec<_>>>()?;
        KrausMap::new(ops)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl StateFile {
    pub fn to_state(&self) -> Result<PureState> {
        if self.re.len() != self.dim || !(self.im.is_empty() || self.im.len() == self.dim) {
            return Err(Error::Parse(format!("state arrays must have length {}", self.dim)));
        }
        let v = CVector::from_fn(self.dim, |i, _| C64::new(self.re[i], self.im.get(i).copied().unwrap_or(0.0)));
        PureState::new(v)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &str) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_string(), message: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")))
}

fn looks_like_path(spec: &str) -> bool {
    spec.ends_with(".json") || spec.contains('/') || Path::new(spec).exists()
}

fn parse_num<T: std::str::FromStr>(text: &str, what: &str) -> Result<T> {
    text.parse().map_err(|_| Error::Parse(format!("invalid {what} '{text}'")))
}

/// `I X Y Z H CNOT SWAP`, `clock:d`, `shift:d`, `random:d:seed`.
pub fn named_gate(name: &str) -> Result<CMatrix> {
    let h = (pauli(1) + pauli(3)) * C64::from(std::f64::consts::FRAC_1_SQRT_2);
    match name {
        "I" => return Ok(pauli(0)),
        "X" => return Ok(pauli(1)),
        "Y" => return Ok(pauli(2)),
        "Z" => return Ok(pauli(3)),
        "H" => return Ok(h),
        "CNOT" => return Ok(BipartiteUnitary::cnot().matrix().clone()),
        "SWAP" => return Ok(BipartiteUnitary::swap().matrix().clone()),
        _ => {}
    }
    let parts: Vec<&str> = name.split(':').collect();
    match parts.as_slice() {
        ["clock", d] => Ok(clock_shift(parse_num(d, "dimension")?)?.0.into_matrix()),
        ["shift", d] => Ok(clock_shift(parse_num(d, "dimension")?)?.1.into_matrix()),
        ["random", d, seed] => {
            let d: usize = parse_num(d, "dimension")?;
            if d == 0 {
                return Err(Error::InvalidDimension("random unitary needs d >= 1".into()));
            }
            Ok(haar_unitary(d, &mut seeded(parse_num(seed, "seed")?)))
        }
        _ => Err(Error::UnknownName(name.to_string())),
    }
}

/// A named gate or a matrix file.
pub fn load_matrix(spec: &str) -> Result<CMatrix> {
    if looks_like_path(spec) {
        read_json::<MatrixFile>(spec)?.to_matrix()
    } else {
        named_gate(spec)
    }
}

pub fn load_unitary(spec: &str) -> Result<UnitaryOperator> {
    UnitaryOperator::new(load_matrix(spec)?)
}

/// `dephasing:p`, `depolarizing:p[:d]`, `identity:d`, `unitary:<gate>` or a Kraus file.
pub fn load_map(spec: &str) -> Result<KrausMap> {
    if looks_like_path(spec) {
        return read_json::<KrausFile>(spec)?.to_map();
    }
    let (kind, rest) = spec.split_once(':').ok_or_else(|| Error::UnknownName(spec.to_string()))?;
    match kind {
        "dephasing" => KrausMap::dephasing(parse_num(rest, "probability")?),
        "depolarizing" => match rest.split_once(':') {
            Some((p, d)) => KrausMap::depolarizing(parse_num(p, "probability")?, parse_num(d, "dimension")?),
            None => KrausMap::depolarizing(parse_num(rest, "probability")?, 2),
        },
        "identity" => Ok(KrausMap::identity_channel(parse_num(rest, "dimension")?)),
        "unitary" => Ok(KrausMap::unitary(&load_unitary(rest)?)),
        _ => Err(Error::UnknownName(spec.to_string())),
    }
}

/// `random:seed`, `basis:k` or a state file.
pub fn load_state(spec: &str, d: usize) -> Result<PureState> {
    let state = if looks_like_path(spec) {
        read_json::<StateFile>(spec)?.to_state()?
    } else {
        match spec.split_once(':') {
            Some(("random", seed)) => PureState::random(d, parse_num(seed, "seed")?),
            Some(("basis", k)) => {
                let k: usize = parse_num(k, "basis index")?;
                if k >= d {
                    return Err(Error::IndexOutOfRange { index: k, len: d });
                }
                PureState::basis_state(d, k)
            }
            _ => return Err(Error::UnknownName(spec.to_string())),
        }
    };
    if state.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: state.dim() });
    }
    Ok(state)
}
