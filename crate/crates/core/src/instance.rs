//! Problem data `(t, x, m)`, its flattened form `(ν, u, f)`, and the raw
//! objectives of the two variational expressions.
//!
//! The flattened form repeats location `x_j` exactly `m_j` times, so that a
//! moment `E[∏ Z(t, x_j)^{m_j}]` becomes a product of `ν = Σ m_j` single
//! factors `E[∏ Z(t, u_k)]`. `f(k)` records which location slot `k` came from.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// A validated multi-point moment problem.
///
/// Invariants: `t > 0`, `x` finite and strictly increasing, every `m_i ≥ 1`,
/// `x.len() == m.len() ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct MomentInstance {
    t: f64,
    x: Vec<f64>,
    m: Vec<u32>,
}

/// Unvalidated wire form: `{"t": <number>, "x": [...], "m": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInstance {
    pub t: f64,
    pub x: Vec<f64>,
    pub m: Vec<i64>,
}

impl TryFrom<RawInstance> for MomentInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        validate_instance(raw.t, &raw.x, &raw.m)
    }
}

impl From<MomentInstance> for RawInstance {
    fn from(inst: MomentInstance) -> Self {
        RawInstance {
            t: inst.t,
            m: inst.m.iter().map(|&v| i64::from(v)).collect(),
            x: inst.x,
        }
    }
}

/// Validates raw input. Duplicate locations are rejected; callers must merge
/// them by summing multiplicities first.
pub fn validate_instance(t: f64, x: &[f64], m: &[i64]) -> Result<MomentInstance> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    check_len(x.len(), m.len())?;
    if x.is_empty() {
        return Err(Error::EmptyInstance);
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteLocation(i));
    }
    if let Some(i) = x.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedLocations {
            index: i,
            left: x[i],
            right: x[i + 1],
        });
    }
    let m = m
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            u32::try_from(value)
                .ok()
                .filter(|&v| v >= 1)
                .ok_or(Error::NonPositiveMultiplicity { index, value })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentInstance {
        t,
        x: x.to_vec(),
        m,
    })
}

impl MomentInstance {
    pub fn new(t: f64, x: &[f64], m: &[i64]) -> Result<Self> {
        validate_instance(t, x, m)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn m(&self) -> &[u32] {
        &self.m
    }

    /// Number of distinct locations.
    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Total moment `ν = Σ m_i`.
    pub fn nu(&self) -> usize {
        self.m.iter().map(|&v| v as usize).sum()
    }

    /// Same locations and multiplicities at a different time.
    pub fn with_time(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        Ok(MomentInstance { t, ..self.clone() })
    }

    /// Sub-instance on the index set `indices` (ascending), same `t`.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        MomentInstance {
            t: self.t,
            x: indices.iter().map(|&i| self.x[i]).collect(),
            m: indices.iter().map(|&i| self.m[i]).collect(),
        }
    }

    pub fn flatten(&self) -> FlatInstance {
        flatten(self)
    }
}

/// Flattened representation: `u_k = x_{f(k)}` with each location repeated
/// by its multiplicity. `f` is zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatInstance {
    u: Vec<f64>,
    f: Vec<usize>,
}

pub fn flatten(inst: &MomentInstance) -> FlatInstance {
    let nu = inst.nu();
    let mut u = Vec::with_capacity(nu);
    let mut f = Vec::with_capacity(nu);
    for (j, (&xj, &mj)) in inst.x.iter().zip(&inst.m).enumerate() {
        for _ in 0..mj {
            u.push(xj);
            f.push(j);
        }
    }
    FlatInstance { u, f }
}

impl FlatInstance {
    pub fn nu(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Zero-based location index of every flat slot.
    pub fn f(&self) -> &[usize] {
        &self.f
    }

    /// Groups consecutive slots with equal `f` back into `(x, m)`.
    pub fn unflatten(&self) -> (Vec<f64>, Vec<u32>) {
        let mut x = Vec::new();
        let mut m: Vec<u32> = Vec::new();
        let mut last = None;
        for (&uk, &fk) in self.u.iter().zip(&self.f) {
            if last == Some(fk) {
                *m.last_mut().expect("non-empty run") += 1;
            } else {
                x.push(uk);
                m.push(1);
                last = Some(fk);
            }
        }
        (x, m)
    }
}

/// `Σ_k (t/2) a_k² + u_k a_k`. Feasibility is not checked.
pub fn gamma1_objective(flat: &FlatInstance, t: f64, a: &[f64]) -> Result<f64> {
    check_len(flat.nu(), a.len())?;
    Ok(flat
        .u
        .iter()
        .zip(a)
        .map(|(&uk, &ak)| 0.5 * t * ak * ak + uk * ak)
        .sum())
}

/// `Σ_i (m_i t/2)(b_i + x_i/t)² + (m_i³ − m_i) t/24 − m_i x_i²/(2t)`.
/// Feasibility is not checked.
pub fn gamma2_objective(inst: &MomentInstance, b: &[f64]) -> Result<f64> {
    check_len(inst.n(), b.len())?;
    let t = inst.t;
    Ok(inst
        .x
        .iter()
        .zip(&inst.m)
        .zip(b)
        .map(|((&xi, &mi), &bi)| {
            let m = f64::from(mi);
            let shifted = bi + xi / t;
            0.5 * m * t * shifted * shifted + (m * m * m - m) * t / 24.0 - m * xi * xi / (2.0 * t)
        })
        .sum())
}
