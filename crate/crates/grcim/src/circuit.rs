//! Exponent-selected coupling capacitors with parasitic compensation.
//!
//! A cell's mantissa product is sampled onto a binary-weighted stage of
//! total capacitance `C_stage`. The stage's floating top plate (parasitic
//! `c_p1` to ground) couples to the compute line through `C_E`, chosen so the
//! charge reaching the line scales as `2^(E_j - E_max)`:
//!
//! `C_E = (C_stage + c_p1) / (2^(E_max - E_j) - 1)`
//!
//! The top exponent connects directly and carries no coupling capacitor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which total stage capacitance the sizing formula uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageConvention {
    /// `(2^(n_m_w + 1) - 1) * C_u`.
    #[default]
    Extended,
    /// `(2^n_m_w - 1) * C_u`.
    Mantissa,
}

impl StageConvention {
    pub fn stage_units(&self, n_m_w: u32) -> f64 {
        match self {
            StageConvention::Extended => ((1u64 << (n_m_w + 1)) - 1) as f64,
            StageConvention::Mantissa => ((1u64 << n_m_w) - 1) as f64,
        }
    }
}

/// Sized coupling network for one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingNetwork {
    pub c_u: f64,
    pub n_m_w: u32,
    pub e_max: u32,
    /// Parasitic at the stage's floating node.
    pub c_p1: f64,
    /// Parasitic at the line side; part of the line capacitance.
    pub c_p2: f64,
    pub stage: StageConvention,
    /// Coupling capacitor per exponent `0..=e_max`; `e_max` is infinite
    /// (direct connection).
    pub c_e: Vec<f64>,
}

impl CouplingNetwork {
    pub fn c_stage(&self) -> f64 {
        self.stage.stage_units(self.n_m_w) * self.c_u
    }

    /// Same capacitors with a different node parasitic, without re-sizing.
    pub fn with_parasitic(&self, c_p1: f64) -> Self {
        Self { c_p1, ..self.clone() }
    }

    pub fn is_direct(&self, e_j: u32) -> bool {
        e_j == self.e_max
    }
}

/// Sizes the network with the default stage convention.
pub fn size_coupling_caps(n_m_w: u32, e_max: u32, c_u: f64, c_p1: f64) -> Result<CouplingNetwork> {
    size_coupling_caps_with(n_m_w, e_max, c_u, c_p1, StageConvention::default())
}

pub fn size_coupling_caps_with(
    n_m_w: u32,
    e_max: u32,
    c_u: f64,
    c_p1: f64,
    stage: StageConvention,
) -> Result<CouplingNetwork> {
    if e_max == 0 || e_max > 30 {
        return Err(Error::Circuit(format!("e_max {e_max} outside 1..=30")));
    }
    if !(c_u > 0.0) || !(c_p1 >= 0.0) {
        return Err(Error::Circuit(format!("need c_u > 0 and c_p1 >= 0, got {c_u}, {c_p1}")));
    }
    if n_m_w > 30 {
        return Err(Error::Circuit(format!("n_m_w {n_m_w} too large")));
    }
    let c_stage = stage.stage_units(n_m_w) * c_u;
    if c_stage == 0.0 {
        return Err(Error::Circuit("stage capacitance is zero".into()));
    }
    let c_e = (0..=e_max)
        .map(|e_j| {
            if e_j == e_max {
                f64::INFINITY
            } else {
                (c_stage + c_p1) / (((e_max - e_j) as f64).exp2() - 1.0)
            }
        })
        .collect();
    Ok(CouplingNetwork {
        c_u,
        n_m_w,
        e_max,
        c_p1,
        c_p2: 0.0,
        stage,
        c_e,
    })
}

/// Charge delivered into the virtual-ground line when the stage's bottom
/// plates step by `v`.
///
/// Phase one resets the floating node to 0 V with the stage charged to `v`.
/// Phase two releases the node and returns the bottom plates to 0 V; the
/// node's charge is conserved across `c_stage`, `c_p1` and `c_e`.
pub fn coupled_charge(c_stage: f64, c_p1: f64, c_e: f64, v: f64) -> f64 {
    if c_e.is_infinite() {
        // The node is the line itself.
        return c_stage * v;
    }
    let q_node = -c_stage * v;
    let v_node = q_node / (c_stage + c_p1 + c_e);
    -c_e * v_node
}

/// Coupling gain for exponent `e_j` relative to the direct connection.
pub fn effective_gain(net: &CouplingNetwork, e_j: u32) -> Result<f64> {
    let c_e = *net
        .c_e
        .get(e_j as usize)
        .ok_or_else(|| Error::Circuit(format!("exponent {e_j} outside 0..={}", net.e_max)))?;
    let c_s = net.c_stage();
    Ok(coupled_charge(c_s, net.c_p1, c_e, 1.0) / coupled_charge(c_s, net.c_p1, f64::INFINITY, 1.0))
}

/// Largest relative deviation from the ideal `2^(e_j - e_max)` over all
/// exponents.
pub fn worst_gain_error(net: &CouplingNetwork) -> Result<f64> {
    (0..=net.e_max).try_fold(0.0f64, |acc, e| {
        let ideal = (e as f64 - net.e_max as f64).exp2();
        Ok(acc.max((effective_gain(net, e)? / ideal - 1.0).abs()))
    })
}
