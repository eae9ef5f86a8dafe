//! Fixed-order state, algebraic and input vectors.

use crate::error::{Error, Result};

pub const N_STATES: usize = 14;
pub const N_ALG: usize = 28;

/// Indices into [`StateVec`].
pub mod sx {
    pub const OMEGA_R: usize = 0;
    pub const OMEGA_T: usize = 1;
    pub const THETA_TW: usize = 2;
    pub const I_QS: usize = 3;
    pub const I_DS: usize = 4;
    pub const E_QS: usize = 5;
    pub const E_DS: usize = 6;
    pub const V_DC: usize = 7;
    pub const U1: usize = 8;
    pub const U2: usize = 9;
    pub const U3: usize = 10;
    pub const U4: usize = 11;
    pub const U5: usize = 12;
    pub const U6: usize = 13;
}

/// Indices into [`AlgVec`].
pub mod ax {
    pub const V_DS: usize = 0;
    pub const V_QS: usize = 1;
    pub const V_DR: usize = 2;
    pub const V_QR: usize = 3;
    pub const V_DG: usize = 4;
    pub const V_QG: usize = 5;
    pub const I_DG: usize = 6;
    pub const I_QG: usize = 7;
    pub const I_DR: usize = 8;
    pub const I_QR: usize = 9;
    pub const P_GRID: usize = 10;
    pub const Q_GRID: usize = 11;
    pub const P_REF: usize = 12;
    pub const Q_G: usize = 13;
    pub const V_S: usize = 14;
    pub const E_IG: usize = 15;
    pub const DELTA_IG: usize = 16;
    pub const DELTA_R: usize = 17;
    pub const V_R: usize = 18;
    pub const PHI_R: usize = 19;
    pub const PSI_R: usize = 20;
    pub const PHI_IG: usize = 21;
    pub const PSI_IG: usize = 22;
    pub const T_E: usize = 23;
    pub const T_M: usize = 24;
    pub const T_SH: usize = 25;
    pub const P_T: usize = 26;
    pub const C_PPU: usize = 27;
}

pub const STATE_NAMES: [&str; N_STATES] = [
    "omega_r", "omega_t", "theta_tw", "i_qs", "i_ds", "e_qs", "e_ds", "v_dc", "u1", "u2", "u3",
    "u4", "u5", "u6",
];

pub const ALG_NAMES: [&str; N_ALG] = [
    "v_ds", "v_qs", "v_dr", "v_qr", "v_dg", "v_qg", "i_dg", "i_qg", "i_dr", "i_qr", "p_grid",
    "q_grid", "p_ref", "q_g", "v_s", "e_ig", "delta_ig", "delta_r", "v_r", "phi_r", "psi_r",
    "phi_ig", "psi_ig", "t_e", "t_m", "t_sh", "p_t", "c_ppu",
];

macro_rules! fixed_vec {
    ($name:ident, $n:expr, $names:expr) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub [f64; $n]);

        impl $name {
            pub const LEN: usize = $n;

            pub fn zeros() -> Self {
                Self([0.0; $n])
            }

            pub fn from_slice(v: &[f64]) -> Result<Self> {
                let arr: [f64; $n] = v.try_into().map_err(|_| {
                    Error::Dimension(format!(
                        "{} needs {} entries, got {}",
                        stringify!($name),
                        $n,
                        v.len()
                    ))
                })?;
                Ok(Self(arr))
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn names() -> &'static [&'static str; $n] {
                &$names
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }

            pub fn norm_inf(&self) -> f64 {
                self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
            }
        }

        impl std::ops::Index<usize> for $name {
            type Output = f64;

            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl std::ops::IndexMut<usize> for $name {
            fn index_mut(&mut self, i: usize) -> &mut f64 {
                &mut self.0[i]
            }
        }
    };
}

fixed_vec!(StateVec, N_STATES, STATE_NAMES);
fixed_vec!(AlgVec, N_ALG, ALG_NAMES);

/// Exogenous inputs: wind speed (m/s), grid reactance and infinite-bus
/// voltage (p.u.).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputVec {
    pub v_w: f64,
    pub x_e: f64,
    pub v_qinf: f64,
}

impl InputVec {
    pub fn new(v_w: f64, x_e: f64, v_qinf: f64) -> Result<Self> {
        let input = Self { v_w, x_e, v_qinf };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, value) in [("v_w", self.v_w), ("x_e", self.x_e), ("v_qinf", self.v_qinf)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    field: field.to_string(),
                    reason: format!("input must be positive and finite, got {value}"),
                });
            }
        }
        Ok(())
    }
}
