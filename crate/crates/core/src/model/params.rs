use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Machine, drive-train, converter, controller and network constants of the
/// single-machine-infinite-bus DFIG system, in per unit on the machine base
/// with time in seconds.
///
/// The reduced-order machine constants are not stored; they are always
/// derived from the inductances and resistances:
///
/// * `L_s' = L_ss - L_m² / L_rr`
/// * `K_mrr = L_m / L_rr`
/// * `τ_r = L_rr / R_r` (per unit, scaled by `ω_el` in the equations)
/// * `R_2 = K_mrr² · R_r`
/// * `R_1 = R_s + R_2`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfigParams {
    pub h_g: f64,
    pub h_t: f64,
    pub k_sh: f64,
    pub c_sh: f64,
    pub omega_el: f64,
    pub omega_s: f64,
    pub r_s: f64,
    pub r_r: f64,
    pub l_ss: f64,
    pub l_rr: f64,
    pub l_m: f64,
    pub c_dc: f64,
    pub x_tg: f64,
    pub x_e: f64,
    pub v_qinf: f64,
    pub k_opt: f64,
    pub v_wb: f64,
    pub kp1: f64,
    pub kp2: f64,
    pub kp3: f64,
    pub kp4: f64,
    pub kp5: f64,
    pub kp6: f64,
    pub ki1: f64,
    pub ki2: f64,
    pub ki3: f64,
    pub ki4: f64,
    pub ki5: f64,
    pub ki6: f64,
    pub delta_igref: f64,
    pub v_sref: f64,
    pub e_igref: f64,
    pub v_dcref: f64,
    pub q_gref: f64,
}

impl Default for DfigParams {
    /// A 50 Hz, 2 MW-class machine with a two-mass drive train. The
    /// controller gains place every small-signal mode in the left half plane
    /// for wind speeds between 10 and 12 m/s, and `v_wb` puts the MPPT
    /// operating point at the peak of the performance-coefficient curve.
    fn default() -> Self {
        Self {
            h_g: 0.685,
            h_t: 4.32,
            k_sh: 0.3,
            c_sh: 0.01,
            omega_el: 2.0 * std::f64::consts::PI * 50.0,
            omega_s: 1.0,
            r_s: 0.00706,
            r_r: 0.005,
            l_ss: 3.071,
            l_rr: 3.056,
            l_m: 2.9,
            c_dc: 0.05,
            x_tg: 0.3,
            x_e: 0.02,
            v_qinf: 1.0,
            k_opt: 0.73,
            v_wb: 12.0277,
            kp1: 0.015,
            kp2: 0.1,
            kp3: 0.5,
            kp4: 0.035,
            kp5: 0.5,
            kp6: 13.0,
            ki1: 0.16,
            ki2: 2.0,
            ki3: 25.0,
            ki4: 0.11,
            ki5: 23.0,
            ki6: 7.0,
            delta_igref: 0.0,
            v_sref: 1.0,
            e_igref: 1.0,
            v_dcref: 1.0,
            q_gref: 0.0,
        }
    }
}

impl DfigParams {
    /// Transient stator inductance `L_s'`.
    pub fn l_s_prime(&self) -> f64 {
        self.l_ss - self.l_m * self.l_m / self.l_rr
    }

    pub fn k_mrr(&self) -> f64 {
        self.l_m / self.l_rr
    }

    pub fn tau_r(&self) -> f64 {
        self.l_rr / self.r_r
    }

    pub fn r_2(&self) -> f64 {
        let k = self.k_mrr();
        k * k * self.r_r
    }

    pub fn r_1(&self) -> f64 {
        self.r_s + self.r_2()
    }

    /// Checks the sign invariants and finiteness of every field.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.fields() {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    field: name.to_string(),
                    reason: format!("must be finite, got {value}"),
                });
            }
        }
        let positive = [
            ("h_g", self.h_g),
            ("h_t", self.h_t),
            ("c_dc", self.c_dc),
            ("l_ss", self.l_ss),
            ("l_rr", self.l_rr),
            ("l_m", self.l_m),
            ("x_tg", self.x_tg),
            ("x_e", self.x_e),
            ("v_qinf", self.v_qinf),
            ("omega_el", self.omega_el),
            ("omega_s", self.omega_s),
            ("r_r", self.r_r),
            ("v_wb", self.v_wb),
            ("v_dcref", self.v_dcref),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(Error::InvalidParameter {
                    field: name.to_string(),
                    reason: format!("must be positive, got {value}"),
                });
            }
        }
        if !(self.l_s_prime() > 0.0) {
            return Err(Error::InvalidParameter {
                field: "l_ss".into(),
                reason: format!(
                    "transient inductance L_ss - L_m^2/L_rr = {} must be positive",
                    self.l_s_prime()
                ),
            });
        }
        if self.ki1 == 0.0 || self.ki2 == 0.0 || self.ki4 == 0.0 {
            return Err(Error::InvalidParameter {
                field: "ki1/ki2/ki4".into(),
                reason: "integral gains of the rotor-side loops must be nonzero".into(),
            });
        }
        Ok(())
    }

    /// `(name, value)` for every field, in declaration order.
    pub fn fields(&self) -> [(&'static str, f64); 34] {
        [
            ("h_g", self.h_g),
            ("h_t", self.h_t),
            ("k_sh", self.k_sh),
            ("c_sh", self.c_sh),
            ("omega_el", self.omega_el),
            ("omega_s", self.omega_s),
            ("r_s", self.r_s),
            ("r_r", self.r_r),
            ("l_ss", self.l_ss),
            ("l_rr", self.l_rr),
            ("l_m", self.l_m),
            ("c_dc", self.c_dc),
            ("x_tg", self.x_tg),
            ("x_e", self.x_e),
            ("v_qinf", self.v_qinf),
            ("k_opt", self.k_opt),
            ("v_wb", self.v_wb),
            ("kp1", self.kp1),
            ("kp2", self.kp2),
            ("kp3", self.kp3),
            ("kp4", self.kp4),
            ("kp5", self.kp5),
            ("kp6", self.kp6),
            ("ki1", self.ki1),
            ("ki2", self.ki2),
            ("ki3", self.ki3),
            ("ki4", self.ki4),
            ("ki5", self.ki5),
            ("ki6", self.ki6),
            ("delta_igref", self.delta_igref),
            ("v_sref", self.v_sref),
            ("e_igref", self.e_igref),
            ("v_dcref", self.v_dcref),
            ("q_gref", self.q_gref),
        ]
    }
}
