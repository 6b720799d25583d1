//! JSON parameter documents.
//!
//! The document is a flat object whose keys mirror the reference parameter
//! table (`m`, `L_p`, `g`, `I_xx`, `I_yy`, `I_zz`, `k0`, `k1`, `k2`,
//! `T_max`, `t_s`, `M_a`, `B_a`, `K_a`) plus optional `rotor`, `geometry`,
//! `allocation`, `observer`, `control`, `ekf`, and `envelope` blocks. Every
//! field is optional; omitted fields keep the embedded defaults, which match
//! the reference values exactly.

use aerowrench_core::params::{Config, GainMode};
use aerowrench_core::{Vec3, Vec6};
use anyhow::{Context, Result};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub m: Option<f64>,
    #[serde(rename = "L_p")]
    pub l_p: Option<f64>,
    pub g: Option<f64>,
    #[serde(rename = "I_xx")]
    pub i_xx: Option<f64>,
    #[serde(rename = "I_yy")]
    pub i_yy: Option<f64>,
    #[serde(rename = "I_zz")]
    pub i_zz: Option<f64>,
    pub k0: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    #[serde(rename = "T_max")]
    pub t_max: Option<f64>,
    pub t_s: Option<f64>,
    #[serde(rename = "M_a")]
    pub m_a: Option<f64>,
    #[serde(rename = "B_a")]
    pub b_a: Option<f64>,
    #[serde(rename = "K_a")]
    pub k_a: Option<f64>,
    #[serde(default)]
    pub rotor: RotorDoc,
    #[serde(default)]
    pub geometry: GeometryDoc,
    #[serde(default)]
    pub allocation: AllocationDoc,
    #[serde(default)]
    pub observer: ObserverDoc,
    #[serde(default)]
    pub control: ControlDoc,
    #[serde(default)]
    pub ekf: EkfDoc,
    #[serde(default)]
    pub envelope: EnvelopeDoc,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotorDoc {
    pub k_t: Option<f64>,
    pub k_m: Option<f64>,
    pub r: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDoc {
    pub m_p: Option<f64>,
    pub m_q1: Option<f64>,
    pub m_q2: Option<f64>,
    pub s1: Option<[f64; 3]>,
    pub s2: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationDoc {
    pub d: Option<[f64; 8]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverDoc {
    pub mode: Option<GainMode>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlDoc {
    pub pos_p: Option<f64>,
    pub pos_d: Option<f64>,
    pub att_p: Option<f64>,
    pub att_d: Option<f64>,
    pub admittance_axes: Option<[bool; 6]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EkfDoc {
    pub sigma_pos: Option<f64>,
    pub sigma_att_deg: Option<f64>,
    pub sigma_vel: Option<f64>,
    pub sigma_rate_deg: Option<f64>,
    pub q_accel: Option<f64>,
    pub q_wrench_force: Option<f64>,
    pub q_wrench_torque: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeDoc {
    pub phi_max_deg: Option<f64>,
    pub theta_max_deg: Option<f64>,
    pub rate_max: Option<f64>,
    pub grid: Option<usize>,
    pub epsilon: Option<f64>,
}

impl ParamsDoc {
    /// Overlays the document onto the embedded defaults and validates the
    /// result.
    pub fn into_config(self) -> Result<Config> {
        let mut config = Config::default();
        let sys = &mut config.system;
        if let Some(v) = self.m {
            sys.m = v;
        }
        if let Some(v) = self.l_p {
            sys.l_p = v;
        }
        if let Some(v) = self.g {
            sys.g = v;
        }
        if let Some(v) = self.i_xx {
            sys.i_body.x = v;
        }
        if let Some(v) = self.i_yy {
            sys.i_body.y = v;
        }
        if let Some(v) = self.i_zz {
            sys.i_body.z = v;
        }
        if let Some(v) = self.t_max {
            sys.t_max = v;
        }
        if let Some(v) = self.t_s {
            sys.t_s = v;
        }
        if let Some(v) = self.rotor.k_t {
            sys.rotor.k_t = v;
        }
        if let Some(v) = self.rotor.k_m {
            sys.rotor.k_m = v;
        }
        if let Some(v) = self.rotor.r {
            sys.rotor.r = v;
        }
        if let Some(v) = self.geometry.m_p {
            sys.m_p = v;
        }
        if let Some(v) = self.geometry.m_q1 {
            sys.m_q1 = v;
        }
        if let Some(v) = self.geometry.m_q2 {
            sys.m_q2 = v;
        }
        if let Some(v) = self.geometry.s1 {
            sys.s1 = Vec3::from_row_slice(&v);
        }
        if let Some(v) = self.geometry.s2 {
            sys.s2 = Vec3::from_row_slice(&v);
        }

        if let Some(v) = self.k0 {
            config.observer.k0 = v;
        }
        if let Some(v) = self.k1 {
            config.observer.k1 = v;
        }
        if let Some(v) = self.k2 {
            config.observer.k2 = v;
        }
        if let Some(v) = self.observer.mode {
            config.observer.mode = v;
        }

        if let Some(v) = self.m_a {
            config.admittance.m_a = Vec6::repeat(v);
        }
        if let Some(v) = self.b_a {
            config.admittance.b_a = Vec6::repeat(v);
        }
        if let Some(v) = self.k_a {
            config.admittance.k_a = Vec6::repeat(v);
        }
        if let Some(v) = self.control.admittance_axes {
            config.admittance.axes = v;
        }
        if let Some(v) = self.control.pos_p {
            config.control.pos_p = v;
        }
        if let Some(v) = self.control.pos_d {
            config.control.pos_d = v;
        }
        if let Some(v) = self.control.att_p {
            config.control.att_p = v;
        }
        if let Some(v) = self.control.att_d {
            config.control.att_d = v;
        }
        if let Some(v) = self.allocation.d {
            config.allocation_weights = v;
        }

        let noise = &mut config.sensor_noise;
        if let Some(v) = self.ekf.sigma_pos {
            noise.sigma_pos = v;
        }
        if let Some(v) = self.ekf.sigma_att_deg {
            noise.sigma_att = v.to_radians();
        }
        if let Some(v) = self.ekf.sigma_vel {
            noise.sigma_vel = v;
        }
        if let Some(v) = self.ekf.sigma_rate_deg {
            noise.sigma_rate = v.to_radians();
        }
        let frozen_q = config.ekf;
        config.ekf = aerowrench_core::params::EkfNoise::from_sensor_noise(&config.sensor_noise);
        config.ekf.q_eta_dd = frozen_q.q_eta_dd;
        config.ekf.q_wrench = frozen_q.q_wrench;
        if let Some(v) = self.ekf.q_accel {
            config.ekf.q_eta_dd = Vec6::repeat(v);
        }
        if let Some(v) = self.ekf.q_wrench_force {
            for c in 0..3 {
                config.ekf.q_wrench[c] = v;
            }
        }
        if let Some(v) = self.ekf.q_wrench_torque {
            for c in 3..6 {
                config.ekf.q_wrench[c] = v;
            }
        }

        let env = &mut config.envelope;
        if let Some(v) = self.envelope.phi_max_deg {
            env.phi_max = v.to_radians();
        }
        if let Some(v) = self.envelope.theta_max_deg {
            env.theta_max = v.to_radians();
        }
        if let Some(v) = self.envelope.rate_max {
            env.rate_max = v;
        }
        if let Some(v) = self.envelope.grid {
            env.grid_n = v;
        }
        if let Some(v) = self.envelope.epsilon {
            env.epsilon = v;
        }

        config
            .validate()
            .map_err(|e| anyhow::anyhow!("invalid parameter document: {e}"))?;
        Ok(config)
    }
}

/// Loads a configuration: embedded defaults when `path` is `None`, otherwise
/// the JSON document overlaid on the defaults.
pub fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read params file {}", p.display()))?;
            let doc: ParamsDoc = serde_json::from_str(&text)
                .with_context(|| format!("cannot parse params file {}", p.display()))?;
            doc.into_config()
        }
    }
}
