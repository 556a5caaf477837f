//! Radial ground states of `-ΔU = f(U)` and the quantities built from them.

mod constants;
pub mod kernels;
mod shooting;
mod spectrum;
mod tail;

use std::io::Write;
use std::path::Path;

use serde::Serialize;

pub use constants::{constant_d, constant_e, ibp_check, ConstantE, ConstantsD};
pub use kernels::{kernel_k, kernel_vstar, kernel_vstar_derivative, KernelConstants};
pub use shooting::{shoot_ground_state, ShootingOptions};
pub use spectrum::{free_spectrum, nondegeneracy, radial_mode, radial_spectrum, NondegeneracyReport};
pub use tail::{fit_tail_amplitude, TailFit};

use crate::error::Result;
use crate::nonlin::Nonlinearity;

/// Ground state sampled at `r_i = i h`, `0 ≤ r_i ≤ r_max`.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub d: usize,
    pub h: f64,
    pub r_max: f64,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Tail amplitude `A` in `U ~ A r^{-(d-1)/2} e^{-r}`.
    pub amplitude: f64,
    pub fit_window: (f64, f64),
    pub fit_residual: f64,
    /// Radius beyond which the profile comes from the backward tail solve.
    pub matching_radius: f64,
    /// Largest ODE residual measured with a fourth-order stencil.
    pub ode_residual: f64,
    pub nl: Nonlinearity,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    d: usize,
    h: f64,
    r_max: f64,
    u0: f64,
    amplitude: f64,
    fit_window: [f64; 2],
    fit_residual: f64,
    matching_radius: f64,
    ode_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

impl RadialProfile {
    pub fn u0(&self) -> f64 {
        self.u[0]
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn radius(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// `U''` from the equation itself.
    pub fn second_derivative_at(&self, r: f64, u: f64, du: f64) -> f64 {
        if r == 0.0 {
            -self.nl.f(u) / self.d as f64
        } else {
            -(self.d as f64 - 1.0) / r * du - self.nl.f(u)
        }
    }

    /// Asymptotic tail `A r^{-(d-1)/2} e^{-r}`.
    pub fn asymptotic(&self, r: f64) -> f64 {
        self.amplitude * r.powf(-(self.d as f64 - 1.0) / 2.0) * (-r).exp()
    }

    /// `(U, U')` at any `r ≥ 0` (cubic Hermite inside the grid, asymptotic tail beyond).
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let r = r.abs();
        if r >= self.r_max {
            let v = self.asymptotic(r);
            let dv = -v * (1.0 + (self.d as f64 - 1.0) / (2.0 * r));
            return (v, dv);
        }
        let s = r / self.h;
        let i = (s.floor() as usize).min(self.u.len() - 2);
        let t = s - i as f64;
        let (y0, y1) = (self.u[i], self.u[i + 1]);
        let (m0, m1) = (self.du[i] * self.h, self.du[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / self.h;
        (v, dv)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// `r,U,dU` rows.
    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        writeln!(out, "r,U,dU").expect("in-memory write");
        for i in 0..self.u.len() {
            writeln!(out, "{:.6},{:.17e},{:.17e}", self.radius(i), self.u[i], self.du[i]).expect("in-memory write");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::report::write_atomic(path, &self.to_csv_bytes())
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::to_value(Sidecar {
            d: self.d,
            h: self.h,
            r_max: self.r_max,
            u0: self.u0(),
            amplitude: self.amplitude,
            fit_window: [self.fit_window.0, self.fit_window.1],
            fit_residual: self.fit_residual,
            matching_radius: self.matching_radius,
            ode_residual: self.ode_residual,
            note: None,
        })
        .expect("plain data")
    }
}
