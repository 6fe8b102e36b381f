//! Second-order effective exchange model between `|01>` and `|10>`.
//!
//! Eliminating the detuned chain gives, on the basis `(|01>, |10>)`,
//!
//! ```text
//! H_eff = [[ -Omega2^2 S_loc,        -Omega1 Omega2 S_x ],
//!          [ -Omega1 Omega2 S_x,     -Omega1^2 S_loc    ]]
//! ```
//!
//! with `S_x = sum_k f_k^1 f_k^M / E_k` and `S_loc = sum_k |f_k^1|^2 / E_k`
//! of the `(N+2)`-site chain. Both sums are independent of `N` beyond its
//! parity (see [`crate::lattice::closed_form_sums`]). Under the drive
//! condition `(-1)^((N-1)/2) Omega1 = Omega2 = Omega` the exchange and the
//! Stark shifts have equal magnitude `Omega^2 / (2 Delta)`, and evolving
//! `|01>` for `T = pi Delta / (2 Omega^2)` realises sqrt(swap).

use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::ModelParams;
use crate::lattice::{closed_form_sums, ChainSpec};

type C64 = Complex64;

/// Signed effective couplings. `stark1` shifts `|10>` (first atom in `|1>`),
/// `stark2` shifts `|01>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveModel {
    pub coupling: f64,
    pub stark1: f64,
    pub stark2: f64,
    pub n_cavities: usize,
}

impl EffectiveModel {
    /// 2x2 generator on `(|01>, |10>)`.
    pub fn hamiltonian(&self) -> [[f64; 2]; 2] {
        [[self.stark2, self.coupling], [self.coupling, self.stark1]]
    }
}

/// Effective couplings from the closed-form chain sums. Requires `g = J`.
pub fn build_effective(params: &ModelParams) -> Result<EffectiveModel> {
    if params.delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    if params.g != params.j {
        return Err(Error::InvalidParams(format!(
            "effective model needs g = J (got g = {}, J = {})",
            params.g, params.j
        )));
    }
    let chain = ChainSpec::symmetric(params.n_cavities + 2, params.j, params.delta)?;
    let sums = closed_form_sums(&chain)?;
    let (o1, o2) = (params.omega1, params.omega2);
    Ok(EffectiveModel {
        coupling: -o1 * o2 * sums.cross,
        stark1: -o1 * o1 * sums.local_first,
        stark2: -o2 * o2 * sums.local_last,
        n_cavities: params.n_cavities,
    })
}

/// Gate duration `T = pi |Delta| / (2 Omega^2)`; needs `|Omega1| = |Omega2|`.
/// Does not depend on the number of cavities.
pub fn gate_time(params: &ModelParams) -> Result<f64> {
    let (a, b) = (params.omega1.abs(), params.omega2.abs());
    if (a - b).abs() > 1e-12 || a == 0.0 {
        return Err(Error::ConditionViolated { omega1: a, omega2: b });
    }
    if params.delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    Ok(PI * params.delta.abs() / (2.0 * a * b))
}

/// Closed-form `exp(-i H_eff t)` applied to `(amp01, amp10)`.
pub fn evolve_effective(model: &EffectiveModel, amp01: C64, amp10: C64, t: f64) -> (C64, C64) {
    let [[h00, h01], [_, h11]] = model.hamiltonian();
    let mean = 0.5 * (h00 + h11);
    let half_split = 0.5 * (h00 - h11);
    let omega = half_split.hypot(h01);
    let (cos, sinc) = if omega == 0.0 { (1.0, t) } else { ((omega * t).cos(), (omega * t).sin() / omega) };
    let phase = C64::from_polar(1.0, -mean * t);
    let i = C64::i();
    let u00 = cos - i * sinc * half_split;
    let u11 = cos + i * sinc * half_split;
    let u01 = -i * sinc * h01;
    (phase * (u00 * amp01 + u01 * amp10), phase * (u01 * amp01 + u11 * amp10))
}

/// 4x4 unitary on `(|00>, |01>, |10>, |11>)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitUnitary(pub Matrix4<C64>);

impl TwoQubitUnitary {
    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn unitarity_error(&self) -> f64 {
        (self.0.adjoint() * self.0 - Matrix4::identity()).norm()
    }

    pub fn swap() -> Self {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 2)] = C64::new(1.0, 0.0);
        m[(2, 1)] = C64::new(1.0, 0.0);
        m[(3, 3)] = C64::new(1.0, 0.0);
        Self(m)
    }
}

/// Identity on `|00>`, `|11>`; `[[(1+i)/2, (1-i)/2], [(1-i)/2, (1+i)/2]]` on
/// `(|01>, |10>)`.
pub fn ideal_sqrt_swap() -> TwoQubitUnitary {
    let p = C64::new(0.5, 0.5);
    let q = C64::new(0.5, -0.5);
    let one = C64::new(1.0, 0.0);
    let mut m = Matrix4::zeros();
    m[(0, 0)] = one;
    m[(1, 1)] = p;
    m[(1, 2)] = q;
    m[(2, 1)] = q;
    m[(2, 2)] = p;
    m[(3, 3)] = one;
    TwoQubitUnitary(m)
}
