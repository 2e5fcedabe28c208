//! Gaussian phase-space transport under scale-invariant evolution and
//! δ-kicks.
//!
//! Single-mode (one spatial axis) only: the isotropic D-dimensional case
//! factorizes per axis. States are zero-mean Gaussian Wigner functions
//! stored as covariance matrices. Maps use the *forward* convention,
//! Σ → FΣFᵀ; the pullback matrices (arguments of W₀) are their inverses.

use thiserror::Error;

use crate::ermakov::ScalingState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseSpaceError {
    #[error("covariance matrix is not positive definite (σ_rr = {sigma_rr}, σ_rp = {sigma_rp}, σ_pp = {sigma_pp})")]
    Degenerate {
        sigma_rr: f64,
        sigma_rp: f64,
        sigma_pp: f64,
    },
    #[error("covariance violates the uncertainty bound det Σ >= 1/4: det = {det}")]
    SubHeisenberg { det: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}

/// 2×2 real symplectic matrix acting on (r, p), unit determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SymplecticMap {
    pub fn identity() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Validating constructor for externally supplied entries.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, PhaseSpaceError> {
        let m = Self { a, b, c, d };
        if (m.det() - 1.0).abs() > 1e-12 {
            return Err(PhaseSpaceError::Domain(format!(
                "matrix is not symplectic: det = {}",
                m.det()
            )));
        }
        Ok(m)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, r: f64, p: f64) -> (f64, f64) {
        (self.a * r + self.b * p, self.c * r + self.d * p)
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn after(&self, rhs: &SymplecticMap) -> SymplecticMap {
        SymplecticMap {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn inverse(&self) -> SymplecticMap {
        // For det = 1: inv = (d, -b; -c, a).
        SymplecticMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }
}

/// Forward map of a scale-invariant evolution that has reached (b, ḃ)
/// from an initially stationary state: F = (b, 0; ḃ, 1/b) with m = 1, so
/// that Σ_t = FΣ₀Fᵀ. Its inverse is the pullback matrix
/// (1/b, 0; −ḃ, b) appearing in W_t(r, p) = W₀(r/b, bp − ḃr).
///
/// Only valid as the transport of states stationary in the reference
/// trap at t = 0 (thermal or vacuum at ω₀): those are the states whose
/// evolution is exhausted by the scaling pair (b, ḃ).
pub fn map_scale_invariant(b: f64, b_dot: f64) -> SymplecticMap {
    debug_assert!(b > 0.0);
    SymplecticMap {
        a: b,
        b: 0.0,
        c: b_dot,
        d: 1.0 / b,
    }
}

/// Forward map from a scaling state, see [`map_scale_invariant`].
pub fn map_from_scaling_state(state: &ScalingState) -> SymplecticMap {
    map_scale_invariant(state.b, state.b_dot)
}

/// Forward shear of a δ-kick of strength κ: p → p − κr (m = 1), matrix
/// (1, 0; −κ, 1).
pub fn map_delta_kick(kappa: f64) -> SymplecticMap {
    SymplecticMap {
        a: 1.0,
        b: 0.0,
        c: -kappa,
        d: 1.0,
    }
}

/// Product of maps in application order: the first entry acts first
/// (i.e. it is the rightmost factor).
pub fn compose(maps: &[SymplecticMap]) -> Result<SymplecticMap, PhaseSpaceError> {
    let Some(first) = maps.first() else {
        return Err(PhaseSpaceError::Domain(
            "compose needs at least one map".into(),
        ));
    };
    let mut acc = *first;
    for m in &maps[1..] {
        acc = m.after(&acc);
    }
    Ok(acc)
}

/// Zero-mean Gaussian Wigner state: the covariance triple
/// (σ_rr, σ_rp, σ_pp) in natural units ħ = m = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub sigma_rr: f64,
    pub sigma_rp: f64,
    pub sigma_pp: f64,
}

impl GaussianState {
    /// Validates positive definiteness and the uncertainty bound
    /// det Σ ≥ 1/4 (with a 1e-9 relative rounding allowance).
    pub fn new(sigma_rr: f64, sigma_rp: f64, sigma_pp: f64) -> Result<Self, PhaseSpaceError> {
        let s = Self {
            sigma_rr,
            sigma_rp,
            sigma_pp,
        };
        if !(sigma_rr > 0.0 && sigma_pp > 0.0 && s.det() > 0.0)
            || !s.det().is_finite()
        {
            return Err(PhaseSpaceError::Degenerate {
                sigma_rr,
                sigma_rp,
                sigma_pp,
            });
        }
        if s.det() < 0.25 * (1.0 - 1e-9) {
            return Err(PhaseSpaceError::SubHeisenberg { det: s.det() });
        }
        Ok(s)
    }

    pub fn det(&self) -> f64 {
        self.sigma_rr * self.sigma_pp - self.sigma_rp * self.sigma_rp
    }

    /// Ground state of a trap of frequency ω: σ_rr = 1/(2ω), σ_pp = ω/2.
    pub fn vacuum(omega: f64) -> Self {
        Self {
            sigma_rr: 1.0 / (2.0 * omega),
            sigma_rp: 0.0,
            sigma_pp: omega / 2.0,
        }
    }
}

/// coth via expm1, stable for large arguments.
fn coth(x: f64) -> f64 {
    1.0 + 2.0 / (2.0 * x).exp_m1()
}

/// Thermal Wigner state of a harmonic oscillator at inverse temperature
/// β: σ_rr = coth(βω/2)/(2ω), σ_pp = (ω/2)coth(βω/2), σ_rp = 0.
pub fn thermal_state(beta: f64, omega: f64) -> Result<GaussianState, PhaseSpaceError> {
    if !(beta > 0.0 && omega > 0.0) {
        return Err(PhaseSpaceError::Domain(format!(
            "thermal state needs beta > 0 and omega > 0, got beta = {beta}, omega = {omega}"
        )));
    }
    let c = coth(0.5 * beta * omega);
    GaussianState::new(c / (2.0 * omega), 0.0, 0.5 * omega * c)
}

/// Covariance transport Σ → FΣFᵀ. Phase-space density (det Σ) is
/// preserved because det F = 1.
pub fn evolve(state: &GaussianState, map: &SymplecticMap) -> Result<GaussianState, PhaseSpaceError> {
    let (a, b, c, d) = (map.a, map.b, map.c, map.d);
    let rr = a * a * state.sigma_rr + 2.0 * a * b * state.sigma_rp + b * b * state.sigma_pp;
    let rp = a * c * state.sigma_rr + (a * d + b * c) * state.sigma_rp + b * d * state.sigma_pp;
    let pp = c * c * state.sigma_rr + 2.0 * c * d * state.sigma_rp + d * d * state.sigma_pp;
    if !(rr > 0.0 && pp > 0.0 && rr * pp - rp * rp > 0.0) {
        return Err(PhaseSpaceError::Degenerate {
            sigma_rr: rr,
            sigma_rp: rp,
            sigma_pp: pp,
        });
    }
    Ok(GaussianState {
        sigma_rr: rr,
        sigma_rp: rp,
        sigma_pp: pp,
    })
}

/// Position width, momentum width, and their product:
/// (√σ_rr, √σ_pp, √(σ_rr·σ_pp)).
pub fn widths(state: &GaussianState) -> (f64, f64, f64) {
    let dr = state.sigma_rr.sqrt();
    let dp = state.sigma_pp.sqrt();
    (dr, dp, dr * dp)
}

/// Uncertainty product after scale-invariant evolution of an initially
/// uncorrelated state: ΔR(t)ΔP(t) = ΔR(0)√(ΔP(0)² + b²ḃ²ΔR(0)²). Must
/// match [`widths`] of [`evolve`] exactly for σ_rp(0) = 0 inputs.
pub fn uncertainty_product_closed_form(initial: &GaussianState, b: f64, b_dot: f64) -> f64 {
    debug_assert_eq!(initial.sigma_rp, 0.0);
    let dr0_sq = initial.sigma_rr;
    let dp0_sq = initial.sigma_pp;
    (dr0_sq * (dp0_sq + b * b * b_dot * b_dot * dr0_sq)).sqrt()
}

/// Rectangular sampling of the Gaussian Wigner function
/// W(r, p) = exp(−½ xᵀΣ⁻¹x)/(2π√det Σ).
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub r_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// Row-major: `values[i * p_axis.len() + j] = W(r_axis[i], p_axis[j])`.
    pub values: Vec<f64>,
    pub det_sigma: f64,
}

impl WignerGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p_axis.len() + j]
    }

    /// Trapezoid integral over the sampled window; approaches 1 for a
    /// window of a few σ.
    pub fn integral(&self) -> f64 {
        let nr = self.r_axis.len();
        let np = self.p_axis.len();
        let dr = (self.r_axis[nr - 1] - self.r_axis[0]) / (nr - 1) as f64;
        let dp = (self.p_axis[np - 1] - self.p_axis[0]) / (np - 1) as f64;
        let mut sum = 0.0;
        for i in 0..nr {
            let wi = if i == 0 || i == nr - 1 { 0.5 } else { 1.0 };
            for j in 0..np {
                let wj = if j == 0 || j == np - 1 { 0.5 } else { 1.0 };
                sum += wi * wj * self.value(i, j);
            }
        }
        sum * dr * dp
    }

    /// Position marginal by trapezoid integration over p.
    pub fn marginal_r(&self) -> Vec<f64> {
        let np = self.p_axis.len();
        let dp = (self.p_axis[np - 1] - self.p_axis[0]) / (np - 1) as f64;
        self.r_axis
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let mut s = 0.0;
                for j in 0..np {
                    let w = if j == 0 || j == np - 1 { 0.5 } else { 1.0 };
                    s += w * self.value(i, j);
                }
                s * dp
            })
            .collect()
    }

    /// Momentum marginal by trapezoid integration over r.
    pub fn marginal_p(&self) -> Vec<f64> {
        let nr = self.r_axis.len();
        let dr = (self.r_axis[nr - 1] - self.r_axis[0]) / (nr - 1) as f64;
        (0..self.p_axis.len())
            .map(|j| {
                let mut s = 0.0;
                for i in 0..nr {
                    let w = if i == 0 || i == nr - 1 { 0.5 } else { 1.0 };
                    s += w * self.value(i, j);
                }
                s * dr
            })
            .collect()
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Sample W over `r_range × p_range` at the given per-axis resolution
/// (at least 2 points per axis).
pub fn wigner_grid(
    state: &GaussianState,
    r_range: (f64, f64),
    p_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<WignerGrid, PhaseSpaceError> {
    let det = state.det();
    if !(det > 0.0) || !det.is_finite() {
        return Err(PhaseSpaceError::Degenerate {
            sigma_rr: state.sigma_rr,
            sigma_rp: state.sigma_rp,
            sigma_pp: state.sigma_pp,
        });
    }
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(PhaseSpaceError::Domain(format!(
            "grid resolution must be at least 2 per axis, got {resolution:?}"
        )));
    }
    if !(r_range.1 > r_range.0) || !(p_range.1 > p_range.0) {
        return Err(PhaseSpaceError::Domain(
            "grid ranges must have positive extent".into(),
        ));
    }
    let r_axis = linspace(r_range.0, r_range.1, resolution.0);
    let p_axis = linspace(p_range.0, p_range.1, resolution.1);
    let norm = 1.0 / (std::f64::consts::TAU * det.sqrt());
    // Σ⁻¹ = (σ_pp, −σ_rp; −σ_rp, σ_rr)/det.
    let mut values = Vec::with_capacity(resolution.0 * resolution.1);
    for &r in &r_axis {
        for &p in &p_axis {
            let q = (state.sigma_pp * r * r - 2.0 * state.sigma_rp * r * p
                + state.sigma_rr * p * p)
                / det;
            values.push(norm * (-0.5 * q).exp());
        }
    }
    Ok(WignerGrid {
        r_axis,
        p_axis,
        values,
        det_sigma: det,
    })
}
