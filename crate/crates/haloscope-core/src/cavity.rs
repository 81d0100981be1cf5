//! Transient cavity channel: transmissivity, the dimensionless accumulation
//! gain of the narrowband drive, effective added occupation, and assembly of
//! the pre-measurement Gaussian state for each source.
//!
//! Everything is expressed in the dimensionless groups ΓT, Γτ_A and ω_Aτ_A
//! with the drive coherence time τ_A = 1 internally. The squared coupling
//! prefactor (γ_Aτ_A)² multiplies every Fisher quantity and is applied at the
//! reporting layer only.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{
    apply_loss, apply_symplectic, GaussianState, SymplecticOp, ThermalLossChannel,
};
use crate::numerics::exp_dd2;

/// Dimensionless cavity configuration.
///
/// The weak-coupling assumption γ_A ≪ γ_B is the caller's responsibility; it
/// is documented, not enforced.
#[derive(Debug, Clone, Copy)]
pub struct CavityParams {
    /// Γτ_A, cavity linewidth in units of the drive coherence rate. Must be > 0.
    pub gamma_tau: f64,
    /// Γ_idler·τ_A, idler storage linewidth. Zero means a perfect idler.
    pub gamma_idler_tau: f64,
    /// Thermal background occupation N_T ≥ 0.
    pub n_t: f64,
    /// γ_A·τ_A. Enters Fisher quantities only squared, as an overall factor,
    /// and linearly in the input-output scan-rate denominator.
    pub coupling_prefactor: f64,
}

impl CavityParams {
    pub fn new(gamma_tau: f64, gamma_idler_tau: f64, n_t: f64, coupling_prefactor: f64) -> Result<Self> {
        if !(gamma_tau > 0.0) || !gamma_tau.is_finite() {
            return Err(Error::Domain(format!("gamma_tau must be positive, got {gamma_tau}")));
        }
        if !(gamma_idler_tau >= 0.0) || !gamma_idler_tau.is_finite() {
            return Err(Error::Domain("gamma_idler_tau must be nonnegative".into()));
        }
        if !(n_t >= 0.0) || !n_t.is_finite() {
            return Err(Error::Domain("n_t must be nonnegative".into()));
        }
        if !(coupling_prefactor > 0.0) || !coupling_prefactor.is_finite() {
            return Err(Error::Domain("coupling_prefactor must be positive".into()));
        }
        Ok(CavityParams {
            gamma_tau,
            gamma_idler_tau,
            n_t,
            coupling_prefactor,
        })
    }
}

/// Narrowband drive configuration.
#[derive(Debug, Clone, Copy)]
pub struct AxionParams {
    /// ω_A·τ_A, detuning from cavity resonance. May be negative.
    pub detuning_tau: f64,
    /// Mean per-mode occupation N_A ≥ 0.
    pub n_a: f64,
}

impl AxionParams {
    pub fn new(detuning_tau: f64, n_a: f64) -> Result<Self> {
        if !detuning_tau.is_finite() || !n_a.is_finite() {
            return Err(Error::Domain("axion parameters must be finite".into()));
        }
        Ok(AxionParams { detuning_tau, n_a })
    }

    pub fn resonant(n_a: f64) -> Self {
        AxionParams {
            detuning_tau: 0.0,
            n_a,
        }
    }
}

/// Source preparation choice. For the two-mode source the gain is the
/// per-mode variance amplification of the seed (each local quadrature
/// variance is multiplied by G), analogous to the single-mode squeezer
/// amplifying its anti-squeezed quadrature variance by G; the corresponding
/// joint-quadrature gain is G + √(G²−1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSpec {
    Vacuum,
    Smss { gain: f64 },
    Tmss { gain: f64 },
}

impl SourceSpec {
    pub fn gain(&self) -> f64 {
        match self {
            SourceSpec::Vacuum => 1.0,
            SourceSpec::Smss { gain } | SourceSpec::Tmss { gain } => *gain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.gain();
        if !(g >= 1.0) || !g.is_finite() {
            return Err(Error::Domain(format!("source gain must be >= 1, got {g}")));
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        match self {
            SourceSpec::Tmss { .. } => 2,
            _ => 1,
        }
    }
}

/// Joint-quadrature gain of the two-mode squeezer realising a two-mode
/// source of per-mode gain G: e^{2r} = G + √(G²−1) = G + √((G−1)(G+1)).
pub fn tmss_quadrature_gain(gain: f64) -> f64 {
    gain + ((gain - 1.0) * (gain + 1.0)).sqrt()
}

/// Cavity transmissivity e^{−ΓT} as a function of the dimensionless time ΓT.
pub fn transmissivity(t_norm: f64) -> Result<f64> {
    if t_norm < 0.0 || !t_norm.is_finite() {
        return Err(Error::Domain(format!("ΓT must be nonnegative, got {t_norm}")));
    }
    Ok((-t_norm).exp())
}

/// Dimensionless accumulation gain g(T, Γ, ω_A) of the random-phase drive,
/// with τ_A = 1: the mean occupation collected by the temporally matched
/// cavity mode is N_A·g.
///
/// Computed as a second divided difference of exp over the nodes
/// {0, (Γ/2 − 1/τ_A + iω_A)T, ΓT}, which is exact and free of the removable
/// singularities (Γτ_A = 2, small T) that plague the expanded closed form:
/// g = 2ΓT²·Re exp[0, zT, ΓT] / (e^{ΓT} − 1).
pub fn axion_gain_g(t: f64, cavity: &CavityParams, detuning_tau: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("accumulation time must be positive, got {t}")));
    }
    let gamma = cavity.gamma_tau;
    let u = gamma * t;
    let v = Complex64::new(0.5 * gamma - 1.0, detuning_tau) * t;
    let dd = exp_dd2(Complex64::new(0.0, 0.0), v, Complex64::new(u, 0.0));
    // 2 Γ T² / (e^u - 1) = 2 T / ((e^u-1)/u) = 2 T / u·expm1-ratio
    let ratio = if u > 1e-3 {
        u.exp_m1() / u
    } else {
        1.0 + u / 2.0 + u * u / 6.0 + u * u * u / 24.0
    };
    Ok(2.0 * t * dd.re / ratio)
}

/// Effective drive occupation mixed into the cavity mode after time T:
/// (γ_A/Γ)(1 − e^{−ΓT})·N_A·g(T).
pub fn n_a_eff(t: f64, cavity: &CavityParams, axion: &AxionParams) -> Result<f64> {
    Ok(axion.n_a * d_n_a_eff(t, cavity, axion.detuning_tau)?)
}

/// ∂ n_A^eff / ∂ N_A, independent of N_A (the channel is affine in N_A).
pub fn d_n_a_eff(t: f64, cavity: &CavityParams, detuning_tau: f64) -> Result<f64> {
    let g = axion_gain_g(t, cavity, detuning_tau)?;
    let one_minus_eta = -(-cavity.gamma_tau * t).exp_m1();
    Ok(cavity.coupling_prefactor / cavity.gamma_tau * one_minus_eta * g)
}

/// Same derivative with the coupling prefactor normalised out; all Fisher
/// quantities in this crate are reported in units of (γ_Aτ_A)².
pub fn d_n_a_eff_normalized(t: f64, cavity: &CavityParams, detuning_tau: f64) -> Result<f64> {
    let g = axion_gain_g(t, cavity, detuning_tau)?;
    let one_minus_eta = -(-cavity.gamma_tau * t).exp_m1();
    Ok(one_minus_eta / cavity.gamma_tau * g)
}

/// Pre-measurement state for a source, accumulation time T (units of τ_A)
/// and drive parameters. The drive enters as classical additive noise of
/// mean (γ_A/Γ)(1−η)N_A·g on the signal leg; for the two-mode source the
/// idler leg passes through its own storage loss at the same environment
/// temperature.
pub fn output_state(
    source: &SourceSpec,
    t: f64,
    cavity: &CavityParams,
    axion: &AxionParams,
) -> Result<GaussianState> {
    source.validate()?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("accumulation time must be positive, got {t}")));
    }
    let n_add = n_a_eff(t, cavity, axion)?;
    output_state_with_added_noise(source, t, cavity, n_add)
}

/// Same as [`output_state`] but with the additive signal noise supplied
/// directly. This is the building block for parameter families: the added
/// occupation may be an off-physical probe value.
pub fn output_state_with_added_noise(
    source: &SourceSpec,
    t: f64,
    cavity: &CavityParams,
    n_add: f64,
) -> Result<GaussianState> {
    let eta = transmissivity(cavity.gamma_tau * t)?;
    let seed = GaussianState::thermal(source.n_modes(), cavity.n_t);
    let prepared = match source {
        SourceSpec::Vacuum => seed,
        SourceSpec::Smss { gain } => {
            let op = SymplecticOp::squeezer(*gain)?;
            apply_symplectic(&seed, &op, &[0])?
        }
        SourceSpec::Tmss { gain } => {
            let op = SymplecticOp::two_mode_squeezer(tmss_quadrature_gain(*gain))?;
            apply_symplectic(&seed, &op, &[0, 1])?
        }
    };
    // signal leg: thermal loss with the drive as extra classical noise
    let mut out = {
        let ch = ThermalLossChannel {
            eta,
            n_env: cavity.n_t,
            n_add,
        };
        apply_loss(&prepared, &ch, 0)?
    };
    if source.n_modes() == 2 {
        let eta_idler = transmissivity(cavity.gamma_idler_tau * t)?;
        let ch = ThermalLossChannel {
            eta: eta_idler,
            n_env: cavity.n_t,
            n_add: 0.0,
        };
        out = apply_loss(&out, &ch, 1)?;
    }
    Ok(out)
}
