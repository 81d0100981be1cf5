//! Measurement models: Gaussian homodyne/heterodyne/Bell readouts, nulling
//! receivers (anti-squeezing followed by photon counting), and the
//! fixed-amplitude random-phase model used to validate the Gaussian
//! approximation of the drive.

pub mod fock;
mod pmf;

pub use pmf::{marian_pn, marian_pn_adaptive, total_count_distribution, PhotonDistribution};

use num_complex::Complex64;

use crate::cavity::{
    d_n_a_eff_normalized, output_state_with_added_noise, tmss_quadrature_gain, AxionParams,
    CavityParams, SourceSpec,
};
use crate::error::{Error, Result};
use crate::gaussian::{apply_loss, apply_symplectic, cfi_gaussian_readout, GaussianState, SymplecticOp, ThermalLossChannel};
use pmf::{pmf_from_series, SeriesParams};

/// Nulling-receiver configuration. For the two-mode source the gain is in
/// the same per-mode variance convention as [`SourceSpec::Tmss`].
#[derive(Debug, Clone, Copy)]
pub struct NullingConfig {
    pub antisqueeze_gain: f64,
    /// Count the idler as well (the idler detector is optional; when set the
    /// returned distribution is of the total photon number).
    pub count_idler: bool,
}

/// Hard cap and tail target of the adaptive photon cutoff.
const TAIL_TARGET: f64 = 1e-10;
const HARD_CAP: usize = 4096;

/// Anti-squeezing gain that makes the counted state diagonal in the photon
/// number basis at the null hypothesis: isotropic covariance for one mode,
/// vanishing cross-correlations (a product of thermals) for two modes.
/// Returns 1 for an already isotropic state.
pub fn choose_antisqueeze_gain(state_at_null: &GaussianState) -> Result<f64> {
    match state_at_null.n_modes {
        1 => {
            let vqq = state_at_null.cov[(0, 0)];
            let vpp = state_at_null.cov[(1, 1)];
            if state_at_null.cov[(0, 1)].abs() > 1e-9 * vqq.abs().max(vpp.abs()) {
                return Err(Error::Config(
                    "nulling expects the squeezing axes aligned with (q, p)".into(),
                ));
            }
            let ratio = vqq / vpp;
            if (ratio - 1.0).abs() < 1e-12 {
                return Ok(1.0);
            }
            if ratio < 1.0 {
                return Err(Error::Config(
                    "state is anti-squeezed in p; rotate before nulling".into(),
                ));
            }
            Ok(ratio.sqrt())
        }
        2 => {
            let a = state_at_null.cov[(0, 0)];
            let b = state_at_null.cov[(2, 2)];
            let c = state_at_null.cov[(0, 2)];
            let t = 2.0 * c / (a + b);
            if t.abs() < 1e-14 {
                return Ok(1.0);
            }
            if t < 0.0 || t >= 1.0 {
                return Err(Error::Config(format!(
                    "cross-correlation ratio {t:.3e} outside the nulling range [0, 1)"
                )));
            }
            Ok(1.0 / (1.0 - t * t).sqrt())
        }
        _ => Err(Error::Config("nulling supports 1 or 2 modes".into())),
    }
}

fn counted_distribution(state: &GaussianState, cfg: &NullingConfig) -> Result<PhotonDistribution> {
    let nulled = match state.n_modes {
        1 => {
            if cfg.antisqueeze_gain > 1.0 {
                apply_symplectic(
                    state,
                    &SymplecticOp::squeezer_inverse(cfg.antisqueeze_gain)?,
                    &[0],
                )?
            } else {
                state.clone()
            }
        }
        2 => {
            if cfg.antisqueeze_gain > 1.0 {
                apply_symplectic(
                    state,
                    &SymplecticOp::two_mode_squeezer_inverse(tmss_quadrature_gain(
                        cfg.antisqueeze_gain,
                    ))?,
                    &[0, 1],
                )?
            } else {
                state.clone()
            }
        }
        _ => return Err(Error::Config("nulling supports 1 or 2 modes".into())),
    };
    if nulled.n_modes == 2 && cfg.count_idler {
        // joint counting reported as the total photon number
        let mean = nulled.mean_photons(0) + nulled.mean_photons(1);
        let n_max = ((mean + 10.0 * (mean + 1.0).sqrt()) as usize).clamp(32, HARD_CAP);
        return total_count_distribution(&nulled, n_max);
    }
    let counted = if nulled.n_modes == 2 {
        nulled.reduce(0)?
    } else {
        nulled
    };
    let (a, b, c) = counted.characteristic_params()?;
    marian_pn_adaptive(a, b, c, TAIL_TARGET, HARD_CAP)
}

/// Photon-counting distribution of the nulling receiver: anti-squeeze the
/// pre-measurement state, reduce to the counted mode(s) and expand in the
/// number basis.
pub fn nulling_distribution(
    source: &SourceSpec,
    t: f64,
    cavity: &CavityParams,
    axion: &AxionParams,
    cfg: &NullingConfig,
) -> Result<PhotonDistribution> {
    let state = crate::cavity::output_state(source, t, cavity, axion)?;
    counted_distribution(&state, cfg)
}

/// Classical Fisher information of a photon-counting family
/// θ ↦ distribution, by (one-sided at the θ ≥ 0 boundary) second-order
/// differences with a Richardson consistency check. All distributions must
/// share the same cutoff.
pub fn cfi_from_distribution<F>(family: F, theta0: f64, dtheta: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<PhotonDistribution>,
{
    if !(dtheta > 0.0) {
        return Err(Error::Domain("dtheta must be positive".into()));
    }
    let p0 = family(theta0)?;
    let n_max = p0.n_max;
    let fetch = |theta: f64| -> Result<Vec<f64>> {
        let d = family(theta)?;
        if d.n_max != n_max {
            return Err(Error::Config(
                "distribution family changed its cutoff between evaluations".into(),
            ));
        }
        Ok(d.pmf)
    };
    let one_sided = theta0 < dtheta;
    let deriv = |h: f64| -> Result<Vec<f64>> {
        if one_sided {
            let p1 = fetch(theta0 + h)?;
            let p2 = fetch(theta0 + 2.0 * h)?;
            Ok((0..=n_max)
                .map(|n| (-3.0 * p0.pmf[n] + 4.0 * p1[n] - p2[n]) / (2.0 * h))
                .collect())
        } else {
            let pp = fetch(theta0 + h)?;
            let pm = fetch(theta0 - h)?;
            Ok((0..=n_max).map(|n| (pp[n] - pm[n]) / (2.0 * h)).collect())
        }
    };
    let fisher = |d: &[f64]| -> f64 {
        d.iter()
            .zip(&p0.pmf)
            .filter(|(_, &p)| p > 1e-15)
            .map(|(dp, &p)| dp * dp / p)
            .sum()
    };
    let d1 = deriv(dtheta)?;
    let d2 = deriv(0.5 * dtheta)?;
    let d3 = deriv(0.25 * dtheta)?;
    let extr = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| (4.0 * y - x) / 3.0).collect()
    };
    let f1 = fisher(&extr(&d1, &d2));
    let f2 = fisher(&extr(&d2, &d3));
    let rel = (f1 - f2).abs() / f2.abs().max(1e-300);
    if rel > 1e-5 {
        return Err(Error::Instability(format!(
            "counting-FI derivative did not converge (rel change {rel:.3e})"
        )));
    }
    Ok(f2)
}

/// Build the counted distribution as a function of the drive occupation,
/// holding one shared photon cutoff across the family, and return the
/// Fisher information about N_A at the null hypothesis, normalised to units
/// of (γ_Aτ_A)².
pub fn nulling_cfi(
    source: &SourceSpec,
    t: f64,
    cavity: &CavityParams,
    cfg: &NullingConfig,
) -> Result<f64> {
    let kappa_g = d_n_a_eff_normalized(t, cavity, 0.0)?;
    // probe scale: drive occupation that adds ~0.1% of the noise floor
    let dtheta = 1e-3 * (cavity.n_t + 1e-4) / kappa_g.max(1e-300);
    // fix the cutoff from the largest probe
    let probe = counted_distribution(
        &output_state_with_added_noise(source, t, cavity, 2.0 * dtheta * kappa_g)?,
        cfg,
    )?;
    let n_max = probe.n_max;
    let family = |theta: f64| -> Result<PhotonDistribution> {
        let st = output_state_with_added_noise(source, t, cavity, theta * kappa_g)?;
        let nulled = match st.n_modes {
            1 => {
                if cfg.antisqueeze_gain > 1.0 {
                    apply_symplectic(&st, &SymplecticOp::squeezer_inverse(cfg.antisqueeze_gain)?, &[0])?
                } else {
                    st
                }
            }
            _ => {
                if cfg.antisqueeze_gain > 1.0 {
                    apply_symplectic(
                        &st,
                        &SymplecticOp::two_mode_squeezer_inverse(tmss_quadrature_gain(
                            cfg.antisqueeze_gain,
                        ))?,
                        &[0, 1],
                    )?
                } else {
                    st
                }
            }
        };
        if nulled.n_modes == 2 && cfg.count_idler {
            return total_count_distribution(&nulled, n_max);
        }
        let counted = if nulled.n_modes == 2 { nulled.reduce(0)? } else { nulled };
        let (a, b, c) = counted.characteristic_params()?;
        marian_pn(a, b, c, n_max)
    };
    cfi_from_distribution(family, 0.0, dtheta)
}

/// Quadrature selection for homodyne readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Q,
    P,
}

fn readout_step(t: f64, cavity: &CavityParams) -> Result<(f64, f64)> {
    let kappa_g = d_n_a_eff_normalized(t, cavity, 0.0)?;
    Ok((kappa_g, 1e-3 * (cavity.n_t + 0.5) / kappa_g.max(1e-300)))
}

/// Homodyne Fisher information about N_A at the null hypothesis for the
/// given source, measuring one quadrature of the signal mode. Units
/// (γ_Aτ_A)². The informative quadrature depends on the squeezing
/// orientation; evaluate both and take the max if unsure.
pub fn cfi_homodyne(
    source: &SourceSpec,
    t: f64,
    cavity: &CavityParams,
    axion: &AxionParams,
    quadrature: Quadrature,
) -> Result<f64> {
    let kappa_g = d_n_a_eff_normalized(t, cavity, axion.detuning_tau)?;
    let dtheta = 1e-3 * (cavity.n_t + 0.5) / kappa_g.max(1e-300);
    let idx = match quadrature {
        Quadrature::Q => 0,
        Quadrature::P => 1,
    };
    let src = *source;
    let cav = *cavity;
    let fam = move |theta: f64| {
        let st = output_state_with_added_noise(&src, t, &cav, theta * kappa_g)
            .expect("family construction is infallible for valid fixed parameters");
        (
            vec![st.mean[idx]],
            nalgebra::DMatrix::from_row_slice(1, 1, &[st.cov[(idx, idx)]]),
        )
    };
    cfi_gaussian_readout(&fam, axion.n_a, dtheta)
}

/// Best-of-both-quadratures homodyne FI.
pub fn cfi_homodyne_best(
    source: &SourceSpec,
    t: f64,
    cavity: &CavityParams,
    axion: &AxionParams,
) -> Result<f64> {
    let q = cfi_homodyne(source, t, cavity, axion, Quadrature::Q)?;
    let p = cfi_homodyne(source, t, cavity, axion, Quadrature::P)?;
    Ok(q.max(p))
}

/// Heterodyne Fisher information of the vacuum-source protocol: both
/// quadratures read out with an extra half vacuum unit on each.
pub fn cfi_heterodyne(t: f64, cavity: &CavityParams, axion: &AxionParams) -> Result<f64> {
    let (kappa_g, dtheta) = readout_step(t, cavity)?;
    let cav = *cavity;
    let fam = move |theta: f64| {
        let st = output_state_with_added_noise(&SourceSpec::Vacuum, t, &cav, theta * kappa_g)
            .expect("family construction is infallible for valid fixed parameters");
        let mut sig = st.cov.clone();
        sig[(0, 0)] += 0.5;
        sig[(1, 1)] += 0.5;
        (st.mean.clone(), sig)
    };
    cfi_gaussian_readout(&fam, axion.n_a, dtheta)
}

/// Bell readout of the two-mode source: balanced beamsplitter followed by
/// homodyne of q on one port and p on the other.
pub fn cfi_bell(t: f64, cavity: &CavityParams, axion: &AxionParams, gain: f64) -> Result<f64> {
    let (kappa_g, dtheta) = readout_step(t, cavity)?;
    let cav = *cavity;
    let fam = move |theta: f64| {
        let st = output_state_with_added_noise(
            &SourceSpec::Tmss { gain },
            t,
            &cav,
            theta * kappa_g,
        )
        .expect("family construction is infallible for valid fixed parameters");
        let mixed = apply_symplectic(&st, &SymplecticOp::balanced_beamsplitter(), &[0, 1])
            .expect("beamsplitter application is infallible");
        let mean = vec![mixed.mean[0], mixed.mean[3]];
        let sig = nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[
                mixed.cov[(0, 0)],
                mixed.cov[(0, 3)],
                mixed.cov[(3, 0)],
                mixed.cov[(3, 3)],
            ],
        );
        (mean, sig)
    };
    cfi_gaussian_readout(&fam, axion.n_a, dtheta)
}

// ---------------------------------------------------------------------------
// Fixed-amplitude random-phase model (Gaussian-approximation validation)
// ---------------------------------------------------------------------------

/// Parameters of the fixed-amplitude model: a squeezed probe of mean photon
/// number `n_s` is displaced by α·e^{iφ}, passes a thermal-loss channel
/// (κ, n_b), is anti-squeezed with a squeezer of photon number `n_s2`
/// (n_s2 = n_s is the exact inverse) and finally photon-counted.
#[derive(Debug, Clone, Copy)]
pub struct PhaseModelParams {
    pub kappa: f64,
    pub n_b: f64,
    pub n_s: f64,
    pub alpha: f64,
    pub n_s2: f64,
}

impl PhaseModelParams {
    pub fn new(kappa: f64, n_b: f64, n_s: f64, alpha: f64) -> Result<Self> {
        let p = PhaseModelParams {
            kappa,
            n_b,
            n_s,
            alpha,
            n_s2: n_s,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::Domain(format!("kappa must be in (0,1], got {}", self.kappa)));
        }
        if self.n_b < 0.0 || self.n_s < 0.0 || self.alpha < 0.0 || self.n_s2 < 0.0 {
            return Err(Error::Domain(
                "n_b, n_s, n_s2 and alpha must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Quadrature gain of the squeezer holding `n_s` photons.
    pub fn squeezer_gain(n_s: f64) -> f64 {
        let root = n_s.sqrt() + (n_s + 1.0).sqrt();
        root * root
    }
}

/// Conditional photon-number distribution p(n | φ) of the fixed-amplitude
/// model, from the closed-form series parameters. The combination that
/// appears in the Hermite argument is kept multiplied by the series base so
/// the expression stays regular at the κ → 1 + 2n_b boundary.
pub fn phase_conditional_pn(
    params: &PhaseModelParams,
    phi: f64,
    n_max: usize,
) -> Result<PhotonDistribution> {
    params.validate()?;
    if (params.n_s2 - params.n_s).abs() > 1e-12 * params.n_s.max(1.0) {
        // tunable receiver squeezer: fall back to the Gaussian pipeline
        let st = phase_model_state(params, phi)?;
        let (a, b, c) = st.characteristic_params()?;
        return marian_pn(a, b, c, n_max);
    }
    let series = phase_series_params(params, phi)?;
    pmf_from_series(&series, n_max)
}

fn phase_series_params(params: &PhaseModelParams, phi: f64) -> Result<SeriesParams> {
    let k = params.kappa;
    let nb = params.n_b;
    let ns = params.n_s;
    let root_p = (ns * (ns + 1.0)).sqrt();
    let d = 2.0 * nb * ((k + 1.0) * ns + 1.0) + nb * nb + (1.0 - k * k) * ns + 1.0;
    if d <= 0.0 {
        return Err(Error::Domain("phase-model normalisation d must be positive".into()));
    }
    let zeta1 = (2.0 * k * nb * ns + nb * nb + nb + k * (1.0 - k) * ns) / d;
    let s = 2.0 * nb + 1.0 - k; // >= 0 inside the domain
    let c2 = root_p * s.max(0.0) / (2.0 * d);
    let bracket = Complex64::new(ns.sqrt() * (nb - k), 0.0)
        + Complex64::from_polar(1.0, 2.0 * phi) * ((ns + 1.0).sqrt() * (nb + 1.0));
    let y_hat = Complex64::from_polar(params.alpha * k.sqrt() / (2.0 * d), -phi) * bracket;
    let xi = params.alpha * params.alpha * k
        * (nb - (k + 1.0) * root_p * (2.0 * phi).cos() + k * ns + ns + 1.0)
        / d;
    Ok(SeriesParams {
        base: (-xi).exp() / d.sqrt(),
        a_tilde: zeta1.max(0.0),
        y_hat,
        c2,
    })
}

/// The conditional output state of the fixed-amplitude model, built from the
/// Gaussian toolbox (general receiver squeezer `n_s2`).
pub fn phase_model_state(params: &PhaseModelParams, phi: f64) -> Result<GaussianState> {
    let g_probe = PhaseModelParams::squeezer_gain(params.n_s);
    let mut st = GaussianState::vacuum(1);
    if g_probe > 1.0 {
        st = apply_symplectic(&st, &SymplecticOp::squeezer(g_probe)?, &[0])?;
    }
    // displacement by alpha e^{i phi}: mean_q += sqrt(2) alpha cos, mean_p += sqrt(2) alpha sin
    st.mean[0] += std::f64::consts::SQRT_2 * params.alpha * phi.cos();
    st.mean[1] += std::f64::consts::SQRT_2 * params.alpha * phi.sin();
    let ch = ThermalLossChannel::new(params.kappa, params.n_b, 0.0)?;
    st = apply_loss(&st, &ch, 0)?;
    let g_recv = PhaseModelParams::squeezer_gain(params.n_s2);
    if g_recv > 1.0 {
        st = apply_symplectic(&st, &SymplecticOp::squeezer_inverse(g_recv)?, &[0])?;
    }
    Ok(st)
}

/// φ-averaged photon distribution of the fixed-amplitude model. The
/// integrand has period π; a uniform trapezoid over the period is spectrally
/// accurate and the node count is doubled until the pmf stabilises below
/// 1e-8 per entry.
pub fn phase_averaged_pn(
    params: &PhaseModelParams,
    n_max: usize,
    n_phi: usize,
) -> Result<PhotonDistribution> {
    params.validate()?;
    if n_phi < 2 {
        return Err(Error::Domain("need at least two phase nodes".into()));
    }
    let average = |m: usize| -> Result<(Vec<f64>, f64)> {
        let mut acc = vec![0.0; n_max + 1];
        let mut tail = 0.0f64;
        for j in 0..m {
            let phi = std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
            let d = phase_conditional_pn(params, phi, n_max)?;
            for (s, p) in acc.iter_mut().zip(&d.pmf) {
                *s += p;
            }
            tail = tail.max(d.tail_bound);
        }
        for s in acc.iter_mut() {
            *s /= m as f64;
        }
        Ok((acc, tail))
    };
    let mut m = n_phi;
    let (mut pmf, _) = average(m)?;
    for _ in 0..8 {
        let (p2, tail) = average(2 * m)?;
        let diff = pmf
            .iter()
            .zip(&p2)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        pmf = p2;
        m *= 2;
        if diff < 1e-8 {
            return Ok(PhotonDistribution {
                pmf,
                n_max,
                tail_bound: tail,
            });
        }
    }
    Err(Error::Accuracy(
        "phase average did not stabilise while doubling the node count".into(),
    ))
}

/// Fisher information about the displacement amplitude α from the
/// unconditional (φ-averaged) photon distribution.
pub fn phase_averaged_fisher(params: &PhaseModelParams, n_max: usize, n_phi: usize) -> Result<f64> {
    params.validate()?;
    let at = |alpha: f64| -> Result<PhotonDistribution> {
        let mut p = *params;
        p.alpha = alpha;
        phase_averaged_pn(&p, n_max, n_phi)
    };
    let h = 1e-3 * params.alpha.max(0.05);
    let family = |alpha: f64| at(alpha.max(0.0));
    cfi_from_distribution(family, params.alpha, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cav(gamma_tau: f64, gamma_idler_tau: f64, nt: f64) -> CavityParams {
        CavityParams::new(gamma_tau, gamma_idler_tau, nt, 1.0).unwrap()
    }

    #[test]
    fn antisqueeze_gain_examples() {
        // lossless squeezed output: G* = G
        let g = 17.0;
        let st = apply_symplectic(
            &GaussianState::thermal(1, 0.02),
            &SymplecticOp::squeezer(g).unwrap(),
            &[0],
        )
        .unwrap();
        assert_relative_eq!(choose_antisqueeze_gain(&st).unwrap(), g, max_relative = 1e-12);
        // thermal: G* = 1
        assert_relative_eq!(
            choose_antisqueeze_gain(&GaussianState::thermal(1, 0.4)).unwrap(),
            1.0
        );
    }

    #[test]
    fn antisqueeze_gain_lossy_isotropises() {
        let c = cav(1.0, 0.0, 0.01);
        let st = output_state_with_added_noise(&SourceSpec::Smss { gain: 100.0 }, 0.105, &c, 0.0).unwrap();
        let gstar = choose_antisqueeze_gain(&st).unwrap();
        let nulled = apply_symplectic(
            &st,
            &SymplecticOp::squeezer_inverse(gstar).unwrap(),
            &[0],
        )
        .unwrap();
        assert!((nulled.cov[(0, 0)] - nulled.cov[(1, 1)]).abs() < 1e-10);
    }

    #[test]
    fn antisqueeze_gain_two_mode_nulls_correlations() {
        let c = cav(0.2, 0.05, 0.03);
        let st = output_state_with_added_noise(&SourceSpec::Tmss { gain: 30.0 }, 0.7, &c, 0.0).unwrap();
        let gstar = choose_antisqueeze_gain(&st).unwrap();
        let nulled = apply_symplectic(
            &st,
            &SymplecticOp::two_mode_squeezer_inverse(tmss_quadrature_gain(gstar)).unwrap(),
            &[0, 1],
        )
        .unwrap();
        assert!(nulled.cov[(0, 2)].abs() < 1e-10, "q cross {}", nulled.cov[(0, 2)]);
        assert!(nulled.cov[(1, 3)].abs() < 1e-10, "p cross {}", nulled.cov[(1, 3)]);
    }

    #[test]
    fn perfect_nulling_gives_vacuum() {
        // N_A = 0, N_T = 0, negligible loss, G* = G -> p(0) = 1
        let c = cav(1e-9, 0.0, 0.0);
        let g = 25.0;
        let d = nulling_distribution(
            &SourceSpec::Smss { gain: g },
            1e-3,
            &c,
            &AxionParams::resonant(0.0),
            &NullingConfig {
                antisqueeze_gain: g,
                count_idler: false,
            },
        )
        .unwrap();
        assert!(d.pmf[0] > 1.0 - 1e-9, "p0 = {}", d.pmf[0]);
    }

    #[test]
    fn vacuum_counting_mean_is_thermal_plus_drive() {
        let c = cav(0.8, 0.0, 0.2);
        let ax = AxionParams::resonant(0.4);
        let t = 1.7;
        let d = nulling_distribution(
            &SourceSpec::Vacuum,
            t,
            &c,
            &ax,
            &NullingConfig {
                antisqueeze_gain: 1.0,
                count_idler: false,
            },
        )
        .unwrap();
        let expect = c.n_t + crate::cavity::n_a_eff(t, &c, &ax).unwrap();
        assert_relative_eq!(d.mean(), expect, max_relative = 1e-6);
    }

    #[test]
    fn poisson_counting_fisher() {
        // Poisson(theta): FI = 1/theta
        let family = |theta: f64| -> Result<PhotonDistribution> {
            let n_max = 64;
            let mut pmf = vec![0.0; n_max + 1];
            let mut ln_p = -theta;
            for n in 0..=n_max {
                if n > 0 {
                    ln_p += (theta / n as f64).ln();
                }
                pmf[n] = ln_p.exp();
            }
            Ok(PhotonDistribution {
                pmf,
                n_max,
                tail_bound: 1e-14,
            })
        };
        let fi = cfi_from_distribution(family, 1.0, 1e-4).unwrap();
        assert_relative_eq!(fi, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn vacuum_counting_reaches_optimal_information() {
        let c = cav(1e-2, 0.0, 0.1);
        let t = 80.0;
        let fi = nulling_cfi(
            &SourceSpec::Vacuum,
            t,
            &c,
            &NullingConfig {
                antisqueeze_gain: 1.0,
                count_idler: false,
            },
        )
        .unwrap();
        let k = crate::fisher::k_vac(t, &c, 0.0).unwrap().value;
        assert_relative_eq!(fi, k, max_relative = 1e-4);
        assert!(fi <= k * (1.0 + 1e-6));
    }

    #[test]
    fn heterodyne_limits() {
        // noisy limit: heterodyne/homodyne -> 2
        let t = 40.0;
        let c = cav(1e-2, 0.0, 30.0);
        let ax = AxionParams::resonant(0.0);
        let het = cfi_heterodyne(t, &c, &ax).unwrap();
        let hom = crate::fisher::k_vac_hom(t, &c, 0.0).unwrap().value;
        assert_relative_eq!(het / hom, 2.0, max_relative = 4e-2);
        // always below the vacuum optimum
        let c2 = cav(1e-2, 0.0, 0.3);
        let het2 = cfi_heterodyne(t, &c2, &ax).unwrap();
        assert!(het2 <= crate::fisher::k_vac(t, &c2, 0.0).unwrap().value * (1.0 + 1e-6));
        // quiet limit: ratio stays bounded (evaluates to 1/2 analytically)
        let c3 = cav(1e-2, 0.0, 1e-6);
        let het3 = cfi_heterodyne(t, &c3, &ax).unwrap();
        let hom3 = crate::fisher::k_vac_hom(t, &c3, 0.0).unwrap().value;
        assert_relative_eq!(het3 / hom3, 0.5, max_relative = 2e-2);
    }

    #[test]
    fn homodyne_vacuum_matches_closed_form() {
        let c = cav(0.05, 0.0, 0.02);
        let ax = AxionParams::resonant(0.0);
        let t = 12.0;
        let fi = cfi_homodyne(&SourceSpec::Vacuum, t, &c, &ax, Quadrature::P).unwrap();
        let k = crate::fisher::k_vac_hom(t, &c, 0.0).unwrap().value;
        assert_relative_eq!(fi, k, max_relative = 1e-7);
    }

    #[test]
    fn homodyne_squeezed_quadrature_wins() {
        let c = cav(1e-4, 0.0, 1e-2);
        let ax = AxionParams::resonant(0.0);
        let g = 1e4;
        let t = 2.0 * (2.0 * c.n_t).sqrt() / (c.gamma_tau * g);
        let q = cfi_homodyne(&SourceSpec::Smss { gain: g }, t, &c, &ax, Quadrature::Q).unwrap();
        let p = cfi_homodyne(&SourceSpec::Smss { gain: g }, t, &c, &ax, Quadrature::P).unwrap();
        assert!(p > q, "squeezed quadrature must carry the information: q={q:.3e} p={p:.3e}");
        let best = cfi_homodyne_best(&SourceSpec::Smss { gain: g }, t, &c, &ax).unwrap();
        assert_relative_eq!(best, p, max_relative = 1e-12);
    }

    #[test]
    fn bell_reference_value_at_unit_gain() {
        // uncorrelated thermal pair: each port variance M/2, sensitivity κ/2,
        // FI = κ²/M² (half the single-mode homodyne value)
        let c = cav(0.05, 0.05, 0.08);
        let ax = AxionParams::resonant(0.0);
        let t = 9.0;
        let fi = cfi_bell(t, &c, &ax, 1.0).unwrap();
        let hom = crate::fisher::k_vac_hom(t, &c, 0.0).unwrap().value;
        assert_relative_eq!(fi, 0.5 * hom, max_relative = 1e-6);
    }

    #[test]
    fn phase_model_poisson_limit() {
        // kappa = 1, n_b = 0, n_s = 0: displaced vacuum, Poisson(alpha^2)
        let p = PhaseModelParams::new(1.0, 0.0, 0.0, 0.8).unwrap();
        let d = phase_conditional_pn(&p, 0.7, 32).unwrap();
        let lam = 0.8 * 0.8f64;
        for n in 0..10usize {
            let mut expect = (-lam).exp();
            for k in 1..=n {
                expect *= lam / k as f64;
            }
            assert_relative_eq!(d.pmf[n], expect, max_relative = 1e-9, epsilon = 1e-14);
        }
    }

    #[test]
    fn phase_model_alpha_zero_is_phase_independent() {
        let p = PhaseModelParams::new(0.8, 0.01, 2.0, 0.0).unwrap();
        let d1 = phase_conditional_pn(&p, 0.3, 48).unwrap();
        let d2 = phase_conditional_pn(&p, 1.9, 48).unwrap();
        for n in 0..=48 {
            assert_relative_eq!(d1.pmf[n], d2.pmf[n], max_relative = 1e-12, epsilon = 1e-16);
        }
    }

    #[test]
    fn phase_model_matches_gaussian_pipeline() {
        let p = PhaseModelParams::new(0.85, 0.02, 1.5, 0.6).unwrap();
        for phi in [0.0, 0.5, 1.2, 2.9] {
            let closed = phase_conditional_pn(&p, phi, 64).unwrap();
            let st = phase_model_state(&p, phi).unwrap();
            let (a, b, c) = st.characteristic_params().unwrap();
            let pipe = marian_pn(a, b, c, 64).unwrap();
            for n in 0..=64 {
                assert_relative_eq!(closed.pmf[n], pipe.pmf[n], max_relative = 1e-8, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn phase_average_identity_when_phase_independent() {
        let p = PhaseModelParams::new(0.8, 0.01, 2.0, 0.0).unwrap();
        let avg = phase_averaged_pn(&p, 48, 4).unwrap();
        let single = phase_conditional_pn(&p, 0.123, 48).unwrap();
        for n in 0..=48 {
            assert_relative_eq!(avg.pmf[n], single.pmf[n], max_relative = 1e-10, epsilon = 1e-15);
        }
    }

    #[test]
    fn phase_fisher_finite_at_small_alpha() {
        let mut p = PhaseModelParams::new(0.9, 1e-4, 2.025, 0.05).unwrap();
        let f1 = phase_averaged_fisher(&p, 64, 8).unwrap();
        assert!(f1.is_finite() && f1 >= 0.0);
        p.alpha = 0.02;
        let f2 = phase_averaged_fisher(&p, 64, 8).unwrap();
        assert!(f2.is_finite() && f2 >= 0.0);
    }
}
