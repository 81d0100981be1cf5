//! Waiting-time and gain optimisation of Fisher rates, the Lambert W branch
//! needed for the vacuum optimum, and the asymptotic predictors used as
//! cross-validation targets.

use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::numerics::golden_max;

/// Result of a rate optimisation over the accumulation time.
#[derive(Debug, Clone)]
pub struct RateOptimum {
    /// Optimal time (units of τ_A).
    pub t_star: f64,
    /// Rate at the optimum.
    pub rate_star: f64,
    /// Every local maximum found on the search grid, as (t, rate), sorted by t.
    pub all_local_maxima: Vec<(f64, f64)>,
}

/// Lambert W function, branch −1, on [−1/e, 0). Halley iteration from a
/// series seed; residual |w e^w − x| below 1e−12·|x|.
pub fn lambert_w_m1(x: f64) -> Result<f64> {
    let inv_e = (-1.0f64).exp();
    if !(x >= -inv_e && x < 0.0) {
        return Err(Error::Domain(format!(
            "lambert_w_m1 requires x in [-1/e, 0), got {x}"
        )));
    }
    // seed: near the branch point use the square-root series, otherwise the
    // log-log asymptotic seed of Corless et al.
    let mut w = if x > -0.27 {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    } else {
        let p = -(2.0 * (std::f64::consts::E * x + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    };
    if w > -1.0 {
        w = -1.0 - 1e-12;
    }
    for _ in 0..60 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let fp = ew * (w + 1.0);
        let fpp = ew * (w + 2.0);
        let denom = fp - 0.5 * f * fpp / fp;
        let step = f / denom;
        w -= step;
        if step.abs() < 1e-15 * w.abs().max(1.0) {
            break;
        }
    }
    let resid = (w * w.exp() - x).abs();
    if resid > 1e-12 * x.abs().max(1e-300) && resid > 1e-15 {
        return Err(Error::Instability(format!(
            "Lambert W iteration left residual {resid:.3e}"
        )));
    }
    Ok(w)
}

/// Predicted optimal vacuum accumulation time in units of 1/Γ:
/// ΓT★ = −W₋₁(−1/(2√e)) − 1/2 ≈ 1.2564.
pub fn vacuum_t_star_gamma() -> f64 {
    let x = -0.5 / std::f64::consts::E.sqrt();
    -lambert_w_m1(x).expect("branch point is inside the domain") - 0.5
}

/// Maximise `rate_fn` (a rate as a function of T in τ_A units) over a log
/// range [t_lo, t_hi]: 400-point log-grid bracketing followed by
/// golden-section refinement of every bracketed local maximum.
pub fn optimize_t<F: Fn(f64) -> f64>(rate_fn: F, t_lo: f64, t_hi: f64) -> Result<RateOptimum> {
    if !(t_lo > 0.0 && t_hi > t_lo) {
        return Err(Error::Range(format!("bad time range [{t_lo}, {t_hi}]")));
    }
    const N: usize = 400;
    let ratio = t_hi / t_lo;
    let grid: Vec<f64> = (0..=N)
        .map(|i| t_lo * ratio.powf(i as f64 / N as f64))
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&t| rate_fn(t)).collect();
    if !vals.iter().any(|v| v.is_finite()) {
        return Err(Error::Range("rate function not finite anywhere on the grid".into()));
    }
    let mut maxima = Vec::new();
    for i in 0..=N {
        let v = vals[i];
        if !v.is_finite() {
            continue;
        }
        let left_ok = i == 0 || !vals[i - 1].is_finite() || vals[i - 1] <= v;
        let right_ok = i == N || !vals[i + 1].is_finite() || vals[i + 1] <= v;
        if left_ok && right_ok {
            let lo = if i == 0 { grid[0] } else { grid[i - 1] };
            let hi = if i == N { grid[N] } else { grid[i + 1] };
            // refine in log t
            let (lt, rate) = golden_max(&|l: f64| rate_fn(l.exp()), lo.ln(), hi.ln(), 1e-8);
            maxima.push((lt.exp(), rate));
        }
    }
    // merge refinements that converged to the same point
    maxima.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (t, r) in maxima {
        match merged.last_mut() {
            Some(last) if (last.0 / t - 1.0).abs() < 1e-4 => {
                if r > last.1 {
                    *last = (t, r);
                }
            }
            _ => merged.push((t, r)),
        }
    }
    let (t_star, rate_star) = merged
        .iter()
        .copied()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .ok_or_else(|| Error::Range("no local maximum found".into()))?;
    if !rate_star.is_finite() {
        return Err(Error::Range("optimum is not finite".into()));
    }
    Ok(RateOptimum {
        t_star,
        rate_star,
        all_local_maxima: merged,
    })
}

/// Default search range for [`optimize_t`]: T/τ_A from 1e−6 up to 50/(Γτ_A)
/// (i.e. ΓT up to 50), wide enough to expose both competing local optima.
pub fn default_t_range(cavity: &CavityParams) -> (f64, f64) {
    (1e-6, 50.0 / cavity.gamma_tau)
}

/// Maximise a T-optimised rate over the gain on a log grid, with the same
/// grid-plus-refinement strategy. Returns (G★, rate★, flat) where `flat`
/// reports a rate function that never varied beyond 1e−12 relative (the
/// returned point is then the range end).
pub fn optimize_g<F: Fn(f64) -> f64>(rate_star_fn: F, g_lo: f64, g_hi: f64) -> Result<(f64, f64, bool)> {
    if !(g_lo >= 1.0 && g_hi > g_lo) {
        return Err(Error::Range(format!("bad gain range [{g_lo}, {g_hi}]")));
    }
    const N: usize = 160;
    let ratio: f64 = g_hi / g_lo;
    let grid: Vec<f64> = (0..=N)
        .map(|i| g_lo * ratio.powf(i as f64 / N as f64))
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&g| rate_star_fn(g)).collect();
    let vmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if !vmax.is_finite() {
        return Err(Error::Range("rate not finite on the gain grid".into()));
    }
    if (vmax - vmin).abs() <= 1e-12 * vmax.abs().max(1e-300) {
        return Ok((g_hi, vmax, true));
    }
    let imax = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    if imax == N {
        return Ok((grid[N], vals[N], false));
    }
    if imax == 0 {
        return Ok((grid[0], vals[0], false));
    }
    let (lg, rate) = golden_max(
        &|l: f64| rate_star_fn(l.exp()),
        grid[imax - 1].ln(),
        grid[imax + 1].ln(),
        1e-7,
    );
    Ok((lg.exp(), rate, false))
}

/// Asymptotic predictors for a squeezed source: break-even gain, saturation
/// gain, the linear-regime advantage slope, the saturated advantage and the
/// optimal-time coefficient.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticPrediction {
    /// Break-even gain G_TH where the squeezed source matches vacuum.
    pub g_th: f64,
    /// Saturation gain G_SAT where T★ reaches τ_A.
    pub g_sat: f64,
    /// Advantage ≈ adv_slope · G in the window G_TH ≪ G ≪ G_SAT.
    pub adv_slope: f64,
    /// Advantage at G → ∞.
    pub adv_saturated: f64,
    /// ΓT★ ≈ t_coeff / G in the window.
    pub t_coeff: f64,
}

impl AsymptoticPrediction {
    pub fn advantage_at(&self, gain: f64) -> f64 {
        self.adv_slope * gain
    }

    /// Predicted ΓT★ in the linear window.
    pub fn t_star_gamma_at(&self, gain: f64) -> f64 {
        self.t_coeff / gain
    }
}

/// Single-mode-source predictors: G_TH ≈ 1/N_T, G_SAT ≈ 2√(2N_T)/(Γτ_A),
/// advantage ≈ 2.455·G·N_T in the window and 0.665·N_T/(Γτ_A) at saturation,
/// ΓT★ ≈ 2√(2N_T)/G.
pub fn asymptotics_smss(cavity: &CavityParams) -> AsymptoticPrediction {
    let nt = cavity.n_t;
    AsymptoticPrediction {
        g_th: 1.0 / nt,
        g_sat: 2.0 * (2.0 * nt).sqrt() / cavity.gamma_tau,
        adv_slope: 2.455 * nt,
        adv_saturated: 0.665 * nt / cavity.gamma_tau,
        t_coeff: 2.0 * (2.0 * nt).sqrt(),
    }
}

/// Two-mode-source predictors. The lossy-idler regime (Γ_idler/Γ ≫ N_T) has
/// G_TH ≈ [N_T(1+Γ/Γ_idler)]⁻¹, advantage ≈ 1.283·G·N_T(1+Γ/Γ_idler) and
/// saturates at 0.347·N_T/(Γ_idler·τ_A); the ideal-idler regime
/// (Γ_idler/Γ ≪ N_T) has advantage ≈ 0.321·G saturating at 0.347/(Γτ_A).
pub fn asymptotics_tmss(cavity: &CavityParams) -> AsymptoticPrediction {
    let nt = cavity.n_t;
    let gamma_ratio = cavity.gamma_idler_tau / cavity.gamma_tau;
    if gamma_ratio >= nt {
        // lossy idler storage
        let boost = 1.0 + 1.0 / gamma_ratio;
        let t_coeff = 2.0 * nt.sqrt() * (1.0 + gamma_ratio * gamma_ratio).sqrt()
            / (1.0 + gamma_ratio);
        AsymptoticPrediction {
            g_th: 1.0 / (nt * boost),
            g_sat: t_coeff / cavity.gamma_tau,
            adv_slope: 1.283 * nt * boost,
            adv_saturated: 0.347 * nt / cavity.gamma_idler_tau,
            t_coeff,
        }
    } else {
        AsymptoticPrediction {
            g_th: 1.0 / 0.321,
            g_sat: 2.0 / cavity.gamma_tau,
            adv_slope: 0.321,
            adv_saturated: 0.347 / cavity.gamma_tau,
            t_coeff: 2.0,
        }
    }
}

/// Break-even predicates of the advantage region at gain G. Quality factors
/// enter only through the dimensionless groups Γτ_A, Γ_idler·τ_A and N_T.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdvantageRegion {
    pub smss_advantage: bool,
    pub tmss_advantage: bool,
}

/// Evaluate the asymptotic quantum-advantage requirements at gain G.
/// Single-mode: Γτ_A ≲ N_T and G·N_T ≳ 1. Two-mode with a lossy idler
/// (Γ_idler/Γ ≥ N_T): Γ_idler·τ_A ≲ N_T and G·N_T ≳ Γ_idler/Γ; with an ideal
/// idler: Γτ_A ≲ 1 and G ≳ 1.
pub fn result1_region(cavity: &CavityParams, gain: f64) -> AdvantageRegion {
    let nt = cavity.n_t;
    let smss = cavity.gamma_tau < nt && gain * nt > 1.0;
    let gamma_ratio = cavity.gamma_idler_tau / cavity.gamma_tau;
    let tmss = if gamma_ratio >= nt {
        cavity.gamma_idler_tau < nt && gain * nt > gamma_ratio
    } else {
        cavity.gamma_tau < 1.0 && gain > 1.0
    };
    AdvantageRegion {
        smss_advantage: smss,
        tmss_advantage: tmss,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lambert_branch_point_and_reference_value() {
        assert_relative_eq!(lambert_w_m1(-(-1.0f64).exp()).unwrap(), -1.0, epsilon = 2e-6);
        // bisection oracle for w e^w = -0.1 on (-20, -1)
        let (mut lo, mut hi) = (-20.0f64, -1.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < -0.1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert_relative_eq!(lambert_w_m1(-0.1).unwrap(), oracle, max_relative = 1e-12);
        assert_relative_eq!(lambert_w_m1(-0.1).unwrap(), -3.577152063957297, max_relative = 1e-12);
    }

    #[test]
    fn lambert_domain_errors() {
        assert!(lambert_w_m1(-0.5).is_err());
        assert!(lambert_w_m1(0.0).is_err());
        assert!(lambert_w_m1(0.1).is_err());
    }

    #[test]
    fn lambert_residual_across_domain() {
        for i in 1..200 {
            let x = -(i as f64) / 200.0 / std::f64::consts::E;
            let w = lambert_w_m1(x).unwrap();
            assert!(w <= -1.0 + 1e-9);
            assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs().max(1e-12));
        }
    }

    #[test]
    fn vacuum_t_star_constant() {
        assert_relative_eq!(vacuum_t_star_gamma(), 1.2564312086261697, max_relative = 1e-10);
    }

    #[test]
    fn optimize_t_quadratic() {
        let f = |t: f64| -(t.ln() - 1.0f64).powi(2) + 5.0;
        let opt = optimize_t(f, 1e-3, 1e3).unwrap();
        assert_relative_eq!(opt.t_star, std::f64::consts::E, max_relative = 1e-5);
        assert_relative_eq!(opt.rate_star, 5.0, max_relative = 1e-10);
    }

    #[test]
    fn optimize_t_finds_both_maxima() {
        // two log-Gaussian bumps of nearly equal height
        let f = |t: f64| {
            let l = t.ln();
            (-(l + 4.0) * (l + 4.0)).exp() + 1.01 * (-(l - 4.0) * (l - 4.0)).exp()
        };
        let opt = optimize_t(f, 1e-5, 1e5).unwrap();
        assert!(opt.all_local_maxima.len() >= 2, "{:?}", opt.all_local_maxima);
        assert_relative_eq!(opt.t_star.ln(), 4.0, max_relative = 1e-3);
    }

    #[test]
    fn optimize_t_idempotent_under_tolerance() {
        let f = |t: f64| (-((t.ln() - 0.3) as f64).powi(2)).exp();
        let a = optimize_t(f, 1e-4, 1e4).unwrap();
        let b = optimize_t(f, 1e-4, 1e4).unwrap();
        assert_eq!(a.t_star, b.t_star);
    }

    #[test]
    fn optimize_g_flat_and_monotone() {
        let (g, _, flat) = optimize_g(|_| 1.0, 1.0, 1e4).unwrap();
        assert!(flat);
        assert_relative_eq!(g, 1e4);
        let (g, _, flat) = optimize_g(|x| x, 1.0, 1e4).unwrap();
        assert!(!flat);
        assert_relative_eq!(g, 1e4);
    }

    #[test]
    fn region_examples() {
        // strong squeezing, good cavity: single-mode advantage
        let c = CavityParams::new(1e-6, 1e-6, 1e-2, 1.0).unwrap();
        let r = result1_region(&c, 1e3);
        assert!(r.smss_advantage);
        // ideal idler, G barely above 1
        let c = CavityParams::new(1e-4, 1e-12, 1e-2, 1.0).unwrap();
        let r = result1_region(&c, 2.0);
        assert!(r.tmss_advantage);
        // bad cavity kills the single-mode advantage
        let c = CavityParams::new(10.0, 1e-6, 1e-2, 1.0).unwrap();
        assert!(!result1_region(&c, 1e3).smss_advantage);
    }

    #[test]
    fn asymptotics_reference_numbers() {
        let c = CavityParams::new(1e-8, 1e-8 * 0.5, 1e-2, 1.0).unwrap();
        let s = asymptotics_smss(&c);
        assert_relative_eq!(s.g_th, 100.0);
        assert_relative_eq!(s.g_sat, 2.0 * 0.02f64.sqrt() / 1e-8, max_relative = 1e-12);
        let t = asymptotics_tmss(&c);
        assert_relative_eq!(t.adv_slope, 1.283 * 1e-2 * 3.0, max_relative = 1e-12);
        // ideal idler: slope independent of N_T
        let c = CavityParams::new(1e-8, 1e-12, 1e-2, 1.0).unwrap();
        let t = asymptotics_tmss(&c);
        assert_relative_eq!(t.adv_slope, 0.321);
        assert_relative_eq!(t.adv_saturated, 0.347 / 1e-8, max_relative = 1e-12);
    }
}
