//! Photon-number distributions of Gaussian states.
//!
//! The single-mode distribution follows Marian & Marian, Phys. Rev. A 47,
//! 4474 (1993): p(n) is a binomial-weighted sum over Hermite polynomials of
//! complex argument built from the Wigner characteristic-function parameters
//! (A, B, C). The series is evaluated through a scaled recurrence plus
//! log-space assembly so it stays finite at photon cutoffs in the thousands,
//! and the certified tail bound comes from a Markov inequality on the closed
//! form of the generating function (Mehler summation).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Truncated photon-number distribution with a certified tail bound.
#[derive(Debug, Clone)]
pub struct PhotonDistribution {
    /// p(0..=n_max); entries are clamped to be nonnegative.
    pub pmf: Vec<f64>,
    pub n_max: usize,
    /// Certified upper bound on the probability above n_max.
    pub tail_bound: f64,
}

impl PhotonDistribution {
    pub fn mean(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.pmf.iter().sum()
    }
}

/// Core series parameters shared by the characteristic-function route and
/// the conditional phase-model route:
/// p(n) = base · Σ_q C(n,q) · ã^{n−q} · |u_q|², with the scaled Hermite
/// recurrence u_{q+1} = (2ŷ/√(q+1))u_q − 2c²√(q/(q+1))·u_{q−1}.
pub(crate) struct SeriesParams {
    /// πQ(0)-analogue prefactor (linear scale; ln taken internally).
    pub base: f64,
    /// Geometric ratio ã ∈ [0, 1).
    pub a_tilde: f64,
    /// Scaled Hermite argument ŷ = x̂·c.
    pub y_hat: Complex64,
    /// c² = |B̃|/2-analogue, ≥ 0.
    pub c2: f64,
}

pub(crate) fn pmf_from_series(p: &SeriesParams, n_max: usize) -> Result<PhotonDistribution> {
    if !(p.base > 0.0) || !(p.a_tilde >= 0.0) || p.a_tilde >= 1.0 || p.c2 < 0.0 {
        return Err(Error::Domain(format!(
            "unphysical photon-series parameters (base {:.3e}, a_tilde {:.6}, c2 {:.3e})",
            p.base, p.a_tilde, p.c2
        )));
    }
    let ln_base = p.base.ln();
    let ln_a = if p.a_tilde > 0.0 {
        p.a_tilde.ln()
    } else {
        f64::NEG_INFINITY
    };

    // ln |u_q|^2 via the scaled recurrence with overflow guards
    let mut ln_u2 = vec![f64::NEG_INFINITY; n_max + 1];
    let mut u_prev = Complex64::new(0.0, 0.0); // u_{-1}
    let mut u = Complex64::new(1.0, 0.0); // u_0
    let mut log_scale = 0.0f64;
    ln_u2[0] = 0.0;
    for q in 0..n_max {
        let qf = q as f64;
        let next = u * (2.0 * p.y_hat / (qf + 1.0).sqrt())
            - u_prev * (2.0 * p.c2 * (qf / (qf + 1.0)).sqrt());
        u_prev = u;
        u = next;
        let mag = u.norm().max(u_prev.norm());
        if mag > 1e100 {
            u /= 1e100;
            u_prev /= 1e100;
            log_scale += 1e100f64.ln();
        } else if mag < 1e-100 && mag > 0.0 {
            u *= 1e100;
            u_prev *= 1e100;
            log_scale -= 1e100f64.ln();
        }
        ln_u2[q + 1] = if u.norm() == 0.0 {
            f64::NEG_INFINITY
        } else {
            2.0 * (u.norm().ln() + log_scale)
        };
    }

    // cumulative log-factorials
    let mut ln_fact = vec![0.0f64; n_max + 1];
    for k in 1..=n_max {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }

    let mut pmf = vec![0.0f64; n_max + 1];
    for n in 0..=n_max {
        // log-sum-exp over q
        let mut max_term = f64::NEG_INFINITY;
        let mut terms = Vec::with_capacity(n + 1);
        for q in 0..=n {
            let geom = if n > q {
                (n - q) as f64 * ln_a
            } else {
                0.0
            };
            let t = ln_fact[n] - ln_fact[q] - ln_fact[n - q] + geom + ln_u2[q];
            terms.push(t);
            if t > max_term {
                max_term = t;
            }
        }
        if max_term == f64::NEG_INFINITY {
            pmf[n] = 0.0;
            continue;
        }
        let s: f64 = terms.iter().map(|t| (t - max_term).exp()).sum();
        let ln_p = ln_base + max_term + s.ln();
        pmf[n] = ln_p.exp();
    }
    for v in pmf.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-14 {
                return Err(Error::State(format!("photon probability {v:.3e} below -1e-14")));
            }
            *v = 0.0;
        }
    }
    let tail = tail_bound(p, n_max)?;
    Ok(PhotonDistribution {
        pmf,
        n_max,
        tail_bound: tail,
    })
}

/// Generating function G(z) = Σ p(n) zⁿ in closed form (Mehler summation of
/// the Hermite series). Finite for z < 1/(ã + 2c²).
pub(crate) fn generating_function(p: &SeriesParams, z: f64) -> Option<f64> {
    let gz = 1.0 - p.a_tilde * z;
    if gz <= 0.0 {
        return None;
    }
    let w = p.c2 * z / gz;
    let one_minus = 1.0 - 4.0 * w * w;
    if one_minus <= 0.0 {
        return None;
    }
    // exponent: [4 w |x̂|² − 8 w² Re(x̂²)]/(1−4w²) with x̂ = ŷ/c, expressed
    // through ŷ to stay regular as c → 0
    let y2 = p.y_hat.norm_sqr();
    let rey2 = (p.y_hat * p.y_hat).re;
    let expo = if p.c2 > 0.0 {
        (4.0 * (w / p.c2) * y2 - 8.0 * (w / p.c2) * (w / p.c2) * p.c2 * rey2) / one_minus
    } else {
        4.0 * (z / gz) * y2
    };
    Some(p.base / gz / one_minus.sqrt() * expo.exp())
}

fn tail_bound(p: &SeriesParams, n_max: usize) -> Result<f64> {
    let radius = 1.0 / (p.a_tilde + 2.0 * p.c2).max(1e-300);
    if radius <= 1.0 {
        // not a normalisable physical distribution
        return Err(Error::Domain(
            "photon distribution has no exponential tail (unphysical parameters)".into(),
        ));
    }
    // midpoint between 1 and the radius of convergence
    let z = 0.5 * (1.0 + radius);
    let g = generating_function(p, z)
        .ok_or_else(|| Error::Domain("generating function undefined inside its radius".into()))?;
    Ok((g / z.powi(n_max as i32 + 1)).min(1.0))
}

/// Photon-number distribution from the Wigner characteristic-function
/// parameters A ≥ 0 (thermal part), B (squeezing part, B = −⟨Δa²⟩) and C
/// (displacement, C = ⟨a⟩): requires (A+1)² > |B|².
pub fn marian_pn(a: f64, b: Complex64, c: Complex64, n_max: usize) -> Result<PhotonDistribution> {
    let params = marian_series_params(a, b, c)?;
    pmf_from_series(&params, n_max)
}

pub(crate) fn marian_series_params(a: f64, b: Complex64, c: Complex64) -> Result<SeriesParams> {
    if !(a >= -1e-12) {
        return Err(Error::Domain(format!("thermal parameter A must be >= 0, got {a}")));
    }
    let a = a.max(0.0);
    let b2 = b.norm_sqr();
    let dprime = (a + 1.0) * (a + 1.0) - b2;
    if dprime <= 0.0 {
        return Err(Error::Domain(format!(
            "unphysical characteristic parameters: (A+1)^2 = {:.6e} <= |B|^2 = {:.6e}",
            (a + 1.0) * (a + 1.0),
            b2
        )));
    }
    let a_tilde = ((a * (a + 1.0) - b2) / dprime).max(0.0);
    let b_tilde = b / dprime;
    let c_tilde = ((a + 1.0) * c + b * c.conj()) / dprime;
    // base = πQ(0)
    let expo = -((a + 1.0) * c.norm_sqr() + (c * c * b.conj()).re) / dprime;
    let base = expo.exp() / dprime.sqrt();
    // ŷ = x̂·c with x̂ = C̃/√(2B̃) and c² = |B̃|/2: ŷ = C̃·e^{−iφ_B/2}/2
    let y_hat = if b_tilde.norm() > 0.0 {
        let phase = Complex64::from_polar(1.0, -0.5 * b_tilde.arg());
        0.5 * c_tilde * phase
    } else {
        0.5 * c_tilde
    };
    Ok(SeriesParams {
        base,
        a_tilde,
        y_hat,
        c2: 0.5 * b_tilde.norm(),
    })
}

/// Adaptive-cutoff version: starts at `start` photons and doubles the cutoff
/// until the certified tail drops below `tail_target`, up to a hard cap.
pub fn marian_pn_adaptive(
    a: f64,
    b: Complex64,
    c: Complex64,
    tail_target: f64,
    hard_cap: usize,
) -> Result<PhotonDistribution> {
    let params = marian_series_params(a, b, c)?;
    let mut n_max = 32;
    loop {
        let t = tail_bound(&params, n_max)?;
        if t < tail_target {
            return pmf_from_series(&params, n_max);
        }
        if n_max >= hard_cap {
            // estimate the needed cutoff from the geometric decay
            let radius = 1.0 / (params.a_tilde + 2.0 * params.c2);
            let z = 0.5 * (1.0 + radius);
            let needed = ((t / tail_target).ln() / z.ln()).ceil() as usize + n_max;
            return Err(Error::Cutoff {
                tail: t,
                suggested: needed,
            });
        }
        n_max = (n_max * 2).min(hard_cap);
    }
}

// ---------------------------------------------------------------------------
// Total photon count of a (zero-displacement or displaced) 1- or 2-mode
// Gaussian state, via the closed-form characteristic function of the number
// operator and a discrete Fourier inversion.
// ---------------------------------------------------------------------------

use nalgebra::DMatrix;

use crate::gaussian::GaussianState;

/// Distribution of the total photon number summed over all modes of a
/// Gaussian state. Exact up to Fourier aliasing, which is certified against
/// the same Markov tail bound that certifies the truncation.
pub fn total_count_distribution(state: &GaussianState, n_max: usize) -> Result<PhotonDistribution> {
    let d = 2 * state.n_modes;
    let mut sigma_q = state.cov.clone();
    for i in 0..d {
        sigma_q[(i, i)] += 0.5;
    }
    let mu = nalgebra::DVector::from_vec(state.mean.clone());

    let char_at = |c: Complex64| -> (Complex64, Complex64) {
        let mut m = DMatrix::<Complex64>::identity(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] -= c * Complex64::new(sigma_q[(i, j)], 0.0);
            }
        }
        let det = m.clone().determinant();
        let lu = m.lu();
        let muc = nalgebra::DVector::from_iterator(d, mu.iter().map(|&v| Complex64::new(v, 0.0)));
        let sol = lu.solve(&muc).expect("char matrix invertible inside the disc");
        let quad: Complex64 = muc.iter().zip(sol.iter()).map(|(a, b)| a * b).sum();
        (det, (0.5 * c * quad).exp())
    };

    // real-z moment generating function for tail bounds
    let lam_max = sigma_q
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    let z_lim = if lam_max > 1.0 {
        lam_max / (lam_max - 1.0)
    } else {
        1e6
    };
    let z = 1.0 + 0.5 * (z_lim - 1.0).min(9.0);
    let mgf = |zz: f64| -> Result<f64> {
        let c = Complex64::new(1.0 - 1.0 / zz, 0.0);
        let (det, ex) = char_at(c);
        if det.re <= 0.0 {
            return Err(Error::Accuracy("total-count MGF outside its domain".into()));
        }
        Ok(zz.powi(-(state.n_modes as i32)) / det.re.sqrt() * ex.re)
    };
    let m_z = mgf(z)?;
    let tail = (m_z / z.powi(n_max as i32 + 1)).min(1.0);

    // grid size: aliasing below 1e-15 absolute
    let mut n_fft = (8 * (n_max + 1)).next_power_of_two();
    while m_z / z.powi(n_fft as i32) > 1e-15 && n_fft < 1 << 20 {
        n_fft *= 2;
    }

    let mut phi = Vec::with_capacity(n_fft);
    let mut prev_sqrt = Complex64::new(1.0, 0.0);
    for k in 0..n_fft {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n_fft as f64;
        let c = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -theta);
        let (det, ex) = char_at(c);
        // continuous branch of det^{-1/2}
        let mut s = det.sqrt();
        if (s + prev_sqrt).norm() < (s - prev_sqrt).norm() {
            s = -s;
        }
        prev_sqrt = s;
        let pref = Complex64::from_polar(1.0, -(state.n_modes as f64) * theta);
        phi.push(pref / s * ex);
    }
    let mut pmf = vec![0.0f64; n_max + 1];
    for (n, slot) in pmf.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, ph) in phi.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * (k * n % n_fft) as f64 / n_fft as f64;
            acc += ph * Complex64::from_polar(1.0, -theta);
        }
        *slot = (acc.re / n_fft as f64).max(0.0);
    }
    Ok(PhotonDistribution {
        pmf,
        n_max,
        tail_bound: tail,
    })
}
