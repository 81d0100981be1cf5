//! Truncated Fock-space oracle for photon statistics.
//!
//! Everything here exists to cross-check the Gaussian photon-number machinery
//! by brute force in a finite Hilbert space: squeeze/displace unitaries from
//! matrix exponentials, thermal-loss channels from Kraus sums, photon
//! distributions from density-matrix diagonals. It is verification support,
//! not a production path; keep the occupation numbers well below the cutoff.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

type CMat = DMatrix<Complex64>;

/// Annihilation operator truncated to `dim` levels.
pub fn annihilation(dim: usize) -> CMat {
    let mut a = CMat::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Matrix exponential by scaling-and-squaring with a Taylor core.
pub fn expm(a: &CMat) -> CMat {
    let norm = a
        .row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / Complex64::new(2f64.powi(s as i32), 0.0);
    let dim = a.nrows();
    let mut term = CMat::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..60 {
        term = (&term * &scaled) / Complex64::new(k as f64, 0.0);
        let t_norm: f64 = term.iter().map(|z| z.norm()).sum();
        sum += &term;
        if t_norm < 1e-20 {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Squeeze unitary with quadrature-gain convention matching the Gaussian
/// toolbox: the q-variance of the squeezed state is G times the input's.
pub fn squeeze_op(dim: usize, gain: f64) -> CMat {
    let a = annihilation(dim);
    let adag = a.adjoint();
    let k = (&adag * &adag - &a * &a) * Complex64::new(0.25 * gain.ln(), 0.0);
    expm(&k)
}

/// Displacement unitary D(β) = exp(βa† − β̄a).
pub fn displace_op(dim: usize, beta: Complex64) -> CMat {
    let a = annihilation(dim);
    let adag = a.adjoint();
    let k = adag * beta - a * beta.conj();
    expm(&k)
}

/// Thermal density matrix of mean photon number `nbar`.
pub fn thermal_dm(dim: usize, nbar: f64) -> CMat {
    let mut rho = CMat::zeros(dim, dim);
    if nbar <= 0.0 {
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        return rho;
    }
    let q = nbar / (1.0 + nbar);
    for n in 0..dim {
        rho[(n, n)] = Complex64::new(q.powi(n as i32) / (1.0 + nbar), 0.0);
    }
    rho
}

fn apply_kraus(rho: &CMat, kraus: &[CMat]) -> CMat {
    let dim = rho.nrows();
    let mut out = CMat::zeros(dim, dim);
    for k in kraus {
        out += k * rho * k.adjoint();
    }
    out
}

/// Pure-attenuator Kraus operators E_k = √((1−κ)^k/k!)·κ^{n̂/2}·a^k.
fn attenuator_kraus(dim: usize, kappa: f64, k_max: usize) -> Vec<CMat> {
    let a = annihilation(dim);
    let mut half_n = CMat::zeros(dim, dim);
    for n in 0..dim {
        half_n[(n, n)] = Complex64::new(kappa.powf(n as f64 / 2.0), 0.0);
    }
    let mut ops = Vec::with_capacity(k_max + 1);
    let mut a_pow = CMat::identity(dim, dim);
    let mut ln_fact = 0.0f64;
    for k in 0..=k_max {
        if k > 0 {
            a_pow = &a_pow * &a;
            ln_fact += (k as f64).ln();
        }
        let coeff = (0.5 * (k as f64 * (1.0 - kappa).max(0.0).ln() - ln_fact)).exp();
        if coeff.is_finite() && coeff > 0.0 {
            ops.push(&half_n * &a_pow * Complex64::new(coeff, 0.0));
        } else if k == 0 {
            ops.push(half_n.clone());
        }
    }
    ops
}

/// Quantum-limited-amplifier Kraus operators
/// A_k = √((1−1/G)^k/k!)·(1/√G)^{n̂+1}·(a†)^k.
fn amplifier_kraus(dim: usize, g: f64, k_max: usize) -> Vec<CMat> {
    let adag = annihilation(dim).adjoint();
    let mut half_n = CMat::zeros(dim, dim);
    for n in 0..dim {
        half_n[(n, n)] = Complex64::new((1.0 / g).powf((n as f64 + 1.0) / 2.0), 0.0);
    }
    let mut ops = Vec::with_capacity(k_max + 1);
    let mut ad_pow = CMat::identity(dim, dim);
    let mut ln_fact = 0.0f64;
    let one_minus = (1.0 - 1.0 / g).max(0.0);
    for k in 0..=k_max {
        if k > 0 {
            ad_pow = &ad_pow * &adag;
            ln_fact += (k as f64).ln();
        }
        let coeff = if one_minus == 0.0 && k > 0 {
            0.0
        } else {
            (0.5 * (k as f64 * one_minus.ln() - ln_fact)).exp()
        };
        if coeff > 0.0 && coeff.is_finite() {
            ops.push(&half_n * &ad_pow * Complex64::new(coeff, 0.0));
        } else if k == 0 {
            ops.push(half_n.clone());
        }
    }
    ops
}

/// Thermal-loss channel (transmissivity κ, environment occupation n_env)
/// as an amplifier-after-attenuator Kraus composition.
pub fn thermal_loss(rho: &CMat, kappa: f64, n_env: f64) -> CMat {
    let dim = rho.nrows();
    let k_max = dim.min(80);
    let g2 = 1.0 + (1.0 - kappa) * n_env;
    let kap_prime = kappa / g2;
    let att = attenuator_kraus(dim, kap_prime, k_max);
    let amp = amplifier_kraus(dim, g2, k_max);
    apply_kraus(&apply_kraus(rho, &att), &amp)
}

/// Classical additive Gaussian noise of mean photon number `n_add`:
/// random displacements with a Gaussian weight, via Gauss-Hermite quadrature.
pub fn additive_noise(rho: &CMat, n_add: f64, nodes: usize) -> CMat {
    if n_add <= 0.0 {
        return rho.clone();
    }
    let dim = rho.nrows();
    let (xs, ws) = gauss_hermite(nodes);
    // β = sqrt(n_add) (x + i y) with x, y standard-normal/√2 weights:
    // E[|β|²] = n_add requires Var(Re β) = n_add/2 per axis
    let scale = n_add.sqrt();
    let mut out = CMat::zeros(dim, dim);
    let norm: f64 = std::f64::consts::PI; // ∫∫ e^{-x²-y²}
    for (&x, &wx) in xs.iter().zip(&ws) {
        for (&y, &wy) in xs.iter().zip(&ws) {
            let beta = Complex64::new(x, y) * scale;
            let d = displace_op(dim, beta);
            out += (&d * rho * d.adjoint()) * Complex64::new(wx * wy / norm, 0.0);
        }
    }
    out
}

fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Golub-Welsch on the Hermite Jacobi matrix
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        j[(i - 1, i)] = b;
        j[(i, i - 1)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let w = eig.eigenvectors[(0, i)].powi(2) * std::f64::consts::PI.sqrt();
            (eig.eigenvalues[i], w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
}

/// Photon-number probabilities (density-matrix diagonal).
pub fn diag_pmf(rho: &CMat) -> Vec<f64> {
    (0..rho.nrows()).map(|n| rho[(n, n)].re).collect()
}

/// ⟨q⟩, ⟨p⟩ and the symmetrised quadrature covariance of a single-mode
/// density matrix, in the vacuum-1/2 convention.
pub fn quadrature_moments(rho: &CMat) -> (f64, f64, [[f64; 2]; 2]) {
    let dim = rho.nrows();
    let a = annihilation(dim);
    let adag = a.adjoint();
    let sqrt2 = std::f64::consts::SQRT_2;
    let q = (&a + &adag) / Complex64::new(sqrt2, 0.0);
    let p = (&a - &adag) / Complex64::new(0.0, sqrt2);
    let tr = |m: &CMat| -> f64 { (rho * m).trace().re };
    let mq = tr(&q);
    let mp = tr(&p);
    let qq = tr(&(&q * &q)) - mq * mq;
    let pp = tr(&(&p * &p)) - mp * mp;
    let qp_sym = 0.5 * tr(&(&q * &p + &p * &q)) - mq * mp;
    (mq, mp, [[qq, qp_sym], [qp_sym, pp]])
}

/// Expectation vector convenience for tests.
pub fn mean_photon(rho: &CMat) -> f64 {
    let dim = rho.nrows();
    let a = annihilation(dim);
    let n_op = a.adjoint() * &a;
    (rho * n_op).trace().re
}

/// Apply a matrix to a density matrix as U ρ U†.
pub fn conjugate(rho: &CMat, u: &CMat) -> CMat {
    u * rho * u.adjoint()
}

/// Truncation sanity: total probability retained in the space.
pub fn trace_re(rho: &CMat) -> f64 {
    rho.trace().re
}

/// Column vector |n⟩.
pub fn fock_ket(dim: usize, n: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    v[n] = Complex64::new(1.0, 0.0);
    v
}
