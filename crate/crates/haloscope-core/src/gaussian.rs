//! Minimal Gaussian-state toolbox.
//!
//! States are one or two bosonic modes described by a quadrature mean vector
//! and covariance matrix in (q, p) ordering, q = (a + a†)/√2,
//! p = (a − a†)/(i√2), so the vacuum covariance is I/2 and a thermal state of
//! mean photon number N has covariance (N + 1/2)·I. Ladder-basis covariances
//! V = diag(N+1, N) used elsewhere in the literature convert to this
//! convention at the module boundary.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{dd_cholesky_solve, Dd};

/// Gaussian state of 1 or 2 modes. Vacuum covariance is I/2.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub n_modes: usize,
    /// Quadrature means, length 2·n_modes, ordering (q1, p1, q2, p2).
    pub mean: Vec<f64>,
    /// Symmetric 2n x 2n covariance, same ordering.
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validated constructor: checks symmetry and the uncertainty relation
    /// (symplectic eigenvalues of cov at least 1/2 up to 1e-10).
    pub fn new(n_modes: usize, mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let s = Self::new_unchecked(n_modes, mean, cov);
        s.validate()?;
        Ok(s)
    }

    /// Constructor without physicality checks. Used for finite-difference
    /// probing of state families, where intermediate matrices may dip below
    /// the vacuum floor.
    pub fn new_unchecked(n_modes: usize, mean: Vec<f64>, cov: DMatrix<f64>) -> Self {
        assert!(n_modes == 1 || n_modes == 2, "only 1 or 2 modes supported");
        assert_eq!(mean.len(), 2 * n_modes);
        assert_eq!(cov.nrows(), 2 * n_modes);
        assert_eq!(cov.ncols(), 2 * n_modes);
        GaussianState { n_modes, mean, cov }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        let d = 2 * n_modes;
        GaussianState::new_unchecked(n_modes, vec![0.0; d], DMatrix::identity(d, d) * 0.5)
    }

    /// Thermal state of mean photon number `n` on every mode.
    pub fn thermal(n_modes: usize, n: f64) -> Self {
        let d = 2 * n_modes;
        GaussianState::new_unchecked(n_modes, vec![0.0; d], DMatrix::identity(d, d) * (n + 0.5))
    }

    pub fn validate(&self) -> Result<()> {
        let d = 2 * self.n_modes;
        for i in 0..d {
            for j in 0..i {
                if (self.cov[(i, j)] - self.cov[(j, i)]).abs()
                    > 1e-10 * self.cov[(i, i)].abs().max(1.0)
                {
                    return Err(Error::State("covariance not symmetric".into()));
                }
            }
        }
        let nu_min = self
            .symplectic_eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if nu_min < 0.5 - 1e-10 {
            return Err(Error::State(format!(
                "covariance violates the uncertainty relation (min symplectic eigenvalue {nu_min:.3e})"
            )));
        }
        Ok(())
    }

    /// Symplectic eigenvalues of the covariance (vacuum value 1/2).
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let d = 2 * self.n_modes;
        let omega = symplectic_form(self.n_modes);
        let m = &omega * &self.cov;
        let eigs = DMatrix::from_iterator(d, d, m.iter().copied()).complex_eigenvalues();
        let mut nus: Vec<f64> = eigs.iter().map(|z| z.im.abs()).collect();
        nus.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nus.truncate(d);
        // eigenvalues come in +/- pairs; keep one of each
        nus.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect()
    }

    /// Reduced state of one mode of a two-mode state.
    pub fn reduce(&self, mode: usize) -> Result<GaussianState> {
        if mode >= self.n_modes {
            return Err(Error::Config(format!(
                "mode {mode} out of range for {}-mode state",
                self.n_modes
            )));
        }
        let o = 2 * mode;
        let mean = vec![self.mean[o], self.mean[o + 1]];
        let cov = self.cov.view((o, o), (2, 2)).into_owned();
        Ok(GaussianState::new_unchecked(1, mean, cov))
    }

    /// Mean photon number of a single mode.
    pub fn mean_photons(&self, mode: usize) -> f64 {
        let o = 2 * mode;
        let v = 0.5 * (self.cov[(o, o)] + self.cov[(o + 1, o + 1)]) - 0.5;
        let disp = 0.5 * (self.mean[o].powi(2) + self.mean[o + 1].powi(2));
        v + disp
    }

    /// Wigner characteristic-function parameters (A, B, C) of a single-mode
    /// state: A = ⟨Δa†Δa⟩, B = −⟨Δa²⟩, C = ⟨a⟩.
    pub fn characteristic_params(&self) -> Result<(f64, Complex64, Complex64)> {
        if self.n_modes != 1 {
            return Err(Error::Config(
                "characteristic parameters require a single-mode state".into(),
            ));
        }
        let vqq = self.cov[(0, 0)];
        let vpp = self.cov[(1, 1)];
        let vqp = self.cov[(0, 1)];
        let a = 0.5 * (vqq + vpp) - 0.5;
        let b = Complex64::new(-0.5 * (vqq - vpp), -vqp);
        let c = Complex64::new(self.mean[0], self.mean[1]) / std::f64::consts::SQRT_2;
        Ok((a, b, c))
    }
}

/// Standard symplectic form Ω (q, p ordering): blocks [[0, 1], [-1, 0]].
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let d = 2 * n_modes;
    let mut omega = DMatrix::zeros(d, d);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// A symplectic operation together with the matrix realising it.
#[derive(Debug, Clone)]
pub struct SymplecticOp {
    pub kind: SymplecticKind,
    pub matrix: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymplecticKind {
    /// Single-mode squeezer of quadrature gain G: q-variance × G, p-variance × 1/G.
    Squeezer { gain: f64 },
    /// Two-mode squeezer of quadrature gain G: the (q1+q2)/√2 variance scales
    /// by G and (q1−q2)/√2 by 1/G (p quadratures conversely).
    TwoModeSqueezer { gain: f64 },
    /// Balanced 50/50 beamsplitter.
    BalancedBeamsplitter,
    /// Phase rotation by angle theta.
    PhaseRotation { theta: f64 },
}

impl SymplecticOp {
    pub fn squeezer(gain: f64) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::Domain(format!("squeezer gain must be >= 1, got {gain}")));
        }
        let s = gain.sqrt();
        let matrix = DMatrix::from_row_slice(2, 2, &[s, 0.0, 0.0, 1.0 / s]);
        Ok(SymplecticOp {
            kind: SymplecticKind::Squeezer { gain },
            matrix,
        })
    }

    /// Inverse single-mode squeezer S(G)^{-1} = S applied with gain 1/G.
    pub fn squeezer_inverse(gain: f64) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::Domain(format!("squeezer gain must be >= 1, got {gain}")));
        }
        let s = gain.sqrt();
        let matrix = DMatrix::from_row_slice(2, 2, &[1.0 / s, 0.0, 0.0, s]);
        Ok(SymplecticOp {
            kind: SymplecticKind::Squeezer { gain },
            matrix,
        })
    }

    pub fn two_mode_squeezer(gain: f64) -> Result<Self> {
        Self::two_mode_squeezer_signed(gain, false)
    }

    pub fn two_mode_squeezer_inverse(gain: f64) -> Result<Self> {
        Self::two_mode_squeezer_signed(gain, true)
    }

    fn two_mode_squeezer_signed(gain: f64, inverse: bool) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::Domain(format!(
                "two-mode squeezer gain must be >= 1, got {gain}"
            )));
        }
        // e^{2r} = gain
        let er = gain.sqrt().sqrt(); // e^{r/... } careful: e^r = sqrt(gain)
        let er = er * er; // e^r
        let c = 0.5 * (er + 1.0 / er);
        let s = 0.5 * (er - 1.0 / er) * if inverse { -1.0 } else { 1.0 };
        let matrix = DMatrix::from_row_slice(
            4,
            4,
            &[
                c, 0.0, s, 0.0, //
                0.0, c, 0.0, -s, //
                s, 0.0, c, 0.0, //
                0.0, -s, 0.0, c,
            ],
        );
        Ok(SymplecticOp {
            kind: SymplecticKind::TwoModeSqueezer { gain },
            matrix,
        })
    }

    pub fn balanced_beamsplitter() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let matrix = DMatrix::from_row_slice(
            4,
            4,
            &[
                r, 0.0, r, 0.0, //
                0.0, r, 0.0, r, //
                -r, 0.0, r, 0.0, //
                0.0, -r, 0.0, r,
            ],
        );
        SymplecticOp {
            kind: SymplecticKind::BalancedBeamsplitter,
            matrix,
        }
    }

    pub fn phase_rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let matrix = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        SymplecticOp {
            kind: SymplecticKind::PhaseRotation { theta },
            matrix,
        }
    }

    /// || SᵀΩS − Ω ||_max, zero for an exact symplectic matrix.
    pub fn symplectic_defect(&self) -> f64 {
        let n_modes = self.matrix.nrows() / 2;
        let omega = symplectic_form(n_modes);
        let d = self.matrix.transpose() * &omega * &self.matrix - &omega;
        d.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// A bosonic thermal-loss channel with optional classical additive noise,
/// acting on one mode: cov → η·cov + (1−η)(n_env + 1/2)·I + n_add·I and
/// mean → √η·mean.
#[derive(Debug, Clone, Copy)]
pub struct ThermalLossChannel {
    pub eta: f64,
    pub n_env: f64,
    pub n_add: f64,
}

impl ThermalLossChannel {
    pub fn new(eta: f64, n_env: f64, n_add: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Domain(format!(
                "transmissivity must lie in (0, 1], got {eta}"
            )));
        }
        if n_env < 0.0 || n_add < 0.0 {
            return Err(Error::Domain(
                "environment and additive photon numbers must be nonnegative".into(),
            ));
        }
        Ok(ThermalLossChannel { eta, n_env, n_add })
    }
}

/// Apply a symplectic operation to the listed modes (all other modes are
/// untouched). `modes` must match the operation's mode count.
pub fn apply_symplectic(
    state: &GaussianState,
    op: &SymplecticOp,
    modes: &[usize],
) -> Result<GaussianState> {
    let op_modes = op.matrix.nrows() / 2;
    if modes.len() != op_modes {
        return Err(Error::Config(format!(
            "operation acts on {op_modes} mode(s) but {} given",
            modes.len()
        )));
    }
    for &m in modes {
        if m >= state.n_modes {
            return Err(Error::Config(format!("mode index {m} out of range")));
        }
    }
    let d = 2 * state.n_modes;
    // embed op into the full space
    let mut full = DMatrix::identity(d, d);
    for (bi, &mi) in modes.iter().enumerate() {
        for (bj, &mj) in modes.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    full[(2 * mi + a, 2 * mj + b)] = op.matrix[(2 * bi + a, 2 * bj + b)];
                }
            }
        }
    }
    // clear identity entries on acted modes not covered above
    for &mi in modes {
        for a in 0..2 {
            for j in 0..d {
                let col_mode = j / 2;
                if !modes.contains(&col_mode) {
                    full[(2 * mi + a, j)] = 0.0;
                }
            }
        }
    }
    let mean_v = nalgebra::DVector::from_vec(state.mean.clone());
    let new_mean = (&full * mean_v).iter().copied().collect();
    let new_cov = &full * &state.cov * full.transpose();
    Ok(GaussianState::new_unchecked(state.n_modes, new_mean, new_cov))
}

/// Apply a thermal-loss channel to one mode of the state.
pub fn apply_loss(
    state: &GaussianState,
    ch: &ThermalLossChannel,
    mode: usize,
) -> Result<GaussianState> {
    if mode >= state.n_modes {
        return Err(Error::Config(format!("mode index {mode} out of range")));
    }
    let d = 2 * state.n_modes;
    let sq = ch.eta.sqrt();
    let mut mean = state.mean.clone();
    mean[2 * mode] *= sq;
    mean[2 * mode + 1] *= sq;
    let mut cov = state.cov.clone();
    for i in 0..d {
        for j in 0..d {
            let i_in = i / 2 == mode;
            let j_in = j / 2 == mode;
            match (i_in, j_in) {
                (true, true) => cov[(i, j)] *= ch.eta,
                (true, false) | (false, true) => cov[(i, j)] *= sq,
                (false, false) => {}
            }
        }
    }
    let floor = (1.0 - ch.eta) * (ch.n_env + 0.5) + ch.n_add;
    for a in 0..2 {
        cov[(2 * mode + a, 2 * mode + a)] += floor;
    }
    Ok(GaussianState::new_unchecked(state.n_modes, mean, cov))
}

// ---------------------------------------------------------------------------
// Quantum Fisher information
// ---------------------------------------------------------------------------

/// A differentiable family of Gaussian states. `state` must be defined in a
/// neighbourhood of the evaluation point; probe points may be unphysical
/// matrices, which is fine for derivative extraction.
pub trait StateFamily {
    fn state(&self, theta: f64) -> GaussianState;
}

impl<F: Fn(f64) -> GaussianState> StateFamily for F {
    fn state(&self, theta: f64) -> GaussianState {
        self(theta)
    }
}

fn central_diff(
    family: &dyn StateFamily,
    theta0: f64,
    h: f64,
    d: usize,
) -> (Vec<f64>, Vec<f64>) {
    let sp = family.state(theta0 + h);
    let sm = family.state(theta0 - h);
    let inv = 0.5 / h;
    let dmean = (0..d).map(|i| (sp.mean[i] - sm.mean[i]) * inv).collect();
    let mut dcov = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            dcov[i * d + j] = (sp.cov[(i, j)] - sm.cov[(i, j)]) * inv;
        }
    }
    (dmean, dcov)
}

fn richardson(
    family: &dyn StateFamily,
    theta0: f64,
    h: f64,
    d: usize,
) -> (Vec<f64>, Vec<f64>) {
    let (m1, c1) = central_diff(family, theta0, h, d);
    let (m2, c2) = central_diff(family, theta0, 0.5 * h, d);
    let comb = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(x, y)| (4.0 * y - x) / 3.0)
            .collect()
    };
    (comb(&m1, &m2), comb(&c1, &c2))
}

/// Exact single-parameter QFI of a Gaussian state given its covariance,
/// mean and their parameter derivatives (all in the vacuum-1/2 convention).
///
/// Uses the moment-matrix formula F = ½ vec(∂σ)ᵀ(σ⊗σ − Ω⊗Ω)⁻¹vec(∂σ)
/// + 2 ∂dᵀσ⁻¹∂d with σ = 2·cov, solved in double-double arithmetic; pure
/// states are regularised by clamping symplectic eigenvalues just above the
/// vacuum floor.
pub fn qfi_from_derivatives(
    state: &GaussianState,
    dmean: &[f64],
    dcov: &[f64],
) -> Result<f64> {
    state.validate()?;
    let d = 2 * state.n_modes;
    let mut sigma = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            sigma[(i, j)] = 2.0 * state.cov[(i, j)];
        }
    }
    // clamp nearly pure states: scale so the smallest symplectic eigenvalue
    // of sigma is at least 1 + 2e-12 (cov convention: 1/2 + 1e-12)
    let nu_min = state
        .symplectic_eigenvalues()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
        * 2.0;
    if nu_min < 1.0 + 2e-12 {
        let scale = (1.0 + 2e-12) / nu_min.max(1e-300);
        sigma *= scale;
    }
    let omega = symplectic_form(state.n_modes);

    // M = sigma (x) sigma - Omega (x) Omega, built and solved in dd
    let n2 = d * d;
    let mut m = vec![Dd::ZERO; n2 * n2];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let row = i * d + k;
                    let col = j * d + l;
                    let v = Dd::from(sigma[(i, j)])
                        .mul(Dd::from(sigma[(k, l)]))
                        .sub(Dd::from(omega[(i, j)]).mul(Dd::from(omega[(k, l)])));
                    m[row * n2 + col] = v;
                }
            }
        }
    }
    let b: Vec<Dd> = (0..n2).map(|r| Dd::from(2.0 * dcov[r])).collect();
    let x = dd_cholesky_solve(&m, &b, n2)?;
    let mut qfi = Dd::ZERO;
    for r in 0..n2 {
        qfi = qfi.add(b[r].mul(x[r]));
    }
    let mut total = 0.5 * qfi.to_f64();

    // mean contribution: 2 ∂dᵀ σ⁻¹ ∂d
    if dmean.iter().any(|&v| v != 0.0) {
        let mut sm = vec![Dd::ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                sm[i * d + j] = Dd::from(sigma[(i, j)]);
            }
        }
        let bm: Vec<Dd> = dmean.iter().map(|&v| Dd::from(v)).collect();
        let xm = dd_cholesky_solve(&sm, &bm, d)?;
        let mut t = Dd::ZERO;
        for i in 0..d {
            t = t.add(bm[i].mul(xm[i]));
        }
        total += 2.0 * t.to_f64();
    }
    Ok(total)
}

/// Single-parameter Gaussian QFI with derivatives from Richardson-refined
/// central differences of the family at `theta0` with base step `dtheta`.
///
/// Errors with [`Error::Instability`] when the two Richardson levels differ
/// by more than 1e-6 relative.
pub fn qfi_gaussian(family: &dyn StateFamily, theta0: f64, dtheta: f64) -> Result<f64> {
    if !(dtheta > 0.0) {
        return Err(Error::Domain("dtheta must be positive".into()));
    }
    let s0 = family.state(theta0);
    let d = 2 * s0.n_modes;
    let (m1, c1) = richardson(family, theta0, dtheta, d);
    let (m2, c2) = richardson(family, theta0, 0.5 * dtheta, d);
    let q1 = qfi_from_derivatives(&s0, &m1, &c1)?;
    let q2 = qfi_from_derivatives(&s0, &m2, &c2)?;
    let rel = (q1 - q2).abs() / q2.abs().max(1e-300);
    if rel > 1e-6 {
        return Err(Error::Instability(format!(
            "QFI derivative did not converge across Richardson levels (rel change {rel:.3e})"
        )));
    }
    Ok(q2)
}

/// A differentiable family of Gaussian readouts: mean vector and covariance
/// of the measured outcome distribution as a function of the parameter.
pub trait ReadoutFamily {
    fn readout(&self, theta: f64) -> (Vec<f64>, DMatrix<f64>);
}

impl<F: Fn(f64) -> (Vec<f64>, DMatrix<f64>)> ReadoutFamily for F {
    fn readout(&self, theta: f64) -> (Vec<f64>, DMatrix<f64>) {
        self(theta)
    }
}

/// Classical Fisher information of a Gaussian readout,
/// FI = μ′ᵀΣ⁻¹μ′ + ½ Tr[(Σ⁻¹Σ′)²], derivatives by Richardson-refined central
/// differences.
pub fn cfi_gaussian_readout(
    family: &dyn ReadoutFamily,
    theta0: f64,
    dtheta: f64,
) -> Result<f64> {
    if !(dtheta > 0.0) {
        return Err(Error::Domain("dtheta must be positive".into()));
    }
    let (mu0, sig0) = family.readout(theta0);
    let k = mu0.len();
    let eval = |h: f64| -> Result<f64> {
        let diff = |hh: f64| {
            let (mp, sp) = family.readout(theta0 + hh);
            let (mm, sm) = family.readout(theta0 - hh);
            let inv = 0.5 / hh;
            let dmu: Vec<f64> = (0..k).map(|i| (mp[i] - mm[i]) * inv).collect();
            let dsig = (&sp - &sm) * inv;
            (dmu, dsig)
        };
        let (m1, s1) = diff(h);
        let (m2, s2) = diff(0.5 * h);
        let dmu: Vec<f64> = m1
            .iter()
            .zip(&m2)
            .map(|(a, b)| (4.0 * b - a) / 3.0)
            .collect();
        let dsig = (&s2 * 4.0 - &s1) / 3.0;
        let inv = sig0.clone().try_inverse().ok_or_else(|| {
            Error::MeasurementModel("singular readout covariance".into())
        })?;
        let dmu_v = nalgebra::DVector::from_vec(dmu);
        let mean_term = (dmu_v.transpose() * &inv * &dmu_v)[(0, 0)];
        let a = &inv * &dsig;
        let cov_term = 0.5 * (&a * &a).trace();
        Ok(mean_term + cov_term)
    };
    let f1 = eval(dtheta)?;
    let f2 = eval(0.5 * dtheta)?;
    let rel = (f1 - f2).abs() / f2.abs().max(1e-300);
    if rel > 1e-6 {
        return Err(Error::Instability(format!(
            "readout FI derivative did not converge (rel change {rel:.3e})"
        )));
    }
    Ok(f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn squeezer_identity_leaves_vacuum() {
        let v = GaussianState::vacuum(1);
        let op = SymplecticOp::squeezer(1.0).unwrap();
        let out = apply_symplectic(&v, &op, &[0]).unwrap();
        assert_relative_eq!(out.cov[(0, 0)], 0.5, max_relative = 1e-15);
        assert_relative_eq!(out.cov[(1, 1)], 0.5, max_relative = 1e-15);
    }

    #[test]
    fn squeezer_gain_four() {
        let v = GaussianState::vacuum(1);
        let op = SymplecticOp::squeezer(4.0).unwrap();
        let out = apply_symplectic(&v, &op, &[0]).unwrap();
        assert_relative_eq!(out.cov[(0, 0)], 2.0, max_relative = 1e-14);
        assert_relative_eq!(out.cov[(1, 1)], 0.125, max_relative = 1e-14);
    }

    #[test]
    fn two_mode_squeezed_vacuum_reduced_is_thermal() {
        // reduced per-quadrature variance must be (G + 1/G)/4
        let g = 7.3;
        let v = GaussianState::vacuum(2);
        let op = SymplecticOp::two_mode_squeezer(g).unwrap();
        let out = apply_symplectic(&v, &op, &[0, 1]).unwrap();
        let red = out.reduce(0).unwrap();
        let expect = (g + 1.0 / g) / 4.0;
        assert_relative_eq!(red.cov[(0, 0)], expect, max_relative = 1e-13);
        assert_relative_eq!(red.cov[(1, 1)], expect, max_relative = 1e-13);
        assert_relative_eq!(red.cov[(0, 1)], 0.0, epsilon = 1e-14);
        // plus-quadrature variance gains G
        let qplus = 0.5 * (out.cov[(0, 0)] + 2.0 * out.cov[(0, 2)] + out.cov[(2, 2)]);
        assert_relative_eq!(qplus, 0.5 * g, max_relative = 1e-13);
    }

    #[test]
    fn symplectic_ops_satisfy_invariant() {
        for op in [
            SymplecticOp::squeezer(13.0).unwrap(),
            SymplecticOp::two_mode_squeezer(250.0).unwrap(),
            SymplecticOp::balanced_beamsplitter(),
            SymplecticOp::phase_rotation(0.77),
        ] {
            assert!(op.symplectic_defect() < 1e-12, "{:?}", op.kind);
        }
    }

    #[test]
    fn loss_identity_and_full_replacement() {
        let v = GaussianState::vacuum(1);
        let id = ThermalLossChannel::new(1.0, 0.0, 0.0).unwrap();
        let out = apply_loss(&v, &id, 0).unwrap();
        assert_relative_eq!(out.cov[(0, 0)], 0.5, max_relative = 1e-15);
        // eta -> 0 replaces with the environment (use tiny eta)
        let nt = 0.3;
        let repl = ThermalLossChannel::new(1e-14, nt, 0.0).unwrap();
        let out = apply_loss(&v, &repl, 0).unwrap();
        assert_relative_eq!(out.cov[(0, 0)], nt + 0.5, max_relative = 1e-12);
    }

    #[test]
    fn loss_arithmetic_example() {
        // cov (1/2)I, eta 0.5, n_env 0.1, n_add 0.05 -> 0.6 I
        let v = GaussianState::vacuum(1);
        let ch = ThermalLossChannel::new(0.5, 0.1, 0.05).unwrap();
        let out = apply_loss(&v, &ch, 0).unwrap();
        assert_relative_eq!(out.cov[(0, 0)], 0.6, max_relative = 1e-14);
        assert_relative_eq!(out.cov[(1, 1)], 0.6, max_relative = 1e-14);
    }

    #[test]
    fn loss_rejects_bad_eta() {
        assert!(ThermalLossChannel::new(0.0, 0.0, 0.0).is_err());
        assert!(ThermalLossChannel::new(1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn qfi_thermal_family() {
        let nt = 0.21;
        let fam = move |n: f64| GaussianState::thermal(1, n);
        let q = qfi_gaussian(&fam, nt, 1e-5 * nt.max(1.0)).unwrap();
        assert_relative_eq!(q, 1.0 / (nt * (1.0 + nt)), max_relative = 1e-9);
    }

    #[test]
    fn qfi_displacement_family() {
        let fam = move |t: f64| {
            let mut s = GaussianState::vacuum(1);
            s.mean[0] = t;
            s
        };
        let q = qfi_gaussian(&fam, 0.4, 1e-5).unwrap();
        assert_relative_eq!(q, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn cfi_variance_family() {
        // sigma^2(theta) = theta, zero mean: FI = 1/(2 theta^2) -> 1/2 at theta=1
        let fam = |t: f64| (vec![0.0], DMatrix::from_row_slice(1, 1, &[t]));
        let fi = cfi_gaussian_readout(&fam, 1.0, 1e-5).unwrap();
        assert_relative_eq!(fi, 0.5, max_relative = 1e-8);
    }

    #[test]
    fn cfi_shifted_variance_family() {
        // variance N_T + 1/2 + c N_A, FI at N_A = 0 is c^2/(2 (N_T+1/2)^2)
        let nt = 0.07;
        let c = 0.9;
        let fam = move |t: f64| (vec![0.0], DMatrix::from_row_slice(1, 1, &[nt + 0.5 + c * t]));
        let fi = cfi_gaussian_readout(&fam, 0.0, 1e-5).unwrap();
        assert_relative_eq!(fi, c * c / (2.0 * (nt + 0.5_f64).powi(2)), max_relative = 1e-8);
    }

    #[test]
    fn state_validation_rejects_subvacuum() {
        let d = DMatrix::identity(2, 2) * 0.4;
        assert!(GaussianState::new(1, vec![0.0, 0.0], d).is_err());
    }
}
