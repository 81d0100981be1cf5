//! Shared numerical kernels: stable divided differences of `exp`, adaptive
//! Simpson quadrature, golden-section refinement and a small double-double
//! arithmetic type used where f64 conditioning is insufficient.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// exp(z) - 1 for complex z without cancellation at small |z|.
pub fn expm1_c(z: Complex64) -> Complex64 {
    if z.norm() > 0.5 {
        return z.exp() - 1.0;
    }
    // Taylor: z + z^2/2! + ...
    let mut term = z;
    let mut sum = z;
    for k in 2..40 {
        term *= z / k as f64;
        sum += term;
        if term.norm() < 1e-20 * sum.norm().max(1e-300) {
            break;
        }
    }
    sum
}

/// First divided difference of exp: (e^a - e^b)/(a - b), continuous at a = b.
pub fn exp_dd1(a: Complex64, b: Complex64) -> Complex64 {
    let mid = (a + b) * 0.5;
    let d = (a - b) * 0.5;
    // (e^a - e^b)/(a-b) = e^{(a+b)/2} * sinh(d)/d
    mid.exp() * sinhc(d)
}

fn sinhc(d: Complex64) -> Complex64 {
    if d.norm() > 0.5 {
        return d.sinh() / d;
    }
    let d2 = d * d;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..20 {
        let den = (2 * k) as f64 * (2 * k + 1) as f64;
        term *= d2 / den;
        sum += term;
        if term.norm() < 1e-20 {
            break;
        }
    }
    sum
}

/// Second divided difference of exp over nodes {a, b, c}. Symmetric in its
/// arguments and entire, so no special-casing of coincident nodes is needed
/// by callers; internally a Taylor expansion takes over when the nodes
/// cluster.
pub fn exp_dd2(a: Complex64, b: Complex64, c: Complex64) -> Complex64 {
    let center = (a + b + c) / 3.0;
    let (ya, yb, yc) = (a - center, b - center, c - center);
    let spread = ya.norm().max(yb.norm()).max(yc.norm());
    if spread <= 0.4 {
        // exp[a,b,c] = e^center * sum_k h_k(y)/(k+2)!  with h_k the complete
        // homogeneous symmetric polynomial of the shifted nodes, via
        // h_k = e1 h_{k-1} - e2 h_{k-2} + e3 h_{k-3}.
        let e1 = ya + yb + yc;
        let e2 = ya * yb + ya * yc + yb * yc;
        let e3 = ya * yb * yc;
        let mut hm3 = Complex64::new(0.0, 0.0); // h_{-1}
        let mut hm2 = Complex64::new(1.0, 0.0); // h_0
        let mut hm1 = e1; // h_1
        let mut factorial = 2.0f64; // (0+2)!
        let mut sum = hm2 / factorial;
        factorial *= 3.0;
        sum += hm1 / factorial;
        for k in 2..40u32 {
            let h_k = e1 * hm1 - e2 * hm2 + e3 * hm3;
            factorial *= (k + 2) as f64;
            sum += h_k / factorial;
            hm3 = hm2;
            hm2 = hm1;
            hm1 = h_k;
            if h_k.norm() / factorial < 1e-22 * sum.norm().max(1e-300) {
                break;
            }
        }
        return center.exp() * sum;
    }
    // order the pair with maximal separation as the outer nodes
    let mut nodes = [a, b, c];
    let mut best = (0usize, 2usize);
    let mut sep = -1.0f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let s = (nodes[i] - nodes[j]).norm();
            if s > sep {
                sep = s;
                best = (i, j);
            }
        }
    }
    let k = 3 - best.0 - best.1;
    nodes = [nodes[best.0], nodes[k], nodes[best.1]];
    (exp_dd1(nodes[0], nodes[1]) - exp_dd1(nodes[1], nodes[2])) / (nodes[0] - nodes[2])
}

/// Adaptive Simpson on [a, b] with absolute/relative tolerance mix.
pub fn simpson_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: usize) -> f64 {
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0;
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson over the rectangle [x0,x1] x [y0,y1].
pub fn simpson2d_adaptive<F: Fn(f64, f64) -> f64>(
    f: &F,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let inner = |y: f64| simpson_adaptive(&|x| f(x, y), x0, x1, tol * 0.1, depth);
    simpson_adaptive(&inner, y0, y1, tol, depth)
}

/// Golden-section maximisation of `f` on [a, b]; returns (x_max, f_max).
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > rel_tol * (a.abs() + b.abs()).max(1e-300) {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Grow the upper limit of an even integrand's half-line integral until the
/// last decade contributes less than `rel_tail` of the running total.
pub fn halfline_even_integral<F: Fn(f64) -> f64>(
    f: &F,
    omega_start: f64,
    rel_tail: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let mut hi = omega_start;
    let mut total = 2.0 * simpson_adaptive(f, 0.0, hi, tol, 40);
    for _ in 0..40 {
        let next = hi * 10.0;
        let slab = 2.0 * simpson_adaptive(f, hi, next, tol, 40);
        total += slab;
        hi = next;
        if slab.abs() <= rel_tail * total.abs().max(1e-300) {
            return Ok((total, hi));
        }
    }
    Err(Error::Accuracy(
        "frequency-integral tail did not converge while growing the cutoff".into(),
    ))
}

// ---------------------------------------------------------------------------
// Double-double arithmetic. Only what the Gaussian QFI solve needs.
// ---------------------------------------------------------------------------

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2. Roughly 31 significant
/// digits, enough to invert the badly conditioned moment matrices produced by
/// strong squeezing without losing the 1e-8 oracle tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: err }
    }

    #[inline]
    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        let err = a.mul_add(b, -p);
        Dd { hi: p, lo: err }
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        let r = Dd::two_sum(s.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, other.hi);
        let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
        let r = Dd::two_sum(p.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from(q1)));
        let q2 = r.hi / other.hi;
        let r2 = r.sub(other.mul(Dd::from(q2)));
        let q3 = r2.hi / other.hi;
        Dd::from(q1).add(Dd::from(q2)).add(Dd::from(q3))
    }

    #[inline]
    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::from(self.hi.sqrt());
        }
        let x = self.hi.sqrt();
        // one Newton step in dd: x' = (x + self/x)/2
        let t = self.div(Dd::from(x));
        let s = Dd::from(x).add(t);
        Dd {
            hi: 0.5 * s.hi,
            lo: 0.5 * s.lo,
        }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Solve the symmetric positive-definite system A x = b in double-double via
/// Cholesky. `a` is row-major n x n.
pub fn dd_cholesky_solve(a: &[Dd], b: &[Dd], n: usize) -> Result<Vec<Dd>> {
    let mut l = vec![Dd::ZERO; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s.sub(l[i * n + k].mul(l[j * n + k]));
            }
            if i == j {
                if s.hi <= 0.0 {
                    return Err(Error::State(
                        "moment matrix not positive definite in QFI solve".into(),
                    ));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s.div(l[j * n + j]);
            }
        }
    }
    let mut y = vec![Dd::ZERO; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s.sub(l[i * n + k].mul(y[k]));
        }
        y[i] = s.div(l[i * n + i]);
    }
    let mut x = vec![Dd::ZERO; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s = s.sub(l[k * n + i].mul(x[k]));
        }
        x[i] = s.div(l[i * n + i]);
    }
    Ok(x)
}
