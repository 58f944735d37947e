use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c, C64, I};

/// One term `w |x|^(2p-1) exp(-C x^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub weight: C64,
    pub exponent_p: u32,
    pub decay_c: f64,
}

/// Form factor `f(x) = sum w |x|^(2p-1) exp(-C x^2)` on the half line.
#[derive(Clone, Debug, PartialEq)]
pub struct FormFactor {
    terms: Vec<Term>,
}

impl FormFactor {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("a form factor needs at least one term".into()));
        }
        for t in &terms {
            if !(t.decay_c.is_finite() && t.decay_c > 0.0) {
                return Err(Error::InvalidParameter(format!("decay constant must be positive, got {}", t.decay_c)));
            }
            if t.exponent_p < 1 {
                return Err(Error::InvalidParameter("exponent p must be at least 1".into()));
            }
            if !(t.weight.re.is_finite() && t.weight.im.is_finite()) {
                return Err(Error::InvalidParameter("weights must be finite".into()));
            }
        }
        Ok(Self { terms })
    }

    /// `w x e^{-C x^2}`, the default single-term family member.
    pub fn single(weight: f64, exponent_p: u32, decay_c: f64) -> Result<Self> {
        Self::new(vec![Term { weight: c(weight, 0.0), exponent_p, decay_c }])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.weight.im == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.weight.norm() == 0.0)
    }

    /// `f(|x|)`.
    pub fn eval(&self, x: f64) -> C64 {
        let x = x.abs();
        self.terms.iter().fold(c(0.0, 0.0), |acc, t| {
            acc + t.weight * (x.powi(2 * t.exponent_p as i32 - 1) * (-t.decay_c * x * x).exp())
        })
    }

    /// `sum |w| |x|^(2p-1) exp(-C x^2)`, an upper bound for `|f|`.
    pub fn envelope(&self, x: f64) -> f64 {
        let x = x.abs();
        self.terms
            .iter()
            .map(|t| t.weight.norm() * x.powi(2 * t.exponent_p as i32 - 1) * (-t.decay_c * x * x).exp())
            .sum()
    }

    pub fn min_decay(&self) -> f64 {
        self.terms.iter().map(|t| t.decay_c).fold(f64::INFINITY, f64::min)
    }

    pub fn max_decay(&self) -> f64 {
        self.terms.iter().map(|t| t.decay_c).fold(0.0, f64::max)
    }

    fn max_exponent(&self) -> u32 {
        self.terms.iter().map(|t| t.exponent_p).max().unwrap_or(1)
    }

    /// Radius beyond which `(x * envelope(x))^2` stays below `1e-16` of its peak.
    pub fn cutoff(&self) -> f64 {
        let span = ((4.0 * self.max_exponent() as f64 + 80.0) / self.min_decay()).sqrt();
        let n = 4000;
        let h = span / n as f64;
        let profile: Vec<f64> = (0..=n).map(|i| {
            let x = i as f64 * h;
            (x * self.envelope(x)).powi(2)
        }).collect();
        let peak = profile.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return span;
        }
        let last = profile.iter().rposition(|&v| v > 1e-16 * peak).unwrap_or(0);
        ((last + 1) as f64 * h).min(span)
    }

    /// Points where the density profile peaks, used as quadrature breakpoints.
    pub fn peaks(&self) -> Vec<f64> {
        self.terms
            .iter()
            .map(|t| ((2.0 * t.exponent_p as f64) / (2.0 * t.decay_c)).sqrt())
            .collect()
    }
}

/// Logistic function `1 / (1 + e^{-z})`, evaluated without overflow.
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Glued function on the whole line:
/// `|x| (1 + e^{-beta x})^{-1/2} f(x)` for `x >= 0` and the same with
/// `conj f(-x)` for `x < 0`.
pub fn glued_g(ff: &FormFactor, beta: f64, x: f64) -> C64 {
    let f = if x >= 0.0 { ff.eval(x) } else { ff.eval(-x).conj() };
    f * (x.abs() * logistic(beta * x).sqrt())
}

/// Companion `g#(x) = i conj g(-x)`.
pub fn g_sharp(ff: &FormFactor, beta: f64, x: f64) -> C64 {
    I * glued_g(ff, beta, -x).conj()
}

/// Thermal spectral density `4 pi |x f(|x|)|^2 / (1 + e^{-beta x})`.
pub fn spectral_density(ff: &FormFactor, beta: f64, x: f64) -> f64 {
    4.0 * PI * x * x * ff.eval(x).norm_sqr() * logistic(beta * x)
}

/// Rate `pi * f^(beta)(eps)` for a level pair with `eps = E_k - E_j`.
pub fn rate_coefficient(ff: &FormFactor, beta: f64, eps: f64) -> f64 {
    PI * spectral_density(ff, beta, eps)
}

/// Maps `beta = 0` to the small positive value used internally.
pub fn effective_beta(beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("inverse temperature must be >= 0, got {beta}")));
    }
    Ok(if beta == 0.0 { 1e-12 } else { beta })
}

fn half_integer_gamma(n: u32) -> f64 {
    // Gamma(n + 1/2)
    (0..n).fold(PI.sqrt(), |g, k| g * (k as f64 + 0.5))
}

/// `<f_a, f_b>` in `L^2(R^3)` for radial form factors, in closed form.
pub fn l2_inner(a: &FormFactor, b: &FormFactor) -> C64 {
    let mut s = c(0.0, 0.0);
    for ta in a.terms() {
        for tb in b.terms() {
            let n = ta.exponent_p + tb.exponent_p;
            let alpha = ta.decay_c + tb.decay_c;
            let radial = half_integer_gamma(n) / (2.0 * alpha.powf(n as f64 + 0.5));
            s += ta.weight.conj() * tb.weight * (4.0 * PI * radial);
        }
    }
    s
}

/// Checks pairwise orthogonality `|<f_a, f_b>| <= 1e-8 ||f_a|| ||f_b||`.
pub fn check_orthogonality(ffs: &[FormFactor]) -> Result<()> {
    for a in 0..ffs.len() {
        for b in a + 1..ffs.len() {
            let na = l2_inner(&ffs[a], &ffs[a]).re.sqrt();
            let nb = l2_inner(&ffs[b], &ffs[b]).re.sqrt();
            let ov = l2_inner(&ffs[a], &ffs[b]).norm();
            if ov > 1e-8 * na * nb {
                return Err(Error::NonOrthogonalFamily { a, b, overlap: ov / (na * nb) });
            }
        }
    }
    Ok(())
}
