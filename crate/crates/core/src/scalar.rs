//! Coefficient scalars carrying their `t`-derivatives.
//!
//! A [`Scalar`] is a truncated Taylor jet in the parameter `t`: it stores the
//! value together with the first [`Scalar::ORDER`]` - 1` derivatives. All
//! arithmetic propagates the derivative channels (product rule, quotient rule,
//! chain rule for `sqrt` and `powf`), which is how `t`-dependent coefficient
//! functions such as `fᵢ(t)` travel through the exterior calculus without any
//! numerical differentiation.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

const N: usize = 4;

/// Truncated Taylor jet `(f, f', f'', f''')` stored as normalised Taylor
/// coefficients `f⁽ᵏ⁾/k!`.
#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scalar {
    taylor: [f64; N],
}

impl Scalar {
    /// Number of tracked channels (value plus derivatives).
    pub const ORDER: usize = N;

    pub const ZERO: Scalar = Scalar { taylor: [0.0; N] };
    pub const ONE: Scalar = Scalar {
        taylor: [1.0, 0.0, 0.0, 0.0],
    };

    /// A `t`-independent value.
    pub fn constant(value: f64) -> Self {
        let mut taylor = [0.0; N];
        taylor[0] = value;
        Scalar { taylor }
    }

    /// The parameter `t` itself, evaluated at `t = value`.
    pub fn variable(value: f64) -> Self {
        let mut taylor = [0.0; N];
        taylor[0] = value;
        taylor[1] = 1.0;
        Scalar { taylor }
    }

    /// Value with a first derivative; higher derivatives are zero.
    pub fn with_derivative(value: f64, dt_derivative: f64) -> Self {
        let mut taylor = [0.0; N];
        taylor[0] = value;
        taylor[1] = dt_derivative;
        Scalar { taylor }
    }

    /// From plain derivatives `[f, f', f'', f''']` (missing entries are zero).
    pub fn from_derivatives(derivs: &[f64]) -> Self {
        let mut taylor = [0.0; N];
        let mut fact = 1.0;
        for (k, d) in derivs.iter().take(N).enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            taylor[k] = d / fact;
        }
        Scalar { taylor }
    }

    pub fn value(&self) -> f64 {
        self.taylor[0]
    }

    pub fn dt_derivative(&self) -> f64 {
        self.taylor[1]
    }

    /// The `k`-th `t`-derivative (`k < ORDER`).
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.taylor[k] * fact
    }

    /// `d/dt` of the jet. The top channel is lost and reads as zero.
    pub fn dt(&self) -> Scalar {
        let mut taylor = [0.0; N];
        for k in 0..N - 1 {
            taylor[k] = (k + 1) as f64 * self.taylor[k + 1];
        }
        Scalar { taylor }
    }

    pub fn is_zero(&self) -> bool {
        self.taylor.iter().all(|c| *c == 0.0)
    }

    pub fn scale(&self, s: f64) -> Scalar {
        let mut taylor = self.taylor;
        taylor.iter_mut().for_each(|c| *c *= s);
        Scalar { taylor }
    }

    pub fn recip(&self) -> Scalar {
        Scalar::ONE / *self
    }

    pub fn sqrt(&self) -> Scalar {
        let a = &self.taylor;
        let mut s = [0.0; N];
        s[0] = a[0].sqrt();
        for k in 1..N {
            let mut acc = a[k];
            for i in 1..k {
                acc -= s[i] * s[k - i];
            }
            s[k] = acc / (2.0 * s[0]);
        }
        Scalar { taylor: s }
    }

    /// `selfᵖ` for real `p` (value must be positive unless `p` is a
    /// non-negative integer handled by `powi`).
    pub fn powf(&self, p: f64) -> Scalar {
        let a = &self.taylor;
        let mut y = [0.0; N];
        y[0] = a[0].powf(p);
        for k in 1..N {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += ((p + 1.0) * i as f64 - k as f64) * a[i] * y[k - i];
            }
            y[k] = acc / (k as f64 * a[0]);
        }
        Scalar { taylor: y }
    }

    pub fn powi(&self, n: u32) -> Scalar {
        (0..n).fold(Scalar::ONE, |acc, _| acc * *self)
    }

    /// Maximum absolute difference over all channels.
    pub fn max_abs_diff(&self, other: &Scalar) -> f64 {
        self.taylor
            .iter()
            .zip(&other.taylor)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({}; d/dt {})", self.value(), self.dt_derivative())
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::constant(v)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(mut self, rhs: Scalar) -> Scalar {
        for (a, b) in self.taylor.iter_mut().zip(rhs.taylor) {
            *a += b;
        }
        self
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(mut self, rhs: Scalar) -> Scalar {
        for (a, b) in self.taylor.iter_mut().zip(rhs.taylor) {
            *a -= b;
        }
        self
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.scale(-1.0)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = (0..=k).map(|i| self.taylor[i] * rhs.taylor[k - i]).sum();
        }
        Scalar { taylor: out }
    }
}

impl Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        let b = &rhs.taylor;
        let mut q = [0.0; N];
        for k in 0..N {
            let mut acc = self.taylor[k];
            for i in 1..=k {
                acc -= b[i] * q[k - i];
            }
            q[k] = acc / b[0];
        }
        Scalar { taylor: q }
    }
}

impl Mul<f64> for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: f64) -> Scalar {
        self.scale(rhs)
    }
}

impl Mul<Scalar> for f64 {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        rhs.scale(self)
    }
}

impl Div<f64> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: f64) -> Scalar {
        self.scale(1.0 / rhs)
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        *self = *self + rhs;
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        *self = *self - rhs;
    }
}

impl MulAssign for Scalar {
    fn mul_assign(&mut self, rhs: Scalar) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::ZERO, |a, b| a + b)
    }
}

/// Minimal field interface shared by `f64` and [`Scalar`], so that ODE
/// right-hand sides can be evaluated either on plain numbers or on jets.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn lift(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(&self) -> Self;
}

impl Real for f64 {
    fn lift(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}

impl Real for Scalar {
    fn lift(v: f64) -> Self {
        Scalar::constant(v)
    }
    fn value(&self) -> f64 {
        self.taylor[0]
    }
    fn sqrt(&self) -> Self {
        Scalar::sqrt(self)
    }
}

/// Taylor jets of the solution of the autonomous system `y' = rhs(y)` through
/// `y(t₀) = y0`, built by Picard iteration on truncated series (one order per
/// sweep). The returned jets are exact to [`Scalar::ORDER`] channels.
pub fn ode_jets<const D: usize>(
    y0: [f64; D],
    mut rhs: impl FnMut(&[Scalar; D]) -> [Scalar; D],
) -> [Scalar; D] {
    let mut jets = y0.map(Scalar::constant);
    for _ in 1..N {
        let f = rhs(&jets);
        let mut next = y0.map(Scalar::constant);
        for d in 0..D {
            let mut taylor = next[d].taylor;
            for k in 1..N {
                taylor[k] = f[d].taylor[k - 1] / k as f64;
            }
            next[d] = Scalar { taylor };
        }
        jets = next;
    }
    jets
}
