//! First-order forward-mode dual numbers with `N` independent partials.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const N: usize> {
    pub value: f64,
    pub partials: [f64; N],
}

/// Value plus partials with respect to `q1..q4`.
pub type Dual4 = Dual<4>;

impl<const N: usize> Dual<N> {
    pub fn constant(value: f64) -> Self {
        Dual {
            value,
            partials: [0.0; N],
        }
    }

    /// The `k`-th independent variable at `value`.
    pub fn variable(value: f64, k: usize) -> Self {
        let mut partials = [0.0; N];
        partials[k] = 1.0;
        Dual { value, partials }
    }

    pub fn is_constant(&self) -> bool {
        self.partials.iter().all(|&d| d == 0.0)
    }

    /// Chain rule for a scalar function with value `f` and derivative `df` at `self.value`.
    pub fn chain(self, f: f64, df: f64) -> Self {
        Dual {
            value: f,
            partials: self.partials.map(|d| df * d),
        }
    }

    pub fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }

    pub fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }

    pub fn tan(self) -> Self {
        let t = self.value.tan();
        self.chain(t, 1.0 + t * t)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }

    /// Natural logarithm; caller guarantees a positive argument.
    pub fn ln(self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }

    /// Square root; caller guarantees a positive argument.
    pub fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r)
    }

    pub fn sinh(self) -> Self {
        self.chain(self.value.sinh(), self.value.cosh())
    }

    pub fn cosh(self) -> Self {
        self.chain(self.value.cosh(), self.value.sinh())
    }

    pub fn tanh(self) -> Self {
        let t = self.value.tanh();
        self.chain(t, 1.0 - t * t)
    }

    /// `|x|` with derivative 0 at the kink.
    pub fn abs(self) -> Self {
        let s = if self.value > 0.0 {
            1.0
        } else if self.value < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.value.abs(), s)
    }

    pub fn powi(self, n: i32) -> Self {
        let d = if n == 0 {
            0.0
        } else {
            n as f64 * self.value.powi(n - 1)
        };
        self.chain(self.value.powi(n), d)
    }

    /// `self^exponent` for a positive base.
    pub fn powd(self, exponent: Self) -> Self {
        let value = self.value.powf(exponent.value);
        let d_base = exponent.value * self.value.powf(exponent.value - 1.0);
        let log_base = self.value.ln();
        Dual {
            value,
            partials: std::array::from_fn(|i| {
                d_base * self.partials[i] + value * log_base * exponent.partials[i]
            }),
        }
    }
}

impl<const N: usize> From<f64> for Dual<N> {
    fn from(value: f64) -> Self {
        Dual::constant(value)
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual {
            value: self.value + rhs.value,
            partials: std::array::from_fn(|i| self.partials[i] + rhs.partials[i]),
        }
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual {
            value: self.value - rhs.value,
            partials: std::array::from_fn(|i| self.partials[i] - rhs.partials[i]),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual {
            value: self.value * rhs.value,
            partials: std::array::from_fn(|i| {
                self.partials[i] * rhs.value + self.value * rhs.partials[i]
            }),
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.value;
        let value = self.value * inv;
        Dual {
            value,
            partials: std::array::from_fn(|i| (self.partials[i] - value * rhs.partials[i]) * inv),
        }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            value: -self.value,
            partials: self.partials.map(|d| -d),
        }
    }
}

impl<const N: usize> Add<f64> for Dual<N> {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        Dual {
            value: self.value + rhs,
            partials: self.partials,
        }
    }
}

impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Dual {
            value: self.value * rhs,
            partials: self.partials.map(|d| d * rhs),
        }
    }
}
