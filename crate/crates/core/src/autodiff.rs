//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar quantity
//! with respect to the `n` coordinates of a chart. Every arithmetic operation
//! and every elementary function propagates both derivative orders with the
//! exact chain rule, so derivatives are correct to rounding error.
//!
//! The Hessian is stored densely (row-major `n × n`). Only the upper triangle
//! is ever computed; the lower triangle is a bitwise mirror, which keeps the
//! Hessian exactly symmetric no matter how long the computation runs.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Failure of a jet operation outside its domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{function} is undefined at {argument}")]
    Domain {
        function: &'static str,
        argument: f64,
    },
}

/// Value, gradient and symmetric Hessian of a scalar at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

/// Builds a symmetric `n × n` matrix from its upper triangle.
fn symmetric(n: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = entry(i, j);
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    out
}

/// Seeds one jet per coordinate: value `point[i]`, gradient `e_i`, zero Hessian.
pub fn seed_variables(point: &[f64]) -> Vec<Jet2> {
    let n = point.len();
    point
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet2::variable(v, i, n))
        .collect()
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        assert!(index < dim, "seed index {index} out of range for dimension {dim}");
        let mut jet = Self::constant(value, dim);
        jet.grad[index] = 1.0;
        jet
    }

    /// Assembles a jet from raw parts. The Hessian is symmetrized from its
    /// upper triangle.
    pub fn from_parts(value: f64, grad: Vec<f64>, hess: &[f64]) -> Self {
        let n = grad.len();
        assert_eq!(hess.len(), n * n, "Hessian must be {n}x{n}");
        let hess = symmetric(n, |i, j| hess[i * n + j]);
        Self { value, grad, hess }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    /// Row-major Hessian.
    pub fn hess(&self) -> &[f64] {
        &self.hess
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    /// Directional derivative `v · ∇f`.
    pub fn directional(&self, v: &[f64]) -> f64 {
        self.grad.iter().zip(v).map(|(g, v)| g * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            value: a * self.value,
            grad: self.grad.iter().map(|g| a * g).collect(),
            hess: self.hess.iter().map(|h| a * h).collect(),
        }
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`: `(f∘u)'' = f'·u'' + f''·u'⊗u'`.
    pub fn compose(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.dim();
        let g = &self.grad;
        let h = &self.hess;
        Self {
            value: f0,
            grad: g.iter().map(|gi| f1 * gi).collect(),
            hess: symmetric(n, |i, j| f1 * h[i * n + j] + f2 * g[i] * g[j]),
        }
    }

    fn check_dim(&self, other: &Self) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "jets over charts of different dimension"
        );
    }

    fn product(&self, other: &Self) -> Self {
        self.check_dim(other);
        let n = self.dim();
        let (a, b) = (self, other);
        Self {
            value: a.value * b.value,
            grad: (0..n)
                .map(|i| a.grad[i] * b.value + a.value * b.grad[i])
                .collect(),
            hess: symmetric(n, |i, j| {
                a.hess[i * n + j] * b.value
                    + a.value * b.hess[i * n + j]
                    + (a.grad[i] * b.grad[j] + b.grad[i] * a.grad[j])
            }),
        }
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let v = self.value;
        if v == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(self.compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, JetError> {
        Ok(self.product(&other.recip()?))
    }

    /// Integer power. Negative exponents require a nonzero base.
    pub fn powi(&self, k: i32) -> Result<Self, JetError> {
        let v = self.value;
        match k {
            0 => Ok(Self::constant(1.0, self.dim())),
            1 => Ok(self.clone()),
            _ => {
                if k < 0 && v == 0.0 {
                    return Err(JetError::DivisionByZero);
                }
                let kf = f64::from(k);
                let f0 = v.powi(k);
                let f1 = kf * v.powi(k - 1);
                let f2 = kf * (kf - 1.0) * v.powi(k - 2);
                Ok(self.compose(f0, f1, f2))
            }
        }
    }

    /// Real power `u^p` for a positive base.
    pub fn powf(&self, p: f64) -> Result<Self, JetError> {
        let v = self.value;
        if v <= 0.0 {
            return Err(JetError::Domain {
                function: "pow",
                argument: v,
            });
        }
        let f0 = v.powf(p);
        Ok(self.compose(f0, p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0)))
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        let v = self.value;
        if v <= 0.0 {
            return Err(JetError::Domain {
                function: "ln",
                argument: v,
            });
        }
        Ok(self.compose(v.ln(), 1.0 / v, -1.0 / (v * v)))
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let v = self.value;
        if v <= 0.0 {
            return Err(JetError::Domain {
                function: "sqrt",
                argument: v,
            });
        }
        let s = v.sqrt();
        Ok(self.compose(s, 0.5 / s, -0.25 / (s * v)))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn tan(&self) -> Result<Self, JetError> {
        let c = self.value.cos();
        if c == 0.0 {
            return Err(JetError::Domain {
                function: "tan",
                argument: self.value,
            });
        }
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        Ok(self.compose(t, sec2, 2.0 * t * sec2))
    }

    pub fn sinh(&self) -> Self {
        let v = self.value;
        self.compose(v.sinh(), v.cosh(), v.sinh())
    }

    pub fn cosh(&self) -> Self {
        let v = self.value;
        self.compose(v.cosh(), v.sinh(), v.cosh())
    }

    pub fn tanh(&self) -> Self {
        let t = self.value.tanh();
        let sech2 = 1.0 - t * t;
        self.compose(t, sech2, -2.0 * t * sech2)
    }
}

impl Add for &Jet2 {
    type Output = Jet2;

    fn add(self, rhs: &Jet2) -> Jet2 {
        self.check_dim(rhs);
        Jet2 {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;

    fn sub(self, rhs: &Jet2) -> Jet2 {
        self.check_dim(rhs);
        Jet2 {
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;

    fn mul(self, rhs: &Jet2) -> Jet2 {
        self.product(rhs)
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;

    fn neg(self) -> Jet2 {
        Jet2 {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Jet2 {
            type Output = Jet2;
            fn $m(self, rhs: Jet2) -> Jet2 {
                (&self).$m(&rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Jet2 {
    type Output = Jet2;

    fn neg(self) -> Jet2 {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn seeds_are_unit_vectors() {
        let jets = seed_variables(&[1.0, 2.0]);
        assert_eq!(jets.len(), 2);
        assert_eq!(jets[0].value(), 1.0);
        assert_eq!(jets[0].grad(), &[1.0, 0.0]);
        assert_eq!(jets[1].grad(), &[0.0, 1.0]);
        assert!(jets.iter().all(|j| j.hess().iter().all(|&h| h == 0.0)));
        assert!(seed_variables(&[]).is_empty());
    }

    #[test]
    fn square_of_seed() {
        let x = &seed_variables(&[5.0])[0];
        let sq = x * x;
        assert_eq!(sq.value(), 25.0);
        assert_eq!(sq.grad(), &[10.0]);
        assert_eq!(sq.hess(), &[2.0]);
    }

    #[test]
    fn product_rule_second_order() {
        let x = &seed_variables(&[2.0])[0];
        let p = x * x;
        assert_eq!((p.value(), p.grad()[0], p.hess()[0]), (4.0, 4.0, 2.0));
    }

    #[test]
    fn ln_of_exp_is_identity() {
        let x = &seed_variables(&[0.7])[0];
        let y = x.exp().ln().unwrap();
        assert_close(y.value(), 0.7, 1e-12);
        assert_close(y.grad()[0], 1.0, 1e-12);
        assert_close(y.hess()[0], 0.0, 1e-12);
    }

    #[test]
    fn domain_errors() {
        let z = Jet2::constant(0.0, 1);
        assert_eq!(z.recip(), Err(JetError::DivisionByZero));
        assert!(matches!(z.ln(), Err(JetError::Domain { function: "ln", .. })));
        assert!(matches!(
            Jet2::constant(-1.0, 1).sqrt(),
            Err(JetError::Domain { function: "sqrt", .. })
        ));
        assert!(matches!(z.powi(-2), Err(JetError::DivisionByZero)));
        assert!(z.powi(3).is_ok());
    }

    #[test]
    fn quotient_rule() {
        let v = seed_variables(&[3.0, 2.0]);
        let q = v[0].try_div(&v[1]).unwrap();
        assert_close(q.value(), 1.5, 1e-15);
        assert_close(q.grad()[0], 0.5, 1e-15);
        assert_close(q.grad()[1], -0.75, 1e-15);
        // d²(x/y)/dxdy = -1/y², d²/dy² = 2x/y³
        assert_close(q.hess_at(0, 1), -0.25, 1e-15);
        assert_close(q.hess_at(1, 1), 0.75, 1e-15);
        assert_eq!(q.hess_at(0, 0), 0.0);
    }

    #[test]
    fn hessian_mirror_is_bit_exact() {
        let v = seed_variables(&[0.3, -1.2, 0.8]);
        let f = (&(&v[0] * &v[1]).sin() * &v[2].exp()).tanh();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f.hess_at(i, j).to_bits(), f.hess_at(j, i).to_bits());
            }
        }
    }
}
