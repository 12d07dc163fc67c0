//! Evaluation to `f64` and to second-order jets.
//!
//! Both paths apply the same domain rules, so the plain evaluator can serve as
//! a finite-difference reference for the jet evaluator.

use thiserror::Error;

use super::{BinOp, Expression, Func, Node, NodeDisplay};
use crate::autodiff::{seed_variables, Jet2, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{function} is undefined at {argument} in `{subexpr}`")]
    Domain {
        function: &'static str,
        argument: f64,
        subexpr: String,
    },
    #[error("division by zero in `{subexpr}`")]
    DivisionByZero { subexpr: String },
    #[error("expected a point with {expected} coordinates, got {found}")]
    Dimension { expected: usize, found: usize },
}

/// How a power node is evaluated once its exponent is known.
enum PowKind {
    Int(i32),
    Real(f64),
}

fn pow_kind(p: f64) -> PowKind {
    if p.fract() == 0.0 && p.abs() <= f64::from(i32::MAX) {
        PowKind::Int(p as i32)
    } else {
        PowKind::Real(p)
    }
}

struct Ctx<'a> {
    vars: &'a [String],
}

impl Ctx<'_> {
    fn text(&self, node: &Node) -> String {
        NodeDisplay(node, self.vars).to_string()
    }

    fn lift(&self, node: &Node, err: JetError) -> EvalError {
        match err {
            JetError::DivisionByZero => EvalError::DivisionByZero {
                subexpr: self.text(node),
            },
            JetError::Domain { function, argument } => EvalError::Domain {
                function,
                argument,
                subexpr: self.text(node),
            },
        }
    }

    fn domain(&self, node: &Node, function: &'static str, argument: f64) -> EvalError {
        EvalError::Domain {
            function,
            argument,
            subexpr: self.text(node),
        }
    }

    fn f64(&self, node: &Node, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match node {
            Node::Num(v) => *v,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -self.f64(a, x)?,
            Node::Binary(op, a, b) => {
                let (u, v) = (self.f64(a, x)?, self.f64(b, x)?);
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div => {
                        if v == 0.0 {
                            return Err(self.lift(node, JetError::DivisionByZero));
                        }
                        u / v
                    }
                    BinOp::Pow => self.pow_f64(node, u, v)?,
                }
            }
            Node::Call(func, args) => {
                let u = self.f64(&args[0], x)?;
                match func {
                    Func::Exp => u.exp(),
                    Func::Ln => {
                        if u <= 0.0 {
                            return Err(self.domain(node, "ln", u));
                        }
                        u.ln()
                    }
                    Func::Sqrt => {
                        if u <= 0.0 {
                            return Err(self.domain(node, "sqrt", u));
                        }
                        u.sqrt()
                    }
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Tan => {
                        if u.cos() == 0.0 {
                            return Err(self.domain(node, "tan", u));
                        }
                        u.tan()
                    }
                    Func::Sinh => u.sinh(),
                    Func::Cosh => u.cosh(),
                    Func::Tanh => u.tanh(),
                    Func::Pow => {
                        let v = self.f64(&args[1], x)?;
                        if args[1].is_constant() {
                            self.pow_f64(node, u, v)?
                        } else {
                            if u <= 0.0 {
                                return Err(self.domain(node, "pow", u));
                            }
                            (v * u.ln()).exp()
                        }
                    }
                }
            }
        })
    }

    fn pow_f64(&self, node: &Node, u: f64, p: f64) -> Result<f64, EvalError> {
        match pow_kind(p) {
            PowKind::Int(k) => {
                if k < 0 && u == 0.0 {
                    return Err(self.lift(node, JetError::DivisionByZero));
                }
                Ok(u.powi(k))
            }
            PowKind::Real(p) => {
                if u <= 0.0 {
                    return Err(self.domain(node, "pow", u));
                }
                Ok(u.powf(p))
            }
        }
    }

    fn jet(&self, node: &Node, x: &[Jet2], dim: usize) -> Result<Jet2, EvalError> {
        let wrap = |r: Result<Jet2, JetError>| r.map_err(|e| self.lift(node, e));
        Ok(match node {
            Node::Num(v) => Jet2::constant(*v, dim),
            Node::Var(i) => x[*i].clone(),
            Node::Neg(a) => -self.jet(a, x, dim)?,
            Node::Binary(op, a, b) => {
                let u = self.jet(a, x, dim)?;
                match op {
                    BinOp::Pow => {
                        let p = self.f64(b, &[])?;
                        self.pow_jet(node, &u, p)?
                    }
                    _ => {
                        let v = self.jet(b, x, dim)?;
                        match op {
                            BinOp::Add => &u + &v,
                            BinOp::Sub => &u - &v,
                            BinOp::Mul => &u * &v,
                            BinOp::Div => wrap(u.try_div(&v))?,
                            BinOp::Pow => unreachable!(),
                        }
                    }
                }
            }
            Node::Call(func, args) => {
                let u = self.jet(&args[0], x, dim)?;
                match func {
                    Func::Exp => u.exp(),
                    Func::Ln => wrap(u.ln())?,
                    Func::Sqrt => wrap(u.sqrt())?,
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Tan => wrap(u.tan())?,
                    Func::Sinh => u.sinh(),
                    Func::Cosh => u.cosh(),
                    Func::Tanh => u.tanh(),
                    Func::Pow => {
                        if args[1].is_constant() {
                            let p = self.f64(&args[1], &[])?;
                            self.pow_jet(node, &u, p)?
                        } else {
                            let v = self.jet(&args[1], x, dim)?;
                            let ln_u = u.ln().map_err(|_| self.domain(node, "pow", u.value()))?;
                            (&v * &ln_u).exp()
                        }
                    }
                }
            }
        })
    }

    fn pow_jet(&self, node: &Node, u: &Jet2, p: f64) -> Result<Jet2, EvalError> {
        let r = match pow_kind(p) {
            PowKind::Int(k) => u.powi(k),
            PowKind::Real(p) => u.powf(p),
        };
        r.map_err(|e| self.lift(node, e))
    }
}

pub(super) fn eval_node(node: &Node, x: &[f64]) -> Result<f64, EvalError> {
    Ctx { vars: &[] }.f64(node, x)
}

impl Expression {
    fn check_len(&self, found: usize) -> Result<(), EvalError> {
        if found != self.vars.len() {
            return Err(EvalError::Dimension {
                expected: self.vars.len(),
                found,
            });
        }
        Ok(())
    }

    /// Plain floating-point evaluation.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.check_len(point.len())?;
        Ctx { vars: &self.vars }.f64(&self.root, point)
    }

    /// Value, gradient and Hessian with respect to the declared variables.
    pub fn eval_jet2(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        self.check_len(point.len())?;
        let seeds = seed_variables(point);
        Ctx { vars: &self.vars }.jet(&self.root, &seeds, point.len())
    }

    /// Evaluates with each variable replaced by a jet over some other chart,
    /// which composes this expression with the map those jets describe.
    pub fn eval_on_jets(&self, args: &[Jet2]) -> Result<Jet2, EvalError> {
        self.check_len(args.len())?;
        let dim = args.first().map_or(0, Jet2::dim);
        Ctx { vars: &self.vars }.jet(&self.root, args, dim)
    }
}
