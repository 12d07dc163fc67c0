//! A small analytic expression language.
//!
//! Metric components, twisting functions and map components are written as
//! text in this language and evaluated either to plain `f64` or to a
//! second-order [`Jet2`](crate::autodiff::Jet2).
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | ident | ident "(" expr { "," expr } ")" | "(" expr ")" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!         | "." digits [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so `-x^2`
//! is `-(x^2)` and `a^b^c` is `a^(b^c)`. The exponent of `^` must be free of
//! variables; `pow(a, b)` accepts any exponent and is evaluated as
//! `exp(b·ln a)` when `b` is not constant, which needs `a > 0`.

mod eval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use eval::EvalError;
pub use parse::ParseError;

/// Built-in functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
    Pow,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Exp,
        Func::Ln,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sqrt,
        Func::Pow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Expression tree. Variables are indices into the owning [`Expression`]'s
/// variable list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Node::Num(_) => {}
            Node::Var(i) => {
                out.insert(*i);
            }
            Node::Neg(a) => a.collect_vars(out),
            Node::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Node::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn is_constant(&self) -> bool {
        let mut vars = BTreeSet::new();
        self.collect_vars(&mut vars);
        vars.is_empty()
    }

    fn map_vars(&self, f: &impl Fn(usize) -> usize) -> Node {
        match self {
            Node::Num(v) => Node::Num(*v),
            Node::Var(i) => Node::Var(f(*i)),
            Node::Neg(a) => Node::Neg(Box::new(a.map_vars(f))),
            Node::Binary(op, a, b) => {
                Node::Binary(*op, Box::new(a.map_vars(f)), Box::new(b.map_vars(f)))
            }
            Node::Call(func, args) => Node::Call(*func, args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }

    /// Precedence level used by the printer: higher binds tighter.
    fn level(&self) -> u8 {
        match self {
            Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Node::Neg(_) => 3,
            Node::Binary(BinOp::Pow, ..) => 4,
            Node::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            _ => 5,
        }
    }
}

/// Errors from building expressions programmatically.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("variable `{0}` is not declared in the target variable list")]
    UnknownVariable(String),
    #[error("expressions are declared over different variable lists")]
    VariableMismatch,
}

/// A parsed expression together with the ordered variable list it was
/// declared over.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    vars: Arc<[String]>,
}

impl Expression {
    /// Parses `source` over the ordered variable list `variables`.
    pub fn parse(source: &str, variables: &[impl AsRef<str>]) -> Result<Self, ParseError> {
        let vars: Vec<String> = variables.iter().map(|v| v.as_ref().to_string()).collect();
        parse::check_variables(&vars)?;
        let root = parse::Parser::new(source, &vars).parse()?;
        Ok(Self {
            root,
            vars: vars.into(),
        })
    }

    pub fn from_node(root: Node, variables: &[impl AsRef<str>]) -> Self {
        let vars: Vec<String> = variables.iter().map(|v| v.as_ref().to_string()).collect();
        Self {
            root,
            vars: vars.into(),
        }
    }

    pub fn constant(value: f64, variables: &[impl AsRef<str>]) -> Self {
        Self::from_node(Node::Num(value), variables)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Indices of the variables that actually occur in the tree.
    pub fn used_variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.root.collect_vars(&mut out);
        out
    }

    pub fn used_variable_names(&self) -> Vec<&str> {
        self.used_variables()
            .into_iter()
            .map(|i| self.vars[i].as_str())
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        self.root.is_constant()
    }

    /// `Some(v)` when the expression mentions no variable and evaluates to `v`.
    pub fn constant_value(&self) -> Option<f64> {
        if !self.is_constant() {
            return None;
        }
        eval::eval_node(&self.root, &[]).ok()
    }

    /// Re-declares the expression over another variable list, matching
    /// variables by name.
    pub fn remap(&self, variables: &[impl AsRef<str>]) -> Result<Self, BuildError> {
        let target: Vec<String> = variables.iter().map(|v| v.as_ref().to_string()).collect();
        let mut index = Vec::with_capacity(self.vars.len());
        for (i, name) in self.vars.iter().enumerate() {
            let pos = target.iter().position(|t| t == name);
            match pos {
                Some(p) => index.push(p),
                None if !self.used_variables().contains(&i) => index.push(usize::MAX),
                None => return Err(BuildError::UnknownVariable(name.clone())),
            }
        }
        Ok(Self {
            root: self.root.map_vars(&|i| index[i]),
            vars: target.into(),
        })
    }

    fn combine(&self, other: &Self, op: BinOp) -> Result<Self, BuildError> {
        if self.vars != other.vars {
            return Err(BuildError::VariableMismatch);
        }
        Ok(Self {
            root: Node::Binary(op, Box::new(self.root.clone()), Box::new(other.root.clone())),
            vars: self.vars.clone(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, BuildError> {
        self.combine(other, BinOp::Add)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, BuildError> {
        self.combine(other, BinOp::Mul)
    }

    pub fn squared(&self) -> Self {
        Self {
            root: Node::Binary(BinOp::Pow, Box::new(self.root.clone()), Box::new(Node::Num(2.0))),
            vars: self.vars.clone(),
        }
    }

    pub fn apply(&self, func: Func) -> Self {
        assert_eq!(func.arity(), 1, "{} takes {} arguments", func.name(), func.arity());
        Self {
            root: Node::Call(func, vec![self.root.clone()]),
            vars: self.vars.clone(),
        }
    }

    /// Substitutes each variable by the matching expression of `args`
    /// (composition `self ∘ args`). All `args` share one variable list.
    pub fn compose(&self, args: &[Expression]) -> Result<Self, BuildError> {
        if args.len() != self.vars.len() {
            return Err(BuildError::VariableMismatch);
        }
        let Some(first) = args.first() else {
            return Ok(self.clone());
        };
        if args.iter().any(|a| a.vars != first.vars) {
            return Err(BuildError::VariableMismatch);
        }
        fn subst(node: &Node, args: &[Expression]) -> Node {
            match node {
                Node::Num(v) => Node::Num(*v),
                Node::Var(i) => args[*i].root.clone(),
                Node::Neg(a) => Node::Neg(Box::new(subst(a, args))),
                Node::Binary(op, a, b) => {
                    Node::Binary(*op, Box::new(subst(a, args)), Box::new(subst(b, args)))
                }
                Node::Call(f, xs) => Node::Call(*f, xs.iter().map(|x| subst(x, args)).collect()),
            }
        }
        Ok(Self {
            root: subst(&self.root, args),
            vars: first.vars.clone(),
        })
    }
}

fn fmt_node(node: &Node, min_level: u8, vars: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let wrap = node.level() < min_level;
    if wrap {
        f.write_str("(")?;
    }
    match node {
        Node::Num(v) => write!(f, "{v}")?,
        Node::Var(i) => f.write_str(&vars[*i])?,
        Node::Neg(a) => {
            f.write_str("-")?;
            fmt_node(a, 3, vars, f)?;
        }
        Node::Binary(op, a, b) => {
            let (left, right) = match op {
                BinOp::Add | BinOp::Sub => (1, 2),
                BinOp::Mul | BinOp::Div => (2, 3),
                BinOp::Pow => (5, 3),
            };
            fmt_node(a, left, vars, f)?;
            if *op == BinOp::Pow {
                f.write_str("^")?;
            } else {
                write!(f, " {} ", op.symbol())?;
            }
            fmt_node(b, right, vars, f)?;
        }
        Node::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                fmt_node(a, 1, vars, f)?;
            }
            f.write_str(")")?;
        }
    }
    if wrap {
        f.write_str(")")?;
    }
    Ok(())
}

/// Pretty-prints with the minimal parentheses that re-parse to the same tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(&self.root, 0, &self.vars, f)
    }
}

pub(crate) struct NodeDisplay<'a>(pub &'a Node, pub &'a [String]);

impl fmt::Display for NodeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(self.0, 0, self.1, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str, vars: &[&str]) -> Expression {
        Expression::parse(src, vars).unwrap()
    }

    #[test]
    fn exp_times_var() {
        let e = p("exp(x) * y", &["x", "y"]);
        assert_eq!(
            e.root(),
            &Node::Binary(
                BinOp::Mul,
                Box::new(Node::Call(Func::Exp, vec![Node::Var(0)])),
                Box::new(Node::Var(1))
            )
        );
    }

    #[test]
    fn constant_one() {
        let e = p("1", &["x"]);
        assert!(e.is_constant());
        assert_eq!(e.constant_value(), Some(1.0));
        assert_eq!(e.eval(&[17.0]).unwrap(), 1.0);
    }

    #[test]
    fn unterminated_call_reports_offset() {
        match Expression::parse("sin(", &["x"]) {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let x = || Box::new(Node::Var(0));
        assert_eq!(
            p("-x^2", &["x"]).root(),
            &Node::Neg(Box::new(Node::Binary(BinOp::Pow, x(), Box::new(Node::Num(2.0)))))
        );
        // right-associative power
        let e = p("2^3^2", &["x"]);
        assert_eq!(e.eval(&[0.0]).unwrap(), 512.0);
        // left-associative subtraction and division
        assert_eq!(p("8 - 4 - 2", &["x"]).eval(&[0.0]).unwrap(), 2.0);
        assert_eq!(p("8 / 4 / 2", &["x"]).eval(&[0.0]).unwrap(), 1.0);
        assert_eq!(p("2 + 3 * 4", &["x"]).eval(&[0.0]).unwrap(), 14.0);
        assert_eq!(p("(2 + 3) * 4", &["x"]).eval(&[0.0]).unwrap(), 20.0);
        assert_eq!(p("x^-1", &["x"]).eval(&[4.0]).unwrap(), 0.25);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Expression::parse("foo(x)", &["x"]),
            Err(ParseError::UnknownIdentifier { ref name, offset: 0 }) if name == "foo"
        ));
        assert!(matches!(
            Expression::parse("x + z", &["x"]),
            Err(ParseError::UnknownIdentifier { ref name, offset: 4 }) if name == "z"
        ));
        assert!(matches!(
            Expression::parse("pow(x)", &["x"]),
            Err(ParseError::Arity { expected: 2, found: 1, .. })
        ));
        assert!(matches!(
            Expression::parse("sin(x, x)", &["x"]),
            Err(ParseError::Arity { expected: 1, found: 2, .. })
        ));
        assert!(matches!(
            Expression::parse("x^x", &["x"]),
            Err(ParseError::NonConstantExponent { offset: 2 })
        ));
        assert!(matches!(
            Expression::parse("1 +", &["x"]),
            Err(ParseError::Syntax { offset: 3, .. })
        ));
        assert!(matches!(
            Expression::parse("x", &["x", "x"]),
            Err(ParseError::InvalidVariables(_))
        ));
        assert!(matches!(
            Expression::parse("x", &[] as &[&str]),
            Err(ParseError::InvalidVariables(_))
        ));
    }

    #[test]
    fn printer_round_trips() {
        for src in [
            "-a^2",
            "(-a)^2",
            "a - (b - c)",
            "(a^2)^3",
            "a^2^0.5",
            "a * -b",
            "-(a * b)",
            "--a",
            "a / (b * c)",
            "pow(a + b, c * 2)",
            "exp(-a) * sin(b)^2 + 1.5e-3",
            "a^-2",
            "sqrt(a) / (1 + tanh(b))",
        ] {
            let e = p(src, &["a", "b", "c"]);
            let printed = e.to_string();
            let again = p(&printed, &["a", "b", "c"]);
            assert_eq!(e, again, "{src} -> {printed}");
        }
        assert_eq!(p("a - (b - c)", &["a", "b", "c"]).to_string(), "a - (b - c)");
        assert_eq!(p("(a - b) - c", &["a", "b", "c"]).to_string(), "a - b - c");
    }

    #[test]
    fn remap_and_compose() {
        let e = p("x * y", &["x", "y"]);
        let r = e.remap(&["u", "y", "x"]).unwrap();
        assert_eq!(r.eval(&[100.0, 3.0, 2.0]).unwrap(), 6.0);
        assert!(matches!(e.remap(&["x"]), Err(BuildError::UnknownVariable(ref v)) if v == "y"));

        let outer = p("a^2 + b", &["a", "b"]);
        let args = [p("cos(s)", &["s"]), p("sin(s)", &["s"])];
        let c = outer.compose(&args).unwrap();
        assert_eq!(c.variables(), &["s".to_string()]);
        let s: f64 = 0.4;
        assert!((c.eval(&[s]).unwrap() - (s.cos().powi(2) + s.sin())).abs() < 1e-15);
    }

    #[test]
    fn used_variables_by_name() {
        let e = p("exp(x + v)", &["x", "y", "u", "v"]);
        assert_eq!(e.used_variable_names(), vec!["x", "v"]);
    }
}
