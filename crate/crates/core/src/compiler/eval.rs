//! Variables, integer expressions and conditions.

use std::collections::HashMap;

use crate::dsl::{ArithOp, CmpOp, CondExpr, IntExpr, VarAccess};
use crate::geom::Coord;
use crate::rng::GameRng;

use super::CompileErrorKind;

/// A runtime value bound to a `$variable`. Coordinates and selections are
/// kept in the frame-local coordinates they were written in.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Char(char),
    Str(String),
    Coord(Coord),
    Selection(Vec<Coord>),
    Array(Vec<Value>),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Char(_) => "character",
            Value::Str(_) => "string",
            Value::Coord(_) => "coordinate",
            Value::Selection(_) => "selection",
            Value::Array(_) => "array",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvalContext {
    vars: HashMap<String, Value>,
    pub rng: GameRng,
}

impl EvalContext {
    pub fn new(rng: GameRng) -> Self {
        EvalContext {
            vars: HashMap::new(),
            rng,
        }
    }

    pub fn set(&mut self, name: &str, value: Value) {
        self.vars.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.vars.get(name)
    }

    /// Resolves `$name` or `$name[index]`.
    pub fn lookup(&mut self, access: &VarAccess) -> Result<Value, CompileErrorKind> {
        let index = match &access.index {
            Some(e) => Some(self.eval_int(e)?),
            None => None,
        };
        let value = self
            .vars
            .get(&access.name)
            .ok_or_else(|| CompileErrorKind::UnboundVariable {
                name: access.name.clone(),
            })?;
        match (index, value) {
            (None, v) => Ok(v.clone()),
            (Some(i), Value::Array(items)) => {
                if i < 0 || i as usize >= items.len() {
                    Err(CompileErrorKind::IndexOutOfRange {
                        name: access.name.clone(),
                        index: i,
                        len: items.len(),
                    })
                } else {
                    Ok(items[i as usize].clone())
                }
            }
            (Some(_), other) => Err(CompileErrorKind::TypeMismatch {
                expected: "array",
                found: other.type_name(),
            }),
        }
    }

    pub fn eval_int(&mut self, expr: &IntExpr) -> Result<i64, CompileErrorKind> {
        match expr {
            IntExpr::Literal(v) => Ok(*v),
            IntExpr::Dice { n, m } => Ok(self.rng.roll(*n, *m)),
            IntExpr::Var(access) => match self.lookup(access)? {
                Value::Int(v) => Ok(v),
                other => Err(CompileErrorKind::TypeMismatch {
                    expected: "integer",
                    found: other.type_name(),
                }),
            },
            IntExpr::Arith { op, lhs, rhs } => {
                let a = self.eval_int(lhs)?;
                let b = self.eval_int(rhs)?;
                match op {
                    ArithOp::Add => Ok(a.saturating_add(b)),
                    ArithOp::Sub => Ok(a.saturating_sub(b)),
                    ArithOp::Mul => Ok(a.saturating_mul(b)),
                    ArithOp::Div if b == 0 => Err(CompileErrorKind::DivisionByZero),
                    ArithOp::Div => Ok(a / b),
                }
            }
        }
    }

    pub fn eval_condition(&mut self, cond: &CondExpr) -> Result<bool, CompileErrorKind> {
        match cond {
            CondExpr::Percent(p) => {
                let p = self.eval_int(p)?;
                Ok(self.rng.percent(p))
            }
            CondExpr::Compare { lhs, op, rhs } => {
                let a = self.eval_int(lhs)?;
                let b = self.eval_int(rhs)?;
                Ok(match op {
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                })
            }
        }
    }

    /// Permutes an array variable in place.
    pub fn shuffle(&mut self, name: &str) -> Result<(), CompileErrorKind> {
        let EvalContext { vars, rng } = self;
        match vars.get_mut(name) {
            Some(Value::Array(items)) => {
                rng.shuffle(items);
                Ok(())
            }
            Some(other) => Err(CompileErrorKind::TypeMismatch {
                expected: "array",
                found: other.type_name(),
            }),
            None => Err(CompileErrorKind::UnboundVariable {
                name: name.to_string(),
            }),
        }
    }
}
