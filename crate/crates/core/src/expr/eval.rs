use super::{BinOp, Dual4, Env, Expr, ExprError, Func};
use crate::minkowski::FourVector;

fn domain(e: &Expr, reason: &str) -> ExprError {
    ExprError::Domain {
        expr: e.to_string(),
        reason: reason.to_owned(),
    }
}

fn param(env: &Env, name: &str) -> Result<f64, ExprError> {
    env.params.get(name).copied().ok_or_else(|| ExprError::Domain {
        expr: name.to_owned(),
        reason: "unbound parameter".into(),
    })
}

fn integral_exponent(x: f64) -> Option<i32> {
    (x.fract() == 0.0 && x.abs() <= i32::MAX as f64).then_some(x as i32)
}

/// Value and exact first partials with respect to `q1..q4`.
pub fn eval_dual(e: &Expr, q: &FourVector, env: &Env) -> Result<Dual4, ExprError> {
    Ok(match e {
        Expr::Num(x) => Dual4::constant(*x),
        Expr::Var(k) => Dual4::variable(q[*k], *k),
        Expr::Pi => Dual4::constant(std::f64::consts::PI),
        Expr::C => Dual4::constant(env.c),
        Expr::Param(name) => Dual4::constant(param(env, name)?),
        Expr::Neg(a) => -eval_dual(a, q, env)?,
        Expr::Binary(op, a, b) => {
            let x = eval_dual(a, q, env)?;
            let y = eval_dual(b, q, env)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y.value == 0.0 {
                        return Err(domain(e, "division by zero"));
                    }
                    x / y
                }
                BinOp::Pow => pow_dual(e, x, y)?,
            }
        }
        Expr::Call(f, a) => {
            let x = eval_dual(a, q, env)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if x.value <= 0.0 {
                        return Err(domain(e, "logarithm of a non-positive number"));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if x.value < 0.0 {
                        return Err(domain(e, "square root of a negative number"));
                    }
                    if x.value == 0.0 {
                        if !x.is_constant() {
                            return Err(domain(e, "square root not differentiable at zero"));
                        }
                        Dual4::constant(0.0)
                    } else {
                        x.sqrt()
                    }
                }
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Abs => x.abs(),
            }
        }
    })
}

fn pow_dual(e: &Expr, base: Dual4, exponent: Dual4) -> Result<Dual4, ExprError> {
    if exponent.is_constant() {
        if let Some(n) = integral_exponent(exponent.value) {
            if base.value == 0.0 && n < 0 {
                return Err(domain(e, "division by zero"));
            }
            return Ok(base.powi(n));
        }
    }
    if base.value > 0.0 {
        return Ok(base.powd(exponent));
    }
    if base.value < 0.0 {
        return Err(domain(
            e,
            if exponent.is_constant() {
                "non-integer power of a negative base"
            } else {
                "variable exponent of a negative base"
            },
        ));
    }
    // zero base
    let p = exponent.value;
    if p <= 0.0 {
        return Err(domain(e, "zero base with non-positive exponent"));
    }
    if p < 1.0 && !base.is_constant() {
        return Err(domain(e, "power not differentiable at zero"));
    }
    let slope = if p == 1.0 { 1.0 } else { 0.0 };
    Ok(base.chain(0.0, slope))
}

/// Plain floating-point evaluation; shares no code with [`eval_dual`].
pub fn eval(e: &Expr, q: &FourVector, env: &Env) -> Result<f64, ExprError> {
    Ok(match e {
        Expr::Num(x) => *x,
        Expr::Var(k) => q[*k],
        Expr::Pi => std::f64::consts::PI,
        Expr::C => env.c,
        Expr::Param(name) => param(env, name)?,
        Expr::Neg(a) => -eval(a, q, env)?,
        Expr::Binary(op, a, b) => {
            let x = eval(a, q, env)?;
            let y = eval(b, q, env)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(domain(e, "division by zero"));
                    }
                    x / y
                }
                BinOp::Pow => {
                    if let Some(n) = integral_exponent(y) {
                        if x == 0.0 && n < 0 {
                            return Err(domain(e, "division by zero"));
                        }
                        x.powi(n)
                    } else if x < 0.0 {
                        return Err(domain(e, "non-integer power of a negative base"));
                    } else {
                        x.powf(y)
                    }
                }
            }
        }
        Expr::Call(f, a) => {
            let x = eval(a, q, env)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Exp => x.exp(),
                Func::Log if x <= 0.0 => {
                    return Err(domain(e, "logarithm of a non-positive number"))
                }
                Func::Log => x.ln(),
                Func::Sqrt if x < 0.0 => {
                    return Err(domain(e, "square root of a negative number"))
                }
                Func::Sqrt => x.sqrt(),
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Abs => x.abs(),
            }
        }
    })
}
