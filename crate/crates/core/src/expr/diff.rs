use super::{Expr, Func};

impl Expr {
    /// Symbolic partial derivative with respect to variable `var`.
    ///
    /// Only the trivial 0/1 identities are folded, so results grow with
    /// nesting depth. Used where a derivative must be written back out as an
    /// expression (serialized coupling data); numerical work goes through
    /// [`Expr::eval_jet`].
    pub fn derivative(&self, var: usize) -> Expr {
        if !self.depends_on(var) {
            return Expr::Num(0.0);
        }
        let d = |e: &Expr| e.derivative(var);
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(i) => Expr::Num(if *i == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::neg(d(a)),
            Expr::Add(a, b) => Expr::add(d(a), d(b)),
            Expr::Sub(a, b) => Expr::sub(d(a), d(b)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(d(a), (**b).clone()),
                Expr::mul((**a).clone(), d(b)),
            ),
            Expr::Div(a, b) => {
                // (a'b - ab') / b^2
                Expr::div(
                    Expr::sub(
                        Expr::mul(d(a), (**b).clone()),
                        Expr::mul((**a).clone(), d(b)),
                    ),
                    Expr::pow((**b).clone(), 2),
                )
            }
            Expr::Pow(a, n) => Expr::mul(
                Expr::mul(Expr::num(*n as f64), Expr::pow((**a).clone(), n - 1)),
                d(a),
            ),
            Expr::Call(f, args) => {
                let u = &args[0];
                let du = d(u);
                match f {
                    Func::Sin => Expr::mul(Expr::call(Func::Cos, vec![u.clone()]), du),
                    Func::Cos => Expr::neg(Expr::mul(Expr::call(Func::Sin, vec![u.clone()]), du)),
                    Func::Tan => Expr::div(du, Expr::pow(Expr::call(Func::Cos, vec![u.clone()]), 2)),
                    Func::Exp => Expr::mul(self.clone(), du),
                    Func::Log => Expr::div(du, u.clone()),
                    Func::Sqrt => Expr::div(du, Expr::mul(Expr::Num(2.0), self.clone())),
                    Func::Atan2 => {
                        // atan2(u, w): (w u' - u w') / (u^2 + w^2)
                        let w = &args[1];
                        Expr::div(
                            Expr::sub(Expr::mul(w.clone(), du), Expr::mul(u.clone(), d(w))),
                            Expr::add(Expr::pow(u.clone(), 2), Expr::pow(w.clone(), 2)),
                        )
                    }
                }
            }
        }
    }
}
