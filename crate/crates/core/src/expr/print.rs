use std::fmt::Write;

use super::Expr;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const FACTOR: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => SUM,
        Expr::Mul(..) | Expr::Div(..) => PRODUCT,
        Expr::Neg(_) => FACTOR,
        Expr::Pow(..) => POWER,
        Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => ATOM,
    }
}

/// Renders `e` in the input grammar with the minimum parentheses needed for
/// `parse(pretty_print(e)) == e`.
pub fn pretty_print(e: &Expr, coords: &[String]) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, coords, SUM);
    s
}

fn write_expr(out: &mut String, e: &Expr, coords: &[String], needed: u8) {
    let wrap = precedence(e) < needed;
    if wrap {
        out.push('(');
    }
    match e {
        Expr::Num(c) => {
            let _ = write!(out, "{c}");
        }
        Expr::Var(i) => match coords.get(*i) {
            Some(name) => out.push_str(name),
            None => {
                let _ = write!(out, "_{i}");
            }
        },
        Expr::Neg(a) => {
            out.push('-');
            write_expr(out, a, coords, FACTOR);
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            write_expr(out, a, coords, SUM);
            out.push_str(if matches!(e, Expr::Add(..)) { " + " } else { " - " });
            write_expr(out, b, coords, PRODUCT);
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            write_expr(out, a, coords, PRODUCT);
            out.push(if matches!(e, Expr::Mul(..)) { '*' } else { '/' });
            write_expr(out, b, coords, FACTOR);
        }
        Expr::Pow(a, n) => {
            write_expr(out, a, coords, ATOM);
            let _ = write!(out, "^{n}");
        }
        Expr::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, coords, SUM);
            }
            out.push(')');
        }
    }
    if wrap {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Func};
    use super::*;
    use proptest::prelude::*;

    fn names() -> Vec<String> {
        vec!["x".into(), "y".into(), "z".into()]
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000, 0u32..4).prop_map(|(m, e)| Expr::Num(m as f64 / 10f64.powi(e as i32))),
            (0usize..3).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let b = |e: Expr| Box::new(e);
            prop_oneof![
                inner.clone().prop_map(move |a| Expr::Neg(b(a))),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Div(b(x), b(y))),
                (inner.clone(), -3i32..5).prop_map(move |(x, n)| Expr::Pow(b(x), n)),
                (inner.clone(), 0usize..6)
                    .prop_map(|(x, k)| Expr::Call(Func::ALL[k], vec![x])),
                (inner.clone(), inner).prop_map(|(x, y)| Expr::Call(Func::Atan2, vec![x, y])),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_pretty_print(e in arb_expr()) {
            let coords = names();
            let text = pretty_print(&e, &coords);
            let back = parse(&text, &coords).unwrap();
            prop_assert_eq!(back, e, "{}", text);
        }
    }

    #[test]
    fn minimal_parentheses() {
        let c = names();
        for src in [
            "-(x*y)/(1 + x^2)",
            "x - (y - z)",
            "x/(y*z)",
            "(-x)^2",
            "-x^2",
            "--x",
            "x*-y",
            "atan2(y, x)^3",
            "0.0001*x",
        ] {
            let e = parse(src, &c).unwrap();
            assert_eq!(pretty_print(&e, &c), src);
        }
    }
}
