use thiserror::Error;

use super::expr::SymExpr;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parse expression text: integers, identifiers, `+ - * ^`, `floor(p, q)`,
/// `lcm(e1, e2, ...)` and parentheses. Identifiers starting with `__` are
/// reserved for generated names.
pub fn parse_expr<T: Scalar>(src: &str) -> Result<SymExpr<T>, ParseError> {
    let mut p = Parser { src, pos: 0 };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn eat_minus(&mut self) -> bool {
        self.eat('-') || self.eat('\u{2212}')
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn sum<T: Scalar>(&mut self) -> Result<SymExpr<T>, ParseError> {
        let mut terms = vec![self.product()?];
        loop {
            if self.eat('+') {
                terms.push(self.product()?);
            } else if self.eat_minus() {
                terms.push(-self.product()?);
            } else {
                return Ok(SymExpr::add_all(terms));
            }
        }
    }

    fn product<T: Scalar>(&mut self) -> Result<SymExpr<T>, ParseError> {
        let mut factors = vec![self.unary()?];
        while self.eat('*') {
            factors.push(self.unary()?);
        }
        Ok(SymExpr::mul_all(factors))
    }

    fn unary<T: Scalar>(&mut self) -> Result<SymExpr<T>, ParseError> {
        if self.eat_minus() {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power<T: Scalar>(&mut self) -> Result<SymExpr<T>, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let start = self.pos;
            let digits = self.take_while(|c| c.is_ascii_digit());
            let exp: u32 = digits
                .parse()
                .map_err(|_| ParseError { pos: start, msg: "exponent must be a nonnegative integer".into() })?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &str {
        let start = self.pos;
        while let Some(c) = self.peek_raw() {
            if f(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn args<T: Scalar>(&mut self) -> Result<Vec<SymExpr<T>>, ParseError> {
        self.expect('(')?;
        let mut out = vec![self.sum()?];
        while self.eat(',') {
            out.push(self.sum()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn atom<T: Scalar>(&mut self) -> Result<SymExpr<T>, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.take_while(|c| c.is_ascii_digit());
                digits
                    .parse::<T>()
                    .map(SymExpr::int)
                    .map_err(|_| ParseError { pos: start, msg: "integer literal out of range".into() })
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_').to_string();
                match name.as_str() {
                    "floor" if self.peek() == Some('(') => {
                        let mut a = self.args()?;
                        if a.len() != 2 {
                            return Err(ParseError { pos: start, msg: "floor takes two arguments".into() });
                        }
                        let d = a.pop().unwrap();
                        Ok(SymExpr::floor_div(a.pop().unwrap(), d))
                    }
                    "lcm" if self.peek() == Some('(') => Ok(SymExpr::lcm(self.args()?)),
                    _ if self.peek() == Some('(') => {
                        Err(ParseError { pos: start, msg: format!("unknown function `{name}`") })
                    }
                    _ => Ok(SymExpr::sym(&name)),
                }
            }
            _ => Err(self.err("expected a number, symbol, or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::expr::{Bindings, Symbol};

    fn eval(src: &str, a: i64) -> i64 {
        let e: SymExpr<i64> = parse_expr(src).unwrap();
        let env: Bindings<i64> = [(Symbol::new("a"), a)].into_iter().collect();
        e.eval(&env).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("1 + 2*a^2", 3), 19);
        assert_eq!(eval("-a^2", 3), -9);
        assert_eq!(eval("(1+a)^2 - a", 2), 7);
        assert_eq!(eval("floor(-1, a)", 5), -1);
        assert_eq!(eval("lcm(a, a^2, 6)", 2), 12);
    }

    #[test]
    fn round_trips_through_display() {
        for src in ["a^3 + 5*a^2 + 7*a", "floor(a - 1, 2)", "lcm(b, b^2)", "-a*b + 3", "2*(a + 1)^2"] {
            let e: SymExpr<i64> = parse_expr(src).unwrap();
            let again: SymExpr<i64> = parse_expr(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src}");
        }
    }

    #[test]
    fn errors_carry_position() {
        let e = parse_expr::<i64>("a + * b").unwrap_err();
        assert_eq!(e.pos, 4);
        assert!(parse_expr::<i64>("a^b").is_err());
        assert!(parse_expr::<i64>("sin(a)").is_err());
        assert!(parse_expr::<i64>("a b").is_err());
    }
}
