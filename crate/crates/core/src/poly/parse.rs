use super::{Monomial, PolyError, Polynomial};

/// Exact-when-possible coefficient used while a single term is being read.
#[derive(Debug, Clone, Copy)]
enum Coef {
    Exact(i128, i128),
    Float(f64),
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Coef {
    fn one() -> Self {
        Coef::Exact(1, 1)
    }

    fn exact(num: i128, den: i128) -> Self {
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Coef::Exact(s * num / g, s * den / g)
    }

    fn to_f64(self) -> f64 {
        match self {
            Coef::Float(v) => v,
            // a single correctly rounded division whenever |p|, q ≤ 2^53
            Coef::Exact(p, q) => p as f64 / q as f64,
        }
    }

    fn mul(self, other: Coef) -> Coef {
        match (self, other) {
            (Coef::Exact(a, b), Coef::Exact(c, d)) => {
                match (a.checked_mul(c), b.checked_mul(d)) {
                    (Some(p), Some(q)) => Coef::exact(p, q),
                    _ => Coef::Float(self.to_f64() * other.to_f64()),
                }
            }
            _ => Coef::Float(self.to_f64() * other.to_f64()),
        }
    }

    fn neg(self) -> Coef {
        match self {
            Coef::Exact(p, q) => Coef::Exact(-p, q),
            Coef::Float(v) => Coef::Float(-v),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> PolyError {
        PolyError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c == b'#' {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn poly(&mut self) -> Result<Polynomial, PolyError> {
        let n = self.vars.len();
        let mut out = Polynomial::zero(n);
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let (coef, mono) = self.term()?;
            let coef = if sign < 0 { coef.neg() } else { coef };
            out.add_term(Monomial::new(mono), coef.to_f64());
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1;
                }
                None => break,
                Some(c) => return Err(self.err(format!("unexpected character `{}`", c as char))),
            }
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(Coef, Vec<u32>), PolyError> {
        let mut coef = Coef::one();
        let mut mono = vec![0u32; self.vars.len()];
        loop {
            self.factor(&mut coef, &mut mono)?;
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((coef, mono))
    }

    fn factor(&mut self, coef: &mut Coef, mono: &mut [u32]) -> Result<(), PolyError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                *coef = coef.mul(self.number()?);
                Ok(())
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                let idx = self
                    .vars
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| PolyError::UnknownVariable {
                        name: name.to_string(),
                        pos: start,
                    })?;
                let mut exp = 1u32;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    match self.peek() {
                        Some(b'-') => return Err(PolyError::NegativeExponent { pos: self.pos }),
                        Some(c) if c.is_ascii_digit() => {
                            let s = self.pos;
                            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                                self.pos += 1;
                            }
                            let text = std::str::from_utf8(&self.src[s..self.pos]).unwrap_or("");
                            exp = text.parse().map_err(|_| self.err("exponent out of range"))?;
                        }
                        _ => return Err(self.err("expected unsigned exponent after `^`")),
                    }
                }
                mono[idx] += exp;
                Ok(())
            }
            Some(c) => Err(self.err(format!("unexpected character `{}`", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    /// `decimal | int '/' int`; decimals may carry an exponent suffix.
    fn number(&mut self) -> Result<Coef, PolyError> {
        let start = self.pos;
        let bytes = self.src;
        let mut i = self.pos;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let int_end = i;
        let mut is_decimal = false;
        if i < bytes.len() && bytes[i] == b'.' {
            is_decimal = true;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
        let mantissa_end = i;
        let mut exp10: i32 = 0;
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            let ds = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > ds {
                is_decimal = true;
                exp10 = std::str::from_utf8(&bytes[i + 1..j])
                    .unwrap_or("0")
                    .parse()
                    .map_err(|_| self.err("bad exponent"))?;
                i = j;
            }
        }
        let text = std::str::from_utf8(&bytes[start..i]).unwrap_or("");
        if text == "." || text.is_empty() {
            return Err(self.err("malformed number"));
        }
        self.pos = i;
        if !is_decimal {
            let p: i128 = text.parse().map_err(|_| self.err("integer out of range"))?;
            // optional `/ int`
            let save = self.pos;
            if self.peek() == Some(b'/') {
                self.pos += 1;
                self.skip_ws();
                let s = self.pos;
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if s == self.pos {
                    return Err(self.err("expected integer denominator"));
                }
                let q: i128 = std::str::from_utf8(&bytes[s..self.pos])
                    .unwrap_or("")
                    .parse()
                    .map_err(|_| self.err("integer out of range"))?;
                if q == 0 {
                    return Err(self.err("zero denominator"));
                }
                return Ok(Coef::exact(p, q));
            }
            self.pos = save;
            return Ok(Coef::Exact(p, 1));
        }
        // exact decimal when digits fit, so products inside a term stay exact
        let digits: String = std::str::from_utf8(&bytes[start..mantissa_end])
            .unwrap_or("")
            .chars()
            .filter(|c| *c != '.')
            .collect();
        let frac_len = if int_end < mantissa_end {
            (mantissa_end - int_end - 1) as i32
        } else {
            0
        };
        let scale = exp10 - frac_len;
        let value: f64 = text.parse().map_err(|_| self.err("malformed number"))?;
        if digits.len() <= 15 && scale.abs() <= 15 {
            if let Ok(m) = digits.parse::<i128>() {
                let p10 = 10i128.pow(scale.unsigned_abs());
                let c = if scale >= 0 {
                    Coef::Exact(m * p10, 1)
                } else {
                    Coef::exact(m, p10)
                };
                return Ok(c);
            }
        }
        Ok(Coef::Float(value))
    }
}

/// Parses `text` against the ordered variable list `vars`.
///
/// Terms are joined by `+`/`-`; factors `c`, `xk`, `xk^d` are joined by `*`;
/// coefficients are decimals or `p/q` rationals. A leading sign is accepted
/// and `#` starts a comment running to end of line.
pub fn parse_polynomial(text: &str, vars: &[String]) -> Result<Polynomial, PolyError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    };
    if p.peek().is_none() {
        return Err(p.err("empty polynomial"));
    }
    p.poly()
}
