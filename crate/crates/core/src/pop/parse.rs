use super::{Constraint, ConstraintKind, Pop, PopError, VarBox};
use crate::poly::{parse_polynomial, PolyError, Polynomial};

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn poly_at(text: &str, vars: &[String], line: usize) -> Result<Polynomial, PopError> {
    parse_polynomial(text, vars).map_err(|e| match e {
        PolyError::UnknownVariable { name, .. } => PopError::UndeclaredVariable(name),
        other => PopError::Poly {
            line,
            source: other,
        },
    })
}

fn parse_bound(tok: &str, line: usize) -> Result<f64, PopError> {
    match tok {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => {
            if let Some((p, q)) = tok.split_once('/') {
                let p: f64 = p.trim().parse().map_err(|_| bad(line, "malformed bound"))?;
                let q: f64 = q.trim().parse().map_err(|_| bad(line, "malformed bound"))?;
                Ok(p / q)
            } else {
                tok.parse().map_err(|_| bad(line, "malformed bound"))
            }
        }
    }
}

fn bad(line: usize, msg: &str) -> PopError {
    PopError::Syntax {
        line,
        msg: msg.to_string(),
    }
}

/// Parses the line-oriented POP format:
///
/// ```text
/// vars x y            # declaration, order fixes indexing
/// min 2*x + y         # exactly one objective line
/// st x*y - 1/16 >= 0  # constraints, '>= 0' or '== 0'
/// bounds 0 <= x <= 1  # optional, one per variable
/// radius 1            # optional box radius b
/// ```
pub fn parse_pop(text: &str) -> Result<Pop, PopError> {
    let mut vars: Option<Vec<String>> = None;
    let mut objective: Option<Polynomial> = None;
    let mut constraints = Vec::new();
    let mut bounds: Vec<(usize, f64, f64)> = Vec::new();
    let mut radius: Option<f64> = None;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        let (keyword, rest) = match body.split_once(char::is_whitespace) {
            Some((a, b)) => (a, b.trim()),
            None => (body, ""),
        };
        match keyword {
            "vars" => {
                if vars.is_some() {
                    return Err(bad(line, "duplicate `vars` line"));
                }
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if names.is_empty() {
                    return Err(bad(line, "`vars` needs at least one name"));
                }
                for (i, nm) in names.iter().enumerate() {
                    let ok = nm
                        .chars()
                        .next()
                        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                        && nm.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                    if !ok {
                        return Err(bad(line, &format!("invalid variable name `{nm}`")));
                    }
                    if names[..i].contains(nm) {
                        return Err(bad(line, &format!("variable `{nm}` declared twice")));
                    }
                }
                vars = Some(names);
            }
            "min" => {
                let v = vars.as_ref().ok_or_else(|| bad(line, "`min` before `vars`"))?;
                if objective.is_some() {
                    return Err(bad(line, "more than one objective line"));
                }
                objective = Some(poly_at(rest, v, line)?);
            }
            "max" => return Err(bad(line, "only minimization is supported; negate the objective")),
            "st" => {
                let v = vars.as_ref().ok_or_else(|| bad(line, "`st` before `vars`"))?;
                let (lhs, rhs, kind, flip) = if let Some((l, r)) = rest.split_once(">=") {
                    (l, r, ConstraintKind::Geq0, false)
                } else if let Some((l, r)) = rest.split_once("<=") {
                    (l, r, ConstraintKind::Geq0, true)
                } else if let Some((l, r)) = rest.split_once("==") {
                    (l, r, ConstraintKind::Eq0, false)
                } else {
                    return Err(bad(line, "constraint needs `>=`, `<=` or `==`"));
                };
                let l = poly_at(lhs, v, line)?;
                let r = poly_at(rhs, v, line)?;
                let poly = if flip { &r - &l } else { &l - &r };
                constraints.push(Constraint { poly, kind });
            }
            "bounds" => {
                let v = vars.as_ref().ok_or_else(|| bad(line, "`bounds` before `vars`"))?;
                let parts: Vec<&str> = rest.split("<=").map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(bad(line, "expected `bounds L <= name <= U`"));
                }
                let idx = v
                    .iter()
                    .position(|n| n == parts[1])
                    .ok_or_else(|| PopError::UndeclaredVariable(parts[1].to_string()))?;
                let lo = parse_bound(parts[0], line)?;
                let hi = parse_bound(parts[2], line)?;
                if lo > hi {
                    return Err(PopError::InconsistentBounds {
                        name: parts[1].to_string(),
                        lower: lo,
                        upper: hi,
                    });
                }
                if bounds.iter().any(|b| b.0 == idx) {
                    return Err(bad(line, &format!("second `bounds` line for `{}`", parts[1])));
                }
                bounds.push((idx, lo, hi));
            }
            "radius" => {
                let b = parse_bound(rest, line)?;
                if !(b >= 1.0) || !b.is_finite() {
                    return Err(PopError::InvalidRadius(b));
                }
                radius = Some(b);
            }
            other => return Err(bad(line, &format!("unknown keyword `{other}`"))),
        }
    }

    let vars = vars.ok_or_else(|| bad(1, "missing `vars` line"))?;
    let objective = objective.ok_or_else(|| bad(1, "missing `min` line"))?;
    let n = vars.len();
    let mut pop = Pop::new(vars, objective, constraints)?;
    pop.radius = radius;
    if !bounds.is_empty() {
        let mut bx = VarBox {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        };
        for (i, lo, hi) in bounds {
            bx.lower[i] = lo;
            bx.upper[i] = hi;
        }
        pop = pop.with_box(bx)?;
    }
    Ok(pop)
}
