//! `CALP1` text format: a header `CALP1 <dim>` followed by one term per
//! line, `coeff beta_1 [beta_2 ...] j`.

use super::poly::{CaloricPoly, Coeff, Term, MAX_DEGREE};
use crate::error::{Error, Result};

pub fn poly_to_text<T: Coeff>(p: &CaloricPoly<T>) -> String {
    let mut out = format!("CALP1 {}\n", p.dim());
    for (term, c) in p.terms() {
        out.push_str(&c.to_text());
        for b in &term.beta {
            out.push_str(&format!(" {b}"));
        }
        out.push_str(&format!(" {}\n", term.j));
    }
    out
}

pub fn poly_from_text<T: Coeff>(text: &str) -> Result<CaloricPoly<T>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::PolyParse { line: 1, msg: "empty input".into() })?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("CALP1") {
        return Err(Error::PolyParse { line: 1, msg: "missing CALP1 header".into() });
    }
    let dim: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .filter(|&d| d >= 1)
        .ok_or(Error::PolyParse { line: 1, msg: "bad dimension".into() })?;
    let mut p = CaloricPoly::zero(dim);
    for (i, line) in lines {
        let lineno = i + 1;
        let err = |msg: &str| Error::PolyParse { line: lineno, msg: msg.to_string() };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != dim + 2 {
            return Err(err(&format!("expected {} fields, found {}", dim + 2, fields.len())));
        }
        let c = T::from_text(fields[0]).ok_or_else(|| err("bad coefficient"))?;
        let mut nums = Vec::with_capacity(dim + 1);
        for f in &fields[1..] {
            nums.push(f.parse::<u32>().map_err(|_| err("bad exponent"))?);
        }
        let j = nums.pop().expect("dim + 1 exponents");
        let term = Term::new(nums, j);
        if term.degree() > MAX_DEGREE {
            return Err(err("term exceeds the degree bound"));
        }
        p.add_term(term, c);
    }
    Ok(p)
}
