//! CNF and QBF formulas with DIMACS / QDIMACS parsing and brute-force evaluation.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ReductionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lit {
    /// 1-based variable index.
    pub var: usize,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Lit {
        Lit { var, positive: true }
    }

    pub fn neg(var: usize) -> Lit {
        Lit { var, positive: false }
    }

    pub fn holds(self, assignment: &[bool]) -> bool {
        assignment[self.var - 1] == self.positive
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "~x{}", self.var)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    /// Checks literal ranges and rejects empty clauses or a variable repeated
    /// inside one clause.
    pub fn new(num_vars: usize, clauses: Vec<Vec<Lit>>) -> Result<CnfFormula, ReductionError> {
        for (j, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(ReductionError::Formula(format!("clause {} is empty", j + 1)));
            }
            for (k, l) in c.iter().enumerate() {
                if l.var == 0 || l.var > num_vars {
                    return Err(ReductionError::Formula(format!("variable {} out of range", l.var)));
                }
                if c[..k].iter().any(|o| o.var == l.var) {
                    return Err(ReductionError::Formula(format!(
                        "variable {} repeated in clause {}",
                        l.var,
                        j + 1
                    )));
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn from_ints(num_vars: usize, clauses: &[&[i64]]) -> Result<CnfFormula, ReductionError> {
        let clauses = clauses
            .iter()
            .map(|c| c.iter().map(|&x| int_lit(x)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        CnfFormula::new(num_vars, clauses)
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Every clause is all-positive or all-negative.
    pub fn is_monotone(&self) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().all(|l| l.positive) || c.iter().all(|l| !l.positive))
    }

    /// Each clause shares literals with at most one other clause, and with
    /// that clause at most one literal.
    pub fn is_lsat(&self) -> bool {
        self.lsat_violation().is_none()
    }

    pub fn lsat_violation(&self) -> Option<String> {
        for (i, a) in self.clauses.iter().enumerate() {
            let mut partners = 0;
            for (j, b) in self.clauses.iter().enumerate() {
                if i == j {
                    continue;
                }
                let shared = a.iter().filter(|l| b.contains(l)).count();
                if shared > 1 {
                    return Some(format!("clauses {} and {} share {shared} literals", i + 1, j + 1));
                }
                partners += shared;
            }
            if partners > 1 {
                return Some(format!("clause {} intersects {partners} clauses", i + 1));
            }
        }
        None
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.holds(assignment)))
    }

    /// First satisfying assignment in lexicographic order, by enumeration.
    pub fn brute_force_sat(&self) -> Option<Vec<bool>> {
        assert!(self.num_vars < 32, "brute force limited to 31 variables");
        (0u32..1 << self.num_vars)
            .map(|bits| (0..self.num_vars).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.eval(a))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            out.push_str(&clause_line(c));
        }
        out
    }
}

fn clause_line(c: &[Lit]) -> String {
    let mut s = String::new();
    for l in c {
        let v = l.var as i64;
        s.push_str(&format!("{} ", if l.positive { v } else { -v }));
    }
    s.push_str("0\n");
    s
}

fn int_lit(x: i64) -> Result<Lit, ReductionError> {
    if x == 0 {
        return Err(ReductionError::Formula("literal 0".into()));
    }
    Ok(Lit {
        var: x.unsigned_abs() as usize,
        positive: x > 0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    Exists,
    Forall,
}

/// Prenex QBF whose prefix quantifies variables 1..=n in order, alternating
/// and starting with an existential.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qbf {
    pub matrix: CnfFormula,
}

impl Qbf {
    pub fn new(matrix: CnfFormula) -> Qbf {
        Qbf { matrix }
    }

    pub fn quantifier(&self, var: usize) -> Quantifier {
        if var % 2 == 1 {
            Quantifier::Exists
        } else {
            Quantifier::Forall
        }
    }

    pub fn is_universal(&self, var: usize) -> bool {
        self.quantifier(var) == Quantifier::Forall
    }

    pub fn eval(&self) -> bool {
        let mut a = vec![false; self.matrix.num_vars];
        self.eval_from(1, &mut a)
    }

    fn eval_from(&self, var: usize, a: &mut [bool]) -> bool {
        if var > self.matrix.num_vars {
            return self.matrix.eval(a);
        }
        let branch = |v: bool, a: &mut [bool]| {
            a[var - 1] = v;
            self.eval_from(var + 1, a)
        };
        match self.quantifier(var) {
            Quantifier::Exists => branch(false, a) || branch(true, a),
            Quantifier::Forall => branch(false, a) && branch(true, a),
        }
    }

    pub fn to_qdimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.matrix.num_vars, self.matrix.clauses.len());
        for v in 1..=self.matrix.num_vars {
            let q = if self.is_universal(v) { 'a' } else { 'e' };
            out.push_str(&format!("{q} {v} 0\n"));
        }
        for c in &self.matrix.clauses {
            out.push_str(&clause_line(c));
        }
        out
    }
}

struct Header {
    vars: usize,
    clauses: usize,
}

fn syntax(line: usize, message: impl Into<String>) -> ReductionError {
    ReductionError::Parse {
        line,
        message: message.into(),
    }
}

/// Tokens of the body split into prefix lines and clause literals.
fn scan(text: &str, allow_prefix: bool) -> Result<(Header, Vec<(char, Vec<i64>, usize)>, Vec<Vec<i64>>), ReductionError> {
    let mut header = None;
    let mut prefix = Vec::new();
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
            continue;
        }
        if t.starts_with('p') {
            let parts: Vec<&str> = t.split_whitespace().collect();
            if header.is_some() || parts.len() != 4 || parts[1] != "cnf" {
                return Err(syntax(line, "expected `p cnf <vars> <clauses>`"));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| syntax(line, format!("bad number `{s}`")));
            header = Some(Header {
                vars: num(parts[2])?,
                clauses: num(parts[3])?,
            });
            continue;
        }
        if header.is_none() {
            return Err(syntax(line, "missing problem line"));
        }
        if t.starts_with('e') || t.starts_with('a') {
            if !allow_prefix {
                return Err(syntax(line, "quantifier line in plain CNF"));
            }
            if !clauses.is_empty() || !current.is_empty() {
                return Err(syntax(line, "quantifier line after clauses"));
            }
            let q = t.chars().next().unwrap();
            let vars = ints(&t[1..], line)?;
            if vars.last() != Some(&0) {
                return Err(syntax(line, "quantifier line must end with 0"));
            }
            prefix.push((q, vars[..vars.len() - 1].to_vec(), line));
            continue;
        }
        for x in ints(t, line)? {
            if x == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(x);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let header = header.ok_or_else(|| syntax(0, "missing problem line"))?;
    if clauses.len() != header.clauses {
        return Err(syntax(0, format!("header declares {} clauses, found {}", header.clauses, clauses.len())));
    }
    Ok((header, prefix, clauses))
}

fn ints(s: &str, line: usize) -> Result<Vec<i64>, ReductionError> {
    s.split_whitespace()
        .map(|w| w.parse::<i64>().map_err(|_| syntax(line, format!("bad literal `{w}`"))))
        .collect()
}

fn build(header: &Header, clauses: Vec<Vec<i64>>) -> Result<CnfFormula, ReductionError> {
    let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
    CnfFormula::from_ints(header.vars, &refs)
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ReductionError> {
    let (header, _, clauses) = scan(text, false)?;
    build(&header, clauses)
}

/// Parses QDIMACS. The prefix must list variables 1..=n in increasing order,
/// one per block, alternating `e`/`a` and starting with `e`.
pub fn parse_qdimacs(text: &str) -> Result<Qbf, ReductionError> {
    let (header, prefix, clauses) = scan(text, true)?;
    let mut expected = 1;
    for (q, vars, line) in prefix {
        for v in vars {
            if v != expected as i64 {
                return Err(syntax(line, format!("expected variable {expected} next in prefix, got {v}")));
            }
            let want = if expected % 2 == 1 { 'e' } else { 'a' };
            if q != want {
                return Err(syntax(line, format!("variable {v} must be quantified `{want}`")));
            }
            expected += 1;
        }
    }
    if expected != header.vars + 1 {
        return Err(syntax(0, format!("prefix covers {} of {} variables", expected - 1, header.vars)));
    }
    Ok(Qbf::new(build(&header, clauses)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_round_trip() {
        let f = parse_dimacs("c demo\np cnf 3 2\n1 -2 0\n2 3\n0\n").unwrap();
        assert_eq!(f.clauses, vec![vec![Lit::pos(1), Lit::neg(2)], vec![Lit::pos(2), Lit::pos(3)]]);
        assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }

    #[test]
    fn dimacs_errors() {
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 3 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\n1 1 0\n").is_err());
    }

    #[test]
    fn flags() {
        let mono = CnfFormula::from_ints(3, &[&[1, 2], &[-1, -3]]).unwrap();
        assert!(mono.is_monotone());
        let mixed = CnfFormula::from_ints(2, &[&[1, -2]]).unwrap();
        assert!(!mixed.is_monotone());
        assert!(CnfFormula::from_ints(3, &[&[1, 2], &[1, 3]]).unwrap().is_lsat());
        assert!(!CnfFormula::from_ints(3, &[&[1, 2], &[1, 2, 3]]).unwrap().is_lsat());
        assert!(!CnfFormula::from_ints(3, &[&[1], &[1, 2], &[1, 3]]).unwrap().is_lsat());
        // Opposite literals do not count as an intersection.
        assert!(CnfFormula::from_ints(1, &[&[1], &[-1]]).unwrap().is_lsat());
    }

    #[test]
    fn brute_force() {
        let sat = CnfFormula::from_ints(2, &[&[1, 2], &[-1]]).unwrap();
        assert_eq!(sat.brute_force_sat(), Some(vec![false, true]));
        let unsat = CnfFormula::from_ints(1, &[&[1], &[-1]]).unwrap();
        assert_eq!(unsat.brute_force_sat(), None);
    }

    #[test]
    fn qbf_eval_and_parse() {
        let t = Qbf::new(CnfFormula::from_ints(2, &[&[1, 2], &[1, -2]]).unwrap());
        assert!(t.eval());
        let f = Qbf::new(CnfFormula::from_ints(2, &[&[1, 2], &[-1, -2]]).unwrap());
        assert!(!f.eval());
        let g = Qbf::new(CnfFormula::from_ints(2, &[&[-1, 2], &[1, -2]]).unwrap());
        assert!(!g.eval());
        assert_eq!(parse_qdimacs(&t.to_qdimacs()).unwrap(), t);
        assert!(parse_qdimacs("p cnf 2 1\na 1 0\ne 2 0\n1 0\n").is_err());
        assert!(parse_qdimacs("p cnf 2 1\ne 1 2 0\n1 0\n").is_err());
        assert!(parse_qdimacs("p cnf 2 1\ne 1 0\n1 0\n").is_err());
    }
}
