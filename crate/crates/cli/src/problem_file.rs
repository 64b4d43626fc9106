//! Plain-text problem files.
//!
//! A file is a stream of whitespace-separated tokens; `#` starts a comment that runs to the end
//! of the line. Numbers are decimals (`-0.25`, `1e-3`) or rationals (`-1/4`, `109/432`).
//!
//! ```text
//! n 2
//! m 3
//! Q  2 0   0 -2          # n·n entries, row-major
//! q  0 0
//! A  1 -1  1 1  1 0      # m·n entries, row-major
//! b  0 0 1/4
//! start case3 1/4 1/8    # optional named starting points
//! component F1           # optional components, each a union of pieces
//!   piece
//!     eq 1 -1 = 0        # n coefficients, `=`, right-hand side
//!     ge 1 0 >= 1/4      # n coefficients, `>=`, right-hand side
//! ```
//!
//! `n` and `m` must precede the data sections; `Q`, `q`, `A` and `b` are each required exactly
//! once. A `piece` belongs to the most recent `component`, and `eq`/`ge` rows to the most recent
//! `piece`.

use std::fmt;

use idca::{ComponentDescription, IqpProblem, PolyhedralPiece};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::fmt_number;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing section `{0}`")]
    Missing(&'static str),
    #[error("invalid problem data: {0}")]
    Model(#[from] idca::Error),
    #[error("component {name:?}: {source}")]
    Component { name: String, source: idca::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub problem: IqpProblem,
    pub starts: Vec<(String, DVector<f64>)>,
    pub components: Vec<ComponentDescription>,
}

impl ProblemFile {
    pub fn start(&self, name: &str) -> Option<&DVector<f64>> {
        self.starts.iter().find(|(n, _)| n == name).map(|(_, x)| x)
    }

    pub fn component(&self, name: &str) -> Option<&ComponentDescription> {
        self.components.iter().find(|c| c.name == name)
    }
}

/// Parses a decimal or `p/q` literal. Rationals are rounded once, by the final division.
pub fn parse_number(tok: &str) -> Option<f64> {
    let value = match tok.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.parse().ok()?;
            let den: f64 = den.parse().ok()?;
            if den == 0.0 {
                return None;
            }
            num / den
        }
        None => tok.parse().ok()?,
    };
    value.is_finite().then_some(value)
}

/// Parses a comma-separated vector such as `1/4,0.125`.
pub fn parse_vector(text: &str) -> Option<DVector<f64>> {
    let values = text
        .split(',')
        .map(|t| parse_number(t.trim()))
        .collect::<Option<Vec<f64>>>()?;
    (!values.is_empty()).then(|| DVector::from_vec(values))
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| {
                let code = line.split('#').next().unwrap_or("");
                code.split_whitespace().map(move |t| (i + 1, t))
            })
            .collect();
        Self { items, pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.items.get(self.pos).copied();
        self.pos += usize::from(item.is_some());
        item
    }

    fn line(&self) -> usize {
        self.items
            .get(self.pos.min(self.items.len().saturating_sub(1)))
            .map_or(0, |(l, _)| *l)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line(),
            message: message.into(),
        }
    }

    fn word(&mut self, what: &str) -> Result<&'a str, ParseError> {
        match self.next() {
            Some((_, t)) => Ok(t),
            None => Err(self.error(format!("unexpected end of file, expected {what}"))),
        }
    }

    fn number(&mut self, what: &str) -> Result<f64, ParseError> {
        let (line, tok) = self
            .next()
            .ok_or_else(|| self.error(format!("unexpected end of file, expected {what}")))?;
        parse_number(tok).ok_or_else(|| ParseError::Syntax {
            line,
            message: format!("expected a number for {what}, found {tok:?}"),
        })
    }

    fn count(&mut self, what: &str) -> Result<usize, ParseError> {
        let (line, tok) = self
            .next()
            .ok_or_else(|| self.error(format!("unexpected end of file, expected {what}")))?;
        tok.parse()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| ParseError::Syntax {
                line,
                message: format!("{what} must be a positive integer, found {tok:?}"),
            })
    }

    fn numbers(&mut self, len: usize, what: &str) -> Result<Vec<f64>, ParseError> {
        (0..len).map(|_| self.number(what)).collect()
    }

    fn expect(&mut self, want: &str) -> Result<(), ParseError> {
        let (line, tok) = self
            .next()
            .ok_or_else(|| self.error(format!("unexpected end of file, expected `{want}`")))?;
        if tok == want {
            Ok(())
        } else {
            Err(ParseError::Syntax {
                line,
                message: format!("expected `{want}`, found {tok:?}"),
            })
        }
    }
}

#[derive(Default)]
struct PieceRows {
    eq: Vec<(Vec<f64>, f64)>,
    ge: Vec<(Vec<f64>, f64)>,
}

fn build_piece(n: usize, rows: PieceRows) -> idca::Result<PolyhedralPiece> {
    let stack = |rows: &[(Vec<f64>, f64)]| {
        let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i].0[j]);
        let b = DVector::from_fn(rows.len(), |i, _| rows[i].1);
        (a, b)
    };
    let (aeq, beq) = stack(&rows.eq);
    let (aineq, bineq) = stack(&rows.ge);
    PolyhedralPiece::new(aeq, beq, aineq, bineq)
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let mut toks = Tokens::new(text);
    let (mut n, mut m) = (None, None);
    let (mut q_mat, mut q_vec, mut a, mut b) = (None, None, None, None);
    let mut starts: Vec<(String, DVector<f64>)> = Vec::new();
    let mut components: Vec<(String, Vec<PieceRows>)> = Vec::new();

    let need = |v: Option<usize>, toks: &Tokens, key: &str, dim: &str| {
        v.ok_or_else(|| toks.error(format!("`{key}` needs `{dim}` to be declared first")))
    };
    let once = |seen: bool, toks: &Tokens, key: &str| {
        if seen {
            Err(toks.error(format!("`{key}` given twice")))
        } else {
            Ok(())
        }
    };

    while let Some((line, key)) = toks.next() {
        match key {
            "n" => {
                once(n.is_some(), &toks, "n")?;
                n = Some(toks.count("n")?);
            }
            "m" => {
                once(m.is_some(), &toks, "m")?;
                m = Some(toks.count("m")?);
            }
            "Q" => {
                once(q_mat.is_some(), &toks, "Q")?;
                let n = need(n, &toks, "Q", "n")?;
                q_mat = Some(DMatrix::from_row_slice(n, n, &toks.numbers(n * n, "Q")?));
            }
            "q" => {
                once(q_vec.is_some(), &toks, "q")?;
                let n = need(n, &toks, "q", "n")?;
                q_vec = Some(DVector::from_vec(toks.numbers(n, "q")?));
            }
            "A" => {
                once(a.is_some(), &toks, "A")?;
                let n = need(n, &toks, "A", "n")?;
                let m = need(m, &toks, "A", "m")?;
                a = Some(DMatrix::from_row_slice(m, n, &toks.numbers(m * n, "A")?));
            }
            "b" => {
                once(b.is_some(), &toks, "b")?;
                let m = need(m, &toks, "b", "m")?;
                b = Some(DVector::from_vec(toks.numbers(m, "b")?));
            }
            "start" => {
                let n = need(n, &toks, "start", "n")?;
                let name = toks.word("a start name")?.to_string();
                if starts.iter().any(|(s, _)| *s == name) {
                    return Err(toks.error(format!("duplicate start {name:?}")));
                }
                starts.push((name, DVector::from_vec(toks.numbers(n, "start")?)));
            }
            "component" => {
                need(n, &toks, "component", "n")?;
                let name = toks.word("a component name")?.to_string();
                if components.iter().any(|(c, _)| *c == name) {
                    return Err(toks.error(format!("duplicate component {name:?}")));
                }
                components.push((name, Vec::new()));
            }
            "piece" => match components.last_mut() {
                Some((_, pieces)) => pieces.push(PieceRows::default()),
                None => return Err(toks.error("`piece` outside a component")),
            },
            "eq" | "ge" => {
                let n = need(n, &toks, key, "n")?;
                let coeffs = toks.numbers(n, "row coefficients")?;
                toks.expect(if key == "eq" { "=" } else { ">=" })?;
                let rhs = toks.number("right-hand side")?;
                let piece = components
                    .last_mut()
                    .and_then(|(_, pieces)| pieces.last_mut())
                    .ok_or_else(|| toks.error(format!("`{key}` row outside a piece")))?;
                let rows = if key == "eq" {
                    &mut piece.eq
                } else {
                    &mut piece.ge
                };
                rows.push((coeffs, rhs));
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("unknown keyword {other:?}"),
                })
            }
        }
    }

    let problem = IqpProblem::new(
        q_mat.ok_or(ParseError::Missing("Q"))?,
        q_vec.ok_or(ParseError::Missing("q"))?,
        a.ok_or(ParseError::Missing("A"))?,
        b.ok_or(ParseError::Missing("b"))?,
    )?;
    let n = problem.n();
    let components = components
        .into_iter()
        .map(|(name, pieces)| {
            let pieces = pieces
                .into_iter()
                .map(|rows| build_piece(n, rows))
                .collect::<idca::Result<Vec<_>>>();
            match pieces {
                Ok(pieces) => Ok(ComponentDescription { name, pieces }),
                Err(source) => Err(ParseError::Component { name, source }),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProblemFile {
        problem,
        starts,
        components,
    })
}

fn write_row(f: &mut fmt::Formatter<'_>, values: impl IntoIterator<Item = f64>) -> fmt::Result {
    for v in values {
        write!(f, " {}", fmt_number(v))?;
    }
    Ok(())
}

/// Writes the file back in the grammar above. Every number uses the shortest decimal that
/// parses back to the same double.
impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.problem;
        writeln!(f, "n {}", p.n())?;
        writeln!(f, "m {}", p.m())?;
        write!(f, "Q")?;
        for i in 0..p.n() {
            write!(f, "\n ")?;
            write_row(f, p.q_mat().row(i).iter().copied())?;
        }
        write!(f, "\nq")?;
        write_row(f, p.q_vec().iter().copied())?;
        write!(f, "\nA")?;
        for i in 0..p.m() {
            write!(f, "\n ")?;
            write_row(f, p.a().row(i).iter().copied())?;
        }
        write!(f, "\nb")?;
        write_row(f, p.b().iter().copied())?;
        writeln!(f)?;
        for (name, x) in &self.starts {
            write!(f, "start {name}")?;
            write_row(f, x.iter().copied())?;
            writeln!(f)?;
        }
        for comp in &self.components {
            writeln!(f, "component {}", comp.name)?;
            for piece in &comp.pieces {
                writeln!(f, "  piece")?;
                for (i, rhs) in piece.beq.iter().enumerate() {
                    write!(f, "    eq")?;
                    write_row(f, piece.aeq.row(i).iter().copied())?;
                    writeln!(f, " = {}", fmt_number(*rhs))?;
                }
                for (i, rhs) in piece.bineq.iter().enumerate() {
                    write!(f, "    ge")?;
                    write_row(f, piece.aineq.row(i).iter().copied())?;
                    writeln!(f, " >= {}", fmt_number(*rhs))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = include_str!("../problems/example.iqp");

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1/4"), Some(0.25));
        assert_eq!(parse_number("-109/432"), Some(-109.0 / 432.0));
        assert_eq!(parse_number("1e-3"), Some(1e-3));
        assert_eq!(parse_number("1/0"), None);
        assert_eq!(parse_number("x"), None);
        assert_eq!(
            parse_vector("1/4, 0.125").unwrap().as_slice(),
            &[0.25, 0.125]
        );
    }

    #[test]
    fn example_file() {
        let file = parse_problem(EXAMPLE).unwrap();
        assert_eq!(file.problem, idca::worked_example::example_problem());
        assert_eq!(file.start("case3").unwrap().as_slice(), &[0.25, 0.125]);
        let names: Vec<&str> = file.components.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["F1", "F2", "P"]);
        assert_eq!(file.components, idca::worked_example::example_components());
    }

    #[test]
    fn round_trip_example() {
        let file = parse_problem(EXAMPLE).unwrap();
        assert_eq!(parse_problem(&file.to_string()).unwrap(), file);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_problem("n 2\nm 1\nQ 1 0 0 1\nq 0 zero\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 4, .. }), "{err}");
        let err = parse_problem("Q 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 1, .. }), "{err}");
        let err = parse_problem("n 1\nm 1\nQ 1\nq 0\nA 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Missing("b")), "{err}");
        let err = parse_problem("n 1\nm 1\nQ 1\nq 0\nA 1\nb 0\nbogus\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 7, .. }), "{err}");
    }

    #[test]
    fn infeasible_data_is_rejected() {
        let err = parse_problem("n 1\nm 2\nQ 1\nq 0\nA 1 -1\nb 1 0\n").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Model(idca::Error::InfeasibleConstraintSet)
        ));
    }
}
