//! Problem files, command dispatch and JSON reports for the `novikov` tool.
//!
//! Exit codes: 0 for pass, solved or effective; 1 for fail, unsolvable or
//! not effective; 2 for errors of any kind.

mod generate;
mod parse;

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::coeff::{Coeff, Ring};
use crate::descent::{check_cocycle, coboundary_datum, isocrystal_from_descent, Check, DescentDatum};
use crate::error::{Error, Result};
use crate::exponent::{fmt_rational, Monoid, Rational};
use crate::isocrystal::{trivialize_isocrystal_field, Effectivity, Isocrystal, NotEffective};
use crate::pipeline::{descend, normalize};
use crate::series::{Obstruction, Prec, Series, TwistSolution};
use crate::seriesalg::SeriesMatrix;

pub use generate::{generate_instance, GenParams, Instance, InstanceKind};
pub use parse::{
    parse_matrix, parse_monoid_descriptor, parse_problem, parse_rational, parse_ring_descriptor, parse_series,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    /// Descent datum in `(t, u)`.
    Phi(SeriesMatrix),
    /// Isocrystal matrix in `t`.
    B(SeriesMatrix),
    /// A trivialization; stands for its coboundary datum.
    Xi(SeriesMatrix),
    /// Right-hand side of `z - F(z) = c`.
    Twist(Series),
}

impl Payload {
    pub fn name(&self) -> &'static str {
        match self {
            Payload::Phi(_) => "phi",
            Payload::B(_) => "b",
            Payload::Xi(_) => "xi",
            Payload::Twist(_) => "twist",
        }
    }

    pub fn matrix(&self) -> Option<&SeriesMatrix> {
        match self {
            Payload::Phi(m) | Payload::B(m) | Payload::Xi(m) => Some(m),
            Payload::Twist(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub ring: Ring,
    pub monoid: Monoid,
    pub lambda: Rational,
    pub prec: Rational,
    pub rank: usize,
    pub payload: Payload,
}

impl Problem {
    /// The descent datum carried by a `phi` or `xi` payload.
    pub fn datum(&self) -> Result<DescentDatum> {
        match &self.payload {
            Payload::Phi(m) => DescentDatum::new(m.clone(), self.monoid.clone(), self.prec.clone()),
            Payload::Xi(m) => coboundary_datum(m, self.monoid.clone(), self.prec.clone()),
            p => Err(Error::Semantic(format!("a {} payload is not a descent datum", p.name()))),
        }
    }
}

/// Canonical text of a problem; [`parse_problem`] inverts it.
pub fn serialize_problem(p: &Problem) -> String {
    let mut out = String::new();
    writeln!(out, "ring {}", p.ring).unwrap();
    writeln!(out, "monoid {}", p.monoid).unwrap();
    writeln!(out, "lambda {}", fmt_rational(&p.lambda)).unwrap();
    writeln!(out, "prec {}", fmt_rational(&p.prec)).unwrap();
    writeln!(out, "rank {}", p.rank).unwrap();
    writeln!(out, "{}:", p.payload.name()).unwrap();
    match &p.payload {
        Payload::Twist(s) => writeln!(out, "{s}").unwrap(),
        Payload::Phi(m) | Payload::B(m) | Payload::Xi(m) => writeln!(out, "{m}").unwrap(),
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Cocycle,
    Isocrystal,
    Descend,
    TwistSolve,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Command> {
        match s {
            "validate" => Ok(Command::Validate),
            "cocycle" => Ok(Command::Cocycle),
            "isocrystal" => Ok(Command::Isocrystal),
            "descend" => Ok(Command::Descend),
            "twist-solve" => Ok(Command::TwistSolve),
            _ => Err(Error::Semantic(format!("unknown command '{s}'"))),
        }
    }
}

/// A JSON report and the matching process exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub json: Value,
    pub exit_code: i32,
}

impl Report {
    fn new(json: Value, exit_code: i32) -> Report {
        Report { json, exit_code }
    }

    pub fn error(e: &Error) -> Report {
        Report::new(error_json(e), 2)
    }

    /// Single-line JSON with sorted keys and a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string(&self.json).expect("reports serialize");
        s.push('\n');
        s
    }
}

fn error_json(e: &Error) -> Value {
    let mut v = json!({ "verdict": "error", "error": e.to_string() });
    if let Error::Syntax { line, col, .. } = e {
        v["line"] = json!(line);
        v["col"] = json!(col);
    }
    v
}

fn matrix_json(m: &SeriesMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| json!(m.get(i, j).to_string())).collect()))
            .collect(),
    )
}

fn rational_json(r: &Rational) -> Value {
    json!(fmt_rational(r))
}

fn coeff_json(c: &Coeff) -> Value {
    json!(Ring::fmt_field_elem(c))
}

fn obstruction_fields(o: &Obstruction) -> Value {
    json!({
        "representative": rational_json(&o.representative),
        "exponents": o.exponents.iter().map(rational_json).collect::<Vec<_>>(),
        "orbit_sum": coeff_json(&o.orbit_sum),
    })
}

fn not_effective_json(r: &NotEffective) -> Value {
    match r {
        NotEffective::SlopeNotOne { index, slope } => json!({
            "kind": "slope_not_one",
            "index": index,
            "slope": coeff_json(slope),
        }),
        NotEffective::ObstructedOrbit {
            row,
            column,
            obstruction,
        } => {
            let mut v = obstruction_fields(obstruction);
            v["kind"] = json!("obstructed_orbit");
            v["row"] = json!(row);
            v["column"] = json!(column);
            v
        }
    }
}

/// Parses `text` and runs `cmd`; parse failures become error reports.
pub fn run_text(cmd: Command, text: &str) -> Report {
    match parse_problem(text) {
        Ok(p) => run_command(cmd, &p),
        Err(e) => Report::error(&e),
    }
}

pub fn run_command(cmd: Command, p: &Problem) -> Report {
    let result = match cmd {
        Command::Validate => Ok(validate_report(p)),
        Command::Cocycle => cocycle_report(p),
        Command::Isocrystal => isocrystal_report(p),
        Command::Descend => return descend_report(p),
        Command::TwistSolve => twist_report(p),
    };
    result.unwrap_or_else(|e| Report::error(&e))
}

fn validate_report(p: &Problem) -> Report {
    Report::new(
        json!({
            "verdict": "pass",
            "payload": p.payload.name(),
            "ring": p.ring.to_string(),
            "monoid": p.monoid.to_string(),
            "lambda": rational_json(&p.lambda),
            "prec": rational_json(&p.prec),
            "rank": p.rank,
        }),
        0,
    )
}

fn cocycle_report(p: &Problem) -> Result<Report> {
    let d = p.datum()?;
    Ok(match check_cocycle(&d)? {
        Check::Pass => Report::new(
            json!({ "verdict": "pass", "residual": null, "prec": rational_json(&p.prec) }),
            0,
        ),
        Check::Fail(r) => Report::new(
            json!({ "verdict": "fail", "residual": matrix_json(&r), "prec": rational_json(&p.prec) }),
            1,
        ),
    })
}

fn isocrystal_report(p: &Problem) -> Result<Report> {
    let d = p.datum()?;
    let iso = isocrystal_from_descent(&d, &p.lambda)?;
    Ok(Report::new(
        json!({ "verdict": "pass", "b": matrix_json(iso.b()), "prec": rational_json(&p.prec) }),
        0,
    ))
}

fn descend_report(p: &Problem) -> Report {
    let base = |verdict: &str| {
        json!({
            "verdict": verdict,
            "xi": null,
            "residual_norm_weight": null,
            "obstruction": null,
            "prec": rational_json(&p.prec),
        })
    };
    let outcome = match &p.payload {
        Payload::B(b) => Isocrystal::new(b.clone(), p.lambda.clone(), p.monoid.clone(), p.prec.clone())
            .and_then(|iso| trivialize_isocrystal_field(&iso))
            .map(|v| match v {
                Effectivity::Effective(xi) => Effectivity::Effective(normalize(&xi)),
                Effectivity::NotEffective(r) => Effectivity::NotEffective(r),
            }),
        _ => p.datum().and_then(|d| descend(&d, &p.lambda)).map(|v| match v {
            Effectivity::Effective(t) => Effectivity::Effective(t.xi),
            Effectivity::NotEffective(r) => Effectivity::NotEffective(r),
        }),
    };
    match outcome {
        Ok(Effectivity::Effective(xi)) => {
            let mut v = base("effective");
            v["xi"] = matrix_json(&xi);
            Report::new(v, 0)
        }
        Ok(Effectivity::NotEffective(r)) => {
            let mut v = base("not_effective");
            v["obstruction"] = not_effective_json(&r);
            Report::new(v, 1)
        }
        Err(e) => {
            let mut v = base("error");
            v["error"] = json!(e.to_string());
            Report::new(v, 2)
        }
    }
}

fn twist_report(p: &Problem) -> Result<Report> {
    let Payload::Twist(c) = &p.payload else {
        return Err(Error::Semantic(format!("twist-solve needs a twist payload, got {}", p.payload.name())));
    };
    let c = c.truncate(&Prec::Finite(p.prec.clone()));
    Ok(match c.solve_additive_twist(&p.lambda, &p.monoid)? {
        TwistSolution::Solved(z) => Report::new(
            json!({ "verdict": "solved", "z": z.to_string(), "obstruction": null, "prec": rational_json(&p.prec) }),
            0,
        ),
        TwistSolution::Unsolvable(o) => Report::new(
            json!({ "verdict": "unsolvable", "z": null, "obstruction": obstruction_fields(&o), "prec": rational_json(&p.prec) }),
            1,
        ),
    })
}
