use std::fmt::Write;

use super::problem::LpProblem;

fn term(out: &mut String, first: &mut bool, coef: f64, name: &str) {
    if coef == 0.0 {
        return;
    }
    let sign = if coef < 0.0 { "-" } else { "+" };
    if *first {
        if coef < 0.0 {
            out.push_str("- ");
        }
        *first = false;
    } else {
        let _ = write!(out, " {sign} ");
    }
    let _ = write!(out, "{} {name}", coef.abs());
}

impl LpProblem {
    /// Text dump in CPLEX LP format, for inspection with external solvers.
    /// The objective constant is written as a comment since the format has no slot for it.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\ constant {}", self.constant);
        out.push_str("Minimize\n obj: ");
        let mut first = true;
        for (c, name) in self.objective.iter().zip(&self.names) {
            term(&mut out, &mut first, *c, name);
        }
        if first {
            out.push('0');
        }
        out.push_str("\nSubject To\n");
        for (i, (row, b)) in self.rows.iter().zip(&self.rhs).enumerate() {
            let _ = write!(out, " c{i}: ");
            let mut first = true;
            for (c, name) in row.iter().zip(&self.names) {
                term(&mut out, &mut first, *c, name);
            }
            if first {
                out.push_str("0 ");
                out.push_str(&self.names.first().cloned().unwrap_or_default());
            }
            let _ = writeln!(out, " <= {b}");
        }
        out.push_str("Bounds\n");
        for ((l, u), name) in self.lower.iter().zip(&self.upper).zip(&self.names) {
            match (l.is_finite(), u.is_finite()) {
                (false, false) => {
                    let _ = writeln!(out, " {name} free");
                }
                (true, true) => {
                    let _ = writeln!(out, " {l} <= {name} <= {u}");
                }
                (true, false) => {
                    let _ = writeln!(out, " {name} >= {l}");
                }
                (false, true) => {
                    let _ = writeln!(out, " -inf <= {name} <= {u}");
                }
            }
        }
        out.push_str("End\n");
        out
    }
}
