use super::ConstraintSet;
use crate::arch::ConvexPiece;
use crate::lp::LpProblem;
use crate::{Error, Result};

/// LP whose optimum is `min piece(x) + q.x + r` over `cons`.
///
/// Variables are `x` followed by one epigraph variable per trunk unit. Each
/// unit with pre-activation `s` gets `z >= s` and `z >= a s`; since every
/// downstream weight is nonnegative the relaxation is tight at the optimum.
pub fn epigraph_lp(piece: &ConvexPiece<'_>, q: &[f64], r: f64, cons: &ConstraintSet) -> Result<LpProblem> {
    let d = cons.dim();
    if piece.input_dim() != d || q.len() != d {
        return Err(Error::dim(format!(
            "piece/linear term/constraint dimensions disagree ({}, {}, {d})",
            piece.input_dim(),
            q.len()
        )));
    }
    if piece.weights.iter().any(|&c| c < 0.0 || !c.is_finite()) {
        return Err(Error::Contract("convex piece needs nonnegative output weights".into()));
    }
    let trunk = if piece.trunk_unused() { &piece.trunk[..0] } else { piece.trunk };
    for (k, layer) in trunk.iter().enumerate() {
        if k > 0 && !layer.nonneg {
            return Err(Error::Unsupported(format!("layer {k} has unconstrained z-weights")));
        }
    }
    let widths: Vec<usize> = trunk.iter().map(|l| l.out_dim()).collect();
    let nz: usize = widths.iter().sum();
    let mut lp = cons.base_lp(nz);
    let n = d + nz;

    let mut start = d;
    let mut prev_start = 0;
    for (k, layer) in trunk.iter().enumerate() {
        for i in 0..layer.out_dim() {
            let zi = start + i;
            lp.names[zi] = format!("z{k}_{i}");
            // s - b as a row over the LP variables
            let mut s = vec![0.0; n];
            for j in 0..layer.in_dim() {
                s[prev_start + j] += layer.effective(i, j);
            }
            if let Some(p) = &layer.passthrough {
                for (j, &v) in p.row(i).iter().enumerate() {
                    s[j] += v;
                }
            }
            let b = if layer.bias_enabled { layer.bias[i] } else { 0.0 };
            match layer.activation.lower_slope(layer.slope[i]) {
                None => {
                    // linear unit: z = s
                    let mut up = s.clone();
                    up[zi] -= 1.0;
                    lp.add_le(up, -b);
                    let mut down: Vec<f64> = s.iter().map(|v| -v).collect();
                    down[zi] += 1.0;
                    lp.add_le(down, b);
                }
                Some(a) => {
                    if !(0.0..=1.0).contains(&a) {
                        return Err(Error::Contract(format!("activation slope {a} outside [0, 1]")));
                    }
                    let mut row = s.clone();
                    row[zi] -= 1.0;
                    lp.add_le(row, -b);
                    if a == 0.0 {
                        lp.set_bounds(zi, 0.0, f64::INFINITY);
                    } else if a < 1.0 {
                        let mut row: Vec<f64> = s.iter().map(|v| a * v).collect();
                        row[zi] -= 1.0;
                        lp.add_le(row, -a * b);
                    }
                }
            }
        }
        prev_start = start;
        start += layer.out_dim();
    }

    for j in 0..d {
        lp.objective[j] = piece.linear[j] + q[j];
    }
    if let Some(&w_last) = widths.last() {
        let last = d + nz - w_last;
        for (i, &c) in piece.weights.iter().enumerate() {
            lp.objective[last + i] = c;
        }
    }
    lp.constant = piece.offset + r;
    Ok(lp)
}
