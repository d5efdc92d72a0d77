use serde::{Deserialize, Serialize};

use crate::optics::Mirror;

/// Grid cell `[L_i, L_{i+1}] × [λ_j, λ_{j+1}]` containing a fundamental
/// resonance of longitudinal order `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OracleCell {
    pub l_index: usize,
    pub lambda_index: usize,
    pub m: u32,
}

/// Brute-force resonance map. At each grid corner the round-trip phase
/// divided by 2π, `2nL/λ - ζ(L)`, is evaluated; a cell is marked for every
/// integer the corner values bracket (inclusive, so exact corner hits
/// count).
pub fn oracle_dispersion(mirror: &Mirror, l_grid_um: &[f64], lambda_grid_nm: &[f64], gouy: bool) -> Vec<OracleCell> {
    let roc = (mirror.roc_x_um * mirror.roc_y_um).sqrt();
    let n = mirror.refractive_index;
    let order = |l: f64, lam: f64| {
        let zeta = if gouy { (1.0 - l / roc).sqrt().acos() / std::f64::consts::PI } else { 0.0 };
        2.0 * n * l * 1e3 / lam - zeta
    };
    let mut out = Vec::new();
    if l_grid_um.len() < 2 || lambda_grid_nm.len() < 2 {
        return out;
    }
    for i in 0..l_grid_um.len() - 1 {
        for j in 0..lambda_grid_nm.len() - 1 {
            let corners = [
                order(l_grid_um[i], lambda_grid_nm[j]),
                order(l_grid_um[i], lambda_grid_nm[j + 1]),
                order(l_grid_um[i + 1], lambda_grid_nm[j]),
                order(l_grid_um[i + 1], lambda_grid_nm[j + 1]),
            ];
            if corners.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let lo = corners.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let first = lo.ceil().max(1.0) as u32;
            let last = hi.floor();
            if last < 1.0 {
                continue;
            }
            for m in first..=last as u32 {
                out.push(OracleCell { l_index: i, lambda_index: j, m });
            }
        }
    }
    out
}
