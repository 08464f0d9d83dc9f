//! Rotated surface code.
//!
//! Data qubit `(r, c)` has index `r·d + c`. Plaquettes are labelled by their
//! south-east corner `(i, j)` with `0 ≤ i, j ≤ d` and cover data
//! `(i−1..=i, j−1..=j)` clipped to the grid. A plaquette is X-type when
//! `i + j` is even. Weight-2 X checks sit on the top and bottom edges,
//! weight-2 Z checks on the left and right edges.
//!
//! CNOT order per plaquette is NW, NE, SW, SE for X checks and NW, SW, NE,
//! SE for Z checks, giving four layers in which no qubit is used twice.

use super::{CheckRef, StabilizerCode};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};

pub fn rotated_surface_code(d: usize) -> Result<StabilizerCode> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::InvalidCode(format!("surface code distance must be odd and ≥ 3, got {d}")));
    }
    let n = d * d;
    let idx = |r: usize, c: usize| r * d + c;
    let mut x_checks: Vec<[Option<usize>; 4]> = Vec::new();
    let mut z_checks: Vec<[Option<usize>; 4]> = Vec::new();
    for i in 0..=d {
        for j in 0..=d {
            let corner = |di: usize, dj: usize| {
                let (r, c) = ((i + di).checked_sub(1)?, (j + dj).checked_sub(1)?);
                (r < d && c < d).then(|| idx(r, c))
            };
            let (nw, ne, sw, se) = (corner(0, 0), corner(0, 1), corner(1, 0), corner(1, 1));
            let weight = [nw, ne, sw, se].iter().flatten().count();
            let x_type = (i + j) % 2 == 0;
            let keep = match weight {
                4 => true,
                2 if i == 0 || i == d => x_type,
                2 => !x_type,
                _ => false,
            };
            if !keep {
                continue;
            }
            if x_type {
                x_checks.push([nw, ne, sw, se]);
            } else {
                z_checks.push([nw, sw, ne, se]);
            }
        }
    }
    let to_matrix = |checks: &[[Option<usize>; 4]]| {
        BitMatrix::from_rows(
            n,
            checks
                .iter()
                .map(|c| BitVec::from_indices(n, c.iter().flatten().copied()))
                .collect(),
        )
    };
    let h_x = to_matrix(&x_checks);
    let h_z = to_matrix(&z_checks);
    let mut schedule = vec![Vec::new(); 4];
    for (layer, step) in schedule.iter_mut().enumerate() {
        for (a, c) in x_checks.iter().enumerate() {
            if let Some(q) = c[layer] {
                step.push((CheckRef::X(a), q));
            }
        }
        for (a, c) in z_checks.iter().enumerate() {
            if let Some(q) = c[layer] {
                step.push((CheckRef::Z(a), q));
            }
        }
    }
    // X̄ along the left column, Z̄ along the top row.
    let logical_x = BitMatrix::from_rows(n, vec![BitVec::from_indices(n, (0..d).map(|r| idx(r, 0)))]);
    let logical_z = BitMatrix::from_rows(n, vec![BitVec::from_indices(n, (0..d).map(|c| idx(0, c)))]);
    let mut code = StabilizerCode::assemble(format!("surface-d{d}"), h_x, h_z, logical_x, logical_z, schedule)?;
    code.d_upper = Some(d);
    Ok(code)
}
