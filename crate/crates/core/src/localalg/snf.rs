//! Dense Smith normal form over V/π^M, used as an independent length backend.

use crate::coeff::{Coeff, Dvr};
use crate::series::IdealPresentation;

use super::JetSpace;

/// Valuations of the nonzero elementary divisors of a dense matrix.
pub fn elementary_valuations(ring: &Dvr, mut a: Vec<Vec<Coeff>>) -> Vec<u32> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut k = 0;
    while k < rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, &x) in row.iter().enumerate().skip(k) {
                if let Some(v) = ring.valuation(x) {
                    if best.is_none_or(|b| v < b.0) {
                        best = Some((v, i, j));
                    }
                }
            }
            if best.is_some_and(|b| b.0 == 0) {
                break;
            }
        }
        let Some((v, bi, bj)) = best else { break };
        a.swap(k, bi);
        for row in a.iter_mut() {
            row.swap(k, bj);
        }
        let (_, u) = ring.unit_decompose(a[k][k]).unwrap();
        let uinv = ring.inv_unit(u).unwrap();
        for x in a[k].iter_mut() {
            *x = ring.mul(*x, uinv);
        }
        // pivot is now π^v and divides every remaining entry
        let pivot_row = a[k].clone();
        for i in k + 1..rows {
            let x = a[i][k];
            if let Some((vx, ux)) = ring.unit_decompose(x) {
                let s = ring.mul(ux, ring.pi_pow(vx - v));
                for j in k..cols {
                    a[i][j] = ring.sub(a[i][j], ring.mul(s, pivot_row[j]));
                }
            }
        }
        for j in k + 1..cols {
            let x = a[k][j];
            if let Some((vx, ux)) = ring.unit_decompose(x) {
                let s = ring.mul(ux, ring.pi_pow(vx - v));
                for row in a.iter_mut().skip(k) {
                    let t = ring.mul(s, row[k]);
                    row[j] = ring.sub(row[j], t);
                }
            }
        }
        out.push(v);
        k += 1;
    }
    out
}

/// Length of the jet quotient at degree `degree`, computed by dense SNF.
pub fn jet_quotient_length(ideal: &IdealPresentation, degree: u32) -> u64 {
    let ideal = ideal.truncate(degree);
    let ring = *ideal.ring();
    let space = JetSpace::new(ring, ideal.vars(), degree);
    let n = space.dim();
    let rows: Vec<Vec<Coeff>> = space
        .multiples(ideal.generators())
        .into_iter()
        .map(|v| {
            let mut row = vec![ring.zero(); n];
            for (c, a) in v {
                row[c as usize] = a;
            }
            row
        })
        .collect();
    let vals = elementary_valuations(&ring, rows);
    let m = ring.precision() as u64;
    vals.iter().map(|&v| v as u64).sum::<u64>() + m * (n - vals.len()) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_divisors() {
        let r = Dvr::unramified(3, 5).unwrap();
        let a = vec![vec![r.from_int(9), r.from_int(3)], vec![r.from_int(3), r.from_int(0)]];
        let mut v = elementary_valuations(&r, a);
        v.sort();
        assert_eq!(v, vec![1, 1]);
    }
}
