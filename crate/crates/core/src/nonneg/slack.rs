use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::RMat;

use super::{NonnegMatrix, CLIP_TOL};

/// Slack matrix of the regular `t`-gon, `S_ij = b_i - a_i . v_j` with vertices
/// `v_j = (cos 2 pi j/t, sin 2 pi j/t)`, facet normals
/// `a_i = (cos (2i+1) pi/t, sin (2i+1) pi/t)` and offsets `b_i = cos pi/t`.
///
/// This is `cos(pi/t) - cos((2i+1-2j) pi/t)`; entries within `1e-12` of zero
/// (the two vertices on each facet) are set to exactly zero.
pub fn slack_matrix_tgon(t: usize) -> Result<NonnegMatrix> {
    if t < 3 {
        return Err(Error::Usage(format!("a polygon needs at least 3 vertices, got {t}")));
    }
    let tf = t as f64;
    let m = RMat::from_fn(t, t, |i, j| {
        let angle = (2.0 * i as f64 + 1.0 - 2.0 * j as f64) * PI / tf;
        let s = (PI / tf).cos() - angle.cos();
        if s.abs() <= CLIP_TOL {
            0.0
        } else {
            s
        }
    });
    NonnegMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::numerical_rank_real;

    #[test]
    fn triangle() {
        let s = slack_matrix_tgon(3).unwrap();
        for i in 0..3 {
            let row: Vec<f64> = (0..3).map(|j| s.get(i, j)).collect();
            assert_eq!(row.iter().filter(|&&x| x == 0.0).count(), 2);
            assert!(row.iter().all(|&x| x == 0.0 || (x - 1.5).abs() < 1e-14));
        }
    }

    #[test]
    fn two_zeros_per_row_and_rank_three() {
        for t in 3..=30 {
            let s = slack_matrix_tgon(t).unwrap();
            for i in 0..t {
                assert_eq!((0..t).filter(|&j| s.get(i, j) == 0.0).count(), 2, "t = {t}, row {i}");
            }
            assert_eq!(numerical_rank_real(s.data(), 1e-10), 3, "t = {t}");
        }
    }

    #[test]
    fn rejects_small_t() {
        assert!(slack_matrix_tgon(2).is_err());
    }
}
