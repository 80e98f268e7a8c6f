use nalgebra::{ComplexField, DMatrix, DVector};

/// Pivot magnitude, relative to the largest pivot, below which a matrix is
/// treated as singular.
const PIVOT_TOLERANCE: f64 = 1e-14;

/// Solves `a x = b` by LU with partial pivoting; `None` when `a` is singular.
pub(crate) fn solve<T>(a: DMatrix<T>, b: &DVector<T>) -> Option<DVector<T>>
where
    T: ComplexField<RealField = f64>,
{
    let n = a.nrows();
    if n == 0 {
        return Some(DVector::zeros(0));
    }
    let lu = a.lu();
    let u = lu.u();
    let pivots: Vec<f64> = (0..n).map(|i| u[(i, i)].clone().modulus()).collect();
    let largest = pivots.iter().cloned().fold(0.0, f64::max);
    if !(largest > 0.0) || pivots.iter().any(|p| !p.is_finite() || *p <= PIVOT_TOLERANCE * largest) {
        return None;
    }
    lu.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn real_and_complex() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let x = solve(a, &DVector::from_vec(vec![3.0, 5.0])).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);

        let j = Complex64::new(0.0, 1.0);
        let a = DMatrix::from_row_slice(1, 1, &[j]);
        let x = solve(a, &DVector::from_vec(vec![Complex64::new(1.0, 0.0)])).unwrap();
        assert!((x[0] + j).norm() < 1e-15);
    }

    #[test]
    fn singular_detected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(solve(a, &DVector::from_vec(vec![1.0, 1.0])).is_none());
    }
}
