use super::Matrix;
use crate::error::{Error, Result};

/// Smallest probability fed to `ln` in [`cross_entropy`].
pub const PROB_FLOOR: f64 = 1e-15;

pub fn relu(x: &Matrix) -> Matrix {
    x.map(|v| if v > 0.0 { v } else { 0.0 })
}

pub fn relu_in_place(x: &mut Matrix) {
    for v in x.as_mut_slice() {
        if *v <= 0.0 {
            *v = 0.0;
        }
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    softmax_in_place(&mut out);
    out
}

pub fn softmax_in_place(m: &mut Matrix) {
    let cols = m.cols();
    if cols == 0 {
        return;
    }
    for row in m.as_mut_slice().chunks_exact_mut(cols) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// Mean over rows of `-ln p[label]`.
pub fn cross_entropy(probs: &Matrix, labels: &[usize]) -> Result<f64> {
    if labels.len() != probs.rows() {
        return Err(Error::Shape {
            op: "cross_entropy",
            left: probs.shape(),
            right: (labels.len(), 1),
        });
    }
    if probs.rows() == 0 {
        return Err(Error::invalid("cross_entropy of an empty batch"));
    }
    let mut total = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        if label >= probs.cols() {
            return Err(Error::invalid(format!(
                "label {label} out of range for {} classes",
                probs.cols()
            )));
        }
        let p = probs.get(i, label);
        // NaN must survive the clamp so divergence stays visible
        total -= if p < PROB_FLOOR { PROB_FLOOR } else { p }.ln();
    }
    Ok(total / labels.len() as f64)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn relu_sign_cases() {
        let x = Matrix::from_rows(&[[-1.0, 0.0, 2.0]]).unwrap();
        assert_eq!(relu(&x).as_slice(), &[0.0, 0.0, 2.0]);
        let neg = Matrix::from_rows(&[[-3.0, -0.5], [-1e-300, -7.0]]).unwrap();
        assert!(relu(&neg).as_slice().iter().all(|&v| v == 0.0));
        let pos = Matrix::from_rows(&[[3.0, 0.0], [1e-300, 7.0]]).unwrap();
        assert_eq!(relu(&pos), pos);
    }

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        let p = softmax(&Matrix::zeros(1, 4));
        assert_eq!(p.as_slice(), &[0.25; 4]);
    }

    #[test]
    fn softmax_does_not_overflow() {
        let p = softmax(&Matrix::from_rows(&[[1000.0, 0.0]]).unwrap());
        assert!(p.is_finite());
        assert!((p.get(0, 0) - 1.0).abs() < 1e-15);
        assert!(p.get(0, 1) < 1e-300);
    }

    #[test]
    fn softmax_closed_form() {
        let p = softmax(&Matrix::from_rows(&[[2f64.ln(), 1f64.ln()]]).unwrap());
        assert!((p.get(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.get(0, 1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_cases() {
        let perfect = Matrix::from_rows(&[[1.0, 0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(cross_entropy(&perfect, &[0]).unwrap(), 0.0);

        let uniform = Matrix::from_rows(&[[0.25; 4], [0.25; 4]]).unwrap();
        let l = cross_entropy(&uniform, &[1, 3]).unwrap();
        assert!((l - 1.386294).abs() < 1e-6);
        assert!((l - 4f64.ln()).abs() < 1e-15);

        assert!(matches!(
            cross_entropy(&perfect, &[7]),
            Err(Error::InvalidArgument(_))
        ));
        // clamped, not infinite
        let l = cross_entropy(&perfect, &[1]).unwrap();
        assert!((l - (-PROB_FLOOR.ln())).abs() < 1e-12);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[0.1, 0.6, 0.2, 0.1]), 1);
        assert_eq!(argmax(&[0.25; 4]), 0);
        assert_eq!(argmax(&[0.1, 0.4, 0.4, 0.1]), 1);
    }

    fn logits() -> impl Strategy<Value = Matrix> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-50.0f64..50.0, r * c)
                .prop_map(move |d| Matrix::new(r, c, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn relu_is_idempotent(x in logits()) {
            prop_assert_eq!(relu(&relu(&x)), relu(&x));
        }

        #[test]
        fn softmax_rows_sum_to_one(x in logits()) {
            let p = softmax(&x);
            for row in p.row_iter() {
                let s: f64 = row.iter().sum();
                prop_assert!((s - 1.0).abs() <= 1e-12, "row sum {s}");
            }
        }

        #[test]
        fn softmax_translation_invariant(x in logits(), k in -100.0f64..100.0) {
            let shifted = x.map(|v| v + k);
            let (a, b) = (softmax(&x), softmax(&shifted));
            for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
                prop_assert!((p - q).abs() <= 1e-12, "{p} vs {q}");
            }
        }

        #[test]
        fn softmax_is_monotone(x in logits()) {
            let p = softmax(&x);
            for r in 0..x.rows() {
                for i in 0..x.cols() {
                    for j in 0..x.cols() {
                        if x.get(r, i) > x.get(r, j) {
                            prop_assert!(p.get(r, i) >= p.get(r, j));
                        }
                    }
                }
            }
        }
    }
}
