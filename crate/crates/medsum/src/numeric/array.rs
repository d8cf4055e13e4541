//! Dense row-major `f64` arrays.
//!
//! Only the rank-1 and rank-2 cases the models need; no broadcasting.

use rand::Rng;

use crate::error::{Error, Result};

/// A dense array: explicit shape plus row-major values.
#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Array {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expect: usize = shape.iter().product();
        if expect != data.len() {
            return Err(Error::Dimension(format!(
                "shape {:?} implies {} values, got {}",
                shape,
                expect,
                data.len()
            )));
        }
        Ok(Array { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n: usize = shape.iter().product();
        Array {
            shape,
            data: vec![0.0; n],
        }
    }

    /// A single value wrapped as a shape-`[1]` array.
    pub fn scalar(x: f64) -> Self {
        Array {
            shape: vec![1],
            data: vec![x],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Array {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Array::new(vec![rows, cols], data)
    }

    /// Seeded uniform init on `(lo, hi)`; consumes `rows*cols` draws in row-major order.
    pub fn uniform<R: Rng>(shape: Vec<usize>, lo: f64, hi: f64, rng: &mut R) -> Self {
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        Array { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// True iff the array is shape `[1]`.
    pub fn is_scalar(&self) -> bool {
        self.shape == [1]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Number of rows for a rank-2 array.
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Number of columns for a rank-2 array.
    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    /// Row `i` of a rank-2 array as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }
}

/// Numerically stable softmax (max subtraction). Errors on empty input.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::Dimension("softmax of empty input".to_string()));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn new_rejects_mismatched_shape() {
        let err = Array::new(vec![2, 2], vec![1.0, 2.0, 3.0]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[2, 2]") && msg.contains("got 3"), "{msg}");
    }

    #[test]
    fn softmax_symmetric() {
        let p = softmax(&[0.0, 0.0]).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_known_values() {
        // direct exponential computation: e^1, e^2, e^3 normalized
        let p = softmax(&[1.0, 2.0, 3.0]).unwrap();
        let expect = [0.0900, 0.2447, 0.6652];
        for (got, want) in p.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 5e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn softmax_shift_stable() {
        let c = 710.0; // e^710 overflows without max subtraction
        let p = softmax(&[c, c + 1000.0]).unwrap();
        assert!(p[0] < 1e-300 && (p[1] - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn softmax_empty_errors() {
        assert!(matches!(softmax(&[]), Err(Error::Dimension(_))));
    }

    #[test]
    fn uniform_is_seeded() {
        let a = Array::uniform(vec![3, 4], -0.1, 0.1, &mut ChaCha8Rng::seed_from_u64(7));
        let b = Array::uniform(vec![3, 4], -0.1, 0.1, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
        assert!(a.data().iter().all(|v| (-0.1..0.1).contains(v)));
    }
}
