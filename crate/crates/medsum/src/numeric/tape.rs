//! Reverse-mode automatic differentiation on a Wengert tape.
//!
//! Forward operations append nodes to the tape; `backward` replays the tape
//! in reverse, accumulating gradients by the chain rule. Node ids are plain
//! indices, so the tape is topologically sorted by construction and the
//! backward pass visits each node exactly once.
//!
//! Parameters are registered by name; `backward` returns a name → gradient
//! map so the same machinery drives the optimizer and finite-difference
//! checks for every loss term.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numeric::array::{softmax, Array};

/// Probabilities are clamped here before `log`, so hard-zero copy
/// probabilities cannot produce `-inf`.
pub const LOG_CLAMP: f64 = 1e-12;

/// Handle to a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    /// Named leaf that receives a gradient.
    Param(String),
    /// Constant leaf; no gradient.
    Const,
    /// y = W x for rank-2 W and rank-1 x.
    MatVec,
    /// Row `i` of a rank-2 input (embedding lookup).
    Row(usize),
    Add,
    Sub,
    Mul,
    Sigmoid,
    Tanh,
    Softmax,
    /// Concatenation of two vectors.
    Concat,
    Slice { start: usize, len: usize },
    Dot,
    SumAll,
    /// Element-wise minimum; gradient follows the smaller operand (ties → first).
    MinElem,
    Abs,
    /// ln(max(x, LOG_CLAMP)) element-wise.
    LogClamp,
    /// Single element as a shape-[1] node.
    Pick(usize),
    /// Scalars stacked into a vector.
    Stack,
    /// Vector times shape-[1] scalar node.
    MulScalar,
    /// Vector times a compile-time constant.
    ScaleConst(f64),
    /// inputs = [weights, v_0, ..., v_{k-1}]; y = Σ w_i v_i.
    WeightedSum,
    /// Zero-pad a vector on the right to a fixed length.
    PadZeros(usize),
    /// out[targets[i]] += in[i] into a zeroed vector of length `len`.
    ScatterAdd { targets: Vec<usize>, len: usize },
    /// inputs = [vector, scalar]; out = vector with scalar added at `idx`.
    AddAtIndex(usize),
}

#[derive(Debug)]
struct Node {
    op: Op,
    inputs: Vec<NodeId>,
    value: Array,
    grad: Option<Vec<f64>>,
}

/// The Wengert tape. One tape per forward/backward pass; single-threaded.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Value of a node.
    pub fn value(&self, id: NodeId) -> &Array {
        &self.nodes[id.0].value
    }

    /// Value of a shape-[1] node as a plain f64.
    pub fn scalar_value(&self, id: NodeId) -> f64 {
        self.nodes[id.0].value.data()[0]
    }

    fn push(&mut self, op: Op, inputs: Vec<NodeId>, value: Array) -> NodeId {
        self.nodes.push(Node {
            op,
            inputs,
            value,
            grad: None,
        });
        NodeId(self.nodes.len() - 1)
    }

    // ----- leaves -----

    pub fn param(&mut self, name: &str, value: Array) -> NodeId {
        self.push(Op::Param(name.to_string()), vec![], value)
    }

    pub fn constant(&mut self, value: Array) -> NodeId {
        self.push(Op::Const, vec![], value)
    }

    pub fn constant_scalar(&mut self, x: f64) -> NodeId {
        self.constant(Array::scalar(x))
    }

    // ----- forward ops -----

    /// y = W x.
    pub fn matvec(&mut self, w: NodeId, x: NodeId) -> Result<NodeId> {
        let (wv, xv) = (self.value(w), self.value(x));
        if wv.shape().len() != 2 || xv.shape().len() != 1 || wv.cols() != xv.len() {
            return Err(Error::Dimension(format!(
                "matvec: W shape {:?} incompatible with x shape {:?}",
                wv.shape(),
                xv.shape()
            )));
        }
        let (m, n) = (wv.rows(), wv.cols());
        let mut out = vec![0.0; m];
        let wd = wv.data();
        let xd = xv.data();
        for i in 0..m {
            let row = &wd[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for j in 0..n {
                acc += row[j] * xd[j];
            }
            out[i] = acc;
        }
        Ok(self.push(Op::MatVec, vec![w, x], Array::vector(out)))
    }

    /// W x + b, the basic affine map.
    pub fn affine(&mut self, w: NodeId, x: NodeId, b: NodeId) -> Result<NodeId> {
        let y = self.matvec(w, x)?;
        self.add(y, b)
    }

    /// Row `i` of a rank-2 node (embedding lookup).
    pub fn row(&mut self, m: NodeId, i: usize) -> Result<NodeId> {
        let mv = self.value(m);
        if mv.shape().len() != 2 || i >= mv.rows() {
            return Err(Error::Dimension(format!(
                "row {} of array with shape {:?}",
                i,
                mv.shape()
            )));
        }
        let out = Array::vector(mv.row(i).to_vec());
        Ok(self.push(Op::Row(i), vec![m], out))
    }

    fn binary_same_shape(&self, op: &str, a: NodeId, b: NodeId) -> Result<()> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(Error::Dimension(format!(
                "{}: shape {:?} vs {:?}",
                op,
                av.shape(),
                bv.shape()
            )));
        }
        Ok(())
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary_same_shape("add", a, b)?;
        let out: Vec<f64> = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x + y)
            .collect();
        let shape = self.value(a).shape().to_vec();
        Ok(self.push(Op::Add, vec![a, b], Array::new(shape, out)?))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary_same_shape("sub", a, b)?;
        let out: Vec<f64> = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x - y)
            .collect();
        let shape = self.value(a).shape().to_vec();
        Ok(self.push(Op::Sub, vec![a, b], Array::new(shape, out)?))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary_same_shape("mul", a, b)?;
        let out: Vec<f64> = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x * y)
            .collect();
        let shape = self.value(a).shape().to_vec();
        Ok(self.push(Op::Mul, vec![a, b], Array::new(shape, out)?))
    }

    fn unary(&mut self, op: Op, a: NodeId, f: impl Fn(f64) -> f64) -> NodeId {
        let out: Vec<f64> = self.value(a).data().iter().map(|&x| f(x)).collect();
        let shape = self.value(a).shape().to_vec();
        self.push(op, vec![a], Array::new(shape, out).expect("shape preserved"))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.unary(Op::Sigmoid, a, |x| 1.0 / (1.0 + (-x).exp()))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.unary(Op::Tanh, a, f64::tanh)
    }

    pub fn abs(&mut self, a: NodeId) -> NodeId {
        self.unary(Op::Abs, a, f64::abs)
    }

    pub fn log_clamped(&mut self, a: NodeId) -> NodeId {
        self.unary(Op::LogClamp, a, |x| x.max(LOG_CLAMP).ln())
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        self.unary(Op::ScaleConst(c), a, |x| c * x)
    }

    pub fn softmax(&mut self, a: NodeId) -> Result<NodeId> {
        let p = softmax(self.value(a).data())?;
        Ok(self.push(Op::Softmax, vec![a], Array::vector(p)))
    }

    pub fn concat(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let mut out = self.value(a).data().to_vec();
        out.extend_from_slice(self.value(b).data());
        self.push(Op::Concat, vec![a, b], Array::vector(out))
    }

    pub fn slice(&mut self, a: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let av = self.value(a);
        if start + len > av.len() {
            return Err(Error::Dimension(format!(
                "slice {}..{} of vector with {} elements",
                start,
                start + len,
                av.len()
            )));
        }
        let out = Array::vector(av.data()[start..start + len].to_vec());
        Ok(self.push(Op::Slice { start, len }, vec![a], out))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary_same_shape("dot", a, b)?;
        let s: f64 = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x * y)
            .sum();
        Ok(self.push(Op::Dot, vec![a, b], Array::scalar(s)))
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let s: f64 = self.value(a).data().iter().sum();
        self.push(Op::SumAll, vec![a], Array::scalar(s))
    }

    pub fn min_elem(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary_same_shape("min_elem", a, b)?;
        let out: Vec<f64> = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x.min(*y))
            .collect();
        let shape = self.value(a).shape().to_vec();
        Ok(self.push(Op::MinElem, vec![a, b], Array::new(shape, out)?))
    }

    pub fn pick(&mut self, a: NodeId, idx: usize) -> Result<NodeId> {
        let av = self.value(a);
        if idx >= av.len() {
            return Err(Error::Contract(format!(
                "pick index {} out of range for vector of length {}",
                idx,
                av.len()
            )));
        }
        let x = av.data()[idx];
        Ok(self.push(Op::Pick(idx), vec![a], Array::scalar(x)))
    }

    /// Stack shape-[1] nodes into a vector.
    pub fn stack(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        let mut out = Vec::with_capacity(parts.len());
        for &p in parts {
            let v = self.value(p);
            if !v.is_scalar() {
                return Err(Error::Dimension(format!(
                    "stack expects shape-[1] nodes, got {:?}",
                    v.shape()
                )));
            }
            out.push(v.data()[0]);
        }
        Ok(self.push(Op::Stack, parts.to_vec(), Array::vector(out)))
    }

    /// Vector `a` scaled by shape-[1] node `s`.
    pub fn mul_scalar(&mut self, a: NodeId, s: NodeId) -> Result<NodeId> {
        if !self.value(s).is_scalar() {
            return Err(Error::Dimension(format!(
                "mul_scalar: scalar operand has shape {:?}",
                self.value(s).shape()
            )));
        }
        let sv = self.scalar_value(s);
        let out: Vec<f64> = self.value(a).data().iter().map(|&x| x * sv).collect();
        let shape = self.value(a).shape().to_vec();
        Ok(self.push(Op::MulScalar, vec![a, s], Array::new(shape, out)?))
    }

    /// Σ w_i v_i over equal-length vectors, weights given as a vector node.
    pub fn weighted_sum(&mut self, weights: NodeId, vecs: &[NodeId]) -> Result<NodeId> {
        let k = self.value(weights).len();
        if k != vecs.len() || k == 0 {
            return Err(Error::Dimension(format!(
                "weighted_sum: {} weights vs {} vectors",
                k,
                vecs.len()
            )));
        }
        let dim = self.value(vecs[0]).len();
        let mut out = vec![0.0; dim];
        for (i, &v) in vecs.iter().enumerate() {
            let vv = self.value(v);
            if vv.len() != dim {
                return Err(Error::Dimension(format!(
                    "weighted_sum: vector {} has length {}, expected {}",
                    i,
                    vv.len(),
                    dim
                )));
            }
            let w = self.value(weights).data()[i];
            for (o, x) in out.iter_mut().zip(vv.data()) {
                *o += w * x;
            }
        }
        let mut inputs = vec![weights];
        inputs.extend_from_slice(vecs);
        Ok(self.push(Op::WeightedSum, inputs, Array::vector(out)))
    }

    pub fn pad_zeros(&mut self, a: NodeId, len: usize) -> Result<NodeId> {
        let av = self.value(a);
        if av.len() > len {
            return Err(Error::Dimension(format!(
                "pad_zeros: input length {} exceeds target {}",
                av.len(),
                len
            )));
        }
        let mut out = av.data().to_vec();
        out.resize(len, 0.0);
        Ok(self.push(Op::PadZeros(len), vec![a], Array::vector(out)))
    }

    /// Scatter-add `a` into a zeroed vector of length `len`: out[targets[i]] += a[i].
    pub fn scatter_add(&mut self, a: NodeId, targets: &[usize], len: usize) -> Result<NodeId> {
        let av = self.value(a);
        if av.len() != targets.len() {
            return Err(Error::Dimension(format!(
                "scatter_add: {} values vs {} targets",
                av.len(),
                targets.len()
            )));
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= len) {
            return Err(Error::Contract(format!(
                "scatter_add: target id {bad} outside extended range {len}"
            )));
        }
        let mut out = vec![0.0; len];
        for (&t, &x) in targets.iter().zip(av.data()) {
            out[t] += x;
        }
        Ok(self.push(
            Op::ScatterAdd {
                targets: targets.to_vec(),
                len,
            },
            vec![a],
            Array::vector(out),
        ))
    }

    /// Copy of vector `a` with shape-[1] node `s` added at `idx`.
    pub fn add_at_index(&mut self, a: NodeId, s: NodeId, idx: usize) -> Result<NodeId> {
        let av = self.value(a);
        if idx >= av.len() {
            return Err(Error::Contract(format!(
                "add_at_index: index {} out of range for length {}",
                idx,
                av.len()
            )));
        }
        let mut out = av.data().to_vec();
        out[idx] += self.scalar_value(s);
        Ok(self.push(Op::AddAtIndex(idx), vec![a, s], Array::vector(out)))
    }

    // ----- backward -----

    /// Reverse pass from a scalar loss; returns gradients for every named
    /// parameter registered on this tape (zeros when unreachable).
    pub fn backward(&mut self, loss: NodeId) -> Result<BTreeMap<String, Array>> {
        if !self.value(loss).is_scalar() {
            return Err(Error::Contract(format!(
                "backward requires a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        for node in &mut self.nodes {
            node.grad = None;
        }
        self.nodes[loss.0].grad = Some(vec![1.0]);

        for i in (0..self.nodes.len()).rev() {
            let Some(grad) = self.nodes[i].grad.take() else {
                continue;
            };
            self.propagate(i, &grad);
            self.nodes[i].grad = Some(grad);
        }

        let mut out = BTreeMap::new();
        for node in &self.nodes {
            if let Op::Param(name) = &node.op {
                let g = match &node.grad {
                    Some(g) => g.clone(),
                    None => vec![0.0; node.value.len()],
                };
                out.insert(
                    name.clone(),
                    Array::new(node.value.shape().to_vec(), g).expect("grad shape matches value"),
                );
            }
        }
        Ok(out)
    }

    fn accumulate(&mut self, target: NodeId, contrib: &[f64]) {
        let node = &mut self.nodes[target.0];
        match &mut node.grad {
            Some(g) => {
                for (gi, ci) in g.iter_mut().zip(contrib) {
                    *gi += ci;
                }
            }
            None => node.grad = Some(contrib.to_vec()),
        }
    }

    fn propagate(&mut self, i: usize, grad: &[f64]) {
        let op = self.nodes[i].op.clone();
        let inputs = self.nodes[i].inputs.clone();
        match op {
            Op::Param(_) | Op::Const => {}
            Op::MatVec => {
                let (w, x) = (inputs[0], inputs[1]);
                let (m, n) = {
                    let wv = self.value(w);
                    (wv.rows(), wv.cols())
                };
                let xd = self.value(x).data().to_vec();
                let wd = self.value(w).data().to_vec();
                let mut dw = vec![0.0; m * n];
                let mut dx = vec![0.0; n];
                for r in 0..m {
                    let g = grad[r];
                    if g == 0.0 {
                        continue;
                    }
                    for c in 0..n {
                        dw[r * n + c] += g * xd[c];
                        dx[c] += g * wd[r * n + c];
                    }
                }
                self.accumulate(w, &dw);
                self.accumulate(x, &dx);
            }
            Op::Row(r) => {
                let m = inputs[0];
                let (rows, cols) = {
                    let mv = self.value(m);
                    (mv.rows(), mv.cols())
                };
                let mut dm = vec![0.0; rows * cols];
                dm[r * cols..(r + 1) * cols].copy_from_slice(grad);
                self.accumulate(m, &dm);
            }
            Op::Add => {
                self.accumulate(inputs[0], grad);
                self.accumulate(inputs[1], grad);
            }
            Op::Sub => {
                self.accumulate(inputs[0], grad);
                let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
                self.accumulate(inputs[1], &neg);
            }
            Op::Mul => {
                let av = self.value(inputs[0]).data().to_vec();
                let bv = self.value(inputs[1]).data().to_vec();
                let da: Vec<f64> = grad.iter().zip(&bv).map(|(g, b)| g * b).collect();
                let db: Vec<f64> = grad.iter().zip(&av).map(|(g, a)| g * a).collect();
                self.accumulate(inputs[0], &da);
                self.accumulate(inputs[1], &db);
            }
            Op::Sigmoid => {
                let s = self.nodes[i].value.data().to_vec();
                let d: Vec<f64> = grad
                    .iter()
                    .zip(&s)
                    .map(|(g, y)| g * y * (1.0 - y))
                    .collect();
                self.accumulate(inputs[0], &d);
            }
            Op::Tanh => {
                let t = self.nodes[i].value.data().to_vec();
                let d: Vec<f64> = grad.iter().zip(&t).map(|(g, y)| g * (1.0 - y * y)).collect();
                self.accumulate(inputs[0], &d);
            }
            Op::Softmax => {
                let p = self.nodes[i].value.data().to_vec();
                let inner: f64 = grad.iter().zip(&p).map(|(g, pi)| g * pi).sum();
                let d: Vec<f64> = grad
                    .iter()
                    .zip(&p)
                    .map(|(g, pi)| pi * (g - inner))
                    .collect();
                self.accumulate(inputs[0], &d);
            }
            Op::Concat => {
                let la = self.value(inputs[0]).len();
                self.accumulate(inputs[0], &grad[..la]);
                self.accumulate(inputs[1], &grad[la..]);
            }
            Op::Slice { start, len } => {
                let total = self.value(inputs[0]).len();
                let mut d = vec![0.0; total];
                d[start..start + len].copy_from_slice(grad);
                self.accumulate(inputs[0], &d);
            }
            Op::Dot => {
                let g = grad[0];
                let av = self.value(inputs[0]).data().to_vec();
                let bv = self.value(inputs[1]).data().to_vec();
                let da: Vec<f64> = bv.iter().map(|b| g * b).collect();
                let db: Vec<f64> = av.iter().map(|a| g * a).collect();
                self.accumulate(inputs[0], &da);
                self.accumulate(inputs[1], &db);
            }
            Op::SumAll => {
                let g = grad[0];
                let n = self.value(inputs[0]).len();
                self.accumulate(inputs[0], &vec![g; n]);
            }
            Op::MinElem => {
                let av = self.value(inputs[0]).data().to_vec();
                let bv = self.value(inputs[1]).data().to_vec();
                let mut da = vec![0.0; av.len()];
                let mut db = vec![0.0; bv.len()];
                for (k, g) in grad.iter().enumerate() {
                    if av[k] <= bv[k] {
                        da[k] += g;
                    } else {
                        db[k] += g;
                    }
                }
                self.accumulate(inputs[0], &da);
                self.accumulate(inputs[1], &db);
            }
            Op::Abs => {
                let av = self.value(inputs[0]).data().to_vec();
                let d: Vec<f64> = grad
                    .iter()
                    .zip(&av)
                    .map(|(g, a)| {
                        if *a > 0.0 {
                            *g
                        } else if *a < 0.0 {
                            -*g
                        } else {
                            0.0
                        }
                    })
                    .collect();
                self.accumulate(inputs[0], &d);
            }
            Op::LogClamp => {
                let av = self.value(inputs[0]).data().to_vec();
                let d: Vec<f64> = grad
                    .iter()
                    .zip(&av)
                    .map(|(g, a)| if *a >= LOG_CLAMP { g / a } else { 0.0 })
                    .collect();
                self.accumulate(inputs[0], &d);
            }
            Op::Pick(idx) => {
                let n = self.value(inputs[0]).len();
                let mut d = vec![0.0; n];
                d[idx] = grad[0];
                self.accumulate(inputs[0], &d);
            }
            Op::Stack => {
                for (k, &p) in inputs.iter().enumerate() {
                    self.accumulate(p, &[grad[k]]);
                }
            }
            Op::MulScalar => {
                let s = self.scalar_value(inputs[1]);
                let av = self.value(inputs[0]).data().to_vec();
                let da: Vec<f64> = grad.iter().map(|g| g * s).collect();
                let ds: f64 = grad.iter().zip(&av).map(|(g, a)| g * a).sum();
                self.accumulate(inputs[0], &da);
                self.accumulate(inputs[1], &[ds]);
            }
            Op::ScaleConst(c) => {
                let d: Vec<f64> = grad.iter().map(|g| g * c).collect();
                self.accumulate(inputs[0], &d);
            }
            Op::WeightedSum => {
                let weights = inputs[0];
                let wv = self.value(weights).data().to_vec();
                let mut dw = vec![0.0; wv.len()];
                for (k, &v) in inputs[1..].iter().enumerate() {
                    let vv = self.value(v).data().to_vec();
                    dw[k] = grad.iter().zip(&vv).map(|(g, x)| g * x).sum();
                    let dv: Vec<f64> = grad.iter().map(|g| g * wv[k]).collect();
                    self.accumulate(v, &dv);
                }
                self.accumulate(weights, &dw);
            }
            Op::PadZeros(_) => {
                let n = self.value(inputs[0]).len();
                self.accumulate(inputs[0], &grad[..n]);
            }
            Op::ScatterAdd { targets, .. } => {
                let d: Vec<f64> = targets.iter().map(|&t| grad[t]).collect();
                self.accumulate(inputs[0], &d);
            }
            Op::AddAtIndex(idx) => {
                self.accumulate(inputs[0], grad);
                self.accumulate(inputs[1], &[grad[idx]]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_known_values() {
        let mut t = Tape::new();
        let w = t.param("w", Array::matrix(2, 2, vec![2.0, 3.0, 4.0, 5.0]).unwrap());
        let x = t.constant(Array::vector(vec![1.0, 0.0]));
        let b = t.param("b", Array::vector(vec![1.0, 1.0]));
        let y = t.affine(w, x, b).unwrap();
        assert_eq!(t.value(y).data(), &[3.0, 5.0]);
    }

    #[test]
    fn affine_zero_input_returns_bias() {
        let mut t = Tape::new();
        let w = t.constant(Array::matrix(2, 3, vec![1.0; 6]).unwrap());
        let x = t.constant(Array::vector(vec![0.0; 3]));
        let b = t.constant(Array::vector(vec![-2.0, 7.0]));
        let y = t.affine(w, x, b).unwrap();
        assert_eq!(t.value(y).data(), &[-2.0, 7.0]);
    }

    #[test]
    fn affine_identity_case() {
        let mut t = Tape::new();
        let w = t.constant(Array::matrix(1, 1, vec![1.0]).unwrap());
        let x = t.constant(Array::vector(vec![1.0]));
        let b = t.constant(Array::vector(vec![0.0]));
        let y = t.affine(w, x, b).unwrap();
        assert_eq!(t.value(y).data(), &[1.0]);
    }

    #[test]
    fn affine_shape_mismatch_names_both_shapes() {
        let mut t = Tape::new();
        let w = t.constant(Array::matrix(2, 3, vec![0.0; 6]).unwrap());
        let x = t.constant(Array::vector(vec![0.0; 2]));
        let b = t.constant(Array::vector(vec![0.0; 2]));
        let msg = t.affine(w, x, b).unwrap_err().to_string();
        assert!(msg.contains("[2, 3]") && msg.contains("[2]"), "{msg}");
    }

    #[test]
    fn backward_of_sum_is_ones() {
        let mut t = Tape::new();
        let x = t.param("x", Array::vector(vec![3.0, -1.0, 4.0]));
        let loss = t.sum(x);
        let grads = t.backward(loss).unwrap();
        assert_eq!(grads["x"].data(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn backward_of_dot_swaps_operands() {
        let mut t = Tape::new();
        let x = t.param("x", Array::vector(vec![1.0, 2.0]));
        let y = t.param("y", Array::vector(vec![5.0, -3.0]));
        let loss = t.dot(x, y).unwrap();
        let grads = t.backward(loss).unwrap();
        assert_eq!(grads["x"].data(), &[5.0, -3.0]);
        assert_eq!(grads["y"].data(), &[1.0, 2.0]);
    }

    #[test]
    fn backward_rejects_non_scalar_loss() {
        let mut t = Tape::new();
        let x = t.param("x", Array::vector(vec![1.0, 2.0]));
        let y = t.scale(x, 2.0);
        assert!(matches!(t.backward(y), Err(Error::Contract(_))));
    }

    #[test]
    fn unreachable_param_gets_zero_gradient() {
        let mut t = Tape::new();
        let x = t.param("x", Array::vector(vec![1.0]));
        let _unused = t.param("unused", Array::vector(vec![1.0, 1.0]));
        let loss = t.sum(x);
        let grads = t.backward(loss).unwrap();
        assert_eq!(grads["unused"].data(), &[0.0, 0.0]);
    }

    #[test]
    fn scatter_add_out_of_range_is_contract_error() {
        let mut t = Tape::new();
        let a = t.constant(Array::vector(vec![1.0, 2.0]));
        assert!(matches!(
            t.scatter_add(a, &[0, 5], 3),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn log_clamp_handles_zero() {
        let mut t = Tape::new();
        let a = t.constant(Array::vector(vec![0.0]));
        let y = t.log_clamped(a);
        assert!((t.value(y).data()[0] - LOG_CLAMP.ln()).abs() < 1e-12);
    }
}
