//! Reverse-mode differentiation over a linear operation tape.
//!
//! Every primitive appends one node holding its forward value. `backward`
//! walks the tape in reverse and accumulates vector-Jacobian products into
//! every node that transitively depends on a parameter.

use super::tensor::{gemm, Tensor};
use super::NumericsError;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    BatchMatMul { a: Var, b: Var, transpose_b: bool },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddBias(Var, Var),
    Scale(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Elu(Var),
    Softmax { x: Var, axis: usize },
    LayerNorm { x: Var, gain: Var, bias: Var, xhat: Vec<f64>, rstd: Vec<f64> },
    Concat { parts: Vec<Var>, axis: usize },
    Slice { x: Var, axis: usize, start: usize },
    GatherRows { x: Var, rows: Vec<usize> },
    Reshape(Var),
    Sum(Var),
    Mean(Var),
    Pinball { pred: Var, target: Vec<f64>, quantiles: Vec<f64> },
}

#[derive(Debug, Clone)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Ordered record of primitive operations. Inputs always precede outputs.
#[derive(Debug, Default, Clone)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients produced by one backward sweep, indexed by [`Var`].
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    pub fn take(&mut self, v: Var) -> Option<Vec<f64>> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }
}

/// Split a shape into (outer, axis length, inner) around `axis`.
fn split_axis(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

fn shape_err(op: &'static str, lhs: &[usize], rhs: &[usize]) -> NumericsError {
    NumericsError::Shape { op, lhs: lhs.to_vec(), rhs: rhs.to_vec() }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Leaf that receives a gradient.
    pub fn parameter(&mut self, value: Tensor) -> Var {
        self.push_raw(value, Op::Leaf, true)
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push_raw(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn push_raw(&mut self, value: Tensor, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node { value, op, needs_grad });
        Var(self.nodes.len() - 1)
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        self.push_raw(value, op, needs_grad)
    }

    fn data(&self, v: Var) -> &[f64] {
        self.nodes[v.0].value.data()
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(shape_err("matmul", sa, sb));
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, self.data(a), (k, 1), self.data(b), (n, 1), &mut out, 0.0);
        let value = Tensor::new(&[m, n], out)?;
        Ok(self.push(value, Op::MatMul(a, b), &[a, b]))
    }

    /// Batched product of `[B, m, k]` with `[B, k, n]`, or with `[B, n, k]`
    /// read transposed when `transpose_b` is set.
    pub fn batch_matmul(&mut self, a: Var, b: Var, transpose_b: bool) -> Result<Var, NumericsError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        let ok = sa.len() == 3
            && sb.len() == 3
            && sa[0] == sb[0]
            && if transpose_b { sa[2] == sb[2] } else { sa[2] == sb[1] };
        if !ok {
            return Err(shape_err("batch_matmul", sa, sb));
        }
        let (batch, m, k) = (sa[0], sa[1], sa[2]);
        let n = if transpose_b { sb[1] } else { sb[2] };
        let b_strides = if transpose_b { (1, k) } else { (n, 1) };
        let mut out = vec![0.0; batch * m * n];
        {
            let (da, db) = (self.data(a), self.data(b));
            for i in 0..batch {
                gemm(
                    m,
                    k,
                    n,
                    &da[i * m * k..(i + 1) * m * k],
                    (k, 1),
                    &db[i * k * n..(i + 1) * k * n],
                    b_strides,
                    &mut out[i * m * n..(i + 1) * m * n],
                    0.0,
                );
            }
        }
        let value = Tensor::new(&[batch, m, n], out)?;
        Ok(self.push(value, Op::BatchMatMul { a, b, transpose_b }, &[a, b]))
    }

    fn zip(&mut self, a: Var, b: Var, name: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor, NumericsError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(shape_err(name, sa, sb));
        }
        let data = self.data(a).iter().zip(self.data(b)).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(sa, data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        let value = self.zip(a, b, "add", |x, y| x + y)?;
        Ok(self.push(value, Op::Add(a, b), &[a, b]))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        let value = self.zip(a, b, "sub", |x, y| x - y)?;
        Ok(self.push(value, Op::Sub(a, b), &[a, b]))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NumericsError> {
        let value = self.zip(a, b, "mul", |x, y| x * y)?;
        Ok(self.push(value, Op::Mul(a, b), &[a, b]))
    }

    /// Adds a vector of length `n` to every length-`n` slice along the last axis.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var, NumericsError> {
        let (sx, sb) = (self.shape(x), self.shape(bias));
        let n = *sx.last().expect("rank >= 1");
        if sb.len() != 1 || sb[0] != n {
            return Err(shape_err("add_bias", sx, sb));
        }
        let bd = self.data(bias);
        let data = self.data(x).iter().enumerate().map(|(i, v)| v + bd[i % n]).collect();
        let value = Tensor::new(sx, data)?;
        Ok(self.push(value, Op::AddBias(x, bias), &[x, bias]))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Result<Var, NumericsError> {
        let value = self.map(x, |v| v * factor)?;
        Ok(self.push(value, Op::Scale(x, factor), &[x]))
    }

    fn map(&self, x: Var, f: impl Fn(f64) -> f64) -> Result<Tensor, NumericsError> {
        Tensor::new(self.shape(x), self.data(x).iter().map(|&v| f(v)).collect())
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var, NumericsError> {
        let value = self.map(x, sigmoid)?;
        Ok(self.push(value, Op::Sigmoid(x), &[x]))
    }

    pub fn tanh(&mut self, x: Var) -> Result<Var, NumericsError> {
        let value = self.map(x, f64::tanh)?;
        Ok(self.push(value, Op::Tanh(x), &[x]))
    }

    /// Exponential linear unit with unit scale.
    pub fn elu(&mut self, x: Var) -> Result<Var, NumericsError> {
        let value = self.map(x, |v| if v > 0.0 { v } else { v.exp_m1() })?;
        Ok(self.push(value, Op::Elu(x), &[x]))
    }

    /// Softmax along `axis`, computed with max subtraction.
    pub fn softmax(&mut self, x: Var, axis: usize) -> Result<Var, NumericsError> {
        let shape = self.shape(x).to_vec();
        if axis >= shape.len() {
            return Err(NumericsError::Invalid(format!("softmax axis {axis} out of range for {shape:?}")));
        }
        let (outer, n, inner) = split_axis(&shape, axis);
        let src = self.data(x);
        let mut out = vec![0.0; src.len()];
        for o in 0..outer {
            for i in 0..inner {
                let at = |j: usize| (o * n + j) * inner + i;
                let max = (0..n).map(|j| src[at(j)]).fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for j in 0..n {
                    let e = (src[at(j)] - max).exp();
                    out[at(j)] = e;
                    total += e;
                }
                for j in 0..n {
                    out[at(j)] /= total;
                }
            }
        }
        let value = Tensor::new(&shape, out)?;
        Ok(self.push(value, Op::Softmax { x, axis }, &[x]))
    }

    /// Normalizes each slice along the last axis, then applies `gain` and `bias`.
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var, epsilon: f64) -> Result<Var, NumericsError> {
        let shape = self.shape(x).to_vec();
        let n = *shape.last().expect("rank >= 1");
        if self.shape(gain) != [n] || self.shape(bias) != [n] {
            return Err(shape_err("layer_norm", &shape, self.shape(gain)));
        }
        let src = self.data(x);
        let (g, b) = (self.data(gain), self.data(bias));
        let rows = src.len() / n;
        let mut out = vec![0.0; src.len()];
        let mut xhat = vec![0.0; src.len()];
        let mut rstd = vec![0.0; rows];
        for r in 0..rows {
            let row = &src[r * n..(r + 1) * n];
            let mean = row.iter().sum::<f64>() / n as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let s = 1.0 / (var + epsilon).sqrt();
            rstd[r] = s;
            for j in 0..n {
                let h = (row[j] - mean) * s;
                xhat[r * n + j] = h;
                out[r * n + j] = g[j] * h + b[j];
            }
        }
        let value = Tensor::new(&shape, out)?;
        Ok(self.push(value, Op::LayerNorm { x, gain, bias, xhat, rstd }, &[x, gain, bias]))
    }

    /// Concatenates along `axis`; all other axes must agree.
    pub fn concat(&mut self, parts: &[Var], axis: usize) -> Result<Var, NumericsError> {
        let first = parts.first().ok_or_else(|| NumericsError::Invalid("concat of nothing".into()))?;
        let base = self.shape(*first).to_vec();
        if axis >= base.len() {
            return Err(NumericsError::Invalid(format!("concat axis {axis} out of range for {base:?}")));
        }
        let mut total = 0;
        for p in parts {
            let s = self.shape(*p);
            let compatible = s.len() == base.len()
                && s.iter().zip(&base).enumerate().all(|(i, (a, b))| i == axis || a == b);
            if !compatible {
                return Err(shape_err("concat", &base, s));
            }
            total += s[axis];
        }
        let (outer, _, inner) = split_axis(&base, axis);
        let mut shape = base.clone();
        shape[axis] = total;
        let mut out = Vec::with_capacity(outer * total * inner);
        for o in 0..outer {
            for p in parts {
                let len = self.shape(*p)[axis] * inner;
                out.extend_from_slice(&self.data(*p)[o * len..(o + 1) * len]);
            }
        }
        let value = Tensor::new(&shape, out)?;
        Ok(self.push(value, Op::Concat { parts: parts.to_vec(), axis }, parts))
    }

    pub fn slice(&mut self, x: Var, axis: usize, start: usize, len: usize) -> Result<Var, NumericsError> {
        let shape = self.shape(x).to_vec();
        if axis >= shape.len() || len == 0 || start + len > shape[axis] {
            return Err(NumericsError::Invalid(format!(
                "slice [{start}, {}) on axis {axis} out of range for {shape:?}",
                start + len
            )));
        }
        let (outer, n, inner) = split_axis(&shape, axis);
        let src = self.data(x);
        let mut out = Vec::with_capacity(outer * len * inner);
        for o in 0..outer {
            let from = (o * n + start) * inner;
            out.extend_from_slice(&src[from..from + len * inner]);
        }
        let mut new_shape = shape;
        new_shape[axis] = len;
        let value = Tensor::new(&new_shape, out)?;
        Ok(self.push(value, Op::Slice { x, axis, start }, &[x]))
    }

    /// Selects (and may repeat or reorder) entries along the first axis.
    pub fn gather_rows(&mut self, x: Var, rows: &[usize]) -> Result<Var, NumericsError> {
        let shape = self.shape(x).to_vec();
        let width: usize = shape[1..].iter().product();
        if rows.is_empty() {
            return Err(NumericsError::Invalid("gather_rows needs at least one row".into()));
        }
        if let Some(bad) = rows.iter().find(|&&r| r >= shape[0]) {
            return Err(NumericsError::Invalid(format!("row {bad} out of range for {shape:?}")));
        }
        let src = self.data(x);
        let mut out = Vec::with_capacity(rows.len() * width);
        for &r in rows {
            out.extend_from_slice(&src[r * width..(r + 1) * width]);
        }
        let mut new_shape = shape;
        new_shape[0] = rows.len();
        let value = Tensor::new(&new_shape, out)?;
        Ok(self.push(value, Op::GatherRows { x, rows: rows.to_vec() }, &[x]))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var, NumericsError> {
        let value = self.value(x).reshaped(shape)?;
        Ok(self.push(value, Op::Reshape(x), &[x]))
    }

    pub fn sum(&mut self, x: Var) -> Result<Var, NumericsError> {
        let value = Tensor::scalar(self.data(x).iter().sum());
        Ok(self.push(value, Op::Sum(x), &[x]))
    }

    pub fn mean(&mut self, x: Var) -> Result<Var, NumericsError> {
        let d = self.data(x);
        let value = Tensor::scalar(d.iter().sum::<f64>() / d.len() as f64);
        Ok(self.push(value, Op::Mean(x), &[x]))
    }

    /// Sum of pinball losses `q(y-p)+ + (1-q)(p-y)+`; the last axis of `pred`
    /// indexes `quantiles`. At `y == p` the subgradient w.r.t. `p` is `1-q`.
    pub fn pinball_sum(&mut self, pred: Var, target: &[f64], quantiles: &[f64]) -> Result<Var, NumericsError> {
        let shape = self.shape(pred).to_vec();
        let nq = *shape.last().expect("rank >= 1");
        if quantiles.len() != nq || target.len() != self.value(pred).len() {
            return Err(shape_err("pinball_sum", &shape, &[target.len(), quantiles.len()]));
        }
        let total = self
            .data(pred)
            .iter()
            .zip(target)
            .enumerate()
            .map(|(i, (&p, &y))| pinball(y, p, quantiles[i % nq]))
            .sum();
        let op = Op::Pinball { pred, target: target.to_vec(), quantiles: quantiles.to_vec() };
        Ok(self.push(Tensor::scalar(total), op, &[pred]))
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients, NumericsError> {
        let loss_value = self.value(loss);
        if !loss_value.is_scalar() {
            return Err(NumericsError::NonScalarLoss(loss_value.shape().to_vec()));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);
        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(idx, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, idx: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[idx];
        let out = node.value.data();
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (sa, sb) = (self.shape(*a), self.shape(*b));
                let (m, k, n) = (sa[0], sa[1], sb[1]);
                if self.requires_grad(*a) {
                    // dA = dC · Bᵀ
                    let ga = slot(grads, *a, m * k);
                    gemm(m, n, k, g, (n, 1), self.data(*b), (1, n), ga, 1.0);
                }
                if self.requires_grad(*b) {
                    // dB = Aᵀ · dC
                    let gb = slot(grads, *b, k * n);
                    gemm(k, m, n, self.data(*a), (1, k), g, (n, 1), gb, 1.0);
                }
            }
            Op::BatchMatMul { a, b, transpose_b } => {
                let (sa, sb) = (self.shape(*a), self.shape(*b));
                let (batch, m, k) = (sa[0], sa[1], sa[2]);
                let n = if *transpose_b { sb[1] } else { sb[2] };
                let (da, db) = (self.data(*a), self.data(*b));
                if self.requires_grad(*a) {
                    let ga = slot(grads, *a, batch * m * k);
                    for i in 0..batch {
                        let gi = &g[i * m * n..(i + 1) * m * n];
                        let bi = &db[i * k * n..(i + 1) * k * n];
                        // C = A·B  -> dA = dC·Bᵀ ; C = A·Bᵀ -> dA = dC·B
                        let strides = if *transpose_b { (k, 1) } else { (1, n) };
                        gemm(m, n, k, gi, (n, 1), bi, strides, &mut ga[i * m * k..(i + 1) * m * k], 1.0);
                    }
                }
                if self.requires_grad(*b) {
                    let gb = slot(grads, *b, batch * k * n);
                    for i in 0..batch {
                        let gi = &g[i * m * n..(i + 1) * m * n];
                        let ai = &da[i * m * k..(i + 1) * m * k];
                        let dst = &mut gb[i * k * n..(i + 1) * k * n];
                        if *transpose_b {
                            // dB[n×k] = dCᵀ·A
                            gemm(n, m, k, gi, (1, n), ai, (k, 1), dst, 1.0);
                        } else {
                            // dB[k×n] = Aᵀ·dC
                            gemm(k, m, n, ai, (1, k), gi, (n, 1), dst, 1.0);
                        }
                    }
                }
            }
            Op::Add(a, b) => {
                self.accumulate(grads, *a, |i| g[i]);
                self.accumulate(grads, *b, |i| g[i]);
            }
            Op::Sub(a, b) => {
                self.accumulate(grads, *a, |i| g[i]);
                self.accumulate(grads, *b, |i| -g[i]);
            }
            Op::Mul(a, b) => {
                let (da, db) = (self.data(*a), self.data(*b));
                self.accumulate(grads, *a, |i| g[i] * db[i]);
                self.accumulate(grads, *b, |i| g[i] * da[i]);
            }
            Op::AddBias(x, bias) => {
                self.accumulate(grads, *x, |i| g[i]);
                if self.requires_grad(*bias) {
                    let n = self.shape(*bias)[0];
                    let gb = slot(grads, *bias, n);
                    for (i, v) in g.iter().enumerate() {
                        gb[i % n] += v;
                    }
                }
            }
            Op::Scale(x, f) => self.accumulate(grads, *x, |i| g[i] * f),
            Op::Sigmoid(x) => self.accumulate(grads, *x, |i| g[i] * out[i] * (1.0 - out[i])),
            Op::Tanh(x) => self.accumulate(grads, *x, |i| g[i] * (1.0 - out[i] * out[i])),
            Op::Elu(x) => {
                let dx = self.data(*x);
                self.accumulate(grads, *x, |i| if dx[i] > 0.0 { g[i] } else { g[i] * (out[i] + 1.0) });
            }
            Op::Softmax { x, axis } => {
                if !self.requires_grad(*x) {
                    return;
                }
                let (outer, n, inner) = split_axis(node.value.shape(), *axis);
                let gx = slot(grads, *x, out.len());
                for o in 0..outer {
                    for i in 0..inner {
                        let at = |j: usize| (o * n + j) * inner + i;
                        let dot: f64 = (0..n).map(|j| out[at(j)] * g[at(j)]).sum();
                        for j in 0..n {
                            gx[at(j)] += out[at(j)] * (g[at(j)] - dot);
                        }
                    }
                }
            }
            Op::LayerNorm { x, gain, bias, xhat, rstd } => {
                let n = node.value.last_dim();
                let rows = out.len() / n;
                let gd = self.data(*gain);
                if self.requires_grad(*gain) {
                    let gg = slot(grads, *gain, n);
                    for (i, v) in g.iter().enumerate() {
                        gg[i % n] += v * xhat[i];
                    }
                }
                if self.requires_grad(*bias) {
                    let gb = slot(grads, *bias, n);
                    for (i, v) in g.iter().enumerate() {
                        gb[i % n] += v;
                    }
                }
                if self.requires_grad(*x) {
                    let gx = slot(grads, *x, out.len());
                    for r in 0..rows {
                        let span = r * n..(r + 1) * n;
                        let dh: Vec<f64> = g[span.clone()].iter().zip(gd).map(|(a, b)| a * b).collect();
                        let h = &xhat[span.clone()];
                        let mean_dh = dh.iter().sum::<f64>() / n as f64;
                        let mean_dh_h = dh.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() / n as f64;
                        for j in 0..n {
                            gx[r * n + j] += rstd[r] * (dh[j] - mean_dh - h[j] * mean_dh_h);
                        }
                    }
                }
            }
            Op::Concat { parts, axis } => {
                let (outer, total, inner) = split_axis(node.value.shape(), *axis);
                let mut offset = 0;
                for p in parts {
                    let len = self.shape(*p)[*axis];
                    if self.requires_grad(*p) {
                        let gp = slot(grads, *p, outer * len * inner);
                        for o in 0..outer {
                            let src = &g[(o * total + offset) * inner..(o * total + offset + len) * inner];
                            for (d, s) in gp[o * len * inner..(o + 1) * len * inner].iter_mut().zip(src) {
                                *d += s;
                            }
                        }
                    }
                    offset += len;
                }
            }
            Op::Slice { x, axis, start } => {
                if !self.requires_grad(*x) {
                    return;
                }
                let src_shape = self.shape(*x).to_vec();
                let (outer, n, inner) = split_axis(&src_shape, *axis);
                let len = node.value.shape()[*axis];
                let gx = slot(grads, *x, outer * n * inner);
                for o in 0..outer {
                    let dst = &mut gx[(o * n + start) * inner..(o * n + start + len) * inner];
                    for (d, s) in dst.iter_mut().zip(&g[o * len * inner..(o + 1) * len * inner]) {
                        *d += s;
                    }
                }
            }
            Op::GatherRows { x, rows } => {
                if !self.requires_grad(*x) {
                    return;
                }
                let total = self.value(*x).len();
                let width = total / self.shape(*x)[0];
                let gx = slot(grads, *x, total);
                for (i, &r) in rows.iter().enumerate() {
                    for (d, s) in gx[r * width..(r + 1) * width].iter_mut().zip(&g[i * width..(i + 1) * width]) {
                        *d += s;
                    }
                }
            }
            Op::Reshape(x) => self.accumulate(grads, *x, |i| g[i]),
            Op::Sum(x) => self.accumulate(grads, *x, |_| g[0]),
            Op::Mean(x) => {
                let n = self.value(*x).len() as f64;
                self.accumulate(grads, *x, |_| g[0] / n);
            }
            Op::Pinball { pred, target, quantiles } => {
                let p = self.data(*pred);
                let nq = quantiles.len();
                self.accumulate(grads, *pred, |i| {
                    let q = quantiles[i % nq];
                    g[0] * pinball_derivative(target[i], p[i], q)
                });
            }
        }
    }

    fn accumulate(&self, grads: &mut [Option<Vec<f64>>], x: Var, f: impl Fn(usize) -> f64) {
        if !self.requires_grad(x) {
            return;
        }
        let n = self.value(x).len();
        for (i, d) in slot(grads, x, n).iter_mut().enumerate() {
            *d += f(i);
        }
    }
}

fn slot(grads: &mut [Option<Vec<f64>>], v: Var, len: usize) -> &mut [f64] {
    grads[v.0].get_or_insert_with(|| vec![0.0; len])
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Pinball loss of predicting `pred` for observation `y` at quantile level `q`.
pub fn pinball(y: f64, pred: f64, q: f64) -> f64 {
    q * (y - pred).max(0.0) + (1.0 - q) * (pred - y).max(0.0)
}

/// Derivative of [`pinball`] w.r.t. `pred`; the `1-q` branch is taken at `y == pred`.
pub fn pinball_derivative(y: f64, pred: f64, q: f64) -> f64 {
    if pred < y {
        -q
    } else {
        1.0 - q
    }
}
