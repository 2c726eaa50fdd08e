//! Trainable read-outs: one-vs-rest RBF kernel ridge classifiers and affine
//! ridge regression.
//!
//! Several classifiers trained on the same inputs (pop and push, shift and
//! output) share one Gram matrix and one Cholesky factor; [`KernelBank`]
//! holds such a group and answers all of its heads with a single kernel
//! evaluation.

use faer::{Accum, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, par, solve_spd, Matrix};

/// `1 / (d · v)` where `v` is the mean over columns of the per-column variance.
pub fn rbf_gamma_scale(x: &Matrix) -> Result<f64> {
    let (n, d) = (x.rows(), x.cols());
    if n == 0 || d == 0 {
        return Err(Error::EmptyData);
    }
    let mut mean = vec![0.0; d];
    for r in x.iter_rows() {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for r in x.iter_rows() {
        var.iter_mut()
            .zip(r.iter().zip(&mean))
            .for_each(|(s, (v, m))| *s += (v - m) * (v - m));
    }
    let v = var.iter().sum::<f64>() / (n * d) as f64;
    if !(v > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(1.0 / (d as f64 * v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Head {
    classes: Vec<usize>,
    /// First column of this head inside the stacked dual matrix.
    offset: usize,
}

/// Kernel ridge classifiers sharing support points, kernel width and
/// regularisation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "StoredBank")]
pub struct KernelBank {
    support: Matrix,
    #[serde(skip)]
    sq_norms: Vec<f64>,
    /// N x (sum of class counts), one-vs-rest columns of all heads.
    dual: Matrix,
    gamma: f64,
    regularization: f64,
    heads: Vec<Head>,
}

#[derive(Deserialize)]
struct StoredBank {
    support: Matrix,
    dual: Matrix,
    gamma: f64,
    regularization: f64,
    heads: Vec<Head>,
}

impl From<StoredBank> for KernelBank {
    fn from(s: StoredBank) -> Self {
        let sq_norms = s.support.iter_rows().map(|r| dot(r, r)).collect();
        Self {
            support: s.support,
            sq_norms,
            dual: s.dual,
            gamma: s.gamma,
            regularization: s.regularization,
            heads: s.heads,
        }
    }
}

impl KernelBank {
    /// Fits one head per label vector. Targets are `+1` for the row's class
    /// and `-1` otherwise; `(K + λI) α = Y` is solved once for all heads.
    pub fn fit(x: &Matrix, labels: &[&[usize]], regularization: f64) -> Result<Self> {
        if x.rows() == 0 || labels.is_empty() {
            return Err(Error::EmptyData);
        }
        if !(regularization > 0.0) {
            return Err(Error::InvalidConfig("regularization must be positive".into()));
        }
        for l in labels {
            if l.len() != x.rows() {
                return Err(Error::DimensionMismatch {
                    expected: x.rows(),
                    actual: l.len(),
                });
            }
        }
        let gamma = rbf_gamma_scale(x)?;
        let n = x.rows();
        let mut heads = Vec::with_capacity(labels.len());
        let mut offset = 0;
        for l in labels {
            let mut classes: Vec<usize> = l.to_vec();
            classes.sort_unstable();
            classes.dedup();
            let width = classes.len();
            heads.push(Head { classes, offset });
            offset += width;
        }
        let mut y = Mat::<f64>::from_fn(n, offset, |_, _| -1.0);
        for (head, l) in heads.iter().zip(labels) {
            for (i, c) in l.iter().enumerate() {
                let k = head.classes.binary_search(c).expect("class registered");
                y[(i, head.offset + k)] = 1.0;
            }
        }
        let sq_norms: Vec<f64> = x.iter_rows().map(|r| dot(r, r)).collect();
        let mut gram = Mat::<f64>::zeros(n, n);
        faer::linalg::matmul::matmul(
            gram.as_mut(),
            Accum::Replace,
            x.as_faer(),
            x.as_faer().transpose(),
            1.0,
            par(),
        );
        for j in 0..n {
            for i in 0..n {
                let d = (sq_norms[i] + sq_norms[j] - 2.0 * gram[(i, j)]).max(0.0);
                gram[(i, j)] = (-gamma * d).exp();
            }
            gram[(j, j)] += regularization;
        }
        let alpha = solve_spd(gram, y)?;
        Ok(Self {
            support: x.clone(),
            sq_norms,
            dual: Matrix::from_faer(alpha.as_ref()),
            gamma,
            regularization,
            heads,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    pub fn support_size(&self) -> usize {
        self.support.rows()
    }

    pub fn dim(&self) -> usize {
        self.support.cols()
    }

    pub fn head_count(&self) -> usize {
        self.heads.len()
    }

    pub fn classes(&self, head: usize) -> &[usize] {
        &self.heads[head].classes
    }

    fn norms(&self) -> std::borrow::Cow<'_, [f64]> {
        if self.sq_norms.len() == self.support.rows() {
            std::borrow::Cow::Borrowed(&self.sq_norms)
        } else {
            std::borrow::Cow::Owned(self.support.iter_rows().map(|r| dot(r, r)).collect())
        }
    }

    /// Restores the cached support norms after deserialisation.
    /// Raw one-vs-rest scores for every query row: `B x (total classes)`.
    pub fn decision_values(&self, queries: &Matrix) -> Result<Matrix> {
        if queries.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: queries.cols(),
            });
        }
        let b = queries.rows();
        let n = self.support.rows();
        let norms = self.norms();
        let mut k = Mat::<f64>::zeros(b, n);
        faer::linalg::matmul::matmul(
            k.as_mut(),
            Accum::Replace,
            queries.as_faer(),
            self.support.as_faer().transpose(),
            1.0,
            par(),
        );
        for i in 0..b {
            let qn = dot(queries.row(i), queries.row(i));
            for j in 0..n {
                let d = (qn + norms[j] - 2.0 * k[(i, j)]).max(0.0);
                k[(i, j)] = (-self.gamma * d).exp();
            }
        }
        let mut out = Mat::<f64>::zeros(b, self.dual.cols());
        faer::linalg::matmul::matmul(
            out.as_mut(),
            Accum::Replace,
            k.as_ref(),
            self.dual.as_faer(),
            1.0,
            par(),
        );
        Ok(Matrix::from_faer(out.as_ref()))
    }

    /// Predicted class of every head for every query: `result[head][row]`.
    pub fn predict_batch(&self, queries: &Matrix) -> Result<Vec<Vec<usize>>> {
        let scores = self.decision_values(queries)?;
        Ok(self
            .heads
            .iter()
            .map(|h| {
                scores
                    .iter_rows()
                    .map(|r| h.classes[argmax(&r[h.offset..h.offset + h.classes.len()])])
                    .collect()
            })
            .collect())
    }

    pub fn predict(&self, query: &[f64]) -> Result<Vec<usize>> {
        let q = Matrix::from_vec(1, query.len(), query.to_vec())?;
        Ok(self.predict_batch(&q)?.into_iter().map(|h| h[0]).collect())
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// A single-head [`KernelBank`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KernelClassifier(KernelBank);

impl KernelClassifier {
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(self.0.predict(x)?[0])
    }

    pub fn predict_batch(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.0.predict_batch(x)?.swap_remove(0))
    }

    pub fn classes(&self) -> &[usize] {
        self.0.classes(0)
    }

    pub fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    pub fn bank(&self) -> &KernelBank {
        &self.0
    }
}

pub fn fit_kernel_classifier(x: &Matrix, y: &[usize], regularization: f64) -> Result<KernelClassifier> {
    KernelBank::fit(x, &[y], regularization).map(KernelClassifier)
}

/// Affine map `y = W x + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearReadout {
    /// L x d.
    weights: Matrix,
    bias: Vec<f64>,
    regularization: f64,
}

impl LinearReadout {
    pub fn new(weights: Matrix, bias: Vec<f64>, regularization: f64) -> Result<Self> {
        if weights.rows() != bias.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.rows(),
                actual: bias.len(),
            });
        }
        Ok(Self {
            weights,
            bias,
            regularization,
        })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    pub fn outputs(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.weights.matvec(x);
        y.iter_mut().zip(&self.bias).for_each(|(v, b)| *v += b);
        y
    }

    pub fn predict_batch(&self, x: &Matrix) -> Matrix {
        let mut y = x.matmul(&self.weights.transpose());
        for i in 0..y.rows() {
            y.row_mut(i).iter_mut().zip(&self.bias).for_each(|(v, b)| *v += b);
        }
        y
    }
}

/// Ridge regression with an unpenalised bias: centre, solve
/// `(XcᵀXc + αI) W = XcᵀYc`, then `b = ȳ - W x̄`.
pub fn fit_linear_ridge(x: &Matrix, y: &Matrix, regularization: f64) -> Result<LinearReadout> {
    let (n, d) = (x.rows(), x.cols());
    if n == 0 {
        return Err(Error::EmptyData);
    }
    if y.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.rows(),
        });
    }
    if !(regularization > 0.0) {
        return Err(Error::InvalidConfig("regularization must be positive".into()));
    }
    let l = y.cols();
    let xm = column_means(x);
    let ym = column_means(y);
    let xc = Mat::<f64>::from_fn(n, d, |i, j| x[(i, j)] - xm[j]);
    let yc = Mat::<f64>::from_fn(n, l, |i, j| y[(i, j)] - ym[j]);
    let mut gram = Mat::<f64>::zeros(d, d);
    faer::linalg::matmul::matmul(gram.as_mut(), Accum::Replace, xc.transpose(), xc.as_ref(), 1.0, par());
    for j in 0..d {
        gram[(j, j)] += regularization;
    }
    let mut rhs = Mat::<f64>::zeros(d, l);
    faer::linalg::matmul::matmul(rhs.as_mut(), Accum::Replace, xc.transpose(), yc.as_ref(), 1.0, par());
    let w = solve_spd(gram, rhs)?;
    let weights = Matrix::from_fn(l, d, |i, j| w[(j, i)]);
    let bias = (0..l)
        .map(|k| ym[k] - (0..d).map(|j| w[(j, k)] * xm[j]).sum::<f64>())
        .collect();
    LinearReadout::new(weights, bias, regularization)
}

fn column_means(x: &Matrix) -> Vec<f64> {
    let mut m = vec![0.0; x.cols()];
    for r in x.iter_rows() {
        m.iter_mut().zip(r).for_each(|(a, v)| *a += v);
    }
    let n = x.rows().max(1) as f64;
    m.iter_mut().for_each(|a| *a /= n);
    m
}
