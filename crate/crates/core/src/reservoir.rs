//! The fixed recurrent core `h_t = σ(U·x_t + W·h_{t-1})` and its three
//! constructions: Gaussian random, cycle with jumps, and Legendre delay.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Seed of the input-sign stream used by [`Reservoir::crj`].
pub const CRJ_SIGN_SEED: u64 = 0x5eed_c71;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, v: &mut [f64]) {
        if let Activation::Tanh = self {
            v.iter_mut().for_each(|x| *x = x.tanh());
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReservoirKind {
    Rand,
    Crj,
    Ldn,
}

impl ReservoirKind {
    pub fn label(self) -> &'static str {
        match self {
            ReservoirKind::Rand => "rand",
            ReservoirKind::Crj => "crj",
            ReservoirKind::Ldn => "ldn",
        }
    }
}

/// Construction parameters, tagged by reservoir kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "meta", rename_all = "lowercase")]
pub enum ReservoirMeta {
    Rand {
        spectral_radius: f64,
        input_scale: f64,
        seed: u64,
    },
    Crj {
        cycle_weight: f64,
        jump_weight: f64,
        jump_length: usize,
        input_weight: f64,
        sign_seed: u64,
    },
    Ldn {
        theta: f64,
        order: usize,
    },
    /// Hand-assembled matrices.
    Custom {},
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    #[serde(flatten)]
    meta: ReservoirMeta,
    activation: Activation,
    /// `U`, m x n.
    input: Matrix,
    /// `W`, m x m.
    recurrent: Matrix,
}

/// Reservoir state vector; the initial state is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservoirState(pub Vec<f64>);

impl ReservoirState {
    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Reservoir {
    pub fn from_parts(input: Matrix, recurrent: Matrix, activation: Activation) -> Result<Self> {
        if recurrent.rows() != recurrent.cols() {
            return Err(Error::ShapeMismatch("recurrent matrix must be square".into()));
        }
        if input.rows() != recurrent.rows() {
            return Err(Error::DimensionMismatch {
                expected: recurrent.rows(),
                actual: input.rows(),
            });
        }
        Ok(Self {
            meta: ReservoirMeta::Custom {},
            activation,
            input,
            recurrent,
        })
    }

    /// Gaussian `W` rescaled to the exact spectral radius, Gaussian `U` times
    /// `input_scale`.
    pub fn random(
        m: usize,
        n: usize,
        spectral_radius: f64,
        input_scale: f64,
        seed: u64,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidConfig("reservoir needs m, n >= 1".into()));
        }
        if !(spectral_radius > 0.0 && spectral_radius < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "spectral radius {spectral_radius} outside (0, 1)"
            )));
        }
        if !(input_scale > 0.0) {
            return Err(Error::InvalidConfig("input scale must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut recurrent = Matrix::from_fn(m, m, |_, _| rng.sample(StandardNormal));
        let input = Matrix::from_fn(m, n, |_, _| input_scale * rng.sample::<f64, _>(StandardNormal));
        let rho = recurrent.spectral_radius()?;
        if rho == 0.0 {
            return Err(Error::Numerical("sampled recurrent matrix is nilpotent".into()));
        }
        recurrent.scale(spectral_radius / rho);
        Ok(Self {
            meta: ReservoirMeta::Rand {
                spectral_radius,
                input_scale,
                seed,
            },
            activation: Activation::Tanh,
            input,
            recurrent,
        })
    }

    /// Cycle reservoir with jumps using the default sign stream.
    pub fn crj(
        m: usize,
        n: usize,
        cycle_weight: f64,
        jump_weight: f64,
        jump_length: usize,
        input_weight: f64,
    ) -> Result<Self> {
        Self::crj_with_signs(
            m,
            n,
            cycle_weight,
            jump_weight,
            jump_length,
            input_weight,
            CRJ_SIGN_SEED,
        )
    }

    /// Unidirectional ring `i -> i+1` with `cycle_weight`, bidirectional
    /// chords `i <-> i+jump_length` visited by stepping `jump_length` from 0
    /// until the walk closes, and input weights `±input_weight`.
    pub fn crj_with_signs(
        m: usize,
        n: usize,
        cycle_weight: f64,
        jump_weight: f64,
        jump_length: usize,
        input_weight: f64,
        sign_seed: u64,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidConfig("reservoir needs m, n >= 1".into()));
        }
        if jump_length == 0 || jump_length >= m {
            return Err(Error::InvalidConfig(format!(
                "jump length {jump_length} must lie in [1, {m})"
            )));
        }
        let mut recurrent = Matrix::zeros(m, m);
        for i in 0..m {
            recurrent[((i + 1) % m, i)] = cycle_weight;
        }
        let mut i = 0;
        let mut visited = vec![false; m];
        while !visited[i] {
            visited[i] = true;
            let k = (i + jump_length) % m;
            if jump_length == 1 {
                // chord coincides with the ring edge i -> k
                recurrent[(k, i)] += jump_weight;
                recurrent[(i, k)] += jump_weight;
            } else {
                recurrent[(k, i)] = jump_weight;
                recurrent[(i, k)] = jump_weight;
            }
            i = k;
        }
        let input = crj_input(m, n, input_weight, sign_seed);
        Ok(Self {
            meta: ReservoirMeta::Crj {
                cycle_weight,
                jump_weight,
                jump_length,
                input_weight,
                sign_seed,
            },
            activation: Activation::Tanh,
            input,
            recurrent,
        })
    }

    /// Legendre delay network: one `m/n`-dimensional Legendre memory per input
    /// channel, zero-order-hold discretised at unit step, identity activation.
    pub fn ldn(m: usize, n: usize, theta: f64) -> Result<Self> {
        if n == 0 || m == 0 || m % n != 0 {
            return Err(Error::Divisibility {
                neurons: m,
                channels: n,
            });
        }
        if !(theta > 0.0) {
            return Err(Error::InvalidConfig("theta must be positive".into()));
        }
        let q = m / n;
        let (a, b) = ldn_continuous(q, theta);
        let (ad, bd) = zero_order_hold(&a, &b)?;
        let mut recurrent = Matrix::zeros(m, m);
        let mut input = Matrix::zeros(m, n);
        for c in 0..n {
            let off = c * q;
            for i in 0..q {
                for j in 0..q {
                    recurrent[(off + i, off + j)] = ad[(i, j)];
                }
                input[(off + i, c)] = bd[i];
            }
        }
        Ok(Self {
            meta: ReservoirMeta::Ldn { theta, order: q },
            activation: Activation::Identity,
            input,
            recurrent,
        })
    }

    pub fn kind(&self) -> Option<ReservoirKind> {
        match self.meta {
            ReservoirMeta::Rand { .. } => Some(ReservoirKind::Rand),
            ReservoirMeta::Crj { .. } => Some(ReservoirKind::Crj),
            ReservoirMeta::Ldn { .. } => Some(ReservoirKind::Ldn),
            ReservoirMeta::Custom {} => None,
        }
    }

    pub fn meta(&self) -> &ReservoirMeta {
        &self.meta
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_matrix(&self) -> &Matrix {
        &self.input
    }

    pub fn recurrent_matrix(&self) -> &Matrix {
        &self.recurrent
    }

    /// Number of neurons.
    pub fn m(&self) -> usize {
        self.recurrent.rows()
    }

    /// Input dimensionality.
    pub fn n(&self) -> usize {
        self.input.cols()
    }

    pub fn zero_state(&self) -> ReservoirState {
        ReservoirState::zeros(self.m())
    }

    /// One update; the input state is left untouched.
    pub fn step(&self, h: &ReservoirState, x: &[f64]) -> Result<ReservoirState> {
        if h.0.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                actual: h.0.len(),
            });
        }
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: x.len(),
            });
        }
        let mut out = vec![0.0; self.m()];
        self.step_into(&h.0, x, &mut out);
        Ok(ReservoirState(out))
    }

    /// Unchecked update used by the hot loops.
    #[inline]
    pub(crate) fn step_into(&self, h: &[f64], x: &[f64], out: &mut [f64]) {
        let sparse_x: Vec<(usize, f64)> = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .collect();
        for (i, o) in out.iter_mut().enumerate() {
            let u = self.input.row(i);
            let mut acc = dot(self.recurrent.row(i), h);
            for &(j, v) in &sparse_x {
                acc += u[j] * v;
            }
            *o = acc;
        }
        self.activation.apply(out);
    }

    pub(crate) fn step_vec(&self, h: &[f64], x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        self.step_into(h, x, &mut out);
        out
    }

    /// Folds `step` over the sequence from the zero state.
    pub fn encode_sequence<X: AsRef<[f64]>>(&self, seq: &[X]) -> Result<ReservoirState> {
        let mut h = self.zero_state();
        for x in seq {
            h = self.step(&h, x.as_ref())?;
        }
        Ok(h)
    }

    /// All intermediate states `h_1..h_T` of the fold.
    pub fn trajectory<X: AsRef<[f64]>>(&self, seq: &[X]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(seq.len());
        let mut h = vec![0.0; self.m()];
        for x in seq {
            let x = x.as_ref();
            if x.len() != self.n() {
                return Err(Error::DimensionMismatch {
                    expected: self.n(),
                    actual: x.len(),
                });
            }
            h = self.step_vec(&h, x);
            out.push(h.clone());
        }
        Ok(out)
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        self.recurrent.spectral_radius()
    }
}

fn crj_input(m: usize, n: usize, weight: f64, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let distinct_possible = m < 64 && (n as u64) <= (1u64 << m);
    let mut input = Matrix::zeros(m, n);
    // redraw while two channels share a sign column; identical columns make
    // the corresponding symbols indistinguishable to the reservoir
    for _ in 0..1000 {
        input = Matrix::from_fn(m, n, |_, _| if rng.random::<bool>() { weight } else { -weight });
        let cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| input[(i, j)]).collect()).collect();
        let clash = (0..n).any(|a| (a + 1..n).any(|b| cols[a] == cols[b]));
        if !clash || !distinct_possible {
            break;
        }
    }
    input
}

/// Continuous-time Legendre memory `(A, B)` of order `q` over window `theta`.
pub fn ldn_continuous(q: usize, theta: f64) -> (Matrix, Vec<f64>) {
    let a = Matrix::from_fn(q, q, |i, j| {
        let sign = if i < j {
            -1.0
        } else if (i - j + 1) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        (2 * i + 1) as f64 * sign / theta
    });
    let b = (0..q)
        .map(|i| (2 * i + 1) as f64 * if i % 2 == 0 { 1.0 } else { -1.0 } / theta)
        .collect();
    (a, b)
}

/// Zero-order hold at unit step: `exp([[A, B], [0, 0]]) = [[Ad, Bd], [0, 1]]`.
fn zero_order_hold(a: &Matrix, b: &[f64]) -> Result<(Matrix, Vec<f64>)> {
    let q = a.rows();
    let aug = Matrix::from_fn(q + 1, q + 1, |i, j| {
        if i < q && j < q {
            a[(i, j)]
        } else if i < q && j == q {
            b[i]
        } else {
            0.0
        }
    });
    let e = aug.expm()?;
    let ad = Matrix::from_fn(q, q, |i, j| e[(i, j)]);
    let bd = (0..q).map(|i| e[(i, q)]).collect();
    Ok((ad, bd))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent spectral-radius estimate via Gelfand's formula
    /// `ρ = lim ‖W^k‖^{1/k}`, with `k = 2^40` reached by repeated squaring.
    fn gelfand_radius(w: &Matrix) -> f64 {
        let mut p = w.clone();
        let mut log_scale = 0.0f64;
        let mut k = 1.0f64;
        for _ in 0..40 {
            let s = p.max_abs();
            if s == 0.0 {
                return 0.0;
            }
            p.scale(1.0 / s);
            log_scale += s.ln();
            // p_true = exp(log_scale) * p; squaring doubles both
            p = p.matmul(&p);
            log_scale *= 2.0;
            k *= 2.0;
        }
        let fro = p.data().iter().map(|v| v * v).sum::<f64>().sqrt();
        ((log_scale + fro.ln()) / k).exp()
    }

    #[test]
    fn random_build_hits_requested_radius() {
        let r = Reservoir::random(256, 3, 0.9, 1.0, 7).unwrap();
        assert!((r.spectral_radius().unwrap() - 0.9).abs() < 1e-9);
        assert_eq!(r.m(), 256);
        assert_eq!(r.n(), 3);
    }

    #[test]
    fn random_build_is_deterministic() {
        let a = Reservoir::random(32, 4, 0.8, 0.5, 11).unwrap();
        let b = Reservoir::random(32, 4, 0.8, 0.5, 11).unwrap();
        assert_eq!(a, b);
        let c = Reservoir::random(32, 4, 0.8, 0.5, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_radius_matches_gelfand_oracle() {
        let r = Reservoir::random(4, 2, 0.5, 1.0, 0).unwrap();
        let rho = gelfand_radius(r.recurrent_matrix());
        assert!((rho - 0.5).abs() < 1e-6, "gelfand estimate {rho}");
    }

    #[test]
    fn crj_figure_architecture() {
        let r = Reservoir::crj(5, 3, 0.5, 0.5, 2, 1.0).unwrap();
        let w = r.recurrent_matrix();
        for i in 0..5 {
            assert_eq!(w[((i + 1) % 5, i)], 0.5);
            // pentagram chords
            assert_eq!(w[(i, (i + 2) % 5)], 0.5);
            assert_eq!(w[((i + 2) % 5, i)], 0.5);
        }
        let nnz: usize = w.data().iter().filter(|v| **v != 0.0).count();
        assert_eq!(nnz, 15);
        assert!(r.input_matrix().data().iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn crj_rows_have_at_most_three_nonzeros() {
        for (m, l) in [(5, 2), (8, 3), (8, 2), (8, 4), (10, 1), (31, 7)] {
            let r = Reservoir::crj(m, 2, 0.7, 0.2, l, 0.5).unwrap();
            for row in r.recurrent_matrix().iter_rows() {
                assert!(row.iter().filter(|v| **v != 0.0).count() <= 3, "m={m} l={l}");
            }
        }
    }

    #[test]
    fn crj_radius_is_cycle_plus_two_jumps_for_coprime_jumps() {
        // ring and chord pattern are commuting circulants; the all-ones
        // eigenvector gives the Perron root c + 2j
        let r = Reservoir::crj(8, 2, 0.9, 0.4, 3, 1.0).unwrap();
        let rho = gelfand_radius(r.recurrent_matrix());
        assert!((rho - 1.7).abs() < 1e-6);
        assert!((r.spectral_radius().unwrap() - 1.7).abs() < 1e-9);
        let small = Reservoir::crj(8, 2, 0.5, 0.2, 3, 1.0).unwrap();
        assert!(small.spectral_radius().unwrap() < 1.0);
    }

    #[test]
    fn crj_input_columns_are_distinct() {
        let r = Reservoir::crj(5, 3, 0.5, 0.5, 2, 1.0).unwrap();
        let u = r.input_matrix();
        for a in 0..3 {
            for b in a + 1..3 {
                assert!((0..5).any(|i| u[(i, a)] != u[(i, b)]));
            }
        }
    }

    #[test]
    fn ldn_closed_form_small_orders() {
        let (a, b) = ldn_continuous(2, 1.0);
        assert_eq!(a.to_rows(), vec![vec![-1.0, -1.0], vec![3.0, -3.0]]);
        assert_eq!(b, vec![1.0, -3.0]);
        let (a, b) = ldn_continuous(1, 1.0);
        assert_eq!(a.to_rows(), vec![vec![-1.0]]);
        assert_eq!(b, vec![1.0]);
    }

    #[test]
    fn ldn_scalar_zero_order_hold() {
        // q = 1: dh/dt = (-h + x)/theta, so Ad = e^{-1/theta}, Bd = 1 - Ad
        let r = Reservoir::ldn(1, 1, 4.0).unwrap();
        let ad = (-0.25f64).exp();
        assert!((r.recurrent_matrix()[(0, 0)] - ad).abs() < 1e-14);
        assert!((r.input_matrix()[(0, 0)] - (1.0 - ad)).abs() < 1e-14);
        assert_eq!(r.activation(), Activation::Identity);
    }

    #[test]
    fn ldn_requires_divisibility() {
        assert!(matches!(Reservoir::ldn(10, 3, 10.0), Err(Error::Divisibility { .. })));
        let r = Reservoir::ldn(12, 3, 10.0).unwrap();
        // block diagonal: channel 0 never feeds neurons of channel 1
        assert_eq!(r.input_matrix()[(5, 0)], 0.0);
        assert_eq!(r.recurrent_matrix()[(5, 0)], 0.0);
    }

    #[test]
    fn ldn_inputs_are_linearly_decodable() {
        // every input of a length-theta window is recovered from the final
        // state by a least-squares decoder fitted on random windows
        let theta = 32usize;
        let r = Reservoir::ldn(64, 1, theta as f64).unwrap();
        // the state is linear in the window: columns are impulse responses
        let mut m = Matrix::zeros(64, theta);
        for lag in 0..theta {
            let mut seq = vec![vec![0.0]; theta];
            seq[theta - 1 - lag][0] = 1.0;
            let h = r.encode_sequence(&seq).unwrap();
            for i in 0..64 {
                m[(i, lag)] = h.0[i];
            }
        }
        // decoder D = (MᵀM)^{-1} Mᵀ
        let mtm = m.transpose().matmul(&m);
        let inv = {
            let n = mtm.rows();
            let eye = faer::Mat::<f64>::identity(n, n);
            crate::matrix::solve_spd(mtm.as_faer().to_owned(), eye).unwrap()
        };
        let decoder = Matrix::from_faer(inv.as_ref()).matmul(&m.transpose());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let seq: Vec<Vec<f64>> = (0..theta).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
            let h = r.encode_sequence(&seq).unwrap();
            let decoded = decoder.matvec(&h.0);
            for lag in 0..=theta / 2 {
                let truth = seq[theta - 1 - lag][0];
                assert!((decoded[lag] - truth).abs() < 1e-2, "lag {lag}");
            }
        }
    }

    #[test]
    fn step_zero_input_zero_state_is_zero() {
        let r = Reservoir::random(16, 3, 0.9, 1.0, 1).unwrap();
        let h = r.step(&r.zero_state(), &[0.0, 0.0, 0.0]).unwrap();
        assert!(h.0.iter().all(|v| *v == 0.0));
        assert!(r.step(&r.zero_state(), &[0.0]).is_err());
    }

    #[test]
    fn identity_pass_through() {
        let r = Reservoir::from_parts(Matrix::identity(2), Matrix::zeros(2, 2), Activation::Identity)
            .unwrap();
        let h = r.step(&r.zero_state(), &[1.0, 0.0]).unwrap();
        assert_eq!(h.0, vec![1.0, 0.0]);
    }

    #[test]
    fn two_steps_match_direct_matrix_arithmetic() {
        let u = Matrix::from_rows(&[[0.5, -1.0], [0.25, 0.75], [-0.3, 0.1]], 2).unwrap();
        let w = Matrix::from_rows(&[[0.1, 0.2, -0.3], [0.0, 0.4, 0.1], [-0.2, 0.3, 0.05]], 3).unwrap();
        let r = Reservoir::from_parts(u.clone(), w.clone(), Activation::Tanh).unwrap();
        let x1 = [1.0, 0.0];
        let x2 = [0.3, -0.7];
        // oracle: explicit loops over indices
        let mut h1 = [0.0; 3];
        for i in 0..3 {
            h1[i] = (u[(i, 0)] * x1[0] + u[(i, 1)] * x1[1]).tanh();
        }
        let mut h2 = [0.0; 3];
        for i in 0..3 {
            let mut s = u[(i, 0)] * x2[0] + u[(i, 1)] * x2[1];
            for j in 0..3 {
                s += w[(i, j)] * h1[j];
            }
            h2[i] = s.tanh();
        }
        let got = r.encode_sequence(&[x1.to_vec(), x2.to_vec()]).unwrap();
        for i in 0..3 {
            assert!((got.0[i] - h2[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn encode_sequence_is_a_fold() {
        let r = Reservoir::random(8, 2, 0.9, 1.0, 5).unwrap();
        let empty: Vec<Vec<f64>> = Vec::new();
        assert_eq!(r.encode_sequence(&empty).unwrap(), r.zero_state());
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        let folded = r.step(&r.step(&r.zero_state(), &a).unwrap(), &b).unwrap();
        assert_eq!(r.encode_sequence(&[a, b]).unwrap(), folded);
    }

    #[test]
    fn json_carries_kind_meta_and_matrices() {
        let r = Reservoir::crj(5, 3, 0.5, 0.5, 2, 1.0).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["kind"], "crj");
        assert_eq!(v["meta"]["jump_length"], 2);
        assert_eq!(v["recurrent"].as_array().unwrap().len(), 5);
        let back: Reservoir = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            /// Initial-condition forgetting for contractive builds.
            #[test]
            fn echo_state_probe(seed in 0u64..1000, use_crj in any::<bool>(), syms in prop::collection::vec(0usize..3, 50)) {
                let r = if use_crj {
                    Reservoir::crj(64, 3, 0.5, 0.2, 5, 0.5).unwrap()
                } else {
                    Reservoir::random(64, 3, 0.9, 1.0, seed).unwrap()
                };
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut h: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
                let hn = crate::matrix::norm(&h);
                h.iter_mut().for_each(|v| *v /= hn.max(1.0));
                let mut g = vec![0.0; 64];
                for s in &syms {
                    let mut x = vec![0.0; 3];
                    x[*s] = 1.0;
                    h = r.step_vec(&h, &x);
                    g = r.step_vec(&g, &x);
                }
                prop_assert!(crate::matrix::sq_dist(&h, &g).sqrt() < 1e-3);
            }

            #[test]
            fn step_is_pure(seed in 0u64..100, x0 in -1.0f64..1.0, x1 in -1.0f64..1.0) {
                let r = Reservoir::random(12, 2, 0.7, 1.0, seed).unwrap();
                let h = r.step(&r.zero_state(), &[x0, x1]).unwrap();
                let a = r.step(&h, &[x1, x0]).unwrap();
                let b = r.step(&h, &[x1, x0]).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
