//! Echo state network baseline: a fixed reservoir with a linear ridge
//! readout of the state alone.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::classifiers::{fit_linear_ridge, LinearReadout};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::par;
use crate::reservoir::Reservoir;

/// States `h_1..h_{T+1}`, the last one after a zero input, matching the
/// `T+1` output rows of the stack machine.
pub fn padded_trajectory(r: &Reservoir, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut h = r.trajectory(x)?;
    let last = h.last().cloned().unwrap_or_else(|| vec![0.0; r.m()]);
    h.push(r.step_vec(&last, &vec![0.0; r.n()]));
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Esn {
    reservoir: Reservoir,
    readout: LinearReadout,
}

impl Esn {
    /// Fits the readout on every step of every `(x, y)` pair, where `y` has
    /// one row more than `x`.
    pub fn fit(reservoir: Reservoir, seqs: &[(&[Vec<f64>], &[Vec<f64>])], regularization: f64) -> Result<Self> {
        if seqs.is_empty() {
            return Err(Error::EmptyData);
        }
        let states = par::map(seqs, |(x, _)| padded_trajectory(&reservoir, x));
        let mut h_rows = Vec::new();
        let mut y_rows = Vec::new();
        for (h, (x, y)) in states.into_iter().zip(seqs) {
            if y.len() != x.len() + 1 {
                return Err(Error::ShapeMismatch(format!(
                    "{} inputs need {} output rows, got {}",
                    x.len(),
                    x.len() + 1,
                    y.len()
                )));
            }
            h_rows.extend(h?);
            y_rows.extend(y.iter().cloned());
        }
        let l = y_rows[0].len();
        let hm = Matrix::from_rows(&h_rows, reservoir.m())?;
        let ym = Matrix::from_rows(&y_rows, l)?;
        let readout = fit_linear_ridge(&hm, &ym, regularization)?;
        Ok(Self { reservoir, readout })
    }

    pub fn reservoir(&self) -> &Reservoir {
        &self.reservoir
    }

    pub fn readout(&self) -> &LinearReadout {
        &self.readout
    }

    pub fn into_parts(self) -> (Reservoir, LinearReadout) {
        (self.reservoir, self.readout)
    }

    /// Raw readout values for `t = 1..T+1`.
    pub fn run(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        Ok(padded_trajectory(&self.reservoir, x)?
            .iter()
            .map(|h| self.readout.predict(h))
            .collect())
    }

    pub fn run_batch(&self, xs: &[Vec<Vec<f64>>]) -> Result<Vec<Vec<Vec<f64>>>> {
        par::map(xs, |x| self.run(x)).into_iter().collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        serde_json::to_writer(std::io::BufWriter::new(std::fs::File::create(path)?), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn readout_sees_the_padded_state() {
        let r = Reservoir::random(20, 2, 0.8, 1.0, 4).unwrap();
        let x = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let h = padded_trajectory(&r, &x).unwrap();
        assert_eq!(h.len(), 4);
        let expect = r.step(&crate::ReservoirState(h[2].clone()), &[0.0, 0.0]).unwrap();
        assert_eq!(h[3], expect.0);
    }

    #[test]
    fn learns_the_current_input() {
        let r = Reservoir::random(30, 2, 0.5, 1.0, 1).unwrap();
        let xs: Vec<Vec<Vec<f64>>> = (0..20)
            .map(|k| (0..10).map(|t| if (k + t) % 3 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] }).collect())
            .collect();
        let ys: Vec<Vec<Vec<f64>>> = xs
            .iter()
            .map(|x| {
                let mut y: Vec<Vec<f64>> = x.iter().map(|v| vec![v[0]]).collect();
                y.push(vec![0.0]);
                y
            })
            .collect();
        let pairs: Vec<(&[Vec<f64>], &[Vec<f64>])> = xs.iter().zip(&ys).map(|(x, y)| (&x[..], &y[..])).collect();
        let esn = Esn::fit(r, &pairs, 1e-8).unwrap();
        let out = esn.run(&xs[0]).unwrap();
        for (o, y) in out.iter().zip(&ys[0]) {
            assert_abs_diff_eq!(o[0], y[0], epsilon = 1e-3);
        }
    }

    #[test]
    fn rejects_misaligned_targets() {
        let r = Reservoir::random(5, 1, 0.5, 1.0, 0).unwrap();
        let x = vec![vec![1.0]];
        let y = vec![vec![1.0]];
        assert!(Esn::fit(r, &[(&x[..], &y[..])], 1e-3).is_err());
    }
}
