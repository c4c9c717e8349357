use nalgebra::DMatrix;

use super::ops::{beamsplitter_blocks, bs_apply_flat};
use super::TwoModeFockState;
use crate::{Error, Result, C64};

/// Pure state of several modes stored as a dense row-major tensor.
///
/// Used for the four-mode (A, B, C, D) intermediate states of the heralded
/// subtraction model; two-mode states have a dedicated type.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiModeState {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl MultiModeState {
    /// Product state with `first` in mode 0 and vacuum in every other mode.
    pub fn with_vacuum_ancillas(first: &[C64], dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || first.len() != dims[0] {
            return Err(Error::DimensionMismatch {
                expected: dims.first().copied().unwrap_or(0),
                found: first.len(),
            });
        }
        let total: usize = dims.iter().product();
        let stride0: usize = dims[1..].iter().product();
        let mut amps = vec![C64::new(0.0, 0.0); total];
        for (n, &a) in first.iter().enumerate() {
            amps[n * stride0] = a;
        }
        Ok(MultiModeState { dims, amps })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 1e-300) {
            return Err(Error::ZeroNorm);
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(self)
    }

    pub fn inner(&self, other: &MultiModeState) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies `exp(θ(a_i† a_j − a_i a_j†))`, returning the probability mass
    /// pushed past the cutoff.
    pub fn apply_beamsplitter(&mut self, i: usize, j: usize, theta: f64) -> Result<f64> {
        if i == j || i >= self.dims.len() || j >= self.dims.len() {
            return Err(Error::InvalidParameter(format!("bad mode pair ({i}, {j})")));
        }
        let blocks = beamsplitter_blocks(theta, self.dims[i] + self.dims[j] - 2);
        Ok(bs_apply_flat(&mut self.amps, &self.dims, i, j, &blocks))
    }

    /// Restriction to the smaller Fock box `dims`, with the relative
    /// probability mass that fell outside it.
    pub fn crop(&self, dims: &[usize]) -> Result<(Self, f64)> {
        if dims.len() != self.dims.len()
            || dims.iter().zip(&self.dims).any(|(n, o)| n > o || *n == 0)
        {
            return Err(Error::InvalidParameter(format!(
                "cannot crop {:?} to {dims:?}",
                self.dims
            )));
        }
        let total: usize = dims.iter().product();
        let mut amps = Vec::with_capacity(total);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..total {
            let flat = idx
                .iter()
                .zip(&self.dims)
                .fold(0, |acc, (i, d)| acc * d + i);
            amps.push(self.amps[flat]);
            for k in (0..dims.len()).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        let out = MultiModeState {
            dims: dims.to_vec(),
            amps,
        };
        let before = self.norm_sqr();
        let lost = if before > 0.0 {
            (before - out.norm_sqr()).max(0.0) / before
        } else {
            0.0
        };
        Ok((out, lost))
    }

    /// Amplitudes of the two leading modes after projecting the remaining two
    /// modes onto `|c, d>`. Only defined for four-mode states.
    pub fn project_trailing(&self, c: usize, d: usize) -> Result<DMatrix<C64>> {
        if self.dims.len() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: self.dims.len(),
            });
        }
        let [da, db, dc, dd] = [self.dims[0], self.dims[1], self.dims[2], self.dims[3]];
        Ok(DMatrix::from_fn(da, db, |a, b| {
            self.amps[((a * db + b) * dc + c) * dd + d]
        }))
    }

    /// Product of a two-mode state in modes 0 and 1 with vacuum elsewhere.
    pub fn from_two_mode(state: &TwoModeFockState, ancilla_dims: &[usize]) -> Self {
        let d = state.dim();
        let mut dims = vec![d, d];
        dims.extend_from_slice(ancilla_dims);
        let stride: usize = ancilla_dims.iter().product();
        let mut amps = vec![C64::new(0.0, 0.0); d * d * stride];
        for (k, a) in state.to_flat().into_iter().enumerate() {
            amps[k * stride] = a;
        }
        MultiModeState { dims, amps }
    }

    pub fn to_two_mode(&self) -> Result<TwoModeFockState> {
        if self.dims.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.dims.len(),
            });
        }
        TwoModeFockState::from_flat(self.dims[0], &self.amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockVector;

    #[test]
    fn crop_keeps_the_box_and_reports_loss() {
        let v = FockVector::from_real(&[0.6, 0.0, 0.8]).unwrap();
        let s =
            MultiModeState::with_vacuum_ancillas(v.amplitudes().as_slice(), vec![3, 2, 2]).unwrap();
        let (c, lost) = s.crop(&[2, 2, 1]).unwrap();
        assert_eq!(c.dims(), &[2, 2, 1]);
        assert!((lost - 0.64).abs() < 1e-15);
        assert!((c.amplitudes()[0].re - 0.6).abs() < 1e-15);
        assert!(s.crop(&[4, 2, 2]).is_err());
    }

    #[test]
    fn two_mode_embedding_round_trips() {
        let t = TwoModeFockState::number(1, 2, 3).unwrap();
        let m = MultiModeState::from_two_mode(&t, &[2, 2]);
        assert_eq!(m.project_trailing(0, 0).unwrap(), t.coeffs().clone());
        assert_eq!(m.norm_sqr(), 1.0);
    }
}
