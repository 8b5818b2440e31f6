//! Big-endian index bookkeeping for composite systems.

use crate::error::{Error, Result};

/// For a composite of `dims`, splits every full index into the composite
/// index of a chosen subsystem list (in the order given) and of the remaining
/// subsystems (in their original order).
#[derive(Debug, Clone)]
pub(crate) struct IndexSplit {
    pub picked_dim: usize,
    pub rest_dim: usize,
    pub rest_dims: Vec<usize>,
    /// `full[r * picked_dim + p]` is the full index for rest index `r` and
    /// picked index `p`.
    pub full: Vec<usize>,
}

impl IndexSplit {
    pub fn new(dims: &[usize], picked: &[usize]) -> Result<Self> {
        for (n, &i) in picked.iter().enumerate() {
            if i >= dims.len() {
                return Err(Error::Index(format!(
                    "subsystem {i} does not exist in a {}-part system",
                    dims.len()
                )));
            }
            if picked[..n].contains(&i) {
                return Err(Error::arg(format!("subsystem {i} listed twice")));
            }
        }
        let rest: Vec<usize> = (0..dims.len()).filter(|i| !picked.contains(i)).collect();
        let picked_dim: usize = picked.iter().map(|&i| dims[i]).product();
        let rest_dims: Vec<usize> = rest.iter().map(|&i| dims[i]).collect();
        let rest_dim: usize = rest_dims.iter().product();
        let total: usize = dims.iter().product();

        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }

        let mut full = vec![0usize; total];
        let mut digits = vec![0usize; dims.len()];
        for r in 0..rest_dim {
            decompose(r, &rest_dims, &mut digits[..rest.len()]);
            let base: usize = rest
                .iter()
                .zip(&digits[..rest.len()])
                .map(|(&s, &d)| strides[s] * d)
                .sum();
            let picked_dims: Vec<usize> = picked.iter().map(|&i| dims[i]).collect();
            let mut pd = vec![0usize; picked.len()];
            for p in 0..picked_dim {
                decompose(p, &picked_dims, &mut pd);
                let off: usize = picked.iter().zip(&pd).map(|(&s, &d)| strides[s] * d).sum();
                full[r * picked_dim + p] = base + off;
            }
        }
        Ok(IndexSplit {
            picked_dim,
            rest_dim,
            rest_dims,
            full,
        })
    }

    #[inline]
    pub fn at(&self, rest: usize, picked: usize) -> usize {
        self.full[rest * self.picked_dim + picked]
    }
}

fn decompose(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}
