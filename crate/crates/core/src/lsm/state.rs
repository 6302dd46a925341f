use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n x dim` point configuration, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Positions {
    n: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Positions {
    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            n,
            dim,
            data: vec![0.0; n * dim],
        }
    }

    pub fn from_vec(n: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("latent dimension must be at least 1".into()));
        }
        if data.len() != n * dim {
            return Err(Error::Dimension(format!(
                "{} coordinates for {n} points in {dim} dimensions",
                data.len()
            )));
        }
        Ok(Self { n, dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("ragged position rows".into()));
        }
        Self::from_vec(rows.len(), dim, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean distances for every pair in canonical order.
    pub fn pairwise_distances(&self) -> Vec<f64> {
        crate::network::pairs(self.n)
            .map(|(i, j)| self.distance(i, j))
            .collect()
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for i in 0..self.n {
            for (ck, x) in c.iter_mut().zip(self.row(i)) {
                *ck += x;
            }
        }
        if self.n > 0 {
            c.iter_mut().for_each(|x| *x /= self.n as f64);
        }
        c
    }

    /// Translates so the centroid is at the origin.
    pub fn center(&mut self) {
        let c = self.centroid();
        for i in 0..self.n {
            for (x, ck) in self.row_mut(i).iter_mut().zip(&c) {
                *x -= ck;
            }
        }
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        let data = order.iter().flat_map(|&k| self.row(k).to_vec()).collect();
        Self {
            n: self.n,
            dim: self.dim,
            data,
        }
    }

    pub(crate) fn to_matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.dim, &self.data)
    }
}

/// Latent positions and regression coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentState {
    pub positions: Positions,
    pub beta0: f64,
    pub beta: Vec<f64>,
}

impl LatentState {
    pub fn new(positions: Positions, beta0: f64, beta: Vec<f64>) -> Self {
        Self {
            positions,
            beta0,
            beta,
        }
    }

    /// Number of free parameters in the flat `(beta0, beta, Z)` vector.
    pub fn n_params(&self) -> usize {
        1 + self.beta.len() + self.positions.as_slice().len()
    }

    /// Flattens to `(beta0, beta..., Z row-major...)`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        v.push(self.beta0);
        v.extend_from_slice(&self.beta);
        v.extend_from_slice(self.positions.as_slice());
        v
    }

    pub fn from_flat(flat: &[f64], n: usize, dim: usize, p: usize) -> Self {
        let positions = Positions {
            n,
            dim,
            data: flat[1 + p..].to_vec(),
        };
        Self {
            positions,
            beta0: flat[0],
            beta: flat[1..1 + p].to_vec(),
        }
    }

    pub fn check(&self, n: usize, p: usize) -> Result<()> {
        if self.positions.n() != n {
            return Err(Error::Dimension(format!(
                "state has {} positions for {n} nodes",
                self.positions.n()
            )));
        }
        if self.beta.len() != p {
            return Err(Error::Dimension(format!(
                "state has {} coefficients for {p} covariates",
                self.beta.len()
            )));
        }
        Ok(())
    }
}
