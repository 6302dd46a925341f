use nalgebra::DMatrix;

use super::state::Positions;
use crate::error::{Error, Result};

/// `x -> (x - source_centroid) R + target_centroid`, with `R` orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidMotion {
    pub rotation: DMatrix<f64>,
    pub source_centroid: Vec<f64>,
    pub target_centroid: Vec<f64>,
}

impl RigidMotion {
    pub fn identity(dim: usize) -> Self {
        Self {
            rotation: DMatrix::identity(dim, dim),
            source_centroid: vec![0.0; dim],
            target_centroid: vec![0.0; dim],
        }
    }

    pub fn apply_point(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        (0..d)
            .map(|c| {
                (0..d)
                    .map(|r| (x[r] - self.source_centroid[r]) * self.rotation[(r, c)])
                    .sum::<f64>()
                    + self.target_centroid[c]
            })
            .collect()
    }

    pub fn apply(&self, z: &Positions) -> Positions {
        let mut out = z.clone();
        for i in 0..z.n() {
            let y = self.apply_point(z.row(i));
            out.row_mut(i).copy_from_slice(&y);
        }
        out
    }
}

/// Rotation/reflection plus translation taking `z` closest to `reference` in
/// Frobenius norm. A configuration with all points identical gets a
/// translation only.
pub fn procrustes_fit(z: &Positions, reference: &Positions) -> Result<RigidMotion> {
    if z.n() != reference.n() || z.dim() != reference.dim() {
        return Err(Error::Dimension(format!(
            "cannot align {}x{} to {}x{}",
            z.n(),
            z.dim(),
            reference.n(),
            reference.dim()
        )));
    }
    let dim = z.dim();
    let cz = z.centroid();
    let cr = reference.centroid();
    let mut xc = z.to_matrix();
    let mut yc = reference.to_matrix();
    for i in 0..z.n() {
        for k in 0..dim {
            xc[(i, k)] -= cz[k];
            yc[(i, k)] -= cr[k];
        }
    }
    let scale = xc.norm() * yc.norm();
    let rotation = if scale <= 1e-300 || !scale.is_finite() {
        DMatrix::identity(dim, dim)
    } else {
        let h = xc.transpose() * &yc;
        let svd = h.svd(true, true);
        let u = svd.u.expect("svd u");
        let vt = svd.v_t.expect("svd v_t");
        u * vt
    };
    Ok(RigidMotion {
        rotation,
        source_centroid: cz,
        target_centroid: cr,
    })
}

/// `z` moved rigidly onto `reference`; pairwise distances are preserved.
pub fn procrustes_align(z: &Positions, reference: &Positions) -> Result<Positions> {
    Ok(procrustes_fit(z, reference)?.apply(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frob(a: &Positions, b: &Positions) -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn reference() -> Positions {
        Positions::from_rows(&[
            vec![0.0, 0.0],
            vec![2.0, 0.5],
            vec![-1.0, 3.0],
            vec![4.0, -2.0],
            vec![1.5, 1.5],
        ])
        .unwrap()
    }

    #[test]
    fn aligning_reference_to_itself_is_identity() {
        let r = reference();
        let a = procrustes_align(&r, &r).unwrap();
        assert!(frob(&a, &r) < 1e-12);
    }

    #[test]
    fn recovers_rotation_and_shift() {
        let r = reference();
        let moved = Positions::from_rows(
            &r.rows()
                .iter()
                .map(|p| vec![-p[1] + 10.0, p[0] - 3.0])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let a = procrustes_align(&moved, &r).unwrap();
        assert!(frob(&a, &r) < 1e-10);
    }

    #[test]
    fn recovers_reflection() {
        let r = reference();
        let mirrored = Positions::from_rows(
            &r.rows().iter().map(|p| vec![-p[0], p[1]]).collect::<Vec<_>>(),
        )
        .unwrap();
        assert!(frob(&procrustes_align(&mirrored, &r).unwrap(), &r) < 1e-10);
    }

    #[test]
    fn noisy_copy_residual_is_bounded_by_noise() {
        let r = reference();
        let noise = [0.01, -0.02, 0.015, 0.0, -0.01, 0.02, 0.005, -0.015, 0.01, 0.01];
        let mut noisy = r.clone();
        noisy
            .as_mut_slice()
            .iter_mut()
            .zip(noise)
            .for_each(|(x, e)| *x += e);
        let theta: f64 = 1.1;
        let rotated = Positions::from_rows(
            &noisy
                .rows()
                .iter()
                .map(|p| {
                    vec![
                        theta.cos() * p[0] - theta.sin() * p[1] + 1.0,
                        theta.sin() * p[0] + theta.cos() * p[1] - 7.0,
                    ]
                })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let a = procrustes_align(&rotated, &r).unwrap();
        assert!(frob(&a, &r) <= frob(&noisy, &r) + 1e-12);
    }

    #[test]
    fn degenerate_configuration_is_translated() {
        let z = Positions::from_rows(&vec![vec![3.0, 3.0]; 5]).unwrap();
        let a = procrustes_align(&z, &reference()).unwrap();
        let c = reference().centroid();
        for i in 0..5 {
            assert!((a.row(i)[0] - c[0]).abs() < 1e-12);
            assert!((a.row(i)[1] - c[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let z = Positions::zeros(3, 2);
        assert!(procrustes_align(&z, &reference()).is_err());
    }
}
