//! Classical multidimensional scaling, used to initialise latent positions.

use super::state::Positions;
use crate::network::{geodesic_distance_matrix, Network, UNREACHABLE};

/// Largest `k` eigenpairs of the symmetric `n x n` matrix `a` (row-major), by
/// shifted power iteration with deflation.
///
/// The shift by the largest absolute row sum makes every eigenvalue of the
/// iterated matrix nonnegative, so the iteration finds the largest
/// eigenvalues algebraically rather than in magnitude. Eigenvalues are
/// returned in descending order with unit eigenvectors.
pub fn top_eigenpairs(a: &[f64], n: usize, k: usize) -> Vec<(f64, Vec<f64>)> {
    assert_eq!(a.len(), n * n);
    const MAX_ITER: usize = 200_000;
    let mut work = a.to_vec();
    let shift = (0..n)
        .map(|r| work[r * n..(r + 1) * n].iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let tol = 1e-13 * shift.max(f64::MIN_POSITIVE);
    let mut found: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
    let mut next = vec![0.0; n];

    for idx in 0..k.min(n) {
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let t = (((i + 1) * (idx + 7)) as f64 * 12.9898).sin() * 43_758.545_3;
                1.0 + t.fract()
            })
            .collect();
        orthogonalize(&mut v, &found);
        if normalize(&mut v) == 0.0 {
            v = vec![0.0; n];
            v[idx] = 1.0;
            orthogonalize(&mut v, &found);
            normalize(&mut v);
        }
        let mut lambda = 0.0;
        for _ in 0..MAX_ITER {
            for r in 0..n {
                next[r] = work[r * n..(r + 1) * n]
                    .iter()
                    .zip(&v)
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
                    + shift * v[r];
            }
            let rq: f64 = next.iter().zip(&v).map(|(x, y)| x * y).sum();
            let resid = next
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - rq * y).powi(2))
                .sum::<f64>()
                .sqrt();
            lambda = rq - shift;
            orthogonalize(&mut next, &found);
            if normalize(&mut next) == 0.0 {
                break;
            }
            std::mem::swap(&mut v, &mut next);
            if resid <= tol {
                break;
            }
        }
        // Deflate.
        for r in 0..n {
            for c in 0..n {
                work[r * n + c] -= lambda * v[r] * v[c];
            }
        }
        found.push((lambda, v.clone()));
    }
    found
}

fn orthogonalize(v: &mut [f64], basis: &[(f64, Vec<f64>)]) {
    for (_, u) in basis {
        let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Classical (Torgerson) scaling of an `n x n` distance matrix into `dim`
/// dimensions. The result is centred at the origin; directions with a
/// non-positive eigenvalue get zero coordinates.
pub fn classical_mds(distances: &[f64], n: usize, dim: usize) -> Positions {
    assert_eq!(distances.len(), n * n);
    // B = -1/2 J D^2 J
    let sq: Vec<f64> = distances.iter().map(|d| d * d).collect();
    let row_mean: Vec<f64> = (0..n)
        .map(|r| sq[r * n..(r + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let mut b = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            b[r * n + c] = -0.5 * (sq[r * n + c] - row_mean[r] - row_mean[c] + grand);
        }
    }
    let pairs = top_eigenpairs(&b, n, dim);
    let mut z = Positions::zeros(n, dim);
    for (k, (lambda, v)) in pairs.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        for i in 0..n {
            z.row_mut(i)[k] = s * v[i];
        }
    }
    z.center();
    z
}

/// MDS of the geodesic hop distances of `net`; unreachable pairs are placed
/// one hop beyond the largest finite distance.
pub fn init_mds(net: &Network, dim: usize) -> Positions {
    let hops = geodesic_distance_matrix(net);
    let far = f64::from(hops.max_finite()) + 1.0;
    let d: Vec<f64> = hops
        .hops
        .iter()
        .map(|&h| if h == UNREACHABLE { far } else { f64::from(h) })
        .collect();
    classical_mds(&d, net.n_nodes(), dim)
}
