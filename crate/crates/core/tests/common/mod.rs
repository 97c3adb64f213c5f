//! Independent dense-arithmetic oracles on `Vec<Vec<f64>>`, plus seeded
//! random inputs for property tests.
#![allow(dead_code)]

use diffscat::experiments::trial_rng;
use diffscat::nalgebra::{DMatrix, DVector};
use diffscat::Graph;
use rand::Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn to_mat(m: &DMatrix<f64>) -> Mat {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut s = 0.0;
            for t in 0..k {
                s += a[i][t] * b[t][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn matvec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

/// `T = (I + D^{-1/2} W D^{-1/2}) / 2` by direct loops.
pub fn lazy(w: &Mat) -> Mat {
    let n = w.len();
    let d: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let a = w[i][j] / (d[i] * d[j]).sqrt();
                    0.5 * (if i == j { 1.0 } else { 0.0 } + a)
                })
                .collect()
        })
        .collect()
}

/// Cyclic Jacobi eigenvalue iteration; returns eigenvalues sorted
/// descending and eigenvectors as columns in the same order.
pub fn jacobi(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.len();
    let mut a = a.clone();
    let mut v = identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i][j] * a[i][j];
                }
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let vals = idx.iter().map(|&i| a[i][i]).collect();
    let vecs = (0..n)
        .map(|r| idx.iter().map(|&c| v[r][c]).collect())
        .collect();
    (vals, vecs)
}

/// Largest absolute eigenvalue via Jacobi.
pub fn sym_norm(a: &Mat) -> f64 {
    jacobi(a).0.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn k3() -> Graph {
    Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
}

pub fn p2() -> Graph {
    Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap()
}

/// Connected weighted graph: random spanning path plus extra edges with
/// probability `density`.
pub fn random_connected(n: usize, density: f64, seed: u64) -> Graph {
    let mut rng = trial_rng(seed, &[0xC0]);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut w = DMatrix::zeros(n, n);
    for k in 1..n {
        let (a, b) = (order[k - 1], order[k]);
        let wt = rng.random_range(0.2..2.0);
        w[(a, b)] = wt;
        w[(b, a)] = wt;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if w[(i, j)] == 0.0 && rng.random_bool(density) {
                let wt = rng.random_range(0.2..2.0);
                w[(i, j)] = wt;
                w[(j, i)] = wt;
            }
        }
    }
    Graph::from_weights(w).unwrap()
}

pub fn random_signal(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = trial_rng(seed, &[0x51]);
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = trial_rng(seed, &[0x9E]);
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}
