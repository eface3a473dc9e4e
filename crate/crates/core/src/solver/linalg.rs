//! Small symmetric sparse systems solved by Jacobi-preconditioned CG.

use super::SolverError;

/// Symmetric matrix stored as a diagonal plus off-diagonal couplings; every
/// coupling `(i, j, v)` contributes `v` at both `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, Default)]
pub struct SymmetricSystem {
    pub diag: Vec<f64>,
    pub couplings: Vec<(usize, usize, f64)>,
}

impl SymmetricSystem {
    pub fn new(n: usize) -> Self {
        Self { diag: vec![0.0; n], couplings: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Adds a conductance-like link: `+g` on both diagonals, `-g` off them.
    pub fn add_link(&mut self, i: usize, j: usize, g: f64) {
        self.diag[i] += g;
        self.diag[j] += g;
        self.couplings.push((i, j, -g));
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for ((o, d), xi) in out.iter_mut().zip(&self.diag).zip(x) {
            *o = d * xi;
        }
        for &(i, j, v) in &self.couplings {
            out[i] += v * x[j];
            out[j] += v * x[i];
        }
    }

    /// Solves `A x = b`, stopping when `‖r‖ ≤ rel_tol ‖b‖`.
    pub fn solve(&self, b: &[f64], rel_tol: f64) -> Result<Vec<f64>, SolverError> {
        let n = self.len();
        let mut x = vec![0.0; n];
        let b_norm = norm(b);
        if b_norm == 0.0 {
            return Ok(x);
        }
        let inv_diag: Vec<f64> = self.diag.iter().map(|d| 1.0 / d).collect();
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let max_iter = 10 * n + 100;
        for _ in 0..max_iter {
            self.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if norm(&r) <= rel_tol * b_norm {
                return Ok(x);
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(SolverError::LinearSolve { iterations: max_iter, residual: norm(&r) / b_norm })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_chain() {
        // Capacities on the diagonal plus a conduction chain.
        let n = 50;
        let mut a = SymmetricSystem::new(n);
        for i in 0..n {
            a.diag[i] += 1.0 + i as f64 * 0.01;
        }
        for i in 0..n - 1 {
            a.add_link(i, i + 1, 5.0);
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        a.apply(&x_true, &mut b);
        let x = a.solve(&b, 1e-14).unwrap();
        for (x, t) in x.iter().zip(&x_true) {
            assert!((x - t).abs() < 1e-11);
        }
    }
}
