//! Polynomials of degree at most 3 in one or two variables, expanded about
//! a base point.

use crate::error::{Error, Result};

/// Exponents `(i, j)` of `x^i y^j`, ordered by total degree and then by
/// decreasing power of `x`. In 1D `j` is always 0.
pub fn monomials(dims: usize, degree: usize) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for d in 0..=degree as i32 {
        if dims == 1 {
            out.push((d, 0));
        } else {
            for i in (0..=d).rev() {
                out.push((i, d - i));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Polynomial {
    pub dims: usize,
    pub degree: usize,
    pub base: [f64; 2],
    /// One coefficient per entry of [`monomials`].
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(dims: usize, degree: usize, base: [f64; 2], coeffs: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&dims) || degree > 3 {
            return Err(Error::InvalidArgument(format!(
                "unsupported polynomial space ({dims}D, degree {degree})"
            )));
        }
        let n = monomials(dims, degree).len();
        if coeffs.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for {n} monomials",
                coeffs.len()
            )));
        }
        Ok(Polynomial {
            dims,
            degree,
            base,
            coeffs,
        })
    }

    pub fn zero(dims: usize, degree: usize) -> Self {
        let n = monomials(dims, degree).len();
        Polynomial {
            dims,
            degree,
            base: [0.0; 2],
            coeffs: vec![0.0; n],
        }
    }

    /// `c0 + b·x + xᵀAx` about the origin, 2D.
    pub fn quadratic(a: [[f64; 2]; 2], b: [f64; 2], c0: f64) -> Self {
        Polynomial {
            dims: 2,
            degree: 2,
            base: [0.0; 2],
            coeffs: vec![c0, b[0], b[1], a[0][0], a[0][1] + a[1][0], a[1][1]],
        }
    }

    pub fn coefficient(&self, i: i32, j: i32) -> f64 {
        monomials(self.dims, self.degree)
            .iter()
            .position(|&m| m == (i, j))
            .map_or(0.0, |k| self.coeffs[k])
    }

    fn shifted(&self, p: &[f64]) -> (f64, f64) {
        let x = p[0] - self.base[0];
        let y = if self.dims == 2 {
            p[1] - self.base[1]
        } else {
            0.0
        };
        (x, y)
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        let (x, y) = self.shifted(p);
        monomials(self.dims, self.degree)
            .iter()
            .zip(&self.coeffs)
            .map(|(&(i, j), c)| c * x.powi(i) * y.powi(j))
            .sum()
    }

    pub fn gradient(&self, p: &[f64]) -> [f64; 2] {
        let (x, y) = self.shifted(p);
        let mut g = [0.0; 2];
        for (&(i, j), c) in monomials(self.dims, self.degree).iter().zip(&self.coeffs) {
            if i > 0 {
                g[0] += c * i as f64 * x.powi(i - 1) * y.powi(j);
            }
            if j > 0 {
                g[1] += c * j as f64 * x.powi(i) * y.powi(j - 1);
            }
        }
        g
    }

    pub fn laplacian(&self, p: &[f64]) -> f64 {
        let (x, y) = self.shifted(p);
        let mut s = 0.0;
        for (&(i, j), c) in monomials(self.dims, self.degree).iter().zip(&self.coeffs) {
            if i > 1 {
                s += c * (i * (i - 1)) as f64 * x.powi(i - 2) * y.powi(j);
            }
            if j > 1 {
                s += c * (j * (j - 1)) as f64 * x.powi(i) * y.powi(j - 2);
            }
        }
        s
    }

    /// `p(R^T x)` for the rotation `R` by `theta`; quadratics about the origin only.
    pub fn rotated(&self, theta: f64) -> Result<Self> {
        if self.dims != 2 || self.degree > 2 || self.base != [0.0, 0.0] {
            return Err(Error::InvalidArgument(
                "rotation needs a 2D quadratic about the origin".into(),
            ));
        }
        let c = |i, j| self.coefficient(i, j);
        let a = [[c(2, 0), c(1, 1) / 2.0], [c(1, 1) / 2.0, c(0, 2)]];
        let b = [c(1, 0), c(0, 1)];
        let (s, co) = theta.sin_cos();
        let r = [[co, -s], [s, co]];
        let mut aw = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        aw[i][j] += r[i][k] * a[k][l] * r[j][l];
                    }
                }
            }
        }
        let bw = [
            r[0][0] * b[0] + r[0][1] * b[1],
            r[1][0] * b[0] + r[1][1] * b[1],
        ];
        Ok(Polynomial::quadratic(aw, bw, c(0, 0)))
    }
}

/// Harmonic polynomials of degree <= 3 in 2D:
/// `1, x, y, x²−y², xy, x³−3xy², 3x²y−y³`, as coefficient vectors over
/// [`monomials`]`(2, 3)`.
pub fn harmonic_cubic_basis() -> Vec<Vec<f64>> {
    let mons = monomials(2, 3);
    let vec_of = |terms: &[((i32, i32), f64)]| {
        let mut v = vec![0.0; mons.len()];
        for &(m, c) in terms {
            v[mons.iter().position(|&x| x == m).unwrap()] = c;
        }
        v
    };
    vec![
        vec_of(&[((0, 0), 1.0)]),
        vec_of(&[((1, 0), 1.0)]),
        vec_of(&[((0, 1), 1.0)]),
        vec_of(&[((2, 0), 1.0), ((0, 2), -1.0)]),
        vec_of(&[((1, 1), 1.0)]),
        vec_of(&[((3, 0), 1.0), ((1, 2), -3.0)]),
        vec_of(&[((2, 1), 3.0), ((0, 3), -1.0)]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(2, 2).len(), 6);
        assert_eq!(monomials(2, 3).len(), 10);
        assert_eq!(monomials(1, 3).len(), 4);
    }

    #[test]
    fn harmonic_basis_is_harmonic() {
        for c in harmonic_cubic_basis() {
            let p = Polynomial::new(2, 3, [0.0; 2], c).unwrap();
            for pt in [[0.3, -0.7], [1.2, 0.4]] {
                assert!(p.laplacian(&pt).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_matches_pointwise() {
        let p = Polynomial::quadratic([[0.25, 0.1], [0.1, 0.75]], [0.3, -0.2], 0.0);
        let t = 0.7;
        let q = p.rotated(t).unwrap();
        let (s, c) = t.sin_cos();
        for pt in [[0.3, -0.7], [1.2, 0.4]] {
            let local = [c * pt[0] + s * pt[1], -s * pt[0] + c * pt[1]];
            assert!((q.eval(&pt) - p.eval(&local)).abs() < 1e-14);
        }
        assert!((q.laplacian(&[0.0, 0.0]) - 2.0).abs() < 1e-14);
    }
}
