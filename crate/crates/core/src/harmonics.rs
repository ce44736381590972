//! Real spherical harmonics as Cartesian polynomials on `ℝ³`.
//!
//! Only the restriction to the unit sphere matters; derivatives along the
//! sphere follow from the chain rule through any polynomial extension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 4;

/// Sparse polynomial in `(x, y, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CartesianPoly {
    pub terms: Vec<(f64, [u32; 3])>,
}

fn powi(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

impl CartesianPoly {
    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.terms.iter().map(|&(c, e)| c * powi(p[0], e[0]) * powi(p[1], e[1]) * powi(p[2], e[2])).sum()
    }

    pub fn gradient(&self, p: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for &(c, e) in &self.terms {
            for d in 0..3 {
                if e[d] == 0 {
                    continue;
                }
                let mut f = c * e[d] as f64;
                for k in 0..3 {
                    let ek = if k == d { e[k] - 1 } else { e[k] };
                    f *= powi(p[k], ek);
                }
                g[d] += f;
            }
        }
        g
    }

    pub fn hessian(&self, p: [f64; 3]) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for &(c, e) in &self.terms {
            for a in 0..3 {
                for b in a..3 {
                    let mut ex = e;
                    let mut f = c;
                    if ex[a] == 0 {
                        continue;
                    }
                    f *= ex[a] as f64;
                    ex[a] -= 1;
                    if ex[b] == 0 {
                        continue;
                    }
                    f *= ex[b] as f64;
                    ex[b] -= 1;
                    let v = f * powi(p[0], ex[0]) * powi(p[1], ex[1]) * powi(p[2], ex[2]);
                    h[a][b] += v;
                    if a != b {
                        h[b][a] += v;
                    }
                }
            }
        }
        h
    }

    fn scale(mut self, s: f64) -> Self {
        for t in &mut self.terms {
            t.0 *= s;
        }
        self
    }

    fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for &(a, ea) in &self.terms {
            for &(b, eb) in &other.terms {
                terms.push((a * b, [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]]));
            }
        }
        let mut out = Self { terms };
        out.compact();
        out
    }

    fn compact(&mut self) {
        self.terms.sort_by_key(|t| t.1);
        let mut merged: Vec<(f64, [u32; 3])> = Vec::with_capacity(self.terms.len());
        for &(c, e) in &self.terms {
            match merged.last_mut() {
                Some(last) if last.1 == e => last.0 += c,
                _ => merged.push((c, e)),
            }
        }
        merged.retain(|t| t.0 != 0.0);
        self.terms = merged;
    }
}

/// Coefficients of the Legendre polynomial `P_l` in increasing powers.
fn legendre(l: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if l == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for k in 1..l {
        // (k+1) P_{k+1} = (2k+1) z P_k − k P_{k−1}
        let mut next = vec![0.0; k + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += (2 * k + 1) as f64 * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= k as f64 * c;
        }
        for c in &mut next {
            *c /= (k + 1) as f64;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Orthonormal real spherical harmonic `Y_{l,m}` (`-l ≤ m ≤ l`, no
/// Condon–Shortley phase), `m > 0` the cosine and `m < 0` the sine family.
pub fn real_harmonic(l: usize, m: i32) -> Result<CartesianPoly> {
    if l > MAX_DEGREE || m.unsigned_abs() as usize > l {
        return Err(Error::Domain(format!(
            "spherical harmonic Y({l},{m}) outside the registry (l ≤ {MAX_DEGREE}, |m| ≤ l)"
        )));
    }
    let am = m.unsigned_abs() as usize;
    // m-th derivative of P_l in z.
    let mut p = legendre(l);
    for _ in 0..am {
        p = p.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect();
    }
    let zpart = CartesianPoly { terms: p.iter().enumerate().map(|(i, &c)| (c, [0, 0, i as u32])).collect() };
    // Re / Im of (x + i y)^m.
    let mut xy = CartesianPoly::default();
    for k in 0..=am {
        let binom = factorial(am) / (factorial(k) * factorial(am - k));
        // i^k: real for even k, imaginary for odd k.
        let (re, im) = match k % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
        let c = if m >= 0 { re } else { im };
        if c != 0.0 {
            xy.terms.push((binom * c, [(am - k) as u32, k as u32, 0]));
        }
    }
    let mut norm = ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * factorial(l - am) / factorial(l + am)).sqrt();
    if am != 0 {
        norm *= std::f64::consts::SQRT_2;
    }
    Ok(zpart.mul(&xy).scale(norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_coefficients() {
        assert_eq!(legendre(2), vec![-0.5, 0.0, 1.5]);
        let p4 = legendre(4);
        let expect = [3.0 / 8.0, 0.0, -30.0 / 8.0, 0.0, 35.0 / 8.0];
        for (a, b) in p4.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn y20_closed_form() {
        let y = real_harmonic(2, 0).unwrap();
        let c = (5.0 / (16.0 * std::f64::consts::PI)).sqrt();
        let p = [0.3, -0.4, (1.0f64 - 0.25).sqrt()];
        assert!((y.eval(p) - c * (3.0 * p[2] * p[2] - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn out_of_registry() {
        assert!(real_harmonic(5, 0).is_err());
        assert!(real_harmonic(2, 3).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let y = real_harmonic(3, -2).unwrap();
        let p = [0.2, 0.5, -0.7];
        let g = y.gradient(p);
        let h = y.hessian(p);
        let eps = 1e-5;
        for d in 0..3 {
            let mut pp = p;
            let mut pm = p;
            pp[d] += eps;
            pm[d] -= eps;
            assert!(((y.eval(pp) - y.eval(pm)) / (2.0 * eps) - g[d]).abs() < 1e-8);
            let gp = y.gradient(pp);
            let gm = y.gradient(pm);
            for e in 0..3 {
                assert!(((gp[e] - gm[e]) / (2.0 * eps) - h[d][e]).abs() < 1e-7);
            }
        }
    }
}
