//! Independent oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use faer::Mat;
use locality_core::linalg::operator_norm;
use locality_core::{Matrix, SpinModel};

/// Digits of a basis index; site 0 is the most significant.
pub fn digits(x: usize, n: usize, d: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    let mut rest = x;
    for site in (0..n).rev() {
        out[site] = rest % d;
        rest /= d;
    }
    out
}

pub fn index_of(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &v| acc * d + v)
}

/// `H` built entry by entry from the term list, without any Kronecker products.
pub fn assemble_by_index(model: &SpinModel) -> Matrix {
    let (n, d) = (model.site_count(), model.local_dim());
    let dim = d.pow(n as u32);
    let mut h = Mat::<f64>::zeros(dim, dim);
    for term in model.terms() {
        let sup = term.support();
        let m = term.matrix();
        for x in 0..dim {
            let dx = digits(x, n, d);
            let col: Vec<usize> = sup.iter().map(|&s| dx[s]).collect();
            let b = index_of(&col, d);
            for a in 0..m.nrows() {
                let local = digits(a, sup.len(), d);
                let mut dy = dx.clone();
                for (&s, &v) in sup.iter().zip(&local) {
                    dy[s] = v;
                }
                h[(index_of(&dy, d), x)] += m[(a, b)];
            }
        }
    }
    h
}

/// Diagonal of `Σ_{X ∈ terms} h_X` per basis state.
pub fn basis_energies(model: &SpinModel, terms: &[usize]) -> Vec<f64> {
    let (n, d) = (model.site_count(), model.local_dim());
    let dim = d.pow(n as u32);
    (0..dim)
        .map(|x| {
            let dx = digits(x, n, d);
            terms
                .iter()
                .map(|&t| {
                    let term = &model.terms()[t];
                    let loc: Vec<usize> = term.support().iter().map(|&s| dx[s]).collect();
                    let i = index_of(&loc, d);
                    term.matrix()[(i, i)]
                })
                .sum()
        })
        .collect()
}

/// `e^{tM}` by scaling and squaring a Taylor polynomial.
pub fn expm(m: &Matrix, t: f64) -> Matrix {
    let n = m.nrows();
    let frob = m.norm_l2() * t.abs();
    let mut squarings = 0;
    while frob / f64::powi(2.0, squarings) > 0.25 {
        squarings += 1;
    }
    let a = m * (t / f64::powi(2.0, squarings));
    let mut sum = Mat::<f64>::identity(n, n);
    let mut term = Mat::<f64>::identity(n, n);
    for l in 1..=24 {
        term = &term * &a * (1.0 / l as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `‖a − b‖ / ‖b‖` in operator norm.
pub fn relative_error(a: &Matrix, b: &Matrix) -> f64 {
    let diff = a - b;
    operator_norm(diff.as_ref()).unwrap() / operator_norm(b.as_ref()).unwrap()
}

/// Sorted eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut v: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    v.sort_by(f64::total_cmp);
    v
}
