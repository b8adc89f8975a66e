//! Quadrature on reference simplices.
//!
//! The reference `d`-simplex has vertices at the origin and the unit
//! vectors, so its measure is `1/d!`. Points are stored as barycentric
//! coordinates `(1 - sum(xi), xi_1, ..., xi_d)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dim: usize,
    /// Polynomial degree integrated exactly.
    pub order: usize,
    /// Barycentric coordinates, `dim + 1` per point.
    pub lambdas: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn lambda(&self, q: usize) -> &[f64] {
        let n = self.dim + 1;
        &self.lambdas[q * n..(q + 1) * n]
    }

    pub fn reference_measure(&self) -> f64 {
        1.0 / (1..=self.dim).product::<usize>() as f64
    }

    fn from_xi(dim: usize, order: usize, pts: &[Vec<f64>], weights: Vec<f64>) -> Self {
        let mut lambdas = Vec::with_capacity(pts.len() * (dim + 1));
        for xi in pts {
            lambdas.push(1.0 - xi.iter().sum::<f64>());
            lambdas.extend_from_slice(xi);
        }
        QuadratureRule { dim, order, lambdas, weights }
    }

    fn from_orbits(dim: usize, order: usize, orbits: &[(Vec<f64>, f64)]) -> Self {
        // every distinct permutation of each barycentric orbit
        let scale = 1.0 / (1..=dim).product::<usize>() as f64;
        let mut lambdas = Vec::new();
        let mut weights = Vec::new();
        for (orbit, w) in orbits {
            let mut perms: Vec<Vec<f64>> = Vec::new();
            permute(&mut orbit.clone(), 0, &mut perms);
            perms.sort_by(|a, b| a.partial_cmp(b).unwrap());
            perms.dedup();
            for p in perms {
                lambdas.extend_from_slice(&p);
                weights.push(w * scale);
            }
        }
        QuadratureRule { dim, order, lambdas, weights }
    }
}

fn permute(v: &mut Vec<f64>, k: usize, out: &mut Vec<Vec<f64>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, out);
        v.swap(k, i);
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, refined by Newton on P_n
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Tensor Gauss rule pulled back through the collapsed (Duffy) map.
pub fn collapsed_rule(dim: usize, order: usize) -> QuadratureRule {
    let n = (order + dim).div_ceil(2).max(1);
    let (g, gw) = gauss_legendre(n);
    let mut pts = Vec::new();
    let mut weights = Vec::new();
    match dim {
        1 => {
            for i in 0..n {
                pts.push(vec![g[i]]);
                weights.push(gw[i]);
            }
        }
        2 => {
            for i in 0..n {
                for j in 0..n {
                    let (u, v) = (g[i], g[j]);
                    pts.push(vec![u, (1.0 - u) * v]);
                    weights.push(gw[i] * gw[j] * (1.0 - u));
                }
            }
        }
        _ => {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let (u, v, s) = (g[i], g[j], g[k]);
                        pts.push(vec![u, (1.0 - u) * v, (1.0 - u) * (1.0 - v) * s]);
                        weights.push(gw[i] * gw[j] * gw[k] * (1.0 - u).powi(2) * (1.0 - v));
                    }
                }
            }
        }
    }
    QuadratureRule::from_xi(dim, order, &pts, weights)
}

/// Rule of at least the requested order on the reference `dim`-simplex.
pub fn simplex_rule(dim: usize, order: usize) -> Result<QuadratureRule> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!("no quadrature for dimension {dim}")));
    }
    let third = 1.0 / 3.0;
    Ok(match (dim, order) {
        (2, 0 | 1) => QuadratureRule::from_orbits(2, 1, &[(vec![third; 3], 1.0)]),
        (2, 2) => QuadratureRule::from_orbits(2, 2, &[(vec![2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], third)]),
        (2, 3 | 4) => QuadratureRule::from_orbits(
            2,
            4,
            &[
                (vec![0.108103018168070, 0.445948490915965, 0.445948490915965], 0.223381589678011),
                (vec![0.816847572980459, 0.091576213509771, 0.091576213509771], 0.109951743655322),
            ],
        ),
        (2, 5) => QuadratureRule::from_orbits(
            2,
            5,
            &[
                (vec![third; 3], 0.225),
                (vec![0.059715871789770, 0.470142064105115, 0.470142064105115], 0.132394152788506),
                (vec![0.797426985353087, 0.101286507323456, 0.101286507323456], 0.125939180544827),
            ],
        ),
        (3, 0 | 1) => QuadratureRule::from_orbits(3, 1, &[(vec![0.25; 4], 1.0)]),
        (3, 2) => {
            let a = 0.5854101966249685;
            let b = 0.1381966011250105;
            QuadratureRule::from_orbits(3, 2, &[(vec![a, b, b, b], 0.25)])
        }
        _ => collapsed_rule(dim, order),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    fn integrate(rule: &QuadratureRule, exps: &[u32]) -> f64 {
        (0..rule.len())
            .map(|q| {
                let l = rule.lambda(q);
                rule.weights[q] * exps.iter().enumerate().map(|(d, &e)| l[d + 1].powi(e as i32)).product::<f64>()
            })
            .sum()
    }

    /// Closed form of the monomial integral over the reference simplex.
    fn exact(exps: &[u32]) -> f64 {
        let s: u32 = exps.iter().sum();
        exps.iter().map(|&e| factorial(e)).product::<f64>() / factorial(s + exps.len() as u32)
    }

    #[test]
    fn monomials_are_exact() {
        for dim in 1..=3 {
            for order in 0..=9 {
                let rule = simplex_rule(dim, order).unwrap();
                assert!(rule.order >= order);
                assert!(rule.weights.iter().all(|&w| w > 0.0));
                let mut exps = vec![0u32; dim];
                loop {
                    if exps.iter().sum::<u32>() as usize <= order {
                        let got = integrate(&rule, &exps);
                        let want = exact(&exps);
                        assert!(
                            (got - want).abs() < 1e-13 * want.max(1.0),
                            "dim {dim} order {order} exps {exps:?}: {got} vs {want}"
                        );
                    }
                    let mut d = 0;
                    while d < dim {
                        exps[d] += 1;
                        if exps[d] as usize <= order {
                            break;
                        }
                        exps[d] = 0;
                        d += 1;
                    }
                    if d == dim {
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn barycentrics_sum_to_one_and_lie_inside() {
        for dim in 1..=3 {
            for order in [1, 2, 5, 8] {
                let rule = simplex_rule(dim, order).unwrap();
                for q in 0..rule.len() {
                    let l = rule.lambda(q);
                    assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                    assert!(l.iter().all(|&x| x > 0.0));
                }
            }
        }
    }

    #[test]
    fn dedicated_rule_sizes() {
        assert_eq!(simplex_rule(2, 5).unwrap().len(), 7);
        assert_eq!(simplex_rule(2, 4).unwrap().len(), 6);
        assert_eq!(simplex_rule(3, 2).unwrap().len(), 4);
    }

    #[test]
    fn gauss_legendre_low_orders() {
        let (x, w) = gauss_legendre(1);
        assert!((x[0] - 0.5).abs() < 1e-15 && (w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(2);
        let r = 0.5 / 3f64.sqrt();
        let mut xs = x.clone();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] - (0.5 - r)).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
