use std::f64::consts::PI;

use num_complex::Complex64;

use super::CompensatedSum;
use crate::error::{Error, Result};

pub const DEFAULT_N_THETA: usize = 64;
pub const DEFAULT_N_PHI: usize = 128;

/// One node of a product rule on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereNode {
    pub theta: f64,
    pub phi: f64,
    /// Unit vector (sinθcosφ, sinθsinφ, cosθ).
    pub dir: [f64; 3],
}

/// Gauss-Legendre in cosθ crossed with the trapezoid rule in φ.
///
/// Weights carry the solid-angle measure and sum to 4π.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    nodes: Vec<SphereNode>,
    weights: Vec<f64>,
    n_theta: usize,
    n_phi: usize,
}

impl SphereQuadrature {
    pub fn nodes(&self) -> &[SphereNode] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Iterator over `(node, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&SphereNode, f64)> + '_ {
        self.nodes.iter().zip(self.weights.iter().copied())
    }

    /// Integrates a function of the unit direction vector.
    pub fn integrate_dir<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64; 3]) -> f64,
    {
        let mut acc = CompensatedSum::default();
        for (i, (node, w)) in self.iter().enumerate() {
            let v = f(&node.dir);
            check_finite(i, node, v)?;
            acc.add(w * v);
        }
        Ok(acc.value())
    }

    /// Complex-valued counterpart of [`integrate_dir`](Self::integrate_dir).
    pub fn integrate_dir_complex<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(&[f64; 3]) -> Complex64,
    {
        let mut re = CompensatedSum::default();
        let mut im = CompensatedSum::default();
        for (i, (node, w)) in self.iter().enumerate() {
            let v = f(&node.dir);
            check_finite(i, node, v.re)?;
            check_finite(i, node, v.im)?;
            re.add(w * v.re);
            im.add(w * v.im);
        }
        Ok(Complex64::new(re.value(), im.value()))
    }
}

impl Default for SphereQuadrature {
    fn default() -> Self {
        make_gauss_sphere(DEFAULT_N_THETA, DEFAULT_N_PHI).expect("default quadrature is valid")
    }
}

fn check_finite(index: usize, node: &SphereNode, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            index,
            theta: node.theta,
            phi: node.phi,
            value,
        })
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Product rule with `n_theta` Gauss-Legendre nodes in cosθ and `n_phi`
/// equispaced nodes in φ ∈ [0, 2π).
///
/// Exact for spherical polynomials of degree < min(2·n_theta, n_phi).
pub fn make_gauss_sphere(n_theta: usize, n_phi: usize) -> Result<SphereQuadrature> {
    if n_theta < 4 {
        return Err(Error::InvalidQuadrature(format!(
            "n_theta must be at least 4, got {n_theta}"
        )));
    }
    if n_phi < 8 {
        return Err(Error::InvalidQuadrature(format!(
            "n_phi must be at least 8, got {n_phi}"
        )));
    }
    let (xs, ws) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (&ct, &wt) in xs.iter().zip(&ws) {
        let theta = ct.acos();
        let st = (1.0 - ct * ct).sqrt();
        for j in 0..n_phi {
            let phi = dphi * j as f64;
            let (sp, cp) = phi.sin_cos();
            nodes.push(SphereNode {
                theta,
                phi,
                dir: [st * cp, st * sp, ct],
            });
            weights.push(wt * dphi);
        }
    }
    Ok(SphereQuadrature {
        nodes,
        weights,
        n_theta,
        n_phi,
    })
}

/// Σᵢ wᵢ f(θᵢ, φᵢ).
pub fn sphere_integrate<F>(q: &SphereQuadrature, f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let mut acc = CompensatedSum::default();
    for (i, (node, w)) in q.iter().enumerate() {
        let v = f(node.theta, node.phi);
        check_finite(i, node, v)?;
        acc.add(w * v);
    }
    Ok(acc.value())
}
