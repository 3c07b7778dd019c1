//! Numerical building blocks shared by the physics modules.

mod matrix;
mod quadrature;
mod special;

pub use matrix::{congruence_transform, sym_invert, SymMatrix, MAX_DIM};
pub use quadrature::{
    gauss_legendre, make_gauss_sphere, sphere_integrate, SphereNode, SphereQuadrature,
    DEFAULT_N_PHI, DEFAULT_N_THETA,
};
pub use special::{exp_integral_e1, scaled_exp_integral_e1, EULER_GAMMA};

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
