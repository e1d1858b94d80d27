//! Seeded random polynomials and forms for property checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::Chart;
use crate::exterior::DifferentialForm;
use crate::symexpr::{integer, Expr};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn coefficient(&mut self) -> i64 {
        let c = self.rng.gen_range(1..=5);
        if self.rng.gen_bool(0.5) {
            -c
        } else {
            c
        }
    }

    pub fn real(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn index(&mut self, below: usize) -> usize {
        self.rng.gen_range(0..below)
    }

    /// Sum of up to `max_terms` monomials of total degree at most
    /// `max_degree` in variables `0..vars`, integer coefficients in `±[1, 5]`.
    pub fn polynomial(&mut self, vars: usize, max_degree: u32, max_terms: usize) -> Expr {
        let terms = self.rng.gen_range(1..=max_terms);
        let mut out = Expr::zero();
        for _ in 0..terms {
            let degree = self.rng.gen_range(0..=max_degree);
            let mut m = Expr::int(self.coefficient());
            for _ in 0..degree {
                m = &m * &Expr::var(self.index(vars));
            }
            out += m;
        }
        out
    }

    /// Dense quadratic `Σ c_jk x_j x_k + Σ c_j x_j`, each coefficient present
    /// with probability one half.
    pub fn quadratic(&mut self, vars: usize) -> Expr {
        let mut out = Expr::zero();
        for j in 0..vars {
            for k in j..vars {
                if self.rng.gen_bool(0.5) {
                    out += (&Expr::var(j) * &Expr::var(k)).scale(&integer(self.coefficient()));
                }
            }
            if self.rng.gen_bool(0.5) {
                out += Expr::var(j).scale(&integer(self.coefficient()));
            }
        }
        out
    }

    /// A `degree`-form with up to `max_terms` basis terms and polynomial
    /// coefficients over the chart coordinates.
    pub fn form(
        &mut self,
        chart: Chart,
        degree: usize,
        max_terms: usize,
        poly_degree: u32,
    ) -> DifferentialForm {
        let dim = chart.dim();
        let mut out = DifferentialForm::zero(chart, degree);
        let terms = self.rng.gen_range(1..=max_terms);
        let all: Vec<usize> = (0..dim).collect();
        for _ in 0..terms {
            let idx: Vec<usize> = all
                .choose_multiple(&mut self.rng, degree)
                .copied()
                .collect();
            let coeff = self.polynomial(dim, poly_degree, 3);
            let basis = DifferentialForm::basis(chart, &idx).expect("distinct indices in range");
            out = out.add(&basis.scale(&coeff)).expect("same chart");
        }
        out
    }
}
