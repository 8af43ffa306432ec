//! Simplicial higher abelian gauge theory on `Diff^p`: actions and
//! observables as functions of character coordinates, Riemann theta sums,
//! torus zero modes, Gaussian integrals over the coexact slab, and the
//! partition function with an independent brute-force evaluation.

mod fourier;
mod oracle;
mod partition;
mod theta;

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::characters::{CharacterCoords, CharacterModel};
use crate::linalg::inner;
use crate::{Error, Result};

pub use fourier::{complex_zero_mode, fourier_zero_mode, torus_grid, ZeroMode};
pub use oracle::{partition_oracle, OracleOptions, OracleResult};
pub use partition::{
    gaussian_integral_im_delta, log_prefactor, partition_function, partition_function_base, telescoping_residual, ClassTerm,
    GaussianIntegral, PartitionResult, PrefactorTerm, Truncation, TruncationReport,
};
pub use theta::{
    im_min_eigenvalue, lattice_window, theta, theta_fixed, theta_radius, theta_tail_bound, theta_with_characteristic, times_i, CMat,
    ThetaValue, MAX_THETA_TERMS, THETA_TOLERANCE,
};

/// A real function of a character.
pub type CharacterFn = fn(&CharacterModel, &CharacterCoords) -> f64;

#[derive(Clone, Copy, Debug)]
pub enum ActionKind {
    /// `S = ⟨δ₁, δ₁⟩ / 2g²`.
    Maxwell,
    Custom(CharacterFn),
}

#[derive(Clone, Copy, Debug)]
pub struct ActionSpec {
    pub kind: ActionKind,
    /// `g²`.
    pub coupling: f64,
}

impl ActionSpec {
    pub fn maxwell(coupling: f64) -> Result<Self> {
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(Error::InvalidInput("coupling must be positive".into()));
        }
        Ok(Self { kind: ActionKind::Maxwell, coupling })
    }

    pub fn is_maxwell(&self) -> bool {
        matches!(self.kind, ActionKind::Maxwell)
    }

    pub fn evaluate(&self, model: &CharacterModel, ch: &CharacterCoords) -> f64 {
        match self.kind {
            ActionKind::Maxwell => {
                let p = model.degree();
                let cs = model.triangulation();
                if p == cs.dim() {
                    return 0.0;
                }
                let w = model.delta1(ch);
                inner(cs.hodge().gram(p + 1), &w, &w) / (2.0 * self.coupling)
            }
            ActionKind::Custom(f) => f(model, ch),
        }
    }
}

impl Default for ActionSpec {
    fn default() -> Self {
        Self { kind: ActionKind::Maxwell, coupling: 1.0 }
    }
}

#[derive(Clone, Debug)]
pub enum ObservableSpec {
    Constant,
    /// `exp(2πi q f(α))` for an integer `p`-cycle `α` of `L′`.
    Wilson {
        cycle: Vec<i64>,
        charge: i64,
    },
    Custom(CharacterFn),
}

impl ObservableSpec {
    /// Wilson loops of charge zero become the constant observable.
    pub fn normalized(&self) -> Self {
        match self {
            Self::Wilson { charge: 0, .. } => Self::Constant,
            other => other.clone(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Constant => "const".into(),
            Self::Wilson { charge, .. } => alloc::format!("wilson:q={charge}"),
            Self::Custom(_) => "custom".into(),
        }
    }

    /// Complex value; the real observable is its real part.
    pub fn evaluate_complex(&self, model: &CharacterModel, ch: &CharacterCoords) -> Result<Complex64> {
        Ok(match self {
            Self::Constant => Complex64::new(1.0, 0.0),
            Self::Wilson { cycle, charge } => {
                let f = model.evaluate(ch, cycle)?;
                Complex64::from_polar(1.0, 2.0 * core::f64::consts::PI * *charge as f64 * f)
            }
            Self::Custom(f) => Complex64::new(f(model, ch), 0.0),
        })
    }

    pub fn evaluate(&self, model: &CharacterModel, ch: &CharacterCoords) -> Result<f64> {
        self.evaluate_complex(model, ch).map(|z| z.re)
    }
}

/// Largest change of the action over `samples` random torus points at
/// fixed `(τ, c)`.
pub fn gauge_invariance_residual<R: Rng + ?Sized>(
    action: &ActionSpec,
    model: &CharacterModel,
    ch: &CharacterCoords,
    rng: &mut R,
    samples: usize,
) -> f64 {
    let s0 = action.evaluate(model, ch);
    (0..samples)
        .map(|_| {
            let z = (0..model.torus_dim()).map(|_| rng.random::<f64>()).collect();
            (action.evaluate(model, &CharacterCoords { z, ..ch.clone() }) - s0).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::CsTriangulation;
    use crate::complex::fixtures;
    use crate::hodge::HodgeOptions;
    use alloc::sync::Arc;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn maxwell_action_ignores_the_torus() {
        let cs = Arc::new(CsTriangulation::perturbed(Arc::new(fixtures::torus7()), 2, 0.25, HodgeOptions::default()).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in 0..2 {
            let m = CharacterModel::new(cs.clone(), p).unwrap();
            let a = ActionSpec::maxwell(0.7).unwrap();
            for _ in 0..5 {
                let ch = m.random(&mut rng, 1.0);
                assert!(a.evaluate(&m, &ch) >= 0.0);
                assert!(gauge_invariance_residual(&a, &m, &ch, &mut rng, 100) <= 1e-12);
            }
        }
    }

    #[test]
    fn wilson_of_charge_zero_is_constant() {
        let w = ObservableSpec::Wilson { cycle: alloc::vec![1, 0], charge: 0 };
        assert!(matches!(w.normalized(), ObservableSpec::Constant));
        assert!(ActionSpec::maxwell(0.0).is_err());
    }
}
