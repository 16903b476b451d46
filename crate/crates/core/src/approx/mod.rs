//! Approximation constructions: periodic and Γ_Y fold-backs, the Dirac
//! obstruction, conjugation into neighbourhoods, finite-depth extension of
//! homeomorphisms between pruned trees, and topologically free
//! perturbations.

mod conjugate;
mod extension;
mod fold;
mod obstruction;
mod perturb;

pub use conjugate::{clopen_code_bijection, conjugate_into_neighborhood, Conjugation};
pub use extension::{kr_extension, kr_matching, MatchingCertificate, PrunedTree, RemovedPiece};
pub use fold::{fold, gamma_y_approximation, periodic_approximation, s_fold, Approximation};
pub use obstruction::{dirac_obstruction_check, DiracCertificate, Witness};
pub use perturb::{topologically_free_perturbation, Perturbation};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::rational::Rational;
use crate::space::Alphabet;

fn check_inputs(k: Alphabet, measures: &[Measure], eps: &Rational) -> Result<()> {
    if *eps <= Rational::zero() {
        return Err(Error::InvalidEpsilon);
    }
    measures.iter().try_for_each(|mu| mu.check_alphabet(k))
}
