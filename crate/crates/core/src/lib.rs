//! Exact computations for free generalized vertex algebras and their modules:
//! monomial bases, normal forms of mode monomials, fermionic characters, and
//! verifiers for the exact sequences and character identities relating them.

pub mod arith;
pub mod basis;
pub mod error;
pub mod exactseq;
pub mod identities;
pub mod linalg;
pub mod module;
pub mod report;
pub mod rewriter;
pub mod series;

pub use arith::{gen_binom, Rat, ScaledExponent};
pub use basis::{branching_vectors, char_closed_form, char_from_basis, enumerate_basis, Basis, BigradedTable};
pub use error::{Error, Result};
pub use exactseq::{verify_fibonacci, verify_flag, verify_rr_ef, verify_rr_finite, verify_rr_free};
pub use identities::{
    check_dual_char, check_ef_chars, check_enumeration, check_fib_recursions, check_lattice_decomposition,
    check_rr_recursion, check_switching, check_switching_p2, Sides,
};
pub use linalg::Echelon;
pub use module::{Family, ModuleSpec, Norm};
pub use report::{Comparison, PieceReport, Report, Verdict};
pub use rewriter::{parse_monomial, quotient_reduce, straighten_pair, LinComb, Rewriter};
pub use series::{
    f_g_series, fib_poly, lattice_char, q_binomial, q_pochhammer_inv, series_eq, BiSeries, EqReport, QPoly, ZWindow,
};
