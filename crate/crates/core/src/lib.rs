//! Two-stage robust optimization with budgeted right-hand-side uncertainty.
//!
//! The library models resource-allocation problems of the form
//!
//! ```text
//! min  c1'x + c2'(y_nom - y)
//! s.t. A x + B y <= g,   0 <= y <= y_nom,   x >= 0,
//! ```
//!
//! where the available amount of each resource `y_j` is uncertain inside a
//! budgeted interval set, and provides two robust counterparts:
//!
//! * the conventional counterpart, which protects against deviations over the
//!   full interval `[y_low, y_up]` under a deviation budget `Gamma`, and
//! * a two-stage *effective budget* counterpart, which first computes the
//!   admissible sub-box the constraint system can actually absorb and then
//!   protects only against deviations inside that sub-box under a rescaled
//!   budget `Gamma_eff`.
//!
//! Everything is solved with the bundled dense-tableau simplex ([`lp`]), so
//! results are deterministic and free of external solver dependencies.
//!
//! Module map:
//!
//! * [`lp`]: linear and mixed-integer programming (two-phase simplex,
//!   branch and bound, feasibility checks, MPS export).
//! * [`robust`]: nominal model, conventional robust counterpart, worst-case
//!   inner maximization, instance I/O.
//! * [`effective`]: stage-1 admissible intervals, coordinate classification,
//!   effective budget parameters, stage-2 model.
//! * [`ellipsoid`]: budgeted ellipsoidal uncertainty and its effective
//!   counterpart via cutting planes.
//! * [`apps`]: power-dispatch, patient-admission, and inventory models.
//! * [`sim`]: scenario sampling and out-of-sample cost-regret evaluation.

pub mod apps;
pub mod effective;
pub mod ellipsoid;
mod error;
pub mod lp;
pub mod robust;
pub mod sim;

pub use effective::{AdmissibleInterval, Case, EffectiveParams};
pub use ellipsoid::{
    bounding_box, classify_ellipsoid, effective_ellipsoid, solve_ellipsoid, BudgetedEllipsoid,
    EffectiveEllipsoid, EllipsoidCase, EllipsoidPipeline, EllipsoidSpec,
};
pub use error::{Error, Result};
pub use lp::{
    Constraint, FeasibilityReport, LinearProgram, LpSolution, MixedProgram, Relation, SolveOptions,
    SolveStatus, VarBounds,
};
pub use robust::{BudgetGroup, BudgetSpec, ModelVariant, NominalInstance, RobustSolution};
