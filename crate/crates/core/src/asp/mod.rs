//! Normal logic programs under the stable-model semantics.

mod ground;
mod parser;
mod solve;
mod syntax;

pub use ground::ground;
pub use parser::{check_program, parse_program, ParseError};
pub use solve::{
    derivation, explain_violations, is_satisfiable, is_stable, minimal_model, reduct, solve_ground, stable_models,
    ConstraintViolation, LeastModel, PositiveProgram, SolveResult, StableModel,
};
pub use syntax::{Atom, Constant, GroundAtom, GroundProgram, GroundRule, Program, Rule, Term};
