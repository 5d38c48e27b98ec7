//! Numerical laboratory for additive bases built from polynomially bounded
//! Hardy-field functions.

pub mod basis;
pub mod circle;
pub mod dd;
pub mod function;
pub mod hk;
pub(crate) mod quad;
pub mod represent;
pub(crate) mod roots;

pub use basis::{BasisError, SequenceWindow, SumsetBitmap};
pub use dd::DoubleDouble;
pub use function::{
    classify, polynomial_part, ClassifyError, DegreeProfile, EvalError, FunctionClass, FunctionExpr, Jet, ParseError,
    Precision,
};
