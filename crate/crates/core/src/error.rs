use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::DomainError;
use crate::invertibility::InvertError;
use crate::linearization::LinearizationError;
use crate::matrixeval::EvalError;
use crate::ncpoly::PolyError;
use crate::parser::ParseError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Linearization(#[from] LinearizationError),
    #[error(transparent)]
    Invert(#[from] InvertError),
}

/// Stable machine-readable error identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    ParseError,
    ShapeMismatch,
    InvalidInput,
    NonFinite,
    IllConditioned,
    InvalidDomain,
    DomainUnsatisfiable,
    SylvesterNearSingular,
    ResidualTooLarge,
    ZeroDirection,
    WitnessResidual,
    CollisionNotCertified,
    ImagesDiffer,
    IdenticalPoints,
    NotSquareMap,
    ConstantTerm,
    SingularLinearPart,
    SingularDerivative,
    MaxIterations,
    Io,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::ParseError => "parse_error",
            ErrorCode::ShapeMismatch => "shape_mismatch",
            ErrorCode::InvalidInput => "invalid_input",
            ErrorCode::NonFinite => "non_finite",
            ErrorCode::IllConditioned => "ill_conditioned",
            ErrorCode::InvalidDomain => "invalid_domain",
            ErrorCode::DomainUnsatisfiable => "domain_unsatisfiable",
            ErrorCode::SylvesterNearSingular => "sylvester_near_singular",
            ErrorCode::ResidualTooLarge => "residual_too_large",
            ErrorCode::ZeroDirection => "zero_direction",
            ErrorCode::WitnessResidual => "witness_residual",
            ErrorCode::CollisionNotCertified => "collision_not_certified",
            ErrorCode::ImagesDiffer => "images_differ",
            ErrorCode::IdenticalPoints => "identical_points",
            ErrorCode::NotSquareMap => "not_square_map",
            ErrorCode::ConstantTerm => "constant_term",
            ErrorCode::SingularLinearPart => "singular_linear_part",
            ErrorCode::SingularDerivative => "singular_derivative",
            ErrorCode::MaxIterations => "max_iterations",
            ErrorCode::Io => "io",
        }
    }
}

impl std::fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn poly_code(_: &PolyError) -> ErrorCode {
    ErrorCode::ShapeMismatch
}

fn domain_code(_: &DomainError) -> ErrorCode {
    ErrorCode::InvalidDomain
}

fn eval_code(e: &EvalError) -> ErrorCode {
    match e {
        EvalError::NonFinite { .. } => ErrorCode::NonFinite,
        EvalError::IllConditioned { .. } => ErrorCode::IllConditioned,
        EvalError::InvalidConfig(_) => ErrorCode::InvalidInput,
        EvalError::Domain(d) => domain_code(d),
        EvalError::DomainUnsatisfiable { .. } => ErrorCode::DomainUnsatisfiable,
        _ => ErrorCode::ShapeMismatch,
    }
}

fn linearization_code(e: &LinearizationError) -> ErrorCode {
    match e {
        LinearizationError::Eval(e) => eval_code(e),
        LinearizationError::Shape(_) => ErrorCode::ShapeMismatch,
        LinearizationError::NearSingular { .. } => ErrorCode::SylvesterNearSingular,
        LinearizationError::ResidualTooLarge { .. } => ErrorCode::ResidualTooLarge,
    }
}

impl Error {
    pub fn code(&self) -> ErrorCode {
        match self {
            Error::Poly(e) => poly_code(e),
            Error::Parse(_) => ErrorCode::ParseError,
            Error::Eval(e) => eval_code(e),
            Error::Domain(e) => domain_code(e),
            Error::Linearization(e) => linearization_code(e),
            Error::Invert(e) => match e {
                InvertError::Eval(e) => eval_code(e),
                InvertError::Poly(e) => poly_code(e),
                InvertError::Linearization(e) => linearization_code(e),
                InvertError::ZeroDirection => ErrorCode::ZeroDirection,
                InvertError::WitnessResidual { .. } => ErrorCode::WitnessResidual,
                InvertError::CollisionNotCertified { .. } => ErrorCode::CollisionNotCertified,
                InvertError::ImagesDiffer { .. } => ErrorCode::ImagesDiffer,
                InvertError::IdenticalPoints { .. } => ErrorCode::IdenticalPoints,
                InvertError::NotSquareMap { .. } => ErrorCode::NotSquareMap,
                InvertError::ConstantTerm { .. } => ErrorCode::ConstantTerm,
                InvertError::SingularLinearPart { .. } => ErrorCode::SingularLinearPart,
                InvertError::SingularDerivative { .. } => ErrorCode::SingularDerivative,
                InvertError::MaxIterations { .. } => ErrorCode::MaxIterations,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_match_serde_names() {
        for code in [ErrorCode::ParseError, ErrorCode::SingularDerivative, ErrorCode::Io] {
            assert_eq!(serde_json::to_string(&code).unwrap(), format!("\"{}\"", code.as_str()));
        }
    }

    #[test]
    fn nested_codes() {
        let e: Error = InvertError::Eval(EvalError::NonFinite { index: 0 }).into();
        assert_eq!(e.code(), ErrorCode::NonFinite);
        let e: Error = crate::parser::parse_map("vars X; (").unwrap_err().into();
        assert_eq!(e.code(), ErrorCode::ParseError);
    }
}
