//! Closed-form side: Fourier and twin-lemma identities, the row-removal
//! recurrence, the Fateev-Litvinov constant and verification drivers.

pub mod closed_form;
pub mod fourier;
pub mod recurrence;
pub mod verify;
pub mod twin;

use thiserror::Error;

use crate::df_core::DfError;
use crate::integrators::IntegrationError;
use crate::lie_data::LieError;
use crate::special_functions::SpecialError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdentityError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("pole in {0}")]
    Pole(String),
    #[error("exponents outside the window where the identity holds")]
    OutsideWindow,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("recurrence cannot be applied: every screening number must be at least 1")]
    CannotApply,
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Df(#[from] DfError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}
