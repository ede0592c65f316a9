//! Application errors with one process exit code per class.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Cache,
    Params,
    Compute,
    Io,
    InsufficientData,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Cache => 3,
            ErrorClass::Params => 4,
            ErrorClass::Compute => 5,
            ErrorClass::Io => 6,
            ErrorClass::InsufficientData => 7,
        }
    }
}

#[derive(Debug)]
pub struct AppError {
    pub class: ErrorClass,
    pub message: String,
}

impl AppError {
    pub fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        Self { class, message: message.into() }
    }

    pub fn io(e: std::io::Error, what: impl fmt::Display) -> Self {
        Self::new(ErrorClass::Io, format!("{what}: {e}"))
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for AppError {}

impl From<kwell_core::basis::BasisError> for AppError {
    fn from(e: kwell_core::basis::BasisError) -> Self {
        Self::new(ErrorClass::Compute, format!("basis: {e}"))
    }
}

impl From<kwell_core::floquet::FloquetError> for AppError {
    fn from(e: kwell_core::floquet::FloquetError) -> Self {
        Self::new(ErrorClass::Compute, format!("floquet: {e}"))
    }
}

impl From<kwell_core::localization::LocError> for AppError {
    fn from(e: kwell_core::localization::LocError) -> Self {
        Self::new(ErrorClass::InsufficientData, format!("localization: {e}"))
    }
}

impl From<kwell_core::spectral::SpectralError> for AppError {
    fn from(e: kwell_core::spectral::SpectralError) -> Self {
        Self::new(ErrorClass::InsufficientData, format!("spectral: {e}"))
    }
}

impl From<kwell_core::tightbinding::TbError> for AppError {
    fn from(e: kwell_core::tightbinding::TbError) -> Self {
        Self::new(ErrorClass::Compute, format!("tightbinding: {e}"))
    }
}

impl From<kwell_core::classical::ClassicalError> for AppError {
    fn from(e: kwell_core::classical::ClassicalError) -> Self {
        Self::new(ErrorClass::Compute, format!("classical: {e}"))
    }
}
