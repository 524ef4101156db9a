use crate::geodesics::GeodesicError;
use crate::mesh::MeshError;
use crate::orientation::OrientationError;
use crate::packing::PackingError;
use crate::registration::RegistrationError;
use crate::structural::StructuralError;
use crate::templating::TemplateError;

/// Stable, machine-readable identifier for a domain error.
///
/// Codes are part of the CLI and HTTP contracts and must not change once published.
pub trait ErrorCode {
    fn code(&self) -> &'static str;
}

/// Any domain error raised by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Orientation(#[from] OrientationError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error(transparent)]
    Registration(#[from] RegistrationError),
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error(transparent)]
    Packing(#[from] PackingError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

impl ErrorCode for Error {
    fn code(&self) -> &'static str {
        match self {
            Error::Mesh(e) => e.code(),
            Error::Orientation(e) => e.code(),
            Error::Template(e) => e.code(),
            Error::Geodesic(e) => e.code(),
            Error::Registration(e) => e.code(),
            Error::Structural(e) => e.code(),
            Error::Packing(e) => e.code(),
            Error::Io { .. } => "Io",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
