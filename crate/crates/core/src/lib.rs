pub mod algebra;
pub mod chains;
pub mod constructions;
pub mod error;
pub mod field;
pub mod format;
pub mod group;
pub mod incidence;
pub mod projmaps;
pub mod schubert;
pub mod verify;

pub use error::{Error, Result};
pub use incidence::{Check, Distance, Flag, IncidenceStructure, Kind, VertexRef};
