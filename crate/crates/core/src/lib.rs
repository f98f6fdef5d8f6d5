pub mod counting;
pub mod entropy;
pub mod error;
pub mod flat;
pub mod fuchsian;
pub mod group;
pub mod patterson_sullivan;
pub mod plane;
pub mod space;
pub mod stats;
pub mod traveling;
pub mod tree;

pub use error::{GeomError, Result};
pub use group::Group;
pub use space::{Backend, BoundaryPoint, GeodesicPath, HyperbolicityConstant, Space, SpacePoint};
