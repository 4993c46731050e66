//! Deterministic image augmentation built around a convolutional
//! diamond-square plasma generator.
//!
//! The crate is organised bottom-up:
//!
//! * [`rng`]: counter-based random streams so every draw is reproducible.
//! * [`grid`] and [`plasma`]: the scalar raster and the diamond-square
//!   generator (plus a sparse reference implementation in [`plasma::oracle`]).
//! * [`field`]: images, masks, points, sampling fields and bilinear remapping.
//! * [`ops`]: the augmentation catalog, split into dorsal (pixel) and
//!   ventral (geometric) operations.
//! * [`graph`]: seeded flow networks of operations (cascade, choice, identity).
//! * [`dsl`]: the `^` / `|` pipeline language compiled into graphs.
//! * [`io`]: PNG and CSV exchange formats.

pub mod dsl;
pub mod error;
pub mod field;
pub mod graph;
pub mod grid;
pub mod io;
pub mod ops;
pub mod plasma;
pub mod presets;
pub mod rng;

pub use error::{Error, Result};
pub use field::{ImageF, MaskF, PointSet, SampleBundle, SamplingField};
pub use graph::{AppliedParams, AugNode, DistSpec, NodeKind};
pub use grid::Grid2D;
pub use plasma::PlasmaParams;
pub use rng::RandSource;
