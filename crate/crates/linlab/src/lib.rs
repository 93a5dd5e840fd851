//! Poincaré linearizers of planar polynomial maps at repelling fixed points.
//!
//! The library constructs the linearizer L solving f(L(z)) = L(lambda z),
//! evaluates it at arguments from tiny to astronomically large through the
//! functional equation, estimates orders of growth, and examines the
//! geometry of the fast escaping set (separating continua, spider's-web
//! verification, escape-classification rendering, pits-effect witnesses).
//!
//! Modules:
//! * [`extrange`] — log-polar complex values and tower magnitudes.
//! * [`maps`] — polynomials, fixed/periodic points, exceptional values,
//!   quasiregular power maps, closed-form oracle linearizers.
//! * [`linearizer`] — Koenigs construction and extended-range evaluation.
//! * [`growth`] — maximum modulus, order estimation, growth-bound checks,
//!   min-modulus continua.
//! * [`websets`] — fast-escaping classification, spider's-web verification,
//!   rendering, pits-effect witnesses.
//! * [`cli`] — config parsing and artifact-writing dispatch.

pub mod cli;
pub mod extrange;
pub mod growth;
pub mod linearizer;
pub mod maps;
pub mod websets;

pub use extrange::{LogPolar, LpValue, TowerMagnitude, TruncationBound};
pub use linearizer::LinearizerHandle;
pub use maps::{FixedPointData, PolynomialMap, QRPowerMap};
