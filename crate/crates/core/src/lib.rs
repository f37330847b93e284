//! Knitting of Auslander-Reiten quivers for rings of finite MCM type.
//!
//! A [`TranslationQuiver`] stores the AR quiver with its translate. The
//! [`ladder`] module computes minimal right add(M)-approximations on it,
//! [`resolution`] splices these into projective resolutions of the simples of
//! End_R(M), and [`spectrum`] enumerates global dimensions over every basic
//! module. Everything works on Grothendieck-group vectors only.

pub mod catalog;
pub mod cli;
pub mod ladder;
pub mod quiver;
pub mod resolution;
pub mod spectrum;

pub use catalog::{a_even_curve, a_odd_curve, cyclic_surface, load_fixture, CatalogError};
pub use ladder::{knit, Approximation, Budgets, CoverLevel, KnitError, Status};
pub use quiver::{
    insert_formal_zero, parse_quiver, validate, ModuleVector, QuiverError, TranslationQuiver,
    VertexId, VertexKind, VertexSet, Violation,
};
pub use resolution::{global_dimension, resolve_simple, GlobalDimension, Resolution, ResolutionStatus};
pub use spectrum::{enumerate_spectrum, spectrum_support, SpectrumOptions, SpectrumReport};
