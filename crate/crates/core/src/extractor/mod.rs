//! Seeded randomness extraction and input sampling.

pub mod bits;
pub mod design;
pub mod gf2;
pub mod gf2_polys;
pub mod interval;
pub mod rsh;
pub mod trevisan;

pub use bits::{BitReader, BitSource, BitString, RngBitSource};
pub use design::WeakDesign;
pub use gf2::Gf2Field;
pub use interval::{interval_sample, IntervalSampler};
pub use rsh::one_bit_extract;
pub use trevisan::{trevisan_extract, ExtractorSpec};
