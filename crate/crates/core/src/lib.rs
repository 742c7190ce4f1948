//! Regular amplitude-phase shift keying (RAPSK) coded modulation.
//!
//! The crate builds equidistant-ring APSK constellations with a split
//! radial/angular label, encodes them with one binary code per label bit
//! (multilevel coding) and decodes them level by level (multistage
//! decoding) with a soft demapper whose cost per bit does not depend on the
//! constellation size.
//!
//! Module map:
//!
//! * [`numerics`]: Bessel ratios, circular densities, Von Mises sampling.
//! * [`constellation`]: RAPSK and square-QAM geometry, labeling, PAPR.
//! * [`channel`]: white plus phase noise channel and the per-domain
//!   Gaussian noise models used by the demapper.
//! * [`codes`]: component codes (uncoded, repetition, IRA-style LDPC).
//! * [`mlcodec`]: the multilevel encoder and multistage decoder.
//! * [`ratedesign`]: per-level error probabilities and code rate design.
//! * [`sim`]: Monte Carlo sweeps, seeding and result emission.

pub mod channel;
pub mod codes;
pub mod constellation;
pub mod error;
pub mod mlcodec;
pub mod numerics;
pub mod ratedesign;
pub mod sim;

pub use error::{Error, Result};
