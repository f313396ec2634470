use crate::grid::{ComplexScreen, GridSpec};
use crate::rng::SampleSeed;

/// Anything that turns a sample seed into one complex phase sample.
///
/// Precomputation happens at construction; `generate` is the Monte-Carlo
/// loop body and must be a pure function of the seed.
pub trait ScreenGenerator: Send + Sync {
    fn grid(&self) -> GridSpec;

    fn generate(&self, seed: SampleSeed) -> ComplexScreen;
}

impl<G: ScreenGenerator + ?Sized> ScreenGenerator for Box<G> {
    fn grid(&self) -> GridSpec {
        (**self).grid()
    }

    fn generate(&self, seed: SampleSeed) -> ComplexScreen {
        (**self).generate(seed)
    }
}

impl<G: ScreenGenerator + ?Sized> ScreenGenerator for &G {
    fn grid(&self) -> GridSpec {
        (**self).grid()
    }

    fn generate(&self, seed: SampleSeed) -> ComplexScreen {
        (**self).generate(seed)
    }
}
