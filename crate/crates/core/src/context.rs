//! Per-computation settings: truncation levels, seed and cooperative cancellation.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MflabError, Result};

pub const DEFAULT_TRUNC: usize = 12;
pub const DEFAULT_SEED: u64 = 42;

/// Truncation degree `trunc` and the lower degree `cutoff` below which coordinates are
/// trusted when comparing spaces of homomorphisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Precision {
    pub trunc: usize,
    pub cutoff: usize,
}

impl Precision {
    pub fn new(trunc: usize) -> Self {
        Precision {
            trunc,
            cutoff: trunc / 2 + 1,
        }
    }

    /// The level used to certify a value computed at `self`.
    pub fn next(&self) -> Self {
        Precision {
            trunc: self.trunc + 2,
            cutoff: self.cutoff + 1,
        }
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::new(DEFAULT_TRUNC)
    }
}

#[derive(Clone, Debug)]
pub struct Context {
    pub precision: Precision,
    pub seed: u64,
    cancel: Arc<AtomicBool>,
}

impl Default for Context {
    fn default() -> Self {
        Context::new(DEFAULT_TRUNC, DEFAULT_SEED)
    }
}

impl Context {
    pub fn new(trunc: usize, seed: u64) -> Self {
        Context {
            precision: Precision::new(trunc),
            seed,
            cancel: Arc::new(AtomicBool::new(false)),
        }
    }

    pub fn with_precision(&self, precision: Precision) -> Self {
        Context {
            precision,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Context { seed, ..self.clone() }
    }

    pub fn trunc(&self) -> usize {
        self.precision.trunc
    }

    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    /// Token shared by every clone of this context.
    pub fn cancel_token(&self) -> Arc<AtomicBool> {
        self.cancel.clone()
    }

    pub fn cancel(&self) {
        self.cancel.store(true, Ordering::Relaxed);
    }

    pub fn check(&self) -> Result<()> {
        if self.cancel.load(Ordering::Relaxed) {
            Err(MflabError::Cancelled)
        } else {
            Ok(())
        }
    }
}
