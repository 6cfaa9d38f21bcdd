//! Counter-based random streams.
//!
//! Every random draw in a run is addressed by
//! `(master seed, domain, node, iteration, draw index)` and is a pure
//! function of that address: no hidden state, so identical addresses give
//! bitwise identical draws on every platform, draws commute with execution
//! order, and any node/iteration pair can be replayed in isolation.
//!
//! The generator is a SplitMix64-style finalizer applied to the mixed
//! address. Uniforms take the top 53 bits of the output word. Gaussians use
//! the polar rejection method, spelled out exactly so traces replay
//! bit-for-bit: draw `u, v` uniform in [-1, 1) as `2 x - 1`, form
//! `s = u^2 + v^2`, reject unless `0 < s < 1`, then return
//! `u * sqrt(-2 ln s / s)` first and `v * sqrt(-2 ln s / s)` second.

/// Address domain, separating oracle noise from problem-construction draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    /// Stochastic gradient noise during a run.
    Oracle,
    /// Data baked into a problem instance (targets, directions).
    ProblemData,
}

impl StreamDomain {
    fn tag(self) -> u64 {
        match self {
            StreamDomain::Oracle => 0x4f52_4143,
            StreamDomain::ProblemData => 0x5052_4f42,
        }
    }
}

/// Master stream for one run, identified by its seed.
#[derive(Debug, Clone, Copy)]
pub struct RngStream {
    seed: u64,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn absorb(state: u64, word: u64) -> u64 {
    mix(state ^ word.wrapping_mul(GOLDEN).wrapping_add(0x2545_f491_4f6c_dd1d))
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream positioned at one `(domain, node, iteration)` address.
    pub fn at(&self, domain: StreamDomain, node: u64, iteration: u64) -> DrawStream {
        let mut key = mix(self.seed ^ GOLDEN);
        key = absorb(key, domain.tag());
        key = absorb(key, node);
        key = absorb(key, iteration);
        DrawStream {
            key,
            counter: 0,
            spare: None,
        }
    }
}

/// Sequence of draws under one address; the counter is the only state.
#[derive(Debug, Clone)]
pub struct DrawStream {
    key: u64,
    counter: u64,
    spare: Option<f64>,
}

impl DrawStream {
    pub fn next_u64(&mut self) -> u64 {
        let word = mix(self.key ^ self.counter.wrapping_mul(GOLDEN));
        self.counter += 1;
        word
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via the polar rejection method. Pairs are produced
    /// together; the second member is cached and returned by the next call.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_uniform() - 1.0;
            let v = 2.0 * self.next_uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    /// Fair sign in `{ -1.0, +1.0 }` from the top bit.
    pub fn next_sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}
