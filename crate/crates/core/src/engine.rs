//! The decentralized polarized-descent iteration.
//!
//! Per iteration, in this order:
//!
//! 1. momentum:  `M' = beta M + (1 - beta) G`, gradients queried at the
//!    current iterates (the initial gradients are reused at step 0, so the
//!    first momentum update is a no-op by construction);
//! 2. tracking:  `H' = W (H + M' - M)`;
//! 3. polarize:  `S_i = msgn(H'_i)`;
//! 4. primal:    `X' = A (C X - alpha S) - B Y`;
//! 5. dual:      `Y' = Y + B X'`.
//!
//! Variants drop pieces of this: no-tracking replaces step 2 by `H' = M'`;
//! the gossip variant drops the dual pair and mixes `X - alpha S` through
//! `W` directly; the two flat baselines keep one shared iterate and either
//! average per-node polarized gradients or polarize the averaged gradient.
//!
//! Structural facts the tests lean on: the block mean of `X` follows
//! `xbar' = xbar - alpha sbar` exactly (dual contributions average to
//! zero), the tracking mean equals the momentum mean, and tracking
//! disagreement contracts by `lambda` per round.

use crate::backbone::SudaBackbone;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics;
use crate::polar::{msgn_exact, msgn_newton_schulz};
use crate::problems::Problem;
use crate::rng::RngStream;
use crate::scalar::{fl, Scalar};
use crate::stack;
use crate::tol;
use crate::topology::MixingMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Full iteration: momentum, tracking, backbone.
    SudaMuon,
    /// Tracking disabled: each node polarizes its own momentum.
    NoTracking,
    /// Gossip-only variant: tracking kept, dual pair dropped.
    DeMuon,
    /// Flat baseline: shared iterate, mean of per-node polarized gradients.
    DsgdMuon,
    /// Flat baseline: shared iterate, polarized mean gradient.
    CentralizedMuon,
}

impl Variant {
    pub fn is_flat(self) -> bool {
        matches!(self, Variant::DsgdMuon | Variant::CentralizedMuon)
    }

    pub fn uses_backbone(self) -> bool {
        matches!(self, Variant::SudaMuon | Variant::NoTracking)
    }

    pub fn mixes_tracking(self) -> bool {
        matches!(self, Variant::SudaMuon | Variant::DeMuon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsgnBackend {
    /// Polar factor from the reduced SVD.
    Exact,
    /// Quintic Newton-Schulz approximation.
    NewtonSchulz { iters: usize },
}

/// Step-size and momentum schedule. The horizon form is the theoretical
/// one: `alpha = alpha0 K^{-3/4}`, `1 - beta = b0 K^{-1/2}` for a fixed
/// iteration budget `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule<T> {
    Horizon { alpha0: T, b0: T, horizon: u64 },
    Constant { alpha: T, beta: T },
}

impl<T: Scalar> Schedule<T> {
    pub fn horizon(alpha0: T, b0: T, horizon: u64) -> Result<Self> {
        if alpha0 <= T::zero() || !alpha0.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "alpha0 must be positive, got {alpha0}"
            )));
        }
        if !(b0 > T::zero() && b0 <= T::one()) {
            return Err(Error::InvalidConfig(format!(
                "b0 must lie in (0, 1], got {b0}"
            )));
        }
        if horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        Ok(Schedule::Horizon {
            alpha0,
            b0,
            horizon,
        })
    }

    pub fn constant(alpha: T, beta: T) -> Result<Self> {
        if alpha < T::zero() || !alpha.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "alpha must be >= 0, got {alpha}"
            )));
        }
        if !(beta >= T::zero() && beta < T::one()) {
            return Err(Error::InvalidConfig(format!(
                "beta must lie in [0, 1), got {beta}"
            )));
        }
        Ok(Schedule::Constant { alpha, beta })
    }

    pub fn alpha(&self) -> T {
        match *self {
            Schedule::Horizon { alpha0, horizon, .. } => {
                alpha0 * fl::<T>(horizon as f64).powf(fl(-0.75))
            }
            Schedule::Constant { alpha, .. } => alpha,
        }
    }

    pub fn beta(&self) -> T {
        match *self {
            Schedule::Horizon { b0, horizon, .. } => {
                T::one() - b0 * fl::<T>(horizon as f64).powf(fl(-0.5))
            }
            Schedule::Constant { beta, .. } => beta,
        }
    }
}

/// Initial iterate: one shared block or explicit per-node blocks.
#[derive(Debug, Clone)]
pub enum InitIterate<T> {
    Consensus(Matrix<T>),
    PerNode(Vec<Matrix<T>>),
}

/// Full per-node state. `k` counts completed iterations.
#[derive(Debug, Clone)]
pub struct RunState<T> {
    pub x: Vec<Matrix<T>>,
    pub y: Vec<Matrix<T>>,
    pub m: Vec<Matrix<T>>,
    pub h: Vec<Matrix<T>>,
    pub k: u64,
}

pub struct Engine<'a, T> {
    problem: &'a Problem<T>,
    variant: Variant,
    backbone: Option<&'a SudaBackbone<T>>,
    mixing: Option<&'a MixingMatrix<T>>,
    schedule: Schedule<T>,
    backend: MsgnBackend,
    rng: RngStream,
}

impl<'a, T: Scalar> Engine<'a, T> {
    /// Wires a variant to its required structure and rejects mismatches:
    /// backbone variants need both a backbone and its mixing matrix, the
    /// gossip variant needs only the mixing matrix, flat baselines take
    /// neither, and all node counts must agree with the problem.
    pub fn new(
        problem: &'a Problem<T>,
        variant: Variant,
        backbone: Option<&'a SudaBackbone<T>>,
        mixing: Option<&'a MixingMatrix<T>>,
        schedule: Schedule<T>,
        backend: MsgnBackend,
        seed: u64,
    ) -> Result<Self> {
        let n = problem.n_nodes();
        if variant.uses_backbone() {
            let bk = backbone.ok_or_else(|| {
                Error::InvalidConfig(format!("{variant:?} needs a backbone"))
            })?;
            let w = mixing.ok_or_else(|| {
                Error::InvalidConfig(format!("{variant:?} needs a mixing matrix"))
            })?;
            if bk.a.rows() != n || w.n_nodes() != n {
                return Err(Error::InvalidConfig(format!(
                    "backbone/mixing size does not match {n} nodes"
                )));
            }
        } else if variant == Variant::DeMuon {
            if backbone.is_some() {
                return Err(Error::InvalidConfig(
                    "gossip variant takes no backbone".into(),
                ));
            }
            let w = mixing.ok_or_else(|| {
                Error::InvalidConfig("gossip variant needs a mixing matrix".into())
            })?;
            if w.n_nodes() != n {
                return Err(Error::InvalidConfig(format!(
                    "mixing size does not match {n} nodes"
                )));
            }
        } else {
            if backbone.is_some() || mixing.is_some() {
                return Err(Error::InvalidConfig(
                    "flat variants take neither backbone nor mixing".into(),
                ));
            }
        }
        if let MsgnBackend::NewtonSchulz { iters } = backend {
            if iters == 0 {
                return Err(Error::InvalidConfig(
                    "newton-schulz needs at least one iteration".into(),
                ));
            }
        }
        Ok(Self {
            problem,
            variant,
            backbone,
            mixing,
            schedule,
            backend,
            rng: RngStream::new(seed),
        })
    }

    pub fn problem(&self) -> &Problem<T> {
        self.problem
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn backbone(&self) -> Option<&SudaBackbone<T>> {
        self.backbone
    }

    pub fn mixing(&self) -> Option<&MixingMatrix<T>> {
        self.mixing
    }

    pub fn schedule(&self) -> &Schedule<T> {
        &self.schedule
    }

    pub fn rng(&self) -> &RngStream {
        &self.rng
    }

    /// Queries the initial gradients at the initial iterates and seeds the
    /// momentum and tracker with them; the dual starts at zero.
    pub fn init_state(&self, init: &InitIterate<T>) -> Result<RunState<T>> {
        let n = self.problem.n_nodes();
        let shape = self.problem.shape();
        let x: Vec<Matrix<T>> = match init {
            InitIterate::Consensus(b) => {
                if b.shape() != shape {
                    return Err(Error::Shape(format!(
                        "initial iterate shape {:?}, problem expects {shape:?}",
                        b.shape()
                    )));
                }
                vec![b.clone(); n]
            }
            InitIterate::PerNode(blocks) => {
                if blocks.len() != n {
                    return Err(Error::Shape(format!(
                        "{} initial blocks for {n} nodes",
                        blocks.len()
                    )));
                }
                if self.variant.is_flat() && stack::deviation_frobenius(blocks)? > T::zero() {
                    return Err(Error::InvalidConfig(
                        "flat variants keep one shared iterate; initial blocks differ".into(),
                    ));
                }
                for b in blocks {
                    if b.shape() != shape {
                        return Err(Error::Shape(format!(
                            "initial iterate shape {:?}, problem expects {shape:?}",
                            b.shape()
                        )));
                    }
                }
                blocks.clone()
            }
        };
        let mut m = Vec::with_capacity(n);
        for (i, xi) in x.iter().enumerate() {
            m.push(self.problem.sample_oracle(i, xi, 0, &self.rng)?);
        }
        let h = match self.variant {
            Variant::CentralizedMuon => vec![stack::block_mean(&m)?; n],
            _ => m.clone(),
        };
        let (rows, cols) = shape;
        Ok(RunState {
            y: vec![Matrix::zeros(rows, cols); n],
            x,
            m,
            h,
            k: 0,
        })
    }

    fn polarize(&self, h: &Matrix<T>) -> Result<Matrix<T>> {
        if h.frobenius_norm() == T::zero() {
            return Ok(Matrix::zeros(h.rows(), h.cols()));
        }
        match self.backend {
            MsgnBackend::Exact => msgn_exact(h, None),
            MsgnBackend::NewtonSchulz { iters } => msgn_newton_schulz(h, iters),
        }
    }

    /// Advances the state by one iteration and returns the mean polarized
    /// step `sbar` that the iteration applied.
    pub fn step(&self, state: &mut RunState<T>) -> Result<Matrix<T>> {
        let k = state.k;
        let n = self.problem.n_nodes();
        let alpha = self.schedule.alpha();
        let beta = self.schedule.beta();

        // Step 0 reuses the init-time gradients (same oracle address), so
        // the momentum starts from an actual gradient, not from stale zero.
        let g: Vec<Matrix<T>> = if k == 0 {
            state.m.clone()
        } else {
            let mut g = Vec::with_capacity(n);
            for (i, xi) in state.x.iter().enumerate() {
                g.push(self.problem.sample_oracle(i, xi, k, &self.rng)?);
            }
            g
        };

        let one_minus = T::one() - beta;
        let s_bar = match self.variant {
            Variant::SudaMuon | Variant::NoTracking | Variant::DeMuon => {
                let m_next: Vec<Matrix<T>> = state
                    .m
                    .iter()
                    .zip(&g)
                    .map(|(mi, gi)| {
                        Matrix::from_fn(mi.rows(), mi.cols(), |r, c| {
                            beta * mi.get(r, c) + one_minus * gi.get(r, c)
                        })
                    })
                    .collect();

                let h_next: Vec<Matrix<T>> = if self.variant == Variant::NoTracking {
                    m_next.clone()
                } else {
                    let w = self.mixing.expect("validated").matrix();
                    let carried: Result<Vec<Matrix<T>>> = state
                        .h
                        .iter()
                        .zip(m_next.iter().zip(&state.m))
                        .map(|(hi, (mn, mo))| hi.add(&mn.sub(mo)?))
                        .collect();
                    stack::mix_apply(w, &carried?)?
                };

                let s: Vec<Matrix<T>> = h_next
                    .iter()
                    .map(|hi| self.polarize(hi))
                    .collect::<Result<_>>()?;

                let x_next: Vec<Matrix<T>>;
                let y_next: Vec<Matrix<T>>;
                match self.variant {
                    Variant::DeMuon => {
                        let stepped: Result<Vec<Matrix<T>>> = state
                            .x
                            .iter()
                            .zip(&s)
                            .map(|(xi, si)| xi.sub(&si.scale(alpha)))
                            .collect();
                        let w = self.mixing.expect("validated").matrix();
                        x_next = stack::mix_apply(w, &stepped?)?;
                        y_next = state.y.clone();
                    }
                    _ => {
                        let bk = self.backbone.expect("validated");
                        let cx = stack::mix_apply(&bk.c, &state.x)?;
                        let inner: Result<Vec<Matrix<T>>> = cx
                            .iter()
                            .zip(&s)
                            .map(|(ci, si)| ci.sub(&si.scale(alpha)))
                            .collect();
                        let ax = stack::mix_apply(&bk.a, &inner?)?;
                        let by = stack::mix_apply(&bk.b, &state.y)?;
                        x_next = ax
                            .iter()
                            .zip(&by)
                            .map(|(ai, bi)| ai.sub(bi))
                            .collect::<Result<_>>()?;
                        let bx = stack::mix_apply(&bk.b, &x_next)?;
                        y_next = state
                            .y
                            .iter()
                            .zip(&bx)
                            .map(|(yi, bi)| yi.add(bi))
                            .collect::<Result<_>>()?;
                    }
                }

                let s_bar = stack::block_mean(&s)?;
                check_blowup(k, [&x_next, &y_next, &m_next, &h_next])?;
                state.x = x_next;
                state.y = y_next;
                state.m = m_next;
                state.h = h_next;
                s_bar
            }
            Variant::DsgdMuon | Variant::CentralizedMuon => {
                let dir = if self.variant == Variant::DsgdMuon {
                    let s: Vec<Matrix<T>> = g
                        .iter()
                        .map(|gi| self.polarize(gi))
                        .collect::<Result<_>>()?;
                    stack::block_mean(&s)?
                } else {
                    self.polarize(&stack::block_mean(&g)?)?
                };
                let shared = state.x[0].sub(&dir.scale(alpha))?;
                let x_next = vec![shared; n];
                let h_next = match self.variant {
                    Variant::CentralizedMuon => vec![stack::block_mean(&g)?; n],
                    _ => g.clone(),
                };
                check_blowup(k, [&x_next, &state.y, &g, &h_next])?;
                state.x = x_next;
                state.m = g;
                state.h = h_next;
                dir
            }
        };

        state.k = k + 1;
        Ok(s_bar)
    }
}

fn check_blowup<T: Scalar, const P: usize>(
    iteration: u64,
    stacks: [&Vec<Matrix<T>>; P],
) -> Result<()> {
    let cap = fl::<T>(tol::BLOWUP);
    for stack in stacks {
        for block in stack {
            for &v in block.data() {
                if !v.is_finite() || v.abs() > cap {
                    return Err(Error::Blowup {
                        iteration,
                        detail: format!("entry {v} left the trusted range"),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Full trace of one run: a snapshot per recorded iterate (including the
/// initial one) and structural residuals per step. On blowup the trace is
/// cut short and flagged instead of erroring.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    pub records: Vec<metrics::TraceRecord<T>>,
    pub residuals: Vec<metrics::StepResiduals<T>>,
    pub blowup: Option<u64>,
}

pub fn run<T: Scalar>(
    engine: &Engine<'_, T>,
    init: &InitIterate<T>,
    iterations: u64,
) -> Result<Trace<T>> {
    let mut state = engine.init_state(init)?;
    let mut trace = Trace {
        records: Vec::with_capacity(iterations as usize + 1),
        residuals: Vec::with_capacity(iterations as usize),
        blowup: None,
    };
    let mut grad_nuc_sum = T::zero();
    trace
        .records
        .push(metrics::snapshot(&state, engine.problem(), None, &mut grad_nuc_sum)?);
    for _ in 0..iterations {
        let prev = state.clone();
        match engine.step(&mut state) {
            Ok(s_bar) => {
                trace
                    .residuals
                    .push(metrics::step_residuals(engine, &prev, &state, &s_bar)?);
                trace.records.push(metrics::snapshot(
                    &state,
                    engine.problem(),
                    Some(&s_bar),
                    &mut grad_nuc_sum,
                )?);
            }
            Err(Error::Blowup { iteration, .. }) => {
                trace.blowup = Some(iteration);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(trace)
}
