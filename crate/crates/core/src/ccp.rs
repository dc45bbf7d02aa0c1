//! Concatenated coding procedure `CCP_{r,h}` as a channel-contraction
//! recursion.
//!
//! One block encodes a qubit, alternates `r` wait periods with `r - 1`
//! recoveries, decodes (the decoder counts as the `r`-th recovery) and
//! discards the ancillas. Its effective single-qubit channel becomes the
//! per-qubit wait channel of the next level.
//!
//! With ideal operations and a code that corrects every single-qubit error,
//! the block is computed in the logical picture: with `D = I - id` the
//! per-qubit deviation, a period maps a code-space operator `X` to
//! `R((id + D)^{(x)l} X) = X + sum_{|S| >= 2} R(D_S X)`, since every
//! one-fault term is removed exactly by `R`. Summing only the multi-fault
//! terms keeps full relative precision however small the logical error is.
//! Noisy operations use a direct density simulation of the block.

use num_bigint::BigUint;

use crate::channels::ChannelSpec;
use crate::circuit::{self, Gate};
use crate::code::{self, CodeSpec};
use crate::error::{Error, Result};
use crate::linalg::{local, CMat};
use crate::oper::GeneralizedOperator;
use crate::superop::QubitChannel;

/// Default cap on simulation work units, overridable via `CONCATQEC_BUDGET`.
pub const DEFAULT_BUDGET: u128 = 1 << 24;
pub const BUDGET_ENV: &str = "CONCATQEC_BUDGET";
/// Largest recovery gate count allowed in gate-level mode.
pub const MAX_RECOVERY_GATES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    Ideal,
    /// `op_error` on every code qubit after each ideal encode, recovery and decode.
    Lumped,
    /// `op_error` on each touched qubit after every primitive gate.
    GateLevel,
}

impl NoiseMode {
    pub fn name(self) -> &'static str {
        match self {
            NoiseMode::Ideal => "ideal",
            NoiseMode::Lumped => "lumped",
            NoiseMode::GateLevel => "gate_level",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    mode: NoiseMode,
    op_error: ChannelSpec,
    gate_count_recovery: usize,
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self {
            mode: NoiseMode::Ideal,
            op_error: ChannelSpec::identity(),
            gate_count_recovery: MAX_RECOVERY_GATES,
        }
    }

    pub fn new(mode: NoiseMode, op_error: ChannelSpec, gate_count_recovery: usize) -> Result<Self> {
        if mode == NoiseMode::Ideal && !op_error.is_identity() {
            return Err(Error::InvalidArgument("ideal noise model takes no operation error".into()));
        }
        if mode == NoiseMode::GateLevel && gate_count_recovery > MAX_RECOVERY_GATES {
            return Err(Error::InvalidArgument(format!(
                "gate_count_recovery {gate_count_recovery} exceeds {MAX_RECOVERY_GATES}"
            )));
        }
        Ok(Self { mode, op_error, gate_count_recovery })
    }

    pub fn lumped(op_error: ChannelSpec) -> Self {
        Self::new(NoiseMode::Lumped, op_error, MAX_RECOVERY_GATES).expect("valid lumped model")
    }

    pub fn gate_level(op_error: ChannelSpec) -> Self {
        Self::new(NoiseMode::GateLevel, op_error, MAX_RECOVERY_GATES).expect("valid gate-level model")
    }

    pub fn mode(&self) -> NoiseMode {
        self.mode
    }

    pub fn op_error(&self) -> ChannelSpec {
        self.op_error
    }

    pub fn gate_count_recovery(&self) -> usize {
        self.gate_count_recovery
    }

    fn is_noiseless(&self) -> bool {
        self.mode == NoiseMode::Ideal || self.op_error.is_identity()
    }
}

#[derive(Debug, Clone)]
pub struct CCPConfig {
    pub code: CodeSpec,
    pub repetition: usize,
    pub level: usize,
    pub channel: ChannelSpec,
    pub noise: NoiseModel,
    /// Applied before and after each inner-level block from level 2 on.
    pub extra_wait: Option<ChannelSpec>,
    /// Lets codes that are not flagged quantum (the bit-flip code) through.
    pub allow_classical_code: bool,
}

impl CCPConfig {
    pub fn new(code: CodeSpec, repetition: usize, level: usize, channel: ChannelSpec) -> Self {
        Self {
            code,
            repetition,
            level,
            channel,
            noise: NoiseModel::ideal(),
            extra_wait: None,
            allow_classical_code: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetition < 2 {
            return Err(Error::InvalidArgument(format!("repetition factor r = {} < 2", self.repetition)));
        }
        if self.level < 1 {
            return Err(Error::InvalidArgument("level h must be at least 1".into()));
        }
        check_code(&self.code, &self.noise, self.allow_classical_code)
    }

    /// Work units: one per superoperator-sized pass over a block.
    pub fn work_units(&self) -> u128 {
        let l = self.code.length() as u32;
        let ancilla = u32::from(self.noise.mode == NoiseMode::GateLevel);
        (self.level as u128) * (self.repetition as u128) * 4u128.saturating_pow(l + ancilla)
    }
}

fn check_code(code: &CodeSpec, noise: &NoiseModel, allow_classical: bool) -> Result<()> {
    if code.length() < 2 {
        return Err(Error::InvalidArgument("code length must be at least 2".into()));
    }
    if !code.is_quantum() && !allow_classical {
        return Err(Error::NonQuantumCode(code.name().to_string()));
    }
    if noise.mode == NoiseMode::GateLevel && code.recovery_gate_count() > noise.gate_count_recovery {
        return Err(Error::InvalidArgument(format!(
            "recovery circuit uses {} primitive operations, more than gate_count_recovery = {}",
            code.recovery_gate_count(),
            noise.gate_count_recovery
        )));
    }
    Ok(())
}

/// Budget from `CONCATQEC_BUDGET`, or [`DEFAULT_BUDGET`] when unset.
pub fn budget_from_env() -> Result<u128> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u128>()
            .map_err(|_| Error::Parse(format!("{BUDGET_ENV}=`{v}` is not a nonnegative integer"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

/// Resource counters of `CCP_{r,h}`, accumulated level by level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counters {
    /// Waiting/transmission periods.
    pub n: BigUint,
    pub qubits: BigUint,
    /// Depth in parallel encode/recover/decode steps.
    pub parallel_ops: BigUint,
    /// Total encode/recover/decode operations.
    pub total_ops: BigUint,
}

impl Counters {
    pub fn base(r: usize, l: usize) -> Self {
        Self {
            n: BigUint::from(r),
            qubits: BigUint::from(l),
            parallel_ops: BigUint::from(r + 1),
            total_ops: BigUint::from(r + 1),
        }
    }

    pub fn next(&self, r: usize, l: usize) -> Self {
        let (r_b, l_b) = (BigUint::from(r), BigUint::from(l));
        Self {
            n: &self.n * &r_b,
            qubits: &self.qubits * &l_b,
            parallel_ops: BigUint::from(r + 1) + &r_b * &self.parallel_ops,
            total_ops: BigUint::from(r + 1) + &r_b * &l_b * &self.total_ops,
        }
    }

    /// Counters for levels `1..=h`.
    pub fn levels(r: usize, l: usize, h: usize) -> Vec<Self> {
        let mut out: Vec<Self> = Vec::with_capacity(h);
        for k in 0..h {
            let c = if k == 0 { Self::base(r, l) } else { out[k - 1].next(r, l) };
            out.push(c);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct LevelReport {
    pub level: usize,
    pub effective_channel: GeneralizedOperator,
    pub channel: QubitChannel,
    /// `E(effective_channel, I)`.
    pub error_amplitude: f64,
    pub counters: Counters,
}

/// Wait channels of one block, indexed `[period][qubit]`.
#[derive(Debug, Clone)]
pub struct WaitSchedule {
    periods: Vec<Vec<QubitChannel>>,
}

impl WaitSchedule {
    pub fn uniform(channel: &QubitChannel, r: usize, l: usize) -> Self {
        Self { periods: vec![vec![channel.clone(); l]; r] }
    }

    pub fn from_fn(r: usize, l: usize, f: impl Fn(usize, usize) -> QubitChannel) -> Self {
        Self {
            periods: (0..r).map(|p| (0..l).map(|q| f(p, q)).collect()).collect(),
        }
    }

    pub fn periods(&self) -> usize {
        self.periods.len()
    }
}

/// Effective channel of one `CCP_{r,1}` block with `inner` on every qubit in
/// every wait period.
pub fn block_channel(
    code: &CodeSpec,
    inner: &GeneralizedOperator,
    noise: &NoiseModel,
    r: usize,
) -> Result<GeneralizedOperator> {
    let inner = QubitChannel::from_operator(inner)?;
    block_qubit_channel(code, &WaitSchedule::uniform(&inner, r, code.length()), noise, false)?.to_operator()
}

/// Effective channel of one block for an arbitrary wait schedule.
pub fn block_qubit_channel(
    code: &CodeSpec,
    waits: &WaitSchedule,
    noise: &NoiseModel,
    allow_classical_code: bool,
) -> Result<QubitChannel> {
    check_code(code, noise, allow_classical_code)?;
    if waits.periods() < 2 {
        return Err(Error::InvalidArgument(format!("repetition factor r = {} < 2", waits.periods())));
    }
    if waits.periods.iter().any(|p| p.len() != code.length()) {
        return Err(Error::DimensionMismatch {
            context: "wait channels per period",
            left: code.length(),
            right: waits.periods.iter().map(Vec::len).find(|&n| n != code.length()).unwrap_or(0),
        });
    }
    if noise.is_noiseless() && code.is_quantum() {
        Ok(logical_block(code, waits))
    } else {
        simulate_block(code, waits, noise)
    }
}

/// Ideal-operation block in the logical picture (see module docs).
fn logical_block(code: &CodeSpec, waits: &WaitSchedule) -> QubitChannel {
    let l = code.length();
    let logical = [code.logical_zero(), code.logical_one()];
    let mut total = QubitChannel::identity();
    for period in &waits.periods {
        let mut delta = CMat::zeros(4, 4);
        for b in 0..2 {
            for a in 0..2 {
                let x = logical[a] * logical[b].adjoint();
                let mut one = CMat::zeros(x.nrows(), x.ncols());
                let mut many = CMat::zeros(x.nrows(), x.ncols());
                for (q, ch) in period.iter().enumerate() {
                    if ch.is_exact_identity() {
                        continue;
                    }
                    let d_many = ch.apply_deviation_on(&many, l, q);
                    let d_one = ch.apply_deviation_on(&one, l, q);
                    many += d_many + d_one;
                    one += ch.apply_deviation_on(&x, l, q);
                }
                let y = code.apply_recovery(&many);
                for (rp, lr) in logical.iter().enumerate() {
                    for (r, ll) in logical.iter().enumerate() {
                        delta[(rp * 2 + r, b * 2 + a)] = (ll.adjoint() * &y * *lr)[(0, 0)];
                    }
                }
            }
        }
        total = total.then(&QubitChannel::from_deviation(delta).expect("4x4"));
    }
    total
}

struct Noise<'a> {
    mode: NoiseMode,
    channel: &'a QubitChannel,
    active: bool,
}

impl Noise<'_> {
    fn after_gate(&self, x: &mut CMat, n: usize, g: &Gate) {
        g.conjugate(x, n);
        if self.active && self.mode == NoiseMode::GateLevel {
            for q in g.qubits() {
                *x = self.channel.apply_on(x, n, q);
            }
        }
    }

    fn lumped(&self, x: &mut CMat, n: usize) {
        if self.active && self.mode == NoiseMode::Lumped {
            for q in 0..n {
                *x = self.channel.apply_on(x, n, q);
            }
        }
    }
}

/// Direct density simulation of one block on the code qubits (plus one
/// syndrome ancilla at a time in gate-level mode).
fn simulate_block(code: &CodeSpec, waits: &WaitSchedule, noise: &NoiseModel) -> Result<QubitChannel> {
    let l = code.length();
    let dim = code.dim();
    let half = dim / 2;
    let op_error = QubitChannel::from_operator(&noise.op_error.build())?;
    let nz = Noise {
        mode: noise.mode,
        channel: &op_error,
        active: !noise.is_noiseless(),
    };
    let r = waits.periods();
    let mut s = CMat::zeros(4, 4);
    for b in 0..2 {
        for a in 0..2 {
            let mut x = CMat::zeros(dim, dim);
            x[(a * half, b * half)] = crate::linalg::ONE;
            // encode
            if noise.mode == NoiseMode::GateLevel {
                for g in code.encoder_circuit() {
                    nz.after_gate(&mut x, l, g);
                }
            } else {
                x = code.apply_encoder(&x);
                nz.lumped(&mut x, l);
            }
            let mut out = CMat::zeros(2, 2);
            for (p, period) in waits.periods.iter().enumerate() {
                for (q, ch) in period.iter().enumerate() {
                    if !ch.is_exact_identity() {
                        x = ch.apply_on(&x, l, q);
                    }
                }
                let last = p + 1 == r;
                match (noise.mode, last) {
                    (NoiseMode::GateLevel, false) => x = gate_level_recovery(code, &x, &nz),
                    (NoiseMode::GateLevel, true) => out = gate_level_decode(code, &x, &nz),
                    (_, false) => {
                        x = code.apply_recovery(&x);
                        nz.lumped(&mut x, l);
                    }
                    (_, true) => {
                        x = code.apply_decoder(&x);
                        nz.lumped(&mut x, l);
                        out = local::partial_trace_keep(&x, l, &[0]);
                    }
                }
            }
            for rp in 0..2 {
                for rr in 0..2 {
                    s[(rp * 2 + rr, b * 2 + a)] = out[(rr, rp)];
                }
            }
        }
    }
    QubitChannel::from_superop(&s)
}

/// Syndrome rounds with a fresh ancilla each, branching on every outcome,
/// then the classically controlled correction.
fn gate_level_recovery(code: &CodeSpec, x: &CMat, nz: &Noise<'_>) -> CMat {
    let l = code.length();
    let dim = code.dim();
    let mut ancilla0 = CMat::zeros(2, 2);
    ancilla0[(0, 0)] = crate::linalg::ONE;
    let mut branches: Vec<(usize, CMat)> = vec![(0, x.clone())];
    for round in code.syndrome_rounds() {
        let mut next = Vec::with_capacity(branches.len() * 2);
        for (s, y) in branches {
            let mut z = crate::linalg::kron(&y, &ancilla0);
            for g in &round.gates {
                nz.after_gate(&mut z, l + 1, g);
            }
            for m in 0..2 {
                let proj = CMat::from_fn(dim, dim, |i, j| z[(2 * i + m, 2 * j + m)]);
                next.push((s | m << round.generator, proj));
            }
        }
        branches = next;
    }
    let mut out = CMat::zeros(dim, dim);
    for (s, mut y) in branches {
        for g in code::correction_gates(&code.syndrome_table()[s]) {
            nz.after_gate(&mut y, l, &g);
        }
        out += y;
    }
    out
}

/// Inverse encoder, readout of the ancillas, correction on qubit 0.
fn gate_level_decode(code: &CodeSpec, x: &CMat, nz: &Noise<'_>) -> CMat {
    let l = code.length();
    let half = code.dim() / 2;
    let mut y = x.clone();
    for g in circuit::inverse(code.encoder_circuit()) {
        nz.after_gate(&mut y, l, &g);
    }
    let mut out = CMat::zeros(2, 2);
    for (t, fix) in code.decoder_table().iter().enumerate() {
        let mut w = CMat::from_fn(2, 2, |i, j| y[(i * half + t, j * half + t)]);
        let single = crate::pauli::PauliString::single(1, 0, *fix);
        for g in code::correction_gates(&single) {
            nz.after_gate(&mut w, 1, &g);
        }
        out += w;
    }
    out
}

/// Runs `CCP_{r,h}` level by level.
pub fn ccp_channel(cfg: &CCPConfig) -> Result<Vec<LevelReport>> {
    ccp_channel_with_budget(cfg, budget_from_env()?)
}

pub fn ccp_channel_with_budget(cfg: &CCPConfig, budget: u128) -> Result<Vec<LevelReport>> {
    cfg.validate()?;
    let required = cfg.work_units();
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let (r, l) = (cfg.repetition, cfg.code.length());
    let wait = cfg
        .extra_wait
        .map(|w| QubitChannel::from_operator(&w.build()))
        .transpose()?;
    let mut inner = QubitChannel::from_operator(&cfg.channel.build())?;
    let mut reports = Vec::with_capacity(cfg.level);
    for (k, counters) in Counters::levels(r, l, cfg.level).into_iter().enumerate() {
        let block = block_qubit_channel(
            &cfg.code,
            &WaitSchedule::uniform(&inner, r, l),
            &cfg.noise,
            cfg.allow_classical_code,
        )?;
        reports.push(LevelReport {
            level: k + 1,
            effective_channel: block.to_operator()?,
            error_amplitude: block.error_amplitude()?,
            channel: block.clone(),
            counters,
        });
        inner = match &wait {
            Some(w) => w.then(&block).then(w),
            None => block,
        };
    }
    Ok(reports)
}
