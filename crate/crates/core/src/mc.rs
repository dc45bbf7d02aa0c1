//! Pauli-frame Monte Carlo of a `CCP_{r,1}` block.
//!
//! Error amplitudes are treated as incoherent Pauli probabilities. Each
//! trial samples Pauli faults on every qubit in every wait period (and after
//! every primitive gate when `gate_error_prob > 0`), propagates the frame
//! through the Clifford circuits, decodes, and records the residual logical
//! Pauli. Trials run in fixed-size batches, each with its own ChaCha stream,
//! and integer tallies are summed, so results depend only on the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{self, Gate};
use crate::code::{self, CodeSpec};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

pub const BATCH: u64 = 16_384;
/// Normal quantile for 95% intervals.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PauliProbs {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl PauliProbs {
    pub fn new(px: f64, py: f64, pz: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !(ok(px) && ok(py) && ok(pz)) || px + py + pz > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "invalid Pauli probabilities ({px}, {py}, {pz})"
            )));
        }
        Ok(Self { px, py, pz })
    }

    pub fn total(&self) -> f64 {
        self.px + self.py + self.pz
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Pauli {
        let u: f64 = rng.random();
        if u < self.px {
            Pauli::X
        } else if u < self.px + self.py {
            Pauli::Y
        } else if u < self.total() {
            Pauli::Z
        } else {
            Pauli::I
        }
    }
}

/// One-parameter families of Pauli channels for threshold scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PauliFamily {
    Depolarizing,
    Dephasing,
    BitFlip,
}

impl PauliFamily {
    pub fn probs(self, p: f64) -> Result<PauliProbs> {
        match self {
            PauliFamily::Depolarizing => PauliProbs::new(p / 3.0, p / 3.0, p / 3.0),
            PauliFamily::Dephasing => PauliProbs::new(0.0, 0.0, p),
            PauliFamily::BitFlip => PauliProbs::new(p, 0.0, 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PauliFamily::Depolarizing => "depolarizing",
            PauliFamily::Dephasing => "dephasing",
            PauliFamily::BitFlip => "bit_flip",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "depolarizing" => Ok(PauliFamily::Depolarizing),
            "dephasing" => Ok(PauliFamily::Dephasing),
            "bit_flip" => Ok(PauliFamily::BitFlip),
            other => Err(Error::Parse(format!("unknown Pauli family `{other}`"))),
        }
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct McEstimate {
    pub trials: u64,
    /// Tallies of the residual logical `I, X, Y, Z`.
    pub counts: [u64; 4],
}

impl McEstimate {
    pub fn frequencies(&self) -> [f64; 4] {
        self.counts.map(|c| c as f64 / self.trials as f64)
    }

    pub fn intervals(&self) -> [(f64, f64); 4] {
        self.counts.map(|c| wilson_interval(c, self.trials, Z95))
    }

    pub fn failures(&self) -> u64 {
        self.trials - self.counts[0]
    }

    pub fn logical_rate(&self) -> f64 {
        self.failures() as f64 / self.trials as f64
    }

    pub fn logical_interval(&self) -> (f64, f64) {
        wilson_interval(self.failures(), self.trials, Z95)
    }

    /// Output Pauli channel, the next level's input.
    pub fn output_probs(&self) -> PauliProbs {
        let f = self.frequencies();
        PauliProbs { px: f[1], py: f[2], pz: f[3] }
    }
}

/// Frame simulator for one block of a code.
#[derive(Debug, Clone)]
pub struct BlockFrameSim {
    code: CodeSpec,
    r: usize,
    gate_error_prob: f64,
    decoder_circuit: Vec<Gate>,
    force_circuits: bool,
}

impl BlockFrameSim {
    pub fn new(code: &CodeSpec, r: usize, gate_error_prob: f64) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidArgument(format!("repetition factor r = {r} < 2")));
        }
        if !(0.0..=1.0).contains(&gate_error_prob) {
            return Err(Error::InvalidArgument(format!("gate error probability {gate_error_prob} outside [0, 1]")));
        }
        if code.length() + 1 > PauliString::MAX_QUBITS {
            return Err(Error::InvalidArgument("code too long for 32-qubit frames".into()));
        }
        Ok(Self {
            code: code.clone(),
            r,
            gate_error_prob,
            decoder_circuit: circuit::inverse(code.encoder_circuit()),
            force_circuits: false,
        })
    }

    /// Propagates through the gate-level circuits even without gate faults.
    pub fn with_circuits(mut self) -> Self {
        self.force_circuits = true;
        self
    }

    fn circuits(&self) -> bool {
        self.force_circuits || self.gate_error_prob > 0.0
    }

    fn gate(&self, g: &Gate, frame: &mut PauliString, rng: &mut ChaCha8Rng) {
        g.propagate(frame);
        self.gate_faults(g, frame, rng);
    }

    fn recover(&self, frame: PauliString, rng: &mut ChaCha8Rng) -> PauliString {
        let l = self.code.length();
        if !self.circuits() {
            let s = frame.syndrome(self.code.stabilizers());
            return frame.mul(&self.code.syndrome_table()[s]);
        }
        let mut data = frame;
        let mut s = 0usize;
        for round in self.code.syndrome_rounds() {
            let mut f = PauliString::from_masks(l + 1, data.x_mask() << 1, data.z_mask() << 1);
            for g in &round.gates {
                self.gate(g, &mut f, rng);
            }
            s |= ((f.x_mask() & 1) as usize) << round.generator;
            data = PauliString::from_masks(l, f.x_mask() >> 1, f.z_mask() >> 1);
        }
        // a correction gate multiplies the frame by the Pauli it applies
        for g in code::correction_gates(&self.code.syndrome_table()[s]) {
            data = data.mul(&gate_as_pauli(&g, l));
            self.gate_faults(&g, &mut data, rng);
        }
        data
    }

    /// Uniform non-identity Pauli on each touched qubit with probability `gate_error_prob`.
    fn gate_faults(&self, g: &Gate, frame: &mut PauliString, rng: &mut ChaCha8Rng) {
        if self.gate_error_prob > 0.0 {
            for q in g.qubits() {
                if rng.random::<f64>() < self.gate_error_prob {
                    let p = Pauli::ALL[rng.random_range(1..4)];
                    *frame = frame.mul(&PauliString::single(frame.num_qubits(), q, p));
                }
            }
        }
    }

    fn decode(&self, frame: PauliString, rng: &mut ChaCha8Rng) -> Pauli {
        let l = self.code.length();
        if !self.circuits() {
            let s = frame.syndrome(self.code.stabilizers());
            let f = frame.mul(&self.code.syndrome_table()[s]);
            let x = !f.commutes_with(&self.code.logical_z());
            let z = !f.commutes_with(&self.code.logical_x());
            return Pauli::from_bits(x, z);
        }
        let mut f = frame;
        for g in &self.decoder_circuit {
            self.gate(g, &mut f, rng);
        }
        let t = (f.x_mask() as usize) & ((1 << (l - 1)) - 1);
        let mut q0 = PauliString::single(1, 0, f.get(0));
        let fix = PauliString::single(1, 0, self.code.decoder_table()[t]);
        for g in code::correction_gates(&fix) {
            q0 = q0.mul(&gate_as_pauli(&g, 1));
            self.gate_faults(&g, &mut q0, rng);
        }
        q0.get(0)
    }

    /// One trial; `wait(period, qubit, rng)` samples the wait fault.
    pub fn run_trial(
        &self,
        rng: &mut ChaCha8Rng,
        mut wait: impl FnMut(usize, usize, &mut ChaCha8Rng) -> Pauli,
    ) -> Pauli {
        let l = self.code.length();
        let mut frame = PauliString::identity(l);
        if self.circuits() {
            for g in self.code.encoder_circuit() {
                self.gate(g, &mut frame, rng);
            }
        }
        for period in 0..self.r {
            for q in 0..l {
                let p = wait(period, q, rng);
                if p != Pauli::I {
                    frame = frame.mul(&PauliString::single(l, q, p));
                }
            }
            if period + 1 < self.r {
                frame = self.recover(frame, rng);
            }
        }
        self.decode(frame, rng)
    }

    /// Runs `trials` trials with i.i.d. wait faults drawn from `probs`.
    pub fn run(&self, probs: PauliProbs, trials: u64, seed: u64) -> McEstimate {
        let batches = trials.div_ceil(BATCH);
        let counts = (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b);
                let n = BATCH.min(trials - b * BATCH);
                let mut counts = [0u64; 4];
                for _ in 0..n {
                    let p = self.run_trial(&mut rng, |_, _, rng| probs.sample(rng));
                    counts[p.index()] += 1;
                }
                counts
            })
            .reduce(|| [0u64; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
        McEstimate { trials, counts }
    }
}

/// The Pauli a bit- or sign-flip gate applies (phase dropped).
fn gate_as_pauli(g: &Gate, n: usize) -> PauliString {
    match *g {
        Gate::X(q) => PauliString::single(n, q, Pauli::X),
        Gate::Z(q) => PauliString::single(n, q, Pauli::Z),
        _ => PauliString::identity(n),
    }
}

/// Frequencies of the residual logical Pauli of one block.
pub fn mc_block_channel(
    code: &CodeSpec,
    probs: PauliProbs,
    gate_error_prob: f64,
    r: usize,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(BlockFrameSim::new(code, r, gate_error_prob)?.run(probs, trials, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub p: f64,
    pub level: usize,
    pub logical_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub estimate: McEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    /// Level-1/level-2 crossing (pseudo-threshold), when the grid brackets it.
    pub crossing: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub family: PauliFamily,
    pub grid: Vec<f64>,
    pub gate_error_prob: f64,
    pub r: usize,
    pub levels: usize,
    pub trials: u64,
    pub seed: u64,
}

/// SplitMix64 finalizer, used to give every (grid point, level) its own seed.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derived_seed(seed: u64, grid_index: usize, level: usize) -> u64 {
    mix(mix(seed ^ mix(grid_index as u64)) ^ level as u64)
}

/// Level-by-level scan over a grid of physical error rates.
pub fn mc_threshold_scan(code: &CodeSpec, cfg: &ScanConfig) -> Result<ScanResult> {
    if cfg.grid.is_empty() {
        return Err(Error::InvalidArgument("p grid is empty".into()));
    }
    if cfg.levels == 0 || cfg.trials == 0 {
        return Err(Error::InvalidArgument("levels and trials must be at least 1".into()));
    }
    let sim = BlockFrameSim::new(code, cfg.r, cfg.gate_error_prob)?;
    let mut rows = Vec::with_capacity(cfg.grid.len() * cfg.levels);
    for (i, &p) in cfg.grid.iter().enumerate() {
        let mut probs = cfg.family.probs(p)?;
        for level in 1..=cfg.levels {
            let est = sim.run(probs, cfg.trials, derived_seed(cfg.seed, i, level));
            let (ci_low, ci_high) = est.logical_interval();
            rows.push(ScanRow {
                p,
                level,
                logical_rate: est.logical_rate(),
                ci_low,
                ci_high,
                estimate: est.clone(),
            });
            probs = est.output_probs();
        }
    }
    let crossing = crossing(&rows);
    Ok(ScanResult { rows, crossing })
}

/// First sign change of `rate(level 2) - rate(level 1)` from negative to
/// nonnegative along increasing `p`, interpolated linearly in `log p`.
pub fn crossing(rows: &[ScanRow]) -> Option<f64> {
    let mut points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.level == 1)
        .filter_map(|r1| {
            rows.iter()
                .find(|r2| r2.level == 2 && r2.p == r1.p)
                .map(|r2| (r1.p, r2.logical_rate - r1.logical_rate))
        })
        .filter(|(p, _)| *p > 0.0)
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points.windows(2).find_map(|w| {
        let ((pa, da), (pb, db)) = (w[0], w[1]);
        (da < 0.0 && db >= 0.0).then(|| {
            let t = -da / (db - da);
            (pa.ln() + t * (pb.ln() - pa.ln())).exp()
        })
    })
}
