//! Dense statevector simulation.
//!
//! Amplitude index bit `n − 1 − q` holds qubit `q`, so qubit 0 is the most
//! significant bit and basis index `0b1100` on four qubits is the state
//! rendered as `"1100"`.
//!
//! Pool operators are applied as products of Pauli rotations. Sampling
//! rotates a copy of the state into the requested measurement basis and
//! draws a multinomial histogram. Noise is simulated with stochastic
//! trajectories: only shots that actually suffer a preparation error are
//! simulated individually, everything else is drawn from the clean
//! distribution in one pass.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::pools::PoolOperator;

/// Outcome histogram keyed by basis index (qubit 0 most significant).
pub type Histogram = BTreeMap<usize, u64>;

/// Maximum imaginary residue tolerated in a Hermitian expectation value.
pub const EXPECTATION_RESIDUE: f64 = 1e-8;

/// Largest register the dense engine accepts.
pub const MAX_STATE_QUBITS: usize = 24;

/// Renders a basis index as a bitstring, qubit 0 first.
pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if index >> (n_qubits - 1 - q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Maps a qubit mask (bit q = qubit q) to an amplitude-index mask.
#[inline]
pub fn index_mask(qubit_mask: u64, n_qubits: usize) -> usize {
    if qubit_mask == 0 {
        0
    } else {
        (qubit_mask.reverse_bits() >> (64 - n_qubits)) as usize
    }
}

/// Precomputed action of a Pauli string on basis states:
/// `P|b⟩ = phase(b) |b ⊕ flip⟩` with `phase(b) = i^{#Y} (−1)^{|b ∧ sign|}`.
#[derive(Debug, Clone, Copy)]
struct PauliAction {
    flip: usize,
    sign: usize,
    base: Complex64,
}

impl PauliAction {
    fn new(p: &PauliString) -> Self {
        let n = p.n_qubits();
        let base = match p.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        PauliAction {
            flip: index_mask(p.x_mask(), n),
            sign: index_mask(p.z_mask(), n),
            base,
        }
    }

    #[inline]
    fn phase(&self, b: usize) -> Complex64 {
        if (b & self.sign).count_ones() % 2 == 1 {
            -self.base
        } else {
            self.base
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        assert!((1..=MAX_STATE_QUBITS).contains(&n_qubits));
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index {index} out of range");
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Statevector { n_qubits, amps }
    }

    pub fn zero(n_qubits: usize) -> Self {
        Statevector::basis_state(n_qubits, 0)
    }

    /// Wraps raw amplitudes, normalizing them.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Config(format!(
                "amplitude vector length {dim} is not a power of two"
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Config("amplitude vector has zero norm".into()));
        }
        Ok(Statevector {
            n_qubits: dim.trailing_zeros() as usize,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check(&self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                left: self.n_qubits,
                right: p.n_qubits(),
            });
        }
        Ok(())
    }

    /// Applies a Pauli string in place.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check(p)?;
        let act = PauliAction::new(p);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            out[b ^ act.flip] = act.phase(b) * a;
        }
        self.amps = out;
        Ok(())
    }

    /// `|ψ⟩ ← (cos φ · I + i sin φ · P)|ψ⟩ = exp(iφP)|ψ⟩`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, angle: f64) -> Result<()> {
        self.check(p)?;
        let act = PauliAction::new(p);
        let (s, c) = angle.sin_cos();
        let is = Complex64::new(0.0, s);
        if act.flip == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= c + is * act.phase(b);
            }
            return Ok(());
        }
        for b in 0..self.amps.len() {
            let partner = b ^ act.flip;
            if partner < b {
                continue;
            }
            let (a0, a1) = (self.amps[b], self.amps[partner]);
            self.amps[b] = c * a0 + is * act.phase(partner) * a1;
            self.amps[partner] = c * a1 + is * act.phase(b) * a0;
        }
        Ok(())
    }

    /// Applies `exp(θ G)` for a generator `G = Σ_j a_j (i P_j)` with
    /// mutually commuting terms.
    pub fn apply_generator(&mut self, generator: &PauliSum, theta: f64) -> Result<()> {
        for (p, c) in generator.iter() {
            // c = i·a_j for a skew-Hermitian generator.
            self.apply_pauli_rotation(p, theta * c.im)?;
        }
        Ok(())
    }

    /// Applies a pool operator; MVP operators apply each generator in order.
    pub fn evolve_in_place(&mut self, op: &PoolOperator, theta: &[f64]) -> Result<()> {
        if theta.len() != op.n_parameters() {
            return Err(Error::Arity {
                expected: op.n_parameters(),
                got: theta.len(),
            });
        }
        for (g, t) in op.generators.iter().zip(theta) {
            self.apply_generator(g, *t)?;
        }
        Ok(())
    }

    pub fn expectation_pauli(&self, p: &PauliString) -> Result<Complex64> {
        self.check(p)?;
        let act = PauliAction::new(p);
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in self.amps.iter().enumerate() {
            acc += self.amps[b ^ act.flip].conj() * act.phase(b) * a;
        }
        Ok(acc)
    }

    /// `Σ_j c_j ⟨ψ|P_j|ψ⟩` without any Hermiticity assumption.
    pub fn expectation_complex(&self, obs: &PauliSum) -> Result<Complex64> {
        if obs.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                left: self.n_qubits,
                right: obs.n_qubits(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, c) in obs.iter() {
            acc += c * self.expectation_pauli(p)?;
        }
        Ok(acc)
    }

    /// Applies a single-qubit unitary `[[m00, m01], [m10, m11]]`.
    fn apply_single(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << (self.n_qubits - 1 - qubit);
        for b in 0..self.amps.len() {
            if b & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amps[b], self.amps[b | bit]);
            self.amps[b] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[b | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Rotates every qubit so that its `basis` axis becomes Z: Hadamard for
    /// X, `S†` followed by Hadamard for Y, nothing for Z or I.
    pub fn rotate_to_basis(&mut self, basis: &PauliString) -> Result<()> {
        self.check(basis)?;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = [
            [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        ];
        // H · S† combined.
        let h_sdg = [
            [Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
            [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
        ];
        for q in 0..self.n_qubits {
            match basis.get(q) {
                Pauli::X => self.apply_single(q, hadamard),
                Pauli::Y => self.apply_single(q, h_sdg),
                Pauli::Z | Pauli::I => {}
            }
        }
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Outcome probabilities after rotating into `basis`.
    pub fn basis_probabilities(&self, basis: &PauliString) -> Result<Vec<f64>> {
        let mut rotated = self.clone();
        rotated.rotate_to_basis(basis)?;
        Ok(rotated.probabilities())
    }
}

/// Functional form of [`Statevector::evolve_in_place`].
pub fn evolve(state: &Statevector, op: &PoolOperator, theta: &[f64]) -> Result<Statevector> {
    let mut out = state.clone();
    out.evolve_in_place(op, theta)?;
    Ok(out)
}

/// Exact `⟨ψ|O|ψ⟩` for a Hermitian observable.
///
/// Commutators `[H, A]` of a Hermitian `H` with a skew-Hermitian `A` are
/// Hermitian with real coefficients, so gradients go through this path too.
pub fn expectation_exact(state: &Statevector, obs: &PauliSum) -> Result<f64> {
    let value = state.expectation_complex(obs)?;
    if value.im.abs() > EXPECTATION_RESIDUE {
        return Err(Error::ComplexExpectation(value.im));
    }
    Ok(value.re)
}

/// Which error channels are active.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseChannels {
    pub gate: bool,
    pub reset: bool,
    pub phase: bool,
    pub measurement: bool,
}

impl NoiseChannels {
    pub const ALL: NoiseChannels = NoiseChannels {
        gate: true,
        reset: true,
        phase: true,
        measurement: true,
    };
    pub const NONE: NoiseChannels = NoiseChannels {
        gate: false,
        reset: false,
        phase: false,
        measurement: false,
    };

    pub fn measurement_only() -> Self {
        NoiseChannels {
            measurement: true,
            ..NoiseChannels::NONE
        }
    }

    fn affects_preparation(&self) -> bool {
        self.gate || self.reset || self.phase
    }
}

impl FromStr for NoiseChannels {
    type Err = Error;

    /// Comma-separated channel names, or `all` / `none`.
    fn from_str(s: &str) -> Result<Self> {
        let mut ch = NoiseChannels::NONE;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "all" => ch = NoiseChannels::ALL,
                "none" => {}
                "gate" => ch.gate = true,
                "reset" => ch.reset = true,
                "phase" => ch.phase = true,
                "measurement" | "readout" => ch.measurement = true,
                other => return Err(Error::Noise(format!("unknown channel {other:?}"))),
            }
        }
        Ok(ch)
    }
}

impl fmt::Display for NoiseChannels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [
            (self.gate, "gate"),
            (self.reset, "reset"),
            (self.phase, "phase"),
            (self.measurement, "measurement"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join(","))
        }
    }
}

/// Error probability `p` applied independently on every active channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p: f64,
    pub channels: NoiseChannels,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::none()
    }
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            p: 0.0,
            channels: NoiseChannels::NONE,
        }
    }

    pub fn new(p: f64, channels: NoiseChannels) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Noise(format!("probability {p} outside [0, 1]")));
        }
        Ok(NoiseSpec { p, channels })
    }

    pub fn is_noiseless(&self) -> bool {
        self.p == 0.0 || self.channels == NoiseChannels::NONE
    }

    fn measurement_p(&self) -> f64 {
        if self.channels.measurement {
            self.p
        } else {
            0.0
        }
    }

    fn preparation_p(&self) -> f64 {
        if self.channels.affects_preparation() {
            self.p
        } else {
            0.0
        }
    }
}

/// Draws a multinomial histogram over `probs` with a chain of binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Histogram {
    let mut hist = Histogram::new();
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().sum();
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
        let n = if q >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        if n > 0 {
            hist.insert(k, n);
        }
        remaining -= n;
        mass -= p;
    }
    if remaining > 0 {
        // Floating-point shortfall: give the rest to the most likely outcome.
        let best = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        *hist.entry(best).or_default() += remaining;
    }
    hist
}

/// Flips every measured bit independently with probability `p`.
pub fn apply_readout_flips<R: Rng + ?Sized>(hist: Histogram, n_qubits: usize, p: f64, rng: &mut R) -> Histogram {
    if p <= 0.0 {
        return hist;
    }
    let mut current = hist;
    for q in 0..n_qubits {
        let bit = 1usize << (n_qubits - 1 - q);
        let mut next = Histogram::new();
        for (outcome, count) in current {
            let flipped = if p >= 1.0 {
                count
            } else {
                Binomial::new(count, p).expect("valid binomial").sample(rng)
            };
            if count > flipped {
                *next.entry(outcome).or_default() += count - flipped;
            }
            if flipped > 0 {
                *next.entry(outcome ^ bit).or_default() += flipped;
            }
        }
        current = next;
    }
    current
}

/// Samples `shots` outcomes of `state` measured in `basis`.
///
/// Only the measurement channel of `noise` can act here, since the state is
/// already prepared; preparation noise is handled by [`ShotSampler`].
pub fn sample_in_basis<R: Rng + ?Sized>(
    state: &Statevector,
    basis: &PauliString,
    shots: u64,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Histogram> {
    if shots == 0 {
        return Ok(Histogram::new());
    }
    let probs = state.basis_probabilities(basis)?;
    let hist = sample_multinomial(&probs, shots, rng);
    Ok(apply_readout_flips(hist, state.n_qubits, noise.measurement_p(), rng))
}

/// Anything that can produce measurement histograms.
pub trait ShotSource {
    fn n_qubits(&self) -> usize;
    fn sample<R: Rng + ?Sized>(&self, basis: &PauliString, shots: u64, rng: &mut R) -> Result<Histogram>;
}

impl ShotSource for Statevector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn sample<R: Rng + ?Sized>(&self, basis: &PauliString, shots: u64, rng: &mut R) -> Result<Histogram> {
        sample_in_basis(self, basis, shots, &NoiseSpec::none(), rng)
    }
}

/// Recipe for an ansatz state: a reference determinant followed by pool
/// operators with their parameters (concatenated in operator order).
#[derive(Debug, Clone, Copy)]
pub struct Preparation<'a> {
    pub n_qubits: usize,
    pub reference: usize,
    pub operators: &'a [PoolOperator],
    pub theta: &'a [f64],
}

impl<'a> Preparation<'a> {
    pub fn new(n_qubits: usize, reference: usize, operators: &'a [PoolOperator], theta: &'a [f64]) -> Result<Self> {
        let needed: usize = operators.iter().map(|o| o.n_parameters()).sum();
        if needed != theta.len() {
            return Err(Error::Arity {
                expected: needed,
                got: theta.len(),
            });
        }
        Ok(Preparation {
            n_qubits,
            reference,
            operators,
            theta,
        })
    }

    /// Noise-free prepared state.
    pub fn state(&self) -> Result<Statevector> {
        let mut psi = Statevector::basis_state(self.n_qubits, self.reference);
        let mut offset = 0;
        for op in self.operators {
            let k = op.n_parameters();
            psi.evolve_in_place(op, &self.theta[offset..offset + k])?;
            offset += k;
        }
        Ok(psi)
    }
}

/// Where a preparation error can strike.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ErrorSlot {
    Reset { qubit: usize },
    Gate { after: usize, qubit: usize },
    Phase { after: usize, qubit: usize },
}

/// Noisy sampler for a prepared ansatz state.
///
/// Each shot independently suffers a reset error on every qubit, and after
/// every pool-operator application a random-Pauli gate error and a Z phase
/// error on every qubit, each with probability `p`. The number of error-free
/// shots is binomial; those come from the clean distribution, the rest are
/// simulated one trajectory at a time with an error pattern drawn conditioned
/// on containing at least one error.
pub struct ShotSampler<'a> {
    prep: Preparation<'a>,
    noise: NoiseSpec,
    clean: Statevector,
    slots: Vec<ErrorSlot>,
}

impl<'a> ShotSampler<'a> {
    pub fn new(prep: Preparation<'a>, noise: NoiseSpec) -> Result<Self> {
        let clean = prep.state()?;
        let mut slots = Vec::new();
        let n = prep.n_qubits;
        if noise.preparation_p() > 0.0 {
            if noise.channels.reset {
                slots.extend((0..n).map(|qubit| ErrorSlot::Reset { qubit }));
            }
            for after in 0..prep.operators.len() {
                if noise.channels.gate {
                    slots.extend((0..n).map(|qubit| ErrorSlot::Gate { after, qubit }));
                }
                if noise.channels.phase {
                    slots.extend((0..n).map(|qubit| ErrorSlot::Phase { after, qubit }));
                }
            }
        }
        Ok(ShotSampler {
            prep,
            noise,
            clean,
            slots,
        })
    }

    pub fn clean_state(&self) -> &Statevector {
        &self.clean
    }

    /// Probability that a shot is prepared without any error.
    pub fn clean_fraction(&self) -> f64 {
        (1.0 - self.noise.preparation_p()).powi(self.slots.len() as i32)
    }

    fn draw_error_pattern<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<ErrorSlot> {
        let p = self.noise.p;
        let l = self.slots.len();
        // First error position, truncated geometric on [0, l).
        let first = if p >= 1.0 {
            0
        } else {
            let tail = 1.0 - (1.0 - p).powi(l as i32);
            let u: f64 = rng.random::<f64>() * tail;
            let k = ((1.0 - u).ln() / (1.0 - p).ln()).floor() as usize;
            k.min(l - 1)
        };
        let mut fired = vec![self.slots[first]];
        for slot in &self.slots[first + 1..] {
            if rng.random::<f64>() < p {
                fired.push(*slot);
            }
        }
        fired
    }

    fn trajectory<R: Rng + ?Sized>(&self, fired: &[ErrorSlot], rng: &mut R) -> Result<Statevector> {
        let n = self.prep.n_qubits;
        let mut reference = self.prep.reference;
        for slot in fired {
            if let ErrorSlot::Reset { qubit } = slot {
                reference &= !(1usize << (n - 1 - qubit));
            }
        }
        let mut psi = Statevector::basis_state(n, reference);
        let mut offset = 0;
        for (k, op) in self.prep.operators.iter().enumerate() {
            let m = op.n_parameters();
            psi.evolve_in_place(op, &self.prep.theta[offset..offset + m])?;
            offset += m;
            for slot in fired {
                let hit = match *slot {
                    ErrorSlot::Gate { after, qubit } if after == k => {
                        let axis = [Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)];
                        Some(PauliString::from_sparse(n, &[(qubit, axis)]))
                    }
                    ErrorSlot::Phase { after, qubit } if after == k => {
                        Some(PauliString::from_sparse(n, &[(qubit, Pauli::Z)]))
                    }
                    _ => None,
                };
                if let Some(p) = hit {
                    psi.apply_pauli(&p)?;
                }
            }
        }
        Ok(psi)
    }
}

fn sample_one<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, p) in probs.iter().enumerate() {
        if u < *p {
            return k;
        }
        u -= p;
    }
    probs
        .iter()
        .enumerate()
        .rev()
        .find(|(_, p)| **p > 0.0)
        .map(|(k, _)| k)
        .unwrap_or(0)
}

impl ShotSource for ShotSampler<'_> {
    fn n_qubits(&self) -> usize {
        self.prep.n_qubits
    }

    fn sample<R: Rng + ?Sized>(&self, basis: &PauliString, shots: u64, rng: &mut R) -> Result<Histogram> {
        if shots == 0 {
            return Ok(Histogram::new());
        }
        let n = self.prep.n_qubits;
        if self.slots.is_empty() {
            return sample_in_basis(&self.clean, basis, shots, &self.noise, rng);
        }
        let q = self.clean_fraction();
        let n_clean = if q >= 1.0 {
            shots
        } else {
            Binomial::new(shots, q).expect("valid binomial").sample(rng)
        };
        let mut hist = sample_multinomial(&self.clean.basis_probabilities(basis)?, n_clean, rng);
        for _ in n_clean..shots {
            let fired = self.draw_error_pattern(rng);
            let psi = self.trajectory(&fired, rng)?;
            let outcome = sample_one(&psi.basis_probabilities(basis)?, rng);
            *hist.entry(outcome).or_default() += 1;
        }
        Ok(apply_readout_flips(hist, n, self.noise.measurement_p(), rng))
    }
}
