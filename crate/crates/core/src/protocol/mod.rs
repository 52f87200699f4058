//! Quantum multiparty communication protocols without prior entanglement.
//!
//! The global space is `H_1 ⊗ ⋯ ⊗ H_k ⊗ C` with a one-qubit channel `C`. On
//! its turn a player applies a unitary on `H_p ⊗ C` chosen from what the model
//! lets it see: its own input (NIH) or every input but its own (NOF). Local
//! basis index on `H_p ⊗ C` is `2·h + c`, channel fastest.

mod branch;
mod nih;
mod nof;
pub(crate) mod scenario;
mod statevec;

pub use branch::{simulate_branches, simulate_branches_traced, BranchState};
pub use nih::{
    coefficient_search, extract_families, grouped_families, nih_rank_certificate, trivial_eq_nih,
    Coefficients, FamilyPair, GroupedFamilies, NihCertificate, NihOptions,
};
pub use nof::{build_nof_protocol, run_nof, strong_nondet_check, AcceptanceResult, NofProtocol, SweepReport};
pub use scenario::{parse_scenario, write_scenario};
pub use statevec::simulate_dense;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::functions::bit_at;
use crate::matrix::FloatMatrix;
use crate::scalar::FloatComplex;

/// Unitarity tolerance per entry of `U* U - I`.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Number-on-forehead: player `i` sees every input except `x_i`.
    Nof,
    /// Number-in-hand: player `i` sees only `x_i`.
    Nih,
}

impl Mode {
    pub fn sees(self, player: usize, input_of: usize) -> bool {
        match self {
            Mode::Nof => player != input_of,
            Mode::Nih => player == input_of,
        }
    }
}

/// Bit `pos` (0-based from the left) of player `player`'s input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InputBit {
    pub player: usize,
    pub pos: usize,
}

/// Per-turn unitary generators.
///
/// The reversible library gates act on register qubits (`slot` is a bit of the
/// register basis index, least significant first) and on the channel.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    /// Stash the incoming channel into `slot`, then put the input bit on the channel.
    WriteBit { slot: usize, input: InputBit },
    /// Flip the channel, optionally controlled by an input bit.
    ChannelNot { control: Option<InputBit> },
    /// Stash the channel into `slot`, XOR `flag` with (channel != input bit),
    /// forward the input bit on the channel.
    CompareAndFlag { slot: usize, flag: usize, input: InputBit },
    /// `CompareAndFlag`, then replace the forwarded bit by `NOT (OR of report)`.
    CompareAndReport { slot: usize, flag: usize, input: InputBit, report: Vec<usize> },
    /// Swap the channel into `trash` when any of `flags` is set.
    GateByFlag { flags: Vec<usize>, trash: usize },
    /// Input-independent matrix on `H_p ⊗ C`.
    Matrix(FloatMatrix),
    /// One matrix per joint value of the watched players' inputs (mixed radix,
    /// first watched player slowest).
    Lookup { watched: Vec<usize>, table: Vec<FloatMatrix> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Turn {
    pub player: usize,
    pub gate: Gate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolSpec {
    mode: Mode,
    bits: usize,
    player_dims: Vec<usize>,
    turns: Vec<Turn>,
}

/// What the acting player may read.
struct InputView<'a> {
    inputs: &'a [u64],
    mode: Mode,
    player: usize,
    turn: usize,
    bits: usize,
}

impl InputView<'_> {
    fn input(&self, of: usize) -> Result<u64> {
        if !self.mode.sees(self.player, of) {
            return Err(Error::HiddenInput { turn: self.turn, player: self.player, input: of });
        }
        Ok(self.inputs[of])
    }

    fn bit(&self, b: InputBit) -> Result<usize> {
        Ok(bit_at(self.input(b.player)?, self.bits, b.pos) as usize)
    }
}

fn register_qubits(dim: usize) -> Option<usize> {
    dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
}

/// Builds the permutation matrix of a reversible map on `(h, c)`.
fn permutation_matrix(dim: usize, mut f: impl FnMut(usize, usize) -> (usize, usize)) -> FloatMatrix {
    let size = 2 * dim;
    let mut m = FloatMatrix::zeros(size, size);
    for h in 0..dim {
        for c in 0..2 {
            let (h2, c2) = f(h, c);
            m.set(2 * h2 + c2, 2 * h + c, Complex64::new(1.0, 0.0));
        }
    }
    m
}

fn is_permutation(m: &FloatMatrix) -> bool {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut row_hits = vec![0usize; m.rows()];
    for j in 0..m.cols() {
        let mut hits = 0;
        for (i, z) in m.column(j).iter().enumerate() {
            if *z == one {
                hits += 1;
                row_hits[i] += 1;
            } else if *z != zero {
                return false;
            }
        }
        if hits != 1 {
            return false;
        }
    }
    row_hits.iter().all(|&h| h == 1)
}

fn get(h: usize, q: usize) -> usize {
    (h >> q) & 1
}

fn any(h: usize, qs: &[usize]) -> usize {
    qs.iter().any(|&q| get(h, q) == 1) as usize
}

fn xor(h: usize, q: usize, v: usize) -> usize {
    h ^ (v << q)
}

/// Stash `c` into `slot`, clear the channel (for a fresh slot), load `x`,
/// then `flag ^= slot ^ x`.
fn compare(h: usize, c: usize, slot: usize, flag: usize, x: usize) -> (usize, usize) {
    let h = xor(h, slot, c);
    let c = c ^ get(h, slot) ^ x;
    let h = xor(h, flag, get(h, slot) ^ x);
    (h, c)
}

impl Gate {
    fn slots(&self) -> Vec<usize> {
        match self {
            Gate::WriteBit { slot, .. } => vec![*slot],
            Gate::CompareAndFlag { slot, flag, .. } => vec![*slot, *flag],
            Gate::CompareAndReport { slot, flag, report, .. } => {
                let mut v = vec![*slot, *flag];
                v.extend(report.iter().filter(|&q| q != flag));
                v
            }
            Gate::GateByFlag { flags, trash } => {
                let mut v = flags.clone();
                v.push(*trash);
                v
            }
            _ => vec![],
        }
    }

    fn inputs_read(&self) -> Vec<usize> {
        match self {
            Gate::WriteBit { input, .. }
            | Gate::CompareAndFlag { input, .. }
            | Gate::CompareAndReport { input, .. } => vec![input.player],
            Gate::ChannelNot { control: Some(b) } => vec![b.player],
            Gate::Lookup { watched, .. } => watched.clone(),
            _ => vec![],
        }
    }

    fn input_bits(&self) -> Vec<InputBit> {
        match self {
            Gate::WriteBit { input, .. }
            | Gate::CompareAndFlag { input, .. }
            | Gate::CompareAndReport { input, .. } => vec![*input],
            Gate::ChannelNot { control: Some(b) } => vec![*b],
            _ => vec![],
        }
    }

    fn unitary(&self, dim: usize, view: &InputView<'_>) -> Result<FloatMatrix> {
        Ok(match self {
            Gate::WriteBit { slot, input } => {
                let x = view.bit(*input)?;
                permutation_matrix(dim, |h, c| {
                    let h = xor(h, *slot, c);
                    (h, c ^ get(h, *slot) ^ x)
                })
            }
            Gate::ChannelNot { control } => {
                let flip = match control {
                    Some(b) => view.bit(*b)?,
                    None => 1,
                };
                permutation_matrix(dim, |h, c| (h, c ^ flip))
            }
            Gate::CompareAndFlag { slot, flag, input } => {
                let x = view.bit(*input)?;
                permutation_matrix(dim, |h, c| compare(h, c, *slot, *flag, x))
            }
            Gate::CompareAndReport { slot, flag, input, report } => {
                let x = view.bit(*input)?;
                permutation_matrix(dim, |h, c| {
                    let (h, c) = compare(h, c, *slot, *flag, x);
                    (h, c ^ x ^ 1 ^ any(h, report))
                })
            }
            Gate::GateByFlag { flags, trash } => permutation_matrix(dim, |h, c| {
                if any(h, flags) == 1 {
                    let t = get(h, *trash);
                    (xor(h, *trash, t ^ c), t)
                } else {
                    (h, c)
                }
            }),
            Gate::Matrix(m) => m.clone(),
            Gate::Lookup { watched, table } => {
                let side = 1usize << view.bits;
                let mut idx = 0usize;
                for &p in watched {
                    idx = idx * side + view.input(p)? as usize;
                }
                table[idx].clone()
            }
        })
    }
}

impl ProtocolSpec {
    pub fn new(mode: Mode, bits: usize, player_dims: Vec<usize>, turns: Vec<Turn>) -> Result<Self> {
        let k = player_dims.len();
        if k < 2 {
            return Err(Error::InvalidProtocol(format!("need at least 2 players, got {k}")));
        }
        if bits == 0 || bits > 20 {
            return Err(Error::InvalidProtocol(format!("bits per player must be in 1..=20, got {bits}")));
        }
        if player_dims.contains(&0) {
            return Err(Error::InvalidProtocol("player space of dimension 0".into()));
        }
        for (t, turn) in turns.iter().enumerate() {
            let turn_no = t + 1;
            if turn.player >= k {
                return Err(Error::InvalidProtocol(format!("turn {turn_no}: no player {}", turn.player + 1)));
            }
            let dim = player_dims[turn.player];
            for input in turn.gate.inputs_read() {
                if input >= k {
                    return Err(Error::InvalidProtocol(format!("turn {turn_no}: no input {}", input + 1)));
                }
                if !mode.sees(turn.player, input) {
                    return Err(Error::HiddenInput { turn: turn_no, player: turn.player, input });
                }
            }
            if turn.gate.input_bits().iter().any(|b| b.pos >= bits) {
                return Err(Error::InvalidProtocol(format!("turn {turn_no}: bit position out of range")));
            }
            let slots = turn.gate.slots();
            if !slots.is_empty() {
                let qubits = register_qubits(dim).ok_or_else(|| {
                    Error::InvalidProtocol(format!("turn {turn_no}: library gates need a power-of-two register"))
                })?;
                if slots.iter().any(|&s| s >= qubits) {
                    return Err(Error::InvalidProtocol(format!(
                        "turn {turn_no}: slot out of range for a {qubits}-qubit register"
                    )));
                }
                let distinct: std::collections::BTreeSet<_> = slots.iter().collect();
                if distinct.len() != slots.len() {
                    return Err(Error::InvalidProtocol(format!("turn {turn_no}: slots must differ")));
                }
            }
            let check_shape = |m: &FloatMatrix| -> Result<()> {
                if m.rows() != 2 * dim || m.cols() != 2 * dim {
                    return Err(Error::InvalidProtocol(format!(
                        "turn {turn_no}: matrix is {}x{}, player space with channel has dimension {}",
                        m.rows(),
                        m.cols(),
                        2 * dim
                    )));
                }
                let residual = m.unitarity_residual();
                if residual > UNITARY_TOLERANCE {
                    return Err(Error::NonUnitary { turn: turn_no, residual });
                }
                Ok(())
            };
            match &turn.gate {
                Gate::Matrix(m) => check_shape(m)?,
                Gate::Lookup { watched, table } => {
                    let expected = (1usize << bits).pow(watched.len() as u32);
                    if table.len() != expected {
                        return Err(Error::InvalidProtocol(format!(
                            "turn {turn_no}: lookup needs {expected} matrices, got {}",
                            table.len()
                        )));
                    }
                    table.iter().try_for_each(check_shape)?;
                }
                _ => {}
            }
        }
        Ok(ProtocolSpec { mode, bits, player_dims, turns })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn players(&self) -> usize {
        self.player_dims.len()
    }

    pub fn player_dims(&self) -> &[usize] {
        &self.player_dims
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    /// Communication cost `ℓ`.
    pub fn cost(&self) -> usize {
        self.turns.len()
    }

    fn check_inputs(&self, inputs: &[u64]) -> Result<()> {
        if inputs.len() != self.players() {
            return Err(Error::ArityMismatch(format!(
                "protocol has {} players, got {} inputs",
                self.players(),
                inputs.len()
            )));
        }
        if inputs.iter().any(|&x| x >> self.bits != 0) {
            return Err(Error::ArityMismatch(format!("inputs must be {}-bit strings", self.bits)));
        }
        Ok(())
    }

    /// The unitary applied on turn `t` (0-based) for these inputs.
    pub fn turn_unitary(&self, t: usize, inputs: &[u64]) -> Result<FloatMatrix> {
        let turn = &self.turns[t];
        let view = InputView { inputs, mode: self.mode, player: turn.player, turn: t + 1, bits: self.bits };
        let u = turn.gate.unitary(self.player_dims[turn.player], &view)?;
        // literal matrices were checked in `new`; a permutation is unitary as is
        if matches!(turn.gate, Gate::Matrix(_) | Gate::Lookup { .. }) || is_permutation(&u) {
            return Ok(u);
        }
        Err(Error::NonUnitary { turn: t + 1, residual: u.unitarity_residual() })
    }
}

/// Haar-distributed unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, size: usize) -> FloatMatrix {
    let g = nalgebra::DMatrix::<Complex64>::from_fn(size, size, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the phases so the distribution is Haar
    FloatMatrix::from_fn(size, size, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { FloatComplex::new(1.0, 0.0) };
        q[(i, j)] * phase
    })
}

/// A protocol of `turns` random unitaries, each depending on everything its
/// player may see.
pub fn random_protocol<R: Rng>(
    rng: &mut R,
    mode: Mode,
    bits: usize,
    player_dims: Vec<usize>,
    turns: usize,
) -> Result<ProtocolSpec> {
    let k = player_dims.len();
    let side = 1usize << bits;
    let mut list = Vec::with_capacity(turns);
    for _ in 0..turns {
        let player = rng.random_range(0..k);
        let watched: Vec<usize> = (0..k).filter(|&i| mode.sees(player, i)).collect();
        let size = 2 * player_dims[player];
        let table = (0..side.pow(watched.len() as u32)).map(|_| random_unitary(rng, size)).collect();
        list.push(Turn { player, gate: Gate::Lookup { watched, table } });
    }
    ProtocolSpec::new(mode, bits, player_dims, list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn b(player: usize, pos: usize) -> InputBit {
        InputBit { player, pos }
    }

    #[test]
    fn library_gates_are_permutations() {
        let gates = [
            Gate::WriteBit { slot: 1, input: b(0, 0) },
            Gate::ChannelNot { control: None },
            Gate::ChannelNot { control: Some(b(0, 1)) },
            Gate::CompareAndFlag { slot: 0, flag: 2, input: b(0, 0) },
            Gate::CompareAndReport { slot: 2, flag: 1, input: b(0, 1), report: vec![0, 1] },
            Gate::GateByFlag { flags: vec![0, 1], trash: 2 },
        ];
        for gate in gates {
            for x in 0..4u64 {
                let inputs = [x, 0];
                let view = InputView { inputs: &inputs, mode: Mode::Nih, player: 0, turn: 1, bits: 2 };
                let u = gate.unitary(8, &view).unwrap();
                assert!(u.unitarity_residual() < 1e-15, "{gate:?}");
            }
        }
    }

    #[test]
    fn compare_sets_flag_on_mismatch() {
        for (incoming, x) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let (h, c) = compare(0, incoming, 0, 1, x);
            assert_eq!(get(h, 0), incoming);
            assert_eq!(get(h, 1), (incoming != x) as usize);
            assert_eq!(c, x);
        }
    }

    #[test]
    fn hidden_inputs_are_rejected() {
        let turn = Turn { player: 0, gate: Gate::WriteBit { slot: 0, input: b(1, 0) } };
        let r = ProtocolSpec::new(Mode::Nih, 1, vec![2, 2], vec![turn.clone()]);
        assert!(matches!(r, Err(Error::HiddenInput { .. })));
        assert!(ProtocolSpec::new(Mode::Nof, 1, vec![2, 2], vec![turn]).is_ok());

        let own = Turn { player: 0, gate: Gate::ChannelNot { control: Some(b(0, 0)) } };
        assert!(matches!(ProtocolSpec::new(Mode::Nof, 1, vec![2, 2], vec![own]), Err(Error::HiddenInput { .. })));
    }

    #[test]
    fn non_unitary_literal_is_rejected() {
        let mut m = FloatMatrix::identity(4);
        m.set(0, 0, Complex64::new(2.0, 0.0));
        let r = ProtocolSpec::new(Mode::Nih, 1, vec![2, 2], vec![Turn { player: 0, gate: Gate::Matrix(m) }]);
        assert!(matches!(r, Err(Error::NonUnitary { turn: 1, .. })));
    }

    #[test]
    fn slot_range_is_checked() {
        let turn = Turn { player: 0, gate: Gate::WriteBit { slot: 1, input: b(0, 0) } };
        assert!(ProtocolSpec::new(Mode::Nih, 1, vec![2, 2], vec![turn]).is_err());
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for size in [2, 4, 8] {
            assert!(random_unitary(&mut rng, size).unitarity_residual() < 1e-12);
        }
    }
}
