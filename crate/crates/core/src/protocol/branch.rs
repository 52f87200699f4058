//! Branch-form simulation: after `ℓ` turns the state is
//! `Σ_m |A_m^1⟩ ⋯ |A_m^k⟩ |m_ℓ⟩` over transcripts `m ∈ {0,1}^ℓ`.

use num_complex::Complex64;

use super::ProtocolSpec;
use crate::error::Result;
use crate::scalar::FloatComplex;

/// Per-transcript product vectors. `branches[m][t]` is player `t`'s vector for
/// transcript `m`, read as an `ℓ`-bit integer with the first message most
/// significant.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchState {
    player_dims: Vec<usize>,
    turns: usize,
    branches: Vec<Vec<Vec<FloatComplex>>>,
}

fn norm_sqr(v: &[FloatComplex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn kron(a: &[FloatComplex], b: &[FloatComplex]) -> Vec<FloatComplex> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

impl BranchState {
    /// The initial product state `|0⟩ ⋯ |0⟩|0⟩`.
    pub fn initial(player_dims: &[usize]) -> Self {
        let vectors = player_dims
            .iter()
            .map(|&d| {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[0] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        BranchState { player_dims: player_dims.to_vec(), turns: 0, branches: vec![vectors] }
    }

    /// Transcript length `ℓ`.
    pub fn turns(&self) -> usize {
        self.turns
    }

    pub fn players(&self) -> usize {
        self.player_dims.len()
    }

    pub fn player_dims(&self) -> &[usize] {
        &self.player_dims
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn branch(&self, m: usize) -> &[Vec<FloatComplex>] {
        &self.branches[m]
    }

    /// Channel value `m_ℓ` carried by branch `m`.
    pub fn channel_bit(&self, m: usize) -> usize {
        if self.turns == 0 {
            0
        } else {
            m & 1
        }
    }

    /// `Σ_m Π_t ‖A_m^t‖²`; each turn splits a branch norm-preservingly, so this stays 1.
    pub fn total_norm_sqr(&self) -> f64 {
        self.branches
            .iter()
            .map(|vs| vs.iter().map(|v| norm_sqr(v)).product::<f64>())
            .sum()
    }

    /// `⊗_t |A_m^t⟩` for players `range`.
    pub fn group_vector(&self, m: usize, players: std::ops::Range<usize>) -> Vec<FloatComplex> {
        self.branches[m][players]
            .iter()
            .fold(vec![Complex64::new(1.0, 0.0)], |acc, v| kron(&acc, v))
    }

    /// Full state vector on `H_1 ⊗ ⋯ ⊗ H_k ⊗ C`, channel fastest.
    pub fn recontract(&self) -> Vec<FloatComplex> {
        let dim: usize = self.player_dims.iter().product();
        let mut state = vec![Complex64::new(0.0, 0.0); 2 * dim];
        for m in 0..self.branches.len() {
            let c = self.channel_bit(m);
            let v = self.group_vector(m, 0..self.players());
            for (h, z) in v.iter().enumerate() {
                state[2 * h + c] += z;
            }
        }
        state
    }

    /// `⟨ψ|Π_1|ψ⟩`, the probability of a 1 on the channel.
    pub fn accept_probability(&self) -> f64 {
        self.recontract().iter().skip(1).step_by(2).map(|z| z.norm_sqr()).sum()
    }

    fn apply(&self, player: usize, u: &crate::matrix::FloatMatrix) -> BranchState {
        let dim = self.player_dims[player];
        let mut next = Vec::with_capacity(2 * self.branches.len());
        for (m, vectors) in self.branches.iter().enumerate() {
            let c = self.channel_bit(m);
            let a = &vectors[player];
            let support: Vec<usize> = (0..dim).filter(|&h| a[h] != Complex64::new(0.0, 0.0)).collect();
            let out: Vec<FloatComplex> =
                (0..2 * dim).map(|j| support.iter().map(|&h| u.get(j, 2 * h + c) * a[h]).sum()).collect();
            for b in 0..2 {
                let mut vs = vectors.clone();
                vs[player] = (0..dim).map(|h| out[2 * h + b]).collect();
                next.push(vs);
            }
        }
        BranchState { player_dims: self.player_dims.clone(), turns: self.turns + 1, branches: next }
    }
}

pub fn simulate_branches(spec: &ProtocolSpec, inputs: &[u64]) -> Result<BranchState> {
    simulate_branches_traced(spec, inputs).map(|(state, _)| state)
}

/// Also returns the total branch norm after every turn.
pub fn simulate_branches_traced(spec: &ProtocolSpec, inputs: &[u64]) -> Result<(BranchState, Vec<f64>)> {
    spec.check_inputs(inputs)?;
    let mut state = BranchState::initial(spec.player_dims());
    let mut norms = Vec::with_capacity(spec.cost());
    for (t, turn) in spec.turns().iter().enumerate() {
        let u = spec.turn_unitary(t, inputs)?;
        state = state.apply(turn.player, &u);
        norms.push(state.total_norm_sqr());
    }
    Ok((state, norms))
}
