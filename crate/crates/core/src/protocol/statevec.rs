//! Full state-vector simulation, independent of the branch form.

use num_complex::Complex64;

use super::ProtocolSpec;
use crate::error::Result;
use crate::scalar::FloatComplex;

/// Final state on `H_1 ⊗ ⋯ ⊗ H_k ⊗ C` (player 1 slowest, channel fastest).
pub fn simulate_dense(spec: &ProtocolSpec, inputs: &[u64]) -> Result<Vec<FloatComplex>> {
    spec.check_inputs(inputs)?;
    let dims = spec.player_dims();
    let total = 2 * dims.iter().product::<usize>();
    let mut state = vec![Complex64::new(0.0, 0.0); total];
    state[0] = Complex64::new(1.0, 0.0);

    for (t, turn) in spec.turns().iter().enumerate() {
        let u = spec.turn_unitary(t, inputs)?;
        let p = turn.player;
        let dim = dims[p];
        // index = ((outer * dim + h) * inner + rest) * 2 + c
        let inner: usize = dims[p + 1..].iter().product();
        let outer: usize = dims[..p].iter().product();
        let mut local = vec![Complex64::new(0.0, 0.0); 2 * dim];
        for o in 0..outer {
            for r in 0..inner {
                let at = |h: usize, c: usize| ((o * dim + h) * inner + r) * 2 + c;
                for h in 0..dim {
                    for c in 0..2 {
                        local[2 * h + c] = state[at(h, c)];
                    }
                }
                let out = u.mul_vec(&local);
                for h in 0..dim {
                    for c in 0..2 {
                        state[at(h, c)] = out[2 * h + c];
                    }
                }
            }
        }
    }
    Ok(state)
}
