use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::CMatrix;
use crate::superop::{Channel, OpenSystemModel};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let m = random_complex(rng, d);
    (&m + m.adjoint()).map(|z| z * 0.5)
}

/// Random Hamiltonian with `k` dense random jump operators.
pub fn random_model(rng: &mut ChaCha8Rng, d: usize, k: usize) -> OpenSystemModel {
    let h = random_hermitian(rng, d);
    let channels = (0..k).map(|i| Channel::new(format!("L{i}"), random_complex(rng, d))).collect();
    OpenSystemModel::new(h, channels).unwrap()
}

/// Fully connected classical network; optionally with a random diagonal Hamiltonian.
pub fn random_classical_model(rng: &mut ChaCha8Rng, n: usize, diagonal_h: bool) -> OpenSystemModel {
    let mut h = CMatrix::zeros(n, n);
    if diagonal_h {
        for i in 0..n {
            h[(i, i)] = Complex64::new(2.0 * rng.random::<f64>() - 1.0, 0.0);
        }
    }
    let mut channels = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let mut op = CMatrix::zeros(n, n);
                op[(a, b)] = Complex64::new((0.1 + rng.random::<f64>()).sqrt(), 0.0);
                channels.push(Channel::new(format!("{b}->{a}"), op));
            }
        }
    }
    OpenSystemModel::new(h, channels).unwrap()
}
