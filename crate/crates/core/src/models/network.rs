//! Random networks of `n` levels where every pair of basis states is joined
//! either by a coherent tunnel term or by a strongly biased pair of jumps.
//!
//! Sampling is reproducible per `(seed, index)`: sample `index` draws from
//! stream `index` of a ChaCha20 generator keyed by `seed`. Within a stream,
//! pairs `(a, b)` with `a < b` are visited in lexicographic order and for
//! each pair the draws are: one uniform deciding coherent (`u < 1/2`) or
//! dissipative, then either `g = 3u` or `gamma = 3u, sigma = 3 + 2u`.
//! Rejected attempts keep consuming the same stream.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::ket_bra;
use crate::counting::{current_superop, mean_current, CountingScheme};
use crate::error::{invalid, KurError, Result};
use crate::kur::CURRENT_TOL;
use crate::linalg::CMatrix;
use crate::superop::{build_liouvillian, steady_state, Channel, OpenSystemModel};

/// Generator family recorded alongside ensemble output.
pub const RNG_FAMILY: &str = "chacha20";
pub const MAX_ATTEMPTS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdgeKind {
    Coherent {
        g: f64,
    },
    /// `forward` is the rate of `b -> a` (operator `sqrt(forward)|a><b|`),
    /// `backward = forward * exp(-sigma)` the rate of `a -> b`.
    Dissipative {
        forward: f64,
        backward: f64,
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub n: usize,
    pub seed: u64,
    pub index: u64,
    pub edges: Vec<Edge>,
    /// `(a, b)` of the monitored dissipative edge.
    pub counted_edge: (usize, usize),
    /// Rejected attempts before this sample was accepted.
    pub retries: u32,
}

#[derive(Debug, Clone)]
pub struct NetworkSample {
    pub model: OpenSystemModel,
    pub scheme: CountingScheme,
    pub spec: NetworkSpec,
}

fn draw_edges(rng: &mut ChaCha20Rng, n: usize) -> Vec<Edge> {
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            let kind = if rng.random::<f64>() < 0.5 {
                EdgeKind::Coherent { g: 3.0 * rng.random::<f64>() }
            } else {
                let forward = 3.0 * rng.random::<f64>();
                let sigma = 3.0 + 2.0 * rng.random::<f64>();
                EdgeKind::Dissipative { forward, backward: forward * (-sigma).exp(), sigma }
            };
            edges.push(Edge { a, b, kind });
        }
    }
    edges
}

/// Model and counting scheme of a given edge list. Returns `None` when no
/// dissipative edge exists.
pub fn network_model(n: usize, edges: &[Edge]) -> Result<Option<(OpenSystemModel, CountingScheme, (usize, usize))>> {
    let mut h = CMatrix::zeros(n, n);
    let mut channels = Vec::new();
    let mut weights = Vec::new();
    let mut counted = None;
    for e in edges {
        match e.kind {
            EdgeKind::Coherent { g } => {
                h[(e.a, e.b)] += Complex64::new(g, 0.0);
                h[(e.b, e.a)] += Complex64::new(g, 0.0);
            }
            EdgeKind::Dissipative { forward, backward, .. } => {
                let first = counted.is_none();
                if first {
                    counted = Some((e.a, e.b));
                }
                channels
                    .push(Channel::new(format!("{}->{}", e.b, e.a), ket_bra(n, e.a, e.b).map(|z| z * forward.sqrt())));
                channels
                    .push(Channel::new(format!("{}->{}", e.a, e.b), ket_bra(n, e.b, e.a).map(|z| z * backward.sqrt())));
                weights.extend(if first { [1.0, -1.0] } else { [0.0, 0.0] });
            }
        }
    }
    let Some(edge) = counted else { return Ok(None) };
    let model = OpenSystemModel::new(h, channels)?;
    Ok(Some((model, CountingScheme::jump(weights)?, edge)))
}

/// Draws network `index` of the ensemble keyed by `seed`.
pub fn sample_network(seed: u64, index: u64, n: usize) -> Result<NetworkSample> {
    if n < 2 {
        return Err(invalid("a network needs at least two levels"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    for attempt in 0..MAX_ATTEMPTS {
        let edges = draw_edges(&mut rng, n);
        let Some((model, scheme, counted_edge)) = network_model(n, &edges)? else { continue };
        let rho = match steady_state(&build_liouvillian(&model)) {
            Ok(rho) => rho,
            Err(KurError::DegenerateSteadyState { .. }) | Err(KurError::NoStationaryState { .. }) => continue,
            Err(e) => return Err(e),
        };
        let current = mean_current(&current_superop(&model, &scheme)?, &rho)?;
        if current.abs() <= CURRENT_TOL {
            continue;
        }
        let spec = NetworkSpec { n, seed, index, edges, counted_edge, retries: attempt };
        return Ok(NetworkSample { model, scheme, spec });
    }
    Err(KurError::RetryBudgetExhausted { attempts: MAX_ATTEMPTS })
}

/// Dense rate matrix of the dissipative edges alone (diagnostics).
pub fn dissipative_rates(spec: &NetworkSpec) -> DMatrix<f64> {
    let mut rates = DMatrix::zeros(spec.n, spec.n);
    for e in &spec.edges {
        if let EdgeKind::Dissipative { forward, backward, .. } = e.kind {
            rates[(e.a, e.b)] = forward;
            rates[(e.b, e.a)] = backward;
        }
    }
    rates
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed_and_index() {
        let a = sample_network(42, 3, 5).unwrap();
        let b = sample_network(42, 3, 5).unwrap();
        assert_eq!(a.spec, b.spec);
        assert_eq!(a.model, b.model);
        let c = sample_network(42, 4, 5).unwrap();
        assert_ne!(a.spec.edges, c.spec.edges);
    }

    #[test]
    fn parameters_within_ranges() {
        for i in 0..50 {
            let s = sample_network(7, i, 5).unwrap();
            assert_eq!(s.spec.edges.len(), 10);
            for e in &s.spec.edges {
                match e.kind {
                    EdgeKind::Coherent { g } => assert!((0.0..=3.0).contains(&g)),
                    EdgeKind::Dissipative { forward, backward, sigma } => {
                        assert!((0.0..=3.0).contains(&forward));
                        assert!((3.0..=5.0).contains(&sigma));
                        assert_eq!(backward, forward * (-sigma).exp());
                    }
                }
            }
            let (a, b) = s.spec.counted_edge;
            let first = s.spec.edges.iter().find(|e| matches!(e.kind, EdgeKind::Dissipative { .. })).unwrap();
            assert_eq!((first.a, first.b), (a, b));
        }
    }

    #[test]
    fn hamiltonian_is_symmetric_real() {
        let s = sample_network(1, 0, 5).unwrap();
        let h = s.model.hamiltonian();
        assert!(h.iter().all(|z| z.im == 0.0));
        assert_eq!(h, &h.transpose());
    }

    #[test]
    fn too_small_network_rejected() {
        assert!(sample_network(1, 0, 1).is_err());
    }

    #[test]
    fn all_coherent_network_has_no_model() {
        let edges = vec![Edge { a: 0, b: 1, kind: EdgeKind::Coherent { g: 1.0 } }];
        assert!(network_model(2, &edges).unwrap().is_none());
    }
}
