//! Deterministic fixtures shared by the benchmarks.

use idca::instances::{random_bounded_instance, random_spd, RandomInstance};
use idca::{
    make_decomposition, Algorithm, DcDecomposition, EtaPolicy, GammaSpec, InertialConfig,
    QpSubproblem,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 7;

/// A batch of bounded random instances with `n <= n_max`, `m <= m_max`.
pub fn instances(count: usize, n_max: usize, m_max: usize) -> Vec<RandomInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..count)
        .map(|_| random_bounded_instance(&mut rng, n_max, m_max).expect("instance"))
        .collect()
}

/// Strictly convex QPs over the feasible sets of [`instances`].
pub fn qp_subproblems(count: usize, n_max: usize, m_max: usize) -> Vec<QpSubproblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    instances(count, n_max, m_max)
        .into_iter()
        .map(|inst| {
            let p = inst.problem;
            let h = random_spd(&mut rng, p.n(), 0.1);
            let g = DVector::from_fn(p.n(), |_, _| rng.random_range(-3.0..3.0));
            QpSubproblem::new(h, g, p.a().clone(), p.b().clone()).expect("subproblem")
        })
        .collect()
}

/// Automatic η and the default inertial weight for the algorithm's splitting.
pub fn default_setup(inst: &RandomInstance, algo: Algorithm) -> (DcDecomposition, InertialConfig) {
    let dc = make_decomposition(&inst.problem, algo.variant(), EtaPolicy::Auto).expect("η");
    let cfg = InertialConfig::new(&dc, GammaSpec::default(), 1e-8, 100_000).expect("config");
    (dc, cfg)
}
