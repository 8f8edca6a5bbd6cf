//! Per-event sampling of the observer's pointer record and ensemble
//! statistics.
//!
//! Each event draws one uniform from a ChaCha8 stream selected by the event
//! index, so the outcome of event `n` depends only on `(seed, n)` and never
//! on the order in which events run. The density component of every event's
//! doublet is the same shared final state; sampling never touches it.

use std::io::{self, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{
    coupling_hamiltonian, final_pure_state, initial_density, liouville_evolve, MeasurementModel, OBSERVER,
    POINTER_DIM,
};
use crate::states::{DensityState, DoubletState, GemengeState, PureState, StatisticalDoublet};
use crate::table::format_g12;

/// Counter-based uniform source keyed by `(seed, event_index)`.
#[derive(Debug, Clone)]
pub struct EventRng {
    seed: u64,
    keyed: ChaCha8Rng,
}

impl EventRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, keyed: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in `[0, 1)` for one event.
    pub fn uniform(&self, event_index: u64) -> f64 {
        let mut rng = self.keyed.clone();
        rng.set_stream(event_index);
        rng.set_word_pos(0);
        rng.random::<f64>()
    }
}

#[derive(Debug, Clone)]
pub struct EventRecord {
    pub event_index: u64,
    /// 1 or 2.
    pub outcome_branch: usize,
    pub pointer_value: f64,
    pub doublet: DoubletState,
}

/// Draws events for one model. Holds the shared density component.
#[derive(Debug, Clone)]
pub struct Sampler {
    phi_d: Arc<DensityState>,
    p1: f64,
    pointer_values: [f64; 2],
    rng: EventRng,
}

impl Sampler {
    pub fn new(model: &MeasurementModel, seed: u64) -> Self {
        let q = model.pointer_eigenvalues();
        Self {
            phi_d: Arc::new(final_pure_state(model)),
            p1: model.branch_probabilities()[0],
            pointer_values: [q[1], q[2]],
            rng: EventRng::new(seed),
        }
    }

    pub fn phi_d(&self) -> &Arc<DensityState> {
        &self.phi_d
    }

    /// Branch 1 with probability `|a_1|²`, else branch 2.
    pub fn branch(&self, event_index: u64) -> usize {
        if self.rng.uniform(event_index) < self.p1 {
            1
        } else {
            2
        }
    }

    pub fn sample(&self, event_index: u64) -> EventRecord {
        let branch = self.branch(event_index);
        let doublet = DoubletState::new(Arc::clone(&self.phi_d), branch, POINTER_DIM)
            .expect("branch index is a pointer state");
        EventRecord {
            event_index,
            outcome_branch: branch,
            pointer_value: self.pointer_values[branch - 1],
            doublet,
        }
    }
}

/// One event drawn for `model` from the stream `(seed, event_index)`.
pub fn sample_event(model: &MeasurementModel, seed: u64, event_index: u64) -> EventRecord {
    Sampler::new(model, seed).sample(event_index)
}

/// Events `0..n_events` in index order.
pub fn simulate_events(model: &MeasurementModel, n_events: u64, seed: u64) -> Vec<EventRecord> {
    let sampler = Sampler::new(model, seed);
    (0..n_events).into_par_iter().map(|n| sampler.sample(n)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStatistics {
    pub n_events: u64,
    pub counts: [u64; 2],
    pub empirical_frequencies: [f64; 2],
    pub expected_probabilities: [f64; 2],
    pub max_abs_deviation: f64,
    pub pointer_values: [f64; 2],
    pub seed: u64,
}

impl RunStatistics {
    pub fn from_counts(counts: [u64; 2], expected_probabilities: [f64; 2], pointer_values: [f64; 2], seed: u64) -> Self {
        let n_events = counts[0] + counts[1];
        let n = n_events.max(1) as f64;
        let empirical_frequencies = [counts[0] as f64 / n, counts[1] as f64 / n];
        let max_abs_deviation = (0..2)
            .map(|k| (empirical_frequencies[k] - expected_probabilities[k]).abs())
            .fold(0.0, f64::max);
        Self { n_events, counts, empirical_frequencies, expected_probabilities, max_abs_deviation, pointer_values, seed }
    }

    /// Average recorded pointer value.
    pub fn mean_pointer_value(&self) -> f64 {
        self.empirical_frequencies[0] * self.pointer_values[0] + self.empirical_frequencies[1] * self.pointer_values[1]
    }
}

/// Branch counts for events `0..n_events`. The tally is independent of how
/// rayon splits the range.
pub fn run_ensemble(model: &MeasurementModel, n_events: u64, seed: u64) -> RunStatistics {
    let sampler = Sampler::new(model, seed);
    let counts = (0..n_events)
        .into_par_iter()
        .fold(|| [0u64; 2], |mut acc, n| {
            acc[sampler.branch(n) - 1] += 1;
            acc
        })
        .reduce(|| [0u64; 2], |a, b| [a[0] + b[0], a[1] + b[1]]);
    RunStatistics::from_counts(counts, model.branch_probabilities(), sampler.pointer_values, seed)
}

/// Pointer-basis ensemble table `{|O_i>; f_i}` from observed frequencies.
/// Branches that never occurred are left out.
pub fn empirical_gemenge(stats: &RunStatistics) -> Result<GemengeState> {
    if stats.n_events == 0 {
        return Err(Error::InsufficientEvents { found: 0, required: 1 });
    }
    let entries = (0..2)
        .filter(|&k| stats.counts[k] > 0)
        .map(|k| (PureState::basis(POINTER_DIM, k + 1), stats.empirical_frequencies[k]))
        .collect();
    GemengeState::new(entries)
}

/// Ensemble doublets along the interaction. The coupling Hamiltonian acts
/// only on `[t0, t1]`; before `t0` the state is the initial one and after
/// `t1` it stays at the final one.
pub fn eta_trajectory(model: &MeasurementModel, times: &[f64]) -> Result<Vec<StatisticalDoublet>> {
    let rho0 = initial_density(model);
    let duration = model.duration();
    if duration == 0.0 {
        let rho1 = final_pure_state(model);
        return times
            .iter()
            .map(|&t| {
                let rho = if t < model.t0() { rho0.clone() } else { rho1.clone() };
                StatisticalDoublet::from_density(rho, OBSERVER)
            })
            .collect();
    }
    let h = coupling_hamiltonian(model.coupling(), model.t0(), model.t1())?;
    times
        .iter()
        .map(|&t| {
            let elapsed = (t - model.t0()).clamp(0.0, duration);
            StatisticalDoublet::from_density(liouville_evolve(&rho0, &h, elapsed)?, OBSERVER)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistributionTest {
    pub z_score: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Set when `|a_1|²` is 0 or 1 and the counts were compared exactly.
    pub exact: bool,
}

pub const MIN_TEST_EVENTS: u64 = 100;

/// Two-sided binomial z-test of the branch-1 count against `|a_1|²`.
pub fn distribution_test(stats: &RunStatistics, threshold: f64) -> Result<DistributionTest> {
    if stats.n_events < MIN_TEST_EVENTS {
        return Err(Error::InsufficientEvents { found: stats.n_events, required: MIN_TEST_EVENTS });
    }
    let p = stats.expected_probabilities[0];
    let n = stats.n_events as f64;
    if p <= 0.0 || p >= 1.0 {
        let want = if p >= 1.0 { stats.n_events } else { 0 };
        let passed = stats.counts[0] == want;
        return Ok(DistributionTest { z_score: if passed { 0.0 } else { f64::INFINITY }, threshold, passed, exact: true });
    }
    let z = (stats.empirical_frequencies[0] - p) / (p * (1.0 - p) / n).sqrt();
    Ok(DistributionTest { z_score: z, threshold, passed: z.abs() <= threshold, exact: false })
}

/// Delimited event log: `event_index,outcome_branch,pointer_value`.
pub fn write_event_log<'a, W: Write>(w: &mut W, events: impl IntoIterator<Item = &'a EventRecord>) -> io::Result<()> {
    writeln!(w, "event_index,outcome_branch,pointer_value")?;
    for e in events {
        writeln!(w, "{},{},{}", e.event_index, e.outcome_branch, format_g12(e.pointer_value))?;
    }
    Ok(())
}

/// Mixture of the empirical table as a pointer-space density.
pub fn empirical_pointer_density(stats: &RunStatistics) -> Result<DensityState> {
    let spec = crate::linalg::SpaceSpec::single(OBSERVER, POINTER_DIM)?;
    crate::states::mix(&empirical_gemenge(stats)?, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::observer_restricted_density;
    use crate::states::state_distance;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn equal() -> MeasurementModel {
        MeasurementModel::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap()
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = EventRng::new(42);
        let b = EventRng::new(42);
        assert_eq!(a.uniform(7).to_bits(), b.uniform(7).to_bits());
        assert_ne!(a.uniform(7), a.uniform(8));
        assert_ne!(a.uniform(7), EventRng::new(43).uniform(7));
        let u = a.uniform(12345);
        assert!((0.0..1.0).contains(&u));
    }

    #[test]
    fn deterministic_branches() {
        let m = MeasurementModel::real(1.0, 0.0).unwrap();
        let s = Sampler::new(&m, 9);
        for n in 0..1000 {
            let e = s.sample(n);
            assert_eq!(e.outcome_branch, 1);
            assert_eq!(e.pointer_value, 1.0);
            assert_eq!(e.doublet.pointer(), 1);
        }
        let m = MeasurementModel::real(0.0, 1.0).unwrap();
        let s = Sampler::new(&m, 9);
        assert!((0..1000).all(|n| s.branch(n) == 2));
    }

    #[test]
    fn equal_split_frequency() {
        let m = equal();
        let first: Vec<usize> = (0..32).map(|n| sample_event(&m, 5, n).outcome_branch).collect();
        let again: Vec<usize> = (0..32).map(|n| sample_event(&m, 5, n).outcome_branch).collect();
        assert_eq!(first, again);
        let stats = run_ensemble(&m, 100_000, 5);
        assert!((0.49..=0.51).contains(&stats.empirical_frequencies[0]));
    }

    #[test]
    fn sampling_leaves_density_component_alone() {
        let m = MeasurementModel::real(0.6, 0.8).unwrap();
        let reference = final_pure_state(&m);
        let events = simulate_events(&m, 500, 3);
        for (n, e) in events.iter().enumerate() {
            assert_eq!(e.event_index, n as u64);
            assert_eq!(e.doublet.phi_d(), &reference);
            assert_eq!(e.doublet.pointer(), e.outcome_branch);
        }
        assert!(Arc::ptr_eq(events[0].doublet.shared_phi_d(), events[499].doublet.shared_phi_d()));
    }

    #[test]
    fn ensemble_examples() {
        let s = run_ensemble(&MeasurementModel::real(1.0, 0.0).unwrap(), 1, 0);
        assert_eq!(s.counts, [1, 0]);

        let s = run_ensemble(&MeasurementModel::real(0.6, 0.8).unwrap(), 100_000, 11);
        assert!((s.empirical_frequencies[1] - 0.64).abs() <= 0.0061);
        assert_eq!(s.counts[0] + s.counts[1], 100_000);

        let s = run_ensemble(&equal(), 100_000, 11);
        assert!((s.mean_pointer_value() - 1.5).abs() <= 0.01);
    }

    #[test]
    fn ensemble_is_bit_identical_on_replay() {
        let m = MeasurementModel::real(0.6, 0.8).unwrap();
        let a = run_ensemble(&m, 20_000, 77);
        let b = run_ensemble(&m, 20_000, 77);
        assert_eq!(a, b);
        // sequential tally agrees with the parallel one
        let sampler = Sampler::new(&m, 77);
        let ones = (0..20_000).filter(|&n| sampler.branch(n) == 1).count() as u64;
        assert_eq!(a.counts[0], ones);
    }

    #[test]
    fn gemenge_tables() {
        let g = empirical_gemenge(&RunStatistics::from_counts([100, 0], [1.0, 0.0], [1.0, 2.0], 0)).unwrap();
        assert_eq!(g.entries().len(), 1);
        assert_eq!(g.entries()[0].state, PureState::basis(3, 1));
        assert_eq!(g.entries()[0].probability, 1.0);

        let g = empirical_gemenge(&RunStatistics::from_counts([50, 50], [0.5, 0.5], [1.0, 2.0], 0)).unwrap();
        assert_eq!(g.entries().len(), 2);
        assert_eq!(g.entries()[1].state, PureState::basis(3, 2));
        assert_eq!(g.entries()[1].probability, 0.5);

        let m = equal();
        let stats = run_ensemble(&m, 100_000, 21);
        let emp = empirical_pointer_density(&stats).unwrap();
        let r_o = observer_restricted_density(&final_pure_state(&m)).unwrap();
        assert!(state_distance(&emp, &r_o).unwrap() <= 0.01);

        assert!(empirical_gemenge(&RunStatistics::from_counts([0, 0], [0.5, 0.5], [1.0, 2.0], 0)).is_err());
    }

    #[test]
    fn trajectory_endpoints() {
        let m = MeasurementModel::real(0.6, 0.8).unwrap().with_times(0.5, 2.0).unwrap();
        let traj = eta_trajectory(&m, &[0.0, 0.5, 2.0, 3.0]).unwrap();
        let close = |a: &[f64], b: [f64; 3]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-10);
        assert!(close(traj[0].eta_i(), [1.0, 0.0, 0.0]));
        assert!(close(traj[1].eta_i(), [1.0, 0.0, 0.0]));
        assert!(close(traj[2].eta_i(), [0.0, 0.36, 0.64]));
        assert!(close(traj[3].eta_i(), [0.0, 0.36, 0.64]));
        for sd in &traj {
            assert!(sd.consistency_residual(OBSERVER).unwrap() < 1e-10);
        }
    }

    #[test]
    fn erasing_the_record() {
        let m = MeasurementModel::real(0.6, 0.8).unwrap();
        let at_t1 = eta_trajectory(&m, &[m.t1()]).unwrap().remove(0);
        let h = m.coupling_hamiltonian().unwrap();
        let back = liouville_evolve(at_t1.eta_d(), &h, -m.duration()).unwrap();
        let sd = StatisticalDoublet::from_density(back, OBSERVER).unwrap();
        assert!((sd.eta_i()[0] - 1.0).abs() < 1e-8);
        assert!(sd.eta_i()[1].abs() < 1e-8 && sd.eta_i()[2].abs() < 1e-8);
    }

    #[test]
    fn trajectory_is_continuous() {
        let m = equal().with_times(0.0, 1.0).unwrap();
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 1e-3).collect();
        let traj = eta_trajectory(&m, &times).unwrap();
        for w in traj.windows(2) {
            for (a, b) in w[0].eta_i().iter().zip(w[1].eta_i()) {
                assert!((a - b).abs() < 1e-2);
            }
        }
        for sd in &traj {
            let sum: f64 = sd.eta_i().iter().sum();
            assert!((sum - 1.0).abs() < 1e-10);
            assert!(sd.eta_i().iter().all(|p| *p >= -1e-10));
        }
    }

    #[test]
    fn instantaneous_interaction() {
        let m = MeasurementModel::real(0.6, 0.8).unwrap().with_times(1.0, 1.0).unwrap();
        let traj = eta_trajectory(&m, &[0.0, 1.0]).unwrap();
        assert!((traj[0].eta_i()[0] - 1.0).abs() < 1e-12);
        assert!((traj[1].eta_i()[2] - 0.64).abs() < 1e-12);
    }

    #[test]
    fn z_test_examples() {
        let t = distribution_test(&RunStatistics::from_counts([50_000, 50_000], [0.5, 0.5], [1.0, 2.0], 0), 4.0).unwrap();
        assert_eq!(t.z_score, 0.0);
        assert!(t.passed && !t.exact);

        let t = distribution_test(&RunStatistics::from_counts([60_000, 40_000], [0.5, 0.5], [1.0, 2.0], 0), 4.0).unwrap();
        // z = (0.6 − 0.5) / sqrt(0.25 / 1e5)
        let want = 0.1 / (0.25f64 / 1e5).sqrt();
        assert!((t.z_score - want).abs() < 1e-9);
        assert!((t.z_score - 63.25).abs() < 0.01);
        assert!(!t.passed);

        let t = distribution_test(&RunStatistics::from_counts([100, 0], [1.0, 0.0], [1.0, 2.0], 0), 4.0).unwrap();
        assert!(t.passed && t.exact);
        let t = distribution_test(&RunStatistics::from_counts([99, 1], [1.0, 0.0], [1.0, 2.0], 0), 4.0).unwrap();
        assert!(!t.passed && t.exact);

        assert!(matches!(
            distribution_test(&RunStatistics::from_counts([10, 10], [0.5, 0.5], [1.0, 2.0], 0), 4.0),
            Err(Error::InsufficientEvents { found: 20, required: 100 })
        ));
    }

    #[test]
    fn deviation_shrinks_like_inverse_root_n() {
        let m = MeasurementModel::real(0.6, 0.8).unwrap();
        let avg = |n: u64| (0..20).map(|seed| run_ensemble(&m, n, 1000 + seed).max_abs_deviation).sum::<f64>() / 20.0;
        let ratio = avg(40_000) / avg(10_000);
        assert!((0.3..0.75).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn event_log_format() {
        let m = MeasurementModel::real(1.0, 0.0).unwrap();
        let events = simulate_events(&m, 2, 0);
        let mut buf = Vec::new();
        write_event_log(&mut buf, &events).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "event_index,outcome_branch,pointer_value\n0,1,1\n1,1,1\n");
    }
}
