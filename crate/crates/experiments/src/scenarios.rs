//! The figure scenarios. Every scenario is a set of independent sweep points
//! evaluated on a rayon pool and gathered in input order.

use rayon::prelude::*;
use spinchain_core::adiabatic::{apply_first_order_map, fractional_pulse_state, multi_pulse_map, MapMode};
use spinchain_core::exact::{evolve_exact, evolve_multi_pulse_exact};
use spinchain_core::observables::{
    coherence_expect, entropy_of_coherence, excitation_density, population_vector, state_distance, CoherenceAxis,
};
use spinchain_core::ode::Tolerances;
use spinchain_core::{ClassicalConfig, DensityMatrix, Error as CoreError, PulseProfile, SpinChainModel};

use crate::config::{ExperimentConfig, MapChoice, Scenario};
use crate::error::{ExperimentError, Result};
use crate::fit::fit_power_law;
use crate::table::ResultTable;

type Rows = Vec<Vec<f64>>;

fn map_mode(choice: MapChoice) -> MapMode {
    match choice {
        MapChoice::Exponential => MapMode::Exponential,
        MapChoice::Linear => MapMode::Linear,
    }
}

/// Failures confined to one sweep point: the integrator gave up, or an
/// approximate state was too far from positive to take its entropy.
fn is_point_failure(e: &ExperimentError) -> bool {
    matches!(e, ExperimentError::Core(CoreError::Convergence { .. } | CoreError::Domain(_)))
}

/// Runs `f` on every point; a point-local failure becomes a single row made
/// of `key` followed by NaNs and a zero `converged` flag.
fn sweep<P, F>(points: &[P], width: usize, key: impl Fn(&P) -> Vec<f64> + Sync, f: F) -> Result<Vec<Rows>>
where
    P: Sync,
    F: Fn(&P) -> Result<Rows> + Sync,
{
    points
        .par_iter()
        .map(|p| match f(p) {
            Ok(rows) => Ok(rows),
            Err(e) if is_point_failure(&e) => {
                let mut row = key(p);
                row.resize(width - 1, f64::NAN);
                row.push(0.0);
                Ok(vec![row])
            }
            Err(e) => Err(e),
        })
        .collect()
}

fn config_labels(n_sites: usize) -> Vec<String> {
    ClassicalConfig::all(n_sites).map(|c| c.to_string()).collect()
}

/// `D(exact, map)` of the full state and of site 0 at fraction `s` of one
/// pulse.
pub fn scaling_point(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho0: &DensityMatrix,
    s: f64,
    mode: MapMode,
) -> Result<(f64, f64)> {
    let exact = evolve_exact(model, pulse, rho0, &[s])?.states.pop().expect("one target");
    let approx = apply_first_order_map(model, pulse, s, rho0, mode)?;
    let full = state_distance(&exact, &approx)?;
    let reduced = state_distance(&exact.reduced_site(0)?, &approx.reduced_site(0)?)?;
    Ok((full, reduced))
}

/// Exact and mapped states after `m = 0..=n_pulses` complete pulses.
pub fn multi_pulse_states(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho0: &DensityMatrix,
    n_pulses: usize,
) -> Result<Vec<(DensityMatrix, DensityMatrix)>> {
    let exact = evolve_multi_pulse_exact(model, pulse, rho0, n_pulses, &[1.0])?;
    (0..=n_pulses)
        .map(|m| Ok((exact.states[m].clone(), multi_pulse_map(model, pulse, rho0, m)?)))
        .collect()
}

/// Exact and mapped states at `m + 1/2` for `m = 0..n_pulses`.
pub fn mid_pulse_states(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho0: &DensityMatrix,
    n_pulses: usize,
) -> Result<Vec<(DensityMatrix, DensityMatrix)>> {
    let exact = evolve_multi_pulse_exact(model, pulse, rho0, n_pulses, &[0.5])?;
    (0..n_pulses)
        .map(|m| Ok((exact.states[m + 1].clone(), fractional_pulse_state(model, pulse, rho0, m, 0.5)?)))
        .collect()
}

fn pulse_dynamics(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let n = cfg.sites()[0];
    let labels = config_labels(n);
    let mut header = vec!["t_gamma".to_string(), "s".to_string()];
    for path in ["exact", "adiabatic"] {
        header.extend(labels.iter().map(|l| format!("{path}_p_{l}")));
        header.push(format!("{path}_cx"));
        header.push(format!("{path}_cy"));
    }
    header.push("converged".into());
    let grid = cfg.s_grid.clone().expect("validated");
    let model = cfg.model(n, cfg.v0)?;
    let rho0 = cfg.initial_state(n)?;
    let mode = map_mode(cfg.map);
    let blocks = sweep(&cfg.t_values, header.len(), |t| vec![t * cfg.gamma], |&t| {
        let pulse = cfg.pulse(t)?;
        let exact = evolve_exact(&model, &pulse, &rho0, &grid)?;
        grid.iter()
            .zip(&exact.states)
            .map(|(&s, ex)| {
                let ad = apply_first_order_map(&model, &pulse, s, &rho0, mode)?;
                let mut row = vec![t * cfg.gamma, s];
                for state in [ex, &ad] {
                    row.extend(population_vector(state));
                    row.push(coherence_expect(state, CoherenceAxis::X));
                    row.push(coherence_expect(state, CoherenceAxis::Y));
                }
                row.push(1.0);
                Ok(row)
            })
            .collect()
    })?;
    finish(header, blocks)
}

fn scaling(cfg: &ExperimentConfig, s: f64, reduced: bool) -> Result<ResultTable> {
    let mut header: Vec<String> = if reduced {
        vec!["n_sites", "t_gamma", "trace_distance_full", "trace_distance_reduced", "converged"]
    } else {
        vec!["n_sites", "t_gamma", "trace_distance", "converged"]
    }
    .into_iter()
    .map(String::from)
    .collect();
    let points: Vec<(usize, f64)> =
        cfg.sites().into_iter().flat_map(|n| cfg.t_values.iter().map(move |&t| (n, t))).collect();
    let mode = map_mode(cfg.map);
    let blocks = sweep(&points, header.len(), |&(n, t)| vec![n as f64, t * cfg.gamma], |&(n, t)| {
        let model = cfg.model(n, cfg.v0)?;
        let (full, red) = scaling_point(&model, &cfg.pulse(t)?, &cfg.initial_state(n)?, s, mode)?;
        let mut row = vec![n as f64, t * cfg.gamma, full];
        if reduced {
            row.push(red);
        }
        row.push(1.0);
        Ok(vec![row])
    })?;
    let mut rows: Rows = blocks.into_iter().flatten().collect();

    // Per-chain fit of the distance column over the converged points.
    let target = header.len() - 2;
    header.extend(["fit_slope", "fit_intercept", "fit_residual"].map(String::from));
    let mut fits = std::collections::BTreeMap::new();
    for n in cfg.sites() {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            rows.iter().filter(|r| r[0] == n as f64 && r[target + 1] == 1.0).map(|r| (r[1], r[target])).unzip();
        let fit = fit_power_law(&xs, &ys).ok();
        fits.insert(n, fit);
    }
    for row in &mut rows {
        let fit = fits[&(row[0] as usize)];
        row.extend(match fit {
            Some(f) => [f.slope, f.intercept, f.residual],
            None => [f64::NAN; 3],
        });
    }
    let mut table = ResultTable::new(header);
    for row in rows {
        table.push_row(row)?;
    }
    Ok(table)
}

fn multi_pulse_populations(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let n = cfg.sites()[0];
    let n_pulses = cfg.n_pulses.expect("validated");
    let labels = config_labels(n);
    let mut header = vec!["t_gamma".to_string(), "m".to_string()];
    header.extend(labels.iter().map(|l| format!("exact_p_{l}")));
    header.extend(labels.iter().map(|l| format!("map_p_{l}")));
    header.extend(["max_deviation", "converged"].map(String::from));
    let model = cfg.model(n, cfg.v0)?;
    let rho0 = cfg.initial_state(n)?;
    let blocks = sweep(&cfg.t_values, header.len(), |t| vec![t * cfg.gamma], |&t| {
        let states = multi_pulse_states(&model, &cfg.pulse(t)?, &rho0, n_pulses)?;
        Ok(states
            .iter()
            .enumerate()
            .map(|(m, (ex, map))| {
                let (pe, pm) = (population_vector(ex), population_vector(map));
                let dev = pe.iter().zip(&pm).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let mut row = vec![t * cfg.gamma, m as f64];
                row.extend(pe);
                row.extend(pm);
                row.extend([dev, 1.0]);
                row
            })
            .collect())
    })?;
    finish(header, blocks)
}

fn v0_t_points(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    cfg.v0_sweep().into_iter().flat_map(|v| cfg.t_values.iter().map(move |&t| (v, t))).collect()
}

fn multi_pulse_density(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let n = cfg.sites()[0];
    let n_pulses = cfg.n_pulses.expect("validated");
    let header: Vec<String> =
        ["v0", "t_gamma", "m", "density_exact", "density_map", "converged"].map(String::from).to_vec();
    let rho0 = cfg.initial_state(n)?;
    let blocks = sweep(&v0_t_points(cfg), header.len(), |&(v, t)| vec![v, t * cfg.gamma], |&(v0, t)| {
        let states = multi_pulse_states(&cfg.model(n, v0)?, &cfg.pulse(t)?, &rho0, n_pulses)?;
        Ok(states
            .iter()
            .enumerate()
            .map(|(m, (ex, map))| {
                vec![v0, t * cfg.gamma, m as f64, excitation_density(ex), excitation_density(map), 1.0]
            })
            .collect())
    })?;
    finish(header, blocks)
}

fn multi_pulse_coherence(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let n = cfg.sites()[0];
    let n_pulses = cfg.n_pulses.expect("validated");
    let header: Vec<String> =
        ["v0", "t_gamma", "m", "s_coh_exact", "s_coh_map", "converged"].map(String::from).to_vec();
    let rho0 = cfg.initial_state(n)?;
    let blocks = sweep(&v0_t_points(cfg), header.len(), |&(v, t)| vec![v, t * cfg.gamma], |&(v0, t)| {
        let states = mid_pulse_states(&cfg.model(n, v0)?, &cfg.pulse(t)?, &rho0, n_pulses)?;
        states
            .iter()
            .enumerate()
            .map(|(m, (ex, map))| {
                Ok(vec![
                    v0,
                    t * cfg.gamma,
                    m as f64,
                    entropy_of_coherence(ex.matrix())?,
                    entropy_of_coherence(map.matrix())?,
                    1.0,
                ])
            })
            .collect()
    })?;
    finish(header, blocks)
}

fn finish(header: Vec<String>, blocks: Vec<Rows>) -> Result<ResultTable> {
    let mut table = ResultTable::new(header);
    for row in blocks.into_iter().flatten() {
        table.push_row(row)?;
    }
    Ok(table)
}

/// Validates `cfg`, evaluates its scenario on `cfg.worker_count()` threads
/// and attaches the metadata preamble.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count())
        .build()
        .map_err(|e| ExperimentError::Config(format!("cannot start {} workers: {e}", cfg.worker_count())))?;
    let mut table = pool.install(|| match cfg.scenario {
        Scenario::PulseDynamics => pulse_dynamics(cfg),
        Scenario::ScalingFull => scaling(cfg, 1.0, false),
        Scenario::ScalingMid => scaling(cfg, 0.5, false),
        Scenario::ScalingReduced => scaling(cfg, 1.0, true),
        Scenario::MultiPulsePopulations => multi_pulse_populations(cfg),
        Scenario::MultiPulseDensity => multi_pulse_density(cfg),
        Scenario::MultiPulseCoherence => multi_pulse_coherence(cfg),
    })?;
    let tol = Tolerances::default();
    let mut meta = vec![
        ("scenario".to_string(), cfg.scenario.to_string()),
        ("code_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("integrator".to_string(), format!("Dormand-Prince 5(4), rtol={:e}, atol={:e}", tol.rtol, tol.atol)),
        ("log base".to_string(), "natural".to_string()),
        ("time unit".to_string(), "t_gamma = T * gamma".to_string()),
    ];
    let mut shown = cfg.clone();
    shown.workers = None;
    meta.push(("config".to_string(), shown.to_toml()));
    table.metadata = meta;
    Ok(table)
}
