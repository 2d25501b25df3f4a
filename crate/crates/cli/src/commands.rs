//! The table-producing subcommands. Energies are converted back to the configured unit at the
//! output boundary; lengths go out in its inverse.

use std::ops::RangeInclusive;

use dressed_ring::field::{region_weights, synthesize};
use dressed_ring::oracle::diagonalize_and_compare;
use dressed_ring::resonance::{find_qubit_pairs, resonant_energies, verified_root};
use dressed_ring::selfenergy::{sigma_matrix, sigma_single};
use dressed_ring::spectrum::{solve_single, solve_subthreshold, solve_two, solve_two_subthreshold};
use dressed_ring::{
    DressedStateF64, Error, Parity, Region, ResonantCandidate, SolveMode, SpectrumReportF64, StateLabel, SystemParamsF64,
    Tolerances,
};

use crate::config::{ResonanceSpec, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{Cell, Table};

/// Deviations below this are at eigensolver precision and count as converged.
pub const ORACLE_FLOOR: f64 = 1e-11;

/// Allowed growth of an oracle deviation from one cut-off to the next.
pub const ORACLE_NOISE: f64 = 0.1;

/// Smallest automatic field grid.
const MIN_FIELD_GRID: usize = 1024;

pub fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Symmetric => "symmetric",
        Parity::Antisymmetric => "antisymmetric",
    }
}

pub fn region_name(r: Region) -> &'static str {
    match r {
        Region::Inner => "inner",
        Region::Outer => "outer",
    }
}

/// Roots in `range`, plus the sub-threshold root(s) when the range starts at threshold.
///
/// A sub-threshold root below the search floor is left out; the caller sees it missing from
/// the report rather than an error.
pub fn analytic_spectrum(p: &SystemParamsF64, range: RangeInclusive<i64>, mode: SolveMode, tol: &Tolerances) -> Result<SpectrumReportF64> {
    let with_sub = *range.start() == 0;
    if p.emitter_count() == 1 {
        let report = solve_single(p, range, tol)?;
        if !with_sub {
            return Ok(report);
        }
        match solve_subthreshold(p, tol) {
            Ok(s) => Ok(report.extend([s])),
            Err(Error::BelowSearchFloor { .. }) => Ok(report),
            Err(e) => Err(e.into()),
        }
    } else {
        let report = solve_two(p, range, mode, tol)?;
        if !with_sub {
            return Ok(report);
        }
        Ok(report.extend(solve_two_subthreshold(p, mode, tol)?))
    }
}

fn branch_label(s: &DressedStateF64) -> &'static str {
    match s.label {
        StateLabel::Parity { parity, .. } => parity_name(parity),
        _ => "single",
    }
}

fn interleaving_note(r: &SpectrumReportF64) -> String {
    format!(
        "one_root_per_interval={} strictly_ordered={}",
        r.interleaving.one_root_per_interval, r.interleaving.strictly_ordered
    )
}

pub fn spectrum(cfg: &RunConfig) -> Result<Vec<Table>> {
    let p = cfg.params()?;
    let report = analytic_spectrum(&p, cfg.k_min..=cfg.k_max, cfg.mode, &cfg.tolerances)?;
    let mut t = Table::new("spectrum", &["interval_k", "E", "a_sq", "residual", "branch"]);
    t.note(interleaving_note(&report));
    for s in &report.states {
        t.push(vec![
            s.label.interval().into(),
            p.to_energy(s.energy).into(),
            s.atomic_weight.into(),
            p.to_energy(s.residual).into(),
            branch_label(s).into(),
        ]);
    }
    Ok(vec![t])
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
}

pub fn excitation_curve(cfg: &RunConfig) -> Result<Vec<Table>> {
    let p = cfg.params()?;
    if p.emitter_count() != 1 {
        return Err(CliError::Usage("excitation-curve is defined for a single emitter (omit d)".into()));
    }
    let eps_values: Vec<f64> = match (cfg.eps_min, cfg.eps_max) {
        (Some(a), Some(b)) => linspace(a, b, cfg.eps_steps).collect(),
        _ => vec![cfg.epsilon],
    };
    let mut t = Table::new("excitation-curve", &["epsilon", "interval_k", "E", "a_sq"]);
    for eps in eps_values {
        let q = p.with_epsilon(cfg.energy_in_m(eps))?;
        let report = analytic_spectrum(&q, cfg.k_min..=cfg.k_max, cfg.mode, &cfg.tolerances)?;
        for s in &report.states {
            t.push(vec![eps.into(), s.label.interval().into(), q.to_energy(s.energy).into(), s.atomic_weight.into()]);
        }
    }
    Ok(vec![t])
}

pub fn selfenergy(cfg: &RunConfig) -> Result<Vec<Table>> {
    let p = cfg.params()?;
    let pair = p.emitter_count() == 2;
    let m = p.mass();
    let cols: &[&'static str] = if pair {
        &["E", "sigma", "sigma_prime", "beta0", "beta1", "sigma12", "sigma12_prime"]
    } else {
        &["E", "sigma", "sigma_prime", "beta0", "beta1"]
    };
    let mut t = Table::new("selfenergy", cols);
    let mut skipped = 0usize;
    for e in linspace(cfg.e_min, cfg.e_max, cfg.e_steps) {
        let e_int = cfg.energy_in_m(e);
        let v = if pair { sigma_matrix(e_int, &p, &cfg.tolerances) } else { sigma_single(e_int, &p, &cfg.tolerances) };
        let v = match v {
            Ok(v) => v,
            Err(Error::PoleProximity { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let mut row: Vec<Cell> = vec![
            e.into(),
            (v.value.diagonal() * m).into(),
            v.derivative.diagonal().into(),
            (v.beta0 / m).into(),
            v.beta1.map(|b| b / m).into(),
        ];
        if pair {
            row.push((v.value.off_diagonal() * m).into());
            row.push(v.derivative.off_diagonal().into());
        }
        t.push(row);
    }
    t.note(format!("rows skipped at photon frequencies: {skipped}"));
    Ok(vec![t])
}

fn require_pair(p: &SystemParamsF64, what: &str) -> Result<()> {
    if p.emitter_count() == 2 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} needs two emitters (set d)")))
    }
}

pub fn resonances(cfg: &RunConfig) -> Result<Vec<Table>> {
    let p = cfg.params()?;
    require_pair(&p, "resonances")?;
    let tol = &cfg.tolerances;
    let mut cands = Table::new("resonances", &["nu", "region", "branch", "E", "parity", "eps_tuning", "gap", "verified_E"]);
    for c in resonant_energies(&p, cfg.nu_max, tol)? {
        let verified = match c.epsilon_tuning {
            Some(eps) => verified_root(&c, &p, eps, tol)?,
            None => None,
        };
        cands.push(vec![
            c.nu.into(),
            region_name(c.region).into(),
            (c.chi_branch as i64).into(),
            p.to_energy(c.energy).into(),
            (c.parity.as_i32() as i64).into(),
            c.epsilon_tuning.map_or(Cell::from("NOT_TUNABLE"), |e| p.to_energy(e).into()),
            p.to_energy(c.nearest_mode_gap).into(),
            verified.map(|e| p.to_energy(e)).into(),
        ]);
    }
    let mut pairs = Table::new(
        "resonances_pairs",
        &[
            "nu_inner",
            "nu_outer",
            "E_inner",
            "E_outer",
            "parity_inner",
            "parity_outer",
            "detuning",
            "k_bar",
            "gap",
            "g_max",
            "commensurability",
            "separation_ratio",
            "eps_inner",
            "eps_outer",
            "shared_tuning",
        ],
    );
    for q in find_qubit_pairs(&p, cfg.nu_max, cfg.energy_in_m(cfg.detuning_tol), tol)? {
        let eps = |c: &ResonantCandidate<f64>| c.epsilon_tuning.map(|e| p.to_energy(e));
        pairs.push(vec![
            q.inner.nu.into(),
            q.outer.nu.into(),
            p.to_energy(q.inner.energy).into(),
            p.to_energy(q.outer.energy).into(),
            (q.inner.parity.as_i32() as i64).into(),
            (q.outer.parity.as_i32() as i64).into(),
            p.to_energy(q.detuning).into(),
            q.k_bar.into(),
            p.to_energy(q.gap).into(),
            p.to_energy(q.g_max_with(cfg.headroom)).into(),
            q.commensurability.to_string().into(),
            q.separation_ratio.to_string().into(),
            eps(&q.inner).into(),
            eps(&q.outer).into(),
            q.shared_tuning.into(),
        ]);
    }
    Ok(vec![cands, pairs])
}

/// The state tuned onto a resonance: parameters with ε set to the tuning value, and the root of
/// matching parity closest to the resonance energy.
pub fn resonant_state(p: &SystemParamsF64, spec: ResonanceSpec, tol: &Tolerances) -> Result<(SystemParamsF64, DressedStateF64)> {
    require_pair(p, "a resonance")?;
    let c = resonant_energies(p, spec.nu, tol)?
        .into_iter()
        .find(|c| c.region == spec.region && c.nu == spec.nu && c.chi_branch == spec.branch)
        .ok_or_else(|| CliError::Usage(format!("no resonance {spec:?}")))?;
    let eps = c.epsilon_tuning.ok_or(Error::NotTunable { nu: c.nu })?;
    let tuned = (*p).with_epsilon(eps)?;
    let k = tuned.interval_of(c.energy).unwrap_or(0);
    let state = solve_two(&tuned, (k - 1).max(0)..=k, SolveMode::FullDeterminant, tol)?
        .states
        .into_iter()
        .filter(|s| s.parity() == Some(c.parity))
        .min_by(|a, b| (a.energy - c.energy).abs().total_cmp(&(b.energy - c.energy).abs()))
        .ok_or(Error::RoundTrip { expected: c.energy, found: None })?;
    Ok((tuned, state))
}

/// Grid for a state: at least eight points per shortest wavelength in the series.
pub fn auto_grid(state: &DressedStateF64) -> usize {
    (8 * state.k_trunc as usize).max(MIN_FIELD_GRID)
}

pub fn field(cfg: &RunConfig) -> Result<Vec<Table>> {
    let p = cfg.params()?;
    let tol = &cfg.tolerances;
    let (params, state, name) = match cfg.resonance {
        Some(spec) => {
            let (tuned, s) = resonant_state(&p, spec, tol)?;
            (tuned, s, format!("field_{}_{}_{}", region_name(spec.region), spec.nu, spec.branch))
        }
        None => {
            let k = cfg.state_k.unwrap_or(cfg.k_min);
            if k < 0 {
                return Err(CliError::Usage("state_k must be >= 0".into()));
            }
            let s = if p.emitter_count() == 1 {
                solve_single(&p, k..=k, tol)?.states.remove(0)
            } else {
                solve_two(&p, k..=k, cfg.mode, tol)?
                    .states
                    .into_iter()
                    .find(|s| s.parity() == Some(cfg.parity))
                    .ok_or_else(|| CliError::NoState(format!("no {} root in interval {k}", parity_name(cfg.parity))))?
            };
            (p, s, "field".to_string())
        }
    };
    let n = cfg.n_grid.unwrap_or_else(|| auto_grid(&state));
    let f = synthesize(&state, n)?;
    let m = params.mass();
    let mut t = Table::new(name, &["x", "re", "im", "abs2"]);
    t.note(format!(
        "state E={:e} a_sq={:e} epsilon={:e} k_trunc={}",
        params.to_energy(state.energy),
        state.atomic_weight,
        params.to_energy(params.epsilon()),
        state.k_trunc
    ));
    if params.emitter_count() == 2 {
        let w = region_weights(&state, &params)?;
        t.note(format!("photon weight inner={:e} outer={:e}", w.inner, w.outer));
    }
    for (x, v) in f.grid.iter().zip(&f.values) {
        t.push(vec![(x / m).into(), (v.re * m).into(), (v.im * m).into(), (v.norm_sqr() * m * m).into()]);
    }
    Ok(vec![t])
}

pub fn oracle(cfg: &RunConfig) -> Result<Vec<Table>> {
    let p = cfg.params()?;
    let analytic = analytic_spectrum(&p, cfg.k_min..=cfg.k_max, cfg.mode, &cfg.tolerances)?;
    let report = diagonalize_and_compare(&p, &analytic, &cfg.ladder, cfg.jobs)?;
    let mut t = Table::new("oracle", &["K", "root_index", "E_matrix", "E_analytic", "deviation", "overlap"]);
    for level in &report.levels {
        t.note(format!(
            "K={} max_deviation={:e} min_overlap={:e} skipped={}",
            level.k_max,
            p.to_energy(level.max_deviation()),
            level.min_overlap(),
            level.skipped.len()
        ));
    }
    t.note(format!("monotone={}", report.monotone(ORACLE_NOISE, ORACLE_FLOOR)));
    for r in report.rows() {
        t.push(vec![
            r.k_max.into(),
            r.root_index.into(),
            p.to_energy(r.e_matrix).into(),
            p.to_energy(r.e_analytic).into(),
            p.to_energy(r.deviation).into(),
            r.overlap.into(),
        ]);
    }
    Ok(vec![t])
}
