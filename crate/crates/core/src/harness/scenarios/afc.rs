use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::{
    calibration, comb_profile, comb_spec, input_pulse, label, simulate, time_grid, write_echo,
};
use crate::detection::{
    fit_fringe_near, interference_scan, linear_fit, matched_lo, simulate_counts, visibility_model,
    PhaseNoiseModel, ScanSettings, Signal,
};
use crate::echo::{
    afc_dephasing, afc_efficiency, afc_efficiency_order, crib_efficiency, dipole_sum_oracle,
    multimode_capacity, EchoResult, FieldSchedule, Protocol, Pulse, TimeGrid,
};
use crate::error::{Error, Result};
use crate::harness::config::ScenarioConfig;
use crate::harness::run::{sub_seed, Run};
use crate::spectral::{sample_ensemble, CombSpec, PeakShape, StarkCalibration};
use crate::FWHM_PER_SIGMA;

/// Atoms drawn for the dephasing cross-check.
const ORACLE_ATOMS: usize = 100_000;
/// Allowed relative gap between the sampled dipole sum and the closed form.
const ORACLE_TOLERANCE: f64 = 0.05;

/// Field schedule with no segments; the calibration is never used.
fn no_field(delta: f64) -> FieldSchedule {
    FieldSchedule::off(StarkCalibration {
        voltage_ref: 1.0,
        factor_ref: 2.0,
        line_fwhm_ref: delta,
    })
}

/// Storage run on the configured comb with the given offset, long enough to
/// show `orders` echoes.
fn run_afc(cfg: &ScenarioConfig, spec: &CombSpec, orders: u32) -> Result<EchoResult> {
    let profile = comb_profile(cfg, spec)?;
    let pulse = input_pulse(cfg);
    let sched = no_field(spec.delta);
    let needed = pulse.center_time + orders as f64 / spec.delta + 0.5 / spec.delta;
    let grid = time_grid(cfg, &profile, &pulse, &sched, needed);
    simulate(&profile, &pulse, &sched, grid)
}

/// Compares the sampled dipole sum at `1/Δ` with the comb dephasing law.
fn dephasing_guard(run: &mut Run, spec: &CombSpec) -> Result<()> {
    if spec.shape != PeakShape::CalibratedGaussian {
        run.note("dephasing cross-check skipped: only defined for calibrated Gaussian peaks");
        return Ok(());
    }
    let profile = comb_profile(run.cfg, spec)?;
    let ensemble = sample_ensemble(&profile, ORACLE_ATOMS, 0.0, sub_seed(run.cfg.seed, 1000))?;
    let s = dipole_sum_oracle(&ensemble, &no_field(spec.delta), &[1.0 / spec.delta])?;
    let sampled = s[0].norm_sqr();
    let expected = afc_dephasing(spec.finesse(), 1);
    run.metric("oracle_dephasing_1", sampled);
    if (sampled / expected - 1.0).abs() > ORACLE_TOLERANCE {
        return Err(Error::OracleDivergence {
            check: "afc dephasing".into(),
            detail: format!("sampled |s(1/Δ)|² = {sampled:.4}, closed form {expected:.4}"),
        });
    }
    Ok(())
}

/// First and second echoes of a comb.
pub(crate) fn afc_echo(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let c = &cfg.comb;
    let spec = comb_spec(cfg, c.offset);
    dephasing_guard(run, &spec)?;
    let r = run_afc(cfg, &spec, 2)?;
    write_echo(run, "afc", &r)?;
    let step = r.step();
    let t0 = r.input.center_time;
    run.metric("time_step_s", step);
    run.metric("transmitted", r.transmitted);
    run.metric("total_output", r.total_output);
    let mut etas = Vec::new();
    for m in 1..=2u32 {
        let expected = t0 + m as f64 / c.delta;
        let e = r.echo_near(expected, 2.0 * r.input.fwhm).copied();
        let eta = e.map_or(0.0, |e| e.efficiency);
        etas.push(eta);
        run.metric(format!("eta_{m}"), eta);
        run.metric(
            format!("closed_form_eta_{m}_alone"),
            afc_efficiency_order(c.depth, c.finesse, c.background, m),
        );
        match e {
            Some(e) => {
                run.metric(format!("echo_{m}_delay_s"), e.peak_time - t0);
                run.metric(format!("echo_{m}_phase_rad"), e.phase);
                run.check(
                    format!("echo_{m}_within_one_step"),
                    (e.peak_time - expected).abs() <= step,
                );
            }
            None => run.check(format!("echo_{m}_within_one_step"), false),
        }
    }
    run.metric(
        "closed_form_eta_1",
        afc_efficiency(c.depth, c.finesse, c.background),
    );
    run.metric("eta_ratio_1_to_2", etas[0] / etas[1]);
    run.check("eta_1_exceeds_eta_2", etas[0] > etas[1]);

    let hist = simulate_counts(
        Signal::from_echo(&r),
        &|_| 0.0,
        &cfg.detector,
        cfg.counting.n_trials,
        (0.0, r.times[r.times.len() - 1]),
        cfg.counting.bin_width,
        cfg.seed,
    )?;
    run.sink
        .write_with("afc_histogram.csv", |b| hist.write_csv(b))?;
    Ok(())
}

/// Fringes of echoes against a matched local oscillator while the comb
/// offset is scanned, and the echo phase slope from simulated offsets.
pub(crate) fn fringe_scan(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let f = &cfg.fringe;
    let delta = cfg.comb.delta;
    let noise = PhaseNoiseModel::for_visibility(f.visibility_1)?;
    run.metric("phase_sigma_rad", noise.sigma);
    let max_order = f.orders.iter().copied().max().unwrap_or(1);

    // Echo phase versus comb offset from full simulations.
    let offsets: Vec<f64> = f.slope_offsets.iter().map(|x| x * delta).collect();
    let sims: Vec<EchoResult> = offsets
        .par_iter()
        .map(|o| run_afc(cfg, &comb_spec(cfg, cfg.comb.offset + o), max_order))
        .collect::<Result<_>>()?;
    let mut phase_rows = String::from("delta0_hz");
    for m in &f.orders {
        write!(phase_rows, ",phase_m{m}_rad").ok();
    }
    phase_rows.push('\n');
    let mut phases: Vec<Vec<f64>> = vec![Vec::new(); f.orders.len()];
    for (o, r) in offsets.iter().zip(&sims) {
        write!(phase_rows, "{o:e}").ok();
        for (k, m) in f.orders.iter().enumerate() {
            let t = r.input.center_time + *m as f64 / delta;
            let e = r
                .echo_near(t, 2.0 * r.input.fwhm)
                .ok_or_else(|| Error::Undefined(format!("echo {m} missing at offset {o:e} Hz")))?;
            // Unwrap along the scan.
            let mut p = e.phase;
            if let Some(prev) = phases[k].last() {
                p += 2.0 * PI * ((prev - p) / (2.0 * PI)).round();
            }
            phases[k].push(p);
            write!(phase_rows, ",{p:.9e}").ok();
        }
        phase_rows.push('\n');
    }
    run.sink
        .write("echo_phase_vs_offset.csv", phase_rows.as_bytes())?;
    let mut slopes = Vec::new();
    for (k, m) in f.orders.iter().enumerate() {
        let fit = linear_fit(&offsets, &phases[k])?;
        run.metric(format!("phase_slope_m{m}_rad_per_hz"), fit.slope);
        run.metric(
            format!("phase_slope_m{m}_rel_to_law"),
            fit.slope / (2.0 * PI * *m as f64 / delta),
        );
        slopes.push((*m, fit.slope));
    }
    if let (Some(a), Some(b)) = (
        slopes.iter().find(|s| s.0 == 1),
        slopes.iter().find(|s| s.0 == 2),
    ) {
        run.metric("phase_slope_ratio_2_to_1", b.1 / a.1);
        run.check(
            "phase_slope_ratio_within_0p05_of_2",
            (b.1 / a.1 - 2.0).abs() <= 0.05,
        );
    }

    // Fringes around the configured comb.
    let base_index = f.slope_offsets.iter().position(|x| *x == 0.0);
    let base = match base_index {
        Some(i) => sims[i].clone(),
        None => run_afc(cfg, &comb_spec(cfg, cfg.comb.offset), max_order)?,
    };
    write_echo(run, "afc", &base)?;
    let spec = comb_spec(cfg, cfg.comb.offset);
    let n = f.points;
    let half = 0.5 * f.span * delta;
    let scan: Vec<f64> = (0..n)
        .map(|i| cfg.comb.offset - half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect();
    for (k, m) in f.orders.iter().enumerate() {
        let e = base
            .echo_near(
                base.input.center_time + *m as f64 / delta,
                2.0 * base.input.fwhm,
            )
            .copied()
            .ok_or_else(|| Error::Undefined(format!("echo {m} missing")))?;
        let template = Pulse::new(e.peak_time, base.input.fwhm, 1.0);
        let lo = matched_lo(&base, e.order, template)?;
        let settings = ScanSettings {
            order: e.order,
            n_trials: f.n_trials,
            cycles: f.cycles,
            seed: sub_seed(cfg.seed, k as u64),
        };
        let s = interference_scan(&base, &lo, &scan, &spec, &noise, &cfg.detector, settings)?;
        if let Some(w) = &s.warning {
            run.note(format!("order {m}: {w}"));
        }
        run.sink
            .write_with(&format!("fringe_m{m}.csv"), |b| s.write_csv(b))?;
        let fit = fit_fringe_near(&s.net_xy(), Some(delta / *m as f64))?;
        run.sink
            .write_json(&format!("fringe_fit_m{m}.json"), &fit)?;
        run.metric(format!("visibility_m{m}"), fit.visibility);
        run.metric(format!("visibility_err_m{m}"), fit.visibility_err);
        run.metric(
            format!("visibility_model_m{m}"),
            visibility_model(noise.sigma, *m),
        );
        run.metric(format!("period_m{m}_hz"), fit.period);
        run.metric(
            format!("period_m{m}_rel_to_law"),
            fit.period / (delta / *m as f64),
        );
        let model = visibility_model(noise.sigma, *m);
        run.check(
            format!("visibility_m{m}_within_0p03"),
            (fit.visibility - model).abs() <= 0.03,
        );
        run.check(
            format!("period_m{m}_within_5_percent"),
            (fit.period * *m as f64 / delta - 1.0).abs() <= 0.05,
        );
    }
    Ok(())
}

/// Echo photons per input photon within `±1.5` pulse widths of `t`.
fn window_eta(r: &EchoResult, t: f64) -> f64 {
    let h = 1.5 * r.input.fwhm;
    r.window_efficiency(t - h, t + h)
}

/// AFC echoes with no field, an unreversed Stark gate around the first
/// echo, and a gate whose polarity flips at `1/Δ`.
pub(crate) fn combined_gate(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let c = &cfg.comb;
    let g = &cfg.gate;
    let spec = comb_spec(cfg, c.offset);
    let profile = comb_profile(cfg, &spec)?;
    let pulse = input_pulse(cfg);
    let calib = calibration(cfg)?;
    let t1 = pulse.center_time + 1.0 / c.delta;
    let t2 = pulse.center_time + 2.0 / c.delta;
    let eps = g.half_width.unwrap_or(1.0 / c.delta - 1.5 * pulse.fwhm);
    if !(eps > 0.0) || t1 - eps < pulse.center_time + pulse.fwhm {
        return Err(Error::TimeResolution(format!(
            "gate half-width {eps:e} s overlaps the input pulse"
        )));
    }
    let u = calib.voltage_for_sigma(g.broadening / FWHM_PER_SIGMA);
    run.metric("gate_voltage_v", u);
    run.metric("gate_half_width_s", eps);
    run.metric("broadening_over_delta", g.broadening / c.delta);
    let schedules = [
        ("reference", FieldSchedule::off(calib)),
        (
            "unreversed",
            FieldSchedule::off(calib).with_segment(t1 - eps, t1 + eps, u),
        ),
        (
            "reversed",
            FieldSchedule::off(calib)
                .with_segment(t1 - eps, t1, u)
                .with_segment(t1, t1 + eps, -u),
        ),
    ];
    let needed = t2 + 0.5 / c.delta;
    let step = schedules
        .iter()
        .map(|(_, s)| time_grid(cfg, &profile, &pulse, s, needed).step)
        .fold(f64::INFINITY, f64::min);
    let grid = TimeGrid::new(step, cfg.time.duration.unwrap_or(needed));
    let results: Vec<EchoResult> = schedules
        .par_iter()
        .map(|(_, s)| simulate(&profile, &pulse, s, grid))
        .collect::<Result<_>>()?;

    let mut rows = String::from("time_s,reference,unreversed,reversed\n");
    for i in 0..results[0].times.len() {
        writeln!(
            rows,
            "{:.9e},{:.9e},{:.9e},{:.9e}",
            results[0].times[i],
            results[0].intensity[i],
            results[1].intensity[i],
            results[2].intensity[i]
        )
        .ok();
    }
    run.sink.write("gate_traces.csv", rows.as_bytes())?;
    let mut eta = Vec::new();
    for ((name, _), r) in schedules.iter().zip(&results) {
        let (e1, e2) = (window_eta(r, t1), window_eta(r, t2));
        run.metric(format!("{name}_eta_1"), e1);
        run.metric(format!("{name}_eta_2"), e2);
        eta.push((e1, e2));
    }
    let suppression = eta[0].0 / eta[1].0;
    let predicted = afc_efficiency_order(c.depth, c.finesse, c.background, 2);
    let recovery = eta[2].1 / predicted;
    run.metric("echo_1_suppression", suppression);
    run.metric("predicted_eta_2_alone", predicted);
    run.metric("reversed_eta_2_over_prediction", recovery);
    run.metric("unreversed_eta_2_over_reference", eta[1].1 / eta[0].1);
    if g.broadening >= 3.0 * c.delta {
        run.check("echo_1_suppressed_10x", suppression >= 10.0);
    }
    run.check(
        "echo_2_recovered_within_15_percent",
        (recovery - 1.0).abs() <= 0.15,
    );
    Ok(())
}

/// Closed-form capacity and efficiency curves, with simulated combs of
/// different sizes.
pub(crate) fn capacity_curves(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let k = &cfg.capacity;
    let c = &cfg.comb;
    let gamma_std = k.line_fwhm / FWHM_PER_SIGMA;

    let mut crib = String::from("initial_depth,modes,broadened_depth,efficiency\n");
    for d in &k.depths {
        for n in 1..=k.max_modes {
            let modes = multimode_capacity(Protocol::Crib {
                broadening: n as f64,
            });
            let d_br = d / n as f64;
            let eta = crib_efficiency(d_br, 0.0, 0.0, gamma_std);
            writeln!(crib, "{d},{modes},{d_br:.9e},{eta:.9e}").ok();
        }
    }
    run.sink.write("crib_capacity.csv", crib.as_bytes())?;
    // Doubling the modes at doubled depth keeps the efficiency.
    let d = k.depths[0];
    let n = (k.max_modes / 2).max(1);
    let same = crib_efficiency(d / n as f64, 0.0, 0.0, gamma_std);
    let doubled = crib_efficiency(2.0 * d / (2 * n) as f64, 0.0, 0.0, gamma_std);
    run.metric("crib_double_depth_double_modes_ratio", doubled / same);

    let eta_afc = afc_efficiency(c.depth, c.finesse, c.background);
    let mut afc = String::from("n_peaks,modes,efficiency\n");
    for n in &k.n_peaks {
        let modes = multimode_capacity(Protocol::Afc {
            n_peaks: *n,
            modes_per_peak: k.modes_per_peak,
        });
        writeln!(afc, "{n},{modes},{eta_afc:.9e}").ok();
    }
    run.sink.write("afc_capacity.csv", afc.as_bytes())?;
    run.metric("afc_closed_form_eta", eta_afc);

    let sims: Vec<(usize, f64)> = k
        .simulate_peaks
        .par_iter()
        .map(|n| {
            let mut spec = comb_spec(cfg, c.offset);
            spec.n_peaks = *n;
            let r = run_afc(cfg, &spec, 1)?;
            let t = r.input.center_time + 1.0 / c.delta;
            Ok((
                *n,
                r.echo_near(t, 2.0 * r.input.fwhm)
                    .map_or(0.0, |e| e.efficiency),
            ))
        })
        .collect::<Result<_>>()?;
    let mut rows = String::from("n_peaks,simulated_efficiency\n");
    for (n, eta) in &sims {
        writeln!(rows, "{n},{eta:.9e}").ok();
        run.metric(format!("afc_sim_eta_peaks_{}", label(*n as f64)), *eta);
    }
    run.sink.write("afc_simulated.csv", rows.as_bytes())?;
    if sims.len() >= 2 {
        let max = sims.iter().map(|s| s.1).fold(0.0, f64::max);
        let min = sims.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        run.metric("afc_sim_spread", max / min - 1.0);
        run.check(
            "afc_efficiency_independent_of_peaks",
            max / min - 1.0 < 0.05,
        );
    }
    Ok(())
}
