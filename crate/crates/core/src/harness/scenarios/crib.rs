use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::{calibration, input_pulse, simulate, time_grid, write_echo};
use crate::detection::{simulate_counts, Signal};
use crate::echo::{compress_stretch_fwhm, crib_efficiency, EchoResult, FieldSchedule};
use crate::error::{Error, Result};
use crate::harness::config::ScenarioConfig;
use crate::harness::run::Run;
use crate::spectral::{make_single_line, SpectralProfile, StarkCalibration};
use crate::FWHM_PER_SIGMA;

fn line_profile(cfg: &ScenarioConfig) -> Result<SpectralProfile> {
    let l = &cfg.line;
    make_single_line(l.fwhm, l.depth, l.background, l.window, l.grid_points)
}

/// Symmetric or asymmetric CRIB run with the flip `tau` after the pulse.
fn run_crib(
    cfg: &ScenarioConfig,
    line: &SpectralProfile,
    calib: StarkCalibration,
    u1: f64,
    u2: f64,
) -> Result<(EchoResult, f64)> {
    let pulse = input_pulse(cfg);
    let alpha = calib.width_ratio(u1, u2);
    let flip = pulse.center_time + cfg.field.tau;
    let echo_time = flip + cfg.field.tau / alpha;
    let needed = echo_time + 4.0 * pulse.fwhm * (1.0 / alpha).max(1.0);
    let end = cfg.time.duration.unwrap_or(needed);
    let sched = FieldSchedule::crib(calib, u1, u2, 0.0, flip, end);
    let grid = time_grid(cfg, line, &pulse, &sched, needed);
    Ok((simulate(line, &pulse, &sched, grid)?, echo_time))
}

/// One CRIB echo with its detected counts and the closed-form efficiency.
pub(crate) fn crib_echo(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let line = line_profile(cfg)?;
    let calib = calibration(cfg)?;
    let (u1, u2) = (cfg.field.u1, cfg.field.u2);
    let (r, expected) = run_crib(cfg, &line, calib, u1, u2)?;
    write_echo(run, "crib", &r)?;
    let step = r.step();
    let e = r
        .echo_near(expected, 2.0 * r.input.fwhm)
        .copied()
        .ok_or_else(|| Error::Undefined("no CRIB echo near the expected time".into()))?;
    let delay = e.peak_time - r.input.center_time;
    let d_br = cfg.line.depth / calib.broadening(u1);
    let closed = crib_efficiency(
        d_br,
        cfg.line.background,
        delay,
        cfg.line.fwhm / FWHM_PER_SIGMA,
    );
    run.metric("echo_delay_s", delay);
    run.metric("expected_delay_s", expected - r.input.center_time);
    run.metric("time_step_s", step);
    run.metric("echo_efficiency", e.efficiency);
    run.metric("echo_fwhm_s", e.fwhm);
    run.metric("closed_form_efficiency", closed);
    run.metric("broadened_depth", d_br);
    run.metric("width_ratio", calib.width_ratio(u1, u2));
    run.metric("transmitted", r.transmitted);
    run.metric("total_output", r.total_output);
    // The unreversed line width reshapes the echo envelope unless it is
    // narrow against the pulse and the broadened line covers the pulse.
    let line_sigma = cfg.line.fwhm / FWHM_PER_SIGMA;
    let dephasing = (2.0 * PI * line_sigma * r.input.fwhm).powi(2);
    let coverage = calib.broadening(u1) * cfg.line.fwhm / r.input.spectral_fwhm();
    run.metric("line_dephasing_over_pulse", dephasing);
    run.metric("broadened_width_over_pulse_bandwidth", coverage);
    run.metric("delay_error_steps", (e.peak_time - expected) / step);
    if dephasing < 0.1 && coverage >= 2.0 {
        run.check(
            "echo_at_expected_time",
            (e.peak_time - expected).abs() <= step,
        );
    } else {
        run.note("pulse is not spectrally contained in the line; echo timing and efficiency differ from the ideal");
    }

    let det = cfg.detector;
    let hist = simulate_counts(
        Signal::from_echo(&r),
        &|_| 0.0,
        &det,
        cfg.counting.n_trials,
        (0.0, r.times[r.times.len() - 1]),
        cfg.counting.bin_width,
        cfg.seed,
    )?;
    run.sink
        .write_with("crib_histogram.csv", |b| hist.write_csv(b))?;
    let window = hist.bin_range(e.peak_time - e.fwhm, e.peak_time + e.fwhm);
    run.metric("echo_counts", hist.sum(window) as f64);
    Ok(())
}

/// Echo duration for each pair of write and read voltages.
pub(crate) fn pulse_shape(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let ps = &cfg.pulse_shape;
    let line = line_profile(cfg)?;
    let calib = calibration(cfg)?;
    let mut pairs = Vec::new();
    for &u1 in &ps.u1 {
        match &ps.alphas {
            Some(alphas) => {
                for a in alphas {
                    pairs.push((u1, calib.voltage_for_sigma(a * calib.stark_sigma(u1))));
                }
            }
            None => ps.u2.iter().for_each(|&u2| pairs.push((u1, u2))),
        }
    }
    let results: Vec<(EchoResult, f64)> = pairs
        .par_iter()
        .map(|(u1, u2)| run_crib(cfg, &line, calib, *u1, *u2))
        .collect::<Result<_>>()?;

    let input_fwhm = cfg.pulse.fwhm;
    let mut table =
        String::from("u1_v,u2_v,alpha,echo_time_s,echo_fwhm_s,predicted_fwhm_s,efficiency\n");
    let mut worst: f64 = 0.0;
    for (i, ((u1, u2), (r, expected))) in pairs.iter().zip(&results).enumerate() {
        let pred = compress_stretch_fwhm(input_fwhm, *u1, *u2, &calib);
        let e = r
            .echo_near(*expected, 2.0 * input_fwhm.max(pred.output_fwhm))
            .copied();
        let (t, fwhm, eff) = e.map_or((f64::NAN, f64::NAN, 0.0), |e| {
            (e.peak_time, e.fwhm, e.efficiency)
        });
        writeln!(
            table,
            "{u1},{u2:.6},{:.6},{t:.9e},{fwhm:.9e},{:.9e},{eff:.9e}",
            pred.alpha, pred.output_fwhm
        )
        .ok();
        let rel = fwhm / pred.output_fwhm - 1.0;
        worst = worst.max(if rel.is_finite() {
            rel.abs()
        } else {
            f64::INFINITY
        });
        run.metric(format!("pair_{i}_alpha"), pred.alpha);
        run.metric(format!("pair_{i}_fwhm_ratio"), fwhm / input_fwhm);
        run.metric(
            format!("pair_{i}_predicted_ratio"),
            pred.output_fwhm / input_fwhm,
        );
        run.metric(format!("pair_{i}_efficiency"), eff);
        if i == 0 {
            write_echo(run, "pair_0", r)?;
        }
    }
    run.sink.write("echo_fwhm.csv", table.as_bytes())?;
    run.metric("max_fwhm_rel_error", worst);
    Ok(())
}
