use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use syncbuck_core::bode::mag_db;
use syncbuck_core::sfra::{sweep, InjectionSpec, Measurement};
use syncbuck_core::sim::{find_steady_state, run_cycles};
use syncbuck_core::{BodeCurve, BodePoint, Complex64, Error as CoreError, LoopModel, Probes, Quantity};

use crate::compare::compare;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::write_atomic;

/// Resample density for the power-balance check, independent of the
/// waveform export density.
const POWER_GRID_PER_CYCLE: usize = 8000;

/// Fraction of sweep points that must succeed for `sfra` to exit cleanly.
const SFRA_MIN_SUCCESS: f64 = 0.9;

fn is_pole(e: &CoreError) -> bool {
    matches!(e, CoreError::PoleHit { .. } | CoreError::Singular(_))
}

/// Writes analytic `G_Plant`, `T_pul`, `T_i` and `T_c` on the model grid.
/// Frequencies where any of them sits on a pole (z = 1 for the
/// integrating controller) are dropped from all four so the files share one
/// frequency column.
pub fn model(rc: &RunConfig, out: &Path) -> Result<(), CliError> {
    let model = LoopModel::for_config(&rc.converter)
        .map_err(CliError::from_model)?
        .with_sync(rc.sync_enabled);
    let suffix = if rc.sync_enabled { "" } else { "_nosync" };
    let freqs = rc.model_grid.frequencies();

    let mut rows = Vec::with_capacity(freqs.len());
    for &f in &freqs {
        let s = Complex64::new(0.0, TAU * f);
        let z = model.z_of(s);
        let row = (|| Ok::<_, CoreError>([model.g_plant(z)?, model.t_pul(z)?, model.t_i(s)?, model.t_c(s)?]))();
        match row {
            Ok(r) => rows.push((f, r)),
            Err(e) if is_pole(&e) => warn!("skipping {f:.6e} Hz: {e}"),
            Err(e) => return Err(CliError::from_model(e)),
        }
    }
    if rows.is_empty() && !freqs.is_empty() {
        return Err(CliError::Model(CoreError::Singular(0.0)));
    }

    let quantities = [
        (Quantity::GPlant, "g_plant"),
        (Quantity::TPul, "t_pul"),
        (Quantity::Ti, "t_i"),
        (Quantity::Tc, "t_c"),
    ];
    for (i, (q, stem)) in quantities.into_iter().enumerate() {
        let curve = BodeCurve::from_points(
            q,
            rows.iter().map(|&(f_hz, r)| BodePoint { f_hz, value: r[i] }).collect(),
        );
        let path = write_atomic(out, &format!("{stem}{suffix}.csv"), &curve.to_csv())?;
        println!("wrote {} ({} points)", path.display(), curve.len());
    }
    if rows.len() < freqs.len() {
        println!("skipped {} frequencies at poles", freqs.len() - rows.len());
    }

    if let Some(n) = rc.series_n {
        series_check(&model, &rows.iter().map(|r| r.0).collect::<Vec<_>>(), n, suffix, out)?;
    }
    Ok(())
}

/// Closed-form `T_i` against the sideband series truncated at `|n| ≤ n_max`.
fn series_check(model: &LoopModel, freqs: &[f64], n_max: usize, suffix: &str, out: &Path) -> Result<(), CliError> {
    let mut csv = String::from(
        "f_hz,closed_mag_db,closed_phase_deg,series_mag_db,series_phase_deg,delta_db,delta_deg,abs_diff,rel_diff\n",
    );
    let (mut worst_db, mut worst_deg) = (0.0f64, 0.0f64);
    for &f in freqs {
        let s = Complex64::new(0.0, TAU * f);
        let closed = model.t_i(s).map_err(CliError::from_model)?;
        let series = match model.t_i_series(s, n_max) {
            Ok(v) => v,
            Err(e) if is_pole(&e) => {
                warn!("series check: skipping {f:.6e} Hz: {e}");
                continue;
            }
            Err(e) => return Err(CliError::from_model(e)),
        };
        let d_db = mag_db(series) - mag_db(closed);
        let d_deg = (series / closed).arg().to_degrees();
        worst_db = worst_db.max(d_db.abs());
        worst_deg = worst_deg.max(d_deg.abs());
        writeln!(
            csv,
            "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            f,
            mag_db(closed),
            closed.arg().to_degrees(),
            mag_db(series),
            series.arg().to_degrees(),
            d_db,
            d_deg,
            (closed - series).norm(),
            (closed - series).norm() / closed.norm()
        )
        .unwrap();
    }
    let path = write_atomic(out, &format!("t_i_series_check{suffix}.csv"), &csv)?;
    println!(
        "wrote {} (N = {n_max}; max |delta| {worst_db:.4} dB, {worst_deg:.4} deg)",
        path.display()
    );
    Ok(())
}

/// Finds the closed-loop steady state, records `cycles` cycles of it and
/// writes the waveform plus a text summary.
pub fn simulate(rc: &RunConfig, cycles: usize, out: &Path) -> Result<(), CliError> {
    let cfg = &rc.simulated_converter()?;
    let ss = find_steady_state(cfg).map_err(CliError::from_sim)?;
    let (_, wf) = run_cycles(cfg, ss.state, cycles, &Probes::grid(rc.sim_points_per_cycle)).map_err(CliError::from_sim)?;
    let path = write_atomic(out, "waveform.csv", &wf.to_csv())?;
    println!("wrote {} ({} rows)", path.display(), wf.len());

    let mut s = String::new();
    writeln!(s, "carrier: {} sampling {}", cfg.modulation, cfg.sampling).unwrap();
    if cfg.k_p == 0.0 && cfg.k_i == 0.0 {
        writeln!(s, "controller: open loop (K_p = K_i = 0), compare held at {:.9}", ss.state.cmp_active).unwrap();
    } else {
        writeln!(s, "controller: K_p = {} K_i = {} /s", cfg.k_p, cfg.k_i).unwrap();
    }
    writeln!(s, "steady state after {} cycles (residual {:.3e})", ss.cycles, ss.residual).unwrap();
    writeln!(s, "duty: {:.6} %", 100.0 * ss.op.duty).unwrap();
    writeln!(s, "mean inductor current: {:.9} A", ss.op.i_l_avg).unwrap();
    writeln!(s, "mean output voltage: {:.9} V", ss.op.v_out_avg).unwrap();
    writeln!(s, "sensed slope at the sample: {:.6e} /s", ss.op.slope_at_sample).unwrap();
    writeln!(s, "sampled current: {:.9} (sensed units)", ss.sample).unwrap();
    writeln!(
        s,
        "sampled vs cycle-average current error: {:.6} %",
        100.0 * ss.sample_vs_average_error(cfg.h_i)
    )
    .unwrap();
    if cfg.r_l == 0.0 && cfg.r_c == 0.0 {
        let (_, dense) = run_cycles(cfg, ss.state, 1, &Probes::grid(POWER_GRID_PER_CYCLE)).map_err(CliError::from_sim)?;
        let p_in = dense.cycles[0].input_energy / cfg.t_s;
        let p_out = dense.v_o.iter().map(|v| v * v / cfg.r_ld).sum::<f64>() / dense.len() as f64;
        writeln!(
            s,
            "power balance (lossless): in {p_in:.9} W, out {p_out:.9} W, mismatch {:.6} %",
            100.0 * (p_in - p_out) / p_in
        )
        .unwrap();
    }
    let path = write_atomic(out, "summary.txt", &s)?;
    print!("{s}");
    println!("wrote {}", path.display());
    Ok(())
}

/// Measured sweep with a sidecar log of every point's outcome.
pub fn sfra(rc: &RunConfig, which: Measurement, out: &Path) -> Result<(), CliError> {
    let freqs = rc.sfra_grid.frequencies();
    let base = InjectionSpec {
        point: which.injection_point(),
        ..rc.sfra
    };
    let result = sweep(&rc.simulated_converter()?, &freqs, which, &base).map_err(CliError::from_sim)?;
    let path = write_atomic(out, &format!("sfra_{which}.csv"), &result.curve.to_csv())?;
    println!("wrote {} ({} points)", path.display(), result.curve.len());

    let ok = result.entries.iter().filter(|e| e.outcome.is_ok()).count();
    let mut log = format!("{which} sweep: {ok} of {} points succeeded\n", result.entries.len());
    for e in &result.entries {
        match &e.outcome {
            Ok(m) => writeln!(
                log,
                "ok {:.6e} Hz -> {:.9e} Hz, settle {} cycles, window {} cycles",
                e.requested, m.f_p, m.settle_cycles, m.window_cycles
            ),
            Err(err) => writeln!(log, "FAILED {:.6e} Hz: {err}", e.requested),
        }
        .unwrap();
    }
    let log_path = write_atomic(out, &format!("sfra_{which}.log"), &log)?;
    println!("wrote {}", log_path.display());

    if result.success_fraction() < SFRA_MIN_SUCCESS {
        return Err(CliError::Other(format!(
            "only {ok} of {} points succeeded; see {}",
            result.entries.len(),
            log_path.display()
        )));
    }
    Ok(())
}

fn read_curve(path: &Path) -> Result<BodeCurve, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
    BodeCurve::from_csv(&text).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))
}

pub fn compare_files(
    model_csv: &Path,
    measured_csv: &Path,
    tol_db: f64,
    tol_deg: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let model = read_curve(model_csv)?;
    let measured = read_curve(measured_csv)?;
    if model.quantity != measured.quantity {
        println!(
            "note: comparing {} against {}",
            measured.quantity.name(),
            model.quantity.name()
        );
    }
    let cmp = compare(&model, &measured, tol_db, tol_deg);
    if let Some(dir) = out {
        let path = write_atomic(dir, "compare.csv", &cmp.to_csv())?;
        println!("wrote {}", path.display());
    }
    print!("{}", cmp.report());
    if cmp.passed() {
        Ok(())
    } else {
        Err(CliError::CompareFail)
    }
}
