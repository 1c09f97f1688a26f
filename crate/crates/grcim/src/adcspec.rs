//! Output-referred SQNR and ADC resolution requirements by Monte Carlo.
//!
//! The required ENOB keeps the ADC noise `ADC_MARGIN_DB` below the format
//! quantization noise seen at the column output:
//! `10 log10(P_z / (step^2 / 12)) >= SQNR + 6`, `step = 2 / 2^ENOB`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{decode, format_sqnr_db, quantize, FpFormat};
use crate::mac::{ideal_dot, simulate, ArchConfig};
use crate::numeric::CompensatedSum;
use crate::rng::mix;
use crate::stimulus::DistributionSpec;

/// ADC noise sits this far below the output quantization noise.
pub const ADC_MARGIN_DB: f64 = 6.0;
/// Core SQNR below this counts as "no signal": the core rounds to zero.
pub const NO_SIGNAL_DB: f64 = 1.0;
/// Attempts per trial before a zero reference is accepted.
pub const MAX_REDRAWS: u64 = 16;
/// Trials used for the worst-case dimensioning solve.
pub const WORST_CASE_TRIALS: usize = 20_000;
pub const WORST_CASE_SEED: u64 = 0x5EED_D1E5;

/// Monte-Carlo SQNR summary for one architecture and input pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqnrReport {
    pub sqnr_global_db: f64,
    /// Core-subset SQNR; `-inf` when the core is unresolved.
    pub sqnr_core_db: f64,
    /// Core-subset SQNR as measured, even when unresolved.
    pub sqnr_core_measured_db: f64,
    pub core_resolved: bool,
    pub core_trials: usize,
    /// Mean square of `z_analog` over all trials.
    pub signal_power_at_adc: f64,
    /// Mean square of `z_analog` over outlier-free trials.
    pub signal_power_core: f64,
    pub mean_n_eff: f64,
    /// Analytic format ceiling of the input format.
    pub ceiling_db: f64,
    /// Requirement from the measured SQNR targets.
    pub enob_required_cont: Option<f64>,
    pub enob_required_int: Option<u32>,
    /// Requirement with targets capped at the format ceiling.
    pub enob_capped_cont: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct TrialStats {
    ref2: f64,
    err2: f64,
    z2: f64,
    n_eff: f64,
    outlier: bool,
}

fn run_trial(
    cfg: &ArchConfig,
    x_dist: &DistributionSpec,
    w_dist: &DistributionSpec,
    seed: u64,
    t: u64,
) -> Result<TrialStats> {
    let n = cfg.n_rows;
    let mut x = vec![0.0; n];
    let mut xq = Vec::with_capacity(n);
    let mut w = vec![0.0; n];
    let mut wq = Vec::with_capacity(n);
    let mut out = TrialStats::default();
    for attempt in 0..MAX_REDRAWS {
        let sx = mix(mix(seed, 1), attempt);
        let sw = mix(mix(seed, 2), attempt);
        xq.clear();
        wq.clear();
        out.outlier = false;
        for i in 0..n {
            let idx = t * n as u64 + i as u64;
            let xs = x_dist.sample_at(sx, idx);
            out.outlier |= xs.is_outlier;
            x[i] = xs.value;
            xq.push(quantize(xs.value, cfg.x_fmt)?);
            let q = quantize(w_dist.sample_at(sw, idx).value, cfg.w_fmt)?;
            w[i] = decode(q, cfg.w_fmt);
            wq.push(q);
        }
        let reference = ideal_dot(&x, &w)?;
        if reference == 0.0 && attempt + 1 < MAX_REDRAWS {
            continue;
        }
        let trace = simulate(&xq, &wq, cfg)?;
        let err = reference - trace.z_digital;
        out.ref2 = reference * reference;
        out.err2 = err * err;
        out.z2 = trace.z_analog * trace.z_analog;
        out.n_eff = trace.n_eff;
        break;
    }
    Ok(out)
}

fn db(signal: f64, noise: f64) -> f64 {
    if signal == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * (signal / noise).log10()
    }
}

/// Smallest continuous ENOB meeting `target_db + ADC_MARGIN_DB` for signal
/// power `p_z` on full scale +-1.
pub fn enob_for(p_z: f64, target_db: f64) -> f64 {
    ((target_db + ADC_MARGIN_DB) / 10.0 * std::f64::consts::LOG2_10 - (3.0 * p_z).log2()) / 2.0
}

fn prepare(
    cfg: &ArchConfig,
    x_dist: &DistributionSpec,
    w_dist: &DistributionSpec,
    trials: usize,
) -> Result<(DistributionSpec, DistributionSpec)> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if cfg.n_rows == 0 {
        return Err(Error::Config("n_rows must be at least 1".into()));
    }
    let x = x_dist.resolve(cfg.x_fmt)?;
    let w = w_dist.resolve(cfg.w_fmt)?;
    x.validate()?;
    w.validate()?;
    Ok((x, w))
}

/// Measures global and core output SQNR with an ideal ADC.
pub fn output_sqnr(
    cfg: &ArchConfig,
    x_dist: &DistributionSpec,
    w_dist: &DistributionSpec,
    trials: usize,
    seed: u64,
) -> Result<SqnrReport> {
    let (xd, wd) = prepare(cfg, x_dist, w_dist, trials)?;
    cfg.check()?;
    let stats: Vec<TrialStats> = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, &xd, &wd, seed, t))
        .collect::<Result<_>>()?;

    let mut all = [CompensatedSum::new(); 3];
    let mut core = [CompensatedSum::new(); 3];
    let mut n_eff = CompensatedSum::new();
    let mut core_trials = 0usize;
    for s in &stats {
        for (acc, v) in all.iter_mut().zip([s.ref2, s.err2, s.z2]) {
            acc.add(v);
        }
        if !s.outlier {
            core_trials += 1;
            for (acc, v) in core.iter_mut().zip([s.ref2, s.err2, s.z2]) {
                acc.add(v);
            }
        }
        n_eff.add(s.n_eff);
    }
    let sqnr_global_db = db(all[0].value(), all[1].value());
    let (sqnr_core_measured_db, signal_power_core) = if xd.has_outliers() {
        let p = if core_trials > 0 {
            core[2].value() / core_trials as f64
        } else {
            0.0
        };
        (db(core[0].value(), core[1].value()), p)
    } else {
        (sqnr_global_db, all[2].value() / trials as f64)
    };
    let core_resolved = sqnr_core_measured_db >= NO_SIGNAL_DB;
    Ok(SqnrReport {
        sqnr_global_db,
        sqnr_core_db: if core_resolved || !xd.has_outliers() {
            sqnr_core_measured_db
        } else {
            f64::NEG_INFINITY
        },
        sqnr_core_measured_db,
        core_resolved,
        core_trials,
        signal_power_at_adc: all[2].value() / trials as f64,
        signal_power_core,
        mean_n_eff: n_eff.value() / trials as f64,
        ceiling_db: format_sqnr_db(cfg.x_fmt),
        enob_required_cont: None,
        enob_required_int: None,
        enob_capped_cont: None,
        trials,
        seed,
    })
}

/// Measures SQNR and solves for the ADC ENOB.
///
/// Each trial class (all trials, and outlier-free trials when the core is
/// resolved) must individually meet its own target; the requirement is the
/// largest of the class requirements.
pub fn required_enob(
    cfg: &ArchConfig,
    x_dist: &DistributionSpec,
    w_dist: &DistributionSpec,
    trials: usize,
    seed: u64,
) -> Result<SqnrReport> {
    let mut r = output_sqnr(cfg, x_dist, w_dist, trials, seed)?;
    if r.signal_power_at_adc == 0.0 || r.sqnr_global_db == f64::NEG_INFINITY {
        return Err(Error::Unsatisfiable("no signal reaches the ADC".into()));
    }
    if r.sqnr_global_db == f64::INFINITY {
        return Err(Error::Unsatisfiable(
            "inputs are exactly representable; output SQNR is unbounded".into(),
        ));
    }
    let mut classes = vec![(r.signal_power_at_adc, r.sqnr_global_db)];
    let has_core = x_dist.resolve(cfg.x_fmt)?.has_outliers();
    if has_core && r.core_resolved && r.signal_power_core > 0.0 {
        classes.push((r.signal_power_core, r.sqnr_core_db));
    }
    let solve = |cap: f64| {
        classes
            .iter()
            .map(|&(p, t)| enob_for(p, t.min(cap)))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let cont = solve(f64::INFINITY);
    r.enob_required_cont = Some(cont);
    r.enob_required_int = Some(cont.ceil().max(0.0) as u32);
    r.enob_capped_cont = Some(solve(r.ceiling_db));
    Ok(r)
}

/// Signal power at the ADC for a uniform input confined to twice the
/// smallest normal magnitude, with max-entropy weights.
pub fn worst_case_signal_power(arch: &ArchConfig) -> Result<f64> {
    let cfg = arch.with_limit(None);
    let bound = (2.0 * cfg.x_fmt.min_normal()).min(1.0);
    let x = DistributionSpec::Uniform { bound };
    let w = DistributionSpec::MaxEntropy(cfg.w_fmt);
    let r = output_sqnr(&cfg, &x, &w, WORST_CASE_TRIALS, WORST_CASE_SEED)?;
    Ok(r.signal_power_at_adc)
}

/// Dimensioning ENOB for the energy map: the narrowest valid uniform input
/// must still meet the format ceiling plus margin.
pub fn worst_case_enob(x_fmt: FpFormat, w_fmt: FpFormat, arch: &ArchConfig) -> Result<f64> {
    let cfg = ArchConfig { x_fmt, w_fmt, ..*arch };
    let p = worst_case_signal_power(&cfg)?;
    if p == 0.0 {
        return Err(Error::Unsatisfiable("worst-case input produces no signal".into()));
    }
    Ok(enob_for(p, format_sqnr_db(x_fmt)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::Granularity;

    fn fmt(s: &str) -> FpFormat {
        s.parse().unwrap()
    }

    fn dist(s: &str) -> DistributionSpec {
        s.parse().unwrap()
    }

    #[test]
    fn enob_formula_matches_noise_definition() {
        let p = 0.013;
        let t = 22.83;
        let n = enob_for(p, t);
        let step = 2.0 / n.exp2();
        let snr = 10.0 * (p / (step * step / 12.0)).log10();
        assert!((snr - (t + 6.0)).abs() < 1e-9);
    }

    #[test]
    fn max_entropy_reaches_ceiling() {
        let cfg = ArchConfig::conventional(fmt("E3M2"), fmt("E2M1"));
        let r = output_sqnr(&cfg, &dist("maxent"), &dist("maxent:E2M1"), 20_000, 3).unwrap();
        assert!((r.sqnr_global_db - r.ceiling_db).abs() < 2.0, "{}", r.sqnr_global_db);
        assert_eq!(r.sqnr_core_db, r.sqnr_global_db);
    }

    #[test]
    fn exact_inputs_are_unsatisfiable() {
        let cfg = ArchConfig::conventional(fmt("E2M1"), fmt("E2M1"));
        let e = required_enob(&cfg, &dist("maxent:E2M1"), &dist("maxent:E2M1"), 1000, 1);
        assert!(matches!(e, Err(Error::Unsatisfiable(_))));
    }

    #[test]
    fn solver_is_deterministic() {
        let cfg = ArchConfig::gain_ranging(Granularity::Unit, fmt("E3M2"), fmt("E2M1")).with_limit(None);
        let a = required_enob(&cfg, &dist("uniform"), &dist("maxent:E2M1"), 5000, 9).unwrap();
        let b = required_enob(&cfg, &dist("uniform"), &dist("maxent:E2M1"), 5000, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.enob_required_int, Some(a.enob_required_cont.unwrap().ceil() as u32));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = ArchConfig::conventional(fmt("E2M2"), fmt("E2M1"));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    output_sqnr(
                        &cfg,
                        &dist("gauss-outliers:eps=0.01,k=50"),
                        &dist("maxent:E2M1"),
                        4000,
                        5,
                    )
                    .unwrap()
                })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn worst_case_int_equals_full_scale_uniform() {
        let x = fmt("E0M4");
        let cfg = ArchConfig::conventional(x, fmt("E2M1"));
        let p_wc = worst_case_signal_power(&cfg).unwrap();
        let r = output_sqnr(
            &cfg,
            &DistributionSpec::UNIFORM,
            &dist("maxent:E2M1"),
            WORST_CASE_TRIALS,
            WORST_CASE_SEED,
        )
        .unwrap();
        assert_eq!(p_wc, r.signal_power_at_adc);
    }

    #[test]
    fn conventional_worst_case_tracks_exponent_range() {
        let w = fmt("E2M1");
        let conv = ArchConfig::conventional(fmt("E2M2"), w);
        let e2 = worst_case_enob(fmt("E2M2"), w, &conv).unwrap();
        let e3 = worst_case_enob(fmt("E3M2"), w, &conv).unwrap();
        assert!((e3 - e2 - 4.0).abs() < 1e-9, "{}", e3 - e2);
    }

    #[test]
    fn gain_ranging_worst_case_is_range_invariant() {
        let w = fmt("E2M1");
        let gr = ArchConfig::gain_ranging(Granularity::Unit, fmt("E2M2"), w);
        let e2 = worst_case_enob(fmt("E2M2"), w, &gr).unwrap();
        let e3 = worst_case_enob(fmt("E3M2"), w, &gr).unwrap();
        assert!((e3 - e2).abs() < 0.1, "{e2} {e3}");
    }
}
