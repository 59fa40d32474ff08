//! Subcommand execution. Each command resolves its defaults in place, so the
//! embedded configuration shows the values actually used.

use heisenberg_weyl::expansion::remainder_mean_square;
use heisenberg_weyl::moments::{
    abs_moment_growth, distribution_estimate, moment_estimate, predicted_coefficient_t,
    predicted_coefficient_x, MomentMode, PredictionReport,
};
use heisenberg_weyl::sampling::StratifiedSampler;
use heisenberg_weyl::spectrum::{r_exact, r_psi, ErrorTermSample};
use heisenberg_weyl::surd::{b_k, default_cutoff, s_k_exponent, s_kv};
use heisenberg_weyl::tau::tau_table;
use heisenberg_weyl::{Error, ManifoldParams};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::args::{Command, ModeArg};
use crate::error::CliError;

/// A report in both shapes; the caller picks one.
pub struct Report {
    pub fields: Map<String, Value>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("reports are JSON objects"),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn run(cmd: &mut Command) -> Result<Report, CliError> {
    match cmd {
        Command::Tau { l, limit } => tau(*l, *limit),
        Command::Series {
            l,
            k,
            v,
            y,
            doublings,
        } => {
            let y = *y.get_or_insert(default_cutoff(*k));
            series(*l, *k, *v, y, *doublings)
        }
        Command::ErrorTerm {
            l,
            xmin,
            xmax,
            samples,
            seed,
        } => error_term(*l, *xmin, *xmax, *samples, *seed),
        Command::ExactCheck {
            l,
            xmin,
            xmax,
            samples,
            seed,
        } => exact_check(*l, *xmin, *xmax, *samples, *seed),
        Command::Expansion {
            l,
            t,
            y,
            samples,
            seed,
        } => {
            let p = ManifoldParams::new(*l)?;
            if !(*t >= 1e3) || !t.is_finite() {
                return Err(Error::InvalidParameter(format!("T must be >= 1000, got {t}")).into());
            }
            let y = *y.get_or_insert(*t / t.ln().powi(2));
            let r = remainder_mean_square(&p, *t, y, *samples, *seed)?;
            Ok(Report {
                fields: object(json!({"emp": r.emp, "ref": r.reference, "ratio": r.ratio()})),
                header: vec!["emp", "ref", "ratio"],
                rows: vec![vec![num(r.emp), num(r.reference), num(r.ratio())]],
            })
        }
        Command::Moments {
            l,
            k,
            a,
            t,
            samples,
            mode,
            y,
            seed,
        } => {
            let p = ManifoldParams::new(*l)?;
            let heights = t.clone();
            match *a {
                Some(a) => growth(&p, a, &heights, *samples, *seed),
                None => {
                    let k = *k.get_or_insert(2);
                    let [t] = heights[..] else {
                        return Err(usage("--T takes a single height unless --A is given"));
                    };
                    if (2..=9).contains(&k) {
                        y.get_or_insert(default_cutoff(k as usize));
                    }
                    moments(&p, k, t, *samples, *mode, *y, *seed)
                }
            }
        }
        Command::Distribution {
            l,
            t_lo,
            t_hi,
            samples,
            bins,
            seed,
        } => {
            let p = ManifoldParams::new(*l)?;
            let d = distribution_estimate(&p, *t_lo, *t_hi, *samples, *bins, *seed)?;
            let rows = d
                .bin_edges
                .windows(2)
                .zip(&d.densities)
                .map(|(e, &f)| vec![num(e[0]), num(e[1]), num(f)])
                .collect();
            let mut fields =
                object(serde_json::to_value(&d).map_err(|e| CliError::Io(e.to_string()))?);
            fields.insert("mean_std_error".into(), json!(d.mean_std_error()));
            Ok(Report {
                fields,
                header: vec!["bin_lo", "bin_hi", "density"],
                rows,
            })
        }
        Command::Report { l, y } => report(*l, *y),
    }
}

fn tau(l: u32, limit: u64) -> Result<Report, CliError> {
    let p = ManifoldParams::new(l)?;
    if limit == 0 {
        return Err(usage("--limit must be at least 1"));
    }
    let table = tau_table(&p, limit)?;
    let mut rows = Vec::with_capacity(limit as usize);
    let mut entries = Vec::with_capacity(limit as usize);
    for (n, t, d) in table.iter() {
        rows.push(vec![n.to_string(), num(t), d.to_string()]);
        entries.push(json!({"n": n, "tau": t, "d": d}));
    }
    Ok(Report {
        fields: object(json!({"rows": entries})),
        header: vec!["n", "tau", "d"],
        rows,
    })
}

fn series(l: u32, k: usize, v: usize, y: f64, doublings: u32) -> Result<Report, CliError> {
    let p = ManifoldParams::new(l)?;
    if doublings > 30 {
        return Err(usage("--doublings must be at most 30"));
    }
    if !(y >= 1.0) || !y.is_finite() {
        return Err(Error::InvalidParameter(format!("y must be finite and >= 1, got {y}")).into());
    }
    let tau = tau_table(&p, y.floor() as u64)?;
    let mut table = Vec::new();
    let mut rows = Vec::new();
    for d in (0..=doublings).rev() {
        let yd = y / 2f64.powi(d as i32);
        if yd < 1.0 {
            continue;
        }
        let s = s_kv(&tau, k, v, yd)?;
        rows.push(vec![num(yd), num(s.value), s.term_count.to_string()]);
        table.push(json!({"y": yd, "value": s.value, "term_count": s.term_count}));
    }
    let last = s_kv(&tau, k, v, y)?;
    Ok(Report {
        fields: object(json!({
            "k": k, "v": v, "y": y, "value": last.value,
            "term_count": last.term_count, "convergence": table,
        })),
        header: vec!["y", "value", "term_count"],
        rows,
    })
}

fn sample_points(xmin: f64, xmax: f64, samples: usize, seed: u64) -> Result<Vec<f64>, CliError> {
    if !(xmin >= 1.0) {
        return Err(usage(format!("--xmin must be >= 1, got {xmin}")));
    }
    if samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    Ok(StratifiedSampler::new(xmin, xmax, samples, seed)?.points()?)
}

fn error_term(l: u32, xmin: f64, xmax: f64, samples: usize, seed: u64) -> Result<Report, CliError> {
    let p = ManifoldParams::new(l)?;
    let points = sample_points(xmin, xmax, samples, seed)?;
    let values: Vec<ErrorTermSample> = points
        .iter()
        .map(|&x| ErrorTermSample::at(&p, x))
        .collect::<Result<_, _>>()?;
    let rows = values
        .iter()
        .map(|s| vec![num(s.x), num(s.r_psi), num(s.normalized)])
        .collect();
    Ok(Report {
        fields: object(json!({"points": values})),
        header: vec!["x", "r_psi", "normalized"],
        rows,
    })
}

fn exact_check(
    l: u32,
    xmin: f64,
    xmax: f64,
    samples: usize,
    seed: u64,
) -> Result<Report, CliError> {
    let p = ManifoldParams::new(l)?;
    let points = sample_points(xmin, xmax, samples, seed)?;
    let exponent = l as f64 - 0.5;
    let evaluated: Vec<Result<Option<f64>, Error>> = points
        .par_iter()
        .map(|&x| match r_exact(&p, x) {
            Ok(e) => Ok(Some(e)),
            Err(Error::NearJump { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut skipped = 0usize;
    let mut worst = (0.0f64, f64::NAN);
    for (&x, exact) in points.iter().zip(evaluated) {
        let Some(exact) = exact? else {
            skipped += 1;
            continue;
        };
        let psi = r_psi(&p, x);
        let scaled = (exact - psi).abs() * x.powf(-exponent);
        if scaled > worst.0 || worst.1.is_nan() {
            worst = (scaled, x);
        }
        rows.push(vec![num(x), num(exact), num(psi), num(scaled)]);
        entries.push(json!({"x": x, "r_exact": exact, "r_psi": psi, "scaled_difference": scaled}));
    }
    Ok(Report {
        fields: object(json!({
            "exponent": exponent,
            "points_used": entries.len(),
            "skipped": skipped,
            "max_scaled_difference": worst.0,
            "worst_x": if worst.1.is_nan() { Value::Null } else { json!(worst.1) },
            "points": entries,
        })),
        header: vec!["x", "r_exact", "r_psi", "scaled_difference"],
        rows,
    })
}

fn growth(
    p: &ManifoldParams,
    a: f64,
    heights: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Report, CliError> {
    let reports = abs_moment_growth(p, a, heights, samples, seed)?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for (&t, r) in heights.iter().zip(&reports) {
        rows.push(vec![
            num(t),
            num(r.estimate),
            num(r.predicted),
            num(r.relative_deviation),
        ]);
        entries.push(json!({
            "T": t, "estimate": r.estimate, "predicted": r.predicted,
            "relative_deviation": r.relative_deviation,
        }));
    }
    Ok(Report {
        fields: object(
            json!({"l": p.l(), "A": a, "samples": samples, "seed": seed, "reports": entries}),
        ),
        header: vec!["T", "estimate", "predicted", "relative_deviation"],
        rows,
    })
}

fn moments(
    p: &ManifoldParams,
    k: u32,
    t: f64,
    samples: usize,
    mode: ModeArg,
    y: Option<f64>,
    seed: u64,
) -> Result<Report, CliError> {
    let mode = match mode {
        ModeArg::Signed => MomentMode::Signed,
        ModeArg::Absolute => MomentMode::Absolute,
    };
    // Only R^k has a predicted main term; |R|^k coincides with it for even k.
    let comparable = (2..=9).contains(&k) && (mode == MomentMode::Signed || k.is_multiple_of(2));
    let b = match (comparable, y) {
        (true, Some(y)) => {
            if !(y >= 1.0) || !y.is_finite() {
                return Err(
                    Error::InvalidParameter(format!("y must be finite and >= 1, got {y}")).into(),
                );
            }
            let tau = tau_table(p, y.floor() as u64)?;
            Some(b_k(&tau, k as usize, y)?)
        }
        _ => None,
    };
    let est = moment_estimate(p, k, t, samples, mode, seed)?;
    let predicted = b.map(|b| predicted_coefficient_x(p, k, b));
    let deviation = predicted.map(|c| PredictionReport::new(est.normalized, c).relative_deviation);
    let mut fields = object(serde_json::to_value(&est).map_err(|e| CliError::Io(e.to_string()))?);
    fields.insert("T".into(), json!(t));
    fields.remove("t");
    fields.insert("b_k".into(), json!(b));
    fields.insert("predicted".into(), json!(predicted));
    fields.insert("relative_deviation".into(), json!(deviation));
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    Ok(Report {
        fields,
        header: vec![
            "l",
            "k",
            "T",
            "mode",
            "estimate",
            "std_error",
            "normalized",
            "predicted",
            "relative_deviation",
            "samples",
            "seed",
        ],
        rows: vec![vec![
            p.l().to_string(),
            k.to_string(),
            num(t),
            match mode {
                MomentMode::Signed => "signed".into(),
                MomentMode::Absolute => "absolute".into(),
            },
            num(est.estimate),
            num(est.std_error),
            num(est.normalized),
            opt(predicted),
            opt(deviation),
            est.samples.to_string(),
            seed.to_string(),
        ]],
    })
}

fn report(l: u32, y: Option<f64>) -> Result<Report, CliError> {
    let p = ManifoldParams::new(l)?;
    let cap = y.unwrap_or_else(|| default_cutoff(2));
    if !(cap >= 1.0) || !cap.is_finite() {
        return Err(
            Error::InvalidParameter(format!("y must be finite and >= 1, got {cap}")).into(),
        );
    }
    let tau = tau_table(&p, cap.floor() as u64)?;
    let mut rows = Vec::new();
    let mut constants = Vec::new();
    for k in 2..=9usize {
        let yk = y.unwrap_or_else(|| default_cutoff(k));
        let b = b_k(&tau, k, yk)?;
        let s = s_k_exponent(k as u32);
        let s_text = format!("{}/{}", s.numer(), s.denom());
        let cx = predicted_coefficient_x(&p, k as u32, b);
        let ct = predicted_coefficient_t(&p, k as u32, b);
        rows.push(vec![
            k.to_string(),
            num(yk),
            num(b),
            s_text.clone(),
            num(cx),
            num(ct),
        ]);
        constants.push(json!({
            "k": k, "y": yk, "b_k": b, "s_k": s_text, "coefficient_x": cx, "coefficient_t": ct,
        }));
    }
    let w = p.weyl_coefficient();
    Ok(Report {
        fields: object(json!({
            "l": l,
            "dimension": p.dimension(),
            "weyl_coefficient": format!("{}/{}", w.numer(), w.denom()),
            "theta": p.theta(),
            "error_exponent": p.error_exponent(),
            "constants": constants,
        })),
        header: vec!["k", "y", "b_k", "s_k", "coefficient_x", "coefficient_t"],
        rows,
    })
}
