use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use hardylab::basis::{
    basis_order_search, fractional_density, gap_report, gcd_bezout, gen_sequence_with, represent_lemma3,
    residue_coverage, sumset_fold, write_bitmap_dump, write_sequence_csv, SequenceWindow,
};
use hardylab::circle::{
    arc_params, circle_r_numeric, count_r_direct, invert, major_arc_report, minor_arc_samples, minor_arc_sup,
    sigma_for, vdc_scan, window_values, ArcParams, CircleError, SumKernel, SumVariant, MAX_TABLE,
};
use hardylab::function::{classify, monotone_probe, DegreeProfile, FunctionExpr, PROBE_POINTS};
use hardylab::hk::{check_conditions, solve_bruteforce, HkInstance, HkOutcome, MAX_WORK};
use hardylab::represent::{assemble, pilot_s, represent_scan, RepresentError, RepresentationResult};

use crate::config::{Command, ConfigError, ExperimentConfig, Origin};
use crate::output::OutputDir;
use crate::report::{Check, Outcome, RunError, RunReport};

pub const REPORT_FILE: &str = "report.json";
pub const CHECKSUM_FILE: &str = "SHA256SUMS";

/// Run `cfg` on a pool of `cfg.parallelism` threads (0 = all cores), writing into `cfg.output`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| RunError::Compute(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let mut out = OutputDir::create(&cfg.output)?;
    let mut ctx = Ctx { cfg, out: &mut out, checks: Vec::new(), outcome: Outcome::Ok };
    match cfg.command {
        Command::Classify => ctx.classify()?,
        Command::Sequence => ctx.sequence()?,
        Command::SumsetGaps => ctx.sumset_gaps()?,
        Command::BasisOrder => ctx.basis_order()?,
        Command::Residues => ctx.residues()?,
        Command::Density => ctx.density()?,
        Command::CircleCheck => ctx.circle_check()?,
        Command::ExpsumScan => ctx.expsum_scan()?,
        Command::VdcScan => ctx.vdc_scan()?,
        Command::HkSolve => ctx.hk_solve()?,
        Command::Represent => ctx.represent()?,
        Command::RepresentScan => ctx.represent_scan()?,
    }
    let (checks, outcome) = (ctx.checks, ctx.outcome);
    out.write_checksums(CHECKSUM_FILE)?;
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.name().to_string(),
        config: cfg.clone(),
        outcome,
        wall_time_s: start.elapsed().as_secs_f64(),
        checks,
        manifest: out.manifest().to_vec(),
    };
    let mut bytes = serde_json::to_vec_pretty(&report).map_err(std::io::Error::from)?;
    bytes.push(b'\n');
    crate::output::write_atomic(&out.path().join(REPORT_FILE), &bytes)?;
    Ok(report)
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    out: &'a mut OutputDir,
    checks: Vec<Check>,
    outcome: Outcome,
}

fn section_error(cfg: &ExperimentConfig, message: String) -> RunError {
    RunError::Config(ConfigError {
        source: cfg.source.clone(),
        origin: Origin::Line(0),
        message,
        expected: None,
        suggestion: None,
    })
}

fn function(cfg: &ExperimentConfig) -> &FunctionExpr {
    cfg.function.as_ref().expect("validated: command needs a function")
}

fn profile(cfg: &ExperimentConfig) -> Result<DegreeProfile, RunError> {
    Ok(classify(function(cfg), cfg.declared.as_ref())?)
}

/// Number of terms n ≥ n_start with [f(n)] ≤ hi, plus one.
fn auto_count(f: &FunctionExpr, n_start: u64, hi: u64) -> Result<u64, RunError> {
    match invert(f, hi as f64 + 1.0) {
        Ok(x) => Ok((x.ceil() as u64).saturating_sub(n_start) + 1),
        Err(CircleError::NoRoot { .. }) => Ok(1),
        Err(e) => Err(e.into()),
    }
}

fn sequence_for(cfg: &ExperimentConfig, hi: u64) -> Result<SequenceWindow, RunError> {
    let p = &cfg.params;
    let f = function(cfg);
    let n_start = p.req("n_start");
    let count = match p.u64("count") {
        Some(c) => c,
        None => auto_count(f, n_start, hi)?,
    };
    Ok(gen_sequence_with(f, n_start, count, cfg.precision)?)
}

/// Sumset membership on [0, hi] by dynamic programming over the elements.
pub fn sumset_oracle(values: &[u64], s: u32, hi: u64) -> Vec<bool> {
    let size = hi as usize + 1;
    let mut cur = vec![false; size];
    for &a in values.iter().filter(|&&a| a <= hi) {
        cur[a as usize] = true;
    }
    for _ in 1..s {
        let mut next = vec![false; size];
        for m in 0..size {
            if cur[m] {
                for &a in values {
                    let t = m as u64 + a;
                    if t <= hi {
                        next[t as usize] = true;
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Growth exponent above which the max ratio counts as growing with P.
pub const VDC_SLOPE_TOL: f64 = 0.05;

/// Least-squares slope; 0 for fewer than two points.
pub fn log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if a > 0.0 && b > 0.0 {
        linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
    } else {
        linspace(a, b, n)
    }
}

#[derive(Serialize)]
struct Sample {
    x: f64,
    value: f64,
    derivative: f64,
}

#[derive(Serialize)]
struct VdcRow {
    beta: f64,
    p: f64,
    p1: f64,
    terms: Option<u64>,
    lambda: Option<f64>,
    h: Option<f64>,
    lhs: Option<f64>,
    rhs: Option<f64>,
    ratio: Option<f64>,
    status: String,
}

#[derive(Serialize)]
struct ScanRow {
    #[serde(rename = "N")]
    n: u64,
    #[serde(rename = "X")]
    x: Option<u64>,
    residual_int: Option<i128>,
    residual_real: Option<f64>,
    hk_status: &'static str,
}

/// Σ_i [f(X + y_i)] and the power sums of y, recomputed outside the pipeline.
fn reverify(f: &FunctionExpr, r: &RepresentationResult) -> Result<(bool, bool, bool), RunError> {
    let mut total: i128 = 0;
    for &y in &r.y {
        total += hardylab::basis::floor_value(f, r.x + y)?.floor as i128;
    }
    let conserved = r.n as i128 - total == r.residual_int;
    let hk = (1..=r.state.k as u32)
        .all(|j| r.y.iter().map(|&y| (y as u128).pow(j)).sum::<u128>() == r.hk_used.targets[j as usize - 1]);
    let window =
        r.state.e[1..].iter().all(|&e| e > 0.0 && e <= r.state.delta0 as f64) && r.state.m.iter().all(|&m| m >= 1);
    Ok((conserved, hk, window))
}

fn hk_label(e: &RepresentError) -> &'static str {
    match e {
        RepresentError::HkUnsolved { outcome, .. } => outcome.label(),
        _ => "error",
    }
}

impl Ctx<'_> {
    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn classify(&mut self) -> Result<(), RunError> {
        let f = function(self.cfg);
        let p = profile(self.cfg)?;
        let samples = PROBE_POINTS
            .iter()
            .map(|&x| {
                let j = f.eval_jet(x, 1)?;
                Ok(Sample { x, value: j.value(), derivative: j.d(1) })
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        let monotone = monotone_probe(f, 10.0, 41)?;
        self.out.json(
            "classify.json",
            &json!({ "function": f.to_string(), "shift": f.shift(), "profile": p, "samples": samples }),
        )?;
        self.check(Check::new("increasing on the probe ladder", monotone, monotone));
        Ok(())
    }

    fn sequence(&mut self) -> Result<(), RunError> {
        let seq = sequence_for(self.cfg, 0)?;
        let mut buf = Vec::new();
        write_sequence_csv(&seq, &mut buf).map_err(|e| RunError::Io(e.into()))?;
        self.out.write("sequence.csv", &buf)?;
        let summary = json!({
            "f": seq.f_id,
            "n_start": seq.n_start,
            "count": seq.len(),
            "non_decreasing": seq.is_non_decreasing(),
            "ambiguous": seq.ambiguous_count(),
            "precision_flagged": (0..seq.len()).filter(|&i| seq.precision_flag(i)).count(),
        });
        self.out.json("sequence.json", &summary)?;
        self.check(Check::new("non-decreasing", seq.is_non_decreasing(), seq.is_non_decreasing()));
        Ok(())
    }

    fn sumset_gaps(&mut self) -> Result<(), RunError> {
        let p = &self.cfg.params;
        let (s, lo, hi) = (p.req("s") as u32, p.req("lo"), p.req("hi"));
        let seq = sequence_for(self.cfg, hi)?;
        let bm = sumset_fold(&seq, s, hi, p.req("bitset_budget"))?;
        let gaps = gap_report(&bm, lo, hi)?;
        let covered = gaps.max_gap == 0 && bm.contains(lo) && bm.contains(hi);
        let oracle_hi = p.req("oracle_hi").min(hi);
        let elements: Vec<u64> = seq.distinct_values().into_iter().map(|v| v as u64).collect();
        let oracle = sumset_oracle(&elements, s, oracle_hi);
        let mismatches = (0..=oracle_hi).filter(|&m| bm.contains(m) != oracle[m as usize]).count();
        self.out.json(
            "gaps.json",
            &json!({
                "s": s,
                "window": gaps.window,
                "max_gap": gaps.max_gap,
                "location": gaps.max_gap_location,
                "histogram": gaps.histogram,
                "min_element": bm.min_element(),
                "elements": elements.iter().filter(|&&a| a <= hi).count(),
                "covered": covered,
            }),
        )?;
        let hist: Vec<(usize, u64)> = gaps.histogram.iter().copied().enumerate().collect();
        self.out.csv("gaps.csv", &["gap", "count"], hist.iter().copied())?;
        let rows: Vec<Vec<f64>> = hist.iter().map(|&(g, c)| vec![g as f64, c as f64]).collect();
        self.out.plotdata(
            "gaps.dat",
            &format!("gap histogram of the {s}-fold sumset on [{lo}, {hi}]"),
            &["gap", "count"],
            &rows,
        )?;
        if p.flag("dump") {
            let mut buf = Vec::new();
            write_bitmap_dump(&bm, &mut buf)?;
            self.out.write("sumset.bin", &buf)?;
        }
        self.check(Check::new("window covered (max_gap = 0)", covered, gaps.max_gap));
        self.check(Check::new(
            &format!("bitset equals set-addition oracle on [0, {oracle_hi}]"),
            mismatches == 0,
            mismatches,
        ));
        Ok(())
    }

    fn basis_order(&mut self) -> Result<(), RunError> {
        let p = &self.cfg.params;
        let (s_max, lo, hi) = (p.req("s_max") as u32, p.req("lo"), p.req("hi"));
        let seq = sequence_for(self.cfg, hi)?;
        let (search, tower) = basis_order_search(&seq, s_max, lo, hi, p.req("bitset_budget"))?;
        let rows: Vec<_> = search
            .levels
            .iter()
            .map(|l| (l.s, l.min_element, l.max_gaps[0], l.max_gaps[1], l.max_gaps[2], l.stabilized))
            .collect();
        self.out.csv(
            "basis_order.csv",
            &["s", "min_element", "gap_quarter", "gap_half", "gap_full", "stabilized"],
            rows,
        )?;
        self.check(Check::new("order found with stabilized gaps", search.order.is_some(), json!(search.order)));
        let cert = match gcd_bezout(&seq) {
            Ok(c) => Some(c),
            Err(e) => {
                self.check(Check::new("gcd certificate", false, e.to_string()));
                None
            }
        };
        let mut lemma3 = Value::Null;
        if let Some(c) = &cert {
            let s = p.u64("lemma3_s").map(|v| v as u32).or(search.order).unwrap_or(s_max).min(s_max);
            let level = tower.level(s);
            let m = level.min_element().ok_or(RunError::Compute(format!("the {s}-fold sumset is empty")))?;
            let g = gap_report(level, m, hi)?.max_gap;
            let c = c.clone().with_gaps(s, g, m);
            self.check(Check::new("certificate sum equals 1", c.bezout_sum() == 1, c.bezout_sum().to_string()));
            let count = p.req("lemma3_count");
            if count > 0 {
                let from = p.u64("lemma3_from").unwrap_or(lo);
                let reps: Vec<_> = (from..from + count).map(|n| (n, represent_lemma3(n, s, &c, &tower))).collect();
                let mut rows = Vec::new();
                let mut verified = 0;
                for (n, r) in &reps {
                    match r {
                        Ok(r) => {
                            verified += usize::from(r.verify());
                            let parts: Vec<String> = r.parts.iter().map(u64::to_string).collect();
                            rows.push((*n, r.parts.len(), r.h, r.b, r.direct, r.verify(), parts.join(" ")));
                        }
                        Err(e) => rows.push((*n, 0, 0, 0, false, false, e.to_string())),
                    }
                }
                self.out.csv("lemma3.csv", &["N", "parts", "h", "b", "direct", "verified", "multiset"], rows)?;
                self.check(Check::new("lemma3 multisets sum to N", verified as u64 == count, verified).limit(count));
                lemma3 = json!({ "s": s, "from": from, "count": count, "verified": verified });
            }
            self.out.json("basis_order.json", &json!({ "search": search, "certificate": c, "lemma3": lemma3 }))?;
        } else {
            self.out.json("basis_order.json", &json!({ "search": search, "certificate": null, "lemma3": lemma3 }))?;
        }
        Ok(())
    }

    fn residues(&mut self) -> Result<(), RunError> {
        let p = &self.cfg.params;
        let f = function(self.cfg);
        let (q_max, n_max) = (p.req("q_max"), p.req("n_max"));
        let mut rows = Vec::new();
        for q in 1..=q_max {
            let r = residue_coverage(f, q, n_max)?;
            rows.push((q, r.len() as u64, r.len() as u64 == q));
        }
        let missing: Vec<u64> = rows.iter().filter(|r| !r.2).map(|r| r.0).collect();
        self.out.csv("residues.csv", &["q", "attained", "full"], rows.iter().copied())?;
        self.out.json("residues.json", &json!({ "q_max": q_max, "n_max": n_max, "incomplete_q": missing }))?;
        self.check(Check::new(&format!("all residues attained for q <= {q_max}"), missing.is_empty(), json!(missing)));
        Ok(())
    }

    fn density(&mut self) -> Result<(), RunError> {
        let p = &self.cfg.params;
        let f = function(self.cfg);
        let (n_max, bins, tol) = (p.req("n_max"), p.req("bins") as usize, p.real("tolerance").unwrap());
        let mut reports = Vec::new();
        let mut rows = Vec::new();
        for q in p.int_list("q").unwrap() {
            let q = q as u64;
            let r = fractional_density(f, q, n_max, bins)?;
            let total: u64 = r.histogram.iter().sum();
            let mut plot = Vec::new();
            for (i, &c) in r.histogram.iter().enumerate() {
                let freq = c as f64 / total as f64;
                let (a, b) = (i as f64 / bins as f64, (i + 1) as f64 / bins as f64);
                rows.push((q, i, a, b, c, freq));
                plot.push(vec![0.5 * (a + b), freq]);
            }
            self.out.plotdata(
                &format!("density_q{q}.dat"),
                &format!("{{f(n)/{q}}}, n <= {n_max}"),
                &["bin_center", "frequency"],
                &plot,
            )?;
            self.check(
                Check::new(&format!("q = {q}: max deviation"), r.max_deviation < tol, r.max_deviation).limit(tol),
            );
            reports.push(r);
        }
        self.out.csv("density.csv", &["q", "bin", "lo", "hi", "count", "frequency"], rows)?;
        self.out.json("density.json", &reports)?;
        Ok(())
    }

    fn arcs(&self, n: u64, s: u32) -> Result<(DegreeProfile, ArcParams), RunError> {
        let prof = profile(self.cfg)?;
        let mut a = arc_params(function(self.cfg), &prof, n, s)?;
        if self.cfg.command != Command::CircleCheck {
            return Ok((prof, a));
        }
        if let Some(x0) = self.cfg.params.real("x0") {
            a.x0 = x0;
        }
        if let Some(x1) = self.cfg.params.real("x1") {
            a.x1 = x1;
        }
        Ok((prof, a))
    }

    fn circle_check(&mut self) -> Result<(), RunError> {
        let p = &self.cfg.params;
        let f = function(self.cfg);
        let (n, s) = (p.req("N"), p.req("s") as u32);
        let (prof, arcs) = self.arcs(n, s)?;
        let values = window_values(f, arcs.x0, arcs.x1)?;
        let max = values.iter().copied().max().unwrap_or(0);
        let work = values.len() as f64 * (n as f64 + 1.0) * (s.max(2) - 1) as f64;
        let identity = if work <= p.real("identity_max_work").unwrap() && n < MAX_TABLE {
            let grid =
                p.u64("grid").map(|g| g as usize).unwrap_or(((2 * s as u64 * max + 1).next_power_of_two()) as usize);
            let direct = count_r_direct(f, n, s, arcs.x0, arcs.x1)?;
            let numeric = circle_r_numeric(f, n, s, arcs.x0, arcs.x1, grid)?;
            let diff = (numeric - direct as f64).abs();
            self.check(Check::new("orthogonality integral equals direct count", diff <= 1e-6, diff).limit(1e-6));
            json!({ "grid": grid, "direct": direct.to_string(), "numeric": numeric, "abs_diff": diff })
        } else {
            self.check(Check::skipped(
                "orthogonality integral equals direct count",
                format!("work {work:e} above identity_max_work"),
            ));
            Value::Null
        };
        let mut major = Value::Null;
        if p.flag("major") {
            if s < 3 {
                self.check(Check::skipped("major arc integral positive", "needs s >= 3"));
            } else {
                let r = major_arc_report(f, &arcs, s, p.req("panel_budget"))?;
                let rows: Vec<_> =
                    r.rows.iter().map(|w| (w.alpha, w.s.re, w.s.im, w.t.re, w.t.im, w.i.re, w.i.im)).collect();
                self.out.csv("major_arc.csv", &["alpha", "s_re", "s_im", "t_re", "t_im", "i_re", "i_im"], rows)?;
                let plot: Vec<Vec<f64>> =
                    r.rows.iter().map(|w| vec![w.alpha, w.s.norm(), (w.t - w.i).norm()]).collect();
                self.out.plotdata("major_arc.dat", "major arc |alpha| <= omega", &["alpha", "|S|", "|T-I|"], &plot)?;
                self.check(Check::new("major arc integral positive", r.positive, r.integral.re));
                self.check(Check::new("max |T - I| on the major arc", true, r.max_t_minus_i));
                major = serde_json::to_value(&r).map_err(std::io::Error::from)?;
            }
        }
        let mut minor = Value::Null;
        if p.flag("minor") {
            let sigma = p.real("sigma").unwrap_or_else(|| sigma_for(&prof));
            let r = minor_arc_sup(f, &arcs, sigma, p.req("samples") as usize)?;
            let rows: Vec<_> =
                r.rows.iter().map(|e| (e.alpha, e.value.re, e.value.im, e.value.norm(), e.terms)).collect();
            self.out.csv("minor_arc.csv", &["alpha", "re", "im", "abs", "terms"], rows)?;
            self.check(
                Check::new("minor arc sup below trivial bound", r.implied_exponent < 1.0, r.implied_exponent)
                    .limit(1.0),
            );
            minor = serde_json::to_value(&r).map_err(std::io::Error::from)?;
        }
        self.out.json(
            "circle_check.json",
            &json!({ "params": arcs, "profile": prof, "terms": values.len(), "identity": identity, "major": major, "minor": minor }),
        )?;
        Ok(())
    }

    fn expsum_scan(&mut self) -> Result<(), RunError> {
        let p = &self.cfg.params;
        let f = function(self.cfg);
        let (lo, hi, omega) = match (p.real("lo"), p.real("hi"), p.u64("N"), p.u64("s")) {
            (Some(lo), Some(hi), _, _) => (lo, hi, None),
            (None, None, Some(n), Some(s)) => {
                let (_, a) = self.arcs(n, s as u32)?;
                (a.x0, a.x1, Some(a.omega))
            }
            _ => return Err(section_error(self.cfg, "expsum-scan needs either lo and hi, or N and s".into())),
        };
        let variant = if p.text("variant") == Some("T") { SumVariant::T } else { SumVariant::S };
        let samples = p.req("samples") as usize;
        let (a0, a1) = (p.real("alpha_min").unwrap(), p.real("alpha_max").unwrap());
        let alphas = if p.text("sampler") == Some("minor") {
            minor_arc_samples(omega.unwrap_or(a0.max(f64::MIN_POSITIVE)), samples)
        } else {
            linspace(a0, a1, samples)
        };
        let kernel = SumKernel::new(f, lo, hi, variant)?;
        let sums: Vec<_> = alphas.par_iter().map(|&a| kernel.eval(a)).collect();
        let bound_ok = sums.iter().all(|e| e.value.norm() <= e.terms as f64 * (1.0 + 1e-12));
        let rows: Vec<_> = sums.iter().map(|e| (e.alpha, e.value.re, e.value.im, e.value.norm(), e.terms)).collect();
        self.out.csv("expsum.csv", &["alpha", "re", "im", "abs", "terms"], rows)?;
        let plot: Vec<Vec<f64>> = sums.iter().map(|e| vec![e.alpha, e.value.norm()]).collect();
        self.out.plotdata("expsum.dat", &format!("exponential sum over ({lo}, {hi}]"), &["alpha", "|S|"], &plot)?;
        let max = sums.iter().map(|e| e.value.norm()).fold(0.0, f64::max);
        self.check(Check::new("|S| <= terms", bound_ok, max).limit(kernel.terms()));
        Ok(())
    }

    fn vdc_scan(&mut self) -> Result<(), RunError> {
        let p = &self.cfg.params;
        let f = function(self.cfg);
        let k = p.req("k") as usize;
        let betas = logspace(p.real("beta_min").unwrap(), p.real("beta_max").unwrap(), p.req("beta_points") as usize);
        let ps = logspace(p.real("p_min").unwrap(), p.real("p_max").unwrap(), p.req("p_points") as usize);
        let points: Vec<(f64, f64)> = ps.iter().flat_map(|&pp| betas.iter().map(move |&b| (b, pp))).collect();
        let results = vdc_scan(f, k, &points);
        let mut rows = Vec::with_capacity(points.len());
        let mut per_p = vec![f64::NAN; ps.len()];
        let mut errors = 0usize;
        for (i, (&(beta, pp), r)) in points.iter().zip(&results).enumerate() {
            match r {
                Ok(c) => {
                    let m = &mut per_p[i / betas.len()];
                    *m = if m.is_nan() { c.ratio } else { m.max(c.ratio) };
                    rows.push(VdcRow {
                        beta,
                        p: pp,
                        p1: c.params.p1,
                        terms: Some(c.params.terms),
                        lambda: Some(c.params.lambda),
                        h: Some(c.params.h),
                        lhs: Some(c.lhs),
                        rhs: Some(c.rhs_formula),
                        ratio: Some(c.ratio),
                        status: "ok".into(),
                    });
                }
                Err(e) => {
                    errors += 1;
                    rows.push(VdcRow {
                        beta,
                        p: pp,
                        p1: 2.0 * pp,
                        terms: None,
                        lambda: None,
                        h: None,
                        lhs: None,
                        rhs: None,
                        ratio: None,
                        status: e.to_string(),
                    });
                }
            }
        }
        self.out.csv("vdc.csv", &["beta", "p", "p1", "terms", "lambda", "h", "lhs", "rhs", "ratio", "status"], rows)?;
        let trend: Vec<(f64, f64)> = ps
            .iter()
            .zip(&per_p)
            .filter(|(_, m)| m.is_finite() && **m > 0.0)
            .map(|(&pp, &m)| (pp.ln(), m.ln()))
            .collect();
        let slope = log_slope(&trend);
        let max = per_p.iter().copied().filter(|m| m.is_finite()).fold(0.0, f64::max);
        let plot: Vec<Vec<f64>> =
            ps.iter().zip(&per_p).filter(|(_, m)| m.is_finite()).map(|(&pp, &m)| vec![pp, m]).collect();
        self.out.plotdata("vdc.dat", "max ratio over beta, per block length", &["P", "max_ratio"], &plot)?;
        self.out.json(
            "vdc.json",
            &json!({ "k": k, "points": points.len(), "errors": errors, "max_ratio": max, "max_ratio_by_p": plot, "log_log_slope": slope }),
        )?;
        self.check(Check::new("max ratio lhs/rhs", max <= 1.0, max).limit(1.0));
        self.check(
            Check::new("log-log slope of max ratio against P", slope <= VDC_SLOPE_TOL, slope).limit(VDC_SLOPE_TOL),
        );
        Ok(())
    }

    fn hk_solve(&mut self) -> Result<(), RunError> {
        let p = &self.cfg.params;
        let targets = p.int_list("targets").unwrap();
        let inst = HkInstance::new(p.req("k") as usize, p.req("s") as usize, targets)?;
        let conditions = check_conditions(&inst)?;
        let outcome = solve_bruteforce(&inst, p.req("xmax"), p.req("node_budget"))?;
        let verified = outcome.solution().map(|x| {
            (1..=inst.k as u32)
                .all(|j| x.iter().map(|&y| (y as u128).pow(j)).sum::<u128>() == inst.targets[j as usize - 1])
        });
        self.out.json(
            "hk.json",
            &json!({ "instance": inst, "conditions": conditions, "outcome": outcome, "verified": verified }),
        )?;
        match &outcome {
            HkOutcome::BudgetExceeded { .. } => self.outcome = Outcome::BudgetExceeded,
            HkOutcome::Solved { .. } => {
                self.check(Check::new("solution re-verified", verified == Some(true), verified))
            }
            HkOutcome::NoSolution => {}
        }
        self.check(Check::new("solved", outcome.solution().is_some(), outcome.label()));
        Ok(())
    }

    fn represent(&mut self) -> Result<(), RunError> {
        let p = &self.cfg.params;
        let f = function(self.cfg);
        let prof = profile(self.cfg)?;
        let r = assemble(
            f,
            &prof,
            p.req("N"),
            p.req("s") as u32,
            p.real("delta").unwrap(),
            p.u64("xmax"),
            p.req("node_budget"),
        )?;
        let (conserved, hk, window) = reverify(f, &r)?;
        self.out.json("represent.json", &r)?;
        self.check(Check::new("0 < E_j <= delta0 and M_j >= 1", window, json!(r.state.e)));
        self.check(Check::new("power sums equal delta0 * M_j", hk, json!(r.hk_used.targets)));
        self.check(Check::new("residual_int recomputed", conserved, r.residual_int.to_string()));
        self.check(
            Check::new("|residual_real| <= C_run", r.residual_real.abs() <= r.c_run, r.residual_real).limit(r.c_run),
        );
        Ok(())
    }

    fn represent_scan(&mut self) -> Result<(), RunError> {
        let p = &self.cfg.params;
        let f = function(self.cfg);
        let prof = profile(self.cfg)?;
        let (n_start, count) = (p.req("n_start"), p.req("count"));
        let delta = p.real("delta").unwrap();
        let budget = p.req("node_budget");
        let ns: Vec<u64> = (n_start..n_start + count).collect();
        let s = match p.u64("s") {
            Some(s) => s as u32,
            None => {
                let pilots: Vec<u64> = match p.int_list("pilots") {
                    Some(v) => v.into_iter().map(|x| x as u64).collect(),
                    None => ns.iter().copied().take(10).collect(),
                };
                let range = p.req("s_min") as u32..=p.req("s_max") as u32;
                pilot_s(f, &prof, &pilots, delta, range.clone(), budget)
                    .ok_or_else(|| RunError::Compute(format!("no s in {range:?} succeeds on the pilot targets")))?
            }
        };
        let results = represent_scan(f, &prof, &ns, s, delta, p.u64("xmax"), budget);
        let mut rows = Vec::with_capacity(ns.len());
        let mut plot = Vec::new();
        let (mut solved, mut budget_hits) = (0usize, 0usize);
        let (mut max_int, mut max_real) = (0i128, 0.0f64);
        let (mut conserved_all, mut hk_all, mut window_all) = (true, true, true);
        for (&n, r) in ns.iter().zip(&results) {
            match r {
                Ok(r) => {
                    solved += 1;
                    let (c, h, w) = reverify(f, r)?;
                    conserved_all &= c;
                    hk_all &= h;
                    window_all &= w;
                    max_int = max_int.max(r.residual_int.abs());
                    max_real = max_real.max(r.residual_real.abs());
                    rows.push(ScanRow {
                        n,
                        x: Some(r.x),
                        residual_int: Some(r.residual_int),
                        residual_real: Some(r.residual_real),
                        hk_status: "solved",
                    });
                    plot.push(vec![n as f64, r.residual_int as f64]);
                }
                Err(e) => {
                    if matches!(e, RepresentError::HkUnsolved { outcome: HkOutcome::BudgetExceeded { .. }, .. }) {
                        budget_hits += 1;
                    }
                    rows.push(ScanRow { n, x: None, residual_int: None, residual_real: None, hk_status: hk_label(e) });
                }
            }
        }
        self.out.csv("represent_scan.csv", &["N", "X", "residual_int", "residual_real", "hk_status"], rows)?;
        self.out.plotdata(
            "represent_scan.dat",
            &format!("residuals, s = {s}, delta = {delta}"),
            &["N", "residual_int"],
            &plot,
        )?;
        self.out.json(
            "represent_scan.json",
            &json!({
                "s": s, "delta": delta, "n_start": n_start, "count": count, "solved": solved,
                "max_abs_residual_int": max_int.to_string(), "max_abs_residual_real": max_real,
            }),
        )?;
        if budget_hits > 0 {
            self.outcome = Outcome::BudgetExceeded;
        }
        self.check(Check::new("all targets represented", solved == ns.len(), solved).limit(ns.len()));
        self.check(Check::new("0 < E_j <= delta0 on every run", window_all, window_all));
        self.check(Check::new("power sums re-verified on every run", hk_all, hk_all));
        self.check(Check::new("residual_int recomputed on every run", conserved_all, max_int.to_string()));
        Ok(())
    }
}

/// Cost estimate printed by `--dry-run`; evaluates f only at a few points.
pub fn estimate(cfg: &ExperimentConfig) -> Result<Value, RunError> {
    let p = &cfg.params;
    let words = |hi: u64| (hi / 64 + 1) as f64;
    let est = match cfg.command {
        Command::Classify => json!({ "evaluations": 41 * 8 }),
        Command::Sequence => json!({ "evaluations": p.req("count") }),
        Command::SumsetGaps | Command::BasisOrder => {
            let hi = p.req("hi");
            let f = function(cfg);
            let count = match p.u64("count") {
                Some(c) => c,
                None => auto_count(f, p.req("n_start"), hi)?,
            };
            let levels = if cfg.command == Command::SumsetGaps { p.req("s") } else { p.req("s_max") };
            let held = if cfg.command == Command::SumsetGaps { 2 } else { levels };
            json!({
                "sequence_terms": count,
                "levels": levels,
                "bits_per_level": hi + 1,
                "memory_bytes": words(hi) * 8.0 * held as f64,
                "word_ops": words(hi) * count as f64 * levels as f64,
                "bitset_budget": p.req("bitset_budget"),
            })
        }
        Command::Residues => json!({ "evaluations": p.req("n_max") * p.req("q_max") }),
        Command::Density => json!({ "evaluations": p.req("n_max") * p.int_list("q").unwrap().len() as u64 }),
        Command::CircleCheck => {
            let f = function(cfg);
            let prof = profile(cfg)?;
            let (n, s) = (p.req("N"), p.req("s") as u32);
            let a = arc_params(f, &prof, n, s)?;
            let terms = (p.real("x1").unwrap_or(a.x1) - p.real("x0").unwrap_or(a.x0)).max(0.0).floor();
            json!({
                "terms": terms,
                "identity_work": terms * (n as f64 + 1.0) * (s.max(2) - 1) as f64,
                "major_arc_sum_terms": 2049.0 * 2.0 * terms,
                "minor_arc_sum_terms": p.req("samples") as f64 * terms,
                "panel_budget": p.req("panel_budget"),
            })
        }
        Command::ExpsumScan => json!({ "samples": p.req("samples") }),
        Command::VdcScan => {
            json!({ "points": p.req("beta_points") * p.req("p_points"), "max_block_terms": p.real("p_max").unwrap() })
        }
        Command::HkSolve => {
            let work = p.req("s") as f64 * (p.req("xmax") as f64).powi(p.req("k") as i32);
            json!({ "work": work, "work_limit": MAX_WORK, "node_budget": p.req("node_budget") })
        }
        Command::Represent => json!({ "pipelines": 1, "node_budget_per_branch": p.req("node_budget") }),
        Command::RepresentScan => {
            json!({ "pipelines": p.req("count"), "node_budget_per_branch": p.req("node_budget") })
        }
    };
    Ok(json!({ "command": cfg.command.name(), "estimate": est, "output": cfg.output }))
}

/// Read, validate and run a config file.
pub fn run_file(path: &Path) -> Result<RunReport, RunError> {
    let cfg = crate::config::load_config(path)?;
    run(&cfg)
}
