//! Estimator dispatch: configuration in, tables out.

use std::collections::BTreeMap;

use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::acceptance;
use super::config::{Estimator, ExperimentConfig, SampleLaw, ShiftSpec};
use super::output::{fmt_f64, fmt_opt, Table};
use crate::ensemble::{
    operator_norm_statistic, sample_block_band, BandMatrixSpec, BlockLaw, DiagonalBlockLaw,
};
use crate::linalg::{c, CMat};
use crate::moments::{
    conditional_domination_check, decay_profile, fractional_moment, holder_gap,
    localization_length_scan, tail_probability, with_retries, MomentEstimate, MonteCarlo,
};
use crate::parallel::map_indexed;
use crate::resolvent::{dense_resolvent_oracle, Resolvent, DEFAULT_ORACLE_CAP};
use crate::rng::SeedSequence;
use crate::spectra::{
    dos_histogram, eigenvector_correlator, map_spectra, minami_pair_rate, simplicity_scan,
    spacing_distribution, wegner_block_tail, Resolution,
};
use crate::stats::LineFit;
use crate::{Error, Result};

/// Tables of one run plus counters for the manifest.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub failures: BTreeMap<String, u64>,
    /// Set by the acceptance suite.
    pub passed: Option<bool>,
}

const MOMENT_HEADER: [&str; 10] = ["estimator", "lambda", "x", "y", "dist", "s", "value", "stderr", "n", "rejected"];

fn moment_row(kind: &str, lambda: f64, x: usize, y: usize, e: &MomentEstimate) -> Vec<String> {
    vec![
        kind.into(),
        fmt_f64(lambda),
        x.to_string(),
        y.to_string(),
        x.abs_diff(y).to_string(),
        fmt_f64(e.s),
        fmt_f64(e.value),
        fmt_f64(e.stderr),
        e.samples.to_string(),
        e.rejected.to_string(),
    ]
}

fn line_fit_items(fit: Option<&LineFit>) -> Vec<(&'static str, String)> {
    vec![
        ("slope", fmt_opt(fit.map(|f| f.slope))),
        ("intercept", fmt_opt(fit.map(|f| f.intercept))),
        ("slope_stderr", fmt_opt(fit.map(|f| f.slope_stderr))),
        ("r_squared", fmt_opt(fit.map(|f| f.r_squared))),
        ("points", fit.map(|f| f.points.to_string()).unwrap_or_default()),
    ]
}

/// Draw `count` values of a scalar law from one sequential stream.
pub fn draw_scalar_samples(law: SampleLaw, count: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = SeedSequence::new(seed).sample(0).block(0);
    match law {
        SampleLaw::Gaussian { mean, sd } => {
            let normal = Normal::new(mean, sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok((0..count).map(|_| normal.sample(&mut rng)).collect())
        }
        SampleLaw::Uniform { a, b } => {
            if !(a < b) {
                return Err(Error::InvalidArgument(format!("need a < b, got [{a}, {b}]")));
            }
            Ok((0..count).map(|_| rng.gen_range(a..b)).collect())
        }
        SampleLaw::TwoPoint { a, b, p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("p = {p} outside [0,1]")));
            }
            Ok((0..count).map(|_| if rng.gen_bool(p) { b } else { a }).collect())
        }
    }
}

fn require_spec(config: &ExperimentConfig) -> Result<BandMatrixSpec> {
    match config.spec() {
        Some(r) => r.map_err(Error::InvalidSpec),
        None => Err(Error::InvalidSpec("ensemble section missing".into())),
    }
}

fn shift_matrix(shift: &ShiftSpec, spec: &BandMatrixSpec) -> CMat {
    let w = spec.w;
    match shift {
        ShiftSpec::Zero => Mat::zeros(w, w),
        ShiftSpec::Scalar { value } => Mat::from_fn(w, w, |i, j| if i == j { c(*value) } else { c(0.0) }),
        ShiftSpec::Random => {
            let mut rng = SeedSequence::new(spec.seed).derive(1).sample(0).block(0);
            DiagonalBlockLaw::GaussianWigner.sample_block(w, spec.symmetry, &mut rng)
        }
        ShiftSpec::Block { block } => block.matrix(),
    }
}

/// Evaluate the configured estimator. The config is assumed validated.
pub fn compute(config: &ExperimentConfig) -> Result<RunOutput> {
    let mc = MonteCarlo::new(config.samples).with_workers(config.workers);
    let mut out = RunOutput::default();
    let kind = config.estimator.kind();
    match &config.estimator {
        Estimator::Sample => {
            let spec = require_spec(config)?;
            let seeds = spec.seeds();
            let dense = map_indexed(config.samples as u64, config.workers, |i| {
                sample_block_band(&spec, &seeds.sample(i)).map(|m| m.to_dense())
            });
            let mut t = Table::new("matrix", &["sample", "row", "col", "re", "im"]);
            for (i, m) in dense.into_iter().enumerate() {
                let m = m?;
                for r in 0..m.nrows() {
                    for col in 0..m.ncols() {
                        let z = m[(r, col)];
                        if z.re != 0.0 || z.im != 0.0 {
                            t.push(vec![
                                i.to_string(),
                                (r + 1).to_string(),
                                (col + 1).to_string(),
                                fmt_f64(z.re),
                                fmt_f64(z.im),
                            ]);
                        }
                    }
                }
            }
            out.tables.push(t);
        }
        Estimator::Resolvent { lambda, x, y } => {
            let spec = require_spec(config)?;
            let seeds = spec.seeds();
            let with_oracle = spec.dim() <= DEFAULT_ORACLE_CAP;
            let draws = map_indexed(config.samples as u64, config.workers, |i| {
                with_retries(&spec, &seeds, i, |m| {
                    let e = Resolvent::new(m, *lambda)?.entry(*x, *y)?;
                    let oracle = if with_oracle {
                        Some(dense_resolvent_oracle(m, *lambda)?[(x - 1, y - 1)])
                    } else {
                        None
                    };
                    Ok((e, oracle))
                })
            });
            let mut t = Table::new(
                "resolvent",
                &["sample", "lambda", "x", "y", "re", "im", "oracle_re", "oracle_im", "max_condition", "rejected"],
            );
            let mut rejected = 0;
            for (i, d) in draws.into_iter().enumerate() {
                let ((e, oracle), rej) = d?;
                rejected += rej;
                t.push(vec![
                    i.to_string(),
                    fmt_f64(*lambda),
                    x.to_string(),
                    y.to_string(),
                    fmt_f64(e.value.re),
                    fmt_f64(e.value.im),
                    fmt_opt(oracle.map(|z| z.re)),
                    fmt_opt(oracle.map(|z| z.im)),
                    fmt_f64(e.max_condition),
                    rej.to_string(),
                ]);
            }
            out.failures.insert("rejected".into(), rejected);
            out.tables.push(t);
        }
        Estimator::Moment { lambda, x, y, s } => {
            let spec = require_spec(config)?;
            let e = fractional_moment(&spec, *lambda, *x, *y, *s, mc)?;
            let mut t = Table::new("moments", &MOMENT_HEADER);
            t.push(moment_row(kind, *lambda, *x, *y, &e));
            out.failures.insert("rejected".into(), e.rejected);
            out.tables.push(t);
        }
        Estimator::Tail {
            lambda,
            x,
            y,
            t_grid,
            kappa,
            sigma,
        } => {
            let spec = require_spec(config)?;
            let reference = kappa.zip(*sigma);
            let curve = tail_probability(&spec, *lambda, *x, *y, t_grid, reference, mc)?;
            let mut t = Table::new(
                "tail",
                &["lambda", "x", "y", "t", "probability", "stderr", "reference", "n", "rejected"],
            );
            for p in &curve.points {
                t.push(vec![
                    fmt_f64(*lambda),
                    x.to_string(),
                    y.to_string(),
                    fmt_f64(p.t),
                    fmt_f64(p.probability),
                    fmt_f64(p.stderr),
                    fmt_opt(p.reference),
                    curve.samples.to_string(),
                    curve.rejected.to_string(),
                ]);
            }
            out.failures.insert("rejected".into(), curve.rejected);
            out.tables.push(t);
        }
        Estimator::Decay {
            lambda,
            s,
            x0,
            distances,
            fit_window,
        } => {
            let spec = require_spec(config)?;
            let profile = decay_profile(&spec, *lambda, *s, *x0, distances, *fit_window, mc)?;
            let mut t = Table::new("moments", &MOMENT_HEADER);
            for p in &profile.points {
                t.push(moment_row(kind, *lambda, *x0, x0 + p.dist, &p.estimate));
            }
            let fit = profile.fit.as_ref().ok();
            let mut items = vec![
                ("slope", fmt_opt(fit.map(|f| f.slope))),
                ("intercept", fmt_opt(fit.map(|f| f.intercept))),
                ("slope_stderr", fmt_opt(fit.map(|f| f.slope_stderr))),
                ("r_squared", fmt_opt(fit.map(|f| f.r_squared))),
                ("xi", fmt_opt(fit.map(|f| f.xi))),
                ("points", fit.map(|f| f.points.to_string()).unwrap_or_default()),
                ("fit_window", fit_window.to_string()),
            ];
            if let Err(f) = &profile.fit {
                items.push(("failure", f.to_string()));
            }
            let rejected = profile.points.iter().map(|p| p.estimate.rejected).max().unwrap_or(0);
            out.failures.insert("rejected".into(), rejected);
            out.tables.push(t);
            out.tables.push(Table::summary("fit", &items));
        }
        Estimator::Scan { widths, n, lambda, s } => {
            let base = require_spec(config)?;
            let specs: Vec<BandMatrixSpec> = widths
                .iter()
                .map(|&w| BandMatrixSpec { w, n: *n, ..base.clone() })
                .collect();
            for sp in &specs {
                sp.validate()?;
            }
            let scan = localization_length_scan(&specs, *lambda, *s, mc)?;
            let mut t = Table::new("scan", &["W", "N", "xi", "r_squared", "failure"]);
            for row in &scan.rows {
                t.push(vec![
                    row.w.to_string(),
                    row.dim.to_string(),
                    fmt_opt(row.xi),
                    fmt_opt(row.r_squared),
                    row.failure.clone().unwrap_or_default(),
                ]);
            }
            out.failures.insert(
                "failed_rows".into(),
                scan.rows.iter().filter(|r| r.xi.is_none()).count() as u64,
            );
            out.tables.push(t);
            out.tables.push(Table::summary("summary", &line_fit_items(scan.exponent.as_ref())));
        }
        Estimator::Dos { bins, half_range, window } => {
            let spec = require_spec(config)?;
            let h = dos_histogram(&spec, *bins, *half_range, *window, mc)?;
            let mut t = Table::new("dos", &["bin_left", "bin_right", "density", "stderr", "reference"]);
            for k in 0..h.density.len() {
                t.push(vec![
                    fmt_f64(h.edges[k]),
                    fmt_f64(h.edges[k + 1]),
                    fmt_f64(h.density[k]),
                    fmt_f64(h.stderr[k]),
                    fmt_f64(h.reference[k]),
                ]);
            }
            out.tables.push(t);
            out.tables.push(Table::summary(
                "summary",
                &[
                    ("sigma", fmt_f64(h.sigma)),
                    ("sup_deviation", fmt_f64(h.sup_deviation)),
                    ("l1_deviation", fmt_f64(h.l1_deviation)),
                    ("asymmetry", fmt_f64(h.asymmetry)),
                    ("window", fmt_f64(h.window)),
                    ("draws", h.draws.to_string()),
                ],
            ));
        }
        Estimator::Spacing { lambda0, window, unfolding } => {
            let spec = require_spec(config)?;
            let spectra = map_spectra(&spec, false, mc, |s| s.eigenvalues)?;
            let refs: Vec<&[f64]> = spectra.iter().map(Vec::as_slice).collect();
            let sigma = spec.bulk_row_variance().map(f64::sqrt);
            let r = spacing_distribution(&refs, *lambda0, *window, *unfolding, sigma)?;
            let mut t = Table::new("spacing", &["bin_left", "bin_right", "density", "poisson", "surmise"]);
            for k in 0..r.density.len() {
                t.push(vec![
                    fmt_f64(r.edges[k]),
                    fmt_f64(r.edges[k + 1]),
                    fmt_f64(r.density[k]),
                    fmt_f64(r.poisson[k]),
                    fmt_f64(r.surmise[k]),
                ]);
            }
            out.tables.push(t);
            out.tables.push(Table::summary(
                "summary",
                &[
                    ("spacings", r.spacings.len().to_string()),
                    ("mean_spacing", fmt_f64(r.mean_spacing)),
                    ("ks_poisson", fmt_f64(r.ks_poisson)),
                    ("ks_surmise", fmt_f64(r.ks_surmise)),
                ],
            ));
        }
        Estimator::Minami {
            lengths,
            centers,
            min_events,
            max_probability,
        } => {
            let spec = require_spec(config)?;
            let resolution = Resolution {
                min_events: *min_events,
                max_probability: *max_probability,
            };
            let m = minami_pair_rate(&spec, lengths, centers, resolution, mc)?;
            out.tables.push(minami_table(&m.rows));
            let mut items = line_fit_items(Some(&m.fit));
            items.push(("N", m.dim.to_string()));
            items.push(("centers", m.centers.len().to_string()));
            out.tables.push(Table::summary("summary", &items));
        }
        Estimator::Eigvec { r, site_pairs, fit_window } => {
            let spec = require_spec(config)?;
            let rep = eigenvector_correlator(&spec, *r, site_pairs, *fit_window, mc)?;
            let mut t = Table::new("eigvec", &["i", "j", "dist", "value", "stderr", "n"]);
            for p in &rep.points {
                t.push(vec![
                    p.i.to_string(),
                    p.j.to_string(),
                    p.dist.to_string(),
                    fmt_f64(p.estimate.value),
                    fmt_f64(p.estimate.stderr),
                    p.estimate.samples.to_string(),
                ]);
            }
            let fit = rep.fit.as_ref().ok();
            let mut items = vec![
                ("slope", fmt_opt(fit.map(|f| f.slope))),
                ("slope_stderr", fmt_opt(fit.map(|f| f.slope_stderr))),
                ("r_squared", fmt_opt(fit.map(|f| f.r_squared))),
                ("xi", fmt_opt(fit.map(|f| f.xi))),
                ("empty_draws", rep.empty_draws.to_string()),
            ];
            if let Err(f) = &rep.fit {
                items.push(("failure", f.to_string()));
            }
            out.failures.insert("empty_draws".into(), rep.empty_draws as u64);
            out.tables.push(t);
            out.tables.push(Table::summary("summary", &items));
        }
        Estimator::Simplicity => {
            let spec = require_spec(config)?;
            let rep = simplicity_scan(&spec, mc)?;
            let mut t = Table::new("gaps", &["sample", "min_gap"]);
            for (i, g) in rep.min_gaps.iter().enumerate() {
                t.push(vec![i.to_string(), fmt_f64(*g)]);
            }
            out.failures.insert("degenerate_gaps".into(), rep.degenerate_gaps as u64);
            out.tables.push(t);
            out.tables.push(Table::summary(
                "summary",
                &[
                    ("draws", rep.min_gaps.len().to_string()),
                    ("degenerate_gaps", rep.degenerate_gaps.to_string()),
                    ("smallest", fmt_f64(rep.smallest)),
                ],
            ));
        }
        Estimator::Wegner { shift, coupling, t_grid } => {
            let spec = require_spec(config)?;
            let a = shift_matrix(shift, &spec);
            let cpl = coupling.as_ref().map(|b| b.matrix());
            let curve = wegner_block_tail(
                &spec.diag_law,
                spec.w,
                spec.symmetry,
                a.as_ref(),
                cpl.as_ref().map(|m| m.as_ref()),
                t_grid,
                mc,
                spec.seed,
            )?;
            let mut t = Table::new("wegner", &["variant", "t", "probability", "stderr", "reference"]);
            let variants = [("single", Some(&curve.single)), ("two_block", curve.two_block.as_ref())];
            for (name, points) in variants {
                for p in points.into_iter().flatten() {
                    t.push(vec![
                        name.into(),
                        fmt_f64(p.t),
                        fmt_f64(p.probability),
                        fmt_f64(p.stderr),
                        fmt_opt(p.reference),
                    ]);
                }
            }
            out.tables.push(t);
            out.tables.push(Table::summary(
                "summary",
                &[
                    ("W", curve.w.to_string()),
                    ("kappa", fmt_f64(curve.kappa)),
                    ("samples", curve.samples.to_string()),
                ],
            ));
        }
        Estimator::Norm => {
            let spec = require_spec(config)?;
            let s = operator_norm_statistic(&spec.diag_law, spec.w, spec.symmetry, config.samples, &spec.seeds())?;
            out.tables.push(Table::summary(
                "norm",
                &[
                    ("W", spec.w.to_string()),
                    ("samples", s.samples.to_string()),
                    ("mean", fmt_f64(s.mean)),
                    ("stderr", fmt_f64(s.stderr)),
                    ("min", fmt_f64(s.min)),
                    ("median", fmt_f64(s.median)),
                    ("max", fmt_f64(s.max)),
                    ("reference", fmt_opt(s.reference)),
                ],
            ));
        }
        Estimator::Holder { law, r, s, q_points } => {
            let xs = draw_scalar_samples(*law, config.samples, config.effective_seed())?;
            let rep = holder_gap(&xs, *r, *s, *q_points)?;
            let mut t = Table::new("holder", &["q", "variance"]);
            for (q, v) in &rep.var_profile {
                t.push(vec![fmt_f64(*q), fmt_f64(*v)]);
            }
            out.tables.push(t);
            out.tables.push(Table::summary(
                "summary",
                &[
                    ("r", fmt_f64(rep.r)),
                    ("s", fmt_f64(rep.s)),
                    ("samples", rep.samples.to_string()),
                    ("h_direct", fmt_f64(rep.h_direct)),
                    ("h_direct_stderr", fmt_f64(rep.h_direct_stderr)),
                    ("h_integral", fmt_f64(rep.h_integral)),
                ],
            ));
        }
        Estimator::Domination { n, delta, p0, model } => {
            let rep = conditional_domination_check(*n, *delta, *p0, *model, mc, config.effective_seed())?;
            out.tables.push(domination_table("domination", &[rep]));
        }
        Estimator::Acceptance => {
            let suite = acceptance::run_suite(config.workers, config.effective_seed(), true);
            out.passed = Some(suite.passed());
            out.failures.insert(
                "failed_criteria".into(),
                suite.criteria.iter().filter(|c| !c.passed).count() as u64,
            );
            out.tables = suite.tables();
        }
    }
    Ok(out)
}

pub(crate) fn minami_table(rows: &[crate::spectra::MinamiRow]) -> Table {
    let mut t = Table::new(
        "minami",
        &[
            "length",
            "pair_probability",
            "stderr",
            "rate",
            "single_probability",
            "mean_count",
            "events",
            "trials",
            "resolved",
        ],
    );
    for r in rows {
        t.push(vec![
            fmt_f64(r.length),
            fmt_f64(r.pair_probability),
            fmt_f64(r.stderr),
            fmt_f64(r.rate),
            fmt_f64(r.single_probability),
            fmt_f64(r.mean_count),
            r.events.to_string(),
            r.trials.to_string(),
            r.resolved.to_string(),
        ]);
    }
    t
}

pub(crate) fn domination_table(statistic: &str, reports: &[crate::moments::DominationReport]) -> Table {
    let mut t = Table::new(
        statistic,
        &["n", "delta", "p0", "samples", "empirical", "stderr", "bound", "exact", "dominated"],
    );
    for r in reports {
        t.push(vec![
            r.n.to_string(),
            fmt_f64(r.delta),
            fmt_f64(r.p0),
            r.samples.to_string(),
            fmt_f64(r.empirical),
            fmt_f64(r.stderr),
            fmt_f64(r.bound),
            fmt_f64(r.exact),
            r.dominated.to_string(),
        ]);
    }
    t
}
