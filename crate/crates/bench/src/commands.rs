//! The experiment commands. Each returns its metrics table.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use tubal::{
    admm_complete, admm_rpca, cur_tnn_with, gen_gaussian, gen_lowrank, gen_rpca_instance, gen_sparse_replicated,
    horizontal_leverage, make_mask, probs_uniform, rse_frob, rt_product, spectral_norm, t_cur, t_cx, t_product,
    t_svd, t_transpose, truncated_tsvd, AdmmConfigF64, AdmmReport, CurProblem, CurSampling, ObservationMask, ProbSpec,
    Tensor3f64,
};

use crate::cli::{
    Common, CompleteArgs, ConvertArgs, CurSamplingArg, DecompMethod, DecomposeArgs, GenArgs, GenKind, MultiplyArgs,
    MultiplyMethod, RpcaArgs, Scores, SolveMethod, SolverArgs,
};
use crate::error::{BenchError, Result};
use crate::io::{read_mask, read_pgm_stack, read_tensor, write_mask, write_tensor};
use crate::metrics::{params, Table, Value};

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn rep_seed(common: &Common, rep: u64) -> u64 {
    common.seed.wrapping_add(rep)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

fn source_param(input: &Option<PathBuf>) -> String {
    input.as_ref().map_or_else(|| "synthetic".to_string(), |p| p.display().to_string())
}

fn dims_params(dims: (usize, usize, usize)) -> Vec<(&'static str, String)> {
    vec![("n1", dims.0.to_string()), ("n2", dims.1.to_string()), ("n3", dims.2.to_string())]
}

pub fn bench_multiply(common: &Common, args: &MultiplyArgs) -> Result<Table> {
    let x = match &args.input {
        Some(p) => read_tensor(p)?,
        None => gen_sparse_replicated(args.n1, args.n2, args.n3, args.density, common.seed)?,
    };
    let c = args.slices.resolve(args.rank);
    let ur = t_svd(&x)?.truncate(args.rank)?.u;
    let urt = t_transpose(&ur);
    let exact = t_product(&urt, &ur)?;
    let frob_sq = ur.frob_norm_sq();
    let spec_sq = spectral_norm(&ur)?.powi(2);

    let mut p = dims_params(x.dims());
    p.extend([("source", source_param(&args.input)), ("rank", args.rank.to_string()), ("slices", c.to_string())]);
    if args.input.is_none() {
        p.push(("density", args.density.to_string()));
    }
    let p = params(&p);

    let mut table = Table::new(&["experiment", "method", "params", "rep", "seed", "drawn", "rfe", "rse_spec", "wall_ms"]);
    for rep in 0..common.reps {
        let seed = rep_seed(common, rep);
        for &method in &args.methods {
            let (name, probs) = match method {
                MultiplyMethod::Uniform => ("uniform", probs_uniform(ur.n1())),
                MultiplyMethod::Leverage => ("leverage", horizontal_leverage(&ur, args.rank, 1.0)?),
            };
            let start = Instant::now();
            let (approx, plan) = rt_product(&urt, &ur, &probs, c, seed)?;
            let wall = elapsed_ms(start);
            let gap = &exact - &approx;
            table.push(vec![
                ("experiment", "bench-multiply".into()),
                ("method", name.into()),
                ("params", p.clone().into()),
                ("rep", (rep as usize).into()),
                ("seed", seed.into()),
                ("drawn", plan.len().into()),
                ("rfe", (gap.frob_norm() / frob_sq).into()),
                ("rse_spec", (spectral_norm(&gap)? / spec_sq).into()),
                ("wall_ms", wall.into()),
            ]);
        }
    }
    if common.reps > 1 {
        table.push_means(0);
    }
    Ok(table)
}

fn score_spec(scores: Scores, rank: usize) -> (&'static str, ProbSpec) {
    match scores {
        Scores::Deterministic => ("deterministic", ProbSpec::lateral_leverage(rank)),
        Scores::Randomized => ("randomized", ProbSpec::approx_leverage(rank)),
        Scores::Uniform => ("uniform", ProbSpec::uniform()),
        Scores::Norm => ("norm", ProbSpec::norm_a()),
    }
}

pub fn decompose(common: &Common, args: &DecomposeArgs) -> Result<Table> {
    if !args.l.is_empty() && args.l.len() != args.c.len() {
        return Err(BenchError::Usage(format!("--l has {} values but --c has {}", args.l.len(), args.c.len())));
    }
    if args.c.contains(&0) || args.l.contains(&0) {
        return Err(BenchError::Usage("slice counts must be positive".into()));
    }
    let x = match &args.input {
        Some(p) => read_tensor(p)?,
        None => gen_lowrank(args.n1, args.n2, args.n3, args.rank, args.noise, common.seed)?.0,
    };
    let best = rse_frob(&x, &truncated_tsvd(&x, args.rank)?)?;
    if let Some(dir) = &args.save_dir {
        ensure_dir(dir)?;
    }
    let mut base = dims_params(x.dims());
    base.extend([("source", source_param(&args.input)), ("rank", args.rank.to_string())]);
    if args.input.is_none() {
        base.push(("noise", args.noise.to_string()));
    }

    let mut table = Table::new(&[
        "experiment", "method", "params", "rep", "seed", "drawn_c", "drawn_l", "rse_frob", "best_rse", "wall_ms",
    ]);
    for rep in 0..common.reps {
        let seed = rep_seed(common, rep);
        for &method in &args.methods {
            for &scores in &args.scores {
                let (score_name, spec) = score_spec(scores, args.rank);
                for (i, &c) in args.c.iter().enumerate() {
                    let l = args.l.get(i).copied().unwrap_or(c);
                    let mut p = base.clone();
                    p.extend([("scores", score_name.to_string()), ("c", c.to_string())]);
                    let start = Instant::now();
                    let (name, drawn_c, drawn_l, rse, factors) = match method {
                        DecompMethod::Cx => {
                            let r = t_cx(&x, args.rank, c, &spec, seed)?;
                            ("cx", r.plan.len(), 0, r.rse, vec![("C", r.c_tensor)])
                        }
                        DecompMethod::Cur => {
                            p.push(("l", l.to_string()));
                            let r = t_cur(&x, args.rank, c, l, &spec, seed)?;
                            let (dc, dl) = (r.lateral_plan.len(), r.horizontal_plan.len());
                            ("cur", dc, dl, r.rse, vec![("C", r.c_tensor), ("U", r.u_tensor), ("R", r.r_tensor)])
                        }
                    };
                    let wall = elapsed_ms(start);
                    if let (Some(dir), 0) = (&args.save_dir, rep) {
                        for (f, t) in &factors {
                            let stem = match method {
                                DecompMethod::Cx => format!("{name}-{score_name}-c{c}_{f}.tns"),
                                DecompMethod::Cur => format!("{name}-{score_name}-c{c}-l{l}_{f}.tns"),
                            };
                            write_tensor(&dir.join(stem), t)?;
                        }
                    }
                    table.push(vec![
                        ("experiment", "decompose".into()),
                        ("method", format!("{name}/{score_name}").into()),
                        ("params", params(&p).into()),
                        ("rep", (rep as usize).into()),
                        ("seed", seed.into()),
                        ("drawn_c", drawn_c.into()),
                        ("drawn_l", drawn_l.into()),
                        ("rse_frob", rse.into()),
                        ("best_rse", best.into()),
                        ("wall_ms", wall.into()),
                    ]);
                }
            }
        }
    }
    if common.reps > 1 {
        table.push_means(0);
    }
    Ok(table)
}

fn solver_config(s: &SolverArgs) -> Result<AdmmConfigF64> {
    if !(s.time_limit > 0.0) {
        return Err(BenchError::Usage("--time-limit must be positive".into()));
    }
    let cfg = AdmmConfigF64 { lambda: s.lambda, max_iters: s.max_iters, time_limit_s: Some(s.time_limit), ..Default::default() };
    cfg.validate()?;
    Ok(cfg)
}

fn load_truth(s: &SolverArgs, dims: (usize, usize, usize)) -> Result<Option<Tensor3f64>> {
    let Some(p) = &s.truth else { return Ok(None) };
    let t = read_tensor(p)?;
    if t.dims() != dims {
        return Err(BenchError::Usage(format!("truth {} has dims {:?}, input has {:?}", p.display(), t.dims(), dims)));
    }
    Ok(Some(t))
}

struct Outcome {
    l: Tensor3f64,
    iters: usize,
    stop: String,
    dl: f64,
    de: f64,
    feasibility: f64,
}

fn final_residuals(r: &AdmmReport<f64>) -> (f64, f64, f64) {
    r.residual_history.last().map_or((f64::NAN, f64::NAN, f64::NAN), |x| (x.dl, x.de, x.feasibility))
}

fn from_full(r: AdmmReport<f64>) -> Outcome {
    let (dl, de, feasibility) = final_residuals(&r);
    Outcome { iters: r.iters, stop: format!("{:?}", r.stop_reason), dl, de, feasibility, l: r.l_hat }
}

/// Shared driver of `rpca` and `complete`.
fn robust_table(
    experiment: &str,
    common: &Common,
    s: &SolverArgs,
    x: &Tensor3f64,
    truth: Option<&Tensor3f64>,
    mask: Option<&ObservationMask>,
    mut base: Vec<(&'static str, String)>,
) -> Result<Table> {
    let cfg = solver_config(s)?;
    let sampling = match s.sampling {
        CurSamplingArg::Leverage => CurSampling::Leverage,
        CurSamplingArg::Uniform => CurSampling::Uniform,
    };
    let problem = mask.map_or(CurProblem::Rpca, |m| CurProblem::Complete(m.clone()));
    if let Some(dir) = &s.save_dir {
        ensure_dir(dir)?;
    }
    base.extend([("max_iters", s.max_iters.to_string())]);
    if let Some(l) = s.lambda {
        base.push(("lambda", l.to_string()));
    }

    let mut cols = vec!["experiment", "method", "params", "rep", "seed", "iters", "stop", "dl", "de", "feasibility"];
    if truth.is_some() {
        cols.push("rse_frob");
    }
    cols.push("wall_ms");
    let mut table = Table::new(&cols);
    for rep in 0..common.reps {
        let seed = rep_seed(common, rep);
        for &method in &s.methods {
            let mut p = base.clone();
            let start = Instant::now();
            let (name, out) = match method {
                SolveMethod::Full => (
                    "full",
                    from_full(match mask {
                        None => admm_rpca(x, &cfg)?,
                        Some(m) => admm_complete(x, m, &cfg)?,
                    }),
                ),
                SolveMethod::Cur => {
                    p.extend([
                        ("rank", s.rank.to_string()),
                        ("c", s.c.to_string()),
                        ("l", s.l.to_string()),
                        ("sampling", format!("{:?}", sampling).to_lowercase()),
                    ]);
                    let r = cur_tnn_with(x, s.rank, s.c, s.l, &cfg, seed, &problem, sampling)?;
                    let (cl, ce, cf) = final_residuals(&r.c_report);
                    let (rl, re, rf) = final_residuals(&r.r_report);
                    let (cs, rs) = (r.c_report.stop_reason, r.r_report.stop_reason);
                    let stop = if cs == rs { format!("{cs:?}") } else { format!("{cs:?}/{rs:?}") };
                    let iters = r.iters();
                    ("cur", Outcome { l: r.l_tilde, iters, stop, dl: cl.max(rl), de: ce.max(re), feasibility: cf.max(rf) })
                }
            };
            let wall = elapsed_ms(start);
            if let (Some(dir), 0) = (&s.save_dir, rep) {
                write_tensor(&dir.join(format!("{experiment}-{name}_L.tns")), &out.l)?;
            }
            let mut row: Vec<(&str, Value)> = vec![
                ("experiment", experiment.into()),
                ("method", name.into()),
                ("params", params(&p).into()),
                ("rep", (rep as usize).into()),
                ("seed", seed.into()),
                ("iters", out.iters.into()),
                ("stop", out.stop.into()),
                ("dl", out.dl.into()),
                ("de", out.de.into()),
                ("feasibility", out.feasibility.into()),
                ("wall_ms", wall.into()),
            ];
            if let Some(t) = truth {
                row.push(("rse_frob", rse_frob(t, &out.l)?.into()));
            }
            table.push(row);
        }
    }
    if common.reps > 1 {
        table.push_means(0);
    }
    Ok(table)
}

pub fn rpca(common: &Common, args: &RpcaArgs) -> Result<Table> {
    let (x, truth) = match &args.input {
        Some(p) => {
            let x = read_tensor(p)?;
            let truth = load_truth(&args.solver, x.dims())?;
            (x, truth)
        }
        None => {
            let dims = (args.n1, args.n2, args.n3);
            let (x, clean, _) =
                gen_rpca_instance(dims.0, dims.1, dims.2, args.solver.rank, args.fraction, args.magnitude, common.seed)?;
            let truth = load_truth(&args.solver, dims)?.unwrap_or(clean);
            (x, Some(truth))
        }
    };
    let mut base = dims_params(x.dims());
    base.push(("source", source_param(&args.input)));
    if args.input.is_none() {
        base.extend([("fraction", args.fraction.to_string()), ("magnitude", args.magnitude.to_string())]);
    }
    robust_table("rpca", common, &args.solver, &x, truth.as_ref(), None, base)
}

pub fn complete(common: &Common, args: &CompleteArgs) -> Result<Table> {
    let mask_seed = common.seed.wrapping_add(1);
    let pick_mask = |dims, default_rate: Option<f64>| -> Result<ObservationMask> {
        match (&args.mask, args.mask_rate.or(default_rate)) {
            (Some(p), _) => read_mask(p),
            (None, Some(rate)) => Ok(make_mask(dims, rate, mask_seed)?),
            (None, None) => Err(BenchError::Usage("--mask or --mask-rate is required with --input".into())),
        }
    };
    let (x, truth, mask) = match &args.input {
        Some(p) => {
            let x = read_tensor(p)?;
            let mask = pick_mask(x.dims(), None)?;
            let truth = load_truth(&args.solver, x.dims())?;
            (x, truth, mask)
        }
        None => {
            let dims = (args.n1, args.n2, args.n3);
            let r = args.solver.rank;
            let clean = gen_lowrank(dims.0, dims.1, dims.2, r, 0.0, common.seed)?.1;
            let clean = clean.scale(1.0 / ((r * dims.2) as f64).sqrt());
            let mask = pick_mask(dims, Some(0.5))?;
            let truth = load_truth(&args.solver, dims)?.unwrap_or(clean);
            (truth.clone(), Some(truth), mask)
        }
    };
    if mask.dims() != x.dims() {
        return Err(BenchError::Usage(format!("mask dims {:?} differ from tensor dims {:?}", mask.dims(), x.dims())));
    }
    let x = mask.apply(&x)?;
    let mut base = dims_params(x.dims());
    base.extend([("source", source_param(&args.input)), ("observed", mask.fraction_observed().to_string())]);
    robust_table("complete", common, &args.solver, &x, truth.as_ref(), Some(&mask), base)
}

pub fn gen(common: &Common, args: &GenArgs) -> Result<Table> {
    let (n1, n2, n3) = (args.n1, args.n2, args.n3);
    let seed = common.seed;
    let start = Instant::now();
    let mut p = vec![("n1", n1.to_string()), ("n2", n2.to_string()), ("n3", n3.to_string())];
    let (name, nonzeros, frob) = match args.kind {
        GenKind::Mask => {
            let m = make_mask((n1, n2, n3), args.rate, seed)?;
            p.push(("rate", args.rate.to_string()));
            write_mask(&args.save, &m)?;
            ("mask", m.count(), (m.count() as f64).sqrt())
        }
        kind => {
            let (name, x, clean, mask) = match kind {
                GenKind::Gaussian => ("gaussian", gen_gaussian(n1, n2, n3, seed), None, None),
                GenKind::Lowrank => {
                    p.extend([("rank", args.rank.to_string()), ("noise", args.noise.to_string())]);
                    let (noisy, clean) = gen_lowrank(n1, n2, n3, args.rank, args.noise, seed)?;
                    ("lowrank", noisy, Some(clean), None)
                }
                GenKind::Sparse => {
                    p.push(("density", args.density.to_string()));
                    ("sparse", gen_sparse_replicated(n1, n2, n3, args.density, seed)?, None, None)
                }
                GenKind::Rpca => {
                    p.extend([
                        ("rank", args.rank.to_string()),
                        ("fraction", args.fraction.to_string()),
                        ("magnitude", args.magnitude.to_string()),
                    ]);
                    let (x, clean, mask) =
                        gen_rpca_instance(n1, n2, n3, args.rank, args.fraction, args.magnitude, seed)?;
                    ("rpca", x, Some(clean), Some(mask))
                }
                GenKind::Mask => unreachable!("handled above"),
            };
            write_tensor(&args.save, &x)?;
            if let (Some(path), Some(clean)) = (&args.truth_out, &clean) {
                write_tensor(path, clean)?;
            }
            if let (Some(path), Some(mask)) = (&args.mask_out, &mask) {
                write_mask(path, mask)?;
            }
            (name, x.data().iter().filter(|&&v| v != 0.0).count(), x.frob_norm())
        }
    };
    let wall = elapsed_ms(start);
    let mut table = Table::new(&["experiment", "method", "params", "rep", "seed", "nonzeros", "frob_norm", "wall_ms"]);
    table.push(vec![
        ("experiment", "gen".into()),
        ("method", name.into()),
        ("params", params(&p).into()),
        ("rep", 0usize.into()),
        ("seed", seed.into()),
        ("nonzeros", nonzeros.into()),
        ("frob_norm", frob.into()),
        ("wall_ms", wall.into()),
    ]);
    Ok(table)
}

pub fn convert_pgm(common: &Common, args: &ConvertArgs) -> Result<Table> {
    let start = Instant::now();
    let x = read_pgm_stack(&args.dir, args.layout)?;
    write_tensor(&args.save, &x)?;
    let wall = elapsed_ms(start);
    let mut table = Table::new(&["experiment", "method", "params", "rep", "seed", "frob_norm", "wall_ms"]);
    table.push(vec![
        ("experiment", "convert-pgm".into()),
        ("method", format!("{:?}", args.layout).to_lowercase().into()),
        ("params", params(&dims_params(x.dims())).into()),
        ("rep", 0usize.into()),
        ("seed", common.seed.into()),
        ("frob_norm", x.frob_norm().into()),
        ("wall_ms", wall.into()),
    ]);
    Ok(table)
}
