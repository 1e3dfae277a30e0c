use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use sketchsolve::estimators::QueryAccess;
use sketchsolve::instance::{generate, BMode, InstanceSpec, Profile};
use sketchsolve::oracle::{self, DenseMatrix, DENSE_LIMIT};
use sketchsolve::solver::{self, heuristic_p, theory_p, SamplingRoute, SolverConfig};
use sketchsolve::subsample::{self, rank_probe, SuccinctDescription};
use sketchsolve::{io, Complex64, Error, SampledMatrix, SampledVector, StreamSplitter};

use crate::report::{write_csv, Check, EntryError, RunReport, SweepRow, CSV_SCHEMA_VERSION};
use crate::{
    Command, ExactArgs, Failure, GenArgs, ModeArg, ProbeArgs, ProfileArg, RouteArg, SolveArgs, SweepArgs,
};

type Outcome = Result<(), Failure>;

pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Query(a) => solve(a, ModeArg::Query),
        Command::Sample(a) => solve(a, ModeArg::Sample),
        Command::Psd(a) => solve(a, ModeArg::Psd),
        Command::Exact(a) => exact(a),
        Command::Verify(a) => verify(a),
        Command::RankProbe(a) => probe(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => io::write_text(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => Ok(r?),
            }
        }
    }
}

fn finish(report: &RunReport, out: Option<&Path>) -> Outcome {
    emit(&report.to_json(), out)?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {}: {}", c.name, c.detail);
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn gen(a: GenArgs) -> Outcome {
    let mut spec = InstanceSpec::new(a.m, a.n, a.k, a.kappa, a.seed);
    spec.profile = match a.profile {
        ProfileArg::Linear => Profile::Linear,
        ProfileArg::Geometric => Profile::Geometric,
    };
    spec.b_mode = a.b_mode.parse::<BMode>()?;
    spec.norm = a.norm;
    spec.psd = a.psd;
    let inst = generate(&spec)?;
    let m = inst.sampled(false)?;
    fs::create_dir_all(&a.out).map_err(Error::from)?;
    io::write_text(&a.out.join("matrix.txt"), &io::format_matrix(&m))?;
    io::write_text(&a.out.join("vector.txt"), &io::format_vector(inst.b.as_slice()))?;
    let overlap = (inst.u.adjoint() * &inst.b).norm_squared();
    let meta = serde_json::json!({
        "spec": spec,
        "b_mode": spec.b_mode.to_string(),
        "sigma": inst.sigma,
        "kappa": inst.kappa(),
        "b_overlap": overlap,
        "matrix_digest": m.digest(),
    });
    io::write_text(
        &a.out.join("instance.json"),
        &serde_json::to_string_pretty(&meta).map_err(Error::from)?,
    )?;
    Ok(())
}

fn config(a: &SolveArgs, dims: (usize, usize)) -> SolverConfig {
    let p = a.p.unwrap_or_else(|| heuristic_p(a.k, dims.0, dims.1));
    let mut cfg = SolverConfig::new(a.k, p, a.epsilon, a.delta, a.seed);
    cfg.tau_b = a.tau_b;
    cfg.max_group_size = Some(a.max_group_size);
    cfg.route = match a.route {
        RouteArg::Nested => SamplingRoute::Nested,
        RouteArg::Collapsed => SamplingRoute::Collapsed,
    };
    cfg.b_norm_hint = a.b_norm_hint;
    cfg
}

fn oracle_enabled(a: &SolveArgs, m: &SampledMatrix) -> bool {
    !a.no_oracle && m.rows().max(m.cols()) <= DENSE_LIMIT
}

fn solve(a: SolveArgs, default_mode: ModeArg) -> Outcome {
    let psd = default_mode == ModeArg::Psd;
    let sampling = match (default_mode, a.mode) {
        (ModeArg::Psd, m) => m == Some(ModeArg::Sample),
        (d, m) => m.unwrap_or(d) == ModeArg::Sample,
    };
    let Some(vector) = &a.vector else {
        return Err(Error::InvalidConfig("--vector is required".into()).into());
    };
    let m = io::read_matrix(&a.matrix, a.with_transpose)?;
    let b_values = io::read_vector(vector)?;
    let cfg = config(&a, m.dims());
    let state = if psd {
        solver::prepare_psd(&m, b_values.as_slice(), &cfg)?
    } else {
        solver::prepare(&m, &SampledVector::build(&b_values)?, &cfg)?
    };

    let mut report = RunReport::new(if psd { "psd" } else if sampling { "sample" } else { "query" });
    report.absorb_state(&state, &cfg);
    report.set("prepare_ledger", state.ledger);
    report.set("budgets", &state.budgets);
    if !psd {
        report.overlap = Some(state.overlap());
    }
    if a.theory_p {
        report.theory_p = Some(theory_p(cfg.k, state.description.kappa_hat(), cfg.epsilon, m.frobenius_sq()));
    }

    let exact = if oracle_enabled(&a, &m) {
        let b = oracle::DenseVector::from_column_slice(&b_values);
        Some(oracle::pinv_solve(&m.to_dense(), &b)?)
    } else {
        None
    };

    if sampling {
        let counts = solver::sample_counts(&state, &m, cfg.epsilon, a.samples)?;
        report.samples = Some(a.samples);
        if let Some(x) = &exact {
            let probs = oracle::exact_distribution(x.as_slice())?;
            let tv = oracle::empirical_tv(&counts, &probs);
            let bound = cfg.epsilon + 3.0 * (state.n() as f64 / a.samples as f64).sqrt();
            report.tv = Some(tv);
            report.check(Check::new("tv", tv <= bound, format!("tv {tv:.4} vs bound {bound:.4}")));
        }
        let support = counts.iter().filter(|&&c| c > 0).count();
        report.set("support", support);
    } else {
        let mut err_max: Option<f64> = None;
        for &j in &a.j {
            let est = solver::query_entry(&state, &m, j)?;
            let truth = exact.as_ref().map(|x| x.query(j)).transpose()?;
            let error = truth.map(|t| (est - t).norm());
            if let Some(e) = error {
                err_max = Some(err_max.map_or(e, |x: f64| x.max(e)));
            }
            report.entries.push(EntryError {
                j,
                estimate: est,
                exact: truth,
                error,
            });
        }
        report.err_max = err_max;
        if let Some(e) = err_max {
            report.check(Check::new(
                "entry-error",
                e <= cfg.epsilon,
                format!("max error {e:.4e} vs epsilon {}", cfg.epsilon),
            ));
        }
    }
    report.ledger = Some(m.ledger_snapshot());
    finish(&report, a.out.as_deref())
}

fn exact(a: ExactArgs) -> Outcome {
    let m = io::read_matrix(&a.matrix, false)?;
    let b = io::read_vector(&a.vector)?;
    if b.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: b.len(),
        }
        .into());
    }
    if m.rows().max(m.cols()) > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: m.rows().max(m.cols()),
            limit: DENSE_LIMIT,
        }
        .into());
    }
    let x = oracle::pinv_solve(&m.to_dense(), &oracle::DenseVector::from_column_slice(&b))?;
    emit(io::format_vector(x.as_slice()).trim_end(), a.out.as_deref())?;
    Ok(())
}

fn approx_gram(d: &SuccinctDescription, a: &DenseMatrix) -> Result<DenseMatrix, Error> {
    let (s, _) = subsample::dense_sketch(d, a)?;
    let v = subsample::dense_v(d, &s);
    let d2 = DenseMatrix::from_diagonal(&oracle::DenseVector::from_iterator(
        d.k,
        d.sigma_hat.iter().map(|x| Complex64::new(x * x, 0.0)),
    ));
    Ok(&v * d2 * v.adjoint())
}

fn verify(a: SolveArgs) -> Outcome {
    let m = io::read_matrix(&a.matrix, a.with_transpose)?;
    let dim = m.rows().max(m.cols());
    if dim > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge { dim, limit: DENSE_LIMIT }.into());
    }
    let cfg = config(&a, m.dims());
    cfg.validate()?;
    let d = sketchsolve::subsample(&m, cfg.k, cfg.p, &cfg.streams())?;
    let dense = m.to_dense();
    let sk = subsample::verify_sketch(&d, &dense)?;
    let gram = dense.adjoint() * &dense;
    let approx = approx_gram(&d, &dense)?;

    let mut report = RunReport::new("verify");
    report.config = Some(cfg);
    report.dims = Some(m.dims());
    report.matrix_digest = Some(d.digest.clone());
    report.sigma_hat = d.sigma_hat.clone();
    report.kappa_hat = Some(d.kappa_hat());
    report.set("sketch", sk);
    let s2 = sk.s_over_a * sk.s_over_a;
    report.check(Check::new(
        "frobenius-sandwich",
        (0.5..=1.5).contains(&s2),
        format!("|S|_F^2/|A|_F^2 = {s2:.4}"),
    ));
    let (l, r) = oracle::sqrt_lemma_sides(&gram, &approx)?;
    report.check(Check::new("sqrt-lemma", l <= r * (1.0 + 1e-9), format!("{l:.4e} <= {r:.4e}")));
    let (l, r) = oracle::inv_lemma_sides(&gram, &approx)?;
    report.check(Check::new("inverse-lemma", l <= r * (1.0 + 1e-9), format!("{l:.4e} <= {r:.4e}")));
    let defect = d.orthonormality_defect();
    report.check(Check::new("orthonormal-u", defect <= 1e-10, format!("defect {defect:.2e}")));
    report.ledger = Some(m.ledger_snapshot());
    finish(&report, a.out.as_deref())
}

fn probe(a: ProbeArgs) -> Outcome {
    let m = io::read_matrix(&a.matrix, false)?;
    let s = rank_probe(&m, a.p, &StreamSplitter::new(a.seed))?;
    let top: Vec<f64> = s.into_iter().take(a.top).collect();
    emit(&serde_json::to_string_pretty(&top).map_err(Error::from)?, None)?;
    Ok(())
}

struct Fixed {
    k: usize,
    kappa: f64,
    p: Option<usize>,
}

fn parse_fixed(s: &str) -> Result<Fixed, Error> {
    let mut f = Fixed {
        k: 3,
        kappa: 5.0,
        p: None,
    };
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("expected key=value, got {part:?}")))?;
        let bad = || Error::InvalidConfig(format!("bad value for {key}: {value:?}"));
        match key.trim() {
            "k" => f.k = value.trim().parse().map_err(|_| bad())?,
            "kappa" => f.kappa = value.trim().parse().map_err(|_| bad())?,
            "p" => f.p = Some(value.trim().parse().map_err(|_| bad())?),
            other => return Err(Error::InvalidConfig(format!("unknown fixed parameter {other:?}"))),
        }
    }
    Ok(f)
}

struct Cell {
    row: SweepRow,
    total: u64,
    capped: bool,
}

fn sweep_cell(a: &SweepArgs, f: &Fixed, p: usize, n: usize) -> Result<Cell, Error> {
    let spec = InstanceSpec::new(a.m, n, f.k, f.kappa, a.seed);
    let inst = generate(&spec)?;
    let m = inst.sampled(false)?;
    let b = SampledVector::build(inst.b.as_slice())?;
    let mut cfg = SolverConfig::new(f.k, p, a.epsilon, a.delta, a.seed);
    cfg.max_group_size = Some(a.max_group_size);
    let state = solver::prepare(&m, &b, &cfg)?;
    let oracle_on = a.m.max(n) <= a.oracle_limit;
    let x = oracle_on.then(|| inst.solution());
    let mut err_max: Option<f64> = None;
    for q in 0..a.queries {
        let j = q * n / a.queries.max(1);
        let est = solver::query_entry(&state, &m, j)?;
        if let Some(x) = &x {
            let e = (est - x[j]).norm();
            err_max = Some(err_max.map_or(e, |y: f64| y.max(e)));
        }
    }
    let ledger = m.ledger_snapshot();
    let mut tv = None;
    if a.samples > 0 {
        let counts = solver::sample_counts(&state, &m, cfg.epsilon, a.samples)?;
        if let Some(x) = &x {
            tv = Some(oracle::empirical_tv(&counts, &oracle::exact_distribution(x.as_slice())?));
        }
    }
    Ok(Cell {
        row: SweepRow {
            n,
            p,
            k: f.k,
            kappa: f.kappa,
            entry_queries: ledger.entry_queries,
            samples: ledger.samples,
            err_max,
            tv,
        },
        total: ledger.total(),
        capped: state.budget_capped,
    })
}

fn sweep(a: SweepArgs) -> Outcome {
    let f = parse_fixed(&a.fixed)?;
    let mut ns = a.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns.last().ok_or_else(|| Error::InvalidConfig("--n needs a value".into()))?;
    let p = a.p.or(f.p).unwrap_or_else(|| heuristic_p(f.k, a.m, n_max));
    let cells: Vec<Cell> = ns
        .par_iter()
        .map(|&n| sweep_cell(&a, &f, p, n))
        .collect::<Result<_, _>>()?;

    let rows: Vec<SweepRow> = cells.iter().map(|c| c.row.clone()).collect();
    let mut csv_out = Vec::new();
    write_csv(&mut csv_out, &rows).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let csv_text = String::from_utf8(csv_out).expect("csv is utf-8");
    match &a.out {
        Some(path) => io::write_text(path, &csv_text)?,
        None => emit(csv_text.trim_end(), None)?,
    }

    let mut report = RunReport::new("sweep");
    report.set("csv_schema", CSV_SCHEMA_VERSION);
    report.set("rows", &rows);
    report.set("budget_capped", cells.iter().any(|c| c.capped));
    for pair in cells.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        let growth = hi.row.n as f64 / lo.row.n as f64;
        let allowed = a.max_ratio.powf(growth.log10().ceil().max(1.0));
        let ratio = hi.total as f64 / lo.total as f64;
        report.check(Check::new(
            &format!("sublinear-{}-{}", lo.row.n, hi.row.n),
            ratio <= allowed,
            format!("query ratio {ratio:.3} vs allowed {allowed:.3}"),
        ));
    }
    if let Some(path) = &a.report {
        io::write_text(path, &report.to_json())?;
    }
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}
