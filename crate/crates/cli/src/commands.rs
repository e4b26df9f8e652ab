use std::fmt;
use std::fs;
use std::io;
use std::path::PathBuf;

use deltaprime::asymptotics::{count_in_regime, predicted_count, predicted_ground_state, predicted_j0_eigenvalue};
use deltaprime::forms;
use deltaprime::jacobi::{self, Tridiagonal};
use deltaprime::solver::{self, CouplingParams, Eigenfunction, SolverOptions, SpectralResult, CRITICAL_BETA};
use deltaprime::verify::{run_verification, VerifyConfig};
use deltaprime::{par, Execution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::table::{write_json, with_output, Cell, Format, Table};
use crate::{svg, BetaArgs, MatrixKind, OutputArgs, SolverArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, regime errors, numerical failures: exit status 2.
    Input(String),
    /// A verification ran and failed: exit status 1.
    Verification(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Verification(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<deltaprime::Error> for CliError {
    fn from(e: deltaprime::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn collect_betas(args: &BetaArgs, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let mut v = args.beta.clone();
    if let Some(g) = &args.beta_grid {
        v.extend_from_slice(&g.0);
    }
    if v.is_empty() {
        v = default.to_vec();
    }
    if v.is_empty() {
        return Err(CliError::Input("give --beta or --beta-grid".into()));
    }
    if let Some(b) = v.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
        return Err(CliError::Input(format!("beta must be positive and finite, got {b}")));
    }
    Ok(v)
}

fn solver_options(args: &SolverArgs) -> Result<SolverOptions, CliError> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(CliError::Input(format!("--tol must be positive, got {}", args.tol)));
    }
    if args.trunc.is_some_and(|n| n < 2) {
        return Err(CliError::Input("--trunc must be at least 2".into()));
    }
    Ok(SolverOptions {
        tol: args.tol,
        trunc: args.trunc,
        ..Default::default()
    })
}

fn emit(table: &Table, output: &OutputArgs, default: Format) -> CliResult {
    let format = output.format.unwrap_or(default);
    with_output(output.out.as_deref(), |w| table.write(format, w))?;
    Ok(())
}

/// Solves every coupling in parallel; results stay in input order.
fn solve_all(params: &[Result<CouplingParams, String>], opts: &SolverOptions) -> Vec<Result<SpectralResult, String>> {
    par::map(Execution::default(), params, |p| {
        let p = p.as_ref().map_err(Clone::clone)?;
        solver::discrete_spectrum(p, opts).map_err(|e| e.to_string())
    })
}

fn params_for(betas: &[f64]) -> Vec<Result<CouplingParams, String>> {
    betas.iter().map(|&b| CouplingParams::new(b).map_err(|e| e.to_string())).collect()
}

fn consistency_note(r: &SpectralResult) -> Option<String> {
    (!r.count_consistent).then(|| {
        format!(
            "secular scan found {} roots but the Sturm count is {}",
            r.count(),
            r.jacobi_count
        )
    })
}

fn all_failed<T, E>(rows: &[Result<T, E>]) -> bool {
    rows.iter().all(Result::is_err)
}

fn warn_failures(betas: &[f64], results: &[Result<SpectralResult, String>]) {
    for (b, r) in betas.iter().zip(results) {
        if let Err(e) = r {
            eprintln!("warning: beta = {b}: {e}");
        }
    }
}

pub fn spectrum(args: &BetaArgs, solver_args: &SolverArgs, output: &OutputArgs) -> CliResult {
    let betas = collect_betas(args, &[])?;
    let opts = solver_options(solver_args)?;
    let results = solve_all(&params_for(&betas), &opts);
    warn_failures(&betas, &results);

    let mut t = Table::new(&["beta", "mu", "index", "lambda", "residual", "n_trunc", "converged"])
        .with_json_only(&["reason"]);
    for (&beta, res) in betas.iter().zip(&results) {
        let mu = beta / CRITICAL_BETA;
        match res {
            Ok(r) if r.count() > 0 => {
                let note = consistency_note(r).map_or(Cell::Empty, Cell::Text);
                for (i, e) in r.eigenvalues.iter().enumerate() {
                    t.push(vec![
                        Cell::Num(beta),
                        Cell::Num(r.params.mu),
                        (i + 1).into(),
                        Cell::Sci(e.lambda),
                        Cell::Num(e.residual),
                        e.truncation.into(),
                        e.converged.into(),
                        note.clone(),
                    ]);
                }
            }
            other => {
                let reason = match other {
                    Err(e) => e.clone(),
                    Ok(_) => "no eigenvalue found below 1/2".into(),
                };
                t.push(vec![
                    Cell::Num(beta),
                    Cell::Num(mu),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    false.into(),
                    Cell::Text(reason),
                ]);
            }
        }
    }
    emit(&t, output, Format::Csv)?;
    if all_failed(&results) {
        return Err(CliError::Input("no coupling constant produced a spectrum".into()));
    }
    Ok(())
}

pub fn scan_critical(
    args: &BetaArgs,
    mus: &[f64],
    mu_grid: Option<&crate::grid::StepRange>,
    solver_args: &SolverArgs,
    output: &OutputArgs,
) -> CliResult {
    let mut mu_list = mus.to_vec();
    if let Some(g) = mu_grid {
        mu_list.extend_from_slice(&g.0);
    }
    let mut params = if args.beta.is_empty() && args.beta_grid.is_none() {
        Vec::new()
    } else {
        params_for(&collect_betas(args, &[])?)
    };
    params.extend(mu_list.iter().map(|&m| CouplingParams::from_mu(m).map_err(|e| e.to_string())));
    if params.is_empty() {
        return Err(CliError::Input("give --mu, --mu-grid, --beta or --beta-grid".into()));
    }
    if let Some(Err(e)) = params.iter().find(|p| p.is_err()) {
        return Err(CliError::Input(e.clone()));
    }
    let opts = solver_options(solver_args)?;
    let results = solve_all(&params, &opts);

    let mut t = Table::new(&[
        "beta",
        "mu",
        "computed_count",
        "jacobi_count",
        "predicted_count",
        "ratio",
        "in_regime",
        "converged",
    ])
    .with_json_only(&["reason"]);
    for (p, res) in params.iter().zip(&results) {
        let p = p.as_ref().expect("checked above");
        match res {
            Ok(r) => {
                let pred = predicted_count(p).ok();
                let converged = r.all_converged() && r.count_consistent;
                if !converged {
                    eprintln!("warning: mu = {}: counts not converged", p.mu);
                }
                t.push(vec![
                    Cell::Num(p.beta),
                    Cell::Num(p.mu),
                    r.count().into(),
                    r.jacobi_count.into(),
                    Cell::opt_num(pred),
                    Cell::opt_num(pred.map(|q| r.count() as f64 / q)),
                    count_in_regime(p).into(),
                    converged.into(),
                    consistency_note(r).map_or(Cell::Empty, Cell::Text),
                ]);
            }
            Err(e) => {
                eprintln!("warning: mu = {}: {e}", p.mu);
                t.push(vec![
                    Cell::Num(p.beta),
                    Cell::Num(p.mu),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    false.into(),
                    false.into(),
                    Cell::Text(e.clone()),
                ]);
            }
        }
    }
    emit(&t, output, Format::Csv)?;
    if all_failed(&results) {
        return Err(CliError::Input("no coupling constant produced a count".into()));
    }
    Ok(())
}

pub fn weak_coupling(args: &BetaArgs, solver_args: &SolverArgs, output: &OutputArgs) -> CliResult {
    let betas = collect_betas(args, &[8.0, 12.0, 16.0, 24.0, 48.0])?;
    let opts = solver_options(solver_args)?;
    let results = solve_all(&params_for(&betas), &opts);
    warn_failures(&betas, &results);

    let mut t = Table::new(&[
        "beta",
        "lambda",
        "predicted",
        "scaled_gap",
        "deviation",
        "in_regime",
        "converged",
    ])
    .with_json_only(&["reason"]);
    for (&beta, res) in betas.iter().zip(&results) {
        let ground = res.as_ref().ok().and_then(|r| r.eigenvalues.first());
        let pred = CouplingParams::new(beta).map(|p| predicted_ground_state(&p)).ok();
        let scaled = ground.map(|e| beta.powi(4) * (0.5 - e.lambda));
        let reason = match (res, ground) {
            (Err(e), _) => Cell::Text(e.clone()),
            (Ok(_), None) => Cell::Text("no eigenvalue found below 1/2".into()),
            (Ok(r), Some(_)) => consistency_note(r).map_or(Cell::Empty, Cell::Text),
        };
        t.push(vec![
            Cell::Num(beta),
            ground.map_or(Cell::Empty, |e| Cell::Sci(e.lambda)),
            pred.map_or(Cell::Empty, |g| Cell::Sci(g.lambda)),
            Cell::opt_num(scaled),
            Cell::opt_num(scaled.map(|s| (s - 4.0).abs())),
            pred.is_some_and(|g| g.in_regime).into(),
            ground.is_some_and(|e| e.converged).into(),
            reason,
        ]);
    }
    emit(&t, output, Format::Csv)?;
    if all_failed(&results) {
        return Err(CliError::Input("no coupling constant produced a spectrum".into()));
    }
    Ok(())
}

pub struct JacobiRequest {
    pub matrix: MatrixKind,
    pub eps: Option<f64>,
    pub mu: Option<f64>,
    pub beta: Option<f64>,
    pub size: usize,
    pub threshold: Option<f64>,
    pub n_max: usize,
}

impl JacobiRequest {
    fn mu(&self) -> Result<Option<f64>, CliError> {
        match (self.mu, self.beta) {
            (Some(_), Some(_)) => Err(CliError::Input("give only one of --mu and --beta".into())),
            (Some(m), None) => Ok(Some(m)),
            (None, Some(b)) => Ok(Some(CouplingParams::new(b)?.mu)),
            (None, None) => Ok(None),
        }
    }

    fn build(&self) -> Result<(Tridiagonal, f64), CliError> {
        let mu = self.mu()?;
        let need_mu = || CliError::Input("this matrix needs --mu or --beta".into());
        Ok(match self.matrix {
            MatrixKind::JEps => {
                let eps = self.eps.ok_or_else(|| CliError::Input("j-eps needs --eps".into()))?;
                let t = match self.threshold {
                    Some(t) => t,
                    None => mu.ok_or_else(need_mu)?,
                };
                (jacobi::build_j_eps(eps, self.size)?, t)
            }
            MatrixKind::J0 => (jacobi::build_j0(self.size)?, self.threshold.unwrap_or(1.0)),
            MatrixKind::J0Mu => (
                jacobi::build_j0_mu(mu.ok_or_else(need_mu)?, self.size)?,
                self.threshold.unwrap_or(0.0),
            ),
        })
    }
}

pub fn jacobi(req: &JacobiRequest, output: &OutputArgs) -> CliResult {
    let (m, threshold) = req.build()?;
    let name = match req.matrix {
        MatrixKind::JEps => "j-eps",
        MatrixKind::J0 => "j0",
        MatrixKind::J0Mu => "j0-mu",
    };
    let count = jacobi::count_above(&m, threshold)?;
    let ev = jacobi::eigenvalues_above(&m, threshold, req.n_max)?;
    let mut t = Table::new(&["matrix", "size", "threshold", "index", "eigenvalue", "predicted"]);
    for (i, &l) in ev.iter().enumerate() {
        let predicted = (req.matrix == MatrixKind::J0 && threshold == 1.0)
            .then(|| predicted_j0_eigenvalue(i + 1).ok())
            .flatten();
        t.push(vec![
            Cell::Text(name.into()),
            m.size().into(),
            Cell::Num(threshold),
            (i + 1).into(),
            Cell::Sci(l),
            predicted.map_or(Cell::Empty, Cell::Sci),
        ]);
    }
    eprintln!(
        "{name} (N = {}): {} eigenvalues above {threshold}, {} below{}",
        m.size(),
        count.count_above,
        count.count_below,
        if count.shifted { " (threshold nudged off a pivot breakdown)" } else { "" }
    );
    match output.format.unwrap_or(Format::Csv) {
        Format::Csv => emit(&t, output, Format::Csv),
        Format::Json => {
            let v = json!({
                "matrix": name,
                "size": m.size(),
                "count": count,
                "eigenvalues": t.to_json(),
            });
            with_output(output.out.as_deref(), |w| write_json(&v, w))?;
            Ok(())
        }
    }
}

pub fn forms_check(args: &BetaArgs, samples: usize, seed: u64, output: &OutputArgs) -> CliResult {
    let betas = collect_betas(args, &[CRITICAL_BETA, 3.0, 5.0])?;
    if samples == 0 {
        return Err(CliError::Input("--samples must be at least 1".into()));
    }
    let params = betas
        .iter()
        .map(|&b| CouplingParams::new(b))
        .collect::<Result<Vec<_>, _>>()?;
    let indexed: Vec<(u64, CouplingParams)> = params.into_iter().enumerate().map(|(i, p)| (i as u64, p)).collect();
    let rows = par::map(Execution::default(), &indexed, |&(i, p)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
        let mut violations = 0usize;
        let mut b_margin = f64::INFINITY;
        let mut form_margin: Option<f64> = None;
        for _ in 0..samples {
            let r = forms::bound_check(&forms::random_state(&mut rng), &p);
            violations += usize::from(!r.holds());
            b_margin = b_margin.min(r.b_margin / r.a0);
            if let Some(m) = r.form_margin {
                form_margin = Some(form_margin.map_or(m / r.norm_sq, |f| f.min(m / r.norm_sq)));
            }
        }
        let gap = forms::weak_coupling_witness(&p).map(|(_, g)| g).ok();
        (p.beta, violations, b_margin, form_margin, gap)
    });

    let mut t = Table::new(&[
        "beta",
        "samples",
        "violations",
        "min_b_margin",
        "min_form_margin",
        "witness_gap",
    ]);
    let mut total = 0;
    for &(beta, violations, b_margin, form_margin, gap) in &rows {
        total += violations;
        t.push(vec![
            Cell::Num(beta),
            samples.into(),
            violations.into(),
            Cell::Num(b_margin),
            Cell::opt_num(form_margin),
            Cell::opt_num(gap),
        ]);
    }
    emit(&t, output, Format::Csv)?;
    if total > 0 {
        return Err(CliError::Verification(format!("{total} form-bound violations")));
    }
    Ok(())
}

pub struct FieldRequest {
    pub beta: f64,
    pub index: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub sidecar: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

pub fn field(req: &FieldRequest, solver_args: &SolverArgs, output: &OutputArgs) -> CliResult {
    if req.index == 0 {
        return Err(CliError::Input("--index starts at 1".into()));
    }
    let params = CouplingParams::new(req.beta)?;
    let r = solver::discrete_spectrum(&params, &solver_options(solver_args)?)?;
    let est = r.eigenvalues.get(req.index - 1).ok_or_else(|| {
        CliError::Input(format!(
            "beta = {} has {} eigenvalue(s); index {} does not exist",
            req.beta,
            r.count(),
            req.index
        ))
    })?;
    if !est.converged {
        return Err(CliError::Input(format!("eigenvalue {} did not converge", req.index)));
    }
    let cv = solver::eigenvector(&params, est)?;
    let ef = Eigenfunction::from_coefficients(&cv)?;
    let field = ef.sample(&req.xs, &req.ys, Execution::default())?;
    let matching = solver::matching_check(&ef, &req.ys, 1e-4)?;
    let grid = |g: &[f64]| json!({ "lo": g[0], "hi": g[g.len() - 1], "points": g.len() });
    let meta = json!({
        "beta": params.beta,
        "mu": params.mu,
        "index": req.index,
        "lambda": est.lambda,
        "residual": est.residual,
        "n_trunc": est.truncation,
        "levels": ef.levels(),
        "x": grid(&req.xs),
        "y": grid(&req.ys),
        "max_abs": field.max_abs(),
        "antisymmetry_defect": field.antisymmetry_defect(),
        "matching": matching,
    });

    match output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = Table::new(&["x", "y", "psi"]);
            for (i, &x) in field.x.iter().enumerate() {
                for (j, &y) in field.y.iter().enumerate() {
                    t.push(vec![Cell::Num(x), Cell::Num(y), Cell::Num(field.values[i][j])]);
                }
            }
            emit(&t, output, Format::Csv)?;
            let sidecar = req.sidecar.clone().or_else(|| {
                output.out.as_ref().map(|p| {
                    let s = p.with_extension("json");
                    if &s == p {
                        p.with_extension("meta.json")
                    } else {
                        s
                    }
                })
            });
            match sidecar {
                Some(p) => with_output(Some(&p), |w| write_json(&meta, w))?,
                None => eprintln!("note: CSV went to stdout; pass --out or --sidecar to keep the metadata"),
            }
        }
        Format::Json => {
            let mut v = meta;
            v["x"] = json!(field.x);
            v["y"] = json!(field.y);
            v["psi"] = json!(field.values);
            with_output(output.out.as_deref(), |w| write_json(&v, w))?;
        }
    }
    if let Some(p) = &req.svg {
        let title = format!("|Psi|, beta = {}, Lambda = {:.10}", params.beta, est.lambda);
        fs::write(p, svg::render(&field, &title))?;
    }
    Ok(())
}

pub fn verify(seed: u64, bound_constant: Option<f64>, output: &OutputArgs) -> CliResult {
    let cfg = VerifyConfig {
        seed,
        bound_constant: bound_constant.unwrap_or(CRITICAL_BETA),
        ..Default::default()
    };
    let report = run_verification(&cfg);
    match output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let v = serde_json::to_value(&report).map_err(io::Error::from)?;
            with_output(output.out.as_deref(), |w| write_json(&v, w))?;
        }
        Format::Csv => {
            let mut t = Table::new(&["name", "passed", "margin", "seed", "detail"]);
            for e in &report.entries {
                t.push(vec![
                    Cell::Text(e.name.into()),
                    e.passed.into(),
                    Cell::Num(e.margin),
                    e.seed.map_or(Cell::Empty, Cell::Int),
                    Cell::Text(e.detail.clone()),
                ]);
            }
            emit(&t, output, Format::Csv)?;
        }
    }
    let failed: Vec<&str> = report.entries.iter().filter(|e| !e.passed).map(|e| e.name).collect();
    eprintln!(
        "{} of {} checks passed",
        report.entries.len() - failed.len(),
        report.entries.len()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}
