use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::io::{num, read_records, read_table, write_csv, write_table, Provenance};
use crate::repro;
use confsense_core::bias_formulas::{
    confounding_bias, tau_adjusted, tau_star, DiscreteJoint, JointCell,
};
use confsense_core::copula_sens::{ace_given_rho, rho_curve, summarize_for_copula, CopulaMode};
use confsense_core::estimators::{diff_in_means, fit_mediation, ols, wald_iv};
use confsense_core::mediation_sens::mediation_bounds;
use confsense_core::ovb::{contour_grid, partial_r2, robustness_value};
use confsense_core::registry::{
    builtin_registry, recommend, setting_answers, Choice, Recommendation, WorkflowAnswers,
};
use confsense_core::scm::{simulate, truth_with, TruthOptions};
use confsense_core::summary_sens::{
    evalue_ci, evalue_point, manski_bounds, manski_from_data, manski_stratified, rr_from_smd,
    RiskSummary,
};
use confsense_core::{EstimandKind, EstimandQuery, ScmSpec, TruthMethod};
use std::path::Path;
use std::time::Instant;

/// Command line as recorded in output headers; the `--out` value is omitted
/// so that reruns into different files stay byte-identical.
pub fn recorded_command(args: &[String]) -> String {
    let mut parts = vec!["confsense".to_string()];
    let mut skip = false;
    for a in args.iter().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") {
            continue;
        }
        parts.push(a.clone());
    }
    parts.join(" ")
}

pub fn run(cli: Cli, args: &[String]) -> CliResult<()> {
    let command = recorded_command(args);
    let prov = |seed| Provenance {
        command: command.clone(),
        seed,
    };
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a, prov(None)),
        Command::Truth(a) => cmd_truth(a),
        Command::Estimate(a) => cmd_estimate(a, prov(None)),
        Command::Sens(s) => match s {
            SensCommand::Evalue(a) => cmd_evalue(a),
            SensCommand::Manski(a) => cmd_manski(a),
            SensCommand::Ovb(a) => cmd_ovb(a, prov(None)),
            SensCommand::Copula(a) => cmd_copula(a, prov(None)),
            SensCommand::Mediation(a) => cmd_mediation(a, prov(None)),
            SensCommand::BiasTable(a) => cmd_bias_table(a),
        },
        Command::Workflow(a) => cmd_workflow(a, prov(None)),
        Command::ReproducePaper(a) => cmd_reproduce(a, prov(None)),
    }
}

fn load_spec(path: &Path) -> CliResult<ScmSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(ScmSpec::from_toml(&text)?)
}

fn cmd_simulate(a: SimulateArgs, mut prov: Provenance) -> CliResult<()> {
    let spec = load_spec(&a.spec)?;
    let data = simulate(&spec, a.n, a.seed)?;
    prov.seed = Some(a.seed);
    write_table(&a.out, &prov, &data)?;
    println!(
        "wrote {} rows x {} columns to {}",
        data.n_rows(),
        data.n_cols(),
        a.out.display()
    );
    Ok(())
}

fn cmd_truth(a: TruthArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec)?;
    let kind = match a.estimand {
        EstimandArg::Ace => EstimandKind::Ace,
        EstimandArg::Nde => EstimandKind::Nde,
        EstimandArg::Nie => EstimandKind::Nie,
        EstimandArg::Total => EstimandKind::Total,
        EstimandArg::Late => EstimandKind::Late,
    };
    let mut q = EstimandQuery::new(kind, &a.treatment, &a.outcome);
    if let Some(m) = &a.mediator {
        q = q.with_mediator(m);
    }
    if let Some(z) = &a.instrument {
        q = q.with_instrument(z);
    }
    let method = match a.method {
        TruthMethodArg::Auto => None,
        TruthMethodArg::PathTrace => Some(TruthMethod::PathTrace),
        TruthMethodArg::MonteCarlo => Some(TruthMethod::MonteCarlo),
    };
    let r = truth_with(
        &spec,
        &q,
        TruthOptions {
            n_mc: a.n,
            seed: a.seed,
            method,
        },
    )?;
    let method = match r.method {
        TruthMethod::PathTrace => "path-trace",
        TruthMethod::MonteCarlo => "monte-carlo",
    };
    println!(
        "{kind:?} {} -> {}: {} (mc se {}, {method})",
        a.treatment, a.outcome, r.value, r.mc_std_error
    );
    Ok(())
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn cmd_estimate(a: EstimateArgs, prov: Provenance) -> CliResult<()> {
    let data = read_table(&a.data)?;
    let cov = strs(&a.covariates);
    let mut rows = Vec::new();
    match a.method {
        EstimateMethod::DiffInMeans => {
            let (est, se) = diff_in_means(&data, &a.treatment, &a.outcome)?;
            println!("difference in means: {est} (se {se})");
            rows.push(vec!["difference-in-means".into(), num(est), num(se)]);
        }
        EstimateMethod::Ols => {
            let mut reg = vec![a.treatment.as_str()];
            reg.extend(&cov);
            let fit = ols(&data, &a.outcome, &reg)?;
            println!("{:<16} {:>14} {:>12} {:>10}", "term", "estimate", "se", "t");
            for (i, name) in fit.names.iter().enumerate() {
                println!(
                    "{name:<16} {:>14.6} {:>12.6} {:>10.3}",
                    fit.coef[i], fit.std_error[i], fit.t_stat[i]
                );
                rows.push(vec![name.clone(), num(fit.coef[i]), num(fit.std_error[i])]);
            }
            println!(
                "df {}, R² {:.4}, residual sd {:.4}",
                fit.df, fit.r2, fit.resid_sd
            );
        }
        EstimateMethod::Wald => {
            let z = a
                .instrument
                .as_deref()
                .ok_or_else(|| CliError::Usage("--instrument is required for wald".into()))?;
            let est = wald_iv(&data, z, &a.treatment, &a.outcome)?;
            println!("Wald estimate: {est}");
            rows.push(vec!["wald".into(), num(est), String::new()]);
        }
        EstimateMethod::Mediation => {
            let m = a
                .mediator
                .as_deref()
                .ok_or_else(|| CliError::Usage("--mediator is required for mediation".into()))?;
            let f = fit_mediation(&data, &a.treatment, m, &a.outcome, &cov)?;
            for (name, v) in [
                ("beta_total", f.beta_total),
                ("beta_mediator", f.beta_mediator),
                ("beta_direct", f.beta_direct),
                ("gamma", f.gamma),
                ("sigma_total", f.sigma_total),
                ("sigma_mediator", f.sigma_mediator),
                ("rho_tilde", f.rho_tilde),
            ] {
                println!("{name:<16} {v:.6}");
                rows.push(vec![name.into(), num(v), String::new()]);
            }
        }
    }
    if let Some(out) = &a.out {
        write_csv(out, &prov, &["term", "estimate", "se"], &rows)?;
    }
    Ok(())
}

fn cmd_evalue(a: EvalueArgs) -> CliResult<()> {
    let rr = match (a.rr, a.smd) {
        (Some(rr), _) => rr,
        (None, Some(d)) => {
            let rr = rr_from_smd(d);
            println!("RR from SMD {d}: {rr:.4}");
            rr
        }
        (None, None) => return Err(CliError::Usage("--rr or --smd is required".into())),
    };
    if a.lower.is_some() || a.upper.is_some() {
        let s = RiskSummary::new(rr, a.lower, a.upper)?;
        let (point, ci) = evalue_ci(&s)?;
        println!("E = {point:.4}");
        println!("E (confidence limit) = {ci:.4}");
    } else {
        println!("E = {:.4}", evalue_point(rr)?);
    }
    Ok(())
}

fn cmd_manski(a: ManskiArgs) -> CliResult<()> {
    let b = match (&a.data, a.p_treat) {
        (Some(path), _) => {
            let data = read_table(path)?;
            match &a.stratify {
                Some(x) => manski_stratified(&data, &a.treatment, &a.outcome, x)?,
                None => manski_from_data(&data, &a.treatment, &a.outcome)?,
            }
        }
        (None, Some(p)) => manski_bounds(
            p,
            a.p_y1_t1.unwrap_or(f64::NAN),
            a.p_y1_t0.unwrap_or(f64::NAN),
        )?,
        (None, None) => return Err(CliError::Usage("--data or --p-treat is required".into())),
    };
    println!("E[Y(1)] in [{:.6}, {:.6}]", b.y1.lower, b.y1.upper);
    println!("E[Y(0)] in [{:.6}, {:.6}]", b.y0.lower, b.y0.upper);
    println!(
        "ATE    in [{:.6}, {:.6}]  (width {})",
        b.ate.lower,
        b.ate.upper,
        b.ate.width()
    );
    Ok(())
}

fn cmd_ovb(a: OvbArgs, prov: Provenance) -> CliResult<()> {
    let data = read_table(&a.data)?;
    let mut reg = vec![a.treatment.as_str()];
    reg.extend(strs(&a.covariates));
    let fit = ols(&data, &a.outcome, &reg)?;
    let grid = contour_grid(&fit, &a.treatment, a.grid, a.r2_max)?;
    println!(
        "estimate {:.6} (se {:.6}, df {})",
        fit.coefficient(&a.treatment)?,
        fit.se(&a.treatment)?,
        fit.df
    );
    println!(
        "partial R² of treatment with outcome: {:.6}",
        partial_r2(&fit, &a.treatment)?
    );
    println!(
        "robustness value (q = 1): {:.6}",
        robustness_value(&fit, &a.treatment, 1.0)?
    );
    println!("zero contour inside grid: {}", grid.has_zero_contour());
    if let Some(out) = &a.out {
        let rows: Vec<Vec<String>> = grid
            .rows()
            .iter()
            .map(|r| {
                vec![
                    num(r.r2_au),
                    num(r.r2_yu),
                    num(r.estimate),
                    r.t_stat.map(num).unwrap_or_default(),
                    r.extreme.to_string(),
                ]
            })
            .collect();
        write_csv(
            out,
            &prov,
            &["r2_au", "r2_yu", "estimate", "t_stat", "extreme"],
            &rows,
        )?;
    }
    Ok(())
}

fn cmd_copula(a: CopulaArgs, prov: Provenance) -> CliResult<()> {
    let data = read_table(&a.data)?;
    let s = summarize_for_copula(&data, &a.treatment, &a.outcome)?;
    let mode = match a.mode {
        CopulaModeArg::Exact => CopulaMode::Exact,
        CopulaModeArg::Naive => CopulaMode::Naive,
    };
    let curve = rho_curve(&s, a.rho_max, a.grid, mode)?;
    println!(
        "unadjusted ACE {:.6} (p {:.4}, s {:.4}, n {})",
        s.tau_unadj, s.p, s.s, s.n
    );
    match curve.rho_star {
        Some(r) => println!("rho nullifying ACE: {r:.4}"),
        None => println!("rho nullifying ACE: outside (-1, 1)"),
    }
    println!(
        "ACE over rho in [-{m}, {m}]: [{:.6}, {:.6}]",
        curve.bounds.0,
        curve.bounds.1,
        m = a.rho_max
    );
    if let Some(out) = &a.out {
        let mut rows = vec![vec![num(0.0), num(ace_given_rho(&s, 0.0, mode)?)]];
        rows.extend(curve.points.iter().map(|(r, t)| vec![num(*r), num(*t)]));
        write_csv(out, &prov, &["rho", "ace"], &rows)?;
    }
    Ok(())
}

fn cmd_mediation(a: MediationArgs, prov: Provenance) -> CliResult<()> {
    let data = read_table(&a.data)?;
    let fit = fit_mediation(
        &data,
        &a.treatment,
        &a.mediator,
        &a.outcome,
        &strs(&a.covariates),
    )?;
    let g = mediation_bounds(&fit, a.rho_max, a.grid)?;
    let z = g.at_zero();
    println!(
        "total effect {:.6}; at rho = 0: NDE {:.6}, NIE {:.6}",
        g.total, z.nde, z.nie
    );
    println!("NDE bounds [{:.4}, {:.4}]", g.nde.lower, g.nde.upper);
    println!("NIE bounds [{:.4}, {:.4}]", g.nie.lower, g.nie.upper);
    if let Some(out) = &a.out {
        let rows: Vec<Vec<String>> = g
            .rows
            .iter()
            .map(|r| vec![num(r.rho), num(r.nde), num(r.nie)])
            .collect();
        write_csv(out, &prov, &["rho", "nde", "nie"], &rows)?;
    }
    Ok(())
}

fn cmd_bias_table(a: BiasTableArgs) -> CliResult<()> {
    let (header, rows) = read_records(&a.table)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("bias table needs a `{name}` column")))
    };
    let (xi, ui, ai, pi, ei) = (col("x")?, col("u")?, col("a")?, col("p")?, col("ey")?);
    let parse = |s: &str, what: &str| -> CliResult<f64> {
        s.parse()
            .map_err(|_| CliError::Data(format!("`{s}` is not a valid {what}")))
    };
    let mut cells = Vec::with_capacity(rows.len());
    for r in &rows {
        let a = match r[ai].as_str() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(CliError::Data(format!(
                    "treatment level `{other}` is not 0 or 1"
                )))
            }
        };
        cells.push(JointCell {
            x: r[xi].clone(),
            u: r[ui].clone(),
            a,
            p: parse(&r[pi], "probability")?,
            ey: parse(&r[ei], "mean")?,
        });
    }
    let j = DiscreteJoint::from_cells(&cells)?;
    println!("tau (X and U adjusted) = {}", tau_adjusted(&j)?);
    println!("tau* (X adjusted)      = {}", tau_star(&j)?);
    println!("bias                   = {}", confounding_bias(&j)?);
    Ok(())
}

fn parse_choice<T: std::str::FromStr<Err = confsense_core::Error>>(
    values: &[String],
    field: &str,
    problems: &mut Vec<String>,
) -> Option<Choice<T>> {
    if values.is_empty() {
        return None;
    }
    if values.len() == 1 && values[0] == "any" {
        return Some(Choice::Any);
    }
    let mut out = Vec::new();
    for v in values {
        match v.parse() {
            Ok(t) => out.push(t),
            Err(_) => problems.push(format!("{field}: `{v}` is not recognised")),
        }
    }
    Some(Choice::Only(out))
}

fn parse_one<T: std::str::FromStr<Err = confsense_core::Error>>(
    value: &Option<String>,
    field: &str,
    problems: &mut Vec<String>,
) -> Option<T> {
    let v = value.as_ref()?;
    match v.parse() {
        Ok(t) => Some(t),
        Err(_) => {
            problems.push(format!("{field}: `{v}` is not recognised"));
            None
        }
    }
}

fn build_answers(a: &WorkflowArgs) -> CliResult<WorkflowAnswers> {
    let mut answers = if let Some(path) = &a.answers {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        WorkflowAnswers::from_toml(&text)?
    } else {
        match a.preset {
            Some(Preset::Setting1) => setting_answers(1).expect("preset"),
            Some(Preset::Setting2) => setting_answers(2).expect("preset"),
            Some(Preset::Setting3) => setting_answers(3).expect("preset"),
            Some(Preset::Wildcard) | None => WorkflowAnswers::wildcard(),
        }
    };
    let mut problems = Vec::new();
    if let Some(c) = parse_choice(&a.estimand, "step1.estimands", &mut problems) {
        answers.step1.estimands = c;
    }
    if let Some(c) = parse_choice(&a.position, "step2.position", &mut problems) {
        answers.step2.position = c;
    }
    if let Some(c) = parse_choice(&a.metric, "step3.metrics", &mut problems) {
        answers.step3.metrics = c;
    }
    if let Some(v) = parse_one(&a.outcome, "step3.outcome", &mut problems) {
        answers.step3.outcome = v;
    }
    if let Some(v) = a.covariate_adjustment {
        answers.step4.covariate_adjustment = v;
    }
    if let Some(v) = parse_one(&a.u_type, "step5.u-type", &mut problems) {
        answers.step5.u_type = v;
    }
    if let Some(v) = a.distribution_prior {
        answers.step5.distribution_prior = v;
    }
    if let Some(v) = a.u_count {
        answers.step5.count = v;
    }
    if let Some(v) = a.assumption_free {
        answers.step5.assumption_free = v;
    }
    if let Some(c) = parse_choice(&a.class, "step6.classes", &mut problems) {
        answers.step6.classes = c;
    }
    if !problems.is_empty() {
        return Err(confsense_core::Error::InvalidAnswers(problems).into());
    }
    answers.validate()?;
    Ok(answers)
}

pub fn recommendation_text(rec: &Recommendation) -> String {
    let mut s = String::from("ranked methods:\n");
    for (i, m) in rec.ranked.iter().enumerate() {
        s.push_str(&format!(
            "{:>3}. {} ({}) - {}\n",
            i + 1,
            m.id,
            m.year,
            m.rationale
        ));
        for u in &m.unmet {
            s.push_str(&format!("       unmet {u}\n"));
        }
    }
    if rec.ranked.is_empty() {
        s.push_str("  (none)\n");
    }
    s.push_str("excluded:\n");
    for e in &rec.excluded {
        s.push_str(&format!("     {} at step {}: {}\n", e.id, e.step, e.reason));
    }
    if let Some(g) = &rec.gap {
        s.push_str(&format!("note: {g}\n"));
    }
    s
}

fn cmd_workflow(a: WorkflowArgs, prov: Provenance) -> CliResult<()> {
    let answers = build_answers(&a)?;
    let rec = recommend(&answers, &builtin_registry())?;
    print!("{}", recommendation_text(&rec));
    if let Some(out) = &a.out {
        let mut rows = Vec::new();
        for (i, m) in rec.ranked.iter().enumerate() {
            rows.push(vec![
                "ranked".into(),
                (i + 1).to_string(),
                m.id.clone(),
                m.implemented_here.to_string(),
                String::new(),
                m.unmet.join("; "),
                m.rationale.clone(),
            ]);
        }
        for e in &rec.excluded {
            rows.push(vec![
                "excluded".into(),
                String::new(),
                e.id.clone(),
                String::new(),
                e.step.to_string(),
                String::new(),
                e.reason.clone(),
            ]);
        }
        write_csv(
            out,
            &prov,
            &[
                "status",
                "rank",
                "id",
                "implemented_here",
                "step",
                "unmet",
                "detail",
            ],
            &rows,
        )?;
    }
    Ok(())
}

fn cmd_reproduce(a: ReproArgs, mut prov: Provenance) -> CliResult<()> {
    let start = Instant::now();
    let report = repro::reproduce(a.seed, a.n)?;
    print!("{}", report.to_text());
    if let Some(out) = &a.out {
        prov.seed = Some(a.seed);
        let rows: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.metric.clone(),
                    r.paper_value.clone(),
                    r.citation.clone(),
                    num(r.computed),
                    num(r.band.0),
                    num(r.band.1),
                    r.pass.to_string(),
                ]
            })
            .collect();
        write_csv(
            out,
            &prov,
            &[
                "metric",
                "paper_value",
                "citation",
                "computed",
                "band_low",
                "band_high",
                "pass",
            ],
            &rows,
        )?;
    }
    eprintln!("runtime {:.2} s", start.elapsed().as_secs_f64());
    if report.pass() {
        Ok(())
    } else {
        Err(CliError::Numeric(
            "reproduction did not match the published values".into(),
        ))
    }
}
