use std::f64::consts::PI;
use std::path::Path;

use compass_core::analytic_families::{closed_form_threshold, repetition_diamond, wrap_angle, FamilyKind, FamilySpec};
use compass_core::code_model::{
    build_code, family_rotated_surface, family_x_shor, family_z_shor, family_z_stacked, random_coloring, validate,
    Coloring, CompassCode,
};
use compass_core::decoder::{decode_bruteforce, decode_mwpm, MatchingGraph, Syndrome};
use compass_core::exact_backend::{syndrome_distribution, Recovery};
use compass_core::experiments::{
    find_crossings_by_series, interpolation_curve, parse_theta_grid, sweep, EnsembleParams, Family, FamilyId,
    Source, SweepTable,
};
use serde_json::json;

use crate::args::*;
use crate::output::{format_for, num, print_json, read, write_with_meta, Context};
use crate::CliError;

pub fn dispatch(command: Command, ctx: &Context) -> Result<(), CliError> {
    match command {
        Command::Code(CodeCommand::Gen(a)) => code_gen(a, ctx),
        Command::Code(CodeCommand::Validate(a)) => code_validate(a, ctx),
        Command::Decode(a) => decode(a),
        Command::Channel(ChannelCommand::Exact(a)) => channel_exact(a, ctx),
        Command::Channel(ChannelCommand::Analytic(a)) => channel_analytic(a, ctx),
        Command::Sweep(a) => run_sweep(a, ctx),
        Command::Threshold(a) => threshold(a, ctx),
        Command::Interpolate(a) => interpolate(a, ctx),
    }
}

fn load_code(path: &Path) -> Result<CompassCode, CliError> {
    let text = read(path)?;
    let coloring = Coloring::from_json(&text).map_err(|e| CliError::failed("invalid_code", format!("{}: {e}", path.display())))?;
    Ok(build_code(&coloring))
}

fn code_gen(mut a: CodeGenArgs, ctx: &Context) -> Result<(), CliError> {
    if a.h.is_some() && a.family != GenFamily::Zstacked {
        return Err(CliError::usage("--h is only valid with --family zstacked"));
    }
    if a.family != GenFamily::Random && (a.q_shor.is_some() || a.seed.is_some()) {
        return Err(CliError::usage("--q-shor and --seed are only valid with --family random"));
    }
    let square = |name: &str| {
        if a.dx != a.dz {
            Err(CliError::usage(format!("{name} codes are square; --dx and --dz must match")))
        } else {
            Ok(a.dz)
        }
    };
    let bad = |e: compass_core::code_model::CodeError| CliError::usage(e.to_string());
    let coloring = match a.family {
        GenFamily::Zshor => family_z_shor(a.dx, a.dz).map_err(bad)?,
        GenFamily::Xshor => family_x_shor(a.dx, a.dz).map_err(bad)?,
        GenFamily::Rsc => family_rotated_surface(square("rsc")?).map_err(bad)?,
        GenFamily::Zstacked => {
            let h = a.h.ok_or_else(|| CliError::usage("zstacked needs --h"))?;
            family_z_stacked(square("zstacked")?, h).map_err(bad)?
        }
        GenFamily::Random => {
            let q = *a.q_shor.get_or_insert(0.5);
            let seed = *a.seed.get_or_insert(0);
            random_coloring(a.dx, a.dz, q, seed).map_err(bad)?.coloring
        }
    };
    let meta = ctx.meta("code gen", &a);
    write_with_meta(&a.out, coloring.to_json().as_bytes(), &meta)?;
    print_json(&json!({
        "out": a.out,
        "d_x": coloring.d_x(),
        "d_z": coloring.d_z(),
        "n_qubits": coloring.n_qubits(),
        "q_shor": coloring.x_cut_fraction(),
        "meta": meta,
    }));
    Ok(())
}

fn code_validate(a: CodeValidateArgs, ctx: &Context) -> Result<(), CliError> {
    let code = load_code(&a.file)?;
    let report = validate(&code);
    print_json(&json!({
        "valid": report.all_passed(),
        "d_x": code.d_x(),
        "d_z": code.d_z(),
        "n_qubits": code.n_qubits(),
        "checks": report.checks,
        "meta": ctx.meta("code validate", &a),
    }));
    if !report.all_passed() {
        let names: Vec<&str> = report.failures().map(|c| c.name).collect();
        return Err(CliError::failed("invalid_code", format!("failed checks: {}", names.join(", "))));
    }
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<(), CliError> {
    let code = load_code(&a.code)?;
    let s: Syndrome = a.syndrome.parse().map_err(|e| CliError::usage(format!("--syndrome: {e}")))?;
    if s.len() != code.x_stabilizers.len() {
        return Err(CliError::usage(format!(
            "--syndrome has {} bits but the code has {} X checks",
            s.len(),
            code.x_stabilizers.len()
        )));
    }
    let correction = if a.oracle {
        decode_bruteforce(&code, &s)
    } else {
        MatchingGraph::new(&code).and_then(|g| decode_mwpm(&g, &s))
    }
    .map_err(|e| CliError::failed("decode", e))?;
    println!("{correction}");
    Ok(())
}

fn channel_exact(a: ChannelExactArgs, ctx: &Context) -> Result<(), CliError> {
    let code = load_code(&a.code)?;
    let d = syndrome_distribution(&code, a.theta_over_pi * PI, a.recovery).map_err(|e| CliError::failed("exact", e))?;
    let ptm = d.channel();
    let meta = ctx.meta("channel exact", &a);
    if let Some(path) = &a.dump_distribution {
        let mut text = serde_json::to_string_pretty(&d.entries).expect("entries serialize");
        text.push('\n');
        write_with_meta(path, text.as_bytes(), &meta)?;
    }
    print_json(&json!({
        "epsilon": ptm.epsilon,
        "delta": ptm.delta,
        "kappa": num(ptm.coherence()),
        "r1": ptm.r1(),
        "diamond": d.diamond(),
        "total_probability": d.total_probability(),
        "n_syndromes": d.entries.len(),
        "meta": meta,
    }));
    Ok(())
}

fn channel_analytic(mut a: ChannelAnalyticArgs, ctx: &Context) -> Result<(), CliError> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| CliError::usage(format!("{flag} is required")));
    if a.h.is_some() && a.family != AnalyticFamily::Zstacked {
        return Err(CliError::usage("--h is only valid with --family zstacked"));
    }
    let kind = match a.family {
        AnalyticFamily::Rep | AnalyticFamily::Zstacked => {
            if a.dx.is_some() || a.dz.is_some() {
                return Err(CliError::usage("rep and zstacked take --l, not --dx/--dz"));
            }
            let l = need(a.l, "--l")?;
            match a.family {
                AnalyticFamily::Rep => FamilyKind::Repetition { l },
                _ => FamilyKind::ZStacked { l, h: need(a.h, "--h")? },
            }
        }
        AnalyticFamily::Zshor | AnalyticFamily::Xshor => {
            let (d_x, d_z) = match (a.l, a.dx, a.dz) {
                (Some(l), None, None) => (l, l),
                (None, Some(x), Some(z)) => (x, z),
                _ => return Err(CliError::usage("zshor and xshor take either --l or both --dx and --dz")),
            };
            a.dx = Some(d_x);
            a.dz = Some(d_z);
            a.l = None;
            if a.family == AnalyticFamily::Zshor {
                FamilyKind::ZShor { d_x, d_z }
            } else {
                FamilyKind::XShor { d_x, d_z }
            }
        }
    };
    let spec = FamilySpec::new(kind, a.recovery);
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let theta = a.theta_over_pi * PI;
    let ptm = spec.channel(theta).map_err(|e| CliError::failed("analytic", e))?;
    let diamond = match kind {
        FamilyKind::Repetition { l } => Some(repetition_diamond(l, theta, a.recovery)),
        FamilyKind::ZShor { d_x, d_z } => Some(repetition_diamond(d_z, wrap_angle(d_x as f64 * theta), a.recovery)),
        _ => None,
    }
    .transpose()
    .map_err(|e| CliError::failed("analytic", e))?;
    let threshold = closed_form_threshold(&spec).ok().map(|t| t.theta_th / PI);
    print_json(&json!({
        "epsilon": ptm.epsilon,
        "delta": ptm.delta,
        "kappa": num(ptm.coherence()),
        "r1": ptm.r1(),
        "diamond": diamond,
        "threshold_over_pi": threshold,
        "meta": ctx.meta("channel analytic", &a),
    }));
    Ok(())
}

fn write_table(table: &SweepTable, path: &Path, format: Format, meta: &serde_json::Value) -> Result<(), CliError> {
    let bytes = match format {
        Format::Csv => table.to_csv_string().map_err(|e| CliError::failed("io", e))?.into_bytes(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(table).expect("table serializes");
            s.push('\n');
            s.into_bytes()
        }
    };
    write_with_meta(path, &bytes, meta)
}

fn run_sweep(mut a: SweepArgs, ctx: &Context) -> Result<(), CliError> {
    let id: FamilyId = a.family.parse().map_err(|e: String| CliError::usage(format!("--family: {e}")))?;
    let thetas = parse_theta_grid(&a.thetas).map_err(|e| CliError::usage(format!("--thetas: {e}")))?;
    let recovery = match (a.recovery, id.recovery) {
        (Some(r), Recovery::Ml) if r != Recovery::Ml => {
            return Err(CliError::usage("--recovery contradicts the +ml suffix of --family"))
        }
        (Some(r), _) => r,
        (None, r) => r,
    };
    a.recovery = Some(recovery);
    let backend = *a.backend.get_or_insert(match id.family {
        Family::Random => BackendArg::Ensemble,
        Family::RotatedSurface => BackendArg::Exact,
        _ => BackendArg::Analytic,
    });
    let mut source = match backend {
        BackendArg::Ensemble => {
            if id.family != Family::Random {
                return Err(CliError::usage("--backend ensemble needs --family random"));
            }
            let q = match (a.q_shor, id.q_shor) {
                (Some(x), Some(y)) if x != y => {
                    return Err(CliError::usage("--q-shor contradicts the @Q suffix of --family"))
                }
                (Some(x), _) | (None, Some(x)) => x,
                (None, None) => return Err(CliError::usage("random ensembles need --q-shor or family@Q")),
            };
            a.q_shor = Some(q);
            Source::ensemble(EnsembleParams {
                q_shor: q,
                n_codes: *a.codes.get_or_insert(100),
                n_samples: *a.samples.get_or_insert(0),
                seed: *a.seed.get_or_insert(0),
                recovery,
            })
        }
        other => {
            if a.q_shor.is_some() || id.q_shor.is_some() || a.codes.is_some() || a.samples.is_some() || a.seed.is_some() {
                return Err(CliError::usage("--q-shor, --codes, --samples and --seed only apply to random ensembles"));
            }
            let s = if other == BackendArg::Exact { Source::exact(id.family) } else { Source::analytic(id.family) };
            s.with_recovery(recovery)
        }
    };
    source.dx = a.dx;
    source.h = a.h;
    source.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let table = sweep(&source, &thetas, &a.distances).map_err(|e| CliError::failed("computation", e))?;
    let format = *a.format.get_or_insert(format_for(&a.out, None));
    let meta = ctx.meta("sweep", &a);
    write_table(&table, &a.out, format, &meta)?;
    print_json(&json!({ "out": a.out, "rows": table.len(), "meta": meta }));
    Ok(())
}

fn threshold(a: ThresholdArgs, ctx: &Context) -> Result<(), CliError> {
    let text = read(&a.input)?;
    let table = match format_for(&a.input, None) {
        Format::Json => SweepTable::from_json(&text),
        Format::Csv => SweepTable::read_csv(text.as_bytes()),
    }
    .map_err(|e| CliError::failed("table", e))?;
    let estimates = find_crossings_by_series(&table, a.metric).map_err(|e| CliError::failed("computation", e))?;
    let meta = ctx.meta("threshold", &a);
    let out = json!({ "estimates": estimates, "meta": meta });
    if let Some(path) = &a.out {
        let mut s = serde_json::to_string_pretty(&json!({ "estimates": estimates })).expect("serializes");
        s.push('\n');
        write_with_meta(path, s.as_bytes(), &meta)?;
    }
    print_json(&out);
    Ok(())
}

fn interpolate(mut a: InterpolateArgs, ctx: &Context) -> Result<(), CliError> {
    let thetas = parse_theta_grid(&a.thetas).map_err(|e| CliError::usage(format!("--thetas: {e}")))?;
    if let Some(q) = a.q_shors.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(CliError::usage(format!("--q-shors values must lie in [0, 1], got {q}")));
    }
    if a.d.len() < 2 {
        return Err(CliError::usage("--d needs at least two distances"));
    }
    let curve = interpolation_curve(&a.d, &a.q_shors, &thetas, a.codes, a.samples, a.seed, a.recovery, a.metric)
        .map_err(|e| CliError::failed("computation", e))?;
    let format = *a.format.get_or_insert(format_for(&a.out, None));
    let meta = ctx.meta("interpolate", &a);
    write_table(&curve.table, &a.out, format, &meta)?;
    print_json(&json!({
        "out": a.out,
        "estimates": curve.estimates,
        "monotone_nondecreasing": curve.monotone_nondecreasing,
        "meta": meta,
    }));
    Ok(())
}
