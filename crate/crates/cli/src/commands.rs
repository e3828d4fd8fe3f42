use std::fs::File;
use std::io::{BufWriter, Write};

use clap::ValueEnum;
use eigentomo::cosine::{assemble_constraints, coeffs_from_generator, null_basis, ConstraintSystem, NullBasis};
use eigentomo::diagnostics::{diagnose_field, diagnose_potential, Check, Tolerances};
use eigentomo::eigenstrain::{check_reduction, diagonalize, isotropic_certificate};
use eigentomo::field::{write_field_csv, write_field_vtk, COMPONENT_NAMES};
use eigentomo::imagefit::{fit, slice_design_matrix, BinaryTarget, SliceLattice, SliceSpec};
use eigentomo::poly::PolyVector;
use eigentomo::poorly::{
    convert_u_to_spw, is_poorly, lie_bracket, mixed_second_derivatives, shear_equilibrium_residual, tau_from_spw,
    tau_from_u,
};
use eigentomo::recovery::{recover, BoundaryMode, RecoveryMode, RecoveryProblem};
use eigentomo::trig::Axis;
use eigentomo::{FitResult, Grid3, PolyEigenstrain, PoorlyParamSPW, PoorlyParamU, SymTensorField3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::{
    BoundaryArg, Command, ExportArgs, FitArgs, Format, Global, ModeArg, Pattern, PoorlyArgs, RecoverArgs, ReduceArgs,
    SourceArgs,
};
use crate::failure::Failure;
use crate::source::{constants, read_json, resolve, FieldSource};

pub struct Outcome {
    pub passed: bool,
    pub result: Value,
}

pub fn run(command: &Command, g: &Global) -> Result<Outcome, Failure> {
    match command {
        Command::Nullbasis => nullbasis(g),
        Command::Verify(src) => verify(src, g),
        Command::Fit(args) => fit_image(args, g),
        Command::Reduce(args) => reduce(args, g),
        Command::Recover(args) => recover_cmd(args, g),
        Command::Poorly(args) => poorly(args, g),
        Command::Export(args) => export(args, g),
    }
}

fn grid(g: &Global) -> Result<Grid3, Failure> {
    Ok(Grid3::new(g.m)?)
}

fn tolerances(g: &Global) -> Tolerances {
    Tolerances {
        eps22: g.tol.eps22,
        eps33: g.tol.eps33,
        traction: g.tol.traction,
        div_analytic: g.tol.div,
        div_fd: g.tol.div_fd,
    }
}

fn component_slot(name: &str) -> Result<usize, Failure> {
    COMPONENT_NAMES
        .iter()
        .position(|c| *c == name)
        .ok_or_else(|| Failure::BadInput(format!("unknown component {name:?}; expected one of {COMPONENT_NAMES:?}")))
}

/// `--format`, else the extension of `--out`.
fn out_format(g: &Global) -> Option<Format> {
    g.format.or_else(|| {
        let ext = g.out.as_ref()?.extension()?.to_str()?.to_ascii_lowercase();
        Format::from_str(&ext, true).ok()
    })
}

/// Opens `--out` for writing in the chosen (or default) format.
fn output(g: &Global, default: Format, allowed: &[Format]) -> Result<Option<(Format, BufWriter<File>)>, Failure> {
    let Some(path) = &g.out else {
        return Ok(None);
    };
    let format = out_format(g).unwrap_or(default);
    if !allowed.contains(&format) {
        return Err(Failure::BadInput(format!("format {format:?} is not available here; use one of {allowed:?}")));
    }
    let f = File::create(path).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?;
    Ok(Some((format, BufWriter::new(f))))
}

fn finish(mut w: BufWriter<File>) -> Result<(), Failure> {
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BasisFile<'a> {
    #[serde(rename = "N")]
    n: usize,
    nu: f64,
    tol: f64,
    dim: usize,
    singular_values: &'a [f64],
    columns: &'a [Vec<f64>],
}

fn max_residual(sys: &ConstraintSystem, nb: &NullBasis) -> f64 {
    nb.columns.iter().flat_map(|b| sys.apply(b)).fold(0.0, |a, v| a.max(v.abs()))
}

fn orthonormality_error(nb: &NullBasis) -> f64 {
    let mut worst = 0.0f64;
    for (p, a) in nb.columns.iter().enumerate() {
        for (q, b) in nb.columns.iter().enumerate().skip(p) {
            let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            worst = worst.max((d - if p == q { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

fn nullbasis(g: &Global) -> Result<Outcome, Failure> {
    let c = constants(g)?;
    let sys = assemble_constraints(g.n, &c)?;
    let nb = null_basis(&sys, g.tol.null)?;
    let expected = (g.n - 1).pow(3);
    let rank = sys.ncols() - nb.dim();
    let sv = &nb.singular_values;
    let residual = max_residual(&sys, &nb);
    let checks = vec![
        Check { name: "dim".into(), value: nb.dim() as f64, tol: Some(expected as f64), pass: nb.dim() == expected },
        Check { name: "max_residual".into(), value: residual, tol: Some(g.tol.null), pass: residual <= g.tol.null },
    ];
    if let Some((format, mut w)) = output(g, Format::Json, &[Format::Json, Format::Csv])? {
        match format {
            Format::Csv => nb.write_csv(&mut w)?,
            _ => {
                let file = BasisFile {
                    n: nb.n,
                    nu: c.nu,
                    tol: nb.tol,
                    dim: nb.dim(),
                    singular_values: sv,
                    columns: &nb.columns,
                };
                serde_json::to_writer(&mut w, &file).map_err(|e| Failure::BadInput(e.to_string()))?;
            }
        }
        finish(w)?;
    }
    let passed = checks.iter().all(|c| c.pass);
    Ok(Outcome {
        passed,
        result: json!({
            "N": g.n,
            "rows": sys.nrows(),
            "cols": sys.ncols(),
            "rank": rank,
            "dim": nb.dim(),
            "expected_dim": expected,
            "sigma_max": sv.first().copied().unwrap_or(0.0),
            "smallest_kept_sigma": if rank > 0 { Some(sv[rank - 1]) } else { None },
            "largest_dropped_sigma": sv.get(rank).copied(),
            "max_residual": residual,
            "orthonormality_error": orthonormality_error(&nb),
            "checks": checks,
        }),
    })
}

fn verify(src: &SourceArgs, g: &Global) -> Result<Outcome, Failure> {
    let source = resolve(src, g)?;
    let d = match &source {
        FieldSource::Series { potential, constants, .. } => diagnose_potential(potential, grid(g)?, constants)?,
        FieldSource::Sampled { field, .. } => diagnose_field(field, &constants(g)?)?,
    };
    let checks = d.checks(&tolerances(g));
    Ok(Outcome {
        passed: checks.iter().all(|c| c.pass),
        result: json!({ "source": source.label(), "diagnostics": d, "checks": checks }),
    })
}

fn fit_target(args: &FitArgs) -> Result<BinaryTarget, Failure> {
    if let Some(path) = &args.image {
        let bytes = std::fs::read(path).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?;
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        return Ok(if is_csv { BinaryTarget::read_csv(&bytes[..])? } else { BinaryTarget::read_pgm(&bytes[..])? });
    }
    let s = args.pattern_size;
    Ok(match args.pattern {
        Pattern::Checkerboard => BinaryTarget::checkerboard(s, s, args.cell)?,
        Pattern::Disk => BinaryTarget::disk(s, s, args.radius)?,
    })
}

fn fit_image(args: &FitArgs, g: &Global) -> Result<Outcome, Failure> {
    let c = constants(g)?;
    let target = fit_target(args)?;
    let slice = SliceSpec {
        width: args.slice_res,
        height: args.slice_res,
        x3: g.slice_x3,
        component: component_slot(&args.component)?,
    };
    slice.validate()?;
    let ns = if args.sweep.is_empty() { vec![g.n] } else { args.sweep.clone() };
    let tol = tolerances(g);
    let grid = grid(g)?;
    let mut runs = Vec::new();
    let mut fits: Vec<FitResult> = Vec::new();
    let mut passed = true;
    for &n in &ns {
        let nb = null_basis(&assemble_constraints(n, &c)?, g.tol.null)?;
        let design = slice_design_matrix(&nb, n, &c, &slice)?;
        let f = fit(&target, &design)?;
        let combined = coeffs_from_generator(&nb.combine(&f.coefficients)?, &c)?;
        let d = diagnose_potential(&combined, grid, &c)?;
        let checks = d.checks(&tol);
        let ok = checks.iter().all(|c| c.pass);
        passed &= ok;
        runs.push(json!({
            "N": n,
            "columns": design.ncols(),
            "rms_residual": f.rms_residual,
            "coefficient_norm": f.coefficients.iter().map(|v| v * v).sum::<f64>().sqrt(),
            "diagnostics": d,
            "checks": checks,
            "pass": ok,
        }));
        fits.push(f);
    }
    let rms: Vec<f64> = fits.iter().map(|f| f.rms_residual).collect();
    let strictly_decreasing = rms.windows(2).all(|w| w[1] < w[0]);
    if rms.len() > 1 {
        passed &= strictly_decreasing;
    }
    if let Some((format, mut w)) = output(g, Format::Csv, &[Format::Csv, Format::Pgm, Format::Json])? {
        let last = fits.last().expect("at least one fit");
        match format {
            Format::Csv => last.slice.write_csv(&mut w)?,
            Format::Pgm => last.slice.write_sign_pgm(&mut w)?,
            _ => serde_json::to_writer(&mut w, &fits).map_err(|e| Failure::BadInput(e.to_string()))?,
        }
        finish(w)?;
    }
    Ok(Outcome {
        passed,
        result: json!({
            "target": { "width": target.width, "height": target.height },
            "slice": slice,
            "runs": runs,
            "rms_residuals": rms,
            "strictly_decreasing": strictly_decreasing,
        }),
    })
}

fn reduce(args: &ReduceArgs, g: &Global) -> Result<Outcome, Failure> {
    let eps = if let Some(path) = &args.source.input {
        read_json::<PolyEigenstrain>(path)?
    } else if let Some(d) = args.source.random_degree {
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
        PolyEigenstrain::random(&mut rng, d, args.density)
    } else {
        PolyEigenstrain::anisotropic_example()
    };
    let r = diagonalize(&eps)?;
    let holds = check_reduction(&eps, &r);
    let cert = isotropic_certificate(&eps, args.degree_bound)?;
    if let Some((_, mut w)) = output(g, Format::Json, &[Format::Json])? {
        serde_json::to_writer(&mut w, &r).map_err(|e| Failure::BadInput(e.to_string()))?;
        finish(w)?;
    }
    Ok(Outcome {
        passed: holds,
        result: json!({
            "eigenstrain": eps,
            "u": r.u,
            "e": r.e,
            "identity_holds": holds,
            "certificate": cert,
        }),
    })
}

fn recover_cmd(args: &RecoverArgs, g: &Global) -> Result<Outcome, Failure> {
    let source = resolve(&args.source, g)?;
    let mode = match args.mode {
        ModeArg::DiagonalFromShear => RecoveryMode::DiagonalFromShear,
        ModeArg::ShearFromDiagonal => RecoveryMode::ShearFromDiagonal,
    };
    let (mut problem, oracle) = match &source {
        FieldSource::Series { potential, .. } => {
            let grid = grid(g)?;
            let p = RecoveryProblem::from_potential(potential, grid, mode);
            (p, Some(potential.stress_series().eval(grid)))
        }
        FieldSource::Sampled { field, .. } => {
            let slots = match mode {
                RecoveryMode::DiagonalFromShear => 0..3,
                RecoveryMode::ShearFromDiagonal => 3..6,
            };
            // the file is its own reference when it carries the recovered components
            let has_truth = slots.into_iter().any(|s| field.max_abs(s) > 0.0);
            (RecoveryProblem::from_field(field, mode), has_truth.then(|| field.clone()))
        }
    };
    if args.sampled_only {
        problem = problem.sampled_only();
    }
    let boundary = match args.boundary {
        BoundaryArg::Dirichlet => BoundaryMode::Dirichlet,
        BoundaryArg::Traction => BoundaryMode::Traction,
        BoundaryArg::Auto => {
            if (0..3).all(|s| problem.known.max_abs(s) == 0.0) {
                BoundaryMode::Dirichlet
            } else {
                BoundaryMode::Traction
            }
        }
    };
    problem = problem.with_boundary(boundary);
    let (field, report) = recover(&problem, oracle.as_ref())?;
    write_field(g, &field, &format!("recovered stress ({})", source.label()))?;
    Ok(Outcome { passed: report.consistent, result: json!({ "source": source.label(), "report": report }) })
}

fn write_field(g: &Global, field: &SymTensorField3, title: &str) -> Result<(), Failure> {
    if let Some((format, mut w)) = output(g, Format::Csv, &[Format::Csv, Format::Vtk])? {
        match format {
            Format::Vtk => write_field_vtk(field, title, &mut w)?,
            _ => write_field_csv(field, &mut w)?,
        }
        finish(w)?;
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PoorlyParams {
    U(PoorlyParamU),
    Spw(PoorlyParamSPW),
}

fn shear_field(p: &PoorlyParams) -> Result<PolyVector, Failure> {
    Ok(match p {
        PoorlyParams::U(u) => tau_from_u(u),
        PoorlyParams::Spw(s) => tau_from_spw(s)?,
    })
}

fn poorly(args: &PoorlyArgs, g: &Global) -> Result<Outcome, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let params = match &args.params {
        Some(path) => read_json::<PoorlyParams>(path)?,
        None => PoorlyParams::U(PoorlyParamU::random(&mut rng, args.random_degree.unwrap_or(3), args.density)),
    };
    let tau = shear_field(&params)?;
    let equilibrium = shear_equilibrium_residual(&tau);
    let mixed = mixed_second_derivatives(&tau);
    let (poorly_ok, _) = is_poorly(&tau);
    let mut checks = vec![
        json!({ "name": "shear_equilibrium", "pass": equilibrium.iter().all(|p| p.is_zero()) }),
        json!({ "name": "mixed_derivatives", "pass": mixed.iter().all(|p| p.is_zero()) }),
        json!({ "name": "is_poorly", "pass": poorly_ok }),
    ];
    let mut spw = None;
    if let PoorlyParams::U(u) = &params {
        let converted = convert_u_to_spw(u)?;
        checks.push(json!({ "name": "spw_matches_u", "pass": tau_from_spw(&converted)? == tau }));
        spw = Some(converted);
    }
    let other = match (&args.bracket_with, args.bracket_random) {
        (Some(path), _) => Some(shear_field(&read_json::<PoorlyParams>(path)?)?),
        (None, true) => {
            Some(tau_from_u(&PoorlyParamU::random(&mut rng, args.random_degree.unwrap_or(3), args.density)))
        }
        (None, false) => None,
    };
    // closure under brackets is reported, not required
    let bracket = match other {
        Some(y) => {
            let z = lie_bracket(&tau, &y)?;
            let (closed, residual) = is_poorly(&z);
            Some(json!({ "other": y, "bracket": z, "is_poorly": closed, "residual": residual }))
        }
        None => None,
    };
    if let Some((_, mut w)) = output(g, Format::Json, &[Format::Json])? {
        serde_json::to_writer(&mut w, &json!({ "tau": tau, "spw": spw }))
            .map_err(|e| Failure::BadInput(e.to_string()))?;
        finish(w)?;
    }
    let passed = checks.iter().all(|c| c["pass"] == Value::Bool(true));
    Ok(Outcome { passed, result: json!({ "tau": tau, "spw": spw, "checks": checks, "bracket": bracket }) })
}

fn export(args: &ExportArgs, g: &Global) -> Result<Outcome, Failure> {
    let Some(path) = &g.out else {
        return Err(Failure::BadInput("export needs --out".into()));
    };
    let source = resolve(&args.source, g)?;
    let format = out_format(g).unwrap_or(Format::Csv);
    let (_, mut w) =
        output(g, Format::Csv, &[Format::Csv, Format::Vtk, Format::Json, Format::Pgm])?.expect("--out is set");
    let mut summary = json!({ "source": source.label(), "format": format, "out": path });
    match (&source, format) {
        (_, Format::Csv | Format::Vtk) => {
            let field = match &source {
                FieldSource::Series { potential, .. } => potential.stress_series().eval(grid(g)?),
                FieldSource::Sampled { field, .. } => field.clone(),
            };
            if format == Format::Csv {
                write_field_csv(&field, &mut w)?;
            } else {
                write_field_vtk(&field, source.label(), &mut w)?;
            }
            summary["m"] = json!(field.grid.m());
            summary["max_abs"] = json!(field.max_abs_all());
        }
        (FieldSource::Series { potential, .. }, Format::Json) => {
            serde_json::to_writer(&mut w, potential).map_err(|e| Failure::BadInput(e.to_string()))?;
        }
        (FieldSource::Series { .. }, Format::Pgm) => {
            let slot = component_slot(&args.component)?;
            let series = source.series().expect("series source");
            let x3 = [g.slice_x3];
            let res = args.slice_res;
            if res < 2 {
                return Err(Failure::BadInput("slice needs at least 2 nodes per side".into()));
            }
            let values = series.comps[slot].eval_on([Axis::Closed(res), Axis::Closed(res), Axis::Points(&x3)]);
            let lattice = SliceLattice { width: res, height: res, x3: g.slice_x3, component: slot, values };
            lattice.write_sign_pgm(&mut w)?;
            summary["slice_max_abs"] = json!(lattice.values.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        }
        (FieldSource::Sampled { .. }, _) => {
            return Err(Failure::BadInput("JSON and PGM export need a series source, not a sampled field".into()));
        }
    }
    finish(w)?;
    Ok(Outcome { passed: true, result: summary })
}
