use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rbc_dekf::filters::{soc_from_state, state_from_soc, Estimator, FilterConfig, FilterKind, StepOutput};
use rbc_dekf::fixtures;
use rbc_dekf::harness::{
    compare, coulomb_count, filter_metrics, gen_profile, rmse, simulate_truth, BiasSpec, CompareOptions,
    DriveCycle, EvaluationInput, Execution, Integration,
};
use rbc_dekf::io::synthetic::benchmark;
use rbc_dekf::io::{
    is_synthetic, load_cell_params, load_cycle, load_cycle_with, load_filter_config, parse_synthetic,
    render_json, render_text, write_cycle, write_trace, write_truth, CycleLoadOptions, RunManifest,
    TraceColumns,
};
use rbc_dekf::model::CellParameters;

use crate::args::{Command, CompareArgs, FilterChoice, RunArgs, ValidateArgs};
use crate::error::{usage, CliError, CliResult};

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Simulate(a) => simulate(&a),
        Command::Estimate(a) => estimate(&a),
        Command::Compare(a) => compare_cmd(&a),
        Command::Gen(a) => gen(&a),
        Command::Validate(a) => validate(&a),
    }
}

fn load_cell(spec: &str) -> CliResult<CellParameters> {
    match spec.strip_prefix("builtin:") {
        Some("lfp") => Ok(fixtures::synthetic_lfp_cell()),
        Some("lfp-flat") => Ok(fixtures::synthetic_lfp_flat_cell()),
        Some(other) => Err(usage(format!("unknown built-in cell `{other}` (expected `lfp` or `lfp-flat`)"))),
        None => Ok(load_cell_params(spec)?),
    }
}

fn check_fraction(name: &str, v: Option<f64>) -> CliResult<()> {
    match v {
        Some(s) if !(0.0..=1.0).contains(&s) => Err(usage(format!("--{name} {s} is not in [0, 1]"))),
        _ => Ok(()),
    }
}

/// Cycle, measured voltage and (when known) reference SOC for the filters.
struct Evaluation {
    cycle: DriveCycle,
    v_meas: Vec<f64>,
    soc_true: Option<Vec<f64>>,
    default_initial_soc: f64,
}

impl Evaluation {
    fn as_input(&self) -> Option<EvaluationInput<'_>> {
        self.soc_true.as_deref().map(|soc_true| EvaluationInput {
            cycle: &self.cycle,
            v_meas: &self.v_meas,
            soc_true,
        })
    }
}

fn prepare(args: &RunArgs, params: &CellParameters) -> CliResult<Evaluation> {
    check_fraction("soc0", args.soc0)?;
    if is_synthetic(&args.input) {
        if args.resample.is_some() {
            return Err(usage("--resample applies to cycle files, not synthetic input"));
        }
        let mut input = parse_synthetic(&args.input)?;
        if let Some(s) = args.soc0 {
            input.soc0 = s;
        }
        let ds = input.generate(params, args.seed)?;
        info!("simulated {} samples from `{}`", ds.cycle.len(), args.input);
        return Ok(Evaluation {
            default_initial_soc: (input.soc0 + benchmark::INITIAL_SOC_ERROR).clamp(0.0, 1.0),
            cycle: ds.cycle,
            v_meas: ds.v_meas,
            soc_true: Some(ds.soc_true),
        });
    }
    let cycle = load_cycle(&args.input, args.resample)?;
    let v_meas = cycle.voltage().expect("voltage is required by load_cycle").to_vec();
    let soc_true = match (cycle.soc_ref(), args.soc0) {
        (Some(r), _) => Some(r.to_vec()),
        (None, Some(s0)) => Some(coulomb_count(&cycle, params.capacity_cell, s0, Integration::Rectangular)),
        (None, None) => None,
    };
    let default_initial_soc = match &soc_true {
        Some(s) => s[0].clamp(0.0, 1.0),
        None => {
            warn!("no reference SOC; filters start at 0.5 unless --initial-soc or the filter config says otherwise");
            0.5
        }
    };
    info!("loaded {} samples from {}", cycle.len(), args.input);
    Ok(Evaluation { cycle, v_meas, soc_true, default_initial_soc })
}

fn filter_config(args: &RunArgs, params: &CellParameters, default_soc: f64) -> CliResult<FilterConfig> {
    check_fraction("initial-soc", args.initial_soc)?;
    let mut cfg = match &args.filter_config {
        Some(path) => load_filter_config(path, params, default_soc)?,
        None => FilterConfig::for_cell(params, default_soc),
    };
    if let Some(s) = args.initial_soc {
        cfg.x0 = state_from_soc(s, params);
    }
    Ok(cfg)
}

/// Writes files into the output directory, refusing to overwrite any input.
struct OutDir {
    dir: PathBuf,
    inputs: Vec<PathBuf>,
    written: Vec<String>,
}

impl OutDir {
    fn create(args: &RunArgs) -> CliResult<Self> {
        fs::create_dir_all(&args.out).map_err(|source| CliError::Output { path: args.out.clone(), source })?;
        let mut inputs: Vec<PathBuf> = Vec::new();
        if !args.cell.starts_with("builtin:") {
            inputs.push(args.cell.clone().into());
        }
        inputs.extend(args.filter_config.iter().cloned());
        if !is_synthetic(&args.input) {
            inputs.push(args.input.clone().into());
        }
        let inputs = inputs.iter().filter_map(|p| fs::canonicalize(p).ok()).collect();
        Ok(Self { dir: args.out.clone(), inputs, written: Vec::new() })
    }

    fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<fs::File>) -> CliResult<()>,
    ) -> CliResult<()> {
        let path = self.dir.join(name);
        if let Ok(existing) = fs::canonicalize(&path) {
            if self.inputs.contains(&existing) {
                return Err(usage(format!("refusing to overwrite input file {}", path.display())));
            }
        }
        let out_err = |source| CliError::Output { path: path.clone(), source };
        let mut w = BufWriter::new(fs::File::create(&path).map_err(out_err)?);
        body(&mut w)?;
        w.flush().map_err(out_err)?;
        self.written.push(name.to_owned());
        Ok(())
    }

    fn write_text(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        self.write(name, |w| {
            w.write_all(text.as_bytes()).map_err(|source| CliError::Output { path, source })
        })
    }

    fn finish(mut self, mut manifest: RunManifest) -> CliResult<()> {
        self.written.push("manifest.json".into());
        manifest.outputs = self.written.clone();
        let json = manifest.to_json()?;
        self.write_text("manifest.json", &(json + "\n"))
    }
}

fn manifest(command: &str, args: &RunArgs) -> RunManifest {
    RunManifest {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        cell: args.cell.clone(),
        filter_config: args.filter_config.as_ref().map(|p| p.display().to_string()),
        input: args.input.clone(),
        out: args.out.display().to_string(),
        seed: args.seed,
        filter: args.filter.map(|f| f.name().to_owned()),
        resample: args.resample,
        soc0: args.soc0,
        initial_soc: None,
        exclude_convergence: None,
        outputs: Vec::new(),
    }
}

fn simulate(args: &RunArgs) -> CliResult<()> {
    let params = load_cell(&args.cell)?;
    check_fraction("soc0", args.soc0)?;
    let ds = if is_synthetic(&args.input) {
        if args.resample.is_some() {
            return Err(usage("--resample applies to cycle files, not synthetic input"));
        }
        let mut input = parse_synthetic(&args.input)?;
        if let Some(s) = args.soc0 {
            input.soc0 = s;
        }
        input.generate(&params, args.seed)?
    } else {
        let soc0 = args.soc0.ok_or_else(|| usage("simulating a cycle file needs --soc0"))?;
        let opts = CycleLoadOptions { resample: args.resample, voltage_optional: true };
        let cycle = load_cycle_with(&args.input, &opts)?;
        simulate_truth(&params, &cycle, soc0, &BiasSpec::None, 0.0, args.seed)?
    };
    let mut out = OutDir::create(args)?;
    out.write("dataset.csv", |w| Ok(write_cycle(w, &ds.cycle, Some(&ds.v_meas), Some(&ds.soc_true))?))?;
    out.write("truth.csv", |w| Ok(write_truth(w, &ds)?))?;
    println!(
        "simulated {} samples, SOC {:.4} -> {:.4}",
        ds.cycle.len(),
        ds.soc_true[0],
        ds.soc_true[ds.soc_true.len() - 1]
    );
    out.finish(manifest("simulate", args))
}

fn gen(args: &RunArgs) -> CliResult<()> {
    if !is_synthetic(&args.input) {
        return Err(usage("gen needs a `synthetic[:...]` input"));
    }
    let input = parse_synthetic(&args.input)?;
    let cycle = gen_profile(&input.profile, args.seed)?;
    let mut out = OutDir::create(args)?;
    out.write("profile.csv", |w| Ok(write_cycle(w, &cycle, None, None)?))?;
    println!("generated {} samples at dt = {} s", cycle.len(), cycle.dt());
    out.finish(manifest("gen", args))
}

fn kinds(choice: FilterChoice) -> Vec<FilterKind> {
    match choice {
        FilterChoice::Ekf => vec![FilterKind::Ekf],
        FilterChoice::RbcDekf => vec![FilterKind::RbcDekf],
        FilterChoice::Both => vec![FilterKind::Ekf, FilterKind::RbcDekf],
    }
}

fn label(kind: FilterKind) -> &'static str {
    match kind {
        FilterKind::Ekf => "ekf",
        FilterKind::RbcDekf => "rbc",
    }
}

fn estimate(args: &RunArgs) -> CliResult<()> {
    let params = load_cell(&args.cell)?;
    let ev = prepare(args, &params)?;
    let cfg = filter_config(args, &params, ev.default_initial_soc)?;
    let choice = args.filter.unwrap_or(FilterChoice::RbcDekf);
    let inputs = ev.cycle.step_inputs(&ev.v_meas);
    let mut traces: Vec<(FilterKind, Vec<StepOutput>)> = Vec::new();
    for kind in kinds(choice) {
        let mut est = Estimator::new(kind, params.clone(), cfg.clone())?;
        traces.push((kind, est.run(&inputs)?));
    }

    let mut out = OutDir::create(args)?;
    let single = traces.len() == 1;
    let columns: Vec<TraceColumns<'_>> = traces
        .iter()
        .map(|(k, t)| TraceColumns { label: (!single).then(|| label(*k)), steps: t })
        .collect();
    out.write("trace.csv", |w| Ok(write_trace(w, &ev.cycle, &ev.v_meas, ev.soc_true.as_deref(), &columns)?))?;
    for (kind, trace) in &traces {
        match ev.as_input() {
            Some(input) => {
                let m = filter_metrics(trace, input, 0)?;
                println!(
                    "{kind}: SOC RMSE {:.3}%, voltage RMSE {:.3} mV, final SOC {:.4}",
                    m.soc_rmse_pct,
                    m.v_rmse_mv,
                    trace[trace.len() - 1].soc_cell
                );
            }
            None => {
                let v_err: Vec<f64> = trace.iter().zip(&ev.v_meas).map(|(o, v)| o.v_model - v).collect();
                println!(
                    "{kind}: voltage RMSE {:.3} mV, final SOC {:.4}",
                    1e3 * rmse(&v_err)?,
                    trace[trace.len() - 1].soc_cell
                );
            }
        }
    }
    let mut m = manifest("estimate", args);
    m.filter = Some(choice.name().to_owned());
    m.initial_soc = Some(soc_from_state(&cfg.x0, &params).soc_cell);
    out.finish(m)
}

fn compare_cmd(args: &CompareArgs) -> CliResult<()> {
    let run_args = &args.run;
    if matches!(run_args.filter, Some(f) if f != FilterChoice::Both) {
        return Err(usage("compare always runs both filters; drop --filter or pass `both`"));
    }
    if let Some(f) = args.exclude_convergence {
        if !(0.0..1.0).contains(&f) {
            return Err(usage(format!("--exclude-convergence {f} is not in [0, 1)")));
        }
    }
    let params = load_cell(&run_args.cell)?;
    let ev = prepare(run_args, &params)?;
    let cfg = filter_config(run_args, &params, ev.default_initial_soc)?;
    let input = ev
        .as_input()
        .ok_or_else(|| usage("compare needs a reference SOC: add a soc_ref column or pass --soc0"))?;
    let opts = CompareOptions {
        exclude_convergence: args.exclude_convergence,
        execution: if args.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let result = compare(input, &params, &cfg, &opts)?;
    let report = &result.report;
    let title = format!("EKF vs RBC-DEKF on {}", run_args.input);
    let text = render_text(report, &title);

    let mut out = OutDir::create(run_args)?;
    if !report.failed() {
        let columns = [
            TraceColumns { label: Some("ekf"), steps: &result.ekf },
            TraceColumns { label: Some("rbc"), steps: &result.rbc },
        ];
        out.write("trace.csv", |w| Ok(write_trace(w, &ev.cycle, &ev.v_meas, Some(input.soc_true), &columns)?))?;
    }
    out.write_text("report.txt", &text)?;
    out.write_text("report.json", &(render_json(report)? + "\n"))?;
    print!("{text}");
    let mut m = manifest("compare", run_args);
    m.filter = Some(FilterChoice::Both.name().to_owned());
    m.initial_soc = Some(soc_from_state(&cfg.x0, &params).soc_cell);
    m.exclude_convergence = args.exclude_convergence;
    out.finish(m)?;
    match &report.failure {
        Some(f) => Err(CliError::FilterFailed(format!(
            "{} failed numerically at step {}: {}",
            f.filter, f.step, f.reason
        ))),
        None => Ok(()),
    }
}

fn validate(args: &ValidateArgs) -> CliResult<()> {
    if args.cell.is_none() && args.filter_config.is_none() && args.input.is_none() {
        return Err(usage("nothing to validate: pass --cell, --filter-config and/or --input"));
    }
    let cell_spec = args.cell.as_deref().unwrap_or("builtin:lfp");
    let params = load_cell(cell_spec)?;
    if args.cell.is_some() {
        println!("cell {cell_spec}: ok");
    }
    if let Some(path) = &args.filter_config {
        load_filter_config(path, &params, 0.5)?;
        println!("filter config {}: ok", path.display());
    }
    if let Some(input) = &args.input {
        let cycle = if is_synthetic(input) {
            gen_profile(&parse_synthetic(input)?.profile, 0)?
        } else {
            let opts = CycleLoadOptions { resample: args.resample, voltage_optional: true };
            load_cycle_with(Path::new(input), &opts)?
        };
        println!(
            "input {input}: ok ({} samples, dt = {} s{})",
            cycle.len(),
            cycle.dt(),
            if cycle.voltage().is_some() { "" } else { ", no voltage column" }
        );
    }
    Ok(())
}
