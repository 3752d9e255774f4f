use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use retrowpt_core::dynamics::{
    classify_stability, db_to_amplitude, db_to_loss, gain_sweep, marginal_gain_db, simulate,
};
use retrowpt_core::eigenbeam::beam_modes;
use retrowpt_core::experiment::{
    check_case, fit_regression, fixed_slope_fit, load_table2, parse_cases, regression_points,
    ExperimentCase,
};
use retrowpt_core::export::{
    regression_json, write_regression_plot_csv, write_sweep_csv, write_trace_csv,
};
use retrowpt_core::synth::{
    embed_singular_values, gaussian_vector, random_lossless_reciprocal, rng,
};
use retrowpt_core::touchstone::{
    parse_touchstone, to_scattering_matrix, write_touchstone, TouchstoneDocument,
};
use retrowpt_core::{CMatrix, LoopConfig, LoopState, PortPartition, Saturation, SweepConfig, C64};

use crate::args::{
    AnalyzeArgs, ChannelArgs, Cli, Command, InitArg, ModesArgs, RegressArgs, SimulateArgs,
    SweepArgs, SynthArgs, Table2Args,
};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Modes(a) => modes(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Synth(a) => synth(a),
        Command::Regress(a) => regress(a),
        Command::Table2(a) => table2(a),
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Port count from a `.sNp` extension.
fn ports_from_name(path: &Path) -> Option<usize> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    ext.strip_prefix('s')?.strip_suffix('p')?.parse().ok()
}

pub fn load_channel(args: &ChannelArgs) -> Result<CMatrix> {
    if let Some(sigmas) = &args.sigmas {
        let (s, p) = embed_singular_values(&sigmas.0, args.mix_seed)?;
        return Ok(s.transmission(&p)?);
    }
    let Some(path) = &args.file else {
        bail!("a Touchstone file or --sigmas is required");
    };
    let (Some(rx), Some(tx)) = (&args.rx, &args.tx) else {
        bail!("--rx and --tx are required with a Touchstone file");
    };
    let n = args
        .ports
        .or_else(|| ports_from_name(path))
        .ok_or_else(|| {
            anyhow!(
                "cannot infer the port count of {}; pass --ports",
                path.display()
            )
        })?;
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let doc = parse_touchstone(&text, n).with_context(|| format!("in {}", path.display()))?;
    let s = match args.freq_ghz {
        Some(f) => to_scattering_matrix(&doc, f * 1e9, args.freq_tol_mhz * 1e6)?,
        None => {
            let freqs = doc.frequencies_hz();
            match freqs[..] {
                [f] => to_scattering_matrix(&doc, f, 0.0)?,
                [] => bail!("{} holds no frequency points", path.display()),
                _ => bail!(
                    "{} holds {} frequency points; pick one with --freq-ghz",
                    path.display(),
                    freqs.len()
                ),
            }
        }
    };
    let partition = PortPartition::with_remaining_absorbing(rx.0.clone(), tx.0.clone(), n, n / 2)?;
    Ok(s.transmission(&partition)?)
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let s21 = load_channel(&args.channel)?;
    let modes = beam_modes(&s21)?;
    let xi_max = modes.xi_max();
    let marginal = if xi_max > 0.0 {
        Some(marginal_gain_db(&s21, args.loss_db)?)
    } else {
        None
    };
    let a_max: Vec<[f64; 2]> = modes.a_max().iter().map(|z| [z.re, z.im]).collect();
    let report = json!({
        "xi_list": modes.eigenvalues,
        "xi_max": xi_max,
        "a_max": a_max,
        "eta_max_pct": 100.0 * xi_max,
        "loss_db": args.loss_db,
        "marginal_gain_db": marginal,
    });
    write_json(args.out.as_deref(), &report)
}

fn modes(args: ModesArgs) -> Result<()> {
    let s21 = load_channel(&args.channel)?;
    let modes = beam_modes(&s21)?;
    let mut w = sink(args.out.as_deref())?;
    let mut header = vec!["mode".to_string(), "xi".into(), "eta_pct".into()];
    for j in 1..=modes.tx_dim() {
        header.push(format!("a{j}_re"));
        header.push(format!("a{j}_im"));
    }
    writeln!(w, "{}", header.join(","))?;
    for (i, (xi, a)) in modes.eigenvalues.iter().zip(&modes.tx_modes).enumerate() {
        let mut row = vec![
            (i + 1).to_string(),
            xi.to_string(),
            (100.0 * xi).to_string(),
        ];
        for z in a.iter() {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn saturation(amplitude: Option<f64>) -> Result<Option<Saturation>> {
    Ok(amplitude.map(Saturation::new).transpose()?)
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let s21 = load_channel(&args.channel)?;
    let gain_db = match args.gain_db {
        Some(g) => g,
        None => marginal_gain_db(&s21, args.loss_db)?,
    };
    let loss = C64::new(db_to_loss(args.loss_db), 0.0);
    let config = LoopConfig::new(s21, loss, C64::new(db_to_amplitude(gain_db), 0.0))?
        .with_noise_power(args.noise_power)?
        .with_saturation(saturation(args.sat)?)
        .with_convention(args.convention.into());
    let initial = match args.init {
        InitArg::Zero => LoopState::zeros(&config),
        InitArg::Random => {
            let mut r = rng(args.seed);
            let v1 = gaussian_vector(&mut r, config.rx_dim(), 1.0);
            let v2 = gaussian_vector(&mut r, config.tx_dim(), 1.0);
            LoopState::new(v1, v2)
        }
    };
    let trace = simulate(&config, &initial, args.steps, args.seed.wrapping_add(1))?;
    let mut w = sink(args.out.as_deref())?;
    write_trace_csv(&mut w, &trace.records)?;
    w.flush()?;
    let (label, rho) = classify_stability(&config);
    eprintln!(
        "gain_db={gain_db:.6} rho={rho:.9} stability={label} overflow={}",
        trace.overflow
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary {
    transition_gain_db: Option<f64>,
    predicted_gain_db: Option<f64>,
    points: usize,
}

fn sweep(args: SweepArgs) -> Result<()> {
    let s21 = load_channel(&args.channel)?;
    let predicted_gain_db = marginal_gain_db(&s21, args.loss_db).ok();
    let config = SweepConfig {
        s21,
        loss: C64::new(db_to_loss(args.loss_db), 0.0),
        gains_db: args.gains.0,
        noise_power: args.noise_power,
        saturation: if args.no_sat {
            None
        } else {
            saturation(Some(args.sat))?
        },
        seed: args.seed,
        steps_per_point: args.steps,
        discard: args.discard,
        measurement_floor: args.floor,
        convention: args.convention.into(),
    };
    let result = gain_sweep(&config)?;
    let mut w = sink(args.out.as_deref())?;
    write_sweep_csv(&mut w, &result)?;
    w.flush()?;
    drop(w);
    let summary = SweepSummary {
        transition_gain_db: result.transition_gain_db,
        predicted_gain_db,
        points: result.points.len(),
    };
    let text = serde_json::to_string(&summary)?;
    if args.out.is_some() {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let (s, comment) = match (&args.sigmas, args.ports) {
        (Some(sigmas), _) => {
            let (s, p) = embed_singular_values(&sigmas.0, args.seed)?;
            let note = format!(
                " singular values {:?} embedded with seed {}; rx ports {:?}, tx ports {:?}",
                sigmas.0, args.seed, p.rx_active, p.tx_active
            );
            (s, note)
        }
        (None, Some(n)) => (
            random_lossless_reciprocal(n, args.seed)?,
            format!(" random lossless reciprocal {n}-port, seed {}", args.seed),
        ),
        (None, None) => bail!("--ports or --sigmas is required"),
    };
    let mut doc = TouchstoneDocument::from_scattering(&s, args.format.into());
    doc.comments.push(comment);
    let mut w = sink(args.out.as_deref())?;
    w.write_all(write_touchstone(&doc).as_bytes())?;
    w.flush()?;
    Ok(())
}

fn cases_from(table2: bool, path: Option<&PathBuf>) -> Result<Vec<ExperimentCase>> {
    match (table2, path) {
        (true, _) => Ok(load_table2()?),
        (false, Some(p)) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            parse_cases(&text).with_context(|| format!("in {}", p.display()))
        }
        (false, None) => bail!("--table2 or --cases is required"),
    }
}

fn regress(args: RegressArgs) -> Result<()> {
    let cases = cases_from(args.table2, args.cases.as_ref())?;
    let points = regression_points(&cases);
    let free = fit_regression(&points)?;
    let fixed = fixed_slope_fit(&points)?;
    if let Some(path) = &args.plot {
        let mut w = sink(Some(path))?;
        write_regression_plot_csv(&mut w, &points, &free, &fixed)?;
        w.flush()?;
    }
    let report = json!({
        "free": regression_json(&free)?,
        "fixed": regression_json(&fixed)?,
    });
    write_json(args.out.as_deref(), &report)
}

fn ports(list: &[usize]) -> String {
    list.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn table2(args: Table2Args) -> Result<()> {
    let cases = load_table2()?;
    let mut w = sink(args.out.as_deref())?;
    writeln!(
        w,
        "case,rx_ports,tx_ports,eta_theo_pct,eta_meas_pct,error_pct,error_pct_calc,\
         gain_setting_db,gain_corr_db,gain_corr_calc,est_loss_db,est_loss_calc,ok"
    )?;
    let mut mismatches = Vec::new();
    for case in &cases {
        let check = check_case(case)?;
        if !check.within_tolerance {
            mismatches.push(case.case_id);
        }
        writeln!(
            w,
            "{},{},{},{:.2},{:.2},{:.2},{:.4},{},{:.2},{:.4},{:.2},{:.4},{}",
            case.case_id,
            ports(&case.rx_ports),
            ports(&case.tx_ports),
            case.eta_theo * 100.0,
            case.eta_meas * 100.0,
            case.error_pct,
            check.error_pct,
            case.gain_setting_db,
            case.gain_corr_db,
            check.gain_corr_db,
            case.est_loss_db,
            check.est_loss_db,
            check.within_tolerance
        )?;
    }
    w.flush()?;
    eprintln!(
        "mismatches: {} of {} {:?}",
        mismatches.len(),
        cases.len(),
        mismatches
    );
    Ok(())
}
