use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use tnp_core::classifiers::{
    fit_tlda, fit_tlda_np, fit_tnn, fit_tnn_np, fit_vlda, stratified_split, NnArch, NnSettings,
    OptimizerSettings,
};
use tnp_core::experiments::{
    class0_split, generate_instance, run_experiment, Distribution, ExperimentConfig,
    ExperimentOutput,
};
use tnp_core::io::{
    format_real, read_dataset, read_model, render_aggregate, render_detail, verify_aggregates,
    write_dataset, write_model, TensorDataset,
};
use tnp_core::tgmm::{oracle_rule, oracle_type2, TgmmSampler};
use tnp_core::{
    DenseTensor, Error, LabeledSample, Method, NpClassifier, NpLevels, RandomSource, Shape,
};

use crate::config::{example, parse_run_config, parse_scale, validate_all};
use crate::failure::Failure;
use crate::{EvaluateArgs, FitArgs, GenArgs, PredictArgs, SimulateArgs, VerifyArgs};

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(path.display(), e))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::runtime(path.display(), e))
}

fn load_dataset(path: &Path) -> Result<TensorDataset, Failure> {
    read_dataset(path).map_err(|e| match e {
        Error::Io(_) => Failure::input(path.display(), e),
        e => Failure::input(path.display(), Failure::from(e)),
    })
}

fn load_model(path: &Path) -> Result<NpClassifier, Failure> {
    read_model(path).map_err(|e| Failure::input(path.display(), e))
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let mut configs = match (&args.example, &args.config) {
        (Some(name), _) => {
            let scale = parse_scale(args.scale.as_deref().unwrap_or("full"))?;
            example(name, scale, args.seed)?
        }
        (None, Some(path)) => {
            let mut configs = parse_run_config(&read_text(path)?)?;
            if let Some(scale) = &args.scale {
                let scale = parse_scale(scale)?;
                for c in &mut configs {
                    c.reps = scale.reps();
                    c.n_test = scale.n_test();
                }
            }
            if let Some(seed) = args.seed {
                for c in &mut configs {
                    c.seed = seed;
                }
            }
            configs
        }
        (None, None) => unreachable!("clap requires a config or an example"),
    };
    validate_all(&configs)?;
    if args.workers == Some(0) {
        return Err(Failure::Input("--workers must be positive".into()));
    }
    configs.iter_mut().for_each(|c| c.methods.dedup());
    fs::create_dir_all(&args.output).map_err(|e| Failure::runtime(args.output.display(), e))?;

    let mut outputs = Vec::with_capacity(configs.len());
    for config in &configs {
        let out = run_experiment(config, args.workers)
            .map_err(|e| Failure::Runtime(format!("config '{}': {e}", config.id)))?;
        println!("{}", summary_line(&out));
        outputs.push(out);
    }
    write_text(&args.output.join("detail.csv"), &render_detail(&outputs))?;
    write_text(
        &args.output.join("aggregate.csv"),
        &render_aggregate(&outputs),
    )?;
    Ok(())
}

fn summary_line(out: &ExperimentOutput) -> String {
    let mut line = format!("{} ({} reps):", out.config.id, out.repetitions.len());
    for (i, a) in out.aggregate.iter().enumerate() {
        let sep = if i == 0 { " " } else { "; " };
        let _ = write!(
            line,
            "{sep}{} type1={} type2={} acc={} viol={}",
            a.method,
            format_real(a.mean_type1),
            format_real(a.mean_type2),
            format_real(a.mean_acc),
            format_real(a.violation_rate)
        );
    }
    line
}

fn truth_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".truth.json");
    PathBuf::from(name)
}

fn draw(
    sampler: &TgmmSampler<'_>,
    dist: Distribution,
    label: u8,
    rng: &mut RandomSource,
) -> DenseTensor {
    match dist {
        Distribution::Normal => sampler.sample(label, rng),
        Distribution::T(dof) => sampler.sample_t(label, dof, rng),
    }
}

/// Class 0 first, then class 1, keeping the draw order within each class.
fn by_label(mut samples: Vec<LabeledSample>) -> Vec<LabeledSample> {
    samples.sort_by_key(|s| s.label);
    samples
}

pub fn gen(args: &GenArgs) -> Result<(), Failure> {
    let mut configs = parse_run_config(&read_text(&args.config)?)?;
    if configs.len() != 1 {
        return Err(Failure::Input(format!(
            "gen needs a single experiment, the config describes {}",
            configs.len()
        )));
    }
    let mut config: ExperimentConfig = configs.remove(0);
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    validate_all(std::slice::from_ref(&config))?;

    // same streams as repetition 0 of `simulate`
    let rep_rng = RandomSource::new(config.seed).split(0);
    let inst = generate_instance(&config, &mut rep_rng.split(0))?;
    let shape = inst.params.shape().clone();
    let train = TensorDataset::new(shape.clone(), by_label(inst.full_train()))?;
    write_dataset(&args.output, &train).map_err(|e| Failure::runtime(args.output.display(), e))?;

    if let Some(path) = &args.test_output {
        let sampler = TgmmSampler::new(&inst.params)?;
        let (n0, n1) = config.test_sizes();
        let mut rng = rep_rng.split(1);
        let samples = (0..n0 + n1)
            .map(|i| {
                let y = u8::from(i >= n0);
                LabeledSample::new(draw(&sampler, config.distribution, y, &mut rng), y)
            })
            .collect();
        let test = TensorDataset::new(shape.clone(), samples)?;
        write_dataset(path, &test).map_err(|e| Failure::runtime(path.display(), e))?;
    }

    let rule = oracle_rule(&inst.params, config.alpha)?;
    let (n0, n1) = config.train_sizes();
    let truth = json!({
        "shape": shape.dims(),
        "distribution": config.distribution.to_string(),
        "seed": config.seed,
        "n0": n0,
        "n1": n1,
        "alpha": config.alpha,
        "signal_norm": inst.params.mean_difference().frobenius_norm(),
        "mahalanobis": rule.snr,
        "oracle_threshold": rule.threshold,
        "oracle_type2": oracle_type2(&rule, &inst.params)?,
        "mean1": inst.params.mean1.data(),
    });
    let text = serde_json::to_string_pretty(&truth).expect("plain JSON values serialize") + "\n";
    write_text(&truth_path(&args.output), &text)
}

fn check_ranks(shape: &Shape, ranks: &[usize]) -> Result<(), Failure> {
    if ranks.len() != shape.order() {
        return Err(Failure::Input(format!(
            "--ranks has {} entries but the data has order {}",
            ranks.len(),
            shape.order()
        )));
    }
    for (mode, (&rank, &d)) in ranks.iter().zip(shape.dims()).enumerate() {
        if rank == 0 || rank > d {
            return Err(Error::InvalidRank { mode, rank, max: d }.into());
        }
    }
    Ok(())
}

/// Splits the class-0 samples with a seeded shuffle: the first part joins
/// class 1 for fitting, the second is kept for calibration.
fn split_class0(
    samples: &[LabeledSample],
    rng: &mut RandomSource,
) -> (Vec<LabeledSample>, Vec<DenseTensor>) {
    let mut idx0: Vec<usize> = (0..samples.len())
        .filter(|&i| samples[i].label == 0)
        .collect();
    rng.shuffle(&mut idx0);
    let (n_fit, _) = class0_split(idx0.len());
    let mut train: Vec<LabeledSample> = idx0[..n_fit].iter().map(|&i| samples[i].clone()).collect();
    let calib = idx0[n_fit..]
        .iter()
        .map(|&i| samples[i].tensor.clone())
        .collect();
    train.extend(samples.iter().filter(|s| s.label == 1).cloned());
    (train, calib)
}

pub fn fit(args: &FitArgs) -> Result<(), Failure> {
    let method: Method = args.method.parse()?;
    let data = load_dataset(&args.data)?;
    for label in [0u8, 1] {
        if data.class_count(label) == 0 {
            return Err(Failure::Input(format!(
                "{}: training data has no class-{label} samples; both classes are required",
                args.data.display()
            )));
        }
    }
    let levels = NpLevels::new(args.alpha, args.delta)?;
    let ranks = if matches!(method, Method::TLda | Method::TLdaNp) {
        let ranks = args
            .ranks
            .as_deref()
            .ok_or_else(|| Failure::Input(format!("--ranks is required for {method}")))?;
        check_ranks(&data.shape, ranks)?;
        ranks.to_vec()
    } else {
        Vec::new()
    };
    let nn = NnSettings {
        arch: NnArch {
            tcl_ranks: args.tcl_ranks.clone(),
            tcl_layers: args.tcl_layers,
            hidden: args.hidden,
        },
        optimizer: OptimizerSettings {
            learning_rate: args.rate,
            batch_size: args.batch,
            ..OptimizerSettings::default()
        },
        epochs: args.epochs,
        ..NnSettings::default()
    };

    let rng = RandomSource::new(args.seed);
    let samples = &data.samples;
    let clf = match method {
        Method::TLda => fit_tlda(samples, &ranks, Default::default())?,
        Method::VLda => fit_vlda(samples, args.ridge)?,
        Method::TLdaNp => {
            let (train, calib) = split_class0(samples, &mut rng.split(0));
            fit_tlda_np(&train, &calib, &ranks, Default::default(), levels)?
        }
        Method::TNn => {
            let (train, val) =
                stratified_split(samples, nn.validation_fraction, &mut rng.split(1))?;
            fit_tnn(&train, &val, &nn, &mut rng.split(2))?
        }
        Method::TNnNp => {
            let (train, calib) = split_class0(samples, &mut rng.split(0));
            let (train, val) = stratified_split(&train, nn.validation_fraction, &mut rng.split(1))?;
            fit_tnn_np(&train, &calib, &val, &nn, levels, &mut rng.split(2))?
        }
    };
    write_model(&args.output, &clf).map_err(|e| Failure::runtime(args.output.display(), e))?;
    println!(
        "{method}: {} samples, threshold {}",
        samples.len(),
        clf.threshold
    );
    Ok(())
}

fn check_shapes(clf: &NpClassifier, data: &TensorDataset) -> Result<(), Failure> {
    let expected = clf.scorer.input_shape();
    if expected != &data.shape {
        return Err(Error::ShapeMismatch {
            expected: expected.dims().to_vec(),
            found: data.shape.dims().to_vec(),
        }
        .into());
    }
    Ok(())
}

pub fn predict(args: &PredictArgs) -> Result<(), Failure> {
    let clf = load_model(&args.model)?;
    let data = load_dataset(&args.data)?;
    check_shapes(&clf, &data)?;
    let mut out = String::from("index,score,label\n");
    for (i, s) in data.samples.iter().enumerate() {
        let score = clf.score(&s.tensor)?;
        // `{}` on f64 is the shortest round-trip form
        let _ = writeln!(out, "{i},{score},{}", clf.decide(score));
    }
    write_text(&args.output, &out)
}

pub fn evaluate(args: &EvaluateArgs) -> Result<(), Failure> {
    let clf = load_model(&args.model)?;
    let data = load_dataset(&args.data)?;
    check_shapes(&clf, &data)?;
    let rates = tnp_core::experiments::evaluate(&clf, &data.samples)?;
    println!("type1,type2,accuracy");
    println!("{},{},{}", rates.type1, rates.type2, rates.accuracy);
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let detail = read_text(&args.detail)?;
    let aggregate = read_text(&args.aggregate)?;
    verify_aggregates(&detail, &aggregate, args.alpha)
        .map_err(|e| Failure::runtime("aggregate does not match detail", e))?;
    println!("ok");
    Ok(())
}
