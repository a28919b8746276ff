use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use super::config::{DatasetSource, RunConfig};
use super::experiment::{evaluate_classifier, real_by_class, run_variant, Evaluation, Variant, VariantRun};
use super::{DataArgs, DistancesArgs, EvaluateArgs, GenerateArgs, Preset, SynthArgs, TrainArgs};
use crate::data::{write_feature_csv, PreparedData};
use crate::eval::distance_report;
use crate::gan::{generate_samples, GanConfig, GenerationTarget};
use crate::nn::{fmt_f64, Checkpoint, Mode, Network};
use crate::rng::{SeedStreams, EVAL};
use crate::synth::{gaussian_baseline_sampler, make_synthetic_dataset, ClassStats, SynthSpec};
use crate::{Error, Result};

pub const DATASET_FILE: &str = "dataset.csv";
pub const LOSS_FILE: &str = "loss_history.csv";
pub const RETRAIN_LOSS_FILE: &str = "retrain_history.csv";
pub const CLASSIFIER_FILE: &str = "classifier.json";
pub const GENERATOR_FILE: &str = "generator.json";
pub const DISCRIMINATOR_FILE: &str = "discriminator.json";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const DISTANCES_FILE: &str = "distances.csv";
pub const EVALUATION_FILE: &str = "evaluation.csv";
pub const ROC_FILE: &str = "roc.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SAMPLES_FILE: &str = "samples.csv";

const GENERATE_STREAM: &str = "generate";

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Validation(format!("{}: {other:?}", path.display())),
    })?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let (n_classes, samples_per_class, n_features) = args.synth_spec;
    let spec = SynthSpec {
        seed: args.seed.seed,
        ..SynthSpec::with_shape(n_classes, samples_per_class, n_features)
    };
    let ds = make_synthetic_dataset(&spec)?;
    create_dir(&args.out)?;
    write_feature_csv(args.out.join(DATASET_FILE), &ds.features()?, &ds.labels)?;
    write_json(&args.out.join("synth.json"), &spec)
}

fn dataset_source(args: &DataArgs) -> Result<DatasetSource> {
    match (&args.dataset, args.synth_spec) {
        (Some(path), _) => {
            let path = std::fs::canonicalize(path).map_err(|e| Error::io(path, e))?;
            Ok(DatasetSource::Csv {
                path,
                channels: args.channels.clone(),
            })
        }
        (None, Some((n_classes, samples_per_class, n_features))) => Ok(DatasetSource::Synth {
            spec: SynthSpec {
                seed: args.synth_seed,
                ..SynthSpec::with_shape(n_classes, samples_per_class, n_features)
            },
        }),
        (None, None) => Err(Error::Validation("either --dataset or --synth-spec is required".into())),
    }
}

fn novel_classes(args: &DataArgs) -> Result<Vec<usize>> {
    args.novel_classes
        .clone()
        .ok_or_else(|| Error::Validation("--novel-classes is required".into()))
}

fn run_configs(args: &TrainArgs) -> Result<Vec<RunConfig>> {
    if let Some(path) = &args.manifest {
        return Ok(vec![RunConfig::load(path)?]);
    }
    let seed = args.data.seed.seed;
    let mut gan = match args.preset {
        Preset::DualMyo => GanConfig::dual_myo(),
        Preset::Uc2017 => GanConfig::uc2017(),
    };
    gan.seed = seed;
    if let Some(e) = args.epochs {
        gan.epochs = e;
    }
    if let Some(b) = args.batch_size {
        gan.batch_size = b;
    }
    let dataset = dataset_source(&args.data)?;
    let novel = novel_classes(&args.data)?;
    if args.variant.is_empty() {
        return Err(Error::Validation("no variant given".into()));
    }
    let mut variants = args.variant.clone();
    variants.dedup();
    Ok(variants
        .into_iter()
        .map(|variant| RunConfig {
            dataset: dataset.clone(),
            novel_classes: novel.clone(),
            variant,
            gan: gan.clone(),
            target_gca: args.target_gca.clone(),
            seed,
        })
        .collect())
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    if args.jobs == 0 {
        return Err(Error::Validation("--jobs must be at least 1".into()));
    }
    let configs = run_configs(args)?;
    // validate everything before any training starts
    let prepared = configs.iter().map(RunConfig::prepare).collect::<Result<Vec<_>>>()?;
    let single = configs.len() == 1;
    let jobs: Vec<(RunConfig, PreparedData, PathBuf)> = configs
        .into_iter()
        .zip(prepared)
        .map(|(c, d)| {
            let dir = if single { args.out.clone() } else { args.out.join(c.variant.name()) };
            (c, d, dir)
        })
        .collect();
    for chunk in jobs.chunks(args.jobs) {
        let results: Vec<Result<()>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|(c, d, dir)| s.spawn(move || train_one(c, d, dir)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::State("training thread panicked".into()))))
                .collect()
        });
        for r in results {
            r?;
        }
    }
    Ok(())
}

fn train_one(config: &RunConfig, data: &PreparedData, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    config.save(dir)?;
    let checkpoints = dir.join(CHECKPOINT_DIR);
    let run = run_variant(
        data,
        config.variant,
        &config.gan,
        config.variant.uses_gan().then_some(checkpoints.as_path()),
    )?;
    write_run(&run, config, dir)
}

fn write_run(run: &VariantRun, config: &RunConfig, dir: &Path) -> Result<()> {
    Checkpoint::capture(&run.classifier, None, config.seed).save(dir.join(CLASSIFIER_FILE))?;
    if let Some(bundle) = &run.gan {
        bundle.save(dir, "", config.seed)?;
        let rows = bundle
            .loss_history
            .iter()
            .map(|e| vec![e.epoch.to_string(), fmt_f64(e.d_loss), fmt_f64(e.g_validity), fmt_f64(e.g_class)]);
        write_csv(&dir.join(LOSS_FILE), &["epoch", "d_loss", "g_validity", "g_class"], rows)?;
    }
    if let Some(out) = &run.baseline {
        let file = if run.gan.is_some() { RETRAIN_LOSS_FILE } else { LOSS_FILE };
        let rows = out
            .history
            .iter()
            .map(|e| vec![e.epoch.to_string(), fmt_f64(e.train_loss), fmt_f64(e.val_loss)]);
        write_csv(&dir.join(file), &["epoch", "train_loss", "val_loss"], rows)?;
    }
    Ok(())
}

fn load_network(path: &Path) -> Result<Network> {
    Checkpoint::load(path)?.network()
}

pub fn cmd_distances(args: &DistancesArgs) -> Result<()> {
    let (config, out) = match &args.run {
        Some(run) => (RunConfig::load(run)?, args.out.clone().unwrap_or_else(|| run.clone())),
        None => {
            let seed = args.data.seed.seed;
            let config = RunConfig {
                dataset: dataset_source(&args.data)?,
                novel_classes: novel_classes(&args.data)?,
                variant: Variant::BaselineA,
                gan: GanConfig { seed, ..GanConfig::default() },
                target_gca: Vec::new(),
                seed,
            };
            let out = args
                .out
                .clone()
                .ok_or_else(|| Error::Validation("--out is required without --run".into()))?;
            (config, out)
        }
    };
    let data = config.prepare()?;
    let real = real_by_class(&data)?;
    let generator = match &args.run {
        Some(run) if run.join(GENERATOR_FILE).exists() => Some(load_network(&run.join(GENERATOR_FILE))?),
        _ => {
            eprintln!("warning: no generator checkpoint; GAN columns left empty");
            None
        }
    };
    let streams = SeedStreams::new(config.seed);
    let mut random_rng = streams.stream(EVAL);
    let mut gen_rng = streams.stream(GENERATE_STREAM);
    let mut random = Vec::with_capacity(real.len());
    let mut generated = Vec::with_capacity(real.len());
    for (c, rows) in real.iter().enumerate() {
        let n = args.n.unwrap_or(rows.nrows());
        let stats = ClassStats::from_rows(rows.view())?;
        random.push(gaussian_baseline_sampler(&[stats], n, &mut random_rng)?.swap_remove(0));
        if let Some(g) = &generator {
            generated.push(generate_samples(g, &GenerationTarget::Class(c), n, &mut gen_rng, Mode::Infer)?);
        }
    }
    let generated_views = views(&generated);
    let report = distance_report(
        &views(&real),
        generator.is_some().then_some(generated_views.as_slice()),
        &views(&random),
    )?;
    create_dir(&out)?;
    let rows = report.classes.iter().map(|c| {
        let (gm, gs) = c
            .gan
            .map(|g| (fmt_f64(g.mean), fmt_f64(g.std)))
            .unwrap_or_default();
        vec![
            data.class_map[c.class].to_string(),
            fmt_f64(c.baseline.mean),
            fmt_f64(c.baseline.std),
            gm,
            gs,
            fmt_f64(c.random.mean),
            fmt_f64(c.random.std),
        ]
    });
    write_csv(
        &out.join(DISTANCES_FILE),
        &["class", "baseline_mean", "baseline_std", "gan_mean", "gan_std", "random_mean", "random_std"],
        rows,
    )
}

#[derive(Serialize)]
struct Report<'a> {
    variant: Variant,
    evaluation: &'a Evaluation,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let config = RunConfig::load(&args.run)?;
    let data = config.prepare()?;
    let classifier = load_network(&args.run.join(CLASSIFIER_FILE))?;
    let targets = args.target_gca.clone().unwrap_or_else(|| config.target_gca.clone());
    if let Some(p) = targets.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(Error::Validation(format!("target GCA {p} must lie in (0, 1]")));
    }
    let evaluation = evaluate_classifier(&classifier, &data, &targets)?;
    let out = args.out.clone().unwrap_or_else(|| args.run.clone());
    create_dir(&out)?;
    let rows = evaluation.rows.iter().map(|r| {
        let rep = &r.report;
        vec![
            config.variant.to_string(),
            r.target_gca.map(fmt_f64).unwrap_or_default(),
            fmt_f64(rep.tau),
            fmt_f64(rep.gca),
            fmt_f64(rep.nda),
            fmt_f64(rep.mean_balanced),
            fmt_f64(rep.mean_weighted),
            fmt_f64(evaluation.auc),
        ]
    });
    write_csv(
        &out.join(EVALUATION_FILE),
        &["variant", "target_gca", "tau", "class", "others", "mean_balanced", "mean_weighted", "auc"],
        rows,
    )?;
    let roc_rows = evaluation
        .roc
        .iter()
        .map(|p| vec![fmt_f64(p.fpr), fmt_f64(p.tpr), fmt_f64(p.threshold)]);
    write_csv(&out.join(ROC_FILE), &["fpr", "tpr", "threshold"], roc_rows)?;
    write_json(
        &out.join(REPORT_FILE),
        &Report {
            variant: config.variant,
            evaluation: &evaluation,
        },
    )
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let config = RunConfig::load(&args.run)?;
    let data = config.prepare()?;
    let gen_path = args.run.join(GENERATOR_FILE);
    if !gen_path.exists() {
        return Err(Error::Validation(format!(
            "{} has no generator; train a GAN variant first",
            args.run.display()
        )));
    }
    let generator = load_network(&gen_path)?;
    let (target, label) = match (&args.class, &args.target) {
        (Some(class), _) => {
            let idx = data
                .class_map
                .iter()
                .position(|c| c == class)
                .ok_or_else(|| Error::Validation(format!("class {class} is not a trained class")))?;
            (GenerationTarget::Class(idx), *class)
        }
        (None, Some(v)) => {
            let arg = v
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let label = *data
                .class_map
                .get(arg)
                .ok_or_else(|| Error::Shape("target vector is longer than the class list".into()))?;
            (GenerationTarget::Vector(v.clone()), label)
        }
        (None, None) => return Err(Error::Validation("--class or --target is required".into())),
    };
    let seed = args.seed.unwrap_or(config.seed);
    let mut rng = SeedStreams::new(seed).stream(GENERATE_STREAM);
    let x = generate_samples(&generator, &target, args.n, &mut rng, Mode::Infer)?;
    let x = data.standardizer.inverse_transform(x.view())?;
    let out = args.out.clone().unwrap_or_else(|| args.run.clone());
    create_dir(&out)?;
    write_feature_csv(out.join(SAMPLES_FILE), &x, &vec![label; args.n])
}

fn views(m: &[Array2<f64>]) -> Vec<ArrayView2<'_, f64>> {
    m.iter().map(|a| a.view()).collect()
}
