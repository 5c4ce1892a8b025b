mod jobs;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use hybridrx::dsp::{LinkConfig, Modulation, Profile};
use hybridrx::eval::{
    backoff_sweep_csv, ber_sweep_csv, evm_csv, link_budget, load_receiver, load_receivers, report_evm,
    run_backoff_sweep, run_ber_sweep, LinkBudgetParams, ReceiverName, SweepReceiver, SweepSpec,
};
use hybridrx::impairments::PaModel;
use hybridrx::nn::GradCheckOptions;
use hybridrx::pipeline::{
    generate_dataset, pooled, run_hash, sha256_hex, train, BerCounter, Dataset, DatasetSpec, Generator, RxContext,
    CHECKPOINT_FILE, METRICS_FILE,
};
use hybridrx::rx::{assemble_pre_input, grad_check_receiver, grid_tensor, randomize_biases, HybridConfig, count_bit_errors};
use hybridrx::NeuralReceiver;
use jobs::{EvalJob, EvmJob, GradCheckJob, TrainJob};
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "hybridrx", version, about = "OFDM link simulation, neural receiver training and evaluation")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// JSON job description for the subcommand
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed; overrides the seed in the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Link profile; overrides the profile in the config
    #[arg(long, global = true, value_enum)]
    profile: Option<ProfileArg>,
    /// Output directory (created if missing)
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Mini,
    Paper,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Mini => Profile::Mini,
            ProfileArg::Paper => Profile::Paper,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset file and its manifest
    Datagen,
    /// Train a neural receiver
    Train,
    /// Score receivers on one dataset
    Eval,
    /// BER against SNR for each receiver
    BerSweep,
    /// Required SNR against PA backoff for each receiver
    BackoffSweep,
    /// EVM of the reference signal against PA backoff
    Evm,
    /// Coverage link budget with RMa path loss
    LinkBudget,
    /// Finite-difference check of receiver gradients
    GradCheck,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    match cli.command {
        Command::Datagen => datagen(cli),
        Command::Train => train_cmd(cli),
        Command::Eval => eval_cmd(cli),
        Command::BerSweep => {
            let (spec, rx) = sweep_setup(cli)?;
            let rows = run_ber_sweep(&spec, &rx)?;
            write_out(cli, "ber_sweep.csv", &ber_sweep_csv(&spec, &rows))
        }
        Command::BackoffSweep => {
            let (spec, rx) = sweep_setup(cli)?;
            let rows = run_backoff_sweep(&spec, &rx)?;
            let csv = backoff_sweep_csv(&spec, &rows);
            print!("{}", csv);
            write_out(cli, "backoff_sweep.csv", &csv)
        }
        Command::Evm => evm_cmd(cli),
        Command::LinkBudget => budget_cmd(cli),
        Command::GradCheck => grad_check_cmd(cli),
    }
}

fn read_config<T: DeserializeOwned>(cli: &Cli) -> Result<Option<(T, String)>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Some((value, text)))
}

fn write_out(cli: &Cli, name: &str, contents: &str) -> Result<()> {
    let path = cli.out.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn stamped_json(hash: &str, seed: u64, report: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(&serde_json::json!({
        "config_sha256": hash,
        "seed": seed,
        "report": report,
    }))?)
}

fn datagen(cli: &Cli) -> Result<()> {
    let mut spec = read_config::<DatasetSpec>(cli)?
        .map(|(s, _)| s)
        .unwrap_or_else(|| DatasetSpec::mini_train(Modulation::Qam16, 3.0, 0));
    if let Some(seed) = cli.seed {
        spec.master_seed = seed;
    }
    if let Some(p) = cli.profile {
        spec.profile = p.into();
    }
    let manifest = generate_dataset(&spec, &cli.out.join("dataset.bin"))?;
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    Ok(())
}

fn train_cmd(cli: &Cli) -> Result<()> {
    let Some((mut job, _)) = read_config::<TrainJob>(cli)? else {
        bail!("train needs --config with at least {{\"receiver\": \"hybrid\"}}");
    };
    let seed = cli.seed.unwrap_or(job.hyper.seed);
    job.hyper.seed = seed;
    let mut train_spec = job
        .train
        .take()
        .unwrap_or_else(|| DatasetSpec::mini_train(job.modulation, job.backoff_db, seed));
    let mut val_spec = job
        .val
        .take()
        .unwrap_or_else(|| DatasetSpec::mini_val(job.modulation, job.backoff_db, seed.wrapping_add(1)));
    if let Some(p) = cli.profile {
        train_spec.profile = p.into();
        val_spec.profile = p.into();
    }
    let model = match job.model.take() {
        Some(m) => m,
        None if train_spec.profile == Profile::Paper => HybridConfig::paper(job.receiver, train_spec.link(), seed),
        None => HybridConfig::desk(job.receiver, train_spec.link(), seed),
    };
    let train_set = Dataset::generate(&train_spec)?;
    let val_set = Dataset::generate(&val_spec)?;
    let result = train(&model, &train_set, &val_set, &job.hyper, Some(&cli.out))?;
    println!(
        "best epoch {} (run {}); wrote {} and {}",
        result.best_epoch,
        run_hash(&model, &train_set, &val_set, &job.hyper),
        cli.out.join(CHECKPOINT_FILE).display(),
        cli.out.join(METRICS_FILE).display()
    );
    Ok(())
}

fn eval_cmd(cli: &Cli) -> Result<()> {
    let Some((job, text)) = read_config::<EvalJob>(cli)? else {
        bail!("eval needs --config naming receivers and a dataset");
    };
    let dataset = match (&job.dataset_file, &job.dataset) {
        (Some(path), _) => Dataset::load(path)?,
        (None, Some(spec)) => {
            let mut spec = spec.clone();
            if let Some(seed) = cli.seed {
                spec.master_seed = seed;
            }
            if let Some(p) = cli.profile {
                spec.profile = p.into();
            }
            Dataset::generate(&spec)?
        }
        (None, None) => bail!("eval config needs `dataset` or `dataset_file`"),
    };
    let ctx = RxContext::new(&dataset.spec)?;
    let hash = sha256_hex(format!("{text}\n{}", dataset.spec.to_json()).as_bytes());
    let mut csv = format!(
        "# config_sha256={hash} seed={}\nreceiver,snr_db,ber,bit_errors,bit_count\n",
        dataset.spec.master_seed
    );
    for &name in &job.receivers {
        let rx = load_receiver(name, job.checkpoints.get(&name).map(PathBuf::as_path), &ctx.link)?;
        let mut counter = BerCounter::default();
        for r in &dataset.records {
            match &rx {
                SweepReceiver::Theory => counter.add(r.snr_db, 0, 0),
                SweepReceiver::Simulated(rx) => {
                    let (e, n) = count_bit_errors(&rx.detect(r, &ctx)?, &r.labels, &r.mask);
                    counter.add(r.snr_db, e, n);
                }
            }
        }
        let rows = counter.finish();
        for row in &rows {
            let ber = match rx {
                SweepReceiver::Theory => hybridrx::baseline::awgn_ber_theory(row.snr_db, dataset.spec.modulation),
                SweepReceiver::Simulated(_) => row.ber,
            };
            csv += &format!("{},{},{:e},{},{}\n", name.as_str(), row.snr_db, ber, row.bit_errors, row.bit_count);
        }
        if let SweepReceiver::Simulated(_) = rx {
            let p = pooled(&rows);
            eprintln!("{}: pooled BER {:.4e} over {} bits", name.as_str(), p.ber, p.bit_count);
        }
    }
    write_out(cli, "eval.csv", &csv)
}

fn sweep_setup(cli: &Cli) -> Result<(SweepSpec, Vec<(ReceiverName, SweepReceiver)>)> {
    let mut spec = read_config::<SweepSpec>(cli)?.map(|(s, _)| s).unwrap_or_else(|| {
        SweepSpec::new(
            vec![ReceiverName::LmmseKnown, ReceiverName::LmmseEst, ReceiverName::Theory],
            Modulation::Qam16,
        )
    });
    if let Some(seed) = cli.seed {
        spec.eval_seed = seed;
    }
    if let Some(p) = cli.profile {
        spec.profile = p.into();
    }
    let receivers = load_receivers(&spec)?;
    Ok((spec, receivers))
}

fn evm_cmd(cli: &Cli) -> Result<()> {
    let job = read_config::<EvmJob>(cli)?.map(|(j, _)| j).unwrap_or_default();
    let pa = match job.pa {
        Some(pa) => pa,
        None => PaModel::default_fitted()?,
    };
    let rows = report_evm(&job.backoffs_db, &pa)?;
    let csv = evm_csv(&pa, &rows)?;
    print!("{csv}");
    write_out(cli, "evm.csv", &csv)
}

fn budget_cmd(cli: &Cli) -> Result<()> {
    let params = read_config::<LinkBudgetParams>(cli)?
        .map(|(p, _)| p)
        .unwrap_or_else(LinkBudgetParams::table2);
    let report = link_budget(&params)?;
    let hash = sha256_hex(serde_json::to_string(&params)?.as_bytes());
    let json = stamped_json(&hash, cli.seed.unwrap_or(0), &report)?;
    println!("{json}");
    write_out(cli, "link_budget.json", &json)
}

fn grad_check_cmd(cli: &Cli) -> Result<()> {
    let job = read_config::<GradCheckJob>(cli)?.map(|(j, _)| j).unwrap_or_default();
    let profile = cli.profile.map(Profile::from).or(job.profile).unwrap_or(Profile::Mini);
    let seed = cli.seed.unwrap_or(0);
    let spec = DatasetSpec {
        profile,
        ..DatasetSpec::evaluation(Modulation::Qam16, 3.0, 10.0, 1, seed)
    };
    let record = Generator::new(&spec)?.tti(0)?;
    let link: LinkConfig = spec.link();
    let z = assemble_pre_input(&record.rx_frame);
    let ls = grid_tensor(&record.raw_ls);
    let options = GradCheckOptions {
        coords_per_param: job.coords_per_param,
        step: job.step,
        seed,
        ..GradCheckOptions::default()
    };
    let mut worst: f64 = 0.0;
    for &kind in &job.receivers {
        // Random biases keep padded (all-zero) rows off the ReLU kink.
        let mut model = NeuralReceiver::new(&HybridConfig::desk(kind, link.clone(), seed))?;
        randomize_biases(&mut model, 0.1, seed ^ 0xB1A5);
        let report = grad_check_receiver(&mut model, &z, &ls, &record.labels, &record.mask, &options);
        let w = report.worst().context("model has no parameters")?;
        println!(
            "{kind:?}: {} tensors, {} kink-straddling probes rejected, max relative error {:.3e} ({})",
            report.params.len(),
            report.skipped(),
            report.max_rel_error,
            w.name
        );
        worst = worst.max(report.max_rel_error);
    }
    println!("max relative error: {worst:.3e}");
    if !(worst < job.tolerance) {
        bail!("gradient check failed: {worst:.3e} >= {:.0e}", job.tolerance);
    }
    Ok(())
}
