use cdinn::arch::{Kind, NetworkSpec};
use cdinn::bench::{fit_models, LrSchedule, TrainConfig};

use crate::error::{CliError, CliResult};
use crate::io::read_dataset;
use crate::model::ModelFile;
use crate::{parse_batch, Arch, Schedule, TrainArgs};

pub fn kind_of(a: Arch) -> Kind {
    match a {
        Arch::Standard => Kind::Standard,
        Arch::Icnn => Kind::Icnn,
        Arch::Cdinn1 => Kind::Cdinn1,
        Arch::Cdinn2 => Kind::Cdinn2,
        Arch::Ricnn => Kind::RecurrentIcnn,
        Arch::Rcdinn => Kind::RecurrentCdinn,
    }
}

pub fn parse_hidden(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|h| match h.trim().parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(CliError::usage(format!("--hidden: `{h}` is not a positive width"))),
        })
        .collect()
}

pub fn run(a: &TrainArgs) -> CliResult<()> {
    let ds = read_dataset(&a.data)?;
    let kind = kind_of(a.arch);
    if kind.is_recurrent() != ds.is_sequence() {
        return Err(CliError::usage(format!(
            "{} needs {} data but {} holds {} data",
            kind.label(),
            if kind.is_recurrent() { "sequence" } else { "pointwise" },
            a.data.display(),
            if ds.is_sequence() { "sequence" } else { "pointwise" },
        )));
    }
    let mut spec = NetworkSpec::new(kind, ds.input_dim(), parse_hidden(&a.hidden)?)
        .with_bias(a.bias.on())
        .with_seed(a.seed);
    if let Some(p) = a.passthrough {
        spec = spec.with_passthrough(p.on());
    }
    if a.negate {
        spec = spec.negated();
    }
    let cfg = TrainConfig {
        epochs: a.epochs,
        lr: a.lr,
        batch_size: parse_batch(&a.batch_size)?,
        seed: a.seed,
        restarts: a.restarts,
        schedule: match a.schedule {
            Schedule::Constant => LrSchedule::Constant,
            Schedule::Cosine => LrSchedule::Cosine,
        },
    };
    let scale = a.scale.on() && !ds.is_sequence();
    let models = fit_models(&spec, &ds, scale, &cfg)?;
    let best = models
        .iter()
        .min_by(|x, y| x.fit_mse.total_cmp(&y.fit_mse))
        .expect("restarts >= 1 is validated");
    for m in &models {
        println!("restart {} seed {} fit_mse {:.6e}", m.restart, m.seed, m.fit_mse);
    }
    let file = ModelFile::from_fitted(best, cfg.lr, cfg.batch_size, &a.data.display().to_string());
    file.save(&a.out)?;
    println!(
        "saved {} {:?} (restart {}, fit_mse {:.6e}) to {}",
        kind.label(),
        spec.hidden,
        best.restart,
        best.fit_mse,
        a.out.display()
    );
    Ok(())
}
