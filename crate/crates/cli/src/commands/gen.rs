use cdinn::bench::{
    classify_2d, delay_dataset, function_grid, regression_1d, spill_grid, ClassKind, RegressionKind, SpillParams,
    TestFunction,
};

use crate::error::CliResult;
use crate::io::{dataset_table, write_csv, write_json};
use crate::{GenArgs, Generator};

pub fn run(a: &GenArgs) -> CliResult<()> {
    let ds = match a.func {
        Generator::Sine => regression_1d(RegressionKind::Sine, a.n.unwrap_or(200), a.seed)?,
        Generator::Quadratic => regression_1d(RegressionKind::Quadratic, a.n.unwrap_or(200), a.seed)?,
        Generator::Cubic => regression_1d(RegressionKind::Cubic, a.n.unwrap_or(200), a.seed)?,
        Generator::Circles => classify_2d(ClassKind::Circles, a.n.unwrap_or(200), a.noise, a.seed)?,
        Generator::Moons => classify_2d(ClassKind::Moons, a.n.unwrap_or(200), a.noise, a.seed)?,
        Generator::Camel => function_grid(TestFunction::Camel, a.points.unwrap_or(41), a.n.unwrap_or(0), a.seed)?,
        Generator::Matyas => function_grid(TestFunction::Matyas, a.points.unwrap_or(41), a.n.unwrap_or(0), a.seed)?,
        Generator::Sumpower => {
            function_grid(TestFunction::Sumpower, a.points.unwrap_or(5), a.n.unwrap_or(875), a.seed)?
        }
        Generator::Spill => spill_grid(&SpillParams::default(), a.grid)?,
        Generator::Delay => delay_dataset(a.n.unwrap_or(1000), a.seq_len, a.seed)?,
    };
    let (header, rows) = dataset_table(&ds);
    write_csv(&a.out, &header, &rows)?;
    write_json(&a.out.with_extension("provenance.json"), &ds.provenance)?;
    println!("wrote {} samples to {}", ds.len(), a.out.display());
    Ok(())
}
