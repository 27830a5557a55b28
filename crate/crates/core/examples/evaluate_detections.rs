// Score the bundled prediction file against its ground truth and print
// the metric and range tables.

use std::error::Error;

use wildnet::eval::{
    evaluate, f1, render_metrics_table, render_range_table, validate_split, GroundTruthSet,
    PredictionSet, SplitStats,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let gt = GroundTruthSet::from_path(format!("{dir}/eval_gt.jsonl"))?;
    let preds = PredictionSet::from_path(format!("{dir}/eval_pred.jsonl"))?;
    let report = evaluate(&gt, &preds, 0.5)?;
    print!("{}", render_metrics_table(&report));
    if let Some(bins) = &report.range_bins {
        print!("{}", render_range_table(bins));
    }

    println!("F1 from P=0.9544 R=0.9596: {:.4}", f1(0.9544, 0.9596));
    let split = validate_split(&SplitStats {
        train: 9118,
        val: 2009,
        test: 910,
        total: 12037,
        reported_pct: Some([75.8, 16.7, 7.6]),
    });
    println!("split {:?} pass {}", split.percentages, split.pass);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
