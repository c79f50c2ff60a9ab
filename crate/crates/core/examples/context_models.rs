//! The context-aware models on a dataset where weekends lift every rating by
//! one point: learned deviations, similarities and tensor factors.

use ctxrec::camf::{CamfModel, ContextSimModel, DeviationVariant, SimilarityVariant};
use ctxrec::cptf::CptfModel;
use ctxrec::sgd::SgdModel;
use ctxrec::synthetic::PlantedLift;
use ctxrec::HyperParams;

fn main() -> ctxrec::Result<()> {
    let table = PlantedLift {
        rows: 5000,
        weekend_share: 0.5,
        ..PlantedLift::default()
    }
    .generate();
    let schema = table.schema();
    let hp = HyperParams {
        reg_context: 0.01,
        num_iterations: 50,
        ..HyperParams::default()
    };

    let (camf, report) = CamfModel::fit(&table, DeviationVariant::C, &hp)?;
    println!(
        "CAMF_C after {} epochs, mu = {:.3}",
        report.epochs, camf.base.mu
    );
    for c in 0..schema.num_conditions() {
        if let Some(k) = camf.condition_dev_at(c) {
            println!("  dev[{}] = {:+.3}", schema.label(c), camf.params()[k]);
        }
    }

    let weekend = schema.situation([("Time", "Weekend")])?;
    let weekday = schema.situation([("Time", "Weekday")])?;
    for variant in [
        SimilarityVariant::Ics,
        SimilarityVariant::Lcs,
        SimilarityVariant::Mcs,
    ] {
        let (m, _) = ContextSimModel::fit(&table, variant, &hp)?;
        println!(
            "{variant:?}: gamma(weekend) = {:.3}, gamma(weekday) = {:.3}",
            m.gamma(weekend.conditions()),
            m.gamma(weekday.conditions())
        );
    }

    let (cptf, _) = CptfModel::fit(
        &table,
        &HyperParams {
            num_factors: 4,
            ..hp
        },
    )?;
    for s in [&weekend, &weekday] {
        let z = cptf.z(s.active(0));
        let z: Vec<String> = z.iter().map(|v| format!("{v:.2}")).collect();
        println!("CPTF z[{}] = [{}]", schema.label(s.active(0)), z.join(", "));
    }
    Ok(())
}
