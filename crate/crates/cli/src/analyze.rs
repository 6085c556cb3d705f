//! `analyze`: corpus metrics, correlations and scatter-data export.

use motioncomm::seqkit::{self, ComplexityReport, DanceSequence, ScoreTable};

use crate::{AnalyzeArgs, CliError};

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    let corpus = load_corpus(args)?;
    let scores_data = load_scores(args)?;
    let (scores, energies) = match &scores_data {
        Some((table, energies)) => (Some(table), Some(energies.as_slice())),
        None => (None, None),
    };
    let report = seqkit::metric_report(&corpus, scores, energies, (args.w_avg, args.w_num))
        .map_err(|e| CliError::Parse(e.to_string()))?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.out_dir.display())))?;
    let report_path = args.out_dir.join("report.json");
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&report_path, body)
        .map_err(|e| CliError::Io(format!("{}: {e}", report_path.display())))?;
    println!("wrote {}", report_path.display());

    if report.dances.iter().all(|d| d.judges_mean.is_some()) {
        let scatter_path = args.out_dir.join("scatter.csv");
        std::fs::write(&scatter_path, scatter_csv(&report))
            .map_err(|e| CliError::Io(format!("{}: {e}", scatter_path.display())))?;
        println!("wrote {}", scatter_path.display());
    }
    if let Some(corr) = &report.correlations {
        println!(
            "correlations vs judges: symbol-frequency {:.3}, averaged-phrase {:.3}, \
             number-of-phrases {:.3}, combined {:.3}{}",
            corr.symbol_frequency,
            corr.averaged_phrase,
            corr.number_of_phrases,
            corr.combined,
            match corr.energy {
                Some(e) => format!(", energy {e:.3}"),
                None => String::new(),
            }
        );
    }
    Ok(())
}

fn load_corpus(args: &AnalyzeArgs) -> Result<Vec<DanceSequence>, CliError> {
    match (&args.corpus, args.bundled) {
        (Some(path), false) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            seqkit::parse_corpus_str(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
        }
        (None, true) => Ok(seqkit::bundled_corpus()),
        (Some(_), true) => Err(CliError::Usage(
            "pass either a corpus file or --bundled, not both".to_string(),
        )),
        (None, false) => Err(CliError::Usage(
            "pass a corpus file or --bundled".to_string(),
        )),
    }
}

type ScoresData = (ScoreTable, Vec<(String, f64)>);

fn load_scores(args: &AnalyzeArgs) -> Result<Option<ScoresData>, CliError> {
    match &args.scores {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let parsed = seqkit::parse_scores_csv(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            Ok(Some(parsed))
        }
        None if args.bundled => Ok(Some((
            seqkit::bundled_scores(),
            seqkit::bundled_energies(),
        ))),
        None => Ok(None),
    }
}

/// One row per routine: every metric next to the judges' mean, ready for a
/// scatter plot.
fn scatter_csv(report: &ComplexityReport) -> String {
    let mut body = String::from(
        "dance,judges_mean,symbol_frequency,averaged_phrase,number_of_phrases,combined,energy_cm\n",
    );
    for d in &report.dances {
        let energy = d
            .energy_cm
            .map(|e| e.to_string())
            .unwrap_or_default();
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            d.id,
            d.judges_mean.expect("caller checked"),
            d.symbol_frequency,
            d.averaged_phrase,
            d.number_of_phrases,
            d.combined,
            energy
        ));
    }
    body
}
