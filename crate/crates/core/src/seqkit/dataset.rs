//! The bundled corpus: ten 23-step routines with judge scores (mean and
//! standard deviation over twenty judges, 0-10 scale) and measured robot
//! energies in centimeters. The experiment behind these numbers is not
//! re-runnable, so they ship as versioned data.

use super::{io, DanceSequence, ScoreTable};

const DANCES_TXT: &str = include_str!("../../data/dances.txt");
const SCORES_CSV: &str = include_str!("../../data/scores.csv");

pub fn bundled_corpus() -> Vec<DanceSequence> {
    io::parse_corpus_str(DANCES_TXT).expect("bundled corpus parses")
}

pub fn bundled_scores() -> ScoreTable {
    io::parse_scores_csv(SCORES_CSV).expect("bundled scores parse").0
}

pub fn bundled_energies() -> Vec<(String, f64)> {
    io::parse_scores_csv(SCORES_CSV).expect("bundled scores parse").1
}
