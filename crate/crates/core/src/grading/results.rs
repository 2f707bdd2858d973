use serde::{Deserialize, Serialize};

use super::log::StudyRecord;
use super::{Arm, Rubric, RubricKind, StudyState, SCORES};
use crate::error::GradingError;
use crate::stats::{cohens_kappa, mann_whitney_u, percent_agreement, MwMode, Sample, TestResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmDistribution {
    pub arm: Arm,
    /// Counts of scores 0, 1 and 2 over all graders.
    pub counts: [usize; 3],
    pub proportions: [f64; 3],
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraderDistribution {
    pub grader: String,
    pub arm: Arm,
    pub counts: [usize; 3],
}

/// One row of the item × grader score grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub item_id: String,
    pub arm: Arm,
    pub pair_ref: String,
    /// One entry per grader, in grader order.
    pub scores: Vec<Option<u8>>,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResults {
    pub study_id: String,
    pub rubric: Rubric,
    pub state: StudyState,
    /// Results were released before every score was in.
    pub unblinded_early: bool,
    pub graders: Vec<String>,
    pub n_items: usize,
    pub total_scores: usize,
    pub arm_distributions: Vec<ArmDistribution>,
    pub grader_distributions: Vec<GraderDistribution>,
    /// Grader × grader, over items both graders scored; `None` if there are none.
    pub percent_agreement: Vec<Vec<Option<f64>>>,
    pub kappa: Vec<Vec<Option<f64>>>,
    /// Arms compared on per-item mean scores; understandability studies only.
    pub mann_whitney: Option<TestResult>,
    /// Original arm first, then by ascending mean score, then by position.
    pub grid: Vec<GridRow>,
}

pub(crate) fn compute_results(record: &StudyRecord) -> Result<StudyResults, GradingError> {
    let study = &record.study;
    let k = study.grader_tokens.len();
    let arms: &[Arm] = match study.rubric.kind {
        RubricKind::Understandability => &Arm::BOTH,
        RubricKind::Reliability => &[Arm::Generated],
    };
    let graders = study.grader_labels();
    let score = |g: usize, i: usize| record.scores.get(&(g, i)).map(|c| c.score);

    let mut arm_distributions = Vec::new();
    let mut grader_distributions = Vec::new();
    for &arm in arms {
        let mut counts = [0usize; 3];
        for g in 0..k {
            let mut mine = [0usize; 3];
            for (i, item) in study.items.iter().enumerate() {
                if item.hidden_arm == arm {
                    if let Some(s) = score(g, i) {
                        mine[s as usize] += 1;
                    }
                }
            }
            for (c, m) in counts.iter_mut().zip(mine) {
                *c += m;
            }
            grader_distributions.push(GraderDistribution { grader: graders[g].clone(), arm, counts: mine });
        }
        let total: usize = counts.iter().sum();
        let proportions = counts.map(|c| if total == 0 { 0.0 } else { c as f64 / total as f64 });
        arm_distributions.push(ArmDistribution { arm, counts, proportions, total });
    }

    let mut percent = vec![vec![None; k]; k];
    let mut kappa = vec![vec![None; k]; k];
    for a in 0..k {
        for b in 0..k {
            let (ra, rb): (Vec<u8>, Vec<u8>) =
                (0..study.items.len()).filter_map(|i| Some((score(a, i)?, score(b, i)?))).unzip();
            if ra.is_empty() {
                continue;
            }
            percent[a][b] = Some(percent_agreement(&ra, &rb)?);
            kappa[a][b] = cohens_kappa(&ra, &rb, &SCORES)?.kappa;
        }
    }

    let mut grid: Vec<(usize, GridRow)> = study
        .items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let scores: Vec<Option<u8>> = (0..k).map(|g| score(g, i)).collect();
            let given: Vec<f64> = scores.iter().flatten().map(|&s| s as f64).collect();
            let mean = (!given.is_empty()).then(|| given.iter().sum::<f64>() / given.len() as f64);
            (i, GridRow { item_id: item.item_id.clone(), arm: item.hidden_arm, pair_ref: item.pair_ref.clone(), scores, mean })
        })
        .collect();
    grid.sort_by(|(pa, a), (pb, b)| {
        let key = |m: Option<f64>| m.unwrap_or(f64::INFINITY);
        a.arm.cmp(&b.arm).then(key(a.mean).total_cmp(&key(b.mean))).then(pa.cmp(pb))
    });
    let grid: Vec<GridRow> = grid.into_iter().map(|(_, row)| row).collect();

    let mann_whitney = if study.rubric.kind == RubricKind::Understandability {
        let means = |arm: Arm| grid.iter().filter(|r| r.arm == arm).filter_map(|r| r.mean).collect::<Vec<_>>();
        let (orig, generated) = (means(Arm::Original), means(Arm::Generated));
        if orig.is_empty() || generated.is_empty() {
            None
        } else {
            Some(mann_whitney_u(&Sample::new("original", orig), &Sample::new("generated", generated), MwMode::Auto)?)
        }
    } else {
        None
    };

    Ok(StudyResults {
        study_id: study.study_id.clone(),
        rubric: study.rubric.clone(),
        state: record.state(),
        unblinded_early: !record.reveals.is_empty(),
        graders,
        n_items: study.items.len(),
        total_scores: record.scores.len(),
        arm_distributions,
        grader_distributions,
        percent_agreement: percent,
        kappa,
        mann_whitney,
        grid,
    })
}
