use precise_core::fixtures::{synthetic_corpus, CORPUS_SEED, CORPUS_SIZE};
use precise_core::ingest::{filter_reports, FilterConfig};
use precise_core::readability::score_text;
use precise_core::simplify::mock_simplify;
use precise_core::stats::{descriptive, pvalue_matrix, MetricSamples, Sample};

fn samples(label: &str, texts: &[String]) -> MetricSamples {
    let scores: Vec<_> = texts.iter().map(|t| score_text(t).unwrap()).collect();
    let pick = |f: fn(&precise_core::readability::ReadabilityScores) -> f64, m: &str| {
        Sample::new(format!("{label} {m}"), scores.iter().map(f).collect())
    };
    MetricSamples { fre: pick(|s| s.fre, "FRE"), gfi: pick(|s| s.gfi, "GFI"), ari: pick(|s| s.ari, "ARI") }
}

#[test]
fn mock_output_is_easier_to_read_than_the_fixture_corpus() {
    let kept = filter_reports(synthetic_corpus(CORPUS_SEED, CORPUS_SIZE), &FilterConfig::default()).kept;
    assert_eq!(kept.len(), CORPUS_SIZE);
    let originals: Vec<String> = kept.iter().map(|r| r.text.clone()).collect();
    let generated: Vec<String> = originals.iter().map(|t| mock_simplify(t).unwrap()).collect();

    let (o, g) = (samples("original", &originals), samples("generated", &generated));
    let mean = |s: &Sample| descriptive(s).unwrap().mean;
    eprintln!("FRE {:.2} -> {:.2}", mean(&o.fre), mean(&g.fre));
    eprintln!("GFI {:.2} -> {:.2}", mean(&o.gfi), mean(&g.gfi));
    eprintln!("ARI {:.2} -> {:.2}", mean(&o.ari), mean(&g.ari));
    assert!(mean(&g.fre) > mean(&o.fre));
    assert!(mean(&g.gfi) < mean(&o.gfi));
    assert!(mean(&g.ari) < mean(&o.ari));

    let matrix = pvalue_matrix(&o, &g).unwrap();
    for (row, cells) in matrix.rows.iter().zip(&matrix.cells) {
        eprintln!("{row}: {:?}", cells.iter().map(|c| c.p_value).collect::<Vec<_>>());
        for cell in cells {
            assert!(cell.p_value < 0.05, "{row}: {cell:?}");
        }
    }
}
