use precise_core::readability::{ari, ari_grade, flesch_reading_ease, fre_band, gfi_grade, gunning_fog, ARI_TABLE, FRE_TABLE, GFI_TABLE};
use precise_core::textseg::TokenStats;
use proptest::prelude::*;
use proptest::test_runner::Config;

fn stats(words: usize, sentences: usize, syllables: usize, complex_words: usize, characters: usize) -> TokenStats {
    TokenStats { words, sentences, syllables, complex_words, characters }
}

proptest! {
    #![proptest_config(Config { failure_persistence: None, ..Config::default() })]

    #[test]
    fn fre_falls_as_syllables_per_word_rise(w in 1usize..500, s in 1usize..50, sy in 0usize..2000, extra in 1usize..500) {
        let lo = flesch_reading_ease(&stats(w, s, sy, 0, 0)).unwrap();
        let hi = flesch_reading_ease(&stats(w, s, sy + extra, 0, 0)).unwrap();
        prop_assert!(hi < lo);
    }

    #[test]
    fn gfi_rises_with_complex_word_share(w in 1usize..500, s in 1usize..50, cw in 0usize..500, extra in 1usize..500) {
        let lo = gunning_fog(&stats(w, s, 0, cw, 0)).unwrap();
        let hi = gunning_fog(&stats(w, s, 0, cw + extra, 0)).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn ari_rises_with_characters_per_word(w in 1usize..500, s in 1usize..50, c in 0usize..5000, extra in 1usize..500) {
        let lo = ari(&stats(w, s, 0, 0, c)).unwrap();
        let hi = ari(&stats(w, s, 0, 0, c + extra)).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn metrics_finite_whenever_defined(w in 1usize..10_000, s in 1usize..1000, sy in 0usize..40_000, cw in 0usize..10_000, c in 0usize..100_000) {
        let t = stats(w, s, sy, cw, c);
        for v in [flesch_reading_ease(&t).unwrap(), gunning_fog(&t).unwrap(), ari(&t).unwrap()] {
            prop_assert!(v.is_finite());
        }
        prop_assert_eq!(flesch_reading_ease(&t).unwrap().to_bits(), flesch_reading_ease(&t).unwrap().to_bits());
    }

    #[test]
    fn fre_bands_are_total(x in prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL) {
        let band = fre_band(x);
        let in_table = FRE_TABLE.iter().filter(|r| r.school_level == band.school_level && r.difficulty == band.difficulty).count();
        prop_assert_eq!(in_table, 1);
        prop_assert_eq!(band.out_of_range, !(0.0..=100.0).contains(&x));
    }

    #[test]
    fn grade_lookups_are_total(x in -1e9f64..1e9) {
        let g = gfi_grade(x);
        prop_assert_eq!(GFI_TABLE.iter().filter(|(i, l)| *i == g.index && *l == g.label).count(), 1);
        let a = ari_grade(x);
        prop_assert_eq!(ARI_TABLE.iter().filter(|(i, age, l)| *i == a.index && *l == a.label && *age == a.age).count(), 1);
    }
}

#[test]
fn undefined_without_words_or_sentences() {
    assert!(flesch_reading_ease(&stats(0, 1, 0, 0, 0)).is_err());
    assert!(gunning_fog(&stats(3, 0, 3, 0, 9)).is_err());
    assert!(ari(&stats(0, 0, 0, 0, 0)).is_err());
}
