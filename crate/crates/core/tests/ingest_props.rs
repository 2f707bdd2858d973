use precise_core::ingest::{classify, filter_reports, FilterConfig, RejectReason, Report};
use proptest::prelude::*;
use proptest::test_runner::Config;

fn report() -> impl Strategy<Value = Report> {
    let text = prop_oneof![
        Just(String::new()),
        "[ \t\n]{1,4}",
        "[A-Za-z]{1,8}( [A-Za-z]{1,8}){0,3}\\.",
        "[A-Za-z]{1,8}( [A-Za-z0-9,]{1,8}){4,12}\\.",
        "[A-Za-z]{1,8}( [A-Za-z@#<>]{1,8}){0,8}",
        "\\PC{0,60}",
    ];
    (0u32..10_000, text).prop_map(|(n, text)| Report { id: format!("r{n}"), text, source: String::new() })
}

proptest! {
    #![proptest_config(Config { failure_persistence: None, ..Config::default() })]

    #[test]
    fn kept_and_rejected_partition_the_input(reports in prop::collection::vec(report(), 0..40), min_words in 1usize..10) {
        let config = FilterConfig { min_words, ..FilterConfig::default() };
        let outcome = filter_reports(reports.clone(), &config);
        prop_assert_eq!(outcome.kept.len() + outcome.rejected.len(), reports.len());
        prop_assert_eq!(&outcome, &filter_reports(reports.clone(), &config));

        let mut kept = outcome.kept.iter();
        let mut rejected = outcome.rejected.iter();
        for r in &reports {
            match classify(r, &config) {
                None => prop_assert_eq!(kept.next(), Some(r)),
                Some(reason) => {
                    let rej = rejected.next().unwrap();
                    prop_assert_eq!(&rej.report, r);
                    prop_assert_eq!(rej.reason, reason);
                }
            }
        }
    }

    #[test]
    fn first_failing_rule_wins(words in 0usize..8, bad in any::<bool>(), blank in any::<bool>()) {
        let mut text: Vec<String> = (0..words).map(|i| format!("word{i}")).collect();
        if bad {
            text.push("#".into());
        }
        let text = if blank { "   ".to_string() } else { text.join(" ") };
        let r = Report { id: "x".into(), text: text.clone(), source: String::new() };
        let expected = if text.trim().is_empty() {
            Some(RejectReason::Empty)
        } else if bad {
            Some(RejectReason::InvalidChars)
        } else if words < 5 {
            Some(RejectReason::TooShort)
        } else {
            None
        };
        prop_assert_eq!(classify(&r, &FilterConfig::default()), expected);
    }
}
