use std::path::PathBuf;

use decode_energy::{parse_profile, read_profile, Error, EventKind, ProfileError};
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

// Totals below for the two real profiles are the PROGRAM TOTALS row printed by
// `cg_annotate` (valgrind 3.18.1) for the same files.
const TRUE_TOTALS: [u64; 9] = [
    184_287, 1_178, 1_165, 43_612, 1_686, 1_465, 15_571, 587, 552,
];

#[test]
fn real_profile_matches_annotate_totals() {
    let p = read_profile(fixture("true_cache_sim.cgout")).unwrap();
    assert_eq!(p.command, "/bin/true");
    assert_eq!(p.description_lines.len(), 3);
    assert_eq!(p.to_event_vector().unwrap().counts(), &TRUE_TOTALS);
}

#[test]
fn crlf_variant_parses_identically() {
    let lf = read_profile(fixture("true_cache_sim.cgout")).unwrap();
    let crlf = read_profile(fixture("true_cache_sim_crlf.cgout")).unwrap();
    assert_eq!(lf, crlf);
}

#[test]
fn branch_columns_are_ignored() {
    let p = read_profile(fixture("echo_branch_sim.cgout")).unwrap();
    assert_eq!(p.event_names.len(), 13);
    assert_eq!(p.total("Bc"), Some(39_773));
    assert_eq!(
        p.to_event_vector().unwrap().counts(),
        &[210_149, 1_472, 1_442, 51_303, 1_805, 1_493, 17_057, 637, 598]
    );
}

#[test]
fn hand_built_fixtures() {
    let cases: [(&str, [u64; 9]); 3] = [
        ("minimal.cgout", [100, 10, 2, 30, 3, 1, 20, 2, 1]),
        (
            "hevc_decode.cgout",
            [
                21_873_265_016,
                1_210_331,
                2_911,
                7_822_123_111,
                91_233_213,
                1_822_331,
                2_133_120_033,
                10_223_133,
                3_329_221,
            ],
        ),
        (
            "unknown_headers.cgout",
            [
                512_345_678,
                4_321,
                987,
                198_765_432,
                123_456,
                54_321,
                87_654_321,
                23_456,
                7_654,
            ],
        ),
    ];
    for (name, expected) in cases {
        let p = read_profile(fixture(name)).unwrap();
        assert_eq!(p.to_event_vector().unwrap().counts(), &expected, "{name}");
    }
    let p = read_profile(fixture("unknown_headers.cgout")).unwrap();
    assert_eq!(
        p.description_lines,
        ["version: 1", "creator: valgrind-3.22.0", "pid: 4412"]
    );
    assert_eq!(p.command, "tmn -i foreman_qcif_qp12.263");
}

#[test]
fn malformed_fixtures() {
    assert!(matches!(
        read_profile(fixture("malformed_arity.cgout")),
        Err(ProfileError::Arity {
            line: 3,
            expected: 9,
            found: 8
        })
    ));
    assert!(matches!(
        read_profile(fixture("malformed_token.cgout")),
        Err(ProfileError::InvalidCount { line: 3, .. })
    ));
    assert!(matches!(
        read_profile(fixture("malformed_no_summary.cgout")),
        Err(ProfileError::Malformed { line: 5, .. })
    ));
    let missing = read_profile(fixture("missing_event.cgout")).unwrap();
    assert!(matches!(
        missing.to_event_vector(),
        Err(Error::Profile(ProfileError::UnmappedEvent(ref n))) if n == "DLmw"
    ));
    let bad = read_profile(fixture("non_monotone.cgout")).unwrap();
    assert!(matches!(
        bad.to_event_vector(),
        Err(Error::InvalidEventVector { .. })
    ));
    assert!(matches!(
        read_profile(fixture("does_not_exist.cgout")),
        Err(ProfileError::Io { .. })
    ));
}

#[test]
fn summary_round_trip_on_corpus() {
    for name in [
        "true_cache_sim.cgout",
        "true_cache_sim_crlf.cgout",
        "echo_branch_sim.cgout",
        "minimal.cgout",
        "hevc_decode.cgout",
        "unknown_headers.cgout",
    ] {
        let p = read_profile(fixture(name)).unwrap();
        let again = parse_profile(p.to_summary_text().as_bytes()).unwrap();
        assert_eq!(again.totals, p.totals, "{name}");
        assert_eq!(again.event_names, p.event_names, "{name}");
    }
}

proptest! {
    #[test]
    fn totals_are_copied_not_invented(
        totals in prop::collection::vec(0u64..u64::MAX, 9..14),
        crlf in any::<bool>(),
    ) {
        let extra = ["Bc", "Bcm", "Bi", "Bim"];
        let mut names: Vec<&str> = EventKind::ALL.iter().map(|k| k.cachegrind_name()).collect();
        names.extend(&extra[..totals.len() - 9]);
        let nl = if crlf { "\r\n" } else { "\n" };
        let summary: Vec<String> = totals.iter().map(u64::to_string).collect();
        let text = format!(
            "cmd: dec{nl}events: {}{nl}fl=x.c{nl}fn=f{nl}1 2 3{nl}summary: {}{nl}",
            names.join(" "),
            summary.join(" ")
        );
        let p = parse_profile(text.as_bytes()).unwrap();
        prop_assert_eq!(&p.totals, &totals);
        let again = parse_profile(p.to_summary_text().as_bytes()).unwrap();
        prop_assert_eq!(&again.totals, &totals);
        if let Ok(v) = p.to_event_vector() {
            for (i, c) in v.counts().iter().enumerate() {
                prop_assert_eq!(*c, totals[i]);
            }
        }
    }
}
