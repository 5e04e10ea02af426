//! Synthetic inputs for the benchmarks.

use std::fmt::Write as _;

const STATES: &[&str] = &["newyork", "ohio", "california", "texas", "massachusetts", "illinois"];
const LOCATIONS: &[&str] = &["urban", "suburban", "small-town", "small-city"];
const EMPHASIS: &[&str] = &["liberal-arts", "biology", "accounting", "engineering", "business", "education", "nursing"];

/// `n` raw instances in the UCI style, with every fifth one repeating an
/// earlier name so dedupe has work to do.
pub fn synthetic_raw(n: usize) -> String {
    let mut out = String::new();
    for i in 0..n {
        let name = if i % 5 == 4 { format!("school-{}", i - 2) } else { format!("school-{i}") };
        writeln!(out, "(def-instance {name}").unwrap();
        writeln!(out, "  (state {})", STATES[i % STATES.len()]).unwrap();
        writeln!(out, "  (location {})", LOCATIONS[i % LOCATIONS.len()]).unwrap();
        writeln!(out, "  (control {})", if i % 3 == 0 { "state" } else { "private" }).unwrap();
        writeln!(out, "  (no-of-students thous:{})", ["5-", "5-10", "15-20", "20+"][i % 4]).unwrap();
        writeln!(out, "  (expenses thous$:{})", ["4-", "4-7", "7-10", "10+"][i % 4]).unwrap();
        writeln!(out, "  (percent-financial-aid {})", (i * 7) % 100).unwrap();
        writeln!(out, "  (no-applicants thous:{})", ["4-", "4-7", "7-10", "10-13", "13-17", "17+"][i % 6]).unwrap();
        writeln!(out, "  (percent-admittance {})", (i * 13) % 100).unwrap();
        writeln!(out, "  (percent-enrolled {})", (i * 17) % 100).unwrap();
        for rating in ["academics", "social", "quality-of-life"] {
            writeln!(out, "  ({rating} scale:1-5 {})", 1 + (i + rating.len()) % 5).unwrap();
        }
        for k in 0..(1 + i % 3) {
            writeln!(out, "  (academic-emphasis {})", EMPHASIS[(i + k) % EMPHASIS.len()]).unwrap();
        }
        writeln!(out, ")").unwrap();
    }
    out
}
