//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::criteria::*;
use plancheck::eval::{f1_score, Mode};

struct Verdict {
    pass: bool,
    summary: String,
}

fn verdict(failures: &[String], summary: String) -> Verdict {
    let mut summary = summary;
    if let Some(first) = failures.first() {
        summary = format!("{summary}; {} failure(s), first: {first}", failures.len());
    }
    Verdict {
        pass: failures.is_empty(),
        summary,
    }
}

fn bmc_equivalence() -> Verdict {
    let start = Instant::now();
    let st = bmc_vs_oracle(0xB0C1, 1000);
    let elapsed = start.elapsed();
    let mut failures = st.mismatches.clone();
    failures.extend(st.cex.failures.iter().cloned());
    if elapsed > Duration::from_secs(120) {
        failures.push(format!("took {elapsed:.1?}, limit 120 s"));
    }
    verdict(
        &failures,
        format!(
            "{} model/formula pairs agree with lasso enumeration ({} hold, {} violated, {} skipped as too large, {} also checked with fresh encodings) in {:.1?}",
            st.cases, st.holds, st.violated, st.skipped, st.fresh_compared, elapsed
        ),
    )
}

fn plan_equivalence() -> Verdict {
    let st = plan_pipeline(0x91A7, 500);
    let mut failures = st.mismatches.clone();
    failures.extend(st.cex.failures.iter().cloned());
    verdict(
        &failures,
        format!(
            "{} problems ({} valid, {} invalid): model checking equals simulation",
            st.cases,
            st.valid,
            st.cases - st.valid
        ),
    )
}

fn sat_correctness() -> Verdict {
    let st = sat_vs_enumeration(0x5A7, 2000);
    verdict(
        &st.mismatches,
        format!(
            "{} CNFs ({} sat, {} unsat) agree with enumeration; all models verified",
            st.cases,
            st.sat,
            st.cases - st.sat
        ),
    )
}

fn metric_arithmetic() -> Verdict {
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for (p, r, want) in [(99.44, 93.34, 96.30), (59.19, 45.54, 51.48)] {
        let got = f1_score(p / 100.0, r / 100.0).map_or(f64::NAN, |f| f * 100.0);
        parts.push(format!("F1({p}, {r}) = {got:.4}"));
        if !((got - want).abs() <= 0.01) {
            failures.push(format!("F1({p}, {r}) = {got}, expected {want}"));
        }
    }
    verdict(&failures, parts.join(", "))
}

fn replay() -> Verdict {
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for mode in [Mode::FormalLlm, Mode::DirectLlm, Mode::FormalDirect] {
        match replay_mode(mode) {
            Ok(s) => parts.push(s),
            Err(e) => failures.push(e),
        }
    }
    verdict(
        &failures,
        format!("byte-stable reports match expected verdicts and metrics under all policies ({})", parts.join("; ")),
    )
}

fn parser_robustness_check() -> Verdict {
    let st = parser_robustness(0x9A55, 1000, 3000);
    verdict(
        &st.failures,
        format!(
            "{} round trips, {} malformed fixtures at expected positions, {} mutated inputs without panics",
            st.round_trips, st.malformed_files, st.mutations
        ),
    )
}

fn counterexample_soundness() -> Verdict {
    let bmc = bmc_vs_oracle(0xCE7, 300);
    let plans = plan_pipeline(0xCE8, 200);
    let mut failures = bmc.cex.failures.clone();
    failures.extend(plans.cex.failures.iter().cloned());
    let checked = bmc.cex.checked + plans.cex.checked;
    if checked == 0 {
        failures.push("no counterexamples were produced".into());
    }
    verdict(
        &failures,
        format!(
            "{checked} counterexamples ({} from random models, {} from plans) revalidate and falsify their specs",
            bmc.cex.checked, plans.cex.checked
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("BMC/oracle equivalence", bmc_equivalence),
        ("plan-pipeline equivalence", plan_equivalence),
        ("SAT correctness", sat_correctness),
        ("metric arithmetic", metric_arithmetic),
        ("end-to-end replay", replay),
        ("parser robustness", parser_robustness_check),
        ("counterexample soundness", counterexample_soundness),
    ];
    let mut all = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        all &= v.pass;
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name}: {}", i + 1, v.summary);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
