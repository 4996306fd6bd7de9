//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dcswitch::graphcheck::validate_two_level_tree;
use dcswitch::io::pretty;
use dcswitch::oracles::{
    graph_space, random_networks, subset_sum_space, verify_cacti, verify_feas_msf, verify_hamiltonian,
    verify_longest_path, verify_m3da, verify_mots, verify_sch, VerificationReport, VerifyOptions,
};
use dcswitch::rational::{ExtRational, Rational};
use dcswitch::reductions::{build_two_level_tree, tree_claim, BuildMode, M3daInstance, SubsetSumInstance};
use dcswitch::solvers::{solve_msf, SearchOptions};
use dcswitch_cli::{default_tree_instances, run, EXIT_MISMATCH, EXIT_OK};

struct Line {
    ok: bool,
    detail: String,
}

fn line(ok: bool, detail: impl Into<String>) -> Line {
    Line { ok, detail: detail.into() }
}

fn options(jobs: usize) -> VerifyOptions {
    VerifyOptions {
        mode: BuildMode::Repaired,
        search: SearchOptions { jobs, ..SearchOptions::default() },
        jobs,
        invariants: true,
    }
}

fn sch_xs() -> Vec<Rational> {
    vec![Rational::from_integer(1.into()), Rational::from_integer(2.into()), Rational::new(5.into(), 2.into())]
}

fn m3da_space() -> Vec<M3daInstance> {
    [0, 1, 7].into_iter().map(|d| M3daInstance::uniform(1, move |_, _, _| d)).collect()
}

/// Reports for criteria 1-7 in a fixed order, with per-criterion timings.
fn all_reports(jobs: usize) -> Vec<(usize, VerificationReport, Duration)> {
    let opts = options(jobs);
    let nets = random_networks(42, 20);
    let graphs = graph_space(5);
    let mut out = Vec::new();
    let mut timed = |criterion: usize, f: &dyn Fn() -> VerificationReport| {
        let start = Instant::now();
        let r = f();
        out.push((criterion, r, start.elapsed()));
    };
    timed(1, &|| verify_sch(&sch_xs(), &opts).expect("sch"));
    timed(2, &|| verify_cacti(&subset_sum_space(4, 3, 6), &opts).expect("cacti"));
    timed(3, &|| dcswitch::oracles::verify_tree(&default_tree_instances(), &opts).expect("tree"));
    timed(4, &|| verify_longest_path(&graphs, &opts).expect("longest path"));
    timed(5, &|| verify_hamiltonian(&graphs, &opts).expect("hamiltonian"));
    timed(6, &|| verify_m3da(&m3da_space(), &opts).expect("m3da"));
    timed(7, &|| verify_feas_msf(&nets, &opts).expect("feas-msf"));
    timed(7, &|| verify_mots(&nets, &opts).expect("mots"));
    out
}

fn report_of(reports: &[(usize, VerificationReport, Duration)], criterion: usize) -> Vec<&VerificationReport> {
    reports.iter().filter(|(c, _, _)| *c == criterion).map(|(_, r, _)| r).collect()
}

fn elapsed(reports: &[(usize, VerificationReport, Duration)], criterion: usize) -> Duration {
    reports.iter().filter(|(c, _, _)| *c == criterion).map(|(_, _, t)| *t).sum()
}

fn mismatches(r: &VerificationReport) -> usize {
    r.instances.iter().filter(|i| !i.matches).count()
}

fn criterion_1(reports: &[(usize, VerificationReport, Duration)]) -> Line {
    let r = report_of(reports, 1)[0];
    let t = elapsed(reports, 1);
    line(
        r.all_match && r.instances.len() == 3 && t < Duration::from_secs(1),
        format!("x in {{1, 2, 5/2}}: pgen(v) in {{0, x}}, minus variant max pload(v) = 0, {} mismatches, {t:.2?}", mismatches(r)),
    )
}

fn criterion_2(reports: &[(usize, VerificationReport, Duration)]) -> Line {
    let r = report_of(reports, 2)[0];
    let t = elapsed(reports, 2);
    let example = r.instances.iter().find(|i| i.instance == "M = {1,2,3}, w = 5");
    let example_ok = example.is_some_and(|i| i.matches && i.solver == "feasible");
    line(
        r.all_match && r.instances.len() == 84 && example_ok && t < Duration::from_secs(300),
        format!("{} instances, {} mismatches, ({{1,2,3}},5) feasible: {example_ok}, {t:.2?}", r.instances.len(), mismatches(r)),
    )
}

fn criterion_3(reports: &[(usize, VerificationReport, Duration)]) -> Line {
    let r = report_of(reports, 3)[0];
    let t = elapsed(reports, 3);
    let opts = SearchOptions::default();
    let mut parts = Vec::new();
    let mut ok = r.all_match;
    for (set, w) in [(vec![2, 1, 3], 5), (vec![2], 1), (vec![1, 3], 2)] {
        let ssi = SubsetSumInstance::new(set.clone(), w).expect("instance");
        let report = build_two_level_tree(&ssi, BuildMode::Repaired).expect("tree");
        let valid = report
            .annotation
            .as_ref()
            .and_then(|a| validate_two_level_tree(&report.network, a).ok())
            .is_some_and(|v| v.holds);
        let msf = solve_msf(&report.network, &opts).expect("msf").value.expect("feasible");
        let claim = ExtRational::int(tree_claim(&ssi) as i64);
        let expect_reach = set == vec![2, 1, 3];
        ok &= valid && if expect_reach { msf == claim } else { msf < claim };
        parts.push(format!("({set:?},{w}) msf {msf} vs {claim}"));
    }
    ok &= t < Duration::from_secs(600);
    line(ok, format!("{}, 2-level tree checks pass, {t:.2?}", parts.join("; ")))
}

fn criterion_4(reports: &[(usize, VerificationReport, Duration)]) -> Line {
    let r = report_of(reports, 4)[0];
    let constant = r.notes.iter().find(|n| n.starts_with("empirical law"));
    let three = r.notes.iter().find(|n| n.starts_with("claimed constant c = 3"));
    line(
        r.all_match && constant.is_some() && three.is_some(),
        format!(
            "{} graphs on <= 5 vertices, {} mismatches; {}; {}, {:.2?}",
            r.instances.len(),
            mismatches(r),
            constant.map_or("no constant", String::as_str),
            three.map_or("c = 3 not reported", String::as_str),
            elapsed(reports, 4)
        ),
    )
}

fn criterion_5(reports: &[(usize, VerificationReport, Duration)]) -> Line {
    let r = report_of(reports, 5)[0];
    let hams = r.instances.iter().filter(|i| i.oracle.starts_with("hamiltonian")).count();
    line(
        r.all_match && hams > 0,
        format!(
            "{} graphs, {hams} with an a-b Hamiltonian path, MSF = 2 exactly on those: {}, {:.2?}",
            r.instances.len(),
            r.all_match,
            elapsed(reports, 5)
        ),
    )
}

fn criterion_6(reports: &[(usize, VerificationReport, Duration)]) -> Line {
    let r = report_of(reports, 6)[0];
    let t = elapsed(reports, 6);
    let values: Vec<&str> = r.instances.iter().map(|i| i.solver.as_str()).collect();
    line(r.all_match && t < Duration::from_secs(60), format!("1x1x1, d in {{0, 1, 7}}: {}, {t:.2?}", values.join(", ")))
}

fn criterion_7(reports: &[(usize, VerificationReport, Duration)]) -> Line {
    let rs = report_of(reports, 7);
    let (feas, mots) = (rs[0], rs[1]);
    line(
        feas.all_match && mots.all_match && feas.instances.len() == 20 && !mots.instances.is_empty(),
        format!(
            "seed 42: feasibility iff MSF >= sum plmin on {} nets ({} mismatches); identity on {} disjoint nets ({} mismatches)",
            feas.instances.len(),
            mismatches(feas),
            mots.instances.len(),
            mismatches(mots)
        ),
    )
}

fn criterion_8(first: &[(usize, VerificationReport, Duration)]) -> Line {
    let checked: usize = first.iter().map(|(_, r, _)| r.instances.iter().filter(|i| i.invariants.is_some()).count()).sum();
    let total: usize = first.iter().map(|(_, r, _)| r.instances.len()).sum();
    let hold = first.iter().all(|(_, r, _)| r.invariants_hold());
    // the rerun also switches the worker count
    let rerun = all_reports(3);
    let text = |rs: &[(usize, VerificationReport, Duration)]| rs.iter().map(|(_, r, _)| pretty(r)).collect::<String>();
    let same = text(first) == text(&rerun);
    let cli_a = run(["dcswitch", "verify", "cacti", "--format", "structured", "--jobs", "1"]);
    let cli_b = run(["dcswitch", "verify", "cacti", "--format", "structured", "--jobs", "4"]);
    let same_cli = cli_a == cli_b && cli_a.code == EXIT_OK;
    line(
        hold && checked == total && same && same_cli,
        format!(
            "MPF <= MSF <= bound and valid witnesses on {checked}/{total} instances: {hold}; rerun with 3 workers identical: {same}; CLI jobs 1 vs 4 identical: {same_cli}"
        ),
    )
}

fn criterion_9() -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for theorem in ["m3da", "sch"] {
        let strict = run(["dcswitch", "verify", theorem, "--strict-paper"]);
        let repaired = run(["dcswitch", "verify", theorem]);
        let shows = strict.code == EXIT_MISMATCH && strict.stdout.contains("MISMATCH");
        ok &= shows && repaired.code == EXIT_OK;
        parts.push(format!("{theorem}: strict exit {}, repaired exit {}", strict.code, repaired.code));
        if theorem == "m3da" {
            // capacity on t-t_g and the demand at l
            let cap = strict.stdout.contains("t[x1,y1,w1]-tg[x1,y1,w1]");
            let demand = strict.stdout.lines().any(|l| l.contains("reason") && l.contains("bus l:"));
            ok &= cap && demand;
            parts.push(format!("t-t_g capacity flagged {cap}, demand at l flagged {demand}"));
        } else {
            let branch = strict.stdout.contains("switching g-l");
            ok &= branch;
            parts.push(format!("g-l branch witness rejected {branch}"));
        }
    }
    line(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let reports = all_reports(1);
    let lines = [
        criterion_1(&reports),
        criterion_2(&reports),
        criterion_3(&reports),
        criterion_4(&reports),
        criterion_5(&reports),
        criterion_6(&reports),
        criterion_7(&reports),
        criterion_8(&reports),
        criterion_9(),
    ];
    let mut failed = 0;
    for (i, l) in lines.iter().enumerate() {
        println!("criterion {}: {}  {}", i + 1, if l.ok { "PASS" } else { "FAIL" }, l.detail);
        failed += usize::from(!l.ok);
    }
    println!("acceptance: {} of {} criteria pass ({:.1?})", lines.len() - failed, lines.len(), start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
