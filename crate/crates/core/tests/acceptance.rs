use tricover::elm::Fault;
use tricover::suites::{self, Grid, SuiteResult, VerifyConfig};

fn line(id: u8, name: &str, ok: bool, detail: &str) -> bool {
    println!("criterion {id} [{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn report(r: &SuiteResult) -> bool {
    line(r.id, &r.name, r.passed(), &r.summary_line())
}

fn main() {
    let cfg = VerifyConfig { grid: Grid::Default, ..VerifyConfig::default() };
    let mut ok = true;
    for r in suites::run_all(&cfg) {
        ok &= report(&r);
    }

    let negate = suites::oracle_random(&VerifyConfig { fault: Some(Fault::NegateEUpdate), ..cfg });
    let keep = suites::resolution_properties(&VerifyConfig { fault: Some(Fault::KeepDeltaOnR2), ..cfg });
    let detail = format!(
        "negate-e: {} failures of {}; keep-delta: {} failures of {}",
        negate.failures.len(),
        negate.cases,
        keep.failures.len(),
        keep.cases
    );
    ok &= line(9, "mutation controls", !negate.passed() && !keep.passed(), &detail);

    if !ok {
        eprintln!("acceptance criteria failed");
        std::process::exit(1);
    }
}
