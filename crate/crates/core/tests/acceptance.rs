use std::process::ExitCode;
use std::time::Instant;

use mixsing::acceptance;

fn main() -> ExitCode {
    let mut failed = 0;
    for id in 1..=7 {
        let t = Instant::now();
        let c = acceptance::run(id);
        println!("{} ({:.1}s)", c.line(), t.elapsed().as_secs_f64());
        if !c.pass() {
            for f in c.failures() {
                println!("    {}: expected {}, got {}", f.name, f.expected, f.got);
            }
            failed += 1;
        }
    }
    println!("{} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
