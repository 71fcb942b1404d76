//! Writes the bundled fixture CSVs and checks them against the calibration
//! targets. `gen` is deterministic: same seeds, same bytes.

mod check;
mod daily;
mod targets;
mod weekly;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use sha2::{Digest, Sha256};

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let d = h.finalize();
    d.iter().map(|b| format!("{b:02x}")).collect()
}

fn generate(out: &PathBuf) {
    fs::create_dir_all(out).expect("create output dir");
    let mut sums = String::new();
    let mut write = |name: &str, text: String| {
        let path = out.join(name);
        fs::write(&path, &text).unwrap_or_else(|e| panic!("write {name}: {e}"));
        sums.push_str(&format!("{}  {name}\n", sha256_hex(text.as_bytes())));
        println!("wrote {} ({} bytes)", path.display(), text.len());
    };

    for c in [&targets::EW, &targets::DE, &targets::BE] {
        let series = weekly::build_country(c);
        write(&format!("weekly_{}.csv", c.code), weekly::country_csv(&series));
    }
    for spec in [&targets::BE_DAILY, &targets::DE_DAILY, &targets::EW_DAILY] {
        let s = daily::build_daily(spec);
        write(&format!("daily_{}.csv", spec.code), daily::daily_csv(&s));
    }
    fs::write(out.join("SHA256SUMS"), sums).expect("write SHA256SUMS");
    println!("wrote {}", out.join("SHA256SUMS").display());
}

fn main() -> ExitCode {
    let mut args = std::env::args().skip(1);
    let cmd = args.next().unwrap_or_default();
    let mut dir = PathBuf::from("fixtures");
    let mut with_tv = false;
    while let Some(a) = args.next() {
        match a.as_str() {
            "--out" | "--dir" => {
                dir = PathBuf::from(args.next().expect("missing directory argument"))
            }
            "--tv" => with_tv = true,
            other => {
                eprintln!("unknown argument {other}");
                return ExitCode::from(2);
            }
        }
    }
    match cmd.as_str() {
        "gen" => {
            generate(&dir);
            ExitCode::SUCCESS
        }
        "check" => {
            let r = check::run(&dir, with_tv);
            if r.failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        _ => {
            eprintln!("usage: emt-fixturegen gen [--out DIR] | check [--dir DIR] [--tv]");
            ExitCode::from(2)
        }
    }
}
