//! The `fblab` command line, driven in-process: train two seeds, probe a
//! checkpoint, aggregate the runs.

use fblab::harness::run_cli;

fn run(args: &[&str]) {
    println!("$ fblab {}", args.join(" "));
    let code = run_cli(std::iter::once("fblab").chain(args.iter().copied()));
    assert_eq!(code, 0, "exit code {code}");
}

fn main() {
    let root = std::env::temp_dir().join("fblab_cli_walkthrough");
    let dir = |name: &str| root.join(name).to_string_lossy().into_owned();
    let (r0, r1, probe, summary) = (dir("fb_base_seed0"), dir("fb_base_seed1"), dir("probe"), dir("summary"));

    run(&["train", "--preset", "fb_base", "--seed", "0", "--out", &r0]);
    run(&["train", "--preset", "fb_base", "--seed", "1", "--out", &r1]);
    let ckpt = format!("{r0}/last.bin");
    run(&["probe", "--checkpoint", &ckpt, "--landscape", "--diversity", "--noise", "--out", &probe]);
    run(&["summarize", &r0, &r1, "--out", &summary]);
    println!("{}", std::fs::read_to_string(format!("{summary}/summary.csv")).unwrap());
}
